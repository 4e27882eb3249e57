#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jtw/corpus.hpp"
#include "jtw/densemode.hpp"
#include "jtw/model.hpp"
#include "jtw/params.hpp"

namespace jtw {

// Shortest decimal text that parses back to the same double ('.' separator,
// no locale).
std::string format_double(double v);
double parse_double(std::string_view s);

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// One document per line; a trailing newline does not add a document.
std::vector<std::string> split_lines(std::string_view text);
std::vector<std::string> split(std::string_view s, char sep);

// ------------------------------------------------------------ word2vec text

struct EmbeddingTable {
    std::size_t dim = 0;
    std::vector<std::string> words;
    std::vector<std::vector<double>> vectors;

    friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;
};

// "<count> <dim>" header, then "word v1 ... vD" per line.
std::string to_word2vec_text(const EmbeddingTable& table);
EmbeddingTable parse_word2vec_text(std::string_view text);
DenseVectors load_dense_vectors(const std::filesystem::path& path);

// ------------------------------------------------------------ checkpoints

struct Checkpoint {
    ModelConfig model;
    ParamSet params;
    std::uint64_t vocab_hash = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Little-endian container: magic, version, model config, seed, vocabulary
// hash, named tensors with shapes, trailing FNV-1a checksum.
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// ------------------------------------------------------------ exports

std::string csv_escape(std::string_view field);

struct TopWord {
    std::uint32_t id = 0;
    double prob = 0.0;
};

// topic_id<TAB>rank<TAB>word<TAB>prob, rank starting at 1.
std::string topic_table_tsv(const std::vector<std::vector<TopWord>>& topics, const Vocabulary& vocab);

// label,topic_0,...,topic_{T-1}
std::string distribution_csv(std::span<const std::string> labels,
                             std::span<const std::vector<double>> distributions);

}  // namespace jtw
