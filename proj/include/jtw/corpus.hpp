#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace jtw {

using StopwordSet = std::unordered_set<std::string>;

// The bundled English stoplist (data/stopwords_en.txt).
const StopwordSet& default_stopwords();
StopwordSet parse_stopwords(std::string_view text);

// Whitespace split, ASCII lowercase, ASCII punctuation removed, stopwords and
// empty tokens dropped. Non-ASCII bytes pass through untouched.
std::vector<std::string> tokenize(std::string_view document, const StopwordSet& stopwords);
// The per-token part of tokenize(): lowercase, punctuation removed.
std::string normalize_token(std::string_view token);

// Dense token <-> id map. Ids are assigned by descending corpus frequency,
// ties broken lexicographically.
class Vocabulary {
public:
    Vocabulary() = default;
    // From an already ordered (id order) token list, e.g. a vocabulary file.
    Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> frequencies);

    static Vocabulary build(std::span<const std::vector<std::string>> documents,
                            std::size_t max_size, const StopwordSet& stopwords = {});

    std::size_t size() const noexcept { return id_to_token_.size(); }
    std::optional<std::uint32_t> find(std::string_view token) const;
    // Throws OovError when absent.
    std::uint32_t id(std::string_view token) const;
    const std::string& token(std::uint32_t id) const { return id_to_token_.at(id); }
    std::uint64_t frequency(std::uint32_t id) const { return frequency_.at(id); }
    const std::vector<std::string>& tokens() const noexcept { return id_to_token_; }
    const std::vector<std::uint64_t>& frequencies() const noexcept { return frequency_; }

    // In-vocabulary ids of `tokens`, OOV tokens dropped, order kept.
    std::vector<std::uint32_t> map(std::span<const std::string> tokens) const;

    // token<TAB>id<TAB>frequency lines, sorted by id.
    std::string to_tsv() const;
    static Vocabulary from_tsv(std::string_view text);
    // FNV-1a 64 over to_tsv(); identifies a vocabulary inside checkpoints.
    std::uint64_t hash() const;

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
        return a.id_to_token_ == b.id_to_token_ && a.frequency_ == b.frequency_;
    }

private:
    std::vector<std::string> id_to_token_;
    std::vector<std::uint64_t> frequency_;
    std::unordered_map<std::string, std::uint32_t> token_to_id_;
};

struct ContextCount {
    std::uint32_t id = 0;
    std::uint32_t count = 0;
    friend bool operator==(const ContextCount&, const ContextCount&) = default;
};

// A pivot word and its context window as a sparse bag of words, sorted by id.
struct TrainingInstance {
    std::uint32_t pivot = 0;
    std::vector<ContextCount> context;
    std::uint32_t doc = 0;       // document index in the corpus
    std::uint32_t position = 0;  // index in the document's in-vocabulary id sequence

    std::uint32_t context_size() const noexcept;
    friend bool operator==(const TrainingInstance&, const TrainingInstance&) = default;
};

struct CorpusStats {
    std::size_t n_documents = 0;
    std::size_t n_tokens = 0;     // in-vocabulary tokens
    std::size_t n_instances = 0;  // N
};

// Bag of words from a list of ids (duplicates counted), sorted by id.
std::vector<ContextCount> make_bow(std::span<const std::uint32_t> ids);

// One instance per position; up to window/2 ids on each side, truncated at the
// document boundary. The pivot itself is not part of its context.
std::vector<TrainingInstance> extract_windows(std::span<const std::uint32_t> doc,
                                              std::size_t window_size, std::uint32_t doc_index = 0);

struct Corpus {
    std::vector<std::vector<std::uint32_t>> documents;  // in-vocabulary ids
    std::vector<TrainingInstance> instances;
    CorpusStats stats;
};

// Tokenized documents -> id sequences -> windows, in document order.
Corpus build_corpus(std::span<const std::vector<std::string>> tokenized, const Vocabulary& vocab,
                    std::size_t window_size);

// Shuffled minibatches over instance indices. Each epoch uses a permutation
// seeded from (seed, epoch), so the schedule is reproducible and epochs can be
// replayed independently. The final batch may be short.
class MinibatchStream {
public:
    MinibatchStream(std::size_t n_instances, std::size_t batch_size, std::uint64_t seed);

    void start_epoch(std::size_t epoch);
    // Next batch of the current epoch; empty span at the end of the epoch.
    std::span<const std::size_t> next();
    std::size_t batches_per_epoch() const noexcept;
    std::size_t batch_size() const noexcept { return batch_size_; }

private:
    std::size_t batch_size_;
    std::uint64_t seed_;
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
};

}  // namespace jtw
