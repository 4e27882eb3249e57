#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "jtw/corpus.hpp"
#include "jtw/io.hpp"
#include "jtw/params.hpp"

namespace jtw {

// ------------------------------------------------------------ rank statistics

// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> xs);
// Pearson correlation of the average ranks. Throws ConfigError for fewer
// than two pairs, unequal lengths, or a constant input.
double spearman(std::span<const double> xs, std::span<const double> ys);

// ------------------------------------------------------------ word similarity

using WordVectors = std::unordered_map<std::string, std::vector<double>>;
WordVectors word_vectors(const EmbeddingTable& table);

struct SimPair {
    std::string word1, word2;
    double gold = 0.0;
};

struct SimBenchmark {
    std::string name;
    std::vector<SimPair> pairs;
};

// word1<TAB>word2<TAB>score per line; words are lowercased.
SimBenchmark parse_sim_benchmark(std::string_view tsv, std::string name);

struct SimResult {
    double rho = 0.0;
    std::size_t covered = 0;
    std::size_t total = 0;
    double coverage() const { return total ? static_cast<double>(covered) / total : 0.0; }
};

// Pairs with a word missing from `vectors` are excluded. Throws ConfigError
// when no pair is covered.
SimResult eval_word_similarity(const SimBenchmark& bench, const WordVectors& vectors);

// ------------------------------------------------------------ lexical substitution

// (C cos(y, x) + sum_c cos(y, w_c)) / 2C for target x, candidate y.
double baladd(std::span<const double> x, std::span<const double> y,
              std::span<const std::vector<double>> context);

struct LexsubInstance {
    std::string target;
    std::size_t position = 0;
    std::vector<std::string> sentence;
    std::vector<std::string> candidates;
    std::vector<std::string> gold;
};

// target<TAB>position<TAB>sentence<TAB>candidates<TAB>gold, the last two
// comma-separated. Tokens are normalized like corpus tokens.
std::vector<LexsubInstance> parse_lexsub(std::string_view text);

enum class LexsubMode : std::uint8_t { contextual, baladd };
LexsubMode parse_lexsub_mode(std::string_view s);

struct LexsubOptions {
    LexsubMode mode = LexsubMode::contextual;
    // Context is the sentence tokens within window/2 positions of the target.
    std::size_t window = 10;
};

struct LexsubResult {
    std::size_t hits = 0;
    std::size_t evaluated = 0;
    std::size_t excluded = 0;  // no usable candidate, OOV target, or no context
    std::size_t skipped_candidates = 0;
    double accuracy() const { return evaluated ? static_cast<double>(hits) / evaluated : 0.0; }
};

// `universal` supplies the context-free vectors for baladd mode and may be
// null in contextual mode.
LexsubResult eval_lexsub(std::span<const LexsubInstance> instances, const ParamSet& params,
                         const Vocabulary& vocab, const LexsubOptions& options,
                         const WordVectors* universal);

// ------------------------------------------------------------ topic coherence

inline constexpr std::size_t kCoherenceWindow = 110;

// Boolean sliding-window document frequencies for a fixed word list. A
// document shorter than the window counts as one window.
struct WindowCounts {
    std::uint64_t windows = 0;
    std::vector<std::uint64_t> single;               // per word
    std::vector<std::vector<std::uint64_t>> joint;  // symmetric, diagonal = single
};

WindowCounts count_windows(std::span<const std::vector<std::uint32_t>> documents,
                           std::span<const std::uint32_t> words, std::size_t window);

// NPMI from window counts: 0 when either word never occurs, -1 when they
// never co-occur, 1 for a word with itself.
double npmi(std::uint64_t n_a, std::uint64_t n_b, std::uint64_t n_ab, std::uint64_t windows);

struct TopicCoherence {
    std::vector<double> per_topic;
    double mean = 0.0;
    std::vector<std::uint32_t> absent_words;  // top words with zero reference count
};

// For each topic: vector v_i = (npmi(w_i, w_j))_j over its top words,
// score = mean cosine over all pairs i < j (zero vectors contribute 0).
TopicCoherence npmi_coherence(const std::vector<std::vector<std::uint32_t>>& topic_words,
                              std::span<const std::vector<std::uint32_t>> reference,
                              std::size_t window = kCoherenceWindow);

}  // namespace jtw
