#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jtw/corpus.hpp"
#include "jtw/densemode.hpp"
#include "jtw/io.hpp"
#include "jtw/model.hpp"

namespace jtw {

// Encoder posterior for one occurrence. The topic distribution is computed
// from the posterior mean, so inference involves no sampling.
struct ContextualEmbedding {
    std::uint32_t word = 0;
    GaussianPosterior posterior;
    TopicDistribution topics;
};

// Mean of the posterior means over every occurrence of a word as pivot.
struct UniversalEmbedding {
    std::uint32_t word = 0;
    std::vector<double> mean;
    std::size_t count = 0;
};

ContextualEmbedding contextual_embed(const TrainingInstance& occurrence, const ParamSet& params);
ContextualEmbedding contextual_embed(std::uint32_t pivot, std::span<const ContextCount> context,
                                     const ParamSet& params);
// Token-level entry point; throws OovError for an out-of-vocabulary pivot.
// Out-of-vocabulary context tokens are ignored.
ContextualEmbedding contextual_embed(std::string_view pivot,
                                     std::span<const std::string> context_tokens,
                                     const Vocabulary& vocab, const ParamSet& params);
ContextualEmbedding contextual_embed(const DenseInstance& occurrence, const ParamSet& params);

std::map<std::uint32_t, UniversalEmbedding> universal_embed(
    std::span<const TrainingInstance> corpus, const ParamSet& params);
std::map<std::uint32_t, UniversalEmbedding> universal_embed(std::span<const DenseInstance> corpus,
                                                            const ParamSet& params);

// Per-word mean of the contextual topic distributions, renormalized.
std::map<std::uint32_t, TopicDistribution> word_topic_distributions(
    std::span<const TrainingInstance> corpus, const ParamSet& params);
std::map<std::uint32_t, TopicDistribution> word_topic_distributions(
    std::span<const DenseInstance> corpus, const ParamSet& params);
// Throws ConfigError if `word` never occurs as a pivot.
TopicDistribution word_topic_distribution(std::uint32_t word,
                                          std::span<const TrainingInstance> corpus,
                                          const ParamSet& params);

// Each in-vocabulary token acts as pivot with the rest of the sentence as its
// context; the resulting distributions are averaged.
TopicDistribution sentence_topic_distribution(std::span<const std::uint32_t> sentence,
                                              const ParamSet& params);
TopicDistribution sentence_topic_distribution(std::span<const std::string> tokens,
                                              const Vocabulary& vocab, const ParamSet& params);

// Per topic t: softmax(beta_t) sorted by descending probability, ties by id.
std::vector<std::vector<TopWord>> topic_top_words(const ParamSet& params, std::size_t k);

enum class SimilarityMode : std::uint8_t { cosine, symmetric_kl };

double cosine_similarity(std::span<const double> a, std::span<const double> b);
// KL(a || b) between diagonal Gaussians.
double gaussian_kl(const GaussianPosterior& a, const GaussianPosterior& b);
// cosine of the means, or -(KL(a||b) + KL(b||a)) / 2.
double similarity(const GaussianPosterior& a, const GaussianPosterior& b, SimilarityMode mode);

EmbeddingTable embedding_table(const std::map<std::uint32_t, UniversalEmbedding>& embeddings,
                               const Vocabulary& vocab);

}  // namespace jtw
