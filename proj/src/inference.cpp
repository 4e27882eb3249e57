#include "jtw/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jtw/errors.hpp"

namespace jtw {

namespace {

// Reuses one graph across many encoder evaluations.
class Encoder {
public:
    explicit Encoder(const ParamSet& params) : params_(params), vocab_size_(params[kPivotB].size()) {}

    ContextualEmbedding operator()(const TrainingInstance& x) {
        g_.clear();
        const ParamVars p = bind_params(g_, params_, nullptr);
        return finish(x.pivot, p, build_encoder(g_, p, encoder_input(x, vocab_size_)));
    }

    ContextualEmbedding operator()(const DenseInstance& x) {
        g_.clear();
        const ParamVars p = bind_params(g_, params_, nullptr);
        Var input = g_.constant(dense_encoder_input(x, vocab_size_));
        return finish(x.pivot, p, build_encoder(g_, p, input));
    }

private:
    ContextualEmbedding finish(std::uint32_t word, const ParamVars& p, const EncoderVars& q) {
        ContextualEmbedding out;
        out.word = word;
        const auto& mu = g_.value(q.mu);
        out.posterior.mu.assign(mu.values().begin(), mu.values().end());
        const auto& sigma = g_.value(g_.exp(q.log_sigma));
        out.posterior.sigma.assign(sigma.values().begin(), sigma.values().end());
        const auto& zeta = g_.value(build_topic(g_, p, q.mu));
        out.topics.zeta.assign(zeta.values().begin(), zeta.values().end());
        return out;
    }

    Graph g_;
    const ParamSet& params_;
    std::size_t vocab_size_;
};

template <class Instance>
std::map<std::uint32_t, UniversalEmbedding> universal_impl(std::span<const Instance> corpus,
                                                           const ParamSet& params) {
    Encoder enc(params);
    std::map<std::uint32_t, UniversalEmbedding> out;
    for (const auto& x : corpus) {
        const auto e = enc(x);
        auto& u = out[x.pivot];
        if (u.count == 0) {
            u.word = x.pivot;
            u.mean.assign(e.posterior.mu.size(), 0.0);
        }
        for (std::size_t d = 0; d < u.mean.size(); ++d) u.mean[d] += e.posterior.mu[d];
        ++u.count;
    }
    for (auto& [id, u] : out)
        for (double& v : u.mean) v /= static_cast<double>(u.count);
    return out;
}

void renormalize(std::vector<double>& p) {
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& v : p) v /= s;
}

template <class Instance>
std::map<std::uint32_t, TopicDistribution> word_topics_impl(std::span<const Instance> corpus,
                                                            const ParamSet& params) {
    Encoder enc(params);
    std::map<std::uint32_t, TopicDistribution> sums;
    std::map<std::uint32_t, std::size_t> counts;
    for (const auto& x : corpus) {
        const auto e = enc(x);
        auto& acc = sums[x.pivot].zeta;
        if (acc.empty()) acc.assign(e.topics.zeta.size(), 0.0);
        for (std::size_t t = 0; t < acc.size(); ++t) acc[t] += e.topics.zeta[t];
        ++counts[x.pivot];
    }
    for (auto& [id, dist] : sums) {
        for (double& v : dist.zeta) v /= static_cast<double>(counts[id]);
        renormalize(dist.zeta);
    }
    return sums;
}

}  // namespace

ContextualEmbedding contextual_embed(const TrainingInstance& occurrence, const ParamSet& params) {
    Encoder enc(params);
    return enc(occurrence);
}

ContextualEmbedding contextual_embed(std::uint32_t pivot, std::span<const ContextCount> context,
                                     const ParamSet& params) {
    TrainingInstance x;
    x.pivot = pivot;
    x.context.assign(context.begin(), context.end());
    return contextual_embed(x, params);
}

ContextualEmbedding contextual_embed(std::string_view pivot,
                                     std::span<const std::string> context_tokens,
                                     const Vocabulary& vocab, const ParamSet& params) {
    const auto ids = vocab.map(context_tokens);
    const auto bow = make_bow(ids);
    return contextual_embed(vocab.id(pivot), bow, params);
}

ContextualEmbedding contextual_embed(const DenseInstance& occurrence, const ParamSet& params) {
    Encoder enc(params);
    return enc(occurrence);
}

std::map<std::uint32_t, UniversalEmbedding> universal_embed(
    std::span<const TrainingInstance> corpus, const ParamSet& params) {
    return universal_impl(corpus, params);
}

std::map<std::uint32_t, UniversalEmbedding> universal_embed(std::span<const DenseInstance> corpus,
                                                            const ParamSet& params) {
    return universal_impl(corpus, params);
}

std::map<std::uint32_t, TopicDistribution> word_topic_distributions(
    std::span<const TrainingInstance> corpus, const ParamSet& params) {
    return word_topics_impl(corpus, params);
}

std::map<std::uint32_t, TopicDistribution> word_topic_distributions(
    std::span<const DenseInstance> corpus, const ParamSet& params) {
    return word_topics_impl(corpus, params);
}

TopicDistribution word_topic_distribution(std::uint32_t word,
                                          std::span<const TrainingInstance> corpus,
                                          const ParamSet& params) {
    Encoder enc(params);
    std::vector<double> acc;
    std::size_t n = 0;
    for (const auto& x : corpus) {
        if (x.pivot != word) continue;
        const auto e = enc(x);
        if (acc.empty()) acc.assign(e.topics.zeta.size(), 0.0);
        for (std::size_t t = 0; t < acc.size(); ++t) acc[t] += e.topics.zeta[t];
        ++n;
    }
    if (n == 0) throw ConfigError("word id " + std::to_string(word) + " never occurs as a pivot");
    for (double& v : acc) v /= static_cast<double>(n);
    renormalize(acc);
    return {std::move(acc)};
}

TopicDistribution sentence_topic_distribution(std::span<const std::uint32_t> sentence,
                                              const ParamSet& params) {
    if (sentence.empty()) throw ConfigError("sentence has no in-vocabulary tokens");
    Encoder enc(params);
    std::vector<double> acc;
    std::vector<std::uint32_t> rest;
    for (std::size_t i = 0; i < sentence.size(); ++i) {
        rest.clear();
        for (std::size_t j = 0; j < sentence.size(); ++j)
            if (j != i) rest.push_back(sentence[j]);
        TrainingInstance x;
        x.pivot = sentence[i];
        x.context = make_bow(rest);
        const auto e = enc(x);
        if (acc.empty()) acc.assign(e.topics.zeta.size(), 0.0);
        for (std::size_t t = 0; t < acc.size(); ++t) acc[t] += e.topics.zeta[t];
    }
    for (double& v : acc) v /= static_cast<double>(sentence.size());
    renormalize(acc);
    return {std::move(acc)};
}

TopicDistribution sentence_topic_distribution(std::span<const std::string> tokens,
                                              const Vocabulary& vocab, const ParamSet& params) {
    const auto ids = vocab.map(tokens);
    return sentence_topic_distribution(ids, params);
}

std::vector<std::vector<TopWord>> topic_top_words(const ParamSet& params, std::size_t k) {
    const Tensor& beta = params[kBeta];
    const std::size_t T = beta.rows(), V = beta.cols();
    if (k > V) throw ConfigError("k = " + std::to_string(k) + " exceeds vocabulary size");
    std::vector<std::vector<TopWord>> out(T);
    std::vector<TopWord> row(V);
    for (std::size_t t = 0; t < T; ++t) {
        const auto logits = beta.row(t);
        const double m = *std::max_element(logits.begin(), logits.end());
        double z = 0.0;
        for (std::size_t v = 0; v < V; ++v) {
            row[v] = {static_cast<std::uint32_t>(v), std::exp(logits[v] - m)};
            z += row[v].prob;
        }
        for (auto& w : row) w.prob /= z;
        std::stable_sort(row.begin(), row.end(), [](const TopWord& a, const TopWord& b) {
            if (a.prob != b.prob) return a.prob > b.prob;
            return a.id < b.id;
        });
        out[t].assign(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k));
    }
    return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ConfigError("cosine: dimension mismatch");
    double aa = 0.0, bb = 0.0, ab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        aa += a[i] * a[i];
        bb += b[i] * b[i];
        ab += a[i] * b[i];
    }
    if (aa == 0.0 || bb == 0.0) throw ConfigError("cosine: zero vector");
    return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

double gaussian_kl(const GaussianPosterior& a, const GaussianPosterior& b) {
    const std::size_t D = a.mu.size();
    if (a.sigma.size() != D || b.mu.size() != D || b.sigma.size() != D) {
        throw ConfigError("gaussian_kl: dimension mismatch");
    }
    double acc = 0.0;
    for (std::size_t d = 0; d < D; ++d) {
        const double va = a.sigma[d] * a.sigma[d], vb = b.sigma[d] * b.sigma[d];
        const double diff = a.mu[d] - b.mu[d];
        acc += std::log(vb / va) + (va + diff * diff) / vb - 1.0;
    }
    return 0.5 * acc;
}

double similarity(const GaussianPosterior& a, const GaussianPosterior& b, SimilarityMode mode) {
    if (mode == SimilarityMode::cosine) return cosine_similarity(a.mu, b.mu);
    return -0.5 * (gaussian_kl(a, b) + gaussian_kl(b, a));
}

EmbeddingTable embedding_table(const std::map<std::uint32_t, UniversalEmbedding>& embeddings,
                               const Vocabulary& vocab) {
    EmbeddingTable table;
    for (const auto& [id, u] : embeddings) {
        table.dim = u.mean.size();
        table.words.push_back(vocab.token(id));
        table.vectors.push_back(u.mean);
    }
    return table;
}

}  // namespace jtw
