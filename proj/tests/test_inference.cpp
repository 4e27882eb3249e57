#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "doctest.h"
#include "jtw/errors.hpp"
#include "jtw/inference.hpp"
#include "test_util.hpp"

using namespace jtw;

namespace {

ModelConfig small_model() {
    ModelConfig c;
    c.vocab_size = 8;
    c.latent_dim = 3;
    c.topics = 3;
    c.hidden = 5;
    return c;
}

void check_simplex(const std::vector<double>& p) {
    double s = 0.0;
    for (double v : p) {
        CHECK(v > 0.0);
        s += v;
    }
    CHECK(std::abs(s - 1.0) < 1e-9);
}

}  // namespace

TEST_CASE("contextual embeddings") {
    const auto p = init_params(small_model(), 3);
    const auto lone = contextual_embed(4, {}, p);
    CHECK(lone.word == 4);
    CHECK(lone.posterior.mu.size() == 3);
    check_simplex(lone.topics.zeta);

    const std::vector<ContextCount> ctx{{1, 2}, {6, 1}};
    const auto a = contextual_embed(2, ctx, p);
    const auto b = contextual_embed(2, ctx, p);
    CHECK(a.posterior.mu == b.posterior.mu);
    CHECK(a.posterior.sigma == b.posterior.sigma);
    CHECK(a.topics.zeta == b.topics.zeta);

    // Topics come from the posterior mean.
    const auto from_mu = topic_transform(a.posterior.mu, p);
    for (std::size_t t = 0; t < 3; ++t) CHECK(a.topics.zeta[t] == doctest::Approx(from_mu.zeta[t]).epsilon(1e-14));

    Vocabulary vocab({"a", "b", "c", "d", "e", "f", "g", "h"}, {8, 7, 6, 5, 4, 3, 2, 1});
    const std::vector<std::string> words{"b", "b", "g", "zzz"};
    const auto c = contextual_embed("c", words, vocab, p);
    CHECK(c.posterior.mu == a.posterior.mu);
    CHECK_THROWS_AS(contextual_embed("nope", words, vocab, p), OovError);
}

TEST_CASE("universal embeddings average posterior means") {
    const auto p = init_params(small_model(), 4);
    std::mt19937_64 rng(4);
    std::vector<TrainingInstance> corpus;
    for (int i = 0; i < 40; ++i) corpus.push_back(testutil::random_instance(rng, 7, 3));
    // Word 7 occurs exactly once.
    TrainingInstance once;
    once.pivot = 7;
    once.context = {{0, 1}};
    corpus.push_back(once);

    const auto u = universal_embed(corpus, p);
    REQUIRE(u.contains(7));
    CHECK(u.at(7).count == 1);
    CHECK(u.at(7).mean == contextual_embed(once, p).posterior.mu);

    // Two-pass oracle: collect, then average.
    std::map<std::uint32_t, std::vector<std::vector<double>>> seen;
    for (const auto& x : corpus) seen[x.pivot].push_back(contextual_embed(x, p).posterior.mu);
    CHECK(u.size() == seen.size());
    for (const auto& [w, mus] : seen) {
        CHECK(u.at(w).count == mus.size());
        for (std::size_t d = 0; d < 3; ++d) {
            double m = 0.0;
            for (const auto& mu : mus) m += mu[d];
            CHECK(u.at(w).mean[d] == doctest::Approx(m / mus.size()).epsilon(1e-13));
        }
    }

    auto shuffled = corpus;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto u2 = universal_embed(shuffled, p);
    for (const auto& [w, e] : u)
        for (std::size_t d = 0; d < 3; ++d) CHECK(u2.at(w).mean[d] == doctest::Approx(e.mean[d]).epsilon(1e-12));
}

TEST_CASE("word topic distributions") {
    const auto p = init_params(small_model(), 5);
    std::mt19937_64 rng(5);
    std::vector<TrainingInstance> corpus;
    for (int i = 0; i < 30; ++i) corpus.push_back(testutil::random_instance(rng, 6, 4));
    TrainingInstance once;
    once.pivot = 7;
    corpus.push_back(once);

    const auto single = word_topic_distribution(7, corpus, p);
    const auto direct = contextual_embed(once, p).topics.zeta;
    for (std::size_t t = 0; t < 3; ++t) CHECK(single.zeta[t] == doctest::Approx(direct[t]).epsilon(1e-14));
    CHECK_THROWS_AS(word_topic_distribution(6, corpus, p), ConfigError);

    const auto all = word_topic_distributions(corpus, p);
    for (const auto& [w, dist] : all) {
        check_simplex(dist.zeta);
        const auto one = word_topic_distribution(w, corpus, p);
        for (std::size_t t = 0; t < 3; ++t) CHECK(dist.zeta[t] == doctest::Approx(one.zeta[t]).epsilon(1e-13));
    }
}

TEST_CASE("sentence topic distributions") {
    const auto p = init_params(small_model(), 6);
    const std::vector<std::uint32_t> one{3};
    const auto s1 = sentence_topic_distribution(one, p);
    const auto e1 = contextual_embed(3, {}, p).topics.zeta;
    for (std::size_t t = 0; t < 3; ++t) CHECK(s1.zeta[t] == doctest::Approx(e1[t]).epsilon(1e-14));

    const std::vector<std::uint32_t> s{1, 4, 4, 6, 0};
    std::vector<std::uint32_t> perm{6, 4, 0, 1, 4};
    const auto a = sentence_topic_distribution(s, p);
    const auto b = sentence_topic_distribution(perm, p);
    check_simplex(a.zeta);
    for (std::size_t t = 0; t < 3; ++t) CHECK(a.zeta[t] == doctest::Approx(b.zeta[t]).epsilon(1e-13));

    CHECK_THROWS_AS(sentence_topic_distribution(std::span<const std::uint32_t>{}, p), ConfigError);
    Vocabulary vocab({"a", "b"}, {2, 1});
    const std::vector<std::string> oov{"x", "y"};
    CHECK_THROWS_AS(sentence_topic_distribution(oov, vocab, p), ConfigError);
}

TEST_CASE("topic top words") {
    auto c = small_model();
    ParamSet p = zero_params(c);
    const auto flat = topic_top_words(p, 4);
    REQUIRE(flat.size() == 3);
    for (const auto& t : flat) {
        for (std::size_t r = 0; r < 4; ++r) {
            CHECK(t[r].id == r);
            CHECK(t[r].prob == doctest::Approx(1.0 / 8));
        }
    }

    p[kBeta].at(0, 5) = 4.0;
    p[kBeta].at(0, 2) = 3.0;
    p[kBeta].at(2, 7) = 6.0;
    const auto spiked = topic_top_words(p, 3);
    CHECK(spiked[0][0].id == 5);
    CHECK(spiked[0][1].id == 2);
    CHECK(spiked[2][0].id == 7);

    p = init_params(c, 8);
    for (const auto& t : topic_top_words(p, 8)) {
        for (std::size_t r = 1; r < t.size(); ++r) CHECK(t[r].prob <= t[r - 1].prob);
    }
    CHECK_THROWS_AS(topic_top_words(p, 9), ConfigError);
}

TEST_CASE("similarity measures") {
    const std::vector<double> v{0.3, -1.0, 2.0};
    CHECK(cosine_similarity(v, v) == doctest::Approx(1.0).epsilon(1e-15));
    const std::vector<double> zero{0.0, 0.0, 0.0};
    CHECK_THROWS_AS(cosine_similarity(v, zero), ConfigError);

    GaussianPosterior a{{0.1, -0.4}, {0.8, 1.3}}, b{{1.0, 0.2}, {0.5, 2.0}};
    CHECK(similarity(a, a, SimilarityMode::symmetric_kl) == 0.0);
    CHECK(similarity(a, b, SimilarityMode::symmetric_kl) < 0.0);
    CHECK(similarity(a, b, SimilarityMode::cosine) == doctest::Approx(cosine_similarity(a.mu, b.mu)));

    // KL(a || b) against sampling from a.
    std::mt19937_64 rng(10);
    std::normal_distribution<double> n01;
    const int S = 400000;
    double acc = 0.0;
    for (int s = 0; s < S; ++s) {
        double lr = 0.0;
        for (std::size_t d = 0; d < 2; ++d) {
            const double z = a.mu[d] + a.sigma[d] * n01(rng);
            const double ua = (z - a.mu[d]) / a.sigma[d], ub = (z - b.mu[d]) / b.sigma[d];
            lr += -0.5 * ua * ua - std::log(a.sigma[d]) + 0.5 * ub * ub + std::log(b.sigma[d]);
        }
        acc += lr;
    }
    CHECK(std::abs(gaussian_kl(a, b) - acc / S) < 1e-2);
}

TEST_CASE("embedding table export") {
    Vocabulary vocab({"x", "y"}, {2, 1});
    std::map<std::uint32_t, UniversalEmbedding> u;
    u[1] = {1, {0.5, 0.25}, 3};
    const auto t = embedding_table(u, vocab);
    CHECK(t.dim == 2);
    CHECK(t.words == std::vector<std::string>{"y"});
    CHECK(to_word2vec_text(t) == "1 2\ny 0.5 0.25\n");
}
