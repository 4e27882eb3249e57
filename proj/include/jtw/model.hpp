#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "jtw/corpus.hpp"
#include "jtw/graph.hpp"
#include "jtw/params.hpp"

namespace jtw {

enum class InputMode : std::uint8_t { bow = 0, dense = 1 };

std::string_view to_string(InputMode mode);
InputMode parse_input_mode(std::string_view s);

struct ModelConfig {
    std::size_t vocab_size = 8000;  // V
    std::size_t latent_dim = 100;   // D
    std::size_t topics = 50;        // T
    std::size_t hidden = 256;       // H, encoder hidden width
    std::size_t samples = 1;        // S, noise samples per instance
    InputMode mode = InputMode::bow;
    std::size_t dense_dim = 0;      // E, width of pre-trained vectors (dense mode)

    void validate() const;
    // Width of one observation: V in bow mode, E in dense mode.
    std::size_t observation_dim() const noexcept;
    std::size_t encoder_input_dim() const noexcept { return 2 * observation_dim(); }

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Parameter layout. Shapes, with O = observation_dim():
//   encoder.w   (2O x H)   encoder.b   (H)
//   mu.w        (H x D)    mu.b        (D)
//   log_sigma.w (H x D)    log_sigma.b (D)
//   pivot.w     (O x D)    pivot.b     (O)
//   topic.w     (T x D)    topic.b     (T)
//   beta        (T x O)    context.b   (O)
enum ParamId : std::size_t {
    kEncoderW,
    kEncoderB,
    kMuW,
    kMuB,
    kLogSigmaW,
    kLogSigmaB,
    kPivotW,
    kPivotB,
    kTopicW,
    kTopicB,
    kBeta,
    kContextB,
    kParamCount,
};

extern const std::array<std::string_view, kParamCount> kParamNames;

std::vector<std::size_t> param_shape(const ModelConfig& config, ParamId id);
ParamSet zero_params(const ModelConfig& config);
// Every entry drawn from N(0, 0.1) (variance 0.1).
ParamSet init_params(const ModelConfig& config, std::uint64_t seed);
// Throws ConfigError unless `params` has exactly the layout of `config`.
void check_params(const ModelConfig& config, const ParamSet& params);

struct GaussianPosterior {
    std::vector<double> mu;
    std::vector<double> sigma;
};

using NoiseSample = std::vector<double>;

struct TopicDistribution {
    std::vector<double> zeta;
};

struct ElboTerms {
    double elbo = 0.0;
    double recon = 0.0;  // (1/S) sum_s log p(x, w | z_s)
    double kl = 0.0;     // KL(q || N(0, I))
};

std::vector<NoiseSample> draw_noise(std::mt19937_64& rng, std::size_t samples, std::size_t dim);

// ----------------------------------------------------------- graph builders
//
// Shared by training, inference and the dense-vector variant.

struct ParamVars {
    std::array<Var, kParamCount> v;
    Var operator[](ParamId id) const { return v[id]; }
};

ParamVars bind_params(Graph& g, const ParamSet& params, ParamSet* grads);

struct EncoderVars {
    Var mu;
    Var log_sigma;
};

// One-hot pivot in [0, V), L1-normalized context counts in [V, 2V).
SparseVector encoder_input(const TrainingInstance& instance, std::size_t vocab_size);

EncoderVars build_encoder(Graph& g, const ParamVars& p, const SparseVector& input);
EncoderVars build_encoder(Graph& g, const ParamVars& p, Var dense_input);
Var build_reparameterize(Graph& g, const EncoderVars& q, const NoiseSample& eps);
Var build_pivot_logits(Graph& g, const ParamVars& p, Var z);
Var build_topic(Graph& g, const ParamVars& p, Var z);
Var build_context_logits(Graph& g, const ParamVars& p, Var zeta);
Var build_kl(Graph& g, const EncoderVars& q);
// log p(x_n, w_n | z) with the topic indicators marginalised.
Var build_log_likelihood(Graph& g, const ParamVars& p, const TrainingInstance& instance, Var z);

// Builds -elbo for one instance; when `grad` is set, back-propagates
// `grad_scale * d(-elbo)` into it. `g` is scratch space.
ElboTerms instance_loss(Graph& g, const TrainingInstance& instance, const ParamSet& params,
                        std::span<const NoiseSample> eps, ParamSet* grad, double grad_scale = 1.0);

// --------------------------------------------------------------- value API

GaussianPosterior encode(const TrainingInstance& instance, const ParamSet& params);
std::vector<double> reparameterize(const GaussianPosterior& q, std::span<const double> eps);
std::vector<double> decode_pivot(std::span<const double> z, const ParamSet& params);
TopicDistribution topic_transform(std::span<const double> z, const ParamSet& params);
std::vector<double> decode_context(const TopicDistribution& zeta, const ParamSet& params);
double log_likelihood(const TrainingInstance& instance, std::span<const double> z,
                      const ParamSet& params);
double kl_to_prior(const GaussianPosterior& q);
ElboTerms elbo(const TrainingInstance& instance, const ParamSet& params,
               std::span<const NoiseSample> eps);

}  // namespace jtw
