#include "jtw/model.hpp"

#include <cmath>
#include <string>

#include "jtw/errors.hpp"

namespace jtw {

const std::array<std::string_view, kParamCount> kParamNames = {
    "encoder.w", "encoder.b", "mu.w",     "mu.b",    "log_sigma.w", "log_sigma.b",
    "pivot.w",   "pivot.b",   "topic.w",  "topic.b", "beta",        "context.b",
};

std::string_view to_string(InputMode mode) { return mode == InputMode::bow ? "bow" : "dense"; }

InputMode parse_input_mode(std::string_view s) {
    if (s == "bow") return InputMode::bow;
    if (s == "dense") return InputMode::dense;
    throw ConfigError("unknown mode '" + std::string(s) + "' (expected bow or dense)");
}

void ModelConfig::validate() const {
    auto need = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("model config: ") + what);
    };
    need(latent_dim >= 1, "latent_dim must be >= 1");
    need(topics >= 1, "topics must be >= 1");
    need(hidden >= 1, "hidden must be >= 1");
    need(samples >= 1, "samples must be >= 1");
    need(vocab_size >= 1, "vocab_size must be >= 1");
    if (mode == InputMode::dense) need(dense_dim >= 1, "dense mode needs dense_dim >= 1");
}

std::size_t ModelConfig::observation_dim() const noexcept {
    return mode == InputMode::bow ? vocab_size : dense_dim;
}

std::vector<std::size_t> param_shape(const ModelConfig& c, ParamId id) {
    const std::size_t O = c.observation_dim(), H = c.hidden, D = c.latent_dim, T = c.topics;
    switch (id) {
        case kEncoderW: return {2 * O, H};
        case kEncoderB: return {H};
        case kMuW: return {H, D};
        case kMuB: return {D};
        case kLogSigmaW: return {H, D};
        case kLogSigmaB: return {D};
        case kPivotW: return {O, D};
        case kPivotB: return {O};
        case kTopicW: return {T, D};
        case kTopicB: return {T};
        case kBeta: return {T, O};
        case kContextB: return {O};
        case kParamCount: break;
    }
    throw UsageError("param_shape: bad id");
}

ParamSet zero_params(const ModelConfig& config) {
    config.validate();
    ParamSet p;
    for (std::size_t i = 0; i < kParamCount; ++i) {
        p.add(std::string(kParamNames[i]), Tensor(param_shape(config, static_cast<ParamId>(i))));
    }
    return p;
}

ParamSet init_params(const ModelConfig& config, std::uint64_t seed) {
    ParamSet p = zero_params(config);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.1));
    for (auto& e : p)
        for (double& v : e.value.values()) v = normal(rng);
    return p;
}

void check_params(const ModelConfig& config, const ParamSet& params) {
    config.validate();
    if (params.size() != kParamCount) {
        throw ConfigError("expected " + std::to_string(kParamCount) + " parameter tensors, got " +
                          std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < kParamCount; ++i) {
        if (params.name(i) != kParamNames[i]) {
            throw ConfigError("parameter " + std::to_string(i) + " is '" + params.name(i) +
                              "', expected '" + std::string(kParamNames[i]) + "'");
        }
        const auto want = param_shape(config, static_cast<ParamId>(i));
        if (params[i].shape() != want) {
            throw ConfigError("parameter '" + params.name(i) + "' has shape " +
                              shape_string(params[i].shape()) + ", expected " + shape_string(want));
        }
    }
}

std::vector<NoiseSample> draw_noise(std::mt19937_64& rng, std::size_t samples, std::size_t dim) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<NoiseSample> eps(samples, NoiseSample(dim));
    for (auto& e : eps)
        for (double& v : e) v = normal(rng);
    return eps;
}

// ----------------------------------------------------------- graph builders

ParamVars bind_params(Graph& g, const ParamSet& params, ParamSet* grads) {
    if (params.size() != kParamCount) throw ConfigError("bind_params: wrong parameter layout");
    ParamVars p;
    for (std::size_t i = 0; i < kParamCount; ++i) {
        p.v[i] = g.param(params[i], grads ? &(*grads)[i] : nullptr);
    }
    return p;
}

SparseVector encoder_input(const TrainingInstance& instance, std::size_t vocab_size) {
    if (instance.pivot >= vocab_size) {
        throw ConfigError("pivot id " + std::to_string(instance.pivot) + " >= V");
    }
    SparseVector x;
    x.dim = 2 * vocab_size;
    x.index.reserve(instance.context.size() + 1);
    x.value.reserve(instance.context.size() + 1);
    x.index.push_back(instance.pivot);
    x.value.push_back(1.0);
    const double total = instance.context_size();
    for (const auto& cc : instance.context) {
        if (cc.id >= vocab_size) throw ConfigError("context id " + std::to_string(cc.id) + " >= V");
        x.index.push_back(static_cast<std::uint32_t>(vocab_size + cc.id));
        x.value.push_back(cc.count / total);
    }
    return x;
}

EncoderVars build_encoder(Graph& g, const ParamVars& p, const SparseVector& input) {
    Var hidden = g.tanh(g.sparse_affine_t(p[kEncoderW], input, p[kEncoderB]));
    return {g.affine_t(p[kMuW], hidden, p[kMuB]), g.affine_t(p[kLogSigmaW], hidden, p[kLogSigmaB])};
}

EncoderVars build_encoder(Graph& g, const ParamVars& p, Var dense_input) {
    Var hidden = g.tanh(g.affine_t(p[kEncoderW], dense_input, p[kEncoderB]));
    return {g.affine_t(p[kMuW], hidden, p[kMuB]), g.affine_t(p[kLogSigmaW], hidden, p[kLogSigmaB])};
}

Var build_reparameterize(Graph& g, const EncoderVars& q, const NoiseSample& eps) {
    Var sigma = g.exp(q.log_sigma);
    return g.add(q.mu, g.mul(sigma, g.constant(eps)));
}

Var build_pivot_logits(Graph& g, const ParamVars& p, Var z) {
    return g.affine(p[kPivotW], z, p[kPivotB]);
}

Var build_topic(Graph& g, const ParamVars& p, Var z) {
    return g.softmax(g.affine(p[kTopicW], z, p[kTopicB]));
}

Var build_context_logits(Graph& g, const ParamVars& p, Var zeta) {
    return g.affine_t(p[kBeta], zeta, p[kContextB]);
}

Var build_kl(Graph& g, const EncoderVars& q) {
    // 0.5 * sum(mu^2 + sigma^2 - 1 - log sigma^2)
    Var two_ls = g.scale(q.log_sigma, 2.0);
    Var terms = g.sub(g.add(g.mul(q.mu, q.mu), g.exp(two_ls)), two_ls);
    Var total = g.sum(g.add_scalar(terms, -1.0));
    return g.scale(total, 0.5);
}

Var build_log_likelihood(Graph& g, const ParamVars& p, const TrainingInstance& instance, Var z) {
    Var pivot_lp = g.pick(g.log_softmax(build_pivot_logits(g, p, z)), instance.pivot);
    if (instance.context.empty()) return pivot_lp;
    Var zeta = build_topic(g, p, z);
    Var ctx_lp = g.log_softmax(build_context_logits(g, p, zeta));
    std::vector<double> counts(g.value(ctx_lp).size(), 0.0);
    for (const auto& cc : instance.context) counts.at(cc.id) = cc.count;
    return g.add(pivot_lp, g.dot_const(ctx_lp, counts));
}

ElboTerms instance_loss(Graph& g, const TrainingInstance& instance, const ParamSet& params,
                        std::span<const NoiseSample> eps, ParamSet* grad, double grad_scale) {
    if (eps.empty()) throw ConfigError("elbo needs at least one noise sample");
    g.clear();
    const ParamVars p = bind_params(g, params, grad);
    const std::size_t V = params[kPivotB].size();
    const EncoderVars q = build_encoder(g, p, encoder_input(instance, V));
    Var recon_sum{};
    for (std::size_t s = 0; s < eps.size(); ++s) {
        Var z = build_reparameterize(g, q, eps[s]);
        Var ll = build_log_likelihood(g, p, instance, z);
        recon_sum = s == 0 ? ll : g.add(recon_sum, ll);
    }
    Var recon = g.scale(recon_sum, 1.0 / static_cast<double>(eps.size()));
    Var kl = build_kl(g, q);
    Var loss = g.sub(kl, recon);
    if (grad) g.backward(loss, grad_scale);
    ElboTerms t;
    t.recon = g.scalar(recon);
    t.kl = g.scalar(kl);
    t.elbo = -g.scalar(loss);
    return t;
}

// --------------------------------------------------------------- value API

namespace {

std::vector<double> to_vector(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

}  // namespace

GaussianPosterior encode(const TrainingInstance& instance, const ParamSet& params) {
    Graph g;
    const ParamVars p = bind_params(g, params, nullptr);
    const EncoderVars q = build_encoder(g, p, encoder_input(instance, params[kPivotB].size()));
    GaussianPosterior out;
    out.mu = to_vector(g.value(q.mu));
    out.sigma = to_vector(g.value(g.exp(q.log_sigma)));
    return out;
}

std::vector<double> reparameterize(const GaussianPosterior& q, std::span<const double> eps) {
    if (q.mu.size() != eps.size() || q.sigma.size() != eps.size()) {
        throw ConfigError("reparameterize: dimension mismatch");
    }
    std::vector<double> z(eps.size());
    for (std::size_t d = 0; d < z.size(); ++d) z[d] = q.mu[d] + q.sigma[d] * eps[d];
    return z;
}

std::vector<double> decode_pivot(std::span<const double> z, const ParamSet& params) {
    Graph g;
    const ParamVars p = bind_params(g, params, nullptr);
    return to_vector(g.value(g.softmax(build_pivot_logits(g, p, g.constant(z)))));
}

TopicDistribution topic_transform(std::span<const double> z, const ParamSet& params) {
    Graph g;
    const ParamVars p = bind_params(g, params, nullptr);
    return {to_vector(g.value(build_topic(g, p, g.constant(z))))};
}

std::vector<double> decode_context(const TopicDistribution& zeta, const ParamSet& params) {
    Graph g;
    const ParamVars p = bind_params(g, params, nullptr);
    return to_vector(g.value(g.softmax(build_context_logits(g, p, g.constant(zeta.zeta)))));
}

double log_likelihood(const TrainingInstance& instance, std::span<const double> z,
                      const ParamSet& params) {
    Graph g;
    const ParamVars p = bind_params(g, params, nullptr);
    return g.scalar(build_log_likelihood(g, p, instance, g.constant(z)));
}

double kl_to_prior(const GaussianPosterior& q) {
    if (q.mu.size() != q.sigma.size()) throw ConfigError("kl_to_prior: dimension mismatch");
    double acc = 0.0;
    for (std::size_t d = 0; d < q.mu.size(); ++d) {
        const double s = q.sigma[d];
        if (!(s > 0.0)) throw ConfigError("kl_to_prior: sigma must be positive");
        acc += q.mu[d] * q.mu[d] + s * s - 1.0 - 2.0 * std::log(s);
    }
    return 0.5 * acc;
}

ElboTerms elbo(const TrainingInstance& instance, const ParamSet& params,
               std::span<const NoiseSample> eps) {
    Graph g;
    return instance_loss(g, instance, params, eps, nullptr);
}

}  // namespace jtw
