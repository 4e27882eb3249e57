#include "jtw/densemode.hpp"

#include <algorithm>
#include <cmath>

#include "jtw/errors.hpp"

namespace jtw {

double cos_half_angle(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw ConfigError("cos_half_angle: dimension mismatch");
    double uu = 0.0, vv = 0.0, uv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uu += u[i] * u[i];
        vv += v[i] * v[i];
        uv += u[i] * v[i];
    }
    if (uu == 0.0 || vv == 0.0) throw NumericError("cos_half_angle: zero vector");
    const double c = std::clamp(uv / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
    return std::cos(0.5 * std::acos(c));
}

double dense_log_likelihood(std::span<const std::vector<double>> targets,
                            std::span<const std::vector<double>> reconstructions, double floor) {
    if (targets.size() != reconstructions.size()) {
        throw ConfigError("dense_log_likelihood: " + std::to_string(targets.size()) +
                          " targets but " + std::to_string(reconstructions.size()) +
                          " reconstructions");
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < targets.size(); ++k) {
        const double h = cos_half_angle(targets[k], reconstructions[k]);
        acc += h > 0.0 ? std::max(std::log(h), floor) : floor;
    }
    return acc;
}

// ---------------------------------------------------------------- vectors

void DenseVectors::insert(std::string key, std::vector<double> v) {
    if (dim_ == 0) dim_ = v.size();
    if (v.size() != dim_) {
        throw ConfigError("dense vector '" + key + "' has dimension " + std::to_string(v.size()) +
                          ", expected " + std::to_string(dim_));
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) throw ConfigError("dense vector '" + key + "' is all zeros");
    for (double& x : v) x /= norm;
    vectors_[std::move(key)] = std::move(v);
}

const std::vector<double>* DenseVectors::find(std::string_view key) const {
    auto it = vectors_.find(std::string(key));
    return it == vectors_.end() ? nullptr : &it->second;
}

std::string DenseVectors::occurrence_key(std::string_view token, std::uint32_t doc,
                                         std::uint32_t pos) {
    return std::string(token) + "@" + std::to_string(doc) + ":" + std::to_string(pos);
}

const std::vector<double>* DenseVectors::lookup(std::string_view token, std::uint32_t doc,
                                                std::uint32_t pos) const {
    if (const auto* v = find(occurrence_key(token, doc, pos))) return v;
    return find(token);
}

std::vector<DenseInstance> build_dense_instances(const Corpus& corpus, const Vocabulary& vocab,
                                                 const DenseVectors& vectors,
                                                 std::size_t window_size) {
    const std::size_t half = window_size / 2;
    std::vector<DenseInstance> out;
    for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
        const auto& doc = corpus.documents[d];
        const auto doc_id = static_cast<std::uint32_t>(d);
        for (std::size_t n = 0; n < doc.size(); ++n) {
            const auto* pv = vectors.lookup(vocab.token(doc[n]), doc_id, static_cast<std::uint32_t>(n));
            if (!pv) continue;
            DenseInstance inst;
            inst.pivot = doc[n];
            inst.pivot_vector = *pv;
            inst.doc = doc_id;
            inst.position = static_cast<std::uint32_t>(n);
            const std::size_t lo = n >= half ? n - half : 0;
            const std::size_t hi = std::min(doc.size(), n + half + 1);
            for (std::size_t k = lo; k < hi; ++k) {
                if (k == n) continue;
                if (const auto* cv = vectors.lookup(vocab.token(doc[k]), doc_id,
                                                    static_cast<std::uint32_t>(k))) {
                    inst.context_vectors.push_back(*cv);
                }
            }
            out.push_back(std::move(inst));
        }
    }
    return out;
}

std::vector<double> dense_encoder_input(const DenseInstance& instance, std::size_t dim) {
    if (instance.pivot_vector.size() != dim) {
        throw ConfigError("dense instance has dimension " +
                          std::to_string(instance.pivot_vector.size()) + ", model expects " +
                          std::to_string(dim));
    }
    std::vector<double> x(2 * dim, 0.0);
    std::copy(instance.pivot_vector.begin(), instance.pivot_vector.end(), x.begin());
    if (!instance.context_vectors.empty()) {
        const double inv = 1.0 / static_cast<double>(instance.context_vectors.size());
        for (const auto& cv : instance.context_vectors) {
            if (cv.size() != dim) throw ConfigError("context vector dimension mismatch");
            for (std::size_t i = 0; i < dim; ++i) x[dim + i] += inv * cv[i];
        }
    }
    return x;
}

ElboTerms dense_instance_loss(Graph& g, const DenseInstance& instance, const ParamSet& params,
                              std::span<const NoiseSample> eps, ParamSet* grad, double grad_scale,
                              double floor) {
    if (eps.empty()) throw ConfigError("elbo needs at least one noise sample");
    g.clear();
    const ParamVars p = bind_params(g, params, grad);
    const std::size_t E = params[kPivotB].size();
    const EncoderVars q = build_encoder(g, p, g.constant(dense_encoder_input(instance, E)));
    Var recon_sum{};
    for (std::size_t s = 0; s < eps.size(); ++s) {
        Var z = build_reparameterize(g, q, eps[s]);
        Var pivot_rec = build_pivot_logits(g, p, z);
        Var ll = g.log_half_angle(g.cosine_const(instance.pivot_vector, pivot_rec), floor);
        if (!instance.context_vectors.empty()) {
            Var ctx_rec = build_context_logits(g, p, build_topic(g, p, z));
            for (const auto& cv : instance.context_vectors) {
                ll = g.add(ll, g.log_half_angle(g.cosine_const(cv, ctx_rec), floor));
            }
        }
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

GaussianPosterior dense_encode(const DenseInstance& instance, const ParamSet& params) {
    Graph g;
    const ParamVars p = bind_params(g, params, nullptr);
    const std::size_t E = params[kPivotB].size();
    const EncoderVars q = build_encoder(g, p, g.constant(dense_encoder_input(instance, E)));
    GaussianPosterior out;
    const auto& mu = g.value(q.mu);
    out.mu.assign(mu.values().begin(), mu.values().end());
    const auto& sigma = g.value(g.exp(q.log_sigma));
    out.sigma.assign(sigma.values().begin(), sigma.values().end());
    return out;
}

ElboTerms dense_elbo(const DenseInstance& instance, const ParamSet& params,
                     std::span<const NoiseSample> eps, double floor) {
    Graph g;
    return dense_instance_loss(g, instance, params, eps, nullptr, 1.0, floor);
}

}  // namespace jtw
