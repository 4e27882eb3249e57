#include "jtw/trainer.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <random>
#include <sstream>
#include <thread>

#include "jtw/io.hpp"

namespace jtw {

std::string_view to_string(OptimizerKind kind) {
    return kind == OptimizerKind::sgd ? "sgd" : "adam";
}

OptimizerKind parse_optimizer(std::string_view s) {
    if (s == "sgd") return OptimizerKind::sgd;
    if (s == "adam") return OptimizerKind::adam;
    throw ConfigError("unknown optimizer '" + std::string(s) + "' (expected sgd or adam)");
}

void TrainConfig::validate() const {
    auto need = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("train config: ") + what);
    };
    need(eta0 > 0.0, "eta0 must be > 0");
    need(lr_decay > 0.0 && lr_decay <= 1.0, "lr_decay must be in (0, 1]");
    need(batch_size >= 1, "batch_size must be >= 1");
    need(convergence_tol >= 0.0, "convergence_tol must be >= 0");
    need(threads >= 1, "threads must be >= 1");
}

double learning_rate(const TrainConfig& config, std::size_t epoch) {
    return config.eta0 * std::pow(config.lr_decay, static_cast<double>(epoch));
}

std::string TrainReport::to_csv() const {
    std::string out = "epoch,loss,kl,recon,lr,seconds\n";
    for (const auto& e : epochs) {
        out += std::to_string(e.epoch);
        for (double v : {e.loss, e.kl, e.recon, e.lr, e.seconds}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

TrainingDiverged::TrainingDiverged(std::size_t epoch, std::size_t batch, const std::string& detail)
    : NumericError("training diverged in epoch " + std::to_string(epoch) + ", batch " +
                   std::to_string(batch) + ": " + detail),
      epoch_(epoch),
      batch_(batch) {}

// ---------------------------------------------------------------- optimizer

OptimizerState::OptimizerState(const TrainConfig& config, const ParamSet& like)
    : kind_(config.optimizer),
      beta1_(config.adam_beta1),
      beta2_(config.adam_beta2),
      eps_(config.adam_eps) {
    if (kind_ == OptimizerKind::adam) {
        m_ = like.zeros_like();
        v_ = like.zeros_like();
    }
}

void OptimizerState::apply(ParamSet& params, const ParamSet& grad, double eta) {
    ++steps_;
    if (kind_ == OptimizerKind::sgd) {
        params.add_scaled(grad, -eta);
        return;
    }
    const double t = static_cast<double>(steps_);
    const double c1 = 1.0 - std::pow(beta1_, t);
    const double c2 = 1.0 - std::pow(beta2_, t);
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& w = params[p];
        const Tensor& g = grad[p];
        Tensor& m = m_[p];
        Tensor& v = v_[p];
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            w[i] -= eta * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

// ---------------------------------------------------------------- batches

namespace {

ElboTerms loss_of(Graph& g, const TrainingInstance& x, const ParamSet& p,
                  std::span<const NoiseSample> eps, ParamSet* grad, double scale) {
    return instance_loss(g, x, p, eps, grad, scale);
}

ElboTerms loss_of(Graph& g, const DenseInstance& x, const ParamSet& p,
                  std::span<const NoiseSample> eps, ParamSet* grad, double scale) {
    return dense_instance_loss(g, x, p, eps, grad, scale);
}

struct Lane {
    Graph graph;
    ParamSet grad;
    double loss = 0.0, kl = 0.0, recon = 0.0;
    Graph::SimplexAudit audit;
    std::exception_ptr error;
};

// Computes the mean-loss gradient of a batch into lanes[0].grad and applies
// one optimizer update. `at(i)` returns the i-th batch element.
template <class Instance, class At>
StepResult run_batch(std::size_t n, At at, std::span<const std::vector<NoiseSample>> noise,
                     ParamSet& params, OptimizerState& state, double eta,
                     const TrainConfig& config, std::vector<Lane>& lanes,
                     Graph::SimplexAudit* audit) {
    if (n == 0) throw ConfigError("step: empty batch");
    if (noise.size() != n) throw ConfigError("step: one noise set per batch element required");
    const std::size_t n_lanes = std::min(config.threads, n);
    if (lanes.size() < n_lanes) lanes.resize(n_lanes);
    const double scale = 1.0 / static_cast<double>(n);

    auto work = [&](std::size_t lane_id) {
        Lane& lane = lanes[lane_id];
        try {
            if (lane.grad.size() != params.size())
                lane.grad = params.zeros_like();
            else
                lane.grad.zero();
            lane.loss = lane.kl = lane.recon = 0.0;
            lane.audit = {};
            const std::size_t lo = n * lane_id / n_lanes;
            const std::size_t hi = n * (lane_id + 1) / n_lanes;
            for (std::size_t i = lo; i < hi; ++i) {
                const Instance& x = at(i);
                const ElboTerms t = loss_of(lane.graph, x, params, noise[i], &lane.grad, scale);
                if (!std::isfinite(t.elbo)) throw NumericError("non-finite loss");
                lane.loss -= t.elbo;
                lane.kl += t.kl;
                lane.recon += t.recon;
                if (audit) {
                    const auto a = lane.graph.audit_softmax(config.audit_tol);
                    lane.audit.checked += a.checked;
                    lane.audit.violations += a.violations;
                    lane.audit.max_sum_error = std::max(lane.audit.max_sum_error, a.max_sum_error);
                }
            }
        } catch (...) {
            lane.error = std::current_exception();
        }
    };

    std::vector<std::thread> workers;
    for (std::size_t l = 1; l < n_lanes; ++l) workers.emplace_back(work, l);
    work(0);
    for (auto& t : workers) t.join();
    for (std::size_t l = 0; l < n_lanes; ++l) {
        if (lanes[l].error) {
            auto e = lanes[l].error;
            lanes[l].error = nullptr;
            std::rethrow_exception(e);
        }
    }

    StepResult r;
    for (std::size_t l = 0; l < n_lanes; ++l) {
        if (l > 0) lanes[0].grad.add_scaled(lanes[l].grad, 1.0);
        r.loss += lanes[l].loss;
        r.kl += lanes[l].kl;
        r.recon += lanes[l].recon;
        if (audit) {
            audit->checked += lanes[l].audit.checked;
            audit->violations += lanes[l].audit.violations;
            audit->max_sum_error = std::max(audit->max_sum_error, lanes[l].audit.max_sum_error);
        }
    }
    r.loss *= scale;
    r.kl *= scale;
    r.recon *= scale;
    if (!lanes[0].grad.all_finite()) throw NumericError("non-finite gradient");
    state.apply(params, lanes[0].grad, eta);
    if (!params.all_finite()) throw NumericError("non-finite parameters after update");
    return r;
}

template <class Instance>
TrainResult train_impl(std::span<const Instance> instances, const ModelConfig& model,
                       const TrainConfig& config, const EpochCallback& on_epoch) {
    model.validate();
    config.validate();
    if (instances.empty()) throw ConfigError("train: no training instances");

    TrainResult result;
    result.params = init_params(model, config.seed);
    OptimizerState state(config, result.params);
    MinibatchStream stream(instances.size(), config.batch_size, config.seed);
    std::seed_seq noise_seq{static_cast<std::uint32_t>(config.seed),
                            static_cast<std::uint32_t>(config.seed >> 32), 0x4015eU};
    std::mt19937_64 noise_rng(noise_seq);
    std::vector<Lane> lanes;
    std::vector<std::vector<NoiseSample>> noise;
    Graph::SimplexAudit* audit = config.audit_distributions ? &result.report.audit : nullptr;

    std::vector<double> losses;
    for (std::size_t epoch = 0; epoch < config.max_iter; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const double eta = learning_rate(config, epoch);
        stream.start_epoch(epoch);
        EpochStats stats;
        stats.epoch = epoch;
        stats.lr = eta;
        std::size_t batch_index = 0;
        for (auto batch = stream.next(); !batch.empty(); batch = stream.next(), ++batch_index) {
            noise.resize(batch.size());
            for (auto& e : noise) e = draw_noise(noise_rng, model.samples, model.latent_dim);
            StepResult r;
            try {
                r = run_batch<Instance>(
                    batch.size(), [&](std::size_t i) -> const Instance& { return instances[batch[i]]; },
                    noise, result.params, state, eta, config, lanes, audit);
            } catch (const NumericError& e) {
                throw TrainingDiverged(epoch, batch_index, e.what());
            }
            const double w = static_cast<double>(batch.size());
            stats.loss += r.loss * w;
            stats.kl += r.kl * w;
            stats.recon += r.recon * w;
            stats.instances += batch.size();
        }
        const double n = static_cast<double>(stats.instances);
        stats.loss /= n;
        stats.kl /= n;
        stats.recon /= n;
        stats.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.report.epochs.push_back(stats);
        losses.push_back(stats.loss);
        if (on_epoch) on_epoch(stats, result.params);

        if (config.convergence_tol > 0.0 && losses.size() >= 4) {
            const std::size_t k = losses.size();
            const double cur = (losses[k - 1] + losses[k - 2] + losses[k - 3]) / 3.0;
            const double prev = (losses[k - 2] + losses[k - 3] + losses[k - 4]) / 3.0;
            if (std::abs(cur - prev) / std::abs(cur) < config.convergence_tol) {
                result.report.converged = true;
                break;
            }
        }
    }
    return result;
}

template <class Instance>
StepResult step_impl(std::span<const Instance> batch,
                     std::span<const std::vector<NoiseSample>> noise, ParamSet& params,
                     OptimizerState& state, double eta, const TrainConfig& config) {
    std::vector<Lane> lanes;
    return run_batch<Instance>(
        batch.size(), [&](std::size_t i) -> const Instance& { return batch[i]; }, noise, params,
        state, eta, config, lanes, nullptr);
}

}  // namespace

StepResult step(std::span<const TrainingInstance> batch,
                std::span<const std::vector<NoiseSample>> noise, ParamSet& params,
                OptimizerState& state, double eta, const TrainConfig& config) {
    return step_impl(batch, noise, params, state, eta, config);
}

StepResult step(std::span<const DenseInstance> batch,
                std::span<const std::vector<NoiseSample>> noise, ParamSet& params,
                OptimizerState& state, double eta, const TrainConfig& config) {
    return step_impl(batch, noise, params, state, eta, config);
}

TrainResult train(std::span<const TrainingInstance> instances, const ModelConfig& model,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
    if (model.mode != InputMode::bow) throw ConfigError("train: model config is not in bow mode");
    for (const auto& x : instances) {
        if (x.pivot >= model.vocab_size) throw ConfigError("train: pivot id out of vocabulary");
    }
    return train_impl(instances, model, config, on_epoch);
}

TrainResult train_dense(std::span<const DenseInstance> instances, const ModelConfig& model,
                        const TrainConfig& config, const EpochCallback& on_epoch) {
    if (model.mode != InputMode::dense) {
        throw ConfigError("train_dense: model config is not in dense mode");
    }
    return train_impl(instances, model, config, on_epoch);
}

}  // namespace jtw
