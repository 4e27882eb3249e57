#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jtw/densemode.hpp"
#include "jtw/errors.hpp"
#include "jtw/graph.hpp"
#include "jtw/model.hpp"

namespace jtw {

enum class OptimizerKind : std::uint8_t { sgd, adam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view s);

struct TrainConfig {
    double eta0 = 0.0005;
    double lr_decay = 0.95;
    std::size_t max_iter = 50;  // epoch cap
    std::size_t batch_size = 2048;
    std::uint64_t seed = 1;
    OptimizerKind optimizer = OptimizerKind::adam;
    // Stop when the 3-epoch moving average of the epoch loss changes by less
    // than this fraction. 0 disables the test.
    double convergence_tol = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    // Worker threads per batch. Each thread owns a contiguous slice of the
    // batch and the slices are reduced in order, so a given thread count is
    // always bit-reproducible.
    std::size_t threads = 1;
    // Check every softmax output produced during training.
    bool audit_distributions = false;
    double audit_tol = 1e-9;

    void validate() const;
};

// eta0 * lr_decay^epoch: the rate in effect during (0-based) `epoch`, i.e.
// after `epoch` decays.
double learning_rate(const TrainConfig& config, std::size_t epoch);

struct EpochStats {
    std::size_t epoch = 0;
    double loss = 0.0;   // mean -elbo per instance
    double kl = 0.0;     // mean KL per instance
    double recon = 0.0;  // mean reconstruction log-likelihood per instance
    double lr = 0.0;
    double seconds = 0.0;
    std::size_t instances = 0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    bool converged = false;
    Graph::SimplexAudit audit;

    std::size_t epochs_run() const noexcept { return epochs.size(); }
    // epoch,loss,kl,recon,lr,seconds
    std::string to_csv() const;
};

class TrainingDiverged : public NumericError {
public:
    TrainingDiverged(std::size_t epoch, std::size_t batch, const std::string& detail);
    std::size_t epoch() const noexcept { return epoch_; }
    std::size_t batch() const noexcept { return batch_; }

private:
    std::size_t epoch_;
    std::size_t batch_;
};

class OptimizerState {
public:
    OptimizerState(const TrainConfig& config, const ParamSet& like);

    // One update with gradient `grad` and step size `eta`.
    void apply(ParamSet& params, const ParamSet& grad, double eta);
    std::size_t steps() const noexcept { return steps_; }

private:
    OptimizerKind kind_;
    double beta1_, beta2_, eps_;
    ParamSet m_, v_;
    std::size_t steps_ = 0;
};

struct StepResult {
    double loss = 0.0;  // batch mean of -elbo
    double kl = 0.0;
    double recon = 0.0;
};

// One optimizer update from the mean loss of `batch`. `noise[i]` holds the S
// noise samples for `batch[i]`.
StepResult step(std::span<const TrainingInstance> batch,
                std::span<const std::vector<NoiseSample>> noise, ParamSet& params,
                OptimizerState& state, double eta, const TrainConfig& config);
StepResult step(std::span<const DenseInstance> batch,
                std::span<const std::vector<NoiseSample>> noise, ParamSet& params,
                OptimizerState& state, double eta, const TrainConfig& config);

struct TrainResult {
    ParamSet params;
    TrainReport report;
};

using EpochCallback = std::function<void(const EpochStats&, const ParamSet&)>;

TrainResult train(std::span<const TrainingInstance> instances, const ModelConfig& model,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});
TrainResult train_dense(std::span<const DenseInstance> instances, const ModelConfig& model,
                        const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace jtw
