#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "jtw/corpus.hpp"
#include "jtw/model.hpp"

namespace jtw {

inline constexpr double kDenseLogFloor = -30.0;

// cos(acos(cos_sim(u, v)) / 2), in [0, 1]. Throws NumericError on a zero vector.
double cos_half_angle(std::span<const double> u, std::span<const double> v);

// sum_k max(log cos_half_angle(target_k, recon_k), floor). The two lists are
// paired element-wise (pivot first, then the context words).
double dense_log_likelihood(std::span<const std::vector<double>> targets,
                            std::span<const std::vector<double>> reconstructions,
                            double floor = kDenseLogFloor);

// Pre-trained vectors keyed by token, or by `token@doc:pos` for a single
// occurrence (`pos` indexes the document's in-vocabulary token sequence).
// Every vector is L2-normalized when inserted.
class DenseVectors {
public:
    explicit DenseVectors(std::size_t dim = 0) : dim_(dim) {}

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return vectors_.size(); }
    void insert(std::string key, std::vector<double> v);
    const std::vector<double>* find(std::string_view key) const;
    // Occurrence key first, then the type key.
    const std::vector<double>* lookup(std::string_view token, std::uint32_t doc,
                                      std::uint32_t pos) const;

    static std::string occurrence_key(std::string_view token, std::uint32_t doc, std::uint32_t pos);

private:
    std::size_t dim_;
    std::unordered_map<std::string, std::vector<double>> vectors_;
};

struct DenseInstance {
    std::uint32_t pivot = 0;  // vocabulary id, kept for inference bookkeeping
    std::vector<double> pivot_vector;
    std::vector<std::vector<double>> context_vectors;
    std::uint32_t doc = 0;
    std::uint32_t position = 0;
};

// Resolves every window of `corpus` against `vectors`. Pivots without a vector
// are skipped; context words without one are dropped from the window.
std::vector<DenseInstance> build_dense_instances(const Corpus& corpus, const Vocabulary& vocab,
                                                 const DenseVectors& vectors,
                                                 std::size_t window_size);

// Encoder input: pivot vector followed by the mean context vector (zeros when
// the window is empty).
std::vector<double> dense_encoder_input(const DenseInstance& instance, std::size_t dim);

ElboTerms dense_instance_loss(Graph& g, const DenseInstance& instance, const ParamSet& params,
                              std::span<const NoiseSample> eps, ParamSet* grad,
                              double grad_scale = 1.0, double floor = kDenseLogFloor);

GaussianPosterior dense_encode(const DenseInstance& instance, const ParamSet& params);
ElboTerms dense_elbo(const DenseInstance& instance, const ParamSet& params,
                     std::span<const NoiseSample> eps, double floor = kDenseLogFloor);

}  // namespace jtw
