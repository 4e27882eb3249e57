#pragma once

#include <functional>
#include <string>
#include <vector>

#include "jtw/params.hpp"

namespace jtw {

// Scalar objective over a parameter set. When `grad` is non-null the
// analytic gradient is accumulated into it (same layout as the parameters).
using DifferentiableObjective = std::function<double(const ParamSet& params, ParamSet* grad)>;

struct GradCheckEntry {
    std::string name;
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double tol = 0.0;
    bool passed = false;
    double max_rel_error() const;
};

// Compares analytic gradients with central differences
// (f(p + h) - f(p - h)) / 2h, entry by entry. Relative error of an entry is
// |a - n| / max(|a|, |n|, abs_floor); `abs_floor` keeps entries whose true
// gradient is ~0 from being judged on round-off alone.
GradCheckReport grad_check(const DifferentiableObjective& f, const ParamSet& params, double step,
                           double tol, double abs_floor = 1e-6);

}  // namespace jtw
