#include "jtw/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace jtw {

double GradCheckReport::max_rel_error() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.max_rel_error);
    return m;
}

GradCheckReport grad_check(const DifferentiableObjective& f, const ParamSet& params, double step,
                           double tol, double abs_floor) {
    ParamSet analytic = params.zeros_like();
    f(params, &analytic);

    ParamSet probe = params;
    GradCheckReport report;
    report.tol = tol;
    report.passed = true;
    for (std::size_t p = 0; p < probe.size(); ++p) {
        GradCheckEntry entry;
        entry.name = probe.name(p);
        Tensor& t = probe[p];
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double orig = t[i];
            t[i] = orig + step;
            const double up = f(probe, nullptr);
            t[i] = orig - step;
            const double down = f(probe, nullptr);
            t[i] = orig;
            const double numeric = (up - down) / (2.0 * step);
            const double a = analytic[p][i];
            const double denom = std::max({std::abs(a), std::abs(numeric), abs_floor});
            double rel = std::abs(a - numeric) / denom;
            if (std::isnan(rel)) rel = INFINITY;
            if (rel > entry.max_rel_error || (i == 0 && rel == 0.0)) {
                entry.max_rel_error = rel;
                entry.worst_index = i;
                entry.analytic = a;
                entry.numeric = numeric;
            }
        }
        if (!(entry.max_rel_error < tol)) report.passed = false;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace jtw
