#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace rarecast::num {

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::size_t worst_index = 0;
    double analytic_at_worst = 0.0;
    double numeric_at_worst = 0.0;
};

/// Central-difference gradient of `loss` with respect to params[0..n).
/// Each coordinate is perturbed in place by +/-eps and restored exactly.
/// Throws if the perturbed loss is non-finite, naming the coordinate.
std::vector<double> finite_diff_grad(const std::function<double()>& loss, double* params,
                                     std::size_t n, double eps = 1e-5);

/// Worst relative disagreement, with the denominator floored at `denom_floor`
/// so near-zero gradients compare absolutely.
GradCheckResult compare_grads(const std::vector<double>& analytic,
                              const std::vector<double>& numeric,
                              double denom_floor = 1e-6);

}  // namespace rarecast::num
