#include "rarecast/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rarecast::num {

std::vector<double> finite_diff_grad(const std::function<double()>& loss, double* params,
                                     std::size_t n, double eps) {
    std::vector<double> grad(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double saved = params[i];
        params[i] = saved + eps;
        const double up = loss();
        params[i] = saved - eps;
        const double down = loss();
        params[i] = saved;
        if (!std::isfinite(up) || !std::isfinite(down)) {
            throw std::runtime_error("finite_diff_grad: non-finite loss at coordinate " +
                                     std::to_string(i));
        }
        grad[i] = (up - down) / (2.0 * eps);
    }
    return grad;
}

GradCheckResult compare_grads(const std::vector<double>& analytic,
                              const std::vector<double>& numeric, double denom_floor) {
    if (analytic.size() != numeric.size()) {
        throw std::runtime_error("compare_grads: size mismatch " +
                                 std::to_string(analytic.size()) + " vs " +
                                 std::to_string(numeric.size()));
    }
    GradCheckResult out;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double ga = analytic[i];
        const double gn = numeric[i];
        const double denom = std::max({denom_floor, std::fabs(ga), std::fabs(gn)});
        const double rel = std::fabs(ga - gn) / denom;
        if (rel > out.max_rel_err) {
            out.max_rel_err = rel;
            out.worst_index = i;
            out.analytic_at_worst = ga;
            out.numeric_at_worst = gn;
        }
    }
    return out;
}

}  // namespace rarecast::num
