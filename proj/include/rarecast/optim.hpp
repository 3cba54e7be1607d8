#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rarecast/matrix.hpp"
#include "rarecast/params.hpp"

namespace rarecast::optim {

struct OptimConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-2;
    /// Bias blocks never decay unless this is cleared.
    bool exempt_biases = true;
    /// Additional block names excluded from decay.
    std::vector<std::string> decay_exempt;
};

struct AdamWState {
    std::uint64_t t = 0;
    std::map<std::string, num::Matrix> m;  // ordered: serialization is stable
    std::map<std::string, num::Matrix> v;
};

/// One AdamW step over every block, in block order. Decay is decoupled: the
/// decay term subtracts lr*weight_decay*theta_pre_update after the adaptive
/// step, so toggling decay changes the result by exactly that amount.
/// Rejects non-finite gradients and shape mismatches.
void adamw_step(model::ParamSet& params, const model::ParamSet& grads, AdamWState& state,
                const OptimConfig& cfg);

}  // namespace rarecast::optim
