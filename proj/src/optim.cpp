#include "rarecast/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rarecast/kernels.hpp"

namespace rarecast::optim {

void adamw_step(model::ParamSet& params, const model::ParamSet& grads, AdamWState& state,
                const OptimConfig& cfg) {
    if (grads.block_count() != params.block_count()) {
        throw std::runtime_error("adamw_step: gradient block count mismatch");
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));

    for (std::size_t k = 0; k < params.block_count(); ++k) {
        model::ParamBlock& blk = params.blocks()[k];
        const model::ParamBlock& gblk = grads.blocks()[k];
        if (gblk.name != blk.name || !gblk.value.same_shape(blk.value)) {
            throw std::runtime_error("adamw_step: gradient mismatch at block " + blk.name);
        }
        gblk.value.ensure_finite("gradient for " + blk.name);

        num::Matrix& m = state.m.try_emplace(blk.name, blk.value.rows(), blk.value.cols())
                             .first->second;
        num::Matrix& v = state.v.try_emplace(blk.name, blk.value.rows(), blk.value.cols())
                             .first->second;
        if (!m.same_shape(blk.value) || !v.same_shape(blk.value)) {
            throw std::runtime_error("adamw_step: stale moment shape for " + blk.name);
        }

        const bool exempt =
            (cfg.exempt_biases && blk.is_bias) ||
            std::find(cfg.decay_exempt.begin(), cfg.decay_exempt.end(), blk.name) !=
                cfg.decay_exempt.end();
        const double decay_step = exempt ? 0.0 : cfg.lr * cfg.weight_decay;

        num::kernels::active().adamw(blk.value.data(), m.data(), v.data(),
                                     gblk.value.data(), blk.value.size(), cfg.lr,
                                     cfg.beta1, cfg.beta2, bc1, bc2, cfg.eps, decay_step);
    }
}

}  // namespace rarecast::optim
