#include <cmath>
#include <stdexcept>

#include "rarecast/kernels.hpp"
#include "rarecast/model.hpp"

namespace rarecast::model {

namespace {

constexpr double kProbClamp = 1e-12;

bool clamped(double prob) { return prob < kProbClamp || prob > 1.0 - kProbClamp; }

void hadamard_into(num::Matrix& z, const num::Matrix& mask) {
    num::kernels::active().hadamard(z.data(), z.data(), mask.data(), z.size());
}

// dst += v
void add_into(num::Matrix& dst, const num::Matrix& v) {
    num::kernels::active().add(dst.data(), dst.data(), v.data(), dst.size());
}

// z *= 1[pre > 0]
void relu_gate(num::Matrix& z, const num::Matrix& pre) {
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (pre.data()[i] <= 0.0) z.data()[i] = 0.0;
    }
}

}  // namespace

ParamSet backward_sequence(const data::EncodedSequence& seq, const ParamSet& params,
                           const ModelConfig& cfg, double event_weight,
                           const ForwardResult& fwd) {
    cfg.validate();
    if (!(event_weight >= 0.0 && event_weight <= 1.0)) {
        throw std::runtime_error("loss weight p must lie in [0,1]");
    }
    if (fwd.steps.size() != seq.steps.size()) {
        throw std::runtime_error("trace/sequence length mismatch");
    }
    if (fwd.valid_steps == 0) throw std::runtime_error("trace has no valid steps");

    const std::size_t h = static_cast<std::size_t>(cfg.hidden);
    const std::size_t e = static_cast<std::size_t>(cfg.embed);
    const bool has_fc = cfg.has_forecast_head();
    const double inv = 1.0 / static_cast<double>(fwd.valid_steps);

    // Exact degenerations: the dropped path is never walked, so its blocks
    // keep their exact-zero gradients.
    double w_event, w_forecast;
    if (!has_fc) {
        w_event = 1.0;
        w_forecast = 0.0;
    } else if (event_weight == 1.0) {
        w_event = 1.0;
        w_forecast = 0.0;
    } else if (event_weight == 0.0) {
        w_event = 0.0;
        w_forecast = 1.0;
    } else {
        w_event = event_weight;
        w_forecast = 1.0 - event_weight;
    }

    ParamSet grads = params.zeros_like();
    const auto& kern = num::kernels::active();

    num::Matrix dh_next(h, 1), dc_next(h, 1);

    for (std::size_t ti = fwd.steps.size(); ti-- > 0;) {
        const StepTrace& tr = fwd.steps[ti];
        if (!tr.valid) continue;  // forward skipped it entirely; so do we
        const data::Step& step = seq.steps[ti];

        const std::size_t evw = params.at("event.w").cols();
        num::Matrix de_event(evw, 1);
        if (w_event > 0.0) {
            const double gz = clamped(tr.event_prob)
                                  ? 0.0
                                  : tr.event_prob - static_cast<double>(step.label);
            const double coef = w_event * inv * gz;
            kern.axpy(grads.at("event.w").data(), tr.e_event.data(), coef, evw);
            grads.at("event.b")(0, 0) += coef;
            kern.axpy(de_event.data(), params.at("event.w").data(), coef, evw);
        }

        num::Matrix de_fc;
        if (has_fc && w_forecast > 0.0) {
            const num::Matrix& aw = params.at("forecast.w");
            const std::size_t fw = aw.rows();
            const std::size_t classes = aw.cols();
            num::Matrix dz(classes, 1);
            const double scale =
                w_forecast * inv / static_cast<double>(cfg.tasks.task_count());
            int off = 0;
            for (std::size_t r = 0; r < cfg.tasks.task_count(); ++r) {
                const int m = cfg.tasks.class_counts[r];
                const int cls = step.forecast_classes[r];
                const double p_true = tr.fc_probs(off + cls, 0);
                if (!clamped(p_true)) {
                    if (cfg.forecast_mode == ForecastMode::sigmoid) {
                        // Only the true-class sigmoid appears in the loss.
                        dz(off + cls, 0) = scale * (p_true - 1.0);
                    } else {
                        for (int j = 0; j < m; ++j) {
                            const double target = j == cls ? 1.0 : 0.0;
                            dz(off + j, 0) = scale * (tr.fc_probs(off + j, 0) - target);
                        }
                    }
                }
                off += m;
            }
            add_into(grads.at("forecast.b"), dz);
            kern.ger_acc(grads.at("forecast.w").data(), tr.e_forecast.data(), dz.data(),
                         1.0, fw, classes);
            de_fc = num::Matrix(fw, 1);
            kern.matvec_acc(de_fc.data(), aw.data(), dz.data(), fw, classes);
        }

        num::Matrix demb(e, 1);
        if (cfg.has_branches()) {
            const std::size_t bw = static_cast<std::size_t>(cfg.effective_branch_width());
            {
                num::Matrix dpre = de_event;
                if (!tr.br_event_mask.empty()) hadamard_into(dpre, tr.br_event_mask);
                relu_gate(dpre, tr.br_event_pre);
                kern.ger_acc(grads.at("branch_event.w").data(), dpre.data(),
                             tr.emb_out.data(), 1.0, bw, e);
                add_into(grads.at("branch_event.b"), dpre);
                kern.matvec_t_acc(demb.data(), params.at("branch_event.w").data(),
                                  dpre.data(), bw, e);
            }
            if (!de_fc.empty()) {
                num::Matrix dpre = de_fc;
                if (!tr.br_fc_mask.empty()) hadamard_into(dpre, tr.br_fc_mask);
                relu_gate(dpre, tr.br_fc_pre);
                kern.ger_acc(grads.at("branch_forecast.w").data(), dpre.data(),
                             tr.emb_out.data(), 1.0, bw, e);
                add_into(grads.at("branch_forecast.b"), dpre);
                kern.matvec_t_acc(demb.data(), params.at("branch_forecast.w").data(),
                                  dpre.data(), bw, e);
            }
        } else {
            add_into(demb, de_event);
            if (!de_fc.empty()) add_into(demb, de_fc);
            if (cfg.has_residual()) {
                // e_event = emb_out + residual(x): the event path's gradient
                // also feeds the residual blocks.
                kern.ger_acc(grads.at("residual.w").data(), de_event.data(), tr.x.data(),
                             1.0, e, static_cast<std::size_t>(cfg.d_in));
                add_into(grads.at("residual.b"), de_event);
            }
        }

        if (!tr.emb_mask.empty()) hadamard_into(demb, tr.emb_mask);
        relu_gate(demb, tr.emb_pre);
        kern.ger_acc(grads.at("emb.w").data(), demb.data(), tr.h.data(), 1.0, e, h);
        add_into(grads.at("emb.b"), demb);

        num::Matrix dh(h, 1);
        kern.matvec_t_acc(dh.data(), params.at("emb.w").data(), demb.data(), e, h);
        add_into(dh, dh_next);

        // LSTM cell backward.
        num::Matrix d_o(h, 1), dc(h, 1);
        kern.hadamard(d_o.data(), dh.data(), tr.tanh_c.data(), h);
        {
            num::Matrix dtanh(h, 1);
            kern.hadamard(dtanh.data(), dh.data(), tr.gate_o.data(), h);
            for (std::size_t i = 0; i < h; ++i) {
                const double tc = tr.tanh_c.data()[i];
                dc.data()[i] = dc_next.data()[i] + dtanh.data()[i] * (1.0 - tc * tc);
            }
        }
        num::Matrix dzi(h, 1), dzf(h, 1), dzo(h, 1), dzg(h, 1);
        for (std::size_t i = 0; i < h; ++i) {
            const double gi = tr.gate_i.data()[i];
            const double gf = tr.gate_f.data()[i];
            const double go = tr.gate_o.data()[i];
            const double gg = tr.gate_g.data()[i];
            dzi.data()[i] = dc.data()[i] * gg * gi * (1.0 - gi);
            dzf.data()[i] = dc.data()[i] * tr.c_prev.data()[i] * gf * (1.0 - gf);
            dzo.data()[i] = d_o.data()[i] * go * (1.0 - go);
            dzg.data()[i] = dc.data()[i] * gi * (1.0 - gg * gg);
        }

        const std::size_t d = static_cast<std::size_t>(cfg.d_in);
        const struct {
            const char* gate;
            const num::Matrix* dz;
        } gates[] = {{"i", &dzi}, {"f", &dzf}, {"o", &dzo}, {"g", &dzg}};
        num::Matrix dh_prev(h, 1);
        for (const auto& g : gates) {
            const std::string sfx = g.gate;
            kern.ger_acc(grads.at("lstm.w_" + sfx).data(), g.dz->data(), tr.x.data(), 1.0,
                         h, d);
            kern.ger_acc(grads.at("lstm.u_" + sfx).data(), g.dz->data(),
                         tr.h_prev.data(), 1.0, h, h);
            add_into(grads.at("lstm.b_" + sfx), *g.dz);
            kern.matvec_t_acc(dh_prev.data(), params.at("lstm.u_" + sfx).data(),
                              g.dz->data(), h, h);
        }
        num::Matrix dc_prev(h, 1);
        kern.hadamard(dc_prev.data(), dc.data(), tr.gate_f.data(), h);

        dh_next = std::move(dh_prev);
        dc_next = std::move(dc_prev);
    }

    grads.ensure_finite("gradient");
    return grads;
}

}  // namespace rarecast::model
