#include <cmath>
#include <stdexcept>

#include "rarecast/kernels.hpp"
#include "rarecast/model.hpp"

namespace rarecast::model {

namespace {

constexpr double kProbClamp = 1e-12;

double clamp_prob(double p) {
    if (p < kProbClamp) return kProbClamp;
    if (p > 1.0 - kProbClamp) return 1.0 - kProbClamp;
    return p;
}

// pre = W x + b (+ U h when given)
num::Matrix affine(const num::Matrix& w, const num::Matrix& x, const num::Matrix& b,
                   const num::Matrix* u = nullptr, const num::Matrix* h = nullptr) {
    num::Matrix pre = b;
    num::kernels::active().matvec_acc(pre.data(), w.data(), x.data(), w.rows(), w.cols());
    if (u != nullptr) {
        num::kernels::active().matvec_acc(pre.data(), u->data(), h->data(), u->rows(),
                                          u->cols());
    }
    return pre;
}

struct LstmStepTrace {
    num::Matrix gate_i, gate_f, gate_o, gate_g;
    num::Matrix c, tanh_c, h;
};

LstmStepTrace lstm_step_trace(const num::Matrix& x, const num::Matrix& h_prev,
                              const num::Matrix& c_prev, const ParamSet& p) {
    const std::size_t h = h_prev.rows();
    if (x.cols() != 1 || h_prev.cols() != 1 || c_prev.rows() != h) {
        throw std::runtime_error("lstm_step: state shapes inconsistent");
    }
    if (p.at("lstm.w_i").cols() != x.rows() || p.at("lstm.u_i").cols() != h) {
        throw std::runtime_error("lstm_step: input shape " + x.shape_str() +
                                 " does not match weights " + p.at("lstm.w_i").shape_str());
    }
    LstmStepTrace t;
    t.gate_i = num::activate(affine(p.at("lstm.w_i"), x, p.at("lstm.b_i"),
                                    &p.at("lstm.u_i"), &h_prev),
                             num::Activation::sigmoid);
    t.gate_f = num::activate(affine(p.at("lstm.w_f"), x, p.at("lstm.b_f"),
                                    &p.at("lstm.u_f"), &h_prev),
                             num::Activation::sigmoid);
    t.gate_o = num::activate(affine(p.at("lstm.w_o"), x, p.at("lstm.b_o"),
                                    &p.at("lstm.u_o"), &h_prev),
                             num::Activation::sigmoid);
    t.gate_g = num::activate(affine(p.at("lstm.w_g"), x, p.at("lstm.b_g"),
                                    &p.at("lstm.u_g"), &h_prev),
                             num::Activation::tanh);

    num::Matrix keep(h, 1), write(h, 1);
    num::kernels::active().hadamard(keep.data(), t.gate_f.data(), c_prev.data(), h);
    num::kernels::active().hadamard(write.data(), t.gate_i.data(), t.gate_g.data(), h);
    t.c = num::Matrix(h, 1);
    num::kernels::active().add(t.c.data(), keep.data(), write.data(), h);
    t.tanh_c = num::activate(t.c, num::Activation::tanh);
    t.h = num::Matrix(h, 1);
    num::kernels::active().hadamard(t.h.data(), t.gate_o.data(), t.tanh_c.data(), h);
    return t;
}

// Inverted-dropout mask: 0 with probability rate, else 1/(1-rate). Draws one
// uniform per coordinate. No draws happen when the mask is not needed.
num::Matrix draw_mask(std::size_t n, double rate, num::RngStream& rng) {
    num::Matrix mask(n, 1);
    const double keep_scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < n; ++i) {
        mask.data()[i] = rng.uniform() < rate ? 0.0 : keep_scale;
    }
    return mask;
}

}  // namespace

std::pair<num::Matrix, num::Matrix> lstm_step(const num::Matrix& x,
                                              const num::Matrix& h_prev,
                                              const num::Matrix& c_prev,
                                              const ParamSet& params) {
    LstmStepTrace t = lstm_step_trace(x, h_prev, c_prev, params);
    return {std::move(t.h), std::move(t.c)};
}

num::Matrix embed_state(const num::Matrix& h, const ParamSet& params, double rate,
                        RunMode mode, num::RngStream* rng) {
    if (rate < 0.0 || rate >= 1.0) throw std::runtime_error("dropout rate must be in [0,1)");
    num::Matrix out = num::activate(affine(params.at("emb.w"), h, params.at("emb.b")),
                                    num::Activation::relu);
    if (mode == RunMode::train && rate > 0.0) {
        if (rng == nullptr) throw std::runtime_error("train-mode dropout needs an rng");
        num::Matrix mask = draw_mask(out.size(), rate, *rng);
        num::kernels::active().hadamard(out.data(), out.data(), mask.data(), out.size());
    }
    return out;
}

double predict_target(const num::Matrix& e, const ParamSet& params) {
    const num::Matrix& a = params.at("event.w");
    if (a.cols() != e.rows()) {
        throw std::runtime_error("predict_target: embedding " + e.shape_str() +
                                 " vs weights " + a.shape_str());
    }
    double logit = params.at("event.b")(0, 0);
    num::kernels::active().matvec_acc(&logit, a.data(), e.data(), 1, a.cols());
    return num::sigmoid(logit);
}

num::Matrix predict_forecast(const num::Matrix& e, const ParamSet& params,
                             const data::TaskLayout& tasks, ForecastMode mode) {
    const num::Matrix& a = params.at("forecast.w");
    if (a.rows() != e.rows()) {
        throw std::runtime_error("predict_forecast: embedding " + e.shape_str() +
                                 " vs weights " + a.shape_str());
    }
    num::Matrix logits = params.at("forecast.b");
    num::kernels::active().matvec_t_acc(logits.data(), a.data(), e.data(), a.rows(),
                                        a.cols());
    if (mode == ForecastMode::sigmoid) {
        return num::activate(logits, num::Activation::sigmoid);
    }
    num::Matrix probs(logits.rows(), 1);
    int off = 0;
    for (std::size_t r = 0; r < tasks.task_count(); ++r) {
        const int m = tasks.class_counts[r];
        double zmax = logits(off, 0);
        for (int c = 1; c < m; ++c) zmax = std::max(zmax, logits(off + c, 0));
        double denom = 0.0;
        for (int c = 0; c < m; ++c) {
            const double ez = std::exp(logits(off + c, 0) - zmax);
            probs(off + c, 0) = ez;
            denom += ez;
        }
        for (int c = 0; c < m; ++c) probs(off + c, 0) /= denom;
        off += m;
    }
    return probs;
}

double target_loss(double prob, int label) {
    const double p = clamp_prob(prob);
    return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

double forecast_loss(const num::Matrix& probs, const std::vector<int>& classes,
                     const data::TaskLayout& tasks) {
    if (classes.size() != tasks.task_count()) {
        throw std::runtime_error("forecast_loss: " + std::to_string(classes.size()) +
                                 " target classes for " + std::to_string(tasks.task_count()) +
                                 " tasks");
    }
    double total = 0.0;
    int off = 0;
    for (std::size_t r = 0; r < tasks.task_count(); ++r) {
        const int m = tasks.class_counts[r];
        const int cls = classes[r];
        if (cls < 0 || cls >= m) {
            throw std::runtime_error("forecast_loss: class " + std::to_string(cls) +
                                     " out of range for task " + std::to_string(r));
        }
        total += -std::log(clamp_prob(probs(off + cls, 0)));
        off += m;
    }
    return total / static_cast<double>(tasks.task_count());
}

double combined_loss(double p, double err_event, double err_forecast) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::runtime_error("loss weight p must lie in [0,1], got " +
                                 std::to_string(p));
    }
    if (p == 1.0) return err_event;
    if (p == 0.0) return err_forecast;
    return p * err_event + (1.0 - p) * err_forecast;
}

ForwardResult forward_sequence(const data::EncodedSequence& seq, const ParamSet& params,
                               const ModelConfig& cfg, RunMode mode, double event_weight,
                               num::RngStream* rng) {
    cfg.validate();
    if (!(event_weight >= 0.0 && event_weight <= 1.0)) {
        throw std::runtime_error("loss weight p must lie in [0,1]");
    }
    if (seq.steps.empty()) throw std::runtime_error("empty sequence " + seq.admission_id);

    const std::size_t h = static_cast<std::size_t>(cfg.hidden);
    const bool train = mode == RunMode::train;
    const bool want_emb_mask = train && cfg.dropout_embed > 0.0;
    const bool want_branch_mask = train && cfg.has_branches() && cfg.dropout_branch > 0.0;
    if ((want_emb_mask || want_branch_mask) && rng == nullptr) {
        throw std::runtime_error("train-mode dropout needs an rng");
    }

    ForwardResult out;
    out.steps.resize(seq.steps.size());

    num::Matrix h_state(h, 1), c_state(h, 1);
    double loss_sum = 0.0, event_sum = 0.0, forecast_sum = 0.0;

    for (std::size_t ti = 0; ti < seq.steps.size(); ++ti) {
        const data::Step& step = seq.steps[ti];
        StepTrace& tr = out.steps[ti];
        tr.valid = step.valid;
        if (!step.valid) continue;  // state, loss and rng all untouched

        if (static_cast<int>(step.input.size()) != cfg.d_in) {
            throw std::runtime_error("step input width " + std::to_string(step.input.size()) +
                                     " != d_in " + std::to_string(cfg.d_in));
        }
        tr.x = num::Matrix(step.input.size(), 1);
        for (std::size_t i = 0; i < step.input.size(); ++i) tr.x.data()[i] = step.input[i];
        tr.h_prev = h_state;
        tr.c_prev = c_state;

        LstmStepTrace ls = lstm_step_trace(tr.x, h_state, c_state, params);
        tr.gate_i = std::move(ls.gate_i);
        tr.gate_f = std::move(ls.gate_f);
        tr.gate_o = std::move(ls.gate_o);
        tr.gate_g = std::move(ls.gate_g);
        tr.c = std::move(ls.c);
        tr.tanh_c = std::move(ls.tanh_c);
        tr.h = std::move(ls.h);
        h_state = tr.h;
        c_state = tr.c;

        tr.emb_pre = affine(params.at("emb.w"), tr.h, params.at("emb.b"));
        tr.emb_act = num::activate(tr.emb_pre, num::Activation::relu);
        tr.emb_out = tr.emb_act;
        if (want_emb_mask) {
            tr.emb_mask = draw_mask(tr.emb_out.size(), cfg.dropout_embed, *rng);
            num::kernels::active().hadamard(tr.emb_out.data(), tr.emb_out.data(),
                                            tr.emb_mask.data(), tr.emb_out.size());
        }

        if (cfg.has_branches()) {
            tr.br_event_pre =
                affine(params.at("branch_event.w"), tr.emb_out, params.at("branch_event.b"));
            tr.br_event_act = num::activate(tr.br_event_pre, num::Activation::relu);
            tr.br_event_out = tr.br_event_act;
            if (want_branch_mask) {
                tr.br_event_mask = draw_mask(tr.br_event_out.size(), cfg.dropout_branch, *rng);
                num::kernels::active().hadamard(tr.br_event_out.data(),
                                                tr.br_event_out.data(),
                                                tr.br_event_mask.data(),
                                                tr.br_event_out.size());
            }
            tr.br_fc_pre = affine(params.at("branch_forecast.w"), tr.emb_out,
                                  params.at("branch_forecast.b"));
            tr.br_fc_act = num::activate(tr.br_fc_pre, num::Activation::relu);
            tr.br_fc_out = tr.br_fc_act;
            if (want_branch_mask) {
                tr.br_fc_mask = draw_mask(tr.br_fc_out.size(), cfg.dropout_branch, *rng);
                num::kernels::active().hadamard(tr.br_fc_out.data(), tr.br_fc_out.data(),
                                                tr.br_fc_mask.data(), tr.br_fc_out.size());
            }
            tr.e_event = tr.br_event_out;
            tr.e_forecast = tr.br_fc_out;
        } else if (cfg.has_residual()) {
            tr.resid_out = affine(params.at("residual.w"), tr.x, params.at("residual.b"));
            tr.e_event = num::Matrix(tr.emb_out.rows(), 1);
            num::kernels::active().add(tr.e_event.data(), tr.emb_out.data(),
                                       tr.resid_out.data(), tr.emb_out.size());
            tr.e_forecast = tr.emb_out;
        } else {
            tr.e_event = tr.emb_out;
            tr.e_forecast = tr.emb_out;
        }

        if (params.at("event.w").cols() != tr.e_event.rows()) {
            throw std::runtime_error("event head input " + tr.e_event.shape_str() +
                                     " vs weights " + params.at("event.w").shape_str());
        }
        tr.event_logit = params.at("event.b")(0, 0);
        num::kernels::active().matvec_acc(&tr.event_logit, params.at("event.w").data(),
                                          tr.e_event.data(), 1,
                                          params.at("event.w").cols());
        tr.event_prob = num::sigmoid(tr.event_logit);
        tr.err_event = target_loss(tr.event_prob, step.label);

        double step_loss;
        if (cfg.has_forecast_head()) {
            if (params.at("forecast.w").rows() != tr.e_forecast.rows()) {
                throw std::runtime_error("forecast head input " + tr.e_forecast.shape_str() +
                                         " vs weights " +
                                         params.at("forecast.w").shape_str());
            }
            tr.fc_logits = params.at("forecast.b");
            num::kernels::active().matvec_t_acc(tr.fc_logits.data(),
                                                params.at("forecast.w").data(),
                                                tr.e_forecast.data(),
                                                params.at("forecast.w").rows(),
                                                params.at("forecast.w").cols());
            if (cfg.forecast_mode == ForecastMode::sigmoid) {
                tr.fc_probs = num::activate(tr.fc_logits, num::Activation::sigmoid);
            } else {
                // Re-derive via the shared routine to keep one softmax code path.
                tr.fc_probs = predict_forecast(tr.e_forecast, params, cfg.tasks,
                                               ForecastMode::softmax_per_task);
            }
            tr.err_forecast = forecast_loss(tr.fc_probs, step.forecast_classes, cfg.tasks);
            step_loss = combined_loss(event_weight, tr.err_event, tr.err_forecast);
        } else {
            tr.err_forecast = 0.0;
            step_loss = tr.err_event;
        }

        loss_sum += step_loss;
        event_sum += tr.err_event;
        forecast_sum += tr.err_forecast;
        ++out.valid_steps;
    }

    if (out.valid_steps == 0) {
        throw std::runtime_error("sequence " + seq.admission_id +
                                 " has no valid steps; nothing to learn from");
    }
    const double inv = 1.0 / static_cast<double>(out.valid_steps);
    out.total_loss = loss_sum * inv;
    out.event_loss_mean = event_sum * inv;
    out.forecast_loss_mean = forecast_sum * inv;
    return out;
}

}  // namespace rarecast::model
