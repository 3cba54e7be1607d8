#include <cmath>
#include <stdexcept>

#include "rarecast/model.hpp"

namespace rarecast::model {

const char* arch_kind_name(ArchKind kind) {
    switch (kind) {
        case ArchKind::supervised: return "supervised";
        case ArchKind::joint: return "joint";
        case ArchKind::joint_branched: return "joint_branched";
        case ArchKind::embedding: return "embedding";
        case ArchKind::residual: return "residual";
    }
    throw std::runtime_error("unreachable arch kind");
}

ArchKind arch_kind_from_name(const std::string& name) {
    if (name == "supervised") return ArchKind::supervised;
    if (name == "joint") return ArchKind::joint;
    if (name == "joint_branched") return ArchKind::joint_branched;
    if (name == "embedding") return ArchKind::embedding;
    if (name == "residual") return ArchKind::residual;
    throw std::runtime_error("unknown architecture kind: " + name);
}

const char* forecast_mode_name(ForecastMode mode) {
    return mode == ForecastMode::sigmoid ? "sigmoid" : "softmax_per_task";
}

ForecastMode forecast_mode_from_name(const std::string& name) {
    if (name == "sigmoid") return ForecastMode::sigmoid;
    if (name == "softmax_per_task") return ForecastMode::softmax_per_task;
    throw std::runtime_error("unknown forecast mode: " + name);
}

void ModelConfig::validate() const {
    if (d_in < 1 || hidden < 1 || embed < 1) {
        throw std::runtime_error("model sizes must be positive: d_in=" +
                                 std::to_string(d_in) + " hidden=" + std::to_string(hidden) +
                                 " embed=" + std::to_string(embed));
    }
    if (branch_width < 0) throw std::runtime_error("branch_width must be >= 0");
    if (dropout_embed < 0.0 || dropout_embed >= 1.0 || dropout_branch < 0.0 ||
        dropout_branch >= 1.0) {
        throw std::runtime_error("dropout rates must lie in [0, 1)");
    }
    if (has_forecast_head()) {
        tasks.validate();
    }
}

int ModelConfig::event_input_width() const {
    return has_branches() ? effective_branch_width() : embed;
}

int ModelConfig::forecast_input_width() const {
    return has_branches() ? effective_branch_width() : embed;
}

namespace {

void init_uniform(num::Matrix& w, int fan_in, num::RngStream stream) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < w.size(); ++i) {
        w.data()[i] = (2.0 * stream.uniform() - 1.0) * bound;
    }
}

void add_weight(ParamSet& ps, const std::string& name, int rows, int cols, int fan_in,
                const num::RngStream& root) {
    num::Matrix& w = ps.add(name, num::Matrix(static_cast<std::size_t>(rows),
                                              static_cast<std::size_t>(cols)),
                            false);
    init_uniform(w, fan_in, root.split(name));
}

void add_bias(ParamSet& ps, const std::string& name, int rows) {
    ps.add(name, num::Matrix(static_cast<std::size_t>(rows), 1), true);
}

}  // namespace

ParamSet build_architecture(const ModelConfig& cfg, const num::RngStream& root) {
    cfg.validate();
    const int h = cfg.hidden, e = cfg.embed, d = cfg.d_in;

    ParamSet ps;
    for (const char* gate : {"i", "f", "o", "g"}) {
        add_weight(ps, std::string("lstm.w_") + gate, h, d, d, root);
    }
    for (const char* gate : {"i", "f", "o", "g"}) {
        add_weight(ps, std::string("lstm.u_") + gate, h, h, h, root);
    }
    for (const char* gate : {"i", "f", "o", "g"}) {
        add_bias(ps, std::string("lstm.b_") + gate, h);
    }
    add_weight(ps, "emb.w", e, h, h, root);
    add_bias(ps, "emb.b", e);

    if (cfg.has_branches()) {
        const int bw = cfg.effective_branch_width();
        add_weight(ps, "branch_event.w", bw, e, e, root);
        add_bias(ps, "branch_event.b", bw);
        add_weight(ps, "branch_forecast.w", bw, e, e, root);
        add_bias(ps, "branch_forecast.b", bw);
    }

    add_weight(ps, "event.w", 1, cfg.event_input_width(), cfg.event_input_width(), root);
    add_bias(ps, "event.b", 1);

    if (cfg.has_forecast_head()) {
        const int fw = cfg.forecast_input_width();
        const int classes = cfg.tasks.total_classes();
        add_weight(ps, "forecast.w", fw, classes, fw, root);
        add_bias(ps, "forecast.b", classes);
    }

    if (cfg.has_residual()) {
        add_weight(ps, "residual.w", e, d, d, root);
        add_bias(ps, "residual.b", e);
    }

    return ps;
}

}  // namespace rarecast::model
