#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "rarecast/experiment.hpp"
#include "rarecast/rng.hpp"

namespace rarecast::experiment {

const char* stop_metric_name(StopMetric metric) {
    switch (metric) {
        case StopMetric::valid_auroc: return "valid_auroc";
        case StopMetric::valid_loss_tolerance: return "valid_loss_tolerance";
    }
    throw std::runtime_error("unknown stop metric");
}

StopMetric stop_metric_from_name(const std::string& name) {
    if (name == "valid_auroc") return StopMetric::valid_auroc;
    if (name == "valid_loss_tolerance") return StopMetric::valid_loss_tolerance;
    throw std::runtime_error("unknown stop metric '" + name + "'");
}

void TrainConfig::validate() const {
    if (batch_size == 0) throw std::runtime_error("train config: batch size must be >= 1");
    if (max_epochs < 1) throw std::runtime_error("train config: max epochs must be >= 1");
    if (patience < 1) throw std::runtime_error("train config: patience must be >= 1");
    if (!(event_weight >= 0.0 && event_weight <= 1.0)) {
        throw std::runtime_error("train config: event weight must lie in [0, 1]");
    }
    if (!(loss_tolerance >= 0.0)) {
        throw std::runtime_error("train config: loss tolerance must be >= 0");
    }
}

namespace {

bool has_valid_step(const data::EncodedSequence& seq) {
    for (const auto& step : seq.steps) {
        if (step.valid) return true;
    }
    return false;
}

struct ValidSnapshot {
    double loss = 0.0;
    double auroc = std::numeric_limits<double>::quiet_NaN();
};

/// One eval-mode pass over the validation split: mean sequence loss plus
/// pooled-step AUROC (NaN when the split is single-class).
ValidSnapshot eval_valid(const model::ParamSet& params, const model::ModelConfig& arch,
                         const std::vector<data::EncodedSequence>& valid_split,
                         double event_weight) {
    ValidSnapshot out;
    metrics::ScoredPredictions sp;
    std::size_t used = 0;
    double loss_sum = 0.0;
    for (const auto& seq : valid_split) {
        if (!has_valid_step(seq)) continue;
        const auto fwd = model::forward_sequence(seq, params, arch, model::RunMode::eval,
                                                 event_weight, nullptr);
        loss_sum += fwd.total_loss;
        ++used;
        for (std::size_t k = 0; k < seq.steps.size(); ++k) {
            if (!seq.steps[k].valid) continue;
            sp.scores.push_back(fwd.steps[k].event_prob);
            sp.labels.push_back(seq.steps[k].label);
        }
    }
    if (used == 0) throw std::runtime_error("validation split has no valid steps");
    out.loss = loss_sum / static_cast<double>(used);
    try {
        out.auroc = metrics::auroc(sp);
    } catch (const std::exception&) {
        // single-class split; recorded as NaN
    }
    return out;
}

void require_both_classes(const std::vector<data::EncodedSequence>& valid_split) {
    bool pos = false, neg = false;
    for (const auto& seq : valid_split) {
        for (const auto& step : seq.steps) {
            if (!step.valid) continue;
            (step.label == 1 ? pos : neg) = true;
            if (pos && neg) return;
        }
    }
    throw std::runtime_error(
        "validation split is single-class; AUROC early stopping impossible");
}

}  // namespace

RunHistory train_in_place(model::ParamSet& params, const model::ModelConfig& arch,
                          const std::vector<data::EncodedSequence>& train_split,
                          const std::vector<data::EncodedSequence>& valid_split,
                          const TrainConfig& cfg, const std::vector<std::string>& frozen) {
    cfg.validate();
    arch.validate();
    if (train_split.empty()) throw std::runtime_error("train split is empty");
    if (valid_split.empty()) throw std::runtime_error("validation split is empty");
    if (cfg.stop_metric == StopMetric::valid_auroc) require_both_classes(valid_split);

    std::unordered_set<std::string> frozen_set(frozen.begin(), frozen.end());
    for (const auto& name : frozen) {
        if (!params.has(name)) {
            throw std::runtime_error("frozen block '" + name + "' does not exist");
        }
    }

    // Trainable blocks live in their own set so the optimizer (decay
    // included) never touches frozen ones.
    model::ParamSet trainable;
    for (const auto& block : params.blocks()) {
        if (!frozen_set.count(block.name)) {
            trainable.add(block.name, block.value, block.is_bias);
        }
    }
    if (trainable.block_count() == 0) {
        throw std::runtime_error("every parameter block is frozen; nothing to train");
    }

    optim::AdamWState opt_state;
    const num::RngStream root(cfg.seed);

    std::vector<std::size_t> usable;  // sequences with at least one valid step
    for (std::size_t i = 0; i < train_split.size(); ++i) {
        if (has_valid_step(train_split[i])) usable.push_back(i);
    }
    if (usable.empty()) throw std::runtime_error("train split has no valid steps");

    RunHistory history;
    model::ParamSet best_params;
    double best_auroc = -std::numeric_limits<double>::infinity();
    double best_loss = std::numeric_limits<double>::infinity();
    double tolerance_ref = std::numeric_limits<double>::infinity();
    int bad_epochs = 0;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::vector<std::size_t> order = usable;
        num::RngStream order_stream =
            root.split("order").split(static_cast<std::uint64_t>(epoch));
        num::shuffle(order, order_stream);

        double epoch_loss_sum = 0.0;
        std::size_t epoch_count = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            model::ParamSet grads = params.zeros_like();
            std::size_t batch_used = 0;
            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t idx = order[b];
                num::RngStream drop = root.split("dropout")
                                          .split(static_cast<std::uint64_t>(epoch))
                                          .split(static_cast<std::uint64_t>(idx));
                const auto fwd =
                    model::forward_sequence(train_split[idx], params, arch,
                                            model::RunMode::train, cfg.event_weight, &drop);
                grads.accumulate(model::backward_sequence(train_split[idx], params, arch,
                                                          cfg.event_weight, fwd));
                epoch_loss_sum += fwd.total_loss;
                ++batch_used;
            }
            if (batch_used == 0) continue;
            epoch_count += batch_used;
            grads.scale_all(1.0 / static_cast<double>(batch_used));

            model::ParamSet trainable_grads;
            for (const auto& block : trainable.blocks()) {
                trainable_grads.add(block.name, grads.at(block.name),
                                    grads.is_bias(block.name));
            }
            optim::adamw_step(trainable, trainable_grads, opt_state, cfg.optimizer);
            for (const auto& block : trainable.blocks()) {
                params.at(block.name) = block.value;
            }
        }

        const auto valid = eval_valid(params, arch, valid_split, cfg.event_weight);
        EpochRecord record;
        record.epoch = epoch;
        record.train_loss = epoch_loss_sum / static_cast<double>(epoch_count);
        record.valid_loss = valid.loss;
        record.valid_auroc = valid.auroc;
        history.epochs.push_back(record);

        bool improved = false;
        if (cfg.stop_metric == StopMetric::valid_auroc) {
            if (valid.auroc > best_auroc) {
                best_auroc = valid.auroc;
                best_params = params;
                history.best_epoch = epoch;
                improved = true;
            }
        } else {
            if (valid.loss < best_loss) {  // best epoch = lowest loss
                best_loss = valid.loss;
                best_params = params;
                history.best_epoch = epoch;
            }
            // ...but patience only resets on improvements >= tolerance.
            if (tolerance_ref - valid.loss >= cfg.loss_tolerance) {
                tolerance_ref = valid.loss;
                improved = true;
            }
        }
        if (improved) {
            bad_epochs = 0;
        } else if (++bad_epochs >= cfg.patience) {
            history.stop_reason = "early_stop";
            break;
        }
    }
    if (history.stop_reason.empty()) history.stop_reason = "max_epochs";

    params = best_params;
    return history;
}

std::pair<model::ParamSet, RunHistory> train(const model::ModelConfig& arch,
                                             const data::Cohort& cohort,
                                             const TrainConfig& cfg) {
    model::ParamSet params =
        model::build_architecture(arch, num::RngStream(cfg.seed).split("init"));
    RunHistory history = train_in_place(params, arch, cohort.train, cohort.valid, cfg);
    return {std::move(params), std::move(history)};
}

// ---------------------------------------------------------------------------
// Two-phase baselines
// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string> kEventHead = {"event.w", "event.b"};

std::vector<std::string> all_but_event(const model::ParamSet& params) {
    std::vector<std::string> frozen;
    for (const auto& block : params.blocks()) {
        if (block.name != "event.w" && block.name != "event.b") {
            frozen.push_back(block.name);
        }
    }
    return frozen;
}

std::vector<std::string> lstm_and_forecast(const model::ParamSet& params) {
    std::vector<std::string> frozen;
    for (const auto& block : params.blocks()) {
        if (block.name.rfind("lstm.", 0) == 0 || block.name.rfind("forecast.", 0) == 0) {
            frozen.push_back(block.name);
        }
    }
    return frozen;
}

}  // namespace

TwoPhaseResult train_two_phase(const model::ModelConfig& arch, const data::Cohort& cohort,
                               const TrainConfig& phase1_cfg, const TrainConfig& phase2_cfg,
                               const data::Cohort* phase1_cohort) {
    arch.validate();
    if (arch.kind != model::ArchKind::embedding && arch.kind != model::ArchKind::residual) {
        throw std::runtime_error("two-phase training applies to embedding/residual kinds");
    }
    const data::Cohort& phase1_data = phase1_cohort ? *phase1_cohort : cohort;

    // Phase 1 always pretrains the forecast objective on an embedding-kind
    // network with the event head parked at its initialization.
    model::ModelConfig pretrain_arch = arch;
    pretrain_arch.kind = model::ArchKind::embedding;
    pretrain_arch.branch_width = 0;
    pretrain_arch.dropout_branch = 0.0;
    pretrain_arch.validate();

    TrainConfig p1 = phase1_cfg;
    p1.event_weight = 0.0;
    p1.stop_metric = StopMetric::valid_loss_tolerance;

    TrainConfig p2 = phase2_cfg;
    p2.event_weight = 1.0;
    p2.stop_metric = StopMetric::valid_auroc;

    TwoPhaseResult result;
    model::ParamSet pretrained =
        model::build_architecture(pretrain_arch, num::RngStream(p1.seed).split("init"));
    result.phase1 = train_in_place(pretrained, pretrain_arch, phase1_data.train,
                                   phase1_data.valid, p1, kEventHead);

    if (arch.kind == model::ArchKind::embedding) {
        result.params = std::move(pretrained);
        result.phase2 = train_in_place(result.params, arch, cohort.train, cohort.valid, p2,
                                       all_but_event(result.params));
        return result;
    }

    // Residual: a fresh residual network adopts every block the pretrained
    // model owns, keeping only the residual path at its initialization.
    result.params =
        model::build_architecture(arch, num::RngStream(p1.seed).split("init"));
    for (const auto& block : pretrained.blocks()) {
        num::Matrix& dst = result.params.at(block.name);
        if (!dst.same_shape(block.value)) {
            throw std::runtime_error("two-phase: shape mismatch adopting " + block.name);
        }
        dst = block.value;
    }
    result.phase2 = train_in_place(result.params, arch, cohort.train, cohort.valid, p2,
                                   lstm_and_forecast(result.params));
    return result;
}

// ---------------------------------------------------------------------------
// Loss-weight sweep
// ---------------------------------------------------------------------------

std::size_t select_best_entry(const std::vector<SweepEntry>& entries) {
    if (entries.empty()) throw std::runtime_error("sweep selection over empty entries");
    std::size_t best = 0;
    for (std::size_t i = 1; i < entries.size(); ++i) {
        const bool better =
            entries[i].valid_auroc > entries[best].valid_auroc ||
            (entries[i].valid_auroc == entries[best].valid_auroc &&
             entries[i].event_weight > entries[best].event_weight);
        if (better) best = i;
    }
    return best;
}

SweepResult sweep_loss_weight(const model::ModelConfig& arch, const data::Cohort& cohort,
                              const std::vector<double>& grid, const TrainConfig& base) {
    if (grid.empty()) throw std::runtime_error("loss-weight grid is empty");
    for (const double p : grid) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::runtime_error("loss-weight grid values must lie in [0, 1]");
        }
    }
    SweepResult result;
    std::vector<model::ParamSet> kept;  // params per entry until selection
    for (const double p : grid) {
        TrainConfig cfg = base;
        cfg.event_weight = p;
        auto [params, history] = train(arch, cohort, cfg);
        SweepEntry entry;
        entry.event_weight = p;
        entry.valid_auroc =
            history.epochs[static_cast<std::size_t>(history.best_epoch - 1)].valid_auroc;
        entry.history = std::move(history);
        result.entries.push_back(std::move(entry));
        kept.push_back(std::move(params));
    }
    result.best_index = select_best_entry(result.entries);
    result.best_event_weight = result.entries[result.best_index].event_weight;
    result.best_params = std::move(kept[result.best_index]);
    return result;
}

}  // namespace rarecast::experiment
