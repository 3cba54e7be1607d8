#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rarecast/config_json.hpp"
#include "rarecast/experiment.hpp"
#include "rarecast/rng.hpp"

namespace fs = std::filesystem;
using namespace rarecast;

namespace {

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

/// Cohort with a plantable signal: input column 0 carries the step label
/// (+1/-1), the rest is noise, and the forecast class equals the label.
/// flip_valid inverts the validation labels (inputs untouched), which makes
/// every epoch of learning hurt validation AUROC.
data::Cohort signal_cohort(std::size_t n_train, std::size_t n_valid, std::size_t n_test,
                           bool flip_valid, std::uint64_t seed) {
    data::Cohort cohort;
    cohort.tasks.task_ids = {"sig"};
    cohort.tasks.class_counts = {2};
    const auto make_split = [&](const char* name, std::size_t count, bool flip) {
        std::vector<data::EncodedSequence> split;
        num::RngStream stream = num::RngStream(seed).split(name);
        for (std::size_t i = 0; i < count; ++i) {
            data::EncodedSequence seq;
            seq.admission_id = std::string(name) + "-" + std::to_string(i);
            for (int k = 1; k <= 6; ++k) {
                data::Step step;
                step.time = k;
                const int label = stream.below(0.5) ? 1 : 0;
                step.input = {label ? 1.0 : -1.0, 0.5 * stream.normal(),
                              0.5 * stream.normal(), 0.5 * stream.normal()};
                step.forecast_classes = {label};
                step.label = flip ? 1 - label : label;
                seq.steps.push_back(std::move(step));
            }
            split.push_back(std::move(seq));
        }
        return split;
    };
    cohort.train = make_split("train", n_train, false);
    cohort.valid = make_split("valid", n_valid, flip_valid);
    cohort.test = make_split("test", n_test, false);
    cohort.refresh_stats();
    return cohort;
}

model::ModelConfig tiny_arch(model::ArchKind kind) {
    model::ModelConfig cfg;
    cfg.kind = kind;
    cfg.d_in = 4;
    cfg.hidden = 6;
    cfg.embed = 4;
    if (kind != model::ArchKind::supervised) {
        cfg.tasks.task_ids = {"sig"};
        cfg.tasks.class_counts = {2};
    }
    return cfg;
}

experiment::TrainConfig quick_cfg(std::uint64_t seed, int max_epochs = 4) {
    experiment::TrainConfig cfg;
    cfg.batch_size = 16;
    cfg.max_epochs = max_epochs;
    cfg.patience = 2;
    cfg.seed = seed;
    cfg.optimizer.lr = 5e-3;
    return cfg;
}

bool params_equal(const model::ParamSet& a, const model::ParamSet& b) {
    return a.flatten() == b.flatten() && a.block_count() == b.block_count();
}

bool block_equal(const model::ParamSet& a, const model::ParamSet& b,
                 const std::string& name) {
    return a.at(name) == b.at(name);
}

bool histories_equal(const experiment::RunHistory& a, const experiment::RunHistory& b) {
    if (a.best_epoch != b.best_epoch || a.stop_reason != b.stop_reason ||
        a.epochs.size() != b.epochs.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.epochs.size(); ++i) {
        const auto& x = a.epochs[i];
        const auto& y = b.epochs[i];
        const bool auroc_same = (std::isnan(x.valid_auroc) && std::isnan(y.valid_auroc)) ||
                                x.valid_auroc == y.valid_auroc;
        if (x.epoch != y.epoch || x.train_loss != y.train_loss ||
            x.valid_loss != y.valid_loss || !auroc_same) {
            return false;
        }
    }
    return true;
}

bool reports_equal(const experiment::EvalReport& a, const experiment::EvalReport& b) {
    const auto num_same = [](double x, double y) {
        return (std::isnan(x) && std::isnan(y)) || x == y;
    };
    return a.model_name == b.model_name && a.arch_kind == b.arch_kind &&
           a.event_weight == b.event_weight && a.seed == b.seed &&
           a.cohort_id == b.cohort_id && a.reduction == b.reduction &&
           a.fraction == b.fraction && a.iteration == b.iteration &&
           a.test_prior == b.test_prior && num_same(a.test_auroc, b.test_auroc) &&
           num_same(a.test_auprc, b.test_auprc) && a.auroc_note == b.auroc_note &&
           a.auprc_note == b.auprc_note && a.scored.scores == b.scored.scores &&
           a.scored.labels == b.scored.labels;
}

fs::path fresh_dir(const char* name) {
    const fs::path dir = fs::path("test_experiment_tmp") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

TEST_CASE("anti-correlated validation stops at patience and keeps the best epoch") {
    // Inputs predict train labels, but validation labels are flipped: every
    // epoch of learning drives validation AUROC further down.
    const auto cohort = signal_cohort(32, 24, 8, true, 5);
    auto cfg = quick_cfg(11, 10);
    cfg.patience = 1;
    cfg.optimizer.lr = 8e-3;

    const auto [params, history] = experiment::train(tiny_arch(model::ArchKind::supervised),
                                                     cohort, cfg);
    REQUIRE(history.epochs.size() >= 2);
    INFO("epoch aurocs: ", history.epochs[0].valid_auroc, " ",
         history.epochs[1].valid_auroc);
    CHECK(history.epochs[1].valid_auroc < history.epochs[0].valid_auroc);
    CHECK(history.epochs.size() == 2);  // stopped right after the first bad epoch
    CHECK(history.best_epoch == 1);
    CHECK(history.stop_reason == "early_stop");

    // Returned parameters really are the epoch-1 snapshot: replaying one
    // epoch (max_epochs=1) must land on identical values.
    auto one_epoch = cfg;
    one_epoch.max_epochs = 1;
    const auto [params1, history1] =
        experiment::train(tiny_arch(model::ArchKind::supervised), cohort, one_epoch);
    CHECK(params_equal(params, params1));
}

TEST_CASE("best-epoch bookkeeping matches the recorded maximum") {
    const auto cohort = signal_cohort(40, 24, 8, false, 6);
    const auto [params, history] =
        experiment::train(tiny_arch(model::ArchKind::joint), cohort, quick_cfg(3, 6));
    REQUIRE(history.best_epoch >= 1);
    double best = -1.0;
    for (const auto& e : history.epochs) best = std::max(best, e.valid_auroc);
    CHECK(history.epochs[static_cast<std::size_t>(history.best_epoch - 1)].valid_auroc ==
          best);
    CHECK((history.stop_reason == "early_stop" || history.stop_reason == "max_epochs"));
}

TEST_CASE("training is bit-deterministic under a fixed seed") {
    const auto cohort = signal_cohort(30, 16, 8, false, 9);
    auto arch = tiny_arch(model::ArchKind::joint);
    arch.dropout_embed = 0.2;  // exercise the dropout stream path too
    auto cfg = quick_cfg(17, 3);
    cfg.event_weight = 0.7;

    const auto [pa, ha] = experiment::train(arch, cohort, cfg);
    const auto [pb, hb] = experiment::train(arch, cohort, cfg);
    CHECK(histories_equal(ha, hb));
    CHECK(params_equal(pa, pb));
}

TEST_CASE("joint with full event weight degenerates to supervised training") {
    const auto cohort = signal_cohort(32, 20, 8, false, 13);
    auto cfg = quick_cfg(21, 4);
    cfg.event_weight = 1.0;

    const auto [p_joint, h_joint] =
        experiment::train(tiny_arch(model::ArchKind::joint), cohort, cfg);
    const auto [p_spv, h_spv] =
        experiment::train(tiny_arch(model::ArchKind::supervised), cohort, cfg);

    REQUIRE(h_joint.epochs.size() == h_spv.epochs.size());
    for (std::size_t i = 0; i < h_joint.epochs.size(); ++i) {
        CHECK(h_joint.epochs[i].valid_auroc == h_spv.epochs[i].valid_auroc);
    }
    for (const char* name :
         {"lstm.w_i", "lstm.w_f", "lstm.w_o", "lstm.w_g", "lstm.u_i", "lstm.u_f",
          "lstm.u_o", "lstm.u_g", "lstm.b_i", "lstm.b_f", "lstm.b_o", "lstm.b_g", "emb.w",
          "emb.b", "event.w", "event.b"}) {
        CHECK(block_equal(p_joint, p_spv, name));
    }
    // Train losses differ only through the (zero-weighted) forecast term,
    // which p = 1 removes bit-exactly.
    for (std::size_t i = 0; i < h_joint.epochs.size(); ++i) {
        CHECK(h_joint.epochs[i].train_loss == h_spv.epochs[i].train_loss);
    }
}

TEST_CASE("frozen blocks come back bit-identical") {
    const auto cohort = signal_cohort(24, 16, 8, false, 31);
    const auto arch = tiny_arch(model::ArchKind::joint);
    auto params = model::build_architecture(arch, num::RngStream(4).split("init"));
    const auto before = params;
    experiment::train_in_place(params, arch, cohort.train, cohort.valid, quick_cfg(4, 2),
                               {"lstm.w_i", "lstm.u_i", "emb.b"});
    CHECK(block_equal(params, before, "lstm.w_i"));
    CHECK(block_equal(params, before, "lstm.u_i"));
    CHECK(block_equal(params, before, "emb.b"));
    CHECK(!block_equal(params, before, "emb.w"));
    CHECK_THROWS(experiment::train_in_place(params, arch, cohort.train, cohort.valid,
                                            quick_cfg(4, 1), {"no.such.block"}));
}

TEST_CASE("single-class validation is rejected before training") {
    auto cohort = signal_cohort(20, 8, 4, false, 2);
    for (auto& seq : cohort.valid) {
        for (auto& step : seq.steps) step.label = 0;
    }
    CHECK_THROWS_WITH(
        experiment::train(tiny_arch(model::ArchKind::supervised), cohort, quick_cfg(1)),
        doctest::Contains("single-class"));
}

// ---------------------------------------------------------------------------
// Two-phase baselines
// ---------------------------------------------------------------------------

TEST_CASE("two-phase training freezes exactly the promised blocks") {
    const auto cohort = signal_cohort(32, 20, 8, false, 23);
    const auto emb_arch = tiny_arch(model::ArchKind::embedding);
    const auto res_arch = tiny_arch(model::ArchKind::residual);
    const auto p1 = quick_cfg(41, 3);
    const auto p2 = quick_cfg(41, 3);

    // Reconstruct the phase-1 result independently: same pretraining run.
    auto pretrained = model::build_architecture(emb_arch, num::RngStream(41).split("init"));
    auto p1_cfg = p1;
    p1_cfg.event_weight = 0.0;
    p1_cfg.stop_metric = experiment::StopMetric::valid_loss_tolerance;
    experiment::train_in_place(pretrained, emb_arch, cohort.train, cohort.valid, p1_cfg,
                               {"event.w", "event.b"});

    const auto emb_run = experiment::train_two_phase(emb_arch, cohort, p1, p2);
    // Embedding phase 2: everything except the event head is untouched.
    for (const auto& block : pretrained.blocks()) {
        if (block.name == "event.w" || block.name == "event.b") continue;
        CHECK(emb_run.params.at(block.name) == block.value);
    }
    CHECK(!block_equal(emb_run.params, pretrained, "event.w"));

    const auto res_run = experiment::train_two_phase(res_arch, cohort, p1, p2);
    // Residual adopts the pretrained blocks, then phase 2 keeps LSTM and
    // forecast head frozen while the embedding moves.
    for (const char* name : {"lstm.w_i", "lstm.u_g", "lstm.b_o", "forecast.w",
                             "forecast.b"}) {
        CHECK(res_run.params.at(name) == pretrained.at(name));
    }
    CHECK(!block_equal(res_run.params, pretrained, "emb.w"));
    CHECK(res_run.params.has("residual.w"));
    CHECK(res_run.params.has("residual.b"));

    // Both runs share the identical pretraining trajectory.
    CHECK(histories_equal(emb_run.phase1, res_run.phase1));

    CHECK_THROWS(experiment::train_two_phase(tiny_arch(model::ArchKind::joint), cohort, p1,
                                             p2));
}

// ---------------------------------------------------------------------------
// Loss-weight sweep
// ---------------------------------------------------------------------------

TEST_CASE("sweep ties break toward the larger event weight") {
    std::vector<experiment::SweepEntry> entries(3);
    entries[0].event_weight = 0.2;
    entries[0].valid_auroc = 0.8;
    entries[1].event_weight = 0.9;
    entries[1].valid_auroc = 0.8;
    entries[2].event_weight = 0.5;
    entries[2].valid_auroc = 0.75;
    CHECK(experiment::select_best_entry(entries) == 1);
    entries[2].valid_auroc = 0.81;
    CHECK(experiment::select_best_entry(entries) == 2);
}

TEST_CASE("a singleton grid at one is plain supervised training") {
    const auto cohort = signal_cohort(30, 16, 8, false, 3);
    const auto cfg = quick_cfg(19, 3);
    const auto sweep = experiment::sweep_loss_weight(tiny_arch(model::ArchKind::joint),
                                                     cohort, {1.0}, cfg);
    REQUIRE(sweep.entries.size() == 1);
    CHECK(sweep.best_event_weight == 1.0);

    auto spv_cfg = cfg;
    spv_cfg.event_weight = 1.0;
    const auto [p_spv, h_spv] =
        experiment::train(tiny_arch(model::ArchKind::supervised), cohort, spv_cfg);
    CHECK(histories_equal(sweep.entries[0].history, h_spv));
    CHECK(block_equal(sweep.best_params, p_spv, "event.w"));

    CHECK_THROWS(experiment::sweep_loss_weight(tiny_arch(model::ArchKind::joint), cohort,
                                               {}, cfg));
    CHECK_THROWS(experiment::sweep_loss_weight(tiny_arch(model::ArchKind::joint), cohort,
                                               {1.2}, cfg));
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

TEST_CASE("zeroed parameters score one half everywhere") {
    const auto cohort = signal_cohort(8, 4, 12, false, 44);
    const auto arch = tiny_arch(model::ArchKind::supervised);
    auto params = model::build_architecture(arch, num::RngStream(1).split("init"));
    params.fill(0.0);
    const auto report = experiment::evaluate(params, arch, cohort.test);
    for (const double s : report.scored.scores) CHECK(s == 0.5);
    CHECK(report.test_auroc == 0.5);
    // All-tied scores collapse the PR curve to a single group whose
    // precision is the prior.
    CHECK(report.test_auprc == report.test_prior);
    CHECK(report.scored.scores.size() == 12 * 6);
}

TEST_CASE("evaluate skips all-masked admissions and flags single-class splits") {
    auto cohort = signal_cohort(8, 4, 6, false, 45);
    for (auto& step : cohort.test[0].steps) step.valid = false;
    const auto arch = tiny_arch(model::ArchKind::supervised);
    const auto params = model::build_architecture(arch, num::RngStream(2).split("init"));
    const auto report = experiment::evaluate(params, arch, cohort.test);
    CHECK(report.scored.scores.size() == 5 * 6);

    auto negative = cohort;
    for (auto& seq : negative.test) {
        for (auto& step : seq.steps) step.label = 0;
    }
    const auto flagged = experiment::evaluate(params, arch, negative.test);
    CHECK(std::isnan(flagged.test_auroc));
    CHECK(!flagged.auroc_note.empty());
    CHECK(std::isnan(flagged.test_auprc));
    CHECK(!flagged.auprc_note.empty());
    CHECK(flagged.test_prior == 0.0);
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

TEST_CASE("run history round-trips exactly, including missing AUROC") {
    experiment::RunHistory history;
    history.best_epoch = 2;
    history.stop_reason = "early_stop";
    history.epochs.push_back({1, 0.6931471805599453, 0.69, 0.5});
    history.epochs.push_back(
        {2, 0.1234567890123456, 0.58, std::numeric_limits<double>::quiet_NaN()});

    const auto dir = fresh_dir("history");
    const auto path = (dir / "history.json").string();
    experiment::save_run_history(history, path);
    const auto loaded = experiment::load_run_history(path);
    CHECK(histories_equal(history, loaded));

    // Same content twice => byte-identical file (no timestamps, sorted keys).
    const auto path2 = (dir / "history2.json").string();
    experiment::save_run_history(history, path2);
    std::ifstream a(path), b(path2);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
}

TEST_CASE("eval reports round-trip bit-exactly and metrics are recomputable") {
    const auto cohort = signal_cohort(16, 8, 10, false, 46);
    const auto arch = tiny_arch(model::ArchKind::joint);
    auto cfg = quick_cfg(5, 2);
    const auto [params, history] = experiment::train(arch, cohort, cfg);
    auto report = experiment::evaluate(params, arch, cohort.test);
    report.model_name = "joint";
    report.seed = cfg.seed;
    report.cohort_id = "unit-test";
    report.event_weight = 0.8;

    const auto dir = fresh_dir("report");
    const auto rp = (dir / "eval_report.json").string();
    const auto sp = (dir / "scores.csv").string();
    experiment::save_eval_report(report, rp, sp);
    const auto loaded = experiment::load_eval_report(rp, sp);
    CHECK(reports_equal(report, loaded));
    CHECK(metrics::auprc(loaded.scored) == report.test_auprc);
    CHECK(metrics::auroc(loaded.scored) == report.test_auroc);
}

TEST_CASE("checkpoints restore parameters and optimizer state bit-exactly") {
    const auto arch = tiny_arch(model::ArchKind::joint_branched);
    auto params = model::build_architecture(arch, num::RngStream(7).split("init"));

    // A few real optimizer steps so the moments are nontrivial.
    optim::AdamWState state;
    optim::OptimConfig ocfg;
    for (int i = 0; i < 3; ++i) {
        auto grads = params.zeros_like();
        grads.fill(0.01 * (i + 1));
        optim::adamw_step(params, grads, state, ocfg);
    }

    nlohmann::json meta;
    meta["arch"] = config::to_json(arch);
    meta["note"] = "unit";

    const auto dir = fresh_dir("ckpt");
    const auto path = (dir / "model.ckpt").string();
    experiment::save_checkpoint(path, params, &state, meta);
    const auto loaded = experiment::load_checkpoint(path);
    CHECK(params_equal(loaded.params, params));
    REQUIRE(loaded.has_opt_state);
    CHECK(loaded.opt_state.t == state.t);
    for (const auto& [name, m] : state.m) {
        CHECK(loaded.opt_state.m.at(name) == m);
        CHECK(loaded.opt_state.v.at(name) == state.v.at(name));
    }
    CHECK(loaded.meta.at("note") == "unit");
    const auto arch2 = config::model_config_from_json(loaded.meta.at("arch"));
    CHECK(arch2.kind == arch.kind);
    CHECK(arch2.tasks.class_counts == arch.tasks.class_counts);

    // Without optimizer state.
    const auto path2 = (dir / "bare.ckpt").string();
    experiment::save_checkpoint(path2, params, nullptr, nlohmann::json::object());
    CHECK(!experiment::load_checkpoint(path2).has_opt_state);

    std::ofstream(path2, std::ios::binary | std::ios::trunc) << "garbage";
    CHECK_THROWS(experiment::load_checkpoint(path2));
}

// ---------------------------------------------------------------------------
// Reduction studies
// ---------------------------------------------------------------------------

TEST_CASE("reduction studies share the reduced cohort across models") {
    const auto cohort = signal_cohort(24, 16, 10, false, 61);
    std::vector<experiment::StudyModel> models;
    models.push_back({"spv", tiny_arch(model::ArchKind::supervised), 1.0});
    models.push_back({"joint", tiny_arch(model::ArchKind::joint), 0.8});

    const auto base = quick_cfg(100, 2);
    const auto cells = experiment::run_prior_reduction_study(
        models, cohort, {1.0, 0.5}, 2, base, 77, "toy");
    CHECK(cells.size() == 2 * 2 * 2);

    for (std::size_t i = 0; i < cells.size(); i += 2) {
        const auto& a = cells[i];
        const auto& b = cells[i + 1];
        CHECK(a.fraction == b.fraction);
        CHECK(a.iteration == b.iteration);
        // Identical test split within a cell: same labels in the same order.
        CHECK(a.report.scored.labels == b.report.scored.labels);
        CHECK(a.report.test_prior == b.report.test_prior);
        CHECK(a.report.seed == base.seed + a.iteration);
    }

    // Determinism: the whole study replays bit-exactly.
    const auto again = experiment::run_prior_reduction_study(
        models, cohort, {1.0, 0.5}, 2, base, 77, "toy");
    REQUIRE(again.size() == cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        CHECK(reports_equal(cells[i].report, again[i].report));
    }

    const auto dir = fresh_dir("study");
    const auto csv = (dir / "study.csv").string();
    experiment::write_study_csv(cells, csv);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "model,reduction,fraction,iteration,seed,test_auroc,test_auprc,test_prior,"
          "n_scores");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) rows += line.empty() ? 0 : 1;
    CHECK(rows == cells.size());
}

TEST_CASE("sample study pretrains two-phase models on unreduced data") {
    const auto cohort = signal_cohort(24, 16, 10, false, 62);
    std::vector<experiment::StudyModel> models;
    models.push_back({"embedding", tiny_arch(model::ArchKind::embedding), 1.0});

    const auto base = quick_cfg(200, 2);
    const double fraction = 0.5;
    const std::uint64_t reduction_seed = 88;
    const auto cells = experiment::run_sample_reduction_study(
        models, cohort, {fraction}, 1, base, reduction_seed, "toy");
    REQUIRE(cells.size() == 1);

    // Replay by hand: phase 1 on the full cohort, phase 2 on the reduction.
    const auto reduced = data::reduce_samples(cohort, fraction, reduction_seed, 0);
    const auto manual = experiment::train_two_phase(
        tiny_arch(model::ArchKind::embedding), reduced, base, base, &cohort);
    const auto manual_report =
        experiment::evaluate(manual.params, tiny_arch(model::ArchKind::embedding),
                             reduced.test);
    CHECK(manual_report.scored.scores == cells[0].report.scored.scores);
    CHECK(manual_report.test_auprc == cells[0].report.test_auprc);

    // And the prior study would NOT have used the full split in phase 1.
    const auto prior_cells = experiment::run_prior_reduction_study(
        models, cohort, {fraction}, 1, base, reduction_seed, "toy");
    const auto reduced_prior = data::reduce_prior(cohort, fraction, reduction_seed, 0);
    const auto manual_prior = experiment::train_two_phase(
        tiny_arch(model::ArchKind::embedding), reduced_prior, base, base, nullptr);
    const auto manual_prior_report =
        experiment::evaluate(manual_prior.params, tiny_arch(model::ArchKind::embedding),
                             reduced_prior.test);
    CHECK(manual_prior_report.scored.scores == prior_cells[0].report.scored.scores);
}

// ---------------------------------------------------------------------------
// Config serialization
// ---------------------------------------------------------------------------

TEST_CASE("configs survive the JSON round trip and reject unknown fields") {
    data::SyntheticConfig synth;
    synth.hazard_scale = 0.123;
    synth.seed = 99;
    const auto synth2 = config::synthetic_config_from_json(config::to_json(synth));
    CHECK(synth2.hazard_scale == synth.hazard_scale);
    CHECK(synth2.seed == synth.seed);
    CHECK(synth2.n_obs == synth.n_obs);

    experiment::TrainConfig train_cfg;
    train_cfg.stop_metric = experiment::StopMetric::valid_loss_tolerance;
    train_cfg.optimizer.lr = 0.5;
    train_cfg.optimizer.decay_exempt = {"emb.w"};
    const auto train2 = config::train_config_from_json(config::to_json(train_cfg));
    CHECK(train2.stop_metric == experiment::StopMetric::valid_loss_tolerance);
    CHECK(train2.optimizer.lr == 0.5);
    CHECK(train2.optimizer.decay_exempt == std::vector<std::string>{"emb.w"});

    auto arch = tiny_arch(model::ArchKind::residual);
    arch.dropout_embed = 0.3;
    const auto arch2 = config::model_config_from_json(config::to_json(arch));
    CHECK(arch2.kind == model::ArchKind::residual);
    CHECK(arch2.dropout_embed == 0.3);
    CHECK(arch2.tasks.task_ids == arch.tasks.task_ids);

    nlohmann::json bad = config::to_json(synth);
    bad["hazzard_scale"] = 0.5;  // typo must be caught
    CHECK_THROWS_WITH(config::synthetic_config_from_json(bad),
                      doctest::Contains("hazzard_scale"));
}
