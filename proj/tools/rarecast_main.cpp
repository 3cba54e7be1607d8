// Command-line front door: generate cohorts, train and evaluate models,
// sweep the loss weight, run reduction studies, and aggregate reports into
// plot-ready CSV (and optional SVG) files.
//
// Every subcommand reads one JSON config, writes all artifacts into --out,
// and snapshots the fully-resolved config there so the run can be
// reproduced bit-exactly. Exit status is 0 only when every artifact was
// written.

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rarecast/config_json.hpp"
#include "rarecast/data.hpp"
#include "rarecast/experiment.hpp"
#include "svg_plot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rarecast;

namespace {

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

struct CommonArgs {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool has_seed = false;
    bool force = false;
    unsigned workers = 1;
};

[[noreturn]] void fail(const std::string& message) { throw std::runtime_error(message); }

void require_known_keys(const json& j, const std::string& context,
                        const std::set<std::string>& allowed) {
    if (!j.is_object()) fail(context + ": expected a JSON object");
    for (const auto& item : j.items()) {
        if (allowed.count(item.key()) == 0) {
            fail(context + ": unknown field '" + item.key() + "'");
        }
    }
}

const json& need(const json& j, const std::string& key, const std::string& context) {
    if (!j.contains(key)) fail(context + ": missing required field '" + key + "'");
    return j.at(key);
}

/// Create --out, refusing to clobber a previous run unless forced (then the
/// directory is replaced wholesale so no stale artifact survives).
void prepare_run_dir(const std::string& out, bool force) {
    const fs::path dir(out);
    if (fs::exists(dir)) {
        if (!fs::is_directory(dir)) fail("output path '" + out + "' is not a directory");
        if (!fs::is_empty(dir)) {
            if (!force) {
                fail("output directory '" + out +
                     "' is not empty; pass --force to replace it");
            }
            fs::remove_all(dir);
        }
    }
    fs::create_directories(dir);
}

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot write '" + path.string() + "'");
    out << j.dump(2) << "\n";
    if (!out) fail("failed writing '" + path.string() + "'");
}

data::Cohort load_cohort(const std::string& path) {
    if (!fs::is_directory(path)) {
        fail("cohort archive '" + path + "' not found (expected a directory)");
    }
    return data::load_cohort_archive(path);
}

/// Parse a model config, filling d_in and the task layout from the cohort
/// when the config leaves them out.
model::ModelConfig resolve_model(const json& j, const data::Cohort& cohort) {
    model::ModelConfig cfg = config::model_config_from_json(j);
    if (cfg.d_in == 0) cfg.d_in = static_cast<int>(cohort.tasks.total_classes());
    if (cfg.kind != model::ArchKind::supervised && cfg.tasks.task_ids.empty()) {
        cfg.tasks = cohort.tasks;
    }
    cfg.validate();
    return cfg;
}

experiment::TrainConfig resolve_train(const json& j, const CommonArgs& args) {
    experiment::TrainConfig cfg = config::train_config_from_json(j);
    if (args.has_seed) cfg.seed = args.seed;
    cfg.validate();
    return cfg;
}

std::string sanitize_name(const std::string& name) {
    std::string out;
    for (const char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
        out += ok ? c : '_';
    }
    return out.empty() ? std::string("model") : out;
}

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

void cmd_generate(const CommonArgs& args) {
    data::SyntheticConfig cfg =
        config::synthetic_config_from_json(config::load_json_file(args.config));
    if (args.has_seed) cfg.seed = args.seed;
    cfg.validate();

    prepare_run_dir(args.out, args.force);
    const data::Cohort cohort = data::generate_synthetic_cohort(cfg);
    data::save_cohort_archive(cohort, args.out);
    write_json_file(fs::path(args.out) / "config.json", config::to_json(cfg));

    std::fputs(data::format_stats_table(cohort).c_str(), stdout);
    std::printf("wrote cohort archive to %s\n", args.out.c_str());
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

bool two_phase_kind(model::ArchKind kind) {
    return kind == model::ArchKind::embedding || kind == model::ArchKind::residual;
}

void save_report_files(const experiment::EvalReport& report, const fs::path& dir) {
    experiment::save_eval_report(report, (dir / "eval_report.json").string(),
                                 (dir / "scores.csv").string());
}

void cmd_train(const CommonArgs& args) {
    const json cfg_json = config::load_json_file(args.config);
    require_known_keys(cfg_json, "train config",
                       {"cohort", "model", "train", "phase1", "name"});
    const std::string cohort_path = need(cfg_json, "cohort", "train config");
    const data::Cohort cohort = load_cohort(cohort_path);
    const model::ModelConfig arch = resolve_model(need(cfg_json, "model", "train config"), cohort);
    experiment::TrainConfig base = resolve_train(need(cfg_json, "train", "train config"), args);
    const std::string name =
        cfg_json.value("name", std::string(model::arch_kind_name(arch.kind)));

    const bool two_phase = two_phase_kind(arch.kind);
    experiment::TrainConfig phase1_cfg = base;
    if (cfg_json.contains("phase1")) {
        if (!two_phase) fail("train config: 'phase1' only applies to embedding/residual kinds");
        phase1_cfg = resolve_train(cfg_json.at("phase1"), args);
    }

    prepare_run_dir(args.out, args.force);
    json snapshot;
    snapshot["cohort"] = cohort_path;
    snapshot["model"] = config::to_json(arch);
    snapshot["name"] = name;
    snapshot["train"] = config::to_json(base);
    if (two_phase) snapshot["phase1"] = config::to_json(phase1_cfg);
    write_json_file(fs::path(args.out) / "config.json", snapshot);

    model::ParamSet params;
    double event_weight = base.event_weight;
    if (two_phase) {
        const auto result = experiment::train_two_phase(arch, cohort, phase1_cfg, base);
        params = result.params;
        experiment::save_run_history(result.phase1,
                                     (fs::path(args.out) / "phase1_history.json").string());
        experiment::save_run_history(result.phase2,
                                     (fs::path(args.out) / "phase2_history.json").string());
        event_weight = 1.0;
        std::printf("phase 1: %zu epochs (best %d, %s); phase 2: %zu epochs (best %d, %s)\n",
                    result.phase1.epochs.size(), result.phase1.best_epoch,
                    result.phase1.stop_reason.c_str(), result.phase2.epochs.size(),
                    result.phase2.best_epoch, result.phase2.stop_reason.c_str());
    } else {
        auto [trained, history] = experiment::train(arch, cohort, base);
        params = std::move(trained);
        experiment::save_run_history(history,
                                     (fs::path(args.out) / "history.json").string());
        std::printf("trained %zu epochs (best %d, %s)\n", history.epochs.size(),
                    history.best_epoch, history.stop_reason.c_str());
    }

    json meta;
    meta["model"] = config::to_json(arch);
    meta["train"] = config::to_json(base);
    meta["cohort"] = cohort_path;
    meta["name"] = name;
    experiment::save_checkpoint((fs::path(args.out) / "model.ckpt").string(), params,
                                nullptr, meta);

    experiment::EvalReport report = experiment::evaluate(params, arch, cohort.test);
    report.model_name = name;
    report.event_weight = event_weight;
    report.seed = base.seed;
    report.cohort_id = cohort_path;
    save_report_files(report, args.out);
    std::printf("test prior %.5f  AUROC %.4f  AUPRC %.4f\n", report.test_prior,
                report.test_auroc, report.test_auprc);
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

void cmd_evaluate(const CommonArgs& args) {
    const json cfg_json = config::load_json_file(args.config);
    require_known_keys(cfg_json, "evaluate config", {"cohort", "checkpoint", "name", "split"});
    const std::string cohort_path = need(cfg_json, "cohort", "evaluate config");
    const std::string ckpt_path = need(cfg_json, "checkpoint", "evaluate config");
    const std::string split_name = cfg_json.value("split", std::string("test"));

    const data::Cohort cohort = load_cohort(cohort_path);
    const experiment::Checkpoint ckpt = experiment::load_checkpoint(ckpt_path);
    if (!ckpt.meta.contains("model")) {
        fail("checkpoint '" + ckpt_path + "' carries no model config in its metadata");
    }
    const model::ModelConfig arch = config::model_config_from_json(ckpt.meta.at("model"));
    const std::string name =
        cfg_json.value("name", ckpt.meta.value("name", std::string(model::arch_kind_name(
                                                           arch.kind))));

    const std::vector<data::EncodedSequence>* split = nullptr;
    if (split_name == "train") split = &cohort.train;
    else if (split_name == "valid") split = &cohort.valid;
    else if (split_name == "test") split = &cohort.test;
    else fail("evaluate config: split must be train, valid, or test");

    prepare_run_dir(args.out, args.force);
    json snapshot;
    snapshot["cohort"] = cohort_path;
    snapshot["checkpoint"] = ckpt_path;
    snapshot["name"] = name;
    snapshot["split"] = split_name;
    write_json_file(fs::path(args.out) / "config.json", snapshot);

    experiment::EvalReport report = experiment::evaluate(ckpt.params, arch, *split);
    report.model_name = name;
    report.cohort_id = cohort_path;
    save_report_files(report, args.out);
    std::printf("%s prior %.5f  AUROC %.4f  AUPRC %.4f  (%zu scores)\n", split_name.c_str(),
                report.test_prior, report.test_auroc, report.test_auprc,
                report.scored.scores.size());
}

// ---------------------------------------------------------------------------
// sweep-p
// ---------------------------------------------------------------------------

std::vector<double> default_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
    return grid;
}

void cmd_sweep(const CommonArgs& args) {
    const json cfg_json = config::load_json_file(args.config);
    require_known_keys(cfg_json, "sweep config", {"cohort", "model", "train", "grid", "name"});
    const std::string cohort_path = need(cfg_json, "cohort", "sweep config");
    const data::Cohort cohort = load_cohort(cohort_path);
    const model::ModelConfig arch = resolve_model(need(cfg_json, "model", "sweep config"), cohort);
    const experiment::TrainConfig base =
        resolve_train(need(cfg_json, "train", "sweep config"), args);
    const std::string name =
        cfg_json.value("name", std::string(model::arch_kind_name(arch.kind)));
    std::vector<double> grid = default_grid();
    if (cfg_json.contains("grid")) grid = cfg_json.at("grid").get<std::vector<double>>();

    prepare_run_dir(args.out, args.force);
    json snapshot;
    snapshot["cohort"] = cohort_path;
    snapshot["model"] = config::to_json(arch);
    snapshot["name"] = name;
    snapshot["train"] = config::to_json(base);
    snapshot["grid"] = grid;
    write_json_file(fs::path(args.out) / "config.json", snapshot);

    const experiment::SweepResult sweep =
        experiment::sweep_loss_weight(arch, cohort, grid, base);

    // Loss-weight table: the p-vs-validation-AUROC curve.
    {
        std::ofstream csv(fs::path(args.out) / "sweep.csv", std::ios::binary);
        if (!csv) fail("cannot write sweep.csv");
        csv << "event_weight,valid_auroc,best_epoch,epochs,stop_reason\n";
        char buf[128];
        for (const auto& entry : sweep.entries) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%zu,", entry.event_weight,
                          entry.valid_auroc, entry.history.best_epoch,
                          entry.history.epochs.size());
            csv << buf << entry.history.stop_reason << "\n";
        }
        if (!csv) fail("failed writing sweep.csv");
    }
    const fs::path hist_dir = fs::path(args.out) / "histories";
    fs::create_directories(hist_dir);
    for (const auto& entry : sweep.entries) {
        char tag[32];
        std::snprintf(tag, sizeof tag, "p%g", entry.event_weight);
        experiment::save_run_history(entry.history,
                                     (hist_dir / (std::string(tag) + ".json")).string());
    }

    json meta;
    meta["model"] = config::to_json(arch);
    meta["train"] = config::to_json(base);
    meta["cohort"] = cohort_path;
    meta["name"] = name;
    meta["event_weight"] = sweep.best_event_weight;
    experiment::save_checkpoint((fs::path(args.out) / "best.ckpt").string(),
                                sweep.best_params, nullptr, meta);

    experiment::EvalReport report =
        experiment::evaluate(sweep.best_params, arch, cohort.test);
    report.model_name = name;
    report.event_weight = sweep.best_event_weight;
    report.seed = base.seed;
    report.cohort_id = cohort_path;
    save_report_files(report, args.out);

    for (const auto& entry : sweep.entries) {
        std::printf("p=%.2f  valid AUROC %.4f  (best epoch %d of %zu)\n", entry.event_weight,
                    entry.valid_auroc, entry.history.best_epoch, entry.history.epochs.size());
    }
    std::printf("best p=%.2f  test AUROC %.4f  AUPRC %.4f\n", sweep.best_event_weight,
                report.test_auroc, report.test_auprc);
}

// ---------------------------------------------------------------------------
// ablate-prior / ablate-samples
// ---------------------------------------------------------------------------

void cmd_ablate(const CommonArgs& args, bool by_samples) {
    const json cfg_json = config::load_json_file(args.config);
    require_known_keys(cfg_json, "ablate config",
                       {"cohort", "models", "train", "fractions", "iterations",
                        "reduction_seed"});
    const std::string cohort_path = need(cfg_json, "cohort", "ablate config");
    const data::Cohort cohort = load_cohort(cohort_path);
    const experiment::TrainConfig base =
        resolve_train(need(cfg_json, "train", "ablate config"), args);

    const json& models_json = need(cfg_json, "models", "ablate config");
    if (!models_json.is_array() || models_json.empty()) {
        fail("ablate config: 'models' must be a nonempty array");
    }
    std::vector<experiment::StudyModel> models;
    for (const auto& mj : models_json) {
        require_known_keys(mj, "ablate config model entry", {"name", "model", "event_weight"});
        experiment::StudyModel spec;
        spec.name = need(mj, "name", "ablate config model entry").get<std::string>();
        spec.arch = resolve_model(need(mj, "model", "ablate config model entry"), cohort);
        spec.event_weight = mj.value("event_weight", 1.0);
        models.push_back(std::move(spec));
    }

    std::vector<double> fractions = {1.0, 0.8, 0.6, 0.4, 0.2};
    if (cfg_json.contains("fractions")) {
        fractions = cfg_json.at("fractions").get<std::vector<double>>();
    }
    const std::uint64_t iterations = cfg_json.value("iterations", std::uint64_t{7});
    const std::uint64_t reduction_seed = cfg_json.value("reduction_seed", std::uint64_t{1});
    if (fractions.empty()) fail("ablate config: 'fractions' must be nonempty");
    if (iterations == 0) fail("ablate config: 'iterations' must be >= 1");

    prepare_run_dir(args.out, args.force);
    json snapshot;
    snapshot["cohort"] = cohort_path;
    snapshot["train"] = config::to_json(base);
    snapshot["fractions"] = fractions;
    snapshot["iterations"] = iterations;
    snapshot["reduction_seed"] = reduction_seed;
    snapshot["models"] = json::array();
    for (const auto& spec : models) {
        json mj;
        mj["name"] = spec.name;
        mj["model"] = config::to_json(spec.arch);
        mj["event_weight"] = spec.event_weight;
        snapshot["models"].push_back(mj);
    }
    write_json_file(fs::path(args.out) / "config.json", snapshot);

    // Work items are (fraction, iteration) slices; each derives its reduced
    // cohort independently, so slices can run on any worker in any order
    // without changing a single byte of output.
    std::vector<std::pair<double, std::uint64_t>> items;
    for (const double fraction : fractions) {
        for (std::uint64_t iteration = 0; iteration < iterations; ++iteration) {
            items.emplace_back(fraction, iteration);
        }
    }
    std::vector<std::vector<experiment::StudyCell>> slices(items.size());
    std::vector<std::exception_ptr> errors(items.size());
    const auto run_item = [&](std::size_t i) {
        try {
            slices[i] = experiment::run_study_iteration(models, cohort, items[i].first,
                                                        items[i].second, base, reduction_seed,
                                                        cohort_path, by_samples);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    const unsigned workers =
        std::min<unsigned>(std::max(1u, args.workers),
                           static_cast<unsigned>(items.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < items.size(); ++i) run_item(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= items.size()) break;
                    run_item(i);
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    for (const auto& error : errors) {
        if (error) std::rethrow_exception(error);
    }

    std::vector<experiment::StudyCell> cells;
    for (auto& slice : slices) {
        for (auto& cell : slice) cells.push_back(std::move(cell));
    }

    experiment::write_study_csv(cells, (fs::path(args.out) / "study.csv").string());
    const fs::path reports_dir = fs::path(args.out) / "reports";
    fs::create_directories(reports_dir);
    for (const auto& cell : cells) {
        char tag[96];
        std::snprintf(tag, sizeof tag, "%s_f%.2f_i%" PRIu64,
                      sanitize_name(cell.model_name).c_str(), cell.fraction,
                      cell.iteration);
        experiment::save_eval_report(cell.report,
                                     (reports_dir / (std::string(tag) + ".report.json")).string(),
                                     (reports_dir / (std::string(tag) + ".scores.csv")).string());
    }

    // Compact console summary: median test AUPRC per (model, fraction).
    for (const auto& spec : models) {
        for (const double fraction : fractions) {
            std::vector<double> values;
            for (const auto& cell : cells) {
                if (cell.model_name == spec.name && cell.fraction == fraction &&
                    std::isfinite(cell.report.test_auprc)) {
                    values.push_back(cell.report.test_auprc);
                }
            }
            if (!values.empty()) {
                std::printf("%-12s f=%.2f  median test AUPRC %.4f  (n=%zu)\n",
                            spec.name.c_str(), fraction, median(values), values.size());
            }
        }
    }
    std::printf("wrote %zu study cells to %s\n", cells.size(), args.out.c_str());
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportRow {
    std::string model;
    std::string reduction;
    double fraction = 1.0;
    double event_weight = 1.0;
    double auroc = 0.0;
    double auprc = 0.0;
};

double json_number(const json& j, const char* key) {
    const auto& v = j.at(key);
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

std::vector<ReportRow> collect_reports(const std::vector<std::string>& inputs) {
    std::set<std::string> files;
    for (const auto& input : inputs) {
        const fs::path path(input);
        if (fs::is_directory(path)) {
            for (const auto& entry : fs::recursive_directory_iterator(path)) {
                if (!entry.is_regular_file()) continue;
                const std::string fname = entry.path().filename().string();
                if (fname.size() >= 11 &&
                    fname.compare(fname.size() - 11, 11, "report.json") == 0) {
                    files.insert(fs::weakly_canonical(entry.path()).string());
                }
            }
        } else if (fs::is_regular_file(path)) {
            files.insert(fs::weakly_canonical(path).string());
        } else {
            fail("report input '" + input + "' does not exist");
        }
    }

    std::vector<ReportRow> rows;
    for (const auto& file : files) {
        const json j = config::load_json_file(file);
        ReportRow row;
        row.model = j.at("model_name").get<std::string>();
        row.reduction = j.at("reduction").get<std::string>();
        row.fraction = j.at("fraction").get<double>();
        row.event_weight = j.at("event_weight").get<double>();
        row.auroc = json_number(j, "test_auroc");
        row.auprc = json_number(j, "test_auprc");
        rows.push_back(std::move(row));
    }
    return rows;
}

/// metric-vs-fraction aggregation: median/mean over iterations per
/// (model, reduction, fraction), fractions listed largest first.
void write_fraction_figure(const std::vector<ReportRow>& rows, bool use_auprc,
                           const fs::path& csv_path, bool plots,
                           const fs::path& svg_path) {
    std::map<std::tuple<std::string, std::string, double>, std::vector<double>> groups;
    for (const auto& row : rows) {
        const double value = use_auprc ? row.auprc : row.auroc;
        if (!std::isfinite(value)) continue;
        groups[{row.model, row.reduction, row.fraction}].push_back(value);
    }

    std::vector<std::tuple<std::string, std::string, double>> keys;
    for (const auto& [key, values] : groups) keys.push_back(key);
    std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
        if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
        return std::get<2>(a) > std::get<2>(b);
    });

    const char* metric = use_auprc ? "auprc" : "auroc";
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) fail("cannot write '" + csv_path.string() + "'");
    csv << "model,reduction,fraction,n,median_" << metric << ",mean_" << metric << "\n";
    char buf[160];
    for (const auto& key : keys) {
        const auto& values = groups.at(key);
        double mean = 0.0;
        for (const double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%zu,%.17g,%.17g\n",
                      std::get<0>(key).c_str(), std::get<1>(key).c_str(), std::get<2>(key),
                      values.size(), median(values), mean);
        csv << buf;
    }
    if (!csv) fail("failed writing '" + csv_path.string() + "'");

    if (plots && !keys.empty()) {
        std::set<std::string> reductions;
        for (const auto& key : keys) reductions.insert(std::get<1>(key));
        std::map<std::string, svgplot::Series> series;  // label -> series
        for (const auto& key : keys) {
            std::string label = std::get<0>(key);
            if (reductions.size() > 1) label += " (" + std::get<1>(key) + ")";
            series[label].label = label;
            series[label].points.emplace_back(std::get<2>(key), median(groups.at(key)));
        }
        std::vector<svgplot::Series> ordered;
        for (auto& [label, s] : series) {
            std::sort(s.points.begin(), s.points.end());
            ordered.push_back(std::move(s));
        }
        const std::string metric_label =
            use_auprc ? "median test AUPRC" : "median test AUROC";
        svgplot::write_line_chart(svg_path.string(), metric_label + " vs retained fraction",
                                  "retained fraction", metric_label, ordered);
    }
}

void write_weight_figure(const std::vector<ReportRow>& rows, const fs::path& csv_path,
                         bool plots, const fs::path& svg_path) {
    std::map<std::pair<std::string, double>, std::vector<double>> groups;
    for (const auto& row : rows) {
        if (!std::isfinite(row.auroc)) continue;
        groups[{row.model, row.event_weight}].push_back(row.auroc);
    }

    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) fail("cannot write '" + csv_path.string() + "'");
    csv << "model,event_weight,n,median_auroc,mean_auroc\n";
    char buf[160];
    for (const auto& [key, values] : groups) {
        double mean = 0.0;
        for (const double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        std::snprintf(buf, sizeof buf, "%s,%.17g,%zu,%.17g,%.17g\n", key.first.c_str(),
                      key.second, values.size(), median(values), mean);
        csv << buf;
    }
    if (!csv) fail("failed writing '" + csv_path.string() + "'");

    if (plots && !groups.empty()) {
        std::map<std::string, svgplot::Series> series;
        for (const auto& [key, values] : groups) {
            series[key.first].label = key.first;
            series[key.first].points.emplace_back(key.second, median(values));
        }
        std::vector<svgplot::Series> ordered;
        for (auto& [label, s] : series) {
            std::sort(s.points.begin(), s.points.end());
            ordered.push_back(std::move(s));
        }
        svgplot::write_line_chart(svg_path.string(), "median test AUROC vs loss weight p",
                                  "loss weight p", "median test AUROC", ordered);
    }
}

void cmd_report(const CommonArgs& args) {
    const json cfg_json = config::load_json_file(args.config);
    require_known_keys(cfg_json, "report config", {"inputs", "plots"});
    const json& inputs_json = need(cfg_json, "inputs", "report config");
    if (!inputs_json.is_array() || inputs_json.empty()) {
        fail("report config: 'inputs' must be a nonempty array of paths");
    }
    const std::vector<std::string> inputs = inputs_json.get<std::vector<std::string>>();
    const bool plots = cfg_json.value("plots", false);

    const std::vector<ReportRow> rows = collect_reports(inputs);
    if (rows.empty()) fail("no reports found");

    prepare_run_dir(args.out, args.force);
    json snapshot;
    snapshot["inputs"] = inputs;
    snapshot["plots"] = plots;
    write_json_file(fs::path(args.out) / "config.json", snapshot);

    const fs::path out(args.out);
    write_fraction_figure(rows, true, out / "auprc_vs_fraction.csv", plots,
                          out / "auprc_vs_fraction.svg");
    write_fraction_figure(rows, false, out / "auroc_vs_fraction.csv", plots,
                          out / "auroc_vs_fraction.svg");
    write_weight_figure(rows, out / "auroc_vs_p.csv", plots, out / "auroc_vs_p.svg");
    std::printf("aggregated %zu reports into %s\n", rows.size(), args.out.c_str());
}

// ---------------------------------------------------------------------------
// Argument wiring
// ---------------------------------------------------------------------------

CLI::Option* add_common(CLI::App* sub, CommonArgs& args, bool with_seed, bool with_workers) {
    sub->add_option("--config", args.config, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", args.out, "output directory for run artifacts")->required();
    sub->add_flag("--force", args.force, "replace a non-empty output directory");
    CLI::Option* seed = nullptr;
    if (with_seed) {
        seed = sub->add_option("--seed", args.seed, "override the config's seed");
    }
    if (with_workers) {
        sub->add_option("--workers", args.workers, "concurrent study slices")
            ->check(CLI::Range(1u, 64u));
    }
    return seed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"low-prior event prediction with a jointly learned patient-state "
                 "representation"};
    app.require_subcommand(1);

    CommonArgs args;
    CLI::Option* seed_opt = nullptr;

    auto* generate = app.add_subcommand("generate", "generate a synthetic cohort archive");
    seed_opt = add_common(generate, args, true, false);
    generate->callback([&, opt = seed_opt] {
        args.has_seed = opt->count() > 0;
        cmd_generate(args);
    });

    auto* train = app.add_subcommand("train", "train one model and evaluate it on test");
    seed_opt = add_common(train, args, true, false);
    train->callback([&, opt = seed_opt] {
        args.has_seed = opt->count() > 0;
        cmd_train(args);
    });

    auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint on a cohort split");
    add_common(evaluate, args, false, false);
    evaluate->callback([&] { cmd_evaluate(args); });

    auto* sweep = app.add_subcommand("sweep-p", "train across a loss-weight grid and pick "
                                                "the best by validation AUROC");
    seed_opt = add_common(sweep, args, true, false);
    sweep->callback([&, opt = seed_opt] {
        args.has_seed = opt->count() > 0;
        cmd_sweep(args);
    });

    auto* ablate_prior =
        app.add_subcommand("ablate-prior", "positive-sequence reduction study");
    seed_opt = add_common(ablate_prior, args, true, true);
    ablate_prior->callback([&, opt = seed_opt] {
        args.has_seed = opt->count() > 0;
        cmd_ablate(args, false);
    });

    auto* ablate_samples =
        app.add_subcommand("ablate-samples", "training-sample reduction study");
    seed_opt = add_common(ablate_samples, args, true, true);
    ablate_samples->callback([&, opt = seed_opt] {
        args.has_seed = opt->count() > 0;
        cmd_ablate(args, true);
    });

    auto* report = app.add_subcommand("report", "aggregate evaluation reports into "
                                                "plot-ready CSVs");
    add_common(report, args, false, false);
    report->callback([&] { cmd_report(args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
