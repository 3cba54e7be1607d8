#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "rarecast/experiment.hpp"

namespace rarecast::experiment {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::json number_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

double number_from(const nlohmann::json& j) {
    if (j.is_null()) return kNaN;
    return j.get<double>();
}

void dump_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed for " + path);
}

nlohmann::json parse_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

}  // namespace

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

EvalReport evaluate(const model::ParamSet& params, const model::ModelConfig& arch,
                    const std::vector<data::EncodedSequence>& split) {
    arch.validate();
    if (split.empty()) throw std::runtime_error("evaluate: empty split");

    EvalReport report;
    report.arch_kind = model::arch_kind_name(arch.kind);
    for (const auto& seq : split) {
        bool any_valid = false;
        for (const auto& step : seq.steps) {
            if (step.valid) {
                any_valid = true;
                break;
            }
        }
        if (!any_valid) continue;  // nothing scoreable in this admission
        const auto fwd =
            model::forward_sequence(seq, params, arch, model::RunMode::eval, 1.0, nullptr);
        for (std::size_t k = 0; k < seq.steps.size(); ++k) {
            if (!seq.steps[k].valid) continue;
            report.scored.scores.push_back(fwd.steps[k].event_prob);
            report.scored.labels.push_back(seq.steps[k].label);
        }
    }
    if (report.scored.scores.empty()) {
        throw std::runtime_error("evaluate: split has no valid steps");
    }

    std::size_t positives = 0;
    for (const int label : report.scored.labels) positives += label == 1 ? 1 : 0;
    report.test_prior =
        static_cast<double>(positives) / static_cast<double>(report.scored.labels.size());

    try {
        report.test_auroc = metrics::auroc(report.scored);
    } catch (const std::exception& e) {
        report.test_auroc = kNaN;
        report.auroc_note = e.what();
    }
    try {
        report.test_auprc = metrics::auprc(report.scored);
    } catch (const std::exception& e) {
        report.test_auprc = kNaN;
        report.auprc_note = e.what();
    }
    return report;
}

// ---------------------------------------------------------------------------
// Run history persistence
// ---------------------------------------------------------------------------

void save_run_history(const RunHistory& history, const std::string& path) {
    nlohmann::json j;
    j["best_epoch"] = history.best_epoch;
    j["stop_reason"] = history.stop_reason;
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& record : history.epochs) {
        nlohmann::json e;
        e["epoch"] = record.epoch;
        e["train_loss"] = record.train_loss;
        e["valid_loss"] = record.valid_loss;
        e["valid_auroc"] = number_or_null(record.valid_auroc);
        epochs.push_back(std::move(e));
    }
    j["epochs"] = std::move(epochs);
    dump_json(j, path);
}

RunHistory load_run_history(const std::string& path) {
    const auto j = parse_json(path);
    RunHistory history;
    history.best_epoch = j.at("best_epoch").get<int>();
    history.stop_reason = j.at("stop_reason").get<std::string>();
    for (const auto& e : j.at("epochs")) {
        EpochRecord record;
        record.epoch = e.at("epoch").get<int>();
        record.train_loss = e.at("train_loss").get<double>();
        record.valid_loss = e.at("valid_loss").get<double>();
        record.valid_auroc = number_from(e.at("valid_auroc"));
        history.epochs.push_back(record);
    }
    return history;
}

// ---------------------------------------------------------------------------
// Eval report persistence
// ---------------------------------------------------------------------------

void save_eval_report(const EvalReport& report, const std::string& report_path,
                      const std::string& scores_path) {
    nlohmann::json j;
    j["model_name"] = report.model_name;
    j["arch_kind"] = report.arch_kind;
    j["event_weight"] = report.event_weight;
    j["seed"] = report.seed;
    j["cohort_id"] = report.cohort_id;
    j["reduction"] = report.reduction;
    j["fraction"] = report.fraction;
    j["iteration"] = report.iteration;
    j["n_scores"] = report.scored.scores.size();
    j["test_prior"] = report.test_prior;
    j["test_auroc"] = number_or_null(report.test_auroc);
    j["test_auprc"] = number_or_null(report.test_auprc);
    j["auroc_note"] = report.auroc_note;
    j["auprc_note"] = report.auprc_note;
    dump_json(j, report_path);

    std::ofstream out(scores_path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + scores_path);
    out << "score,label\n";
    char line[64];
    for (std::size_t i = 0; i < report.scored.scores.size(); ++i) {
        std::snprintf(line, sizeof(line), "%.17g,%d\n", report.scored.scores[i],
                      report.scored.labels[i]);
        out << line;
    }
    if (!out) throw std::runtime_error("write failed for " + scores_path);
}

EvalReport load_eval_report(const std::string& report_path, const std::string& scores_path) {
    const auto j = parse_json(report_path);
    EvalReport report;
    report.model_name = j.at("model_name").get<std::string>();
    report.arch_kind = j.at("arch_kind").get<std::string>();
    report.event_weight = j.at("event_weight").get<double>();
    report.seed = j.at("seed").get<std::uint64_t>();
    report.cohort_id = j.at("cohort_id").get<std::string>();
    report.reduction = j.at("reduction").get<std::string>();
    report.fraction = j.at("fraction").get<double>();
    report.iteration = j.at("iteration").get<std::uint64_t>();
    report.test_prior = j.at("test_prior").get<double>();
    report.test_auroc = number_from(j.at("test_auroc"));
    report.test_auprc = number_from(j.at("test_auprc"));
    report.auroc_note = j.at("auroc_note").get<std::string>();
    report.auprc_note = j.at("auprc_note").get<std::string>();

    std::ifstream in(scores_path);
    if (!in) throw std::runtime_error("cannot open " + scores_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1) {
            if (line != "score,label") {
                throw std::runtime_error(scores_path + ": expected 'score,label' header");
            }
            continue;
        }
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error(scores_path + " line " + std::to_string(lineno) +
                                     ": expected score,label");
        }
        report.scored.scores.push_back(std::strtod(line.c_str(), nullptr));
        report.scored.labels.push_back(std::stoi(line.substr(comma + 1)));
    }
    const auto expected = j.at("n_scores").get<std::size_t>();
    if (report.scored.scores.size() != expected) {
        throw std::runtime_error(scores_path + ": expected " + std::to_string(expected) +
                                 " scores, found " +
                                 std::to_string(report.scored.scores.size()));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Study summary CSV
// ---------------------------------------------------------------------------

void write_study_csv(const std::vector<StudyCell>& cells, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "model,reduction,fraction,iteration,seed,test_auroc,test_auprc,test_prior,"
           "n_scores\n";
    char line[256];
    for (const auto& cell : cells) {
        std::snprintf(line, sizeof(line), "%s,%s,%.17g,%llu,%llu,%.17g,%.17g,%.17g,%zu\n",
                      cell.model_name.c_str(), cell.report.reduction.c_str(), cell.fraction,
                      static_cast<unsigned long long>(cell.iteration),
                      static_cast<unsigned long long>(cell.report.seed),
                      cell.report.test_auroc, cell.report.test_auprc,
                      cell.report.test_prior, cell.report.scored.scores.size());
        out << line;
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace rarecast::experiment
