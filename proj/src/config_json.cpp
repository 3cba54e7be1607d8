#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include "rarecast/config_json.hpp"

namespace rarecast::config {
namespace {

void require_known_keys(const nlohmann::json& j, const char* context,
                        std::initializer_list<const char*> known) {
    if (!j.is_object()) {
        throw std::runtime_error(std::string(context) + ": expected a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known) {
            if (key == k) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw std::runtime_error(std::string(context) + ": unknown field '" + key + "'");
        }
    }
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

// ---------------------------------------------------------------------------
// Observation specs
// ---------------------------------------------------------------------------

nlohmann::json to_json(const data::ObservationSpec& spec) {
    nlohmann::json j;
    j["id"] = spec.id;
    j["class_count"] = spec.class_count;
    j["lo"] = spec.lo;
    j["hi"] = spec.hi;
    return j;
}

data::ObservationSpec observation_spec_from_json(const nlohmann::json& j) {
    require_known_keys(j, "observation spec", {"id", "class_count", "lo", "hi"});
    data::ObservationSpec spec;
    maybe(j, "id", spec.id);
    maybe(j, "class_count", spec.class_count);
    maybe(j, "lo", spec.lo);
    maybe(j, "hi", spec.hi);
    return spec;
}

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

nlohmann::json to_json(const data::SyntheticConfig& cfg) {
    nlohmann::json j;
    j["n_obs"] = cfg.n_obs;
    j["obs_classes"] = cfg.obs_classes;
    j["train_admissions"] = cfg.train_admissions;
    j["valid_admissions"] = cfg.valid_admissions;
    j["test_admissions"] = cfg.test_admissions;
    j["min_steps"] = cfg.min_steps;
    j["max_steps"] = cfg.max_steps;
    j["interval_hours"] = cfg.interval_hours;
    j["horizon_hours"] = cfg.horizon_hours;
    j["holdout_hours"] = cfg.holdout_hours;
    j["rho"] = cfg.rho;
    j["latent_noise"] = cfg.latent_noise;
    j["signal"] = cfg.signal;
    j["obs_noise"] = cfg.obs_noise;
    j["obs_density"] = cfg.obs_density;
    j["nuisance_factors"] = cfg.nuisance_factors;
    j["nuisance_mix"] = cfg.nuisance_mix;
    j["hazard_scale"] = cfg.hazard_scale;
    j["hazard_gain"] = cfg.hazard_gain;
    j["hazard_loc"] = cfg.hazard_loc;
    j["prior_target"] = cfg.prior_target;
    j["prior_band"] = cfg.prior_band;
    j["seed"] = cfg.seed;
    return j;
}

data::SyntheticConfig synthetic_config_from_json(const nlohmann::json& j) {
    require_known_keys(
        j, "synthetic config",
        {"n_obs", "obs_classes", "train_admissions", "valid_admissions", "test_admissions",
         "min_steps", "max_steps", "interval_hours", "horizon_hours", "holdout_hours", "rho",
         "latent_noise", "signal", "obs_noise", "obs_density", "nuisance_factors",
         "nuisance_mix", "hazard_scale", "hazard_gain", "hazard_loc", "prior_target",
         "prior_band", "seed"});
    data::SyntheticConfig cfg;
    maybe(j, "n_obs", cfg.n_obs);
    maybe(j, "obs_classes", cfg.obs_classes);
    maybe(j, "train_admissions", cfg.train_admissions);
    maybe(j, "valid_admissions", cfg.valid_admissions);
    maybe(j, "test_admissions", cfg.test_admissions);
    maybe(j, "min_steps", cfg.min_steps);
    maybe(j, "max_steps", cfg.max_steps);
    maybe(j, "interval_hours", cfg.interval_hours);
    maybe(j, "horizon_hours", cfg.horizon_hours);
    maybe(j, "holdout_hours", cfg.holdout_hours);
    maybe(j, "rho", cfg.rho);
    maybe(j, "latent_noise", cfg.latent_noise);
    maybe(j, "signal", cfg.signal);
    maybe(j, "obs_noise", cfg.obs_noise);
    maybe(j, "obs_density", cfg.obs_density);
    maybe(j, "nuisance_factors", cfg.nuisance_factors);
    maybe(j, "nuisance_mix", cfg.nuisance_mix);
    maybe(j, "hazard_scale", cfg.hazard_scale);
    maybe(j, "hazard_gain", cfg.hazard_gain);
    maybe(j, "hazard_loc", cfg.hazard_loc);
    maybe(j, "prior_target", cfg.prior_target);
    maybe(j, "prior_band", cfg.prior_band);
    maybe(j, "seed", cfg.seed);
    return cfg;
}

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

nlohmann::json to_json(const data::CsvCohortConfig& cfg) {
    nlohmann::json j;
    nlohmann::json specs = nlohmann::json::array();
    for (const auto& spec : cfg.specs) specs.push_back(to_json(spec));
    j["specs"] = std::move(specs);
    j["interval_hours"] = cfg.interval_hours;
    j["horizon_hours"] = cfg.horizon_hours;
    j["holdout_hours"] = cfg.holdout_hours;
    return j;
}

data::CsvCohortConfig csv_config_from_json(const nlohmann::json& j) {
    require_known_keys(j, "csv config",
                       {"specs", "interval_hours", "horizon_hours", "holdout_hours"});
    data::CsvCohortConfig cfg;
    if (j.contains("specs")) {
        for (const auto& s : j.at("specs")) {
            cfg.specs.push_back(observation_spec_from_json(s));
        }
    }
    maybe(j, "interval_hours", cfg.interval_hours);
    maybe(j, "horizon_hours", cfg.horizon_hours);
    maybe(j, "holdout_hours", cfg.holdout_hours);
    return cfg;
}

// ---------------------------------------------------------------------------
// Model architecture
// ---------------------------------------------------------------------------

nlohmann::json to_json(const model::ModelConfig& cfg) {
    nlohmann::json j;
    j["kind"] = model::arch_kind_name(cfg.kind);
    j["d_in"] = cfg.d_in;
    j["hidden"] = cfg.hidden;
    j["embed"] = cfg.embed;
    j["branch_width"] = cfg.branch_width;
    j["dropout_embed"] = cfg.dropout_embed;
    j["dropout_branch"] = cfg.dropout_branch;
    j["forecast_mode"] = model::forecast_mode_name(cfg.forecast_mode);
    nlohmann::json tasks;
    tasks["task_ids"] = cfg.tasks.task_ids;
    tasks["class_counts"] = cfg.tasks.class_counts;
    j["tasks"] = std::move(tasks);
    return j;
}

model::ModelConfig model_config_from_json(const nlohmann::json& j) {
    require_known_keys(j, "model config",
                       {"kind", "d_in", "hidden", "embed", "branch_width", "dropout_embed",
                        "dropout_branch", "forecast_mode", "tasks"});
    model::ModelConfig cfg;
    if (j.contains("kind")) cfg.kind = model::arch_kind_from_name(j.at("kind"));
    maybe(j, "d_in", cfg.d_in);
    maybe(j, "hidden", cfg.hidden);
    maybe(j, "embed", cfg.embed);
    maybe(j, "branch_width", cfg.branch_width);
    maybe(j, "dropout_embed", cfg.dropout_embed);
    maybe(j, "dropout_branch", cfg.dropout_branch);
    if (j.contains("forecast_mode")) {
        cfg.forecast_mode = model::forecast_mode_from_name(j.at("forecast_mode"));
    }
    if (j.contains("tasks")) {
        const auto& tasks = j.at("tasks");
        require_known_keys(tasks, "model config tasks", {"task_ids", "class_counts"});
        maybe(tasks, "task_ids", cfg.tasks.task_ids);
        maybe(tasks, "class_counts", cfg.tasks.class_counts);
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Optimizer and training
// ---------------------------------------------------------------------------

nlohmann::json to_json(const optim::OptimConfig& cfg) {
    nlohmann::json j;
    j["lr"] = cfg.lr;
    j["beta1"] = cfg.beta1;
    j["beta2"] = cfg.beta2;
    j["eps"] = cfg.eps;
    j["weight_decay"] = cfg.weight_decay;
    j["exempt_biases"] = cfg.exempt_biases;
    j["decay_exempt"] = cfg.decay_exempt;
    return j;
}

optim::OptimConfig optim_config_from_json(const nlohmann::json& j) {
    require_known_keys(j, "optimizer config",
                       {"lr", "beta1", "beta2", "eps", "weight_decay", "exempt_biases",
                        "decay_exempt"});
    optim::OptimConfig cfg;
    maybe(j, "lr", cfg.lr);
    maybe(j, "beta1", cfg.beta1);
    maybe(j, "beta2", cfg.beta2);
    maybe(j, "eps", cfg.eps);
    maybe(j, "weight_decay", cfg.weight_decay);
    maybe(j, "exempt_biases", cfg.exempt_biases);
    maybe(j, "decay_exempt", cfg.decay_exempt);
    return cfg;
}

nlohmann::json to_json(const experiment::TrainConfig& cfg) {
    nlohmann::json j;
    j["batch_size"] = cfg.batch_size;
    j["max_epochs"] = cfg.max_epochs;
    j["patience"] = cfg.patience;
    j["stop_metric"] = experiment::stop_metric_name(cfg.stop_metric);
    j["loss_tolerance"] = cfg.loss_tolerance;
    j["event_weight"] = cfg.event_weight;
    j["optimizer"] = to_json(cfg.optimizer);
    j["seed"] = cfg.seed;
    return j;
}

experiment::TrainConfig train_config_from_json(const nlohmann::json& j) {
    require_known_keys(j, "train config",
                       {"batch_size", "max_epochs", "patience", "stop_metric",
                        "loss_tolerance", "event_weight", "optimizer", "seed"});
    experiment::TrainConfig cfg;
    maybe(j, "batch_size", cfg.batch_size);
    maybe(j, "max_epochs", cfg.max_epochs);
    maybe(j, "patience", cfg.patience);
    if (j.contains("stop_metric")) {
        cfg.stop_metric = experiment::stop_metric_from_name(j.at("stop_metric"));
    }
    maybe(j, "loss_tolerance", cfg.loss_tolerance);
    maybe(j, "event_weight", cfg.event_weight);
    if (j.contains("optimizer")) cfg.optimizer = optim_config_from_json(j.at("optimizer"));
    maybe(j, "seed", cfg.seed);
    return cfg;
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

}  // namespace rarecast::config
