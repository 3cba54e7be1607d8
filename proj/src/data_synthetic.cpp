#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "rarecast/data.hpp"
#include "rarecast/rng.hpp"

namespace rarecast::data {
namespace {

constexpr const char* kSplitNames[3] = {"train", "valid", "test"};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void SyntheticConfig::validate() const {
    if (n_obs < 1) throw std::runtime_error("synthetic config: n_obs must be >= 1");
    if (obs_classes != 2 && obs_classes != 3) {
        throw std::runtime_error("synthetic config: obs_classes must be 2 or 3");
    }
    if (train_admissions == 0 || valid_admissions == 0 || test_admissions == 0) {
        throw std::runtime_error("synthetic config: every split needs >= 1 admission");
    }
    if (min_steps < 1 || max_steps < min_steps) {
        throw std::runtime_error("synthetic config: need 1 <= min_steps <= max_steps");
    }
    if (!(interval_hours > 0.0)) {
        throw std::runtime_error("synthetic config: interval must be > 0");
    }
    if (horizon_hours < 0.0 || holdout_hours < 0.0) {
        throw std::runtime_error("synthetic config: horizon and holdout must be >= 0");
    }
    const double steps = horizon_hours / interval_hours;
    if (std::fabs(steps - std::round(steps)) > 1e-9) {
        throw std::runtime_error(
            "synthetic config: horizon must be a whole number of intervals");
    }
    if (!(rho >= 0.0 && rho < 1.0)) {
        throw std::runtime_error("synthetic config: rho must lie in [0, 1)");
    }
    if (latent_noise < 0.0 || signal < 0.0 || obs_noise < 0.0) {
        throw std::runtime_error("synthetic config: noise and signal scales must be >= 0");
    }
    if (!(obs_density >= 0.0 && obs_density <= 1.0)) {
        throw std::runtime_error("synthetic config: obs_density must lie in [0, 1]");
    }
    if (nuisance_factors < 0) {
        throw std::runtime_error("synthetic config: nuisance_factors must be >= 0");
    }
    if (!(nuisance_mix >= 0.0 && nuisance_mix <= 1.0)) {
        throw std::runtime_error("synthetic config: nuisance_mix must lie in [0, 1]");
    }
    if (nuisance_mix > 0.0 && nuisance_factors == 0) {
        throw std::runtime_error(
            "synthetic config: nuisance_mix > 0 requires nuisance_factors >= 1");
    }
    if (!(hazard_scale > 0.0 && hazard_scale <= 1.0)) {
        throw std::runtime_error("synthetic config: hazard_scale must lie in (0, 1]");
    }
    if (!(prior_target > 0.0 && prior_target < 1.0) || !(prior_band > 0.0)) {
        throw std::runtime_error("synthetic config: prior target/band out of range");
    }
}

int SyntheticConfig::horizon_steps() const {
    return static_cast<int>(std::llround(horizon_hours / interval_hours));
}

std::vector<ObservationSpec> SyntheticConfig::specs() const {
    std::vector<ObservationSpec> out;
    out.reserve(static_cast<std::size_t>(n_obs));
    for (int o = 0; o < n_obs; ++o) {
        char id[16];
        std::snprintf(id, sizeof(id), "obs%02d", o);
        out.push_back(ObservationSpec{id, obs_classes, -1.0, 1.0});
    }
    return out;
}

namespace {

/// One admission: latent AR(1) walk, hazard-driven events, noisy
/// observations, then the shared encode/label/mask pipeline.
EncodedSequence generate_admission(const SyntheticConfig& cfg,
                                   const std::vector<ObservationSpec>& specs,
                                   num::RngStream stream, std::string admission_id,
                                   AdmissionTruth* truth) {
    const int H = cfg.horizon_steps();
    const int T = cfg.min_steps +
                  static_cast<int>(stream.index(
                      static_cast<std::uint64_t>(cfg.max_steps - cfg.min_steps + 1)));

    // Latent severity at times 0, interval, ..., (T+H)*interval; stationary
    // start so early steps are not systematically calmer.
    std::vector<double> s(static_cast<std::size_t>(T + H) + 1);
    const double stationary_sd =
        cfg.rho > 0.0 ? cfg.latent_noise / std::sqrt(1.0 - cfg.rho * cfg.rho)
                      : cfg.latent_noise;
    s[0] = stationary_sd * stream.normal();
    for (int k = 1; k <= T + H; ++k) {
        s[static_cast<std::size_t>(k)] =
            cfg.rho * s[static_cast<std::size_t>(k - 1)] + cfg.latent_noise * stream.normal();
    }

    // Event process: at each step the event fires with a hazard that grows
    // with severity. Simulated through T+H so end-of-stay labels see the
    // same process as the rest.
    std::vector<double> event_times;
    for (int k = 1; k <= T + H; ++k) {
        const double hazard =
            cfg.hazard_scale *
            sigmoid(cfg.hazard_gain * (s[static_cast<std::size_t>(k)] - cfg.hazard_loc));
        if (stream.below(hazard)) event_times.push_back(k * cfg.interval_hours);
    }

    // Nuisance chains: independent AR(1) processes with the severity's
    // dynamics, mixed into observation channels but invisible to the
    // hazard. Drawn after the event process so the severity/event stream
    // stays identical whether or not nuisance is enabled.
    std::vector<std::vector<double>> u(static_cast<std::size_t>(cfg.nuisance_factors));
    for (auto& chain : u) {
        chain.resize(static_cast<std::size_t>(T + H) + 1);
        chain[0] = stationary_sd * stream.normal();
        for (int k = 1; k <= T + H; ++k) {
            chain[static_cast<std::size_t>(k)] =
                cfg.rho * chain[static_cast<std::size_t>(k - 1)] +
                cfg.latent_noise * stream.normal();
        }
    }

    // Observations: each channel reads +/- signal * z plus noise, present
    // with obs_density, where z mixes severity with the channel's nuisance
    // factor. Generated through T+H so forecast targets at the final steps
    // have real measurements to look at.
    std::vector<RawEvent> raw;
    raw.reserve(static_cast<std::size_t>((T + H) * cfg.n_obs));
    for (int k = 1; k <= T + H; ++k) {
        for (int o = 0; o < cfg.n_obs; ++o) {
            if (!stream.below(cfg.obs_density)) continue;
            const double direction = (o % 2 == 0) ? 1.0 : -1.0;
            const double severity = s[static_cast<std::size_t>(k)];
            const double z =
                cfg.nuisance_factors > 0
                    ? (1.0 - cfg.nuisance_mix) * severity +
                          cfg.nuisance_mix *
                              u[static_cast<std::size_t>(o % cfg.nuisance_factors)]
                               [static_cast<std::size_t>(k)]
                    : severity;
            const double value =
                direction * cfg.signal * z + cfg.obs_noise * stream.normal();
            raw.push_back(RawEvent{specs[static_cast<std::size_t>(o)].id,
                                   k * cfg.interval_hours, value});
        }
    }

    std::vector<double> times(static_cast<std::size_t>(T));
    for (int k = 1; k <= T; ++k) {
        times[static_cast<std::size_t>(k - 1)] = k * cfg.interval_hours;
    }

    EncodedSequence seq = lvcf_sequence(raw, specs, times, cfg.horizon_hours);
    seq.admission_id = std::move(admission_id);
    apply_event_labels(seq, event_times, cfg.horizon_hours);
    apply_holdout_mask(seq, event_times, cfg.holdout_hours);

    if (truth) {
        truth->admission_id = seq.admission_id;
        truth->latent = std::move(s);
        truth->event_times = std::move(event_times);
    }
    return seq;
}

}  // namespace

Cohort generate_synthetic_cohort(const SyntheticConfig& cfg, SyntheticTruth* truth) {
    cfg.validate();
    const auto specs = cfg.specs();
    const num::RngStream root = num::RngStream(cfg.seed).split("synthetic");

    Cohort cohort;
    cohort.tasks = layout_from_specs(specs);

    const std::size_t counts[3] = {cfg.train_admissions, cfg.valid_admissions,
                                   cfg.test_admissions};
    std::vector<EncodedSequence>* splits[3] = {&cohort.train, &cohort.valid, &cohort.test};
    std::vector<AdmissionTruth>* truth_splits[3] = {
        truth ? &truth->train : nullptr, truth ? &truth->valid : nullptr,
        truth ? &truth->test : nullptr};

    for (int sp = 0; sp < 3; ++sp) {
        const num::RngStream split_root = root.split(kSplitNames[sp]);
        splits[sp]->reserve(counts[sp]);
        if (truth_splits[sp]) truth_splits[sp]->reserve(counts[sp]);
        for (std::size_t i = 0; i < counts[sp]; ++i) {
            char id[32];
            std::snprintf(id, sizeof(id), "%s-%05zu", kSplitNames[sp], i);
            AdmissionTruth adm_truth;
            splits[sp]->push_back(generate_admission(
                cfg, specs, split_root.split(static_cast<std::uint64_t>(i)), id,
                truth_splits[sp] ? &adm_truth : nullptr));
            if (truth_splits[sp]) truth_splits[sp]->push_back(std::move(adm_truth));
        }
    }

    cohort.refresh_stats();
    if (cohort.train_stats.positive_steps == 0) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "synthetic cohort rejected: zero positive train steps "
                      "(realized train prior %.6f); raise hazard_scale",
                      cohort.train_stats.prior);
        throw std::runtime_error(msg);
    }
    return cohort;
}

}  // namespace rarecast::data
