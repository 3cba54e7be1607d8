#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rarecast/sequence.hpp"

namespace rarecast::data {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// One tracked clinical observation (lab or vital sign) with its normal
/// range. Values are encoded one-hot as normal/abnormal (2 classes) or
/// normal/abnormal-low/abnormal-high (3 classes).
struct ObservationSpec {
    std::string id;
    int class_count = 3;  // 2 or 3
    double lo = 0.0;      // normal range lower bound
    double hi = 0.0;      // normal range upper bound

    void validate() const;
};

/// A raw measurement: which observation, when (hours from admission), value.
struct RawEvent {
    std::string observation_id;
    double time = 0.0;
    double value = 0.0;
};

/// Per-split label bookkeeping over valid steps only.
struct SplitStats {
    std::size_t admissions = 0;
    std::size_t positive_steps = 0;
    std::size_t negative_steps = 0;
    double prior = 0.0;  // positive / (positive + negative); 0 when empty
};

/// Encoded train/valid/test splits plus the shared forecast-task layout.
struct Cohort {
    TaskLayout tasks;
    std::vector<EncodedSequence> train;
    std::vector<EncodedSequence> valid;
    std::vector<EncodedSequence> test;
    SplitStats train_stats;
    SplitStats valid_stats;
    SplitStats test_stats;

    /// Recompute all three stats blocks from the sequences.
    void refresh_stats();
};

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

/// Class index for a value under a spec: 0 = normal; 2-class: 1 = abnormal;
/// 3-class: 1 = abnormal-low (value < lo), 2 = abnormal-high (value > hi).
/// Missing (nullopt or NaN) has no class; callers decide the fallback.
std::optional<int> observation_class(std::optional<double> value,
                                     const ObservationSpec& spec);

/// One-hot sub-vector of length spec.class_count; all-zero when the value is
/// missing or NaN.
std::vector<double> encode_observation(std::optional<double> value,
                                       const ObservationSpec& spec);

/// Task layout induced by a spec set: one forecast task per observation, in
/// spec order.
TaskLayout layout_from_specs(const std::vector<ObservationSpec>& specs);

/// Build step inputs and forecast targets by last-value-carry-forward.
///
/// Input at time t encodes, per observation, the latest event with
/// event-time <= t (all-zero sub-vector when none exists yet). The forecast
/// target for the step at t is the class of the latest event with
/// event-time <= t + horizon, imputing the normal class when no event
/// exists. NaN-valued events are treated as missing and never carried
/// forward. Labels are left 0 and every step valid; callers attach label
/// and mask semantics afterwards.
///
/// Throws on unknown observation ids, on events out of time order within an
/// observation, and on non-increasing prediction times.
EncodedSequence lvcf_sequence(const std::vector<RawEvent>& events,
                              const std::vector<ObservationSpec>& specs,
                              const std::vector<double>& prediction_times,
                              double horizon_hours);

/// Set step labels: y_t = 1 iff some event time lies in (t, t + horizon].
void apply_event_labels(EncodedSequence& seq,
                        const std::vector<double>& event_times,
                        double horizon_hours);

/// Invalidate steps whose time lies in (event, event + holdout] for any
/// event. holdout = 0 or no events leaves the sequence unchanged.
void apply_holdout_mask(EncodedSequence& seq,
                        const std::vector<double>& event_times,
                        double holdout_hours);

/// Count valid positive/negative steps over a split.
SplitStats compute_stats(const std::vector<EncodedSequence>& split);

/// Fixed-width text block with one row per split: Adms, #Pos, #Neg, Prior.
std::string format_stats_table(const Cohort& cohort);

// ---------------------------------------------------------------------------
// Synthetic cohort generation
// ---------------------------------------------------------------------------

/// Synthetic generator controls. Per admission, a latent severity follows
/// the AR(1) process s_t = rho * s_{t-1} + noise; the event fires at each
/// step with probability hazard_scale * sigmoid(hazard_gain *
/// (s_t - hazard_loc)). Observations are noisy reads of a per-channel
/// latent mix z_o = (1 - nuisance_mix) * s + nuisance_mix * u_{o mod M},
/// where the u_m are independent nuisance AR(1) chains with the same
/// dynamics: the event depends on severity alone, but every channel is
/// contaminated by structured nuisance, so recovering severity from
/// observations is a genuine representation-learning problem. Values are
/// +/- signal * z_o plus noise against a fixed normal range, present with
/// probability obs_density. Defaults are calibrated so the realized train
/// prior lands near prior_target.
struct SyntheticConfig {
    int n_obs = 20;
    int obs_classes = 3;
    std::size_t train_admissions = 2000;
    std::size_t valid_admissions = 800;
    std::size_t test_admissions = 2000;
    int min_steps = 10;
    int max_steps = 30;
    double interval_hours = 1.0;  // separation between prediction times
    double horizon_hours = 3.0;   // event label + forecast target horizon
    double holdout_hours = 2.0;   // post-event blackout
    double rho = 0.9;             // latent persistence, in [0, 1)
    double latent_noise = 0.3;    // latent innovation scale
    double signal = 1.0;          // latent -> observation link strength
    double obs_noise = 0.3;       // observation noise scale
    double obs_density = 0.7;     // P(observation measured at a step)
    int nuisance_factors = 2;     // extra latent chains mixed into channels
    double nuisance_mix = 0.6;    // contamination weight, in [0, 1]
    double hazard_scale = 0.042;  // peak per-step event probability
    double hazard_gain = 4.0;
    double hazard_loc = 1.2;
    double prior_target = 0.0084;  // reporting band centre
    double prior_band = 0.30;      // relative half-width of the band
    std::uint64_t seed = 1;

    void validate() const;
    int horizon_steps() const;  // horizon as a whole number of intervals

    /// Observation specs this config induces: ids "obs00".., normal range
    /// [-1, 1], class_count = obs_classes.
    std::vector<ObservationSpec> specs() const;
};

/// Ground truth the generator saw, for oracle checks: the latent
/// trajectory (index k holds s at time k * interval, k = 0..T+horizon
/// steps) and event times per admission.
struct AdmissionTruth {
    std::string admission_id;
    std::vector<double> latent;
    std::vector<double> event_times;
};

struct SyntheticTruth {
    std::vector<AdmissionTruth> train;
    std::vector<AdmissionTruth> valid;
    std::vector<AdmissionTruth> test;
};

/// Generate a cohort from the config. Deterministic in cfg.seed (same seed,
/// bit-identical cohort); admissions use independent derived streams.
/// Throws when the realized train split has zero positive steps, reporting
/// the realized prior. When `truth` is non-null the generator records the
/// latent trajectories and event times it sampled.
Cohort generate_synthetic_cohort(const SyntheticConfig& cfg,
                                 SyntheticTruth* truth = nullptr);

// ---------------------------------------------------------------------------
// Reduction studies
// ---------------------------------------------------------------------------

/// Down-sample positive admissions in train and valid so that
/// round(fraction * n) of them keep their positive steps; the rest stay in
/// the cohort with their positive steps masked invalid (never relabeled as
/// negatives). Test is untouched. Selection draws a per-(seed, iteration,
/// split) permutation and keeps a prefix, so smaller fractions retain
/// subsets of larger ones. fraction = 1 returns the cohort unchanged.
/// Throws when the retained positive count would be zero.
Cohort reduce_prior(const Cohort& cohort, double fraction, std::uint64_t seed,
                    std::uint64_t iteration);

/// Down-sample train and valid admissions uniformly (label-blind) to
/// round(fraction * n) kept admissions, removed entirely; test untouched.
/// Same nested-prefix determinism as reduce_prior. Throws when a reduced
/// split would keep zero admissions or zero positive steps.
Cohort reduce_samples(const Cohort& cohort, double fraction,
                      std::uint64_t seed, std::uint64_t iteration);

// ---------------------------------------------------------------------------
// CSV ingestion and cohort archives
// ---------------------------------------------------------------------------

/// Encoding parameters for CSV ingestion.
struct CsvCohortConfig {
    std::vector<ObservationSpec> specs;
    double interval_hours = 1.0;
    double horizon_hours = 3.0;
    double holdout_hours = 2.0;

    void validate() const;
};

/// Load a cohort from a directory holding, per split s in {train, valid,
/// test}, `s_events.csv` (admission_id,observation_id,time_hours,value) and
/// `s_labels.csv` (admission_id,event_time_hours). Prediction times run
/// interval, 2*interval, ... up to the admission's last event time.
/// Malformed rows are rejected with file and line number; admission ids
/// appearing in two splits are rejected.
Cohort load_cohort_csv(const std::string& dir, const CsvCohortConfig& cfg);

/// Persist / restore an encoded cohort as a directory: meta.json (task
/// layout), one binary file per split, stats.txt (the Table-style summary).
/// Round-trips bit-exactly.
void save_cohort_archive(const Cohort& cohort, const std::string& dir);
Cohort load_cohort_archive(const std::string& dir);

}  // namespace rarecast::data
