#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rarecast/data.hpp"
#include "rarecast/metrics.hpp"
#include "rarecast/model.hpp"
#include "rarecast/optim.hpp"

namespace rarecast::experiment {

// ---------------------------------------------------------------------------
// Training configuration and run records
// ---------------------------------------------------------------------------

/// What decides improvement between epochs: validation AUROC (supervised
/// phases) or validation-loss tolerance (forecast pretraining).
enum class StopMetric { valid_auroc, valid_loss_tolerance };

const char* stop_metric_name(StopMetric metric);
StopMetric stop_metric_from_name(const std::string& name);

struct TrainConfig {
    std::size_t batch_size = 32;   // sequences per optimizer step
    int max_epochs = 100;
    int patience = 5;              // epochs without improvement before stopping
    StopMetric stop_metric = StopMetric::valid_auroc;
    double loss_tolerance = 1e-4;  // minimum improvement under loss stopping
    double event_weight = 1.0;     // loss mixing p
    optim::OptimConfig optimizer;
    std::uint64_t seed = 1;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;            // 1-based
    double train_loss = 0.0;  // mean sequence loss seen during the epoch
    double valid_loss = 0.0;  // mean sequence loss on the validation split
    double valid_auroc = 0.0; // NaN when the split is single-class
};

struct RunHistory {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;          // 1-based; the returned parameters' epoch
    std::string stop_reason;     // "early_stop" or "max_epochs"
};

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

/// Mini-batch AdamW over `params`, leaving the best epoch's parameters in
/// place on return. Blocks named in `frozen` are excluded from optimizer
/// updates (no gradient step, no decay) and come back bit-identical.
/// Deterministic in (configs, seed): epoch shuffles and dropout draws use
/// streams derived from cfg.seed only.
RunHistory train_in_place(model::ParamSet& params, const model::ModelConfig& arch,
                          const std::vector<data::EncodedSequence>& train_split,
                          const std::vector<data::EncodedSequence>& valid_split,
                          const TrainConfig& cfg,
                          const std::vector<std::string>& frozen = {});

/// Fresh-initialization convenience: builds the architecture from
/// cfg.seed's init stream, then runs train_in_place with nothing frozen.
std::pair<model::ParamSet, RunHistory> train(const model::ModelConfig& arch,
                                             const data::Cohort& cohort,
                                             const TrainConfig& cfg);

/// Two-phase training for the embedding and residual baselines.
///
/// Phase 1 trains the forecast objective (event weight 0, event head
/// frozen, validation-loss-tolerance stopping) on an embedding-kind network.
/// Phase 2 trains the event objective (event weight 1, AUROC stopping):
/// for kind=embedding only the event head unfreezes; for kind=residual the
/// trained phase-1 blocks seed a residual network whose event head,
/// residual path, and embedding train while the LSTM and forecast head
/// stay frozen. `phase1_cohort` overrides the data phase 1 sees (the
/// sample-reduction study trains phase 1 on unreduced data).
struct TwoPhaseResult {
    model::ParamSet params;
    RunHistory phase1;
    RunHistory phase2;
};

TwoPhaseResult train_two_phase(const model::ModelConfig& arch, const data::Cohort& cohort,
                               const TrainConfig& phase1_cfg, const TrainConfig& phase2_cfg,
                               const data::Cohort* phase1_cohort = nullptr);

// ---------------------------------------------------------------------------
// Loss-weight sweep
// ---------------------------------------------------------------------------

struct SweepEntry {
    double event_weight = 0.0;
    double valid_auroc = 0.0;  // best epoch's validation AUROC
    RunHistory history;
};

struct SweepResult {
    std::vector<SweepEntry> entries;     // grid order
    std::size_t best_index = 0;
    double best_event_weight = 0.0;
    model::ParamSet best_params;
};

/// Index of the winning entry: highest validation AUROC, ties broken toward
/// the larger event weight (the more target-driven model).
std::size_t select_best_entry(const std::vector<SweepEntry>& entries);

/// One full training run per grid value, shared seed, then argmax selection.
SweepResult sweep_loss_weight(const model::ModelConfig& arch, const data::Cohort& cohort,
                              const std::vector<double>& grid, const TrainConfig& base);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct EvalReport {
    std::string model_name;
    std::string arch_kind;
    double event_weight = 1.0;
    std::uint64_t seed = 0;
    std::string cohort_id;
    std::string reduction = "none";  // none | prior | samples
    double fraction = 1.0;
    std::uint64_t iteration = 0;
    double test_prior = 0.0;
    double test_auroc = 0.0;   // NaN when omitted; see auroc_note
    double test_auprc = 0.0;   // NaN when omitted; see auprc_note
    std::string auroc_note;
    std::string auprc_note;
    metrics::ScoredPredictions scored;  // pooled valid-step scores + labels
};

/// Pooled per-step scores over valid steps of every sequence (sequences
/// with no valid step are skipped); AUROC/AUPRC where defined, with the
/// omission reason recorded otherwise. Provenance fields are left at their
/// defaults for the caller to fill.
EvalReport evaluate(const model::ParamSet& params, const model::ModelConfig& arch,
                    const std::vector<data::EncodedSequence>& split);

// ---------------------------------------------------------------------------
// Reduction studies
// ---------------------------------------------------------------------------

struct StudyModel {
    std::string name;
    model::ModelConfig arch;
    double event_weight = 1.0;  // ignored by two-phase kinds
};

struct StudyCell {
    std::string model_name;
    double fraction = 1.0;
    std::uint64_t iteration = 0;
    EvalReport report;
};

/// For each (fraction, iteration): derive the reduced cohort once, train
/// every model on it (per-iteration training seed = base.seed + iteration,
/// shared across models and fractions), evaluate on the untouched test
/// split. Two-phase kinds train phase 1 on the unreduced cohort in the
/// sample study only.
std::vector<StudyCell> run_prior_reduction_study(
    const std::vector<StudyModel>& models, const data::Cohort& cohort,
    const std::vector<double>& fractions, std::uint64_t iterations,
    const TrainConfig& base, std::uint64_t reduction_seed, const std::string& cohort_id);

/// One (fraction, iteration) slice of a study: derives the reduced cohort
/// once, then trains and evaluates every model on it. The full studies are
/// concatenations of these slices, so independent slices may run on
/// separate workers without changing any result.
std::vector<StudyCell> run_study_iteration(const std::vector<StudyModel>& models,
                                           const data::Cohort& cohort, double fraction,
                                           std::uint64_t iteration, const TrainConfig& base,
                                           std::uint64_t reduction_seed,
                                           const std::string& cohort_id, bool by_samples);

std::vector<StudyCell> run_sample_reduction_study(
    const std::vector<StudyModel>& models, const data::Cohort& cohort,
    const std::vector<double>& fractions, std::uint64_t iterations,
    const TrainConfig& base, std::uint64_t reduction_seed, const std::string& cohort_id);

// ---------------------------------------------------------------------------
// Persistence (deterministic: sorted keys, round-trip-exact numbers, no
// timestamps)
// ---------------------------------------------------------------------------

void save_run_history(const RunHistory& history, const std::string& path);
RunHistory load_run_history(const std::string& path);

/// report JSON + raw "score,label" CSV; metrics are recomputable from the
/// persisted scores.
void save_eval_report(const EvalReport& report, const std::string& report_path,
                      const std::string& scores_path);
EvalReport load_eval_report(const std::string& report_path, const std::string& scores_path);

/// One row per study cell keyed by (model, reduction, fraction, iteration).
void write_study_csv(const std::vector<StudyCell>& cells, const std::string& path);

/// Checkpoint container: magic, JSON header (block names/shapes, optimizer
/// presence, caller metadata), then raw little-endian doubles. Round-trips
/// parameters and optimizer state bit-exactly.
void save_checkpoint(const std::string& path, const model::ParamSet& params,
                     const optim::AdamWState* opt_state, const nlohmann::json& meta);

struct Checkpoint {
    model::ParamSet params;
    optim::AdamWState opt_state;
    bool has_opt_state = false;
    nlohmann::json meta;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace rarecast::experiment
