#include <stdexcept>

#include "rarecast/experiment.hpp"

namespace rarecast::experiment {
namespace {

bool is_two_phase(model::ArchKind kind) {
    return kind == model::ArchKind::embedding || kind == model::ArchKind::residual;
}

std::vector<StudyCell> run_reduction_study(const std::vector<StudyModel>& models,
                                           const data::Cohort& cohort,
                                           const std::vector<double>& fractions,
                                           std::uint64_t iterations, const TrainConfig& base,
                                           std::uint64_t reduction_seed,
                                           const std::string& cohort_id, bool by_samples) {
    if (models.empty()) throw std::runtime_error("reduction study needs at least one model");
    if (fractions.empty()) throw std::runtime_error("reduction study needs fractions");
    if (iterations == 0) throw std::runtime_error("reduction study needs iterations >= 1");

    std::vector<StudyCell> cells;
    cells.reserve(models.size() * fractions.size() * iterations);
    for (const double fraction : fractions) {
        for (std::uint64_t iteration = 0; iteration < iterations; ++iteration) {
            auto slice = run_study_iteration(models, cohort, fraction, iteration, base,
                                             reduction_seed, cohort_id, by_samples);
            for (auto& cell : slice) cells.push_back(std::move(cell));
        }
    }
    return cells;
}

}  // namespace

std::vector<StudyCell> run_study_iteration(const std::vector<StudyModel>& models,
                                           const data::Cohort& cohort, double fraction,
                                           std::uint64_t iteration, const TrainConfig& base,
                                           std::uint64_t reduction_seed,
                                           const std::string& cohort_id, bool by_samples) {
    // One reduced cohort per (fraction, iteration), shared by every model so
    // their retained selections are identical.
    const data::Cohort reduced =
        by_samples ? data::reduce_samples(cohort, fraction, reduction_seed, iteration)
                   : data::reduce_prior(cohort, fraction, reduction_seed, iteration);

    TrainConfig cell_cfg = base;
    cell_cfg.seed = base.seed + iteration;

    std::vector<StudyCell> cells;
    cells.reserve(models.size());
    for (const auto& spec : models) {
        EvalReport report;
        if (is_two_phase(spec.arch.kind)) {
            // Only the sample study exempts forecast pretraining from the
            // reduction.
            const data::Cohort* phase1 = by_samples ? &cohort : nullptr;
            const auto result = train_two_phase(spec.arch, reduced, cell_cfg, cell_cfg, phase1);
            report = evaluate(result.params, spec.arch, reduced.test);
            report.event_weight = 1.0;
        } else {
            TrainConfig cfg = cell_cfg;
            cfg.event_weight = spec.event_weight;
            const auto [params, history] = train(spec.arch, reduced, cfg);
            report = evaluate(params, spec.arch, reduced.test);
            report.event_weight = spec.event_weight;
        }
        report.model_name = spec.name;
        report.seed = cell_cfg.seed;
        report.cohort_id = cohort_id;
        report.reduction = by_samples ? "samples" : "prior";
        report.fraction = fraction;
        report.iteration = iteration;

        StudyCell cell;
        cell.model_name = spec.name;
        cell.fraction = fraction;
        cell.iteration = iteration;
        cell.report = std::move(report);
        cells.push_back(std::move(cell));
    }
    return cells;
}

std::vector<StudyCell> run_prior_reduction_study(
    const std::vector<StudyModel>& models, const data::Cohort& cohort,
    const std::vector<double>& fractions, std::uint64_t iterations, const TrainConfig& base,
    std::uint64_t reduction_seed, const std::string& cohort_id) {
    return run_reduction_study(models, cohort, fractions, iterations, base, reduction_seed,
                               cohort_id, false);
}

std::vector<StudyCell> run_sample_reduction_study(
    const std::vector<StudyModel>& models, const data::Cohort& cohort,
    const std::vector<double>& fractions, std::uint64_t iterations, const TrainConfig& base,
    std::uint64_t reduction_seed, const std::string& cohort_id) {
    return run_reduction_study(models, cohort, fractions, iterations, base, reduction_seed,
                               cohort_id, true);
}

}  // namespace rarecast::experiment
