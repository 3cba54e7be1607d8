#pragma once

#include <vector>

namespace rarecast::metrics {

/// Pooled step-level scores with binary labels.
struct ScoredPredictions {
    std::vector<double> scores;
    std::vector<int> labels;  // each 0 or 1
};

/// Mann-Whitney AUROC: (concordant pairs + 0.5 * tied pairs) / (P * N),
/// computed by sorting with tie groups. Throws std::runtime_error when the
/// input holds a single class; the caller decides any fallback.
double auroc(const ScoredPredictions& sp);

/// Average precision: sort by descending score, process equal scores as one
/// group, accumulate (R_k - R_{k-1}) * P_k. No interpolation between
/// precision-recall points. Throws when there are no positives.
double auprc(const ScoredPredictions& sp);

}  // namespace rarecast::metrics
