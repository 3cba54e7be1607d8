#include "rarecast/metrics.hpp"

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>

namespace rarecast::metrics {
namespace {

struct Counts {
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

Counts validate(const ScoredPredictions& sp) {
    if (sp.scores.size() != sp.labels.size()) {
        throw std::runtime_error("scores/labels length mismatch: " +
                                 std::to_string(sp.scores.size()) + " vs " +
                                 std::to_string(sp.labels.size()));
    }
    if (sp.scores.empty()) throw std::runtime_error("empty predictions");
    Counts c;
    for (int l : sp.labels) {
        if (l == 1) {
            ++c.positives;
        } else if (l == 0) {
            ++c.negatives;
        } else {
            throw std::runtime_error("label must be 0 or 1, got " + std::to_string(l));
        }
    }
    return c;
}

std::vector<std::size_t> order_by_score(const ScoredPredictions& sp, bool ascending) {
    std::vector<std::size_t> idx(sp.scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return ascending ? sp.scores[a] < sp.scores[b] : sp.scores[a] > sp.scores[b];
    });
    return idx;
}

}  // namespace

double auroc(const ScoredPredictions& sp) {
    const Counts c = validate(sp);
    if (c.positives == 0 || c.negatives == 0) {
        throw std::runtime_error("auroc needs both classes; got " +
                                 std::to_string(c.positives) + " positives and " +
                                 std::to_string(c.negatives) + " negatives");
    }
    const auto idx = order_by_score(sp, /*ascending=*/true);

    // Walk tie groups in ascending score order. A positive beats every
    // negative with a strictly lower score and half-counts ties.
    double twice_stat = 0.0;  // 2*concordant + tied, kept integral in double
    std::size_t negatives_below = 0;
    std::size_t i = 0;
    const std::size_t n = idx.size();
    while (i < n) {
        std::size_t j = i;
        std::size_t pos_g = 0, neg_g = 0;
        while (j < n && sp.scores[idx[j]] == sp.scores[idx[i]]) {
            if (sp.labels[idx[j]] == 1) {
                ++pos_g;
            } else {
                ++neg_g;
            }
            ++j;
        }
        twice_stat += 2.0 * static_cast<double>(pos_g) * static_cast<double>(negatives_below);
        twice_stat += static_cast<double>(pos_g) * static_cast<double>(neg_g);
        negatives_below += neg_g;
        i = j;
    }
    return twice_stat /
           (2.0 * static_cast<double>(c.positives) * static_cast<double>(c.negatives));
}

double auprc(const ScoredPredictions& sp) {
    const Counts c = validate(sp);
    if (c.positives == 0) throw std::runtime_error("auprc needs at least one positive");
    const auto idx = order_by_score(sp, /*ascending=*/false);

    const double total_pos = static_cast<double>(c.positives);
    double ap = 0.0;
    double prev_recall = 0.0;
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    const std::size_t n = idx.size();
    while (i < n) {
        std::size_t j = i;
        while (j < n && sp.scores[idx[j]] == sp.scores[idx[i]]) {
            if (sp.labels[idx[j]] == 1) {
                ++tp;
            } else {
                ++fp;
            }
            ++j;
        }
        const double recall = static_cast<double>(tp) / total_pos;
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return ap;
}

}  // namespace rarecast::metrics
