#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rarecast/data.hpp"
#include "rarecast/rng.hpp"

namespace rarecast::data {
namespace {

void check_fraction(double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw std::runtime_error("reduction fraction must lie in (0, 1], got " +
                                 std::to_string(fraction));
    }
}

/// Permutation of 0..n-1 fixed by (seed, iteration, op, split): every
/// fraction at the same coordinates samples a prefix of the same ordering,
/// so smaller fractions are nested inside larger ones.
std::vector<std::size_t> reduction_permutation(std::size_t n, const char* op,
                                               const char* split_name, std::uint64_t seed,
                                               std::uint64_t iteration) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    num::RngStream stream =
        num::RngStream(seed).split(op).split(iteration).split(split_name);
    num::shuffle(perm, stream);
    return perm;
}

std::size_t retained_count(double fraction, std::size_t n) {
    return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

void reduce_prior_split(std::vector<EncodedSequence>& split, const char* split_name,
                        double fraction, std::uint64_t seed, std::uint64_t iteration) {
    std::vector<std::size_t> positive;  // admissions with >= 1 valid positive step
    for (std::size_t i = 0; i < split.size(); ++i) {
        for (const auto& step : split[i].steps) {
            if (step.valid && step.label == 1) {
                positive.push_back(i);
                break;
            }
        }
    }
    const std::size_t keep = retained_count(fraction, positive.size());
    if (keep == 0) {
        throw std::runtime_error(std::string("reduce_prior: fraction leaves zero positive "
                                             "sequences in ") +
                                 split_name);
    }

    std::vector<std::size_t> order = positive;
    const auto perm =
        reduction_permutation(positive.size(), "reduce_prior", split_name, seed, iteration);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = positive[perm[i]];

    // Excluded admissions stay in the cohort; their positive steps become
    // masked (dropped), never negatives.
    for (std::size_t i = keep; i < order.size(); ++i) {
        for (auto& step : split[order[i]].steps) {
            if (step.label == 1) step.valid = false;
        }
    }
}

void reduce_samples_split(std::vector<EncodedSequence>& split, const char* split_name,
                          double fraction, std::uint64_t seed, std::uint64_t iteration) {
    const std::size_t keep = retained_count(fraction, split.size());
    if (keep == 0) {
        throw std::runtime_error(std::string("reduce_samples: fraction leaves zero "
                                             "sequences in ") +
                                 split_name);
    }
    auto perm =
        reduction_permutation(split.size(), "reduce_samples", split_name, seed, iteration);
    perm.resize(keep);
    std::sort(perm.begin(), perm.end());  // keep original admission order

    std::vector<EncodedSequence> kept;
    kept.reserve(keep);
    for (const std::size_t idx : perm) kept.push_back(std::move(split[idx]));
    split = std::move(kept);
}

}  // namespace

Cohort reduce_prior(const Cohort& cohort, double fraction, std::uint64_t seed,
                    std::uint64_t iteration) {
    check_fraction(fraction);
    Cohort out = cohort;
    if (fraction == 1.0) return out;
    reduce_prior_split(out.train, "train", fraction, seed, iteration);
    reduce_prior_split(out.valid, "valid", fraction, seed, iteration);
    out.refresh_stats();
    return out;
}

Cohort reduce_samples(const Cohort& cohort, double fraction, std::uint64_t seed,
                      std::uint64_t iteration) {
    check_fraction(fraction);
    Cohort out = cohort;
    if (fraction == 1.0) return out;
    reduce_samples_split(out.train, "train", fraction, seed, iteration);
    reduce_samples_split(out.valid, "valid", fraction, seed, iteration);
    out.refresh_stats();
    if (out.train_stats.positive_steps == 0 || out.valid_stats.positive_steps == 0) {
        throw std::runtime_error(
            "reduce_samples: fraction leaves zero positive steps in train or valid");
    }
    return out;
}

}  // namespace rarecast::data
