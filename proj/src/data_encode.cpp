#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>

#include "rarecast/data.hpp"

namespace rarecast::data {

// ---------------------------------------------------------------------------
// Specs and one-hot encoding
// ---------------------------------------------------------------------------

void ObservationSpec::validate() const {
    if (id.empty()) throw std::runtime_error("observation spec has empty id");
    if (class_count != 2 && class_count != 3) {
        throw std::runtime_error("observation " + id + ": class count must be 2 or 3, got " +
                                 std::to_string(class_count));
    }
    if (!(lo < hi)) {
        throw std::runtime_error("observation " + id + ": normal range requires lo < hi");
    }
}

std::optional<int> observation_class(std::optional<double> value,
                                     const ObservationSpec& spec) {
    if (!value.has_value() || std::isnan(*value)) return std::nullopt;
    const double v = *value;
    if (spec.class_count == 2) return (v < spec.lo || v > spec.hi) ? 1 : 0;
    if (v < spec.lo) return 1;  // abnormal-low
    if (v > spec.hi) return 2;  // abnormal-high
    return 0;                   // normal
}

std::vector<double> encode_observation(std::optional<double> value,
                                       const ObservationSpec& spec) {
    spec.validate();
    std::vector<double> out(static_cast<std::size_t>(spec.class_count), 0.0);
    if (const auto cls = observation_class(value, spec)) out[static_cast<std::size_t>(*cls)] = 1.0;
    return out;
}

TaskLayout layout_from_specs(const std::vector<ObservationSpec>& specs) {
    TaskLayout layout;
    for (const auto& spec : specs) {
        spec.validate();
        layout.task_ids.push_back(spec.id);
        layout.class_counts.push_back(spec.class_count);
    }
    layout.validate();
    return layout;
}

// ---------------------------------------------------------------------------
// Last-value-carry-forward sequence assembly
// ---------------------------------------------------------------------------

EncodedSequence lvcf_sequence(const std::vector<RawEvent>& events,
                              const std::vector<ObservationSpec>& specs,
                              const std::vector<double>& prediction_times,
                              double horizon_hours) {
    if (specs.empty()) throw std::runtime_error("lvcf: empty spec set");
    if (horizon_hours < 0.0) throw std::runtime_error("lvcf: negative horizon");
    for (std::size_t i = 1; i < prediction_times.size(); ++i) {
        if (!(prediction_times[i - 1] < prediction_times[i])) {
            throw std::runtime_error("lvcf: prediction times must be strictly increasing");
        }
    }

    std::unordered_map<std::string, std::size_t> spec_index;
    for (std::size_t o = 0; o < specs.size(); ++o) {
        specs[o].validate();
        if (!spec_index.emplace(specs[o].id, o).second) {
            throw std::runtime_error("lvcf: duplicate observation spec " + specs[o].id);
        }
    }

    // Per-observation (time, value) series; NaN values are dropped so the
    // last real value keeps carrying forward.
    std::vector<std::vector<std::pair<double, double>>> series(specs.size());
    for (const auto& ev : events) {
        const auto it = spec_index.find(ev.observation_id);
        if (it == spec_index.end()) {
            throw std::runtime_error("lvcf: unknown observation id " + ev.observation_id);
        }
        if (ev.time < 0.0) {
            throw std::runtime_error("lvcf: negative event time for " + ev.observation_id);
        }
        auto& s = series[it->second];
        if (!s.empty() && ev.time < s.back().first) {
            throw std::runtime_error("lvcf: events out of time order for " + ev.observation_id);
        }
        if (!std::isnan(ev.value)) s.emplace_back(ev.time, ev.value);
    }

    const int width = layout_from_specs(specs).total_classes();

    // input_pos[o]: events consumed up to time t; target_pos[o]: up to
    // t + horizon. Both advance monotonically with the step time.
    std::vector<std::size_t> input_pos(specs.size(), 0), target_pos(specs.size(), 0);

    EncodedSequence seq;
    seq.steps.reserve(prediction_times.size());
    for (const double t : prediction_times) {
        Step step;
        step.time = t;
        step.input.reserve(static_cast<std::size_t>(width));
        step.forecast_classes.reserve(specs.size());
        for (std::size_t o = 0; o < specs.size(); ++o) {
            const auto& s = series[o];
            auto& ip = input_pos[o];
            while (ip < s.size() && s[ip].first <= t) ++ip;
            const std::optional<double> latest =
                ip > 0 ? std::optional<double>(s[ip - 1].second) : std::nullopt;
            const auto sub = encode_observation(latest, specs[o]);
            step.input.insert(step.input.end(), sub.begin(), sub.end());

            auto& tp = target_pos[o];
            while (tp < s.size() && s[tp].first <= t + horizon_hours) ++tp;
            const std::optional<double> ahead =
                tp > 0 ? std::optional<double>(s[tp - 1].second) : std::nullopt;
            const auto cls = observation_class(ahead, specs[o]);
            step.forecast_classes.push_back(cls.value_or(0));  // impute normal
        }
        seq.steps.push_back(std::move(step));
    }
    return seq;
}

void apply_event_labels(EncodedSequence& seq, const std::vector<double>& event_times,
                        double horizon_hours) {
    for (auto& step : seq.steps) {
        bool hit = false;
        for (const double ev : event_times) {
            if (step.time < ev && ev <= step.time + horizon_hours) {
                hit = true;
                break;
            }
        }
        step.label = hit ? 1 : 0;
    }
}

void apply_holdout_mask(EncodedSequence& seq, const std::vector<double>& event_times,
                        double holdout_hours) {
    if (holdout_hours < 0.0) throw std::runtime_error("holdout must be >= 0");
    if (holdout_hours == 0.0 || event_times.empty()) return;
    for (auto& step : seq.steps) {
        for (const double ev : event_times) {
            if (ev < step.time && step.time <= ev + holdout_hours) {
                step.valid = false;
                break;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

SplitStats compute_stats(const std::vector<EncodedSequence>& split) {
    SplitStats st;
    st.admissions = split.size();
    for (const auto& seq : split) {
        for (const auto& step : seq.steps) {
            if (!step.valid) continue;
            if (step.label == 1) {
                ++st.positive_steps;
            } else {
                ++st.negative_steps;
            }
        }
    }
    const std::size_t total = st.positive_steps + st.negative_steps;
    st.prior = total > 0 ? static_cast<double>(st.positive_steps) / static_cast<double>(total)
                         : 0.0;
    return st;
}

void Cohort::refresh_stats() {
    train_stats = compute_stats(train);
    valid_stats = compute_stats(valid);
    test_stats = compute_stats(test);
}

std::string format_stats_table(const Cohort& cohort) {
    char line[160];
    std::string out;
    std::snprintf(line, sizeof(line), "%-6s %8s %8s %10s %9s\n", "Split", "Adms", "#Pos",
                  "#Neg", "Prior");
    out += line;
    const auto row = [&](const char* name, const SplitStats& st) {
        std::snprintf(line, sizeof(line), "%-6s %8zu %8zu %10zu %9.5f\n", name, st.admissions,
                      st.positive_steps, st.negative_steps, st.prior);
        out += line;
    };
    row("train", cohort.train_stats);
    row("valid", cohort.valid_stats);
    row("test", cohort.test_stats);
    return out;
}

}  // namespace rarecast::data
