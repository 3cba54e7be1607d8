#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "rarecast/data.hpp"
#include "rarecast/metrics.hpp"

namespace fs = std::filesystem;
using namespace rarecast;

namespace {

// ---------------------------------------------------------------------------
// Exact structural comparison helpers
// ---------------------------------------------------------------------------

bool steps_equal(const data::Step& a, const data::Step& b) {
    return a.time == b.time && a.input == b.input && a.label == b.label &&
           a.forecast_classes == b.forecast_classes && a.valid == b.valid;
}

bool seqs_equal(const data::EncodedSequence& a, const data::EncodedSequence& b) {
    if (a.admission_id != b.admission_id || a.steps.size() != b.steps.size()) return false;
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        if (!steps_equal(a.steps[i], b.steps[i])) return false;
    }
    return true;
}

bool splits_equal(const std::vector<data::EncodedSequence>& a,
                  const std::vector<data::EncodedSequence>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!seqs_equal(a[i], b[i])) return false;
    }
    return true;
}

bool cohorts_equal(const data::Cohort& a, const data::Cohort& b) {
    return a.tasks.task_ids == b.tasks.task_ids &&
           a.tasks.class_counts == b.tasks.class_counts && splits_equal(a.train, b.train) &&
           splits_equal(a.valid, b.valid) && splits_equal(a.test, b.test);
}

std::string thrown_message(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

// ---------------------------------------------------------------------------
// Test fixtures
// ---------------------------------------------------------------------------

const data::ObservationSpec kSpec3{"alb", 3, 4.0, 9.0};
const data::ObservationSpec kSpec2{"lact", 2, 0.5, 2.0};

/// Hand-built cohort for reduction bookkeeping: every admission has three
/// steps at t = 1, 2, 3; "positive" admissions carry one positive step at
/// t = 2. Single 2-class task, two input columns.
data::Cohort toy_cohort(int train_pos, int train_neg, int valid_pos, int valid_neg,
                        int test_pos, int test_neg) {
    data::Cohort cohort;
    cohort.tasks.task_ids = {"obs"};
    cohort.tasks.class_counts = {2};
    const auto make_split = [](const char* prefix, int pos, int neg) {
        std::vector<data::EncodedSequence> split;
        for (int i = 0; i < pos + neg; ++i) {
            data::EncodedSequence seq;
            seq.admission_id = std::string(prefix) + (i < pos ? "-pos-" : "-neg-") +
                               std::to_string(i);
            for (int k = 1; k <= 3; ++k) {
                data::Step step;
                step.time = k;
                step.input = {1.0, 0.0};
                step.forecast_classes = {0};
                step.label = (i < pos && k == 2) ? 1 : 0;
                seq.steps.push_back(step);
            }
            split.push_back(std::move(seq));
        }
        return split;
    };
    cohort.train = make_split("train", train_pos, train_neg);
    cohort.valid = make_split("valid", valid_pos, valid_neg);
    cohort.test = make_split("test", test_pos, test_neg);
    cohort.refresh_stats();
    return cohort;
}

std::set<std::string> positive_admissions(const std::vector<data::EncodedSequence>& split) {
    std::set<std::string> out;
    for (const auto& seq : split) {
        for (const auto& step : seq.steps) {
            if (step.valid && step.label == 1) {
                out.insert(seq.admission_id);
                break;
            }
        }
    }
    return out;
}

std::set<std::string> admission_ids(const std::vector<data::EncodedSequence>& split) {
    std::set<std::string> out;
    for (const auto& seq : split) out.insert(seq.admission_id);
    return out;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    REQUIRE(static_cast<bool>(out));
    out << content;
}

}  // namespace

// ---------------------------------------------------------------------------
// One-hot encoding
// ---------------------------------------------------------------------------

TEST_CASE("encode_observation covers all classes and missingness") {
    CHECK(data::encode_observation(7.0, kSpec3) == std::vector<double>{1.0, 0.0, 0.0});
    CHECK(data::encode_observation(2.0, kSpec3) == std::vector<double>{0.0, 1.0, 0.0});
    CHECK(data::encode_observation(10.0, kSpec3) == std::vector<double>{0.0, 0.0, 1.0});
    // Boundary values sit inside the normal range.
    CHECK(data::encode_observation(4.0, kSpec3) == std::vector<double>{1.0, 0.0, 0.0});
    CHECK(data::encode_observation(9.0, kSpec3) == std::vector<double>{1.0, 0.0, 0.0});

    CHECK(data::encode_observation(1.0, kSpec2) == std::vector<double>{1.0, 0.0});
    CHECK(data::encode_observation(5.1, kSpec2) == std::vector<double>{0.0, 1.0});
    CHECK(data::encode_observation(0.1, kSpec2) == std::vector<double>{0.0, 1.0});

    CHECK(data::encode_observation(std::nullopt, kSpec2) == std::vector<double>{0.0, 0.0});
    CHECK(data::encode_observation(std::nan(""), kSpec3) ==
          std::vector<double>{0.0, 0.0, 0.0});

    CHECK(!data::observation_class(std::nullopt, kSpec3).has_value());
    CHECK(data::observation_class(3.9, kSpec3) == 1);

    data::ObservationSpec bad{"x", 4, 0.0, 1.0};
    CHECK_THROWS(data::encode_observation(0.5, bad));
    data::ObservationSpec flipped{"x", 2, 1.0, 0.0};
    CHECK_THROWS(data::encode_observation(0.5, flipped));
}

// ---------------------------------------------------------------------------
// LVCF sequence assembly
// ---------------------------------------------------------------------------

TEST_CASE("lvcf inputs use the latest event at or before the step time") {
    const std::vector<data::RawEvent> events = {{"alb", 2.0, 2.0}};  // abnormal-low
    const auto seq = data::lvcf_sequence(events, {kSpec3}, {1.0, 3.0}, 0.0);
    REQUIRE(seq.steps.size() == 2);
    CHECK(seq.steps[0].input == std::vector<double>{0.0, 0.0, 0.0});  // nothing yet
    CHECK(seq.steps[1].input == std::vector<double>{0.0, 1.0, 0.0});  // carried forward
}

TEST_CASE("lvcf forecast targets impute the normal class when no event exists") {
    const auto seq =
        data::lvcf_sequence({}, {kSpec3, kSpec2}, {1.0, 2.0, 3.0}, 6.0);
    for (const auto& step : seq.steps) {
        CHECK(step.forecast_classes == std::vector<int>{0, 0});
        CHECK(step.input == std::vector<double>(5, 0.0));
        CHECK(step.label == 0);
        CHECK(step.valid);
    }
}

TEST_CASE("lvcf forecast horizon looks ahead of the input horizon") {
    const std::vector<data::RawEvent> events = {{"alb", 7.0, 12.0}};  // abnormal-high
    const auto seq = data::lvcf_sequence(events, {kSpec3}, {3.0}, 6.0);
    REQUIRE(seq.steps.size() == 1);
    CHECK(seq.steps[0].input == std::vector<double>{0.0, 0.0, 0.0});  // 7 > 3
    CHECK(seq.steps[0].forecast_classes == std::vector<int>{2});      // 7 <= 3 + 6
}

TEST_CASE("lvcf skips NaN values and keeps carrying the last real one") {
    const std::vector<data::RawEvent> events = {{"alb", 1.0, 2.0},
                                                {"alb", 2.0, std::nan("")}};
    const auto seq = data::lvcf_sequence(events, {kSpec3}, {1.0, 2.5}, 0.0);
    CHECK(seq.steps[0].input == std::vector<double>{0.0, 1.0, 0.0});
    CHECK(seq.steps[1].input == std::vector<double>{0.0, 1.0, 0.0});
}

TEST_CASE("lvcf rejects malformed inputs") {
    CHECK_THROWS_WITH(data::lvcf_sequence({{"mystery", 1.0, 2.0}}, {kSpec3}, {1.0}, 0.0),
                      doctest::Contains("unknown observation id"));
    CHECK_THROWS_WITH(
        data::lvcf_sequence({{"alb", 3.0, 1.0}, {"alb", 2.0, 1.0}}, {kSpec3}, {1.0}, 0.0),
        doctest::Contains("out of time order"));
    CHECK_THROWS(data::lvcf_sequence({}, {kSpec3}, {2.0, 2.0}, 0.0));  // not increasing
    CHECK_THROWS(data::lvcf_sequence({}, {kSpec3, kSpec3}, {1.0}, 0.0));  // dup spec
}

TEST_CASE("interleaved observations encode independently") {
    const std::vector<data::RawEvent> events = {
        {"alb", 1.0, 2.0}, {"lact", 1.5, 5.0}, {"alb", 2.0, 7.0}};
    const auto seq = data::lvcf_sequence(events, {kSpec3, kSpec2}, {1.0, 2.0}, 1.0);
    CHECK(seq.steps[0].input == std::vector<double>{0.0, 1.0, 0.0, 0.0, 0.0});
    CHECK(seq.steps[1].input == std::vector<double>{1.0, 0.0, 0.0, 0.0, 1.0});
    // Targets at t+1: alb sees the 2.0-hour normal value from t=1 onwards.
    CHECK(seq.steps[0].forecast_classes == std::vector<int>{0, 1});
    CHECK(seq.steps[1].forecast_classes == std::vector<int>{0, 1});
}

// ---------------------------------------------------------------------------
// Labels, holdout, stats
// ---------------------------------------------------------------------------

TEST_CASE("event labels mark steps whose window contains an event") {
    auto seq = data::lvcf_sequence({}, {kSpec3}, {7.0, 8.0, 9.0, 10.0, 11.0}, 0.0);
    data::apply_event_labels(seq, {10.0}, 3.0);
    std::vector<int> labels;
    for (const auto& step : seq.steps) labels.push_back(step.label);
    // (t, t+3] contains 10 for t = 7, 8, 9; not for t = 10 (strictly after).
    CHECK(labels == std::vector<int>{1, 1, 1, 0, 0});
}

TEST_CASE("holdout masks the post-event blackout and nothing else") {
    auto seq = data::lvcf_sequence(
        {}, {kSpec3}, {9.0, 10.0, 11.0, 12.0, 13.0}, 0.0);
    data::apply_event_labels(seq, {10.0}, 3.0);
    data::apply_holdout_mask(seq, {10.0}, 2.0);
    std::vector<bool> valid;
    for (const auto& step : seq.steps) valid.push_back(step.valid);
    // Steps in (10, 12] go dark; the event step itself stays valid.
    CHECK(valid == std::vector<bool>{true, true, false, false, true});

    auto unchanged = data::lvcf_sequence({}, {kSpec3}, {9.0, 10.0}, 0.0);
    const auto before = unchanged;
    data::apply_holdout_mask(unchanged, {10.0}, 0.0);
    CHECK(seqs_equal(unchanged, before));
    data::apply_holdout_mask(unchanged, {}, 2.0);
    CHECK(seqs_equal(unchanged, before));
}

TEST_CASE("stats count valid steps only and prior is exact") {
    auto cohort = toy_cohort(3, 2, 1, 1, 2, 2);
    CHECK(cohort.train_stats.admissions == 5);
    CHECK(cohort.train_stats.positive_steps == 3);
    CHECK(cohort.train_stats.negative_steps == 12);
    CHECK(cohort.train_stats.prior == 3.0 / 15.0);

    // Masking a positive step moves it out of both tallies.
    cohort.train[0].steps[1].valid = false;
    cohort.refresh_stats();
    CHECK(cohort.train_stats.positive_steps == 2);
    CHECK(cohort.train_stats.negative_steps == 12);
    CHECK(cohort.train_stats.prior == 2.0 / 14.0);

    const auto table = data::format_stats_table(cohort);
    CHECK(table.find("Adms") != std::string::npos);
    CHECK(table.find("#Pos") != std::string::npos);
    CHECK(table.find("#Neg") != std::string::npos);
    CHECK(table.find("Prior") != std::string::npos);
    CHECK(table.find("train") != std::string::npos);
    CHECK(table.find("valid") != std::string::npos);
    CHECK(table.find("test") != std::string::npos);
}

// ---------------------------------------------------------------------------
// Synthetic generation
// ---------------------------------------------------------------------------

namespace {

data::SyntheticConfig small_config(std::uint64_t seed) {
    data::SyntheticConfig cfg;
    cfg.train_admissions = 300;
    cfg.valid_admissions = 50;
    cfg.test_admissions = 100;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("same seed reproduces the cohort bit for bit") {
    const auto a = data::generate_synthetic_cohort(small_config(42));
    const auto b = data::generate_synthetic_cohort(small_config(42));
    CHECK(cohorts_equal(a, b));
    const auto c = data::generate_synthetic_cohort(small_config(43));
    CHECK(!cohorts_equal(a, c));
}

TEST_CASE("synthetic cohort has invariant encoding width and step layout") {
    data::SyntheticTruth truth;
    const auto cfg = small_config(7);
    const auto cohort = data::generate_synthetic_cohort(cfg, &truth);
    const auto width = static_cast<std::size_t>(cohort.tasks.total_classes());
    CHECK(width == 60);  // 20 observations x 3 classes
    CHECK(cohort.tasks.task_count() == 20);

    const std::vector<data::EncodedSequence>* splits[3] = {&cohort.train, &cohort.valid,
                                                           &cohort.test};
    for (const auto* split : splits) {
        for (const auto& seq : *split) {
            REQUIRE(!seq.steps.empty());
            CHECK(seq.steps.size() >= static_cast<std::size_t>(cfg.min_steps));
            CHECK(seq.steps.size() <= static_cast<std::size_t>(cfg.max_steps));
            for (std::size_t k = 0; k < seq.steps.size(); ++k) {
                const auto& step = seq.steps[k];
                CHECK(step.input.size() == width);
                CHECK(step.forecast_classes.size() == 20);
                CHECK(step.time == static_cast<double>(k + 1) * cfg.interval_hours);
            }
        }
    }
    CHECK(truth.train.size() == cohort.train.size());
    CHECK(truth.test.size() == cohort.test.size());
}

TEST_CASE("truth trajectories reproduce labels and masks") {
    data::SyntheticTruth truth;
    const auto cfg = small_config(11);
    const auto cohort = data::generate_synthetic_cohort(cfg, &truth);
    const int H = cfg.horizon_steps();
    REQUIRE(H == 3);
    for (std::size_t i = 0; i < cohort.train.size(); ++i) {
        const auto& seq = cohort.train[i];
        const auto& adm = truth.train[i];
        CHECK(adm.admission_id == seq.admission_id);
        CHECK(adm.latent.size() == seq.steps.size() + static_cast<std::size_t>(H) + 1);
        for (const auto& step : seq.steps) {
            bool expect_label = false;
            bool expect_valid = true;
            for (const double ev : adm.event_times) {
                if (step.time < ev && ev <= step.time + cfg.horizon_hours) expect_label = true;
                if (ev < step.time && step.time <= ev + cfg.holdout_hours) expect_valid = false;
            }
            CHECK(step.label == (expect_label ? 1 : 0));
            CHECK(step.valid == expect_valid);
        }
    }
}

TEST_CASE("default hazard lands the train prior inside the target band") {
    data::SyntheticConfig cfg;  // full-size defaults
    const double lo = cfg.prior_target * (1.0 - cfg.prior_band);
    const double hi = cfg.prior_target * (1.0 + cfg.prior_band);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        cfg.seed = seed;
        const auto cohort = data::generate_synthetic_cohort(cfg);
        INFO("seed ", seed, " prior ", cohort.train_stats.prior);
        CHECK(cohort.train_stats.prior >= lo);
        CHECK(cohort.train_stats.prior <= hi);
        CHECK(cohort.train_stats.admissions == 2000);
        CHECK(cohort.valid_stats.admissions == 800);
        CHECK(cohort.test_stats.admissions == 2000);
    }
}

TEST_CASE("hopeless hazard is rejected with the realized prior") {
    auto cfg = small_config(3);
    cfg.train_admissions = 5;
    cfg.valid_admissions = 1;
    cfg.test_admissions = 1;
    cfg.hazard_scale = 1e-12;
    CHECK_THROWS_WITH(data::generate_synthetic_cohort(cfg),
                      doctest::Contains("realized train prior"));
}

TEST_CASE("zero signal and zero noise pin every observation to normal") {
    auto cfg = small_config(5);
    cfg.train_admissions = 20;
    cfg.valid_admissions = 2;
    cfg.test_admissions = 2;
    cfg.signal = 0.0;
    cfg.obs_noise = 0.0;
    cfg.hazard_scale = 0.5;  // keep positives plentiful despite the tiny size
    cfg.hazard_loc = 0.0;
    const auto cohort = data::generate_synthetic_cohort(cfg);
    for (const auto& seq : cohort.train) {
        for (const auto& step : seq.steps) {
            for (std::size_t t = 0; t < 20; ++t) {
                CHECK(step.forecast_classes[t] == 0);
                // Sub-vector is either all-zero (not yet measured) or normal.
                const double lowv = step.input[3 * t + 1];
                const double highv = step.input[3 * t + 2];
                CHECK(lowv == 0.0);
                CHECK(highv == 0.0);
            }
        }
    }
}

TEST_CASE("oracle on the true latent separates events when noise is low") {
    data::SyntheticConfig cfg;
    cfg.train_admissions = 200;
    cfg.valid_admissions = 20;
    cfg.test_admissions = 1000;
    cfg.latent_noise = 0.15;
    cfg.signal = 3.0;
    cfg.obs_noise = 0.05;
    cfg.hazard_scale = 0.9;
    cfg.hazard_gain = 12.0;
    cfg.hazard_loc = 1.0;
    cfg.seed = 77;

    data::SyntheticTruth truth;
    const auto cohort = data::generate_synthetic_cohort(cfg, &truth);
    const int H = cfg.horizon_steps();

    metrics::ScoredPredictions sp;
    for (std::size_t i = 0; i < cohort.test.size(); ++i) {
        const auto& seq = cohort.test[i];
        const auto& adm = truth.test[i];
        for (std::size_t k = 0; k < seq.steps.size(); ++k) {
            if (!seq.steps[k].valid) continue;
            // Peak severity over the label window (t, t + H].
            double peak = adm.latent[k + 1];
            for (int d = 2; d <= H; ++d) {
                peak = std::max(peak, adm.latent[k + static_cast<std::size_t>(d)]);
            }
            sp.scores.push_back(peak);
            sp.labels.push_back(seq.steps[k].label);
        }
    }
    const double ceiling = metrics::auroc(sp);
    INFO("oracle AUROC ", ceiling);
    CHECK(ceiling >= 0.95);
}

// ---------------------------------------------------------------------------
// Prior reduction
// ---------------------------------------------------------------------------

TEST_CASE("reduce_prior keeps admissions but masks excluded positive steps") {
    const auto cohort = toy_cohort(10, 30, 4, 10, 3, 5);
    const auto reduced = data::reduce_prior(cohort, 0.6, 99, 0);

    CHECK(reduced.train_stats.admissions == 40);  // nobody removed
    CHECK(reduced.train_stats.positive_steps == 6);
    CHECK(positive_admissions(reduced.train).size() == 6);
    CHECK(reduced.valid_stats.positive_steps == 2);  // round(0.6 * 4)
    CHECK(splits_equal(reduced.test, cohort.test));

    // Excluded positives became invalid, not negative.
    CHECK(reduced.train_stats.negative_steps == cohort.train_stats.negative_steps);
    std::size_t masked = 0;
    for (const auto& seq : reduced.train) {
        for (const auto& step : seq.steps) {
            if (!step.valid) {
                ++masked;
                CHECK(step.label == 1);
            }
        }
    }
    CHECK(masked == 4);
    CHECK(reduced.train_stats.prior ==
          6.0 / (6.0 + static_cast<double>(reduced.train_stats.negative_steps)));
}

TEST_CASE("reduce_prior at fraction one is the identity") {
    const auto cohort = toy_cohort(5, 5, 2, 2, 1, 1);
    const auto same = data::reduce_prior(cohort, 1.0, 123, 4);
    CHECK(cohorts_equal(cohort, same));
}

TEST_CASE("reduce_prior is deterministic and nested across fractions") {
    const auto cohort = toy_cohort(20, 20, 6, 6, 1, 1);

    const auto a = data::reduce_prior(cohort, 0.5, 7, 2);
    const auto b = data::reduce_prior(cohort, 0.5, 7, 2);
    CHECK(cohorts_equal(a, b));

    std::set<std::string> prev;
    bool first = true;
    for (const double f : {0.2, 0.4, 0.6, 0.8}) {
        const auto reduced = data::reduce_prior(cohort, f, 7, 2);
        const auto kept = positive_admissions(reduced.train);
        if (!first) {
            CHECK(std::includes(kept.begin(), kept.end(), prev.begin(), prev.end()));
        }
        prev = kept;
        first = false;
    }

    const auto other_iter = data::reduce_prior(cohort, 0.5, 7, 3);
    CHECK(positive_admissions(other_iter.train) != positive_admissions(a.train));
}

TEST_CASE("reduce_prior rejects fractions that drop every positive") {
    const auto cohort = toy_cohort(3, 3, 2, 2, 1, 1);
    CHECK_THROWS_WITH(data::reduce_prior(cohort, 0.05, 1, 0),
                      doctest::Contains("zero positive"));
    CHECK_THROWS(data::reduce_prior(cohort, 0.0, 1, 0));
    CHECK_THROWS(data::reduce_prior(cohort, 1.5, 1, 0));
}

// ---------------------------------------------------------------------------
// Sample reduction
// ---------------------------------------------------------------------------

TEST_CASE("reduce_samples removes admissions label-blind") {
    const auto cohort = toy_cohort(10, 30, 4, 10, 2, 2);
    const auto reduced = data::reduce_samples(cohort, 0.4, 56, 1);
    CHECK(reduced.train.size() == 16);  // round(0.4 * 40)
    CHECK(reduced.valid.size() == 6);   // round(0.4 * 14)
    CHECK(splits_equal(reduced.test, cohort.test));

    // Kept admissions preserve their original relative order.
    std::vector<std::string> kept_order;
    for (const auto& seq : reduced.train) kept_order.push_back(seq.admission_id);
    std::vector<std::string> original_order;
    for (const auto& seq : cohort.train) {
        if (admission_ids(reduced.train).count(seq.admission_id)) {
            original_order.push_back(seq.admission_id);
        }
    }
    CHECK(kept_order == original_order);
}

TEST_CASE("reduce_samples is deterministic, nested, and identity at one") {
    const auto cohort = toy_cohort(8, 32, 4, 12, 1, 1);
    CHECK(cohorts_equal(data::reduce_samples(cohort, 1.0, 9, 0), cohort));

    const auto a = data::reduce_samples(cohort, 0.5, 9, 4);
    const auto b = data::reduce_samples(cohort, 0.5, 9, 4);
    CHECK(cohorts_equal(a, b));

    std::set<std::string> prev;
    bool first = true;
    for (const double f : {0.25, 0.5, 0.75}) {
        const auto reduced = data::reduce_samples(cohort, f, 9, 4);
        const auto kept = admission_ids(reduced.train);
        if (!first) {
            CHECK(std::includes(kept.begin(), kept.end(), prev.begin(), prev.end()));
        }
        prev = kept;
        first = false;
    }
}

TEST_CASE("reduce_samples rejects reductions that lose all positives") {
    // The valid split has no positive admissions at all, so any real
    // reduction leaves it positive-free.
    const auto cohort = toy_cohort(4, 4, 0, 3, 1, 1);
    CHECK_THROWS_WITH(data::reduce_samples(cohort, 0.5, 2, 0),
                      doctest::Contains("zero positive"));
    const auto tiny = toy_cohort(2, 2, 1, 1, 1, 1);
    CHECK_THROWS_WITH(data::reduce_samples(tiny, 0.05, 2, 0),
                      doctest::Contains("zero"));
}

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

namespace {

const char* kGoldenEvents =
    "admission_id,observation_id,time_hours,value\n"
    "a1,alb,0.5,7.0\n"
    "a1,lact,2.0,5.1\n"
    "a1,alb,3.2,\n"
    "b1,alb,1.0,12.0\n";

const char* kGoldenLabels =
    "admission_id,event_time_hours\n"
    "a1,2.5\n";

const char* kEmptyEvents = "admission_id,observation_id,time_hours,value\n";
const char* kEmptyLabels = "admission_id,event_time_hours\n";

data::CsvCohortConfig csv_config() {
    data::CsvCohortConfig cfg;
    cfg.specs = {kSpec3, kSpec2};
    cfg.interval_hours = 1.0;
    cfg.horizon_hours = 2.0;
    cfg.holdout_hours = 2.0;
    return cfg;
}

fs::path fresh_dir(const char* name) {
    const fs::path dir = fs::path("test_data_tmp") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_split(const fs::path& dir, const char* split, const std::string& events,
                 const std::string& labels) {
    write_file(dir / (std::string(split) + "_events.csv"), events);
    write_file(dir / (std::string(split) + "_labels.csv"), labels);
}

}  // namespace

TEST_CASE("csv loader reproduces the lvcf golden sequence") {
    const auto dir = fresh_dir("golden");
    write_split(dir, "train", kGoldenEvents, kGoldenLabels);
    write_split(dir, "valid", kEmptyEvents, kEmptyLabels);
    write_split(dir, "test", kEmptyEvents, kEmptyLabels);

    const auto cfg = csv_config();
    const auto cohort = data::load_cohort_csv(dir.string(), cfg);
    REQUIRE(cohort.train.size() == 2);
    CHECK(cohort.valid.empty());
    CHECK(cohort.test.empty());

    // Same admission assembled by hand through the library pipeline.
    data::EncodedSequence expected = data::lvcf_sequence(
        {{"alb", 0.5, 7.0}, {"lact", 2.0, 5.1}, {"alb", 3.2, std::nan("")}}, cfg.specs,
        {1.0, 2.0, 3.0}, cfg.horizon_hours);
    expected.admission_id = "a1";
    data::apply_event_labels(expected, {2.5}, cfg.horizon_hours);
    data::apply_holdout_mask(expected, {2.5}, cfg.holdout_hours);
    CHECK(seqs_equal(cohort.train[0], expected));

    // Spot-check the encoded content itself.
    const auto& a1 = cohort.train[0];
    CHECK(a1.steps[0].input == std::vector<double>{1.0, 0.0, 0.0, 0.0, 0.0});
    CHECK(a1.steps[1].input == std::vector<double>{1.0, 0.0, 0.0, 0.0, 1.0});
    CHECK(a1.steps[0].forecast_classes == std::vector<int>{0, 1});
    CHECK(a1.steps[0].label == 1);
    CHECK(a1.steps[1].label == 1);
    CHECK(a1.steps[2].label == 0);
    CHECK(!a1.steps[2].valid);  // inside (2.5, 4.5]

    const auto& b1 = cohort.train[1];
    REQUIRE(b1.steps.size() == 1);
    CHECK(b1.steps[0].input == std::vector<double>{0.0, 0.0, 1.0, 0.0, 0.0});
    CHECK(b1.steps[0].forecast_classes == std::vector<int>{2, 0});

    CHECK(cohort.train_stats.positive_steps == 2);
    CHECK(cohort.train_stats.negative_steps == 1);
    CHECK(cohort.train_stats.prior == 2.0 / 3.0);
    CHECK(cohort.valid_stats.prior == 0.0);
}

TEST_CASE("csv loader is idempotent across repeated loads") {
    const auto dir = fresh_dir("idem");
    write_split(dir, "train", kGoldenEvents, kGoldenLabels);
    write_split(dir, "valid", kEmptyEvents, kEmptyLabels);
    write_split(dir, "test", kEmptyEvents, kEmptyLabels);
    const auto a = data::load_cohort_csv(dir.string(), csv_config());
    const auto b = data::load_cohort_csv(dir.string(), csv_config());
    CHECK(cohorts_equal(a, b));
}

TEST_CASE("empty labels file means an all-negative split") {
    const auto dir = fresh_dir("nolabels");
    write_split(dir, "train", kGoldenEvents, kEmptyLabels);
    write_split(dir, "valid", kEmptyEvents, kEmptyLabels);
    write_split(dir, "test", kEmptyEvents, kEmptyLabels);
    const auto cohort = data::load_cohort_csv(dir.string(), csv_config());
    CHECK(cohort.train_stats.positive_steps == 0);
    CHECK(cohort.train_stats.prior == 0.0);
    for (const auto& seq : cohort.train) {
        for (const auto& step : seq.steps) {
            CHECK(step.label == 0);
            CHECK(step.valid);
        }
    }
}

TEST_CASE("csv loader reports malformed rows with file and line") {
    const auto dir = fresh_dir("bad");
    write_split(dir, "valid", kEmptyEvents, kEmptyLabels);
    write_split(dir, "test", kEmptyEvents, kEmptyLabels);

    SUBCASE("bad value") {
        write_split(dir, "train",
                    "admission_id,observation_id,time_hours,value\n"
                    "a1,alb,1.0,7.0\n"
                    "a1,alb,2.0,sick\n",
                    kEmptyLabels);
        const auto msg = thrown_message(
            [&] { data::load_cohort_csv(dir.string(), csv_config()); });
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("value") != std::string::npos);
    }
    SUBCASE("wrong field count") {
        write_split(dir, "train",
                    "admission_id,observation_id,time_hours,value\n"
                    "a1,alb,1.0\n",
                    kEmptyLabels);
        const auto msg = thrown_message(
            [&] { data::load_cohort_csv(dir.string(), csv_config()); });
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("fields") != std::string::npos);
    }
    SUBCASE("unknown observation") {
        write_split(dir, "train",
                    "admission_id,observation_id,time_hours,value\n"
                    "a1,mystery,1.0,7.0\n",
                    kEmptyLabels);
        const auto msg = thrown_message(
            [&] { data::load_cohort_csv(dir.string(), csv_config()); });
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("mystery") != std::string::npos);
    }
    SUBCASE("label for unknown admission") {
        write_split(dir, "train", kGoldenEvents,
                    "admission_id,event_time_hours\n"
                    "ghost,2.0\n");
        const auto msg = thrown_message(
            [&] { data::load_cohort_csv(dir.string(), csv_config()); });
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("ghost") != std::string::npos);
    }
    SUBCASE("bad header") {
        write_split(dir, "train", "adm,obs,when,what\na1,alb,1.0,7.0\n", kEmptyLabels);
        const auto msg = thrown_message(
            [&] { data::load_cohort_csv(dir.string(), csv_config()); });
        CHECK(msg.find("header") != std::string::npos);
    }
    SUBCASE("admission before the first prediction time") {
        write_split(dir, "train",
                    "admission_id,observation_id,time_hours,value\n"
                    "early,alb,0.4,7.0\n",
                    kEmptyLabels);
        const auto msg = thrown_message(
            [&] { data::load_cohort_csv(dir.string(), csv_config()); });
        CHECK(msg.find("early") != std::string::npos);
    }
}

TEST_CASE("admission ids must not straddle splits") {
    const auto dir = fresh_dir("overlap");
    write_split(dir, "train", kGoldenEvents, kEmptyLabels);
    write_split(dir, "valid",
                "admission_id,observation_id,time_hours,value\n"
                "a1,alb,1.0,7.0\n",
                kEmptyLabels);
    write_split(dir, "test", kEmptyEvents, kEmptyLabels);
    CHECK_THROWS_WITH(data::load_cohort_csv(dir.string(), csv_config()),
                      doctest::Contains("a1"));
}

// ---------------------------------------------------------------------------
// Cohort archive
// ---------------------------------------------------------------------------

TEST_CASE("cohort archive round-trips bit for bit") {
    auto cfg = small_config(21);
    cfg.train_admissions = 40;
    cfg.valid_admissions = 10;
    cfg.test_admissions = 10;
    const auto cohort = data::generate_synthetic_cohort(cfg);

    const auto dir = fresh_dir("archive");
    data::save_cohort_archive(cohort, dir.string());
    CHECK(fs::exists(dir / "meta.json"));
    CHECK(fs::exists(dir / "train.bin"));
    CHECK(fs::exists(dir / "stats.txt"));

    const auto loaded = data::load_cohort_archive(dir.string());
    CHECK(cohorts_equal(cohort, loaded));
    CHECK(loaded.train_stats.positive_steps == cohort.train_stats.positive_steps);
    CHECK(loaded.train_stats.prior == cohort.train_stats.prior);

    // The stats file carries the Table-style block.
    std::ifstream stats_in(dir / "stats.txt");
    std::string stats((std::istreambuf_iterator<char>(stats_in)),
                      std::istreambuf_iterator<char>());
    CHECK(stats == data::format_stats_table(cohort));
}

TEST_CASE("archive loader rejects foreign files") {
    const auto dir = fresh_dir("tamper");
    write_file(dir / "meta.json", "{\"task_ids\":[\"obs\"],\"class_counts\":[2]}");
    write_file(dir / "train.bin", "definitely not a cohort split");
    CHECK_THROWS(data::load_cohort_archive(dir.string()));
}
