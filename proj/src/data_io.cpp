#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "rarecast/data.hpp"

namespace rarecast::data {
namespace {

constexpr const char* kSplitNames[3] = {"train", "valid", "test"};

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

constexpr const char* kEventsHeader = "admission_id,observation_id,time_hours,value";
constexpr const char* kLabelsHeader = "admission_id,event_time_hours";

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

[[noreturn]] void csv_error(const std::string& file, std::size_t lineno,
                            const std::string& what) {
    throw std::runtime_error(file + " line " + std::to_string(lineno) + ": " + what);
}

double parse_double(const std::string& field, const std::string& file, std::size_t lineno,
                    const char* what) {
    if (field.empty()) csv_error(file, lineno, std::string("empty ") + what);
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size()) {
        csv_error(file, lineno, std::string("malformed ") + what + " '" + field + "'");
    }
    return v;
}

/// Reads a CSV with an exact expected header; hands each data row's fields
/// to `row` along with its line number. Tolerates CRLF and a trailing
/// blank line.
template <typename RowFn>
void read_csv(const std::string& path, const char* header, std::size_t n_fields,
              RowFn&& row) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1) {
            if (line != header) {
                csv_error(path, 1, std::string("expected header '") + header + "'");
            }
            continue;
        }
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != n_fields) {
            csv_error(path, lineno,
                      "expected " + std::to_string(n_fields) + " fields, got " +
                          std::to_string(fields.size()));
        }
        row(fields, lineno);
    }
}

struct AdmissionRaw {
    std::string id;
    std::vector<RawEvent> events;
    std::vector<double> event_times;  // labelled target events
};

std::vector<EncodedSequence> load_csv_split(const std::string& dir, const char* split_name,
                                            const CsvCohortConfig& cfg,
                                            std::unordered_set<std::string>& seen_ids) {
    std::unordered_set<std::string> known_obs;
    for (const auto& spec : cfg.specs) known_obs.insert(spec.id);

    const std::string events_path = dir + "/" + split_name + "_events.csv";
    const std::string labels_path = dir + "/" + split_name + "_labels.csv";

    std::vector<AdmissionRaw> admissions;  // first-appearance order
    std::unordered_map<std::string, std::size_t> index;

    read_csv(events_path, kEventsHeader, 4, [&](const std::vector<std::string>& f,
                                                std::size_t lineno) {
        const std::string& adm = f[0];
        if (adm.empty()) csv_error(events_path, lineno, "empty admission id");
        if (!known_obs.count(f[1])) {
            csv_error(events_path, lineno, "unknown observation id '" + f[1] + "'");
        }
        const double time = parse_double(f[2], events_path, lineno, "time");
        if (time < 0.0) csv_error(events_path, lineno, "negative time");
        // Empty value means measured-but-missing; encodes as all-zero.
        const double value =
            f[3].empty() ? std::nan("") : parse_double(f[3], events_path, lineno, "value");
        auto [it, inserted] = index.try_emplace(adm, admissions.size());
        if (inserted) admissions.push_back(AdmissionRaw{adm, {}, {}});
        admissions[it->second].events.push_back(RawEvent{f[1], time, value});
    });

    read_csv(labels_path, kLabelsHeader, 2, [&](const std::vector<std::string>& f,
                                                std::size_t lineno) {
        const auto it = index.find(f[0]);
        if (it == index.end()) {
            csv_error(labels_path, lineno, "unknown admission id '" + f[0] + "'");
        }
        const double time = parse_double(f[1], labels_path, lineno, "event time");
        if (time < 0.0) csv_error(labels_path, lineno, "negative event time");
        admissions[it->second].event_times.push_back(time);
    });

    std::vector<EncodedSequence> split;
    split.reserve(admissions.size());
    for (auto& adm : admissions) {
        if (!seen_ids.insert(adm.id).second) {
            throw std::runtime_error("admission id '" + adm.id +
                                     "' appears in more than one split");
        }
        // The schema does not require global time order; sort stably per
        // admission so per-observation order is whatever the file implies.
        std::stable_sort(adm.events.begin(), adm.events.end(),
                         [](const RawEvent& a, const RawEvent& b) { return a.time < b.time; });
        double t_max = 0.0;
        for (const auto& ev : adm.events) t_max = std::max(t_max, ev.time);
        const auto n_steps =
            static_cast<long long>(std::floor(t_max / cfg.interval_hours + 1e-9));
        if (n_steps < 1) {
            throw std::runtime_error("admission '" + adm.id +
                                     "' has no events at or after the first prediction time");
        }
        std::vector<double> times(static_cast<std::size_t>(n_steps));
        for (long long k = 1; k <= n_steps; ++k) {
            times[static_cast<std::size_t>(k - 1)] = static_cast<double>(k) * cfg.interval_hours;
        }
        EncodedSequence seq = lvcf_sequence(adm.events, cfg.specs, times, cfg.horizon_hours);
        seq.admission_id = adm.id;
        std::sort(adm.event_times.begin(), adm.event_times.end());
        apply_event_labels(seq, adm.event_times, cfg.horizon_hours);
        apply_holdout_mask(seq, adm.event_times, cfg.holdout_hours);
        split.push_back(std::move(seq));
    }
    return split;
}

// ---------------------------------------------------------------------------
// Binary archive primitives (little-endian host assumed; x86-64 target)
// ---------------------------------------------------------------------------

constexpr char kArchiveMagic[8] = {'R', 'A', 'R', 'E', 'C', 'O', 'H', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_f64(std::ostream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& in, const std::string& path) {
    std::uint64_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
        throw std::runtime_error("unexpected end of file in " + path);
    }
    return v;
}

double read_f64(std::istream& in, const std::string& path) {
    double v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
        throw std::runtime_error("unexpected end of file in " + path);
    }
    return v;
}

void save_split_bin(const std::vector<EncodedSequence>& split, const TaskLayout& tasks,
                    const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(kArchiveMagic, sizeof(kArchiveMagic));
    write_u64(out, split.size());
    write_u64(out, static_cast<std::uint64_t>(tasks.total_classes()));
    write_u64(out, tasks.task_count());
    for (const auto& seq : split) {
        write_u64(out, seq.admission_id.size());
        out.write(seq.admission_id.data(),
                  static_cast<std::streamsize>(seq.admission_id.size()));
        write_u64(out, seq.steps.size());
        for (const auto& step : seq.steps) {
            write_f64(out, step.time);
            const char label = static_cast<char>(step.label);
            const char valid = step.valid ? 1 : 0;
            out.write(&label, 1);
            out.write(&valid, 1);
            if (step.input.size() != static_cast<std::size_t>(tasks.total_classes())) {
                throw std::runtime_error("archive: step width mismatch in " +
                                         seq.admission_id);
            }
            for (const double v : step.input) write_f64(out, v);
            if (step.forecast_classes.size() != tasks.task_count()) {
                throw std::runtime_error("archive: task count mismatch in " +
                                         seq.admission_id);
            }
            for (const int c : step.forecast_classes) {
                write_u64(out, static_cast<std::uint64_t>(c));
            }
        }
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<EncodedSequence> load_split_bin(const std::string& path,
                                            const TaskLayout& tasks) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kArchiveMagic, 8) != 0) {
        throw std::runtime_error(path + ": not a cohort archive split file");
    }
    const std::uint64_t n_seq = read_u64(in, path);
    const std::uint64_t width = read_u64(in, path);
    const std::uint64_t n_tasks = read_u64(in, path);
    if (width != static_cast<std::uint64_t>(tasks.total_classes()) ||
        n_tasks != tasks.task_count()) {
        throw std::runtime_error(path + ": layout does not match meta.json");
    }
    std::vector<EncodedSequence> split;
    split.reserve(n_seq);
    for (std::uint64_t s = 0; s < n_seq; ++s) {
        EncodedSequence seq;
        const std::uint64_t id_len = read_u64(in, path);
        seq.admission_id.resize(id_len);
        if (!in.read(seq.admission_id.data(), static_cast<std::streamsize>(id_len))) {
            throw std::runtime_error("unexpected end of file in " + path);
        }
        const std::uint64_t n_steps = read_u64(in, path);
        seq.steps.reserve(n_steps);
        for (std::uint64_t k = 0; k < n_steps; ++k) {
            Step step;
            step.time = read_f64(in, path);
            char label = 0, valid = 0;
            if (!in.read(&label, 1) || !in.read(&valid, 1)) {
                throw std::runtime_error("unexpected end of file in " + path);
            }
            step.label = label;
            step.valid = valid != 0;
            step.input.resize(width);
            for (auto& v : step.input) v = read_f64(in, path);
            step.forecast_classes.resize(n_tasks);
            for (auto& c : step.forecast_classes) {
                c = static_cast<int>(read_u64(in, path));
            }
            seq.steps.push_back(std::move(step));
        }
        split.push_back(std::move(seq));
    }
    return split;
}

}  // namespace

void CsvCohortConfig::validate() const {
    if (specs.empty()) throw std::runtime_error("csv config: empty spec set");
    std::unordered_set<std::string> ids;
    for (const auto& spec : specs) {
        spec.validate();
        if (!ids.insert(spec.id).second) {
            throw std::runtime_error("csv config: duplicate observation id " + spec.id);
        }
    }
    if (!(interval_hours > 0.0)) throw std::runtime_error("csv config: interval must be > 0");
    if (horizon_hours < 0.0 || holdout_hours < 0.0) {
        throw std::runtime_error("csv config: horizon and holdout must be >= 0");
    }
}

Cohort load_cohort_csv(const std::string& dir, const CsvCohortConfig& cfg) {
    cfg.validate();
    Cohort cohort;
    cohort.tasks = layout_from_specs(cfg.specs);
    std::unordered_set<std::string> seen_ids;
    cohort.train = load_csv_split(dir, kSplitNames[0], cfg, seen_ids);
    cohort.valid = load_csv_split(dir, kSplitNames[1], cfg, seen_ids);
    cohort.test = load_csv_split(dir, kSplitNames[2], cfg, seen_ids);
    cohort.refresh_stats();
    return cohort;
}

void save_cohort_archive(const Cohort& cohort, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    nlohmann::json meta;
    meta["task_ids"] = cohort.tasks.task_ids;
    meta["class_counts"] = cohort.tasks.class_counts;
    std::ofstream meta_out(dir + "/meta.json", std::ios::trunc);
    if (!meta_out) throw std::runtime_error("cannot write " + dir + "/meta.json");
    meta_out << meta.dump(2) << "\n";

    save_split_bin(cohort.train, cohort.tasks, dir + "/train.bin");
    save_split_bin(cohort.valid, cohort.tasks, dir + "/valid.bin");
    save_split_bin(cohort.test, cohort.tasks, dir + "/test.bin");

    std::ofstream stats_out(dir + "/stats.txt", std::ios::trunc);
    if (!stats_out) throw std::runtime_error("cannot write " + dir + "/stats.txt");
    stats_out << format_stats_table(cohort);
}

Cohort load_cohort_archive(const std::string& dir) {
    std::ifstream meta_in(dir + "/meta.json");
    if (!meta_in) throw std::runtime_error("cannot open " + dir + "/meta.json");
    nlohmann::json meta;
    meta_in >> meta;

    Cohort cohort;
    cohort.tasks.task_ids = meta.at("task_ids").get<std::vector<std::string>>();
    cohort.tasks.class_counts = meta.at("class_counts").get<std::vector<int>>();
    cohort.tasks.validate();

    cohort.train = load_split_bin(dir + "/train.bin", cohort.tasks);
    cohort.valid = load_split_bin(dir + "/valid.bin", cohort.tasks);
    cohort.test = load_split_bin(dir + "/test.bin", cohort.tasks);
    cohort.refresh_stats();
    return cohort;
}

}  // namespace rarecast::data
