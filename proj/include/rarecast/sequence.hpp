#pragma once

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace rarecast::data {

/// Column layout of the forecast tasks: one task per tracked observation,
/// each occupying `class_count` consecutive one-hot columns.
struct TaskLayout {
    std::vector<std::string> task_ids;
    std::vector<int> class_counts;  // each 2 or 3

    std::size_t task_count() const { return class_counts.size(); }

    int total_classes() const {
        return std::accumulate(class_counts.begin(), class_counts.end(), 0);
    }

    int offset(std::size_t task) const {
        int off = 0;
        for (std::size_t r = 0; r < task; ++r) off += class_counts[r];
        return off;
    }

    void validate() const {
        if (class_counts.empty()) throw std::runtime_error("task layout has no tasks");
        if (!task_ids.empty() && task_ids.size() != class_counts.size()) {
            throw std::runtime_error("task layout ids/counts length mismatch");
        }
        for (int c : class_counts) {
            if (c != 2 && c != 3) {
                throw std::runtime_error("task class count must be 2 or 3, got " +
                                         std::to_string(c));
            }
        }
    }
};

/// One prediction step: input encoding, event label, forecast target class
/// per task, and a validity bit. Invalid (masked) steps carry no label
/// semantics and contribute nothing anywhere.
struct Step {
    double time = 0.0;
    std::vector<double> input;
    int label = 0;  // 0 or 1
    std::vector<int> forecast_classes;
    bool valid = true;
};

struct EncodedSequence {
    std::string admission_id;
    std::vector<Step> steps;
};

}  // namespace rarecast::data
