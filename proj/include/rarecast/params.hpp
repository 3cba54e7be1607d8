#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "rarecast/matrix.hpp"

namespace rarecast::model {

struct ParamBlock {
    std::string name;
    bool is_bias = false;
    num::Matrix value;
};

/// Named parameter blocks with a stable, insertion-defined order. The same
/// container carries gradients (zeros_like) so block names and shapes always
/// line up between the two.
class ParamSet {
public:
    num::Matrix& add(const std::string& name, num::Matrix value, bool is_bias);

    bool has(const std::string& name) const { return index_.count(name) != 0; }
    num::Matrix& at(const std::string& name);
    const num::Matrix& at(const std::string& name) const;
    bool is_bias(const std::string& name) const;

    std::vector<ParamBlock>& blocks() { return blocks_; }
    const std::vector<ParamBlock>& blocks() const { return blocks_; }
    std::size_t block_count() const { return blocks_.size(); }
    std::size_t total_values() const;

    /// Same names/shapes/bias flags, all values zero.
    ParamSet zeros_like() const;

    void fill(double value);
    /// Blockwise += ; other must have identical names and shapes.
    void accumulate(const ParamSet& other);
    void scale_all(double factor);
    void ensure_finite(const std::string& context) const;

    /// Concatenation of all blocks in order; used by gradient checking.
    std::vector<double> flatten() const;
    void unflatten(const std::vector<double>& flat);

private:
    std::size_t index_of(const std::string& name) const;

    std::vector<ParamBlock> blocks_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace rarecast::model
