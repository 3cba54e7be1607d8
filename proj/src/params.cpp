#include "rarecast/params.hpp"

#include <stdexcept>

#include "rarecast/kernels.hpp"

namespace rarecast::model {

num::Matrix& ParamSet::add(const std::string& name, num::Matrix value, bool is_bias) {
    if (has(name)) throw std::runtime_error("duplicate parameter block: " + name);
    index_.emplace(name, blocks_.size());
    blocks_.push_back(ParamBlock{name, is_bias, std::move(value)});
    return blocks_.back().value;
}

std::size_t ParamSet::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::runtime_error("unknown parameter block: " + name);
    return it->second;
}

num::Matrix& ParamSet::at(const std::string& name) { return blocks_[index_of(name)].value; }

const num::Matrix& ParamSet::at(const std::string& name) const {
    return blocks_[index_of(name)].value;
}

bool ParamSet::is_bias(const std::string& name) const {
    return blocks_[index_of(name)].is_bias;
}

std::size_t ParamSet::total_values() const {
    std::size_t n = 0;
    for (const ParamBlock& b : blocks_) n += b.value.size();
    return n;
}

ParamSet ParamSet::zeros_like() const {
    ParamSet out;
    for (const ParamBlock& b : blocks_) {
        out.add(b.name, num::Matrix(b.value.rows(), b.value.cols()), b.is_bias);
    }
    return out;
}

void ParamSet::fill(double value) {
    for (ParamBlock& b : blocks_) {
        for (std::size_t i = 0; i < b.value.size(); ++i) b.value.data()[i] = value;
    }
}

void ParamSet::accumulate(const ParamSet& other) {
    if (other.block_count() != block_count()) {
        throw std::runtime_error("accumulate: block count mismatch");
    }
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
        ParamBlock& dst = blocks_[k];
        const ParamBlock& src = other.blocks_[k];
        if (src.name != dst.name || !src.value.same_shape(dst.value)) {
            throw std::runtime_error("accumulate: mismatch at block " + dst.name);
        }
        num::kernels::active().axpy(dst.value.data(), src.value.data(), 1.0,
                                    dst.value.size());
    }
}

void ParamSet::scale_all(double factor) {
    for (ParamBlock& b : blocks_) {
        num::kernels::active().scale(b.value.data(), b.value.data(), factor,
                                     b.value.size());
    }
}

void ParamSet::ensure_finite(const std::string& context) const {
    for (const ParamBlock& b : blocks_) b.value.ensure_finite(context + " block " + b.name);
}

std::vector<double> ParamSet::flatten() const {
    std::vector<double> flat;
    flat.reserve(total_values());
    for (const ParamBlock& b : blocks_) {
        flat.insert(flat.end(), b.value.data(), b.value.data() + b.value.size());
    }
    return flat;
}

void ParamSet::unflatten(const std::vector<double>& flat) {
    if (flat.size() != total_values()) {
        throw std::runtime_error("unflatten: expected " + std::to_string(total_values()) +
                                 " values, got " + std::to_string(flat.size()));
    }
    std::size_t off = 0;
    for (ParamBlock& b : blocks_) {
        for (std::size_t i = 0; i < b.value.size(); ++i) b.value.data()[i] = flat[off + i];
        off += b.value.size();
    }
}

}  // namespace rarecast::model
