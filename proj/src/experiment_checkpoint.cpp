#include <cstring>
#include <fstream>
#include <stdexcept>

#include "rarecast/experiment.hpp"

namespace rarecast::experiment {
namespace {

constexpr char kCheckpointMagic[8] = {'R', 'A', 'R', 'E', 'C', 'K', 'P', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& in, const std::string& path) {
    std::uint64_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
        throw std::runtime_error("unexpected end of file in " + path);
    }
    return v;
}

void write_doubles(std::ostream& out, const num::Matrix& m) {
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(m.size() * sizeof(double)));
}

void read_doubles(std::istream& in, num::Matrix& m, const std::string& path) {
    if (!in.read(reinterpret_cast<char*>(m.data()),
                 static_cast<std::streamsize>(m.size() * sizeof(double)))) {
        throw std::runtime_error("unexpected end of file in " + path);
    }
}

nlohmann::json matrix_header(const std::string& name, const num::Matrix& m, bool bias) {
    nlohmann::json j;
    j["name"] = name;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["bias"] = bias;
    return j;
}

}  // namespace

void save_checkpoint(const std::string& path, const model::ParamSet& params,
                     const optim::AdamWState* opt_state, const nlohmann::json& meta) {
    nlohmann::json header;
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& block : params.blocks()) {
        blocks.push_back(matrix_header(block.name, block.value, block.is_bias));
    }
    header["blocks"] = std::move(blocks);
    header["meta"] = meta;
    if (opt_state) {
        nlohmann::json opt;
        opt["t"] = opt_state->t;
        nlohmann::json moments = nlohmann::json::array();
        for (const auto& [name, m] : opt_state->m) {
            if (!opt_state->v.count(name)) {
                throw std::runtime_error("checkpoint: optimizer moment mismatch for " + name);
            }
            moments.push_back(matrix_header(name, m, false));
        }
        opt["moments"] = std::move(moments);
        header["opt"] = std::move(opt);
    } else {
        header["opt"] = nullptr;
    }

    const std::string header_text = header.dump();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    write_u64(out, header_text.size());
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    for (const auto& block : params.blocks()) write_doubles(out, block.value);
    if (opt_state) {
        for (const auto& [name, m] : opt_state->m) {
            write_doubles(out, m);
            write_doubles(out, opt_state->v.at(name));
        }
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
        throw std::runtime_error(path + ": not a checkpoint file");
    }
    const std::uint64_t header_len = read_u64(in, path);
    std::string header_text(header_len, '\0');
    if (!in.read(header_text.data(), static_cast<std::streamsize>(header_len))) {
        throw std::runtime_error("unexpected end of file in " + path);
    }
    const auto header = nlohmann::json::parse(header_text);

    Checkpoint ckpt;
    ckpt.meta = header.at("meta");
    for (const auto& j : header.at("blocks")) {
        num::Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
        read_doubles(in, m, path);
        ckpt.params.add(j.at("name").get<std::string>(), std::move(m),
                        j.at("bias").get<bool>());
    }
    const auto& opt = header.at("opt");
    if (!opt.is_null()) {
        ckpt.has_opt_state = true;
        ckpt.opt_state.t = opt.at("t").get<std::uint64_t>();
        for (const auto& j : opt.at("moments")) {
            const auto name = j.at("name").get<std::string>();
            num::Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
            num::Matrix v(m.rows(), m.cols());
            read_doubles(in, m, path);
            read_doubles(in, v, path);
            ckpt.opt_state.m.emplace(name, std::move(m));
            ckpt.opt_state.v.emplace(name, std::move(v));
        }
    }
    return ckpt;
}

}  // namespace rarecast::experiment
