#include "rarecast/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace rarecast::num::kernels {
namespace {

const Table* select_initial() {
    const char* force = std::getenv("RARECAST_KERNELS");
    if (force != nullptr) {
        if (std::strcmp(force, "scalar") == 0) return &scalar_table();
        if (std::strcmp(force, "avx2") == 0 && avx2_table() != nullptr) {
            return avx2_table();
        }
        return &scalar_table();
    }
    if (avx2_table() != nullptr) return avx2_table();
    return &scalar_table();
}

const Table*& active_slot() {
    static const Table* current = select_initial();
    return current;
}

}  // namespace

const Table& active() { return *active_slot(); }

void set_active(const Table& table) { active_slot() = &table; }

}  // namespace rarecast::num::kernels
