#include "esalloc/simd.hpp"

#include <cstdlib>
#include <cstring>

namespace esalloc::kernels {

namespace {

struct Selection {
    const Ops* ops;
    const char* name;
};

Selection select() {
    const char* env = std::getenv("ESALLOC_SIMD");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return {&scalar_ops(), "scalar"};
        if (std::strcmp(env, "avx2") == 0) {
            if (const Ops* ops = avx2_ops()) return {ops, "avx2"};
            return {&scalar_ops(), "scalar"}; // requested but unavailable
        }
    }
    if (const Ops* ops = avx2_ops()) return {ops, "avx2"};
    return {&scalar_ops(), "scalar"};
}

const Selection& selection() {
    static const Selection sel = select();
    return sel;
}

} // namespace

const Ops& active() { return *selection().ops; }

std::string_view active_name() { return selection().name; }

} // namespace esalloc::kernels
