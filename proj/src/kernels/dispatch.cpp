#include "gammaz/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace gammaz::kernels {

namespace {

const Table* pick() {
    const char* force = std::getenv("GAMMAZ_KERNELS");
    if (force && std::strcmp(force, "scalar") == 0) return &scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
    if (force && std::strcmp(force, "avx2") == 0) return &avx2_table();
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &avx2_table();
#endif
    return &scalar_table();
}

} // namespace

const Table& active_table() {
    static const Table* chosen = pick();
    return *chosen;
}

} // namespace gammaz::kernels
