#include "impulsemc/kernels.hpp"

#include <atomic>
#include <stdexcept>
#include <string>

namespace imc::kernels {

const Ops* avx2_ops_impl();  // defined in kernels_avx2.cpp (or returns nullptr)

const Ops* avx2_ops() {
#if defined(__x86_64__) || defined(_M_X64)
    static const bool supported =
        __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? avx2_ops_impl() : nullptr;
#else
    return nullptr;
#endif
}

namespace {
std::atomic<const Ops*> g_active{nullptr};

const Ops& best_available() {
    if (const Ops* v = avx2_ops()) return *v;
    return scalar_ops();
}
}  // namespace

const Ops& select(Backend backend) {
    const Ops* ops = nullptr;
    switch (backend) {
        case Backend::kAuto: ops = &best_available(); break;
        case Backend::kScalar: ops = &scalar_ops(); break;
        case Backend::kAvx2:
            ops = avx2_ops();
            if (!ops) throw std::invalid_argument("kernel backend avx2 not available on this CPU");
            break;
    }
    g_active.store(ops, std::memory_order_relaxed);
    return *ops;
}

const Ops& active() {
    const Ops* ops = g_active.load(std::memory_order_relaxed);
    if (!ops) {
        ops = &best_available();
        g_active.store(ops, std::memory_order_relaxed);
    }
    return *ops;
}

Backend parse_backend(std::string_view name) {
    if (name == "auto") return Backend::kAuto;
    if (name == "scalar") return Backend::kScalar;
    if (name == "avx2") return Backend::kAvx2;
    throw std::invalid_argument("unknown kernel backend: " + std::string(name));
}

}  // namespace imc::kernels
