#include "graf/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace graf::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(GRAF_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend best_backend() noexcept {
    if (backend_supported(Backend::avx2)) return Backend::avx2;
    if (backend_supported(Backend::neon)) return Backend::neon;
    return Backend::scalar;
}

Backend initial_backend() {
    if (const char* env = std::getenv("GRAF_KERNELS"); env != nullptr && *env != '\0') {
        Backend b = parse_backend(env);
        if (!backend_supported(b)) {
            throw std::runtime_error("GRAF_KERNELS=" + std::string(env) + " is not supported on this CPU");
        }
        return b;
    }
    return best_backend();
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> ptr{&table_for(initial_backend())};
    return ptr;
}

std::atomic<Backend>& current_backend() {
    static std::atomic<Backend> b{initial_backend()};
    return b;
}

}  // namespace

bool backend_supported(Backend b) noexcept {
    switch (b) {
        case Backend::scalar: return true;
        case Backend::avx2: return cpu_has_avx2();
        case Backend::neon:
#if defined(GRAF_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& table_for(Backend b) {
    switch (b) {
        case Backend::scalar: return scalar_table();
#if defined(GRAF_HAVE_AVX2)
        case Backend::avx2:
            if (cpu_has_avx2()) return avx2_table();
            break;
#endif
#if defined(GRAF_HAVE_NEON)
        case Backend::neon: return neon_table();
#endif
        default: break;
    }
    throw std::invalid_argument("kernel backend '" + std::string(backend_name(b)) + "' is not available");
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

Backend active_backend() noexcept {
    (void)current();
    return current_backend().load(std::memory_order_acquire);
}

void set_backend(Backend b) {
    const KernelTable& t = table_for(b);
    current().store(&t, std::memory_order_release);
    current_backend().store(b, std::memory_order_release);
}

std::string_view backend_name(Backend b) noexcept {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "unknown";
}

Backend parse_backend(std::string_view name) {
    if (name == "scalar") return Backend::scalar;
    if (name == "avx2") return Backend::avx2;
    if (name == "neon") return Backend::neon;
    throw std::invalid_argument("unknown kernel backend '" + std::string(name) + "'");
}

}  // namespace graf::kernels
