#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense double-precision inner loops used by the encoder, scorer and
// trainer. Every routine has a scalar reference implementation; SIMD
// variants are selected once at startup from the CPU features, or forced
// with GRAF_KERNELS=scalar|avx2|neon.
namespace graf::kernels {

enum class Backend { scalar, avx2, neon };

struct KernelTable {
    double (*dot)(const double* x, const double* y, std::size_t n);
    // y += a * x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // y = A x with A row-major (rows x cols)
    void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
};

const KernelTable& scalar_table() noexcept;
#if defined(GRAF_HAVE_AVX2)
const KernelTable& avx2_table() noexcept;
#endif
#if defined(GRAF_HAVE_NEON)
const KernelTable& neon_table() noexcept;
#endif

bool backend_supported(Backend b) noexcept;
Backend active_backend() noexcept;
// Throws std::invalid_argument if the backend is not available on this CPU.
void set_backend(Backend b);
std::string_view backend_name(Backend b) noexcept;
Backend parse_backend(std::string_view name);

const KernelTable& table_for(Backend b);
const KernelTable& active() noexcept;

inline double dot(std::span<const double> x, std::span<const double> y) noexcept {
    return active().dot(x.data(), y.data(), x.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) noexcept {
    active().axpy(a, x.data(), y.data(), x.size());
}

}  // namespace graf::kernels
