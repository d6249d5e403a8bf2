#pragma once

#include <cstddef>
#include <string>

// Data-parallel inner loops used by the DSP, CSP and network code.
// Every operation has a scalar reference implementation plus SIMD
// variants (AVX2 on x86-64, NEON on aarch64) selected at runtime.
// The SIMD variants reorder reductions, so results may differ from
// the scalar path in the last few ulps; equivalence is tested to a
// tight relative tolerance, not bit-exactly.

namespace neurodecode::kernels {

enum class Backend { Scalar, Avx2, Neon };

/// Backend currently used by the dispatched entry points.
Backend active_backend();

/// Force a backend. Throws std::runtime_error if unsupported on this CPU.
void set_backend(Backend b);

bool backend_supported(Backend b);
std::string backend_name(Backend b);

// Dispatched entry points. Initial backend comes from the
// NEURODECODE_KERNEL environment variable (scalar|avx2|neon|auto),
// defaulting to the best supported one.
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* x, std::size_t n);
double sumsq(const double* x, std::size_t n);
void scale(double alpha, double* x, std::size_t n);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* x, std::size_t n);
double sumsq(const double* x, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
// Callable only when backend_supported(Backend::Avx2).
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* x, std::size_t n);
double sumsq(const double* x, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* x, std::size_t n);
double sumsq(const double* x, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
}  // namespace neon
#endif

}  // namespace neurodecode::kernels
