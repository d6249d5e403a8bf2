#include "neurodecode/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>

namespace neurodecode::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sumsq(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void scale(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

}  // namespace scalar

namespace {

struct Table {
  Backend backend;
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*sumsq)(const double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
};

constexpr Table kScalarTable{Backend::Scalar, scalar::dot, scalar::axpy,
                             scalar::sum,     scalar::sumsq, scalar::scale};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Table kAvx2Table{Backend::Avx2, avx2::dot, avx2::axpy,
                           avx2::sum,     avx2::sumsq, avx2::scale};
#endif
#if defined(__aarch64__)
constexpr Table kNeonTable{Backend::Neon, neon::dot, neon::axpy,
                           neon::sum,     neon::sumsq, neon::scale};
#endif

bool cpu_supports(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Table* table_for(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return &kScalarTable;
#if defined(__x86_64__) || defined(_M_X64)
    case Backend::Avx2:
      return &kAvx2Table;
#endif
#if defined(__aarch64__)
    case Backend::Neon:
      return &kNeonTable;
#endif
    default:
      return nullptr;
  }
}

Backend pick_default() {
  if (const char* env = std::getenv("NEURODECODE_KERNEL")) {
    const std::string v(env);
    if (v == "scalar") return Backend::Scalar;
    if (v == "avx2" && cpu_supports(Backend::Avx2)) return Backend::Avx2;
    if (v == "neon" && cpu_supports(Backend::Neon)) return Backend::Neon;
    // unknown value or unsupported request falls through to auto
  }
  if (cpu_supports(Backend::Avx2)) return Backend::Avx2;
  if (cpu_supports(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

std::atomic<const Table*>& active_table() {
  static std::atomic<const Table*> table{table_for(pick_default())};
  return table;
}

}  // namespace

Backend active_backend() { return active_table().load()->backend; }

bool backend_supported(Backend b) { return cpu_supports(b); }

void set_backend(Backend b) {
  if (!cpu_supports(b))
    throw std::runtime_error("kernel backend not supported on this CPU: " +
                             backend_name(b));
  active_table().store(table_for(b));
}

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "?";
}

double dot(const double* a, const double* b, std::size_t n) {
  return active_table().load()->dot(a, b, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active_table().load()->axpy(alpha, x, y, n);
}
double sum(const double* x, std::size_t n) {
  return active_table().load()->sum(x, n);
}
double sumsq(const double* x, std::size_t n) {
  return active_table().load()->sumsq(x, n);
}
void scale(double alpha, double* x, std::size_t n) {
  active_table().load()->scale(alpha, x, n);
}

}  // namespace neurodecode::kernels
