#pragma once

// Data-parallel inner loops used by every module: reductions, vector
// updates and CSR matrix-vector products. A scalar reference table is always
// available; an AVX2/FMA table is selected at runtime when the CPU supports
// it. Set RESONANT_SIMD=scalar (or avx2) to force a table.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace resonant::simd {

/// Borrowed view of a compressed-sparse-row matrix.
struct CsrView {
  std::size_t rows = 0;
  const std::int32_t* row_ptr = nullptr;  // rows + 1 entries
  const std::int32_t* col = nullptr;
  const double* val = nullptr;
};

struct KernelTable {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_squares)(const double* a, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = alpha * x + beta * y
  void (*axpby)(double alpha, const double* x, double beta, double* y, std::size_t n);
  // y = A x
  void (*spmv)(const CsrView& a, const double* x, double* y);
};

const KernelTable& scalar_kernels();

/// nullptr when the AVX2 variant is not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

/// The table every module uses. Chosen once on first use.
const KernelTable& active();

/// Overrides the active table ("scalar" or "avx2"); returns false if the
/// requested variant is unavailable. Not thread-safe; intended for tests and
/// start-up configuration.
bool select(std::string_view name);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double sum_squares(std::span<const double> a) {
  return active().sum_squares(a.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void axpby(double alpha, std::span<const double> x, double beta, std::span<double> y) {
  active().axpby(alpha, x.data(), beta, y.data(), x.size());
}

inline void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) {
  active().spmv(a, x.data(), y.data());
}

}  // namespace resonant::simd
