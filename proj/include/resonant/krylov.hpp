#pragma once

// Matrix-free Krylov methods: restarted GMRES, Lanczos evaluation of
// exp(-tA)v and phi1(-tA)v for symmetric A, and Arnoldi Ritz values.

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace resonant::krylov {

/// y = A x; x and y never alias.
using LinearMap = std::function<void(std::span<const double> x, std::span<double> y)>;

struct GmresOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int restart = 40;
  int max_iterations = 400;
};

struct GmresResult {
  std::vector<double> x;
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;
  /// True when a restart cycle made no progress.
  bool stagnated = false;
};

/// Restarted GMRES(m) with modified Gram-Schmidt and Givens rotations.
GmresResult gmres(const LinearMap& a, std::span<const double> b, std::span<const double> x0,
                  const GmresOptions& opts);

enum class PhiKind { exp, phi1 };

struct ActionOptions {
  double tol = 1e-10;
  int max_dim = 64;
};

struct ActionResult {
  std::vector<double> y;
  bool converged = false;
  int dimension = 0;
  double error_estimate = 0.0;
};

/// y = g(-t A) v with g = exp or phi1(z) = (e^z - 1)/z, for symmetric A,
/// by Lanczos with full reorthogonalization. Happy breakdown makes the
/// result exact up to rounding.
ActionResult symmetric_action(const LinearMap& a, std::span<const double> v, double t, PhiKind kind,
                              const ActionOptions& opts = {});

struct RitzValue {
  std::complex<double> value;
  double residual = 0.0;  // |h_{m+1,m} y_m| for the unit Ritz vector
};

/// Ritz values of a general operator from an m-step Arnoldi process started
/// at v0, sorted by decreasing modulus.
std::vector<RitzValue> arnoldi_ritz(const LinearMap& a, std::span<const double> v0, int m);

double norm2(std::span<const double> v);

}  // namespace resonant::krylov
