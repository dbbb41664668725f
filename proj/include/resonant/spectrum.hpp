#pragma once

// Low-lying spectrum of the discrete operator: isolated eigenvalues below
// the essential-spectrum threshold v_bar, the kernel N = Ker A with an
// L2-orthonormal basis, and the projections onto N and onto the span of the
// negative eigenvectors.

#include <string>
#include <vector>

#include "resonant/spatial.hpp"

namespace resonant {

struct SpectrumOptions {
  int max_krylov = 400;
  /// Convergence of Ritz values of (A - sigma)^{-1}, relative.
  double ritz_tol = 1e-12;
  int max_runs = 8;
  /// Eigenvalues closer than this are treated as one degenerate group.
  double degeneracy_tol = 1e-9;
  std::uint64_t seed = 0x5eed;
};

struct SpectralData {
  /// Isolated eigenvalues (< v_bar - zero_tol), ascending, with their
  /// L2-orthonormal eigenvectors.
  std::vector<double> eigenvalues;
  std::vector<Field> eigenvectors;
  /// Computed eigenvalues at or above the threshold, reported only.
  std::vector<double> above_threshold;

  std::vector<Field> kernel_basis;
  std::vector<Field> negative_basis;
  int m_minus = 0;
  int kernel_dim = 0;
  double zero_tol = 0.0;
  double v_bar_infinity = 0.0;
  double recentering_shift = 0.0;
  /// Largest ||A psi - lambda psi||_L2 / (|lambda| + 1) over isolated pairs.
  double max_relative_residual = 0.0;
  /// Every requested eigenvalue was below v_bar: more may exist.
  bool count_exhausted = false;
  /// Some |lambda| lies within a decade of zero_tol on either side.
  bool ill_separated = false;
  std::vector<std::string> warnings;
};

/// The `count` algebraically smallest eigenpairs by shift-invert Lanczos
/// (shift below the Gershgorin bound) with full reorthogonalization and
/// restarts that lock converged vectors, followed by inverse-iteration
/// refinement. Throws ConvergenceError if nothing converges.
SpectralData compute_low_spectrum(const DiscreteOperator& op, int count, double zero_tol,
                                  const SpectrumOptions& opts = {});

struct Recentered {
  DiscreteOperator op;
  SpectralData spectrum;
};

/// Shifts the operator by the eigenvalue closest to zero when it lies within
/// `window`, so the discrete kernel sits at 0, and reclassifies. Returns the
/// inputs unchanged otherwise.
Recentered recenter(const DiscreteOperator& op, const SpectralData& sd, double window);

/// c_k = (u, phi_k)_L2. Requires kernel_dim >= 1.
std::vector<double> project_kernel(const SpectralData& sd, const Field& u);
/// sum_k c_k phi_k
Field reconstruct(const SpectralData& sd, std::span<const double> coords);
/// Orthogonal projection onto span(negative_basis); zero when m_minus = 0.
Field project_negative(const SpectralData& sd, const Field& u);

}  // namespace resonant
