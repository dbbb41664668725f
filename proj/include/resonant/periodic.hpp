#pragma once

// T-periodic solutions as fixed points of the period map, continuation in
// epsilon from the averaging predictor, and linearized fixed-point indices.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "resonant/evolution.hpp"
#include "resonant/resonance.hpp"

namespace resonant {

struct SolveConfig {
  std::vector<double> epsilon_schedule{0.01, 0.1, 0.5, 1.0};
  /// on ||Phi_T(u) - u||_H1
  double newton_tol = 1e-8;
  int max_newton = 30;
  double gmres_tol = 1e-10;
  int gmres_maxdim = 40;
  /// 0 means "not set"; continuation then refuses to run
  double apriori_R0 = 0.0;
  double fd_step = 1e-6;
  int arnoldi_dim = 30;
  /// eigenvalues of DPhi_T this close to 1 make the index undefined
  double unit_tol = 1e-6;
  IntegratorConfig integrator;
};

/// Throws PreconditionError naming the offending field.
void validate(const SolveConfig& cfg);

struct PeriodicReport {
  Field fixed_point;
  double residual = 0.0;
  /// ||Phi_T(u*) - u*||_H1 recomputed with half the time step; a
  /// discretization indicator, not a convergence test.
  double residual_half_dt = 0.0;
  double epsilon = 0.0;
  bool converged = false;
  int iterations = 0;
  double h1_norm = 0.0;
  std::optional<int> index_local;
  bool monodromy_unit_eigen = false;
  std::vector<std::complex<double>> monodromy_leading_eigs;
  bool apriori_ok = true;
  /// H1 distance to the averaging predictor, when one was used.
  std::optional<double> predictor_distance;
  std::string status;
};

/// Newton-Krylov on u - Phi_T(u). Throws ConvergenceError when Newton or
/// GMRES gives up; a NumericalError from blow-up propagates.
PeriodicReport find_periodic(const DiscreteOperator& op, const Nonlinearity& nl, const SpectralData& sd,
                             const SolveConfig& cfg, const Field& u0_guess, double epsilon);

/// Sign of det(I - DPhi_T(u*)) as (-1)^nu, nu = number of real monodromy
/// eigenvalues above 1. Fills the monodromy fields of `report`.
std::optional<int> local_index(const DiscreteOperator& op, const Nonlinearity& nl, const SolveConfig& cfg,
                               PeriodicReport& report);

/// Follows the epsilon schedule starting from the lifted zero of Fbar with
/// smallest norm. Requires a defined, nonzero degree certificate.
std::vector<PeriodicReport> continue_in_epsilon(const DiscreteOperator& op, const Nonlinearity& nl,
                                                const SpectralData& sd, const SolveConfig& cfg,
                                                const DegreeResult& certificate);

struct IndexCheck {
  double epsilon = 0.0;
  double ball_radius = 0.0;
  std::vector<PeriodicReport> fixed_points;
  int index_sum = 0;
  bool all_defined = true;
  int m_minus = 0;
  int degree = 0;
  /// (-1)^m_minus * degree
  int expected = 0;
  bool matches = false;
};

/// Solves from every lifted zero of Fbar, keeps distinct fixed points whose
/// kernel coordinates lie inside the ball, and sums their local indices.
IndexCheck index_check(const DiscreteOperator& op, const Nonlinearity& nl, const SpectralData& sd,
                       const SolveConfig& cfg, const DegreeResult& certificate, double epsilon,
                       double ball_radius);

}  // namespace resonant
