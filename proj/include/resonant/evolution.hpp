#pragma once

// Time integration of u' = -A u + eps F(t, u), the period map u0 -> u(T),
// the averaging homotopy G(t, u, mu), and tail-mass diagnostics.

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "resonant/nonlinearity.hpp"
#include "resonant/spatial.hpp"
#include "resonant/spectrum.hpp"

namespace resonant {

enum class Scheme {
  /// Crank-Nicolson on A, explicit trapezoidal predictor-corrector on F.
  imex_cn,
  /// Exponential Euler; Krylov evaluation of exp(-dt A) and phi1(-dt A).
  exp_euler,
};

struct IntegratorConfig {
  double dt = 1.0 / 64.0;
  Scheme scheme = Scheme::imex_cn;
  double epsilon = 1.0;
  /// > 0 enables step-doubling: a step is replaced by two half steps when
  /// they differ by more than this (relative L2), up to 4 halvings.
  double substep_tolerance = 0.0;
  double krylov_tol = 1e-10;
  int krylov_max_dim = 64;
  double blowup_h1 = 1e6;
  /// Store every k-th state in trajectories.
  int record_every = 1;
};

/// Rejects dt > T/16 and epsilon outside [0, 1].
void validate_config(const IntegratorConfig& cfg, double period);

struct Trajectory {
  std::vector<double> times;
  std::vector<Field> states;
  double h1_norm_max = 0.0;
};

/// out = F(t, u) for the right-hand side -A u + eps * F(t, u).
using Forcing = std::function<void(double t, std::span<const double> u, std::span<double> out)>;

Forcing nemytskii_forcing(const Nonlinearity& nl, const Grid& grid);

/// Integrator bound to one operator, forcing and step configuration.
/// Factorizations are built once; evaluation is const and reentrant.
class Propagator {
 public:
  Propagator(const DiscreteOperator& op, Forcing forcing, const IntegratorConfig& cfg);
  ~Propagator();
  Propagator(Propagator&&) noexcept;
  Propagator& operator=(Propagator&&) noexcept;

  Field advance(const Field& u0, double t_end) const;
  Trajectory integrate(const Field& u0, double t_end) const;

  const IntegratorConfig& config() const { return cfg_; }
  const DiscreteOperator& op() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  IntegratorConfig cfg_;
  Field run(const Field& u0, double t_end, Trajectory* traj) const;
};

Trajectory integrate(const DiscreteOperator& op, const Nonlinearity& nl, const Field& u0, double t_end,
                     const IntegratorConfig& cfg);

/// u0 -> u(T), T = nl.period.
Field translation_operator(const DiscreteOperator& op, const Nonlinearity& nl, const IntegratorConfig& cfg,
                           const Field& u0);

struct HomotopyConfig {
  double mu = 0.0;
  int quadrature_nodes = 64;
  /// Continuity modulus of the mu-dependence; identity by default.
  std::function<double(double)> rho = [](double mu) { return mu; };
};

/// G(t,u,mu) = (1-mu) F(t, w) + (mu/T) int_0^T P F(s, w) ds, w = (1-mu) u + mu P u.
Field homotopy_G(const Nonlinearity& nl, const SpectralData& sd, const HomotopyConfig& hcfg, double t,
                 const Field& u);
Forcing homotopy_forcing(const Nonlinearity& nl, const SpectralData& sd, const HomotopyConfig& hcfg);

/// eta(mu1, mu2) = |rho(mu1) - rho(mu2)| (constant diffusion coefficients).
double homotopy_eta(const HomotopyConfig& a, const HomotopyConfig& b);

/// h^N sum over nodes with |x| > radius of u^2.
double tail_mass(const Field& u, double radius);

struct TailReport {
  std::vector<double> radii;
  std::vector<double> alpha;
  double bound_R = 0.0;
  bool nonincreasing = true;
  double smallest = 0.0;
};

/// alpha(n) = max_t (tail_mass(u(t), n) - R^2 exp(-2 v_bar t))_+.
TailReport verify_tail_bound(const Trajectory& traj, double v_bar, std::span<const double> radii, double R);

struct PairwiseTailReport {
  std::vector<double> radii;
  std::vector<double> alpha;
  double Q = 0.0;
  double eta = 0.0;
  bool nonincreasing = true;
};

/// Fits Q at the largest radius (where alpha is smallest), then reports the
/// remaining alpha(n) = max_t (tail(u1-u2, n) - e^{-2 v_bar t}|u1(0)-u2(0)|^2 - Q eta)_+.
PairwiseTailReport verify_pairwise_tail(const Trajectory& a, const Trajectory& b, double v_bar,
                                        std::span<const double> radii, double eta);

}  // namespace resonant
