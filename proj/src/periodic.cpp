#include "resonant/periodic.hpp"

#include <algorithm>
#include <cmath>

#include "resonant/error.hpp"
#include "resonant/krylov.hpp"
#include "resonant/simd.hpp"

namespace resonant {

void validate(const SolveConfig& cfg) {
  const auto& s = cfg.epsilon_schedule;
  if (s.empty()) throw PreconditionError("solve.epsilon_schedule: must not be empty");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0.0 && s[i] <= 1.0)) throw PreconditionError("solve.epsilon_schedule: entries must lie in (0, 1]");
    if (i > 0 && !(s[i] > s[i - 1])) throw PreconditionError("solve.epsilon_schedule: must be strictly increasing");
  }
  if (!(cfg.newton_tol > 0.0)) throw PreconditionError("solve.newton_tol: must be positive");
  if (cfg.max_newton < 1) throw PreconditionError("solve.max_newton: must be >= 1");
  if (!(cfg.gmres_tol > 0.0)) throw PreconditionError("solve.gmres_tol: must be positive");
  if (cfg.gmres_maxdim < 2) throw PreconditionError("solve.gmres_maxdim: must be >= 2");
  if (!(cfg.fd_step > 0.0)) throw PreconditionError("solve.fd_step: must be positive");
  if (cfg.apriori_R0 < 0.0) throw PreconditionError("solve.apriori_R0: must be positive");
  if (cfg.arnoldi_dim < 4) throw PreconditionError("solve.arnoldi_dim: must be >= 4");
}

namespace {

IntegratorConfig with_eps(IntegratorConfig c, double eps) {
  c.epsilon = eps;
  return c;
}

Field residual_of(const Propagator& p, const Field& u, double T) {
  Field r = p.advance(u, T);
  simd::axpby(1.0, u.span(), -1.0, r.span());  // r = u - Phi(u)
  return r;
}

// DPhi(u) v by forward differences, reusing phi_u = Phi(u)
void monodromy_action(const Propagator& p, const Field& u, const Field& phi_u, double T, double fd_step,
                      std::span<const double> v, std::span<double> out) {
  const double vn = krylov::norm2(v);
  if (vn == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double un = krylov::norm2(u.span());
  const double delta = fd_step * (1.0 + un) / vn;
  Field w = u;
  simd::axpy(delta, v, w.span());
  const Field pw = p.advance(w, T);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (pw[i] - phi_u[i]) / delta;
}

}  // namespace

PeriodicReport find_periodic(const DiscreteOperator& op, const Nonlinearity& nl, const SpectralData& sd,
                             const SolveConfig& cfg, const Field& u0_guess, double epsilon) {
  (void)sd;
  validate(cfg);
  if (!u0_guess.all_finite()) throw PreconditionError("find_periodic: initial guess is not finite");
  if (!(u0_guess.grid == op.grid())) throw PreconditionError("find_periodic: guess lives on another grid");
  const double T = nl.period;
  const IntegratorConfig icfg = with_eps(cfg.integrator, epsilon);
  validate_config(icfg, T);
  const Propagator prop(op, nemytskii_forcing(nl, op.grid()), icfg);

  PeriodicReport rep;
  rep.epsilon = epsilon;
  Field u = u0_guess;
  Field phi = prop.advance(u, T);
  Field r = linear_combination(1.0, u, -1.0, phi);
  double rn = norm_h1(r);
  int it = 0;
  for (; it < cfg.max_newton && rn > cfg.newton_tol; ++it) {
    // (I - DPhi) du = -r
    const krylov::LinearMap jac = [&](std::span<const double> v, std::span<double> y) {
      monodromy_action(prop, u, phi, T, cfg.fd_step, v, y);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = v[i] - y[i];
    };
    std::vector<double> rhs(r.values.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -r[i];
    std::vector<double> x0(rhs.size(), 0.0);
    krylov::GmresOptions go;
    go.rel_tol = cfg.gmres_tol;
    go.restart = cfg.gmres_maxdim;
    go.max_iterations = 10 * cfg.gmres_maxdim;
    const auto gr = krylov::gmres(jac, rhs, x0, go);
    // finite-difference noise caps the attainable GMRES accuracy; an inexact
    // step is fine as long as it reduced the linear residual
    if (!gr.converged && !(gr.residual_norm < 0.5 * krylov::norm2(rhs)))
      throw ConvergenceError("find_periodic: GMRES stagnated at eps=" + std::to_string(epsilon));

    // damped update: accept the first step that lowers the residual
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 12; ++ls) {
      Field un = u;
      simd::axpy(alpha, gr.x, un.span());
      Field pn = prop.advance(un, T);
      Field rnew = linear_combination(1.0, un, -1.0, pn);
      const double nn = norm_h1(rnew);
      if (std::isfinite(nn) && nn < rn) {
        u = std::move(un);
        phi = std::move(pn);
        r = std::move(rnew);
        rn = nn;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  rep.iterations = it;

  // confirm from scratch
  const Field rr = residual_of(prop, u, T);
  rep.residual = norm_h1(rr);
  rep.converged = rep.residual <= cfg.newton_tol;
  if (!rep.converged)
    throw ConvergenceError("find_periodic: no convergence at eps=" + std::to_string(epsilon) +
                           " (residual " + std::to_string(rep.residual) + " after " + std::to_string(it) +
                           " Newton steps)");
  IntegratorConfig half = icfg;
  half.dt = icfg.dt / 2.0;
  const Propagator prop_half(op, nemytskii_forcing(nl, op.grid()), half);
  rep.residual_half_dt = norm_h1(residual_of(prop_half, u, T));
  rep.h1_norm = norm_h1(u);
  rep.fixed_point = std::move(u);
  rep.status = "converged";
  return rep;
}

std::optional<int> local_index(const DiscreteOperator& op, const Nonlinearity& nl, const SolveConfig& cfg,
                               PeriodicReport& report) {
  if (!report.converged) throw PreconditionError("local_index: report is not converged");
  const double T = nl.period;
  const Propagator prop(op, nemytskii_forcing(nl, op.grid()), with_eps(cfg.integrator, report.epsilon));
  const Field& u = report.fixed_point;
  const Field phi = prop.advance(u, T);
  const krylov::LinearMap mono = [&](std::span<const double> v, std::span<double> y) {
    monodromy_action(prop, u, phi, T, cfg.fd_step, v, y);
  };
  const std::size_t n = u.values.size();
  std::vector<double> v0(n);
  // deterministic start with components in every direction
  for (std::size_t i = 0; i < n; ++i) v0[i] = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i) + 0.3);
  const int m = std::min<int>(cfg.arnoldi_dim, static_cast<int>(n));
  const auto ritz = krylov::arnoldi_ritz(mono, v0, m);

  report.monodromy_leading_eigs.clear();
  report.monodromy_unit_eigen = false;
  int nu = 0;
  bool resolved = true;
  for (const auto& rv : ritz) {
    const double mod = std::abs(rv.value);
    if (mod <= 1.0 - 1e-3) continue;
    report.monodromy_leading_eigs.push_back(rv.value);
    // a Ritz value that has not settled cannot be classified
    if (rv.residual > cfg.unit_tol * std::max(1.0, mod)) resolved = false;
    if (std::abs(rv.value - 1.0) <= cfg.unit_tol) report.monodromy_unit_eigen = true;
    if (std::abs(rv.value.imag()) <= 1e-10 * mod && rv.value.real() > 1.0) ++nu;
  }
  if (!resolved) throw ConvergenceError("local_index: leading monodromy eigenvalues not resolved by Arnoldi");
  if (report.monodromy_unit_eigen) {
    report.index_local.reset();
    return std::nullopt;
  }
  report.index_local = (nu % 2 == 0) ? 1 : -1;
  return report.index_local;
}

namespace {

const DegreeZero& smallest_zero(const DegreeResult& cert) {
  return *std::min_element(cert.zeros.begin(), cert.zeros.end(), [](const DegreeZero& a, const DegreeZero& b) {
    double na = 0.0, nb = 0.0;
    for (double v : a.coords) na += v * v;
    for (double v : b.coords) nb += v * v;
    return na < nb;
  });
}

void require_certificate(const DegreeResult& cert) {
  if (!cert.defined || cert.degree == 0)
    throw PreconditionError("continuation needs a defined, nonzero degree certificate");
  if (cert.zeros.empty()) throw PreconditionError("degree certificate lists no zeros of the averaged map");
}

}  // namespace

std::vector<PeriodicReport> continue_in_epsilon(const DiscreteOperator& op, const Nonlinearity& nl,
                                                const SpectralData& sd, const SolveConfig& cfg,
                                                const DegreeResult& certificate) {
  require_certificate(certificate);
  validate(cfg);
  if (!(cfg.apriori_R0 > 0.0)) throw PreconditionError("solve.apriori_R0: must be set for continuation");
  const Field predictor = reconstruct(sd, smallest_zero(certificate).coords);
  std::vector<PeriodicReport> out;
  Field guess = predictor;
  for (std::size_t k = 0; k < cfg.epsilon_schedule.size(); ++k) {
    const double eps = cfg.epsilon_schedule[k];
    PeriodicReport rep;
    try {
      rep = find_periodic(op, nl, sd, cfg, guess, eps);
    } catch (const Error& e) {
      throw ConvergenceError(std::string(e.what()) + " [continuation at eps=" + std::to_string(eps) + "]");
    }
    rep.predictor_distance = norm_h1(linear_combination(1.0, rep.fixed_point, -1.0, predictor));
    rep.apriori_ok = rep.h1_norm < cfg.apriori_R0;
    guess = rep.fixed_point;
    const bool halt = !rep.apriori_ok;
    if (halt) rep.status = "apriori_bound_exceeded";
    out.push_back(std::move(rep));
    if (halt) break;
  }
  return out;
}

IndexCheck index_check(const DiscreteOperator& op, const Nonlinearity& nl, const SpectralData& sd,
                       const SolveConfig& cfg, const DegreeResult& certificate, double epsilon,
                       double ball_radius) {
  require_certificate(certificate);
  IndexCheck chk;
  chk.epsilon = epsilon;
  chk.ball_radius = ball_radius;
  chk.m_minus = sd.m_minus;
  chk.degree = certificate.degree;
  chk.expected = (sd.m_minus % 2 == 0 ? 1 : -1) * certificate.degree;
  for (const DegreeZero& z : certificate.zeros) {
    const Field predictor = reconstruct(sd, z.coords);
    PeriodicReport rep = find_periodic(op, nl, sd, cfg, predictor, epsilon);
    rep.predictor_distance = norm_h1(linear_combination(1.0, rep.fixed_point, -1.0, predictor));
    const auto c = project_kernel(sd, rep.fixed_point);
    double cn = 0.0;
    for (double v : c) cn += v * v;
    if (std::sqrt(cn) >= ball_radius) continue;
    const bool dup = std::any_of(chk.fixed_points.begin(), chk.fixed_points.end(), [&](const PeriodicReport& q) {
      return norm_h1(linear_combination(1.0, q.fixed_point, -1.0, rep.fixed_point)) < 1e-6 * (1.0 + rep.h1_norm);
    });
    if (dup) continue;
    local_index(op, nl, cfg, rep);
    if (rep.index_local)
      chk.index_sum += *rep.index_local;
    else
      chk.all_defined = false;
    chk.fixed_points.push_back(std::move(rep));
  }
  chk.matches = chk.all_defined && !chk.fixed_points.empty() && chk.index_sum == chk.expected;
  return chk;
}

}  // namespace resonant
