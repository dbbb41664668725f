#include "resonant/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "resonant/krylov.hpp"
#include "resonant/simd.hpp"

namespace resonant {

void validate_config(const IntegratorConfig& cfg, double period) {
  if (!(cfg.dt > 0.0)) throw PreconditionError("integrator: dt must be positive");
  if (cfg.dt > period / 16.0 * (1.0 + 1e-12))
    throw PreconditionError("integrator: dt must not exceed T/16");
  if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0)) throw PreconditionError("integrator: epsilon must lie in [0,1]");
  if (cfg.record_every < 1) throw PreconditionError("integrator: record_every must be >= 1");
}

Forcing nemytskii_forcing(const Nonlinearity& nl, const Grid& grid) {
  auto pts = std::make_shared<const std::vector<Point>>(node_points(grid));
  return [nl, pts](double t, std::span<const double> u, std::span<double> out) {
    eval_nemytskii(nl, t, *pts, u, out);
  };
}

namespace {
constexpr int kMaxHalvings = 4;
constexpr int kMaxKrylovSplits = 12;
using Ldlt = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>;
}  // namespace

struct Propagator::Impl {
  DiscreteOperator op;
  Forcing forcing;
  // factorizations of I + (dt / 2^(k+1)) A for k = 0..levels-1
  std::vector<std::unique_ptr<Ldlt>> cn;
};

Propagator::Propagator(const DiscreteOperator& op, Forcing forcing, const IntegratorConfig& cfg)
    : impl_(std::make_unique<Impl>()), cfg_(cfg) {
  if (!(cfg.dt > 0.0)) throw PreconditionError("integrator: dt must be positive");
  if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0)) throw PreconditionError("integrator: epsilon must lie in [0,1]");
  impl_->op = op;
  impl_->forcing = std::move(forcing);
  if (cfg.scheme == Scheme::imex_cn) {
    const int levels = cfg.substep_tolerance > 0.0 ? kMaxHalvings + 1 : 1;
    const Eigen::SparseMatrix<double> a = op.to_eigen();
    Eigen::SparseMatrix<double> id(a.rows(), a.cols());
    id.setIdentity();
    for (int k = 0; k < levels; ++k) {
      const double half = cfg.dt / std::pow(2.0, k + 1);
      auto f = std::make_unique<Ldlt>();
      f->compute(id + half * a);
      if (f->info() != Eigen::Success) throw NumericalError("integrator: Crank-Nicolson factorization failed");
      impl_->cn.push_back(std::move(f));
    }
  }
}

Propagator::~Propagator() = default;
Propagator::Propagator(Propagator&&) noexcept = default;
Propagator& Propagator::operator=(Propagator&&) noexcept = default;

const DiscreteOperator& Propagator::op() const { return impl_->op; }

Field Propagator::run(const Field& u0, double t_end, Trajectory* traj) const {
  if (!(t_end > 0.0)) throw PreconditionError("integrate: t_end must be positive");
  if (!u0.all_finite()) throw PreconditionError("integrate: initial state is not finite");
  if (!(u0.grid == impl_->op.grid())) throw PreconditionError("integrate: grid mismatch");
  const DiscreteOperator& op = impl_->op;
  const std::size_t n = u0.size();
  const double eps = cfg_.epsilon;
  const bool forced = eps != 0.0 && static_cast<bool>(impl_->forcing);
  std::vector<double> au(n), f0(n), f1(n), rhs(n), pred(n);

  auto cn_solve = [&](std::span<const double> u, double t, double dt, const Ldlt& solver, std::span<double> out) {
    op.apply(u, au);
    std::copy(u.begin(), u.end(), rhs.begin());
    simd::axpy(-0.5 * dt, au, rhs);
    if (forced) {
      impl_->forcing(t, u, f0);
      std::copy(rhs.begin(), rhs.end(), pred.begin());
      simd::axpy(dt * eps, f0, pred);
      Eigen::Map<const Eigen::VectorXd> b(pred.data(), static_cast<Eigen::Index>(n));
      Eigen::VectorXd ustar = solver.solve(b);
      impl_->forcing(t + dt, std::span<const double>(ustar.data(), n), f1);
      simd::axpy(0.5 * dt * eps, f0, rhs);
      simd::axpy(0.5 * dt * eps, f1, rhs);
    }
    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(n));
    Eigen::VectorXd x = solver.solve(b);
    std::copy(x.data(), x.data() + n, out.begin());
  };
  auto cn_step = [&](std::span<const double> u, double t, int level, std::span<double> out) {
    cn_solve(u, t, cfg_.dt / std::pow(2.0, level), *impl_->cn[level], out);
  };

  krylov::LinearMap amap = [&op](std::span<const double> x, std::span<double> y) { op.apply(x, y); };
  krylov::ActionOptions kopts{cfg_.krylov_tol, cfg_.krylov_max_dim};

  // exponential Euler over [t, t+dt], splitting on Krylov non-convergence
  std::function<void(std::vector<double>&, double, double, int)> ee_step =
      [&](std::vector<double>& u, double t, double dt, int depth) {
        auto e = krylov::symmetric_action(amap, u, dt, krylov::PhiKind::exp, kopts);
        krylov::ActionResult p;
        std::vector<double> f;
        if (forced) {
          f.resize(n);
          impl_->forcing(t, u, f);
          p = krylov::symmetric_action(amap, f, dt, krylov::PhiKind::phi1, kopts);
        }
        if ((!e.converged || (forced && !p.converged)) && depth < kMaxKrylovSplits) {
          ee_step(u, t, 0.5 * dt, depth + 1);
          ee_step(u, t + 0.5 * dt, 0.5 * dt, depth + 1);
          return;
        }
        if (!e.converged || (forced && !p.converged))
          throw ConvergenceError("integrate: Krylov exponential did not converge");
        u = std::move(e.y);
        if (forced) simd::axpy(dt * eps, p.y, u);
      };

  std::vector<double> tmp(n), half(n);
  std::function<void(std::vector<double>&, double, int)> adaptive_cn = [&](std::vector<double>& u, double t,
                                                                            int level) {
    cn_step(u, t, level, tmp);
    if (cfg_.substep_tolerance <= 0.0 || level >= kMaxHalvings) {
      u = tmp;
      return;
    }
    std::vector<double> full = tmp;
    const double dt = cfg_.dt / std::pow(2.0, level);
    std::vector<double> h = u;
    cn_step(h, t, level + 1, half);
    cn_step(half, t + 0.5 * dt, level + 1, tmp);
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diff += (full[i] - tmp[i]) * (full[i] - tmp[i]);
      scale += tmp[i] * tmp[i];
    }
    if (std::sqrt(diff) <= cfg_.substep_tolerance * (1.0 + std::sqrt(scale))) {
      u = tmp;
      return;
    }
    adaptive_cn(u, t, level + 1);
    adaptive_cn(u, t + 0.5 * dt, level + 1);
  };

  Field u = u0;
  const int steps = std::max(1, static_cast<int>(std::ceil(t_end / cfg_.dt - 1e-9)));
  const double dt_last = t_end - (steps - 1) * cfg_.dt;
  double h1max = norm_h1(u);
  if (traj) {
    traj->times = {0.0};
    traj->states = {u};
  }
  for (int s = 0; s < steps; ++s) {
    const double t = s * cfg_.dt;
    const double dt = s + 1 == steps ? dt_last : cfg_.dt;
    if (cfg_.scheme == Scheme::exp_euler) {
      ee_step(u.values, t, dt, 0);
    } else if (std::abs(dt - cfg_.dt) <= 1e-12 * cfg_.dt) {
      adaptive_cn(u.values, t, 0);
    } else {
      // a short final step gets its own factorization
      const Eigen::SparseMatrix<double> a = op.to_eigen();
      Eigen::SparseMatrix<double> id(a.rows(), a.cols());
      id.setIdentity();
      Ldlt last(id + 0.5 * dt * a);
      cn_solve(u.values, t, dt, last, tmp);
      u.values = tmp;
    }
    const double h1 = norm_h1(u);
    if (!std::isfinite(h1) || h1 > cfg_.blowup_h1) {
      std::ostringstream os;
      os << "integrate: blow-up guard tripped at t=" << t + dt << " (H1 norm " << h1 << ")";
      throw NumericalError(os.str());
    }
    h1max = std::max(h1max, h1);
    if (traj && ((s + 1) % cfg_.record_every == 0 || s + 1 == steps)) {
      traj->times.push_back(s + 1 == steps ? t_end : t + dt);
      traj->states.push_back(u);
    }
  }
  if (traj) traj->h1_norm_max = h1max;
  return u;
}

Field Propagator::advance(const Field& u0, double t_end) const { return run(u0, t_end, nullptr); }

Trajectory Propagator::integrate(const Field& u0, double t_end) const {
  Trajectory traj;
  run(u0, t_end, &traj);
  return traj;
}

Trajectory integrate(const DiscreteOperator& op, const Nonlinearity& nl, const Field& u0, double t_end,
                     const IntegratorConfig& cfg) {
  validate_config(cfg, nl.period);
  Propagator p(op, nemytskii_forcing(nl, op.grid()), cfg);
  return p.integrate(u0, t_end);
}

Field translation_operator(const DiscreteOperator& op, const Nonlinearity& nl, const IntegratorConfig& cfg,
                           const Field& u0) {
  validate_config(cfg, nl.period);
  Propagator p(op, nemytskii_forcing(nl, op.grid()), cfg);
  return p.advance(u0, nl.period);
}

namespace {

Field kernel_part(const SpectralData& sd, const Field& u) {
  const auto c = project_kernel(sd, u);
  return reconstruct(sd, c);
}

void check_homotopy(const SpectralData& sd, const HomotopyConfig& hcfg) {
  if (sd.kernel_dim == 0) throw PreconditionError("homotopy_G: kernel is trivial");
  if (!(hcfg.mu >= 0.0 && hcfg.mu <= 1.0)) throw PreconditionError("homotopy_G: mu must lie in [0,1]");
  if (hcfg.quadrature_nodes < 1) throw PreconditionError("homotopy_G: quadrature_nodes must be >= 1");
}

void homotopy_apply(const Nonlinearity& nl, const SpectralData& sd, const HomotopyConfig& hcfg,
                    const std::vector<Point>& pts, double t, const Field& u, Field& out) {
  const double mu = hcfg.mu;
  if (mu == 0.0) {
    eval_nemytskii(nl, t, pts, u.span(), out.span());
    return;
  }
  const Field w = linear_combination(mu, kernel_part(sd, u), 1.0 - mu, u);
  Field avg(u.grid), tmp(u.grid);
  const int q = hcfg.quadrature_nodes;
  // composite trapezoid on a periodic integrand: equal weights at s_j = jT/q
  for (int j = 0; j < q; ++j) {
    eval_nemytskii(nl, nl.period * j / q, pts, w.span(), tmp.span());
    simd::axpy(1.0 / q, tmp.span(), avg.span());
  }
  out = kernel_part(sd, avg);
  if (mu != 1.0) {
    eval_nemytskii(nl, t, pts, w.span(), tmp.span());
    simd::axpby(1.0 - mu, tmp.span(), mu, out.span());
  }
}

}  // namespace

Field homotopy_G(const Nonlinearity& nl, const SpectralData& sd, const HomotopyConfig& hcfg, double t,
                 const Field& u) {
  check_homotopy(sd, hcfg);
  Field out(u.grid);
  homotopy_apply(nl, sd, hcfg, node_points(u.grid), t, u, out);
  return out;
}

Forcing homotopy_forcing(const Nonlinearity& nl, const SpectralData& sd, const HomotopyConfig& hcfg) {
  check_homotopy(sd, hcfg);
  const Grid grid = sd.kernel_basis.front().grid;
  auto pts = std::make_shared<const std::vector<Point>>(node_points(grid));
  return [nl, sd, hcfg, pts, grid](double t, std::span<const double> u, std::span<double> out) {
    Field uf(grid, std::vector<double>(u.begin(), u.end()));
    Field res(grid);
    homotopy_apply(nl, sd, hcfg, *pts, t, uf, res);
    std::copy(res.values.begin(), res.values.end(), out.begin());
  };
}

double homotopy_eta(const HomotopyConfig& a, const HomotopyConfig& b) {
  return std::abs(a.rho(a.mu) - b.rho(b.mu));
}

double tail_mass(const Field& u, double radius) {
  const Grid& g = u.grid;
  if (!(radius > 0.0) || !(radius < g.half_width()))
    throw PreconditionError("tail_mass: radius must lie in (0, half_width)");
  const auto m = static_cast<std::size_t>(g.points_per_axis());
  const double h = g.spacing();
  // first index with x > r and last index with x < -r along an axis
  auto outside_range = [&](double r, std::size_t& lo_end, std::size_t& hi_begin) {
    // nodes [0, lo_end) have x < -r, nodes [hi_begin, m) have x > r
    lo_end = 0;
    while (lo_end < m && g.coordinate(static_cast<int>(lo_end)) < -r) ++lo_end;
    hi_begin = m;
    while (hi_begin > lo_end && g.coordinate(static_cast<int>(hi_begin - 1)) > r) --hi_begin;
  };
  double s = 0.0;
  const std::span<const double> v = u.span();
  if (g.dimension() == 1) {
    std::size_t lo, hi;
    outside_range(radius, lo, hi);
    s = simd::sum_squares(v.subspan(0, lo)) + simd::sum_squares(v.subspan(hi, m - hi));
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      const double x = g.coordinate(static_cast<int>(i));
      const auto row = v.subspan(i * m, m);
      if (std::abs(x) > radius) {
        s += simd::sum_squares(row);
        continue;
      }
      std::size_t lo, hi;
      outside_range(std::sqrt(std::max(0.0, radius * radius - x * x)), lo, hi);
      s += simd::sum_squares(row.subspan(0, lo)) + simd::sum_squares(row.subspan(hi, m - hi));
    }
  }
  (void)h;
  return g.cell_volume() * s;
}

TailReport verify_tail_bound(const Trajectory& traj, double v_bar, std::span<const double> radii, double R) {
  if (traj.states.empty()) throw PreconditionError("verify_tail_bound: empty trajectory");
  for (const Field& u : traj.states)
    if (norm_h1(u) > R * (1.0 + 1e-12))
      throw PreconditionError("verify_tail_bound: trajectory leaves the H1 ball of radius R");
  TailReport rep;
  rep.bound_R = R;
  rep.radii.assign(radii.begin(), radii.end());
  for (double n : radii) {
    double a = 0.0;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
      const double excess = tail_mass(traj.states[i], n) - R * R * std::exp(-2.0 * v_bar * traj.times[i]);
      a = std::max(a, excess);
    }
    rep.alpha.push_back(a);
  }
  for (std::size_t i = 1; i < rep.alpha.size(); ++i)
    if (rep.radii[i] > rep.radii[i - 1] && rep.alpha[i] > rep.alpha[i - 1]) rep.nonincreasing = false;
  rep.smallest = rep.alpha.empty() ? 0.0 : *std::min_element(rep.alpha.begin(), rep.alpha.end());
  return rep;
}

PairwiseTailReport verify_pairwise_tail(const Trajectory& a, const Trajectory& b, double v_bar,
                                        std::span<const double> radii, double eta) {
  if (a.times.size() != b.times.size() || a.times.empty())
    throw PreconditionError("verify_pairwise_tail: trajectories have different sampling");
  for (std::size_t i = 0; i < a.times.size(); ++i)
    if (std::abs(a.times[i] - b.times[i]) > 1e-12 * (1.0 + std::abs(a.times[i])))
      throw PreconditionError("verify_pairwise_tail: trajectories have different sampling");
  if (radii.empty()) throw PreconditionError("verify_pairwise_tail: no radii");
  PairwiseTailReport rep;
  rep.radii.assign(radii.begin(), radii.end());
  rep.eta = eta;
  const Field d0 = linear_combination(1.0, a.states[0], -1.0, b.states[0]);
  const double init = inner_l2(d0, d0);
  std::vector<std::vector<double>> excess(radii.size());
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    const Field d = linear_combination(1.0, a.states[i], -1.0, b.states[i]);
    const double decay = std::exp(-2.0 * v_bar * a.times[i]) * init;
    for (std::size_t k = 0; k < radii.size(); ++k) excess[k].push_back(tail_mass(d, radii[k]) - decay);
  }
  const std::size_t far = static_cast<std::size_t>(std::max_element(radii.begin(), radii.end()) - radii.begin());
  if (eta > 0.0) {
    const double worst = *std::max_element(excess[far].begin(), excess[far].end());
    rep.Q = std::max(0.0, worst) / eta;
  }
  for (std::size_t k = 0; k < radii.size(); ++k) {
    double al = 0.0;
    for (double e : excess[k]) al = std::max(al, e - rep.Q * eta);
    rep.alpha.push_back(al);
  }
  for (std::size_t i = 1; i < rep.alpha.size(); ++i)
    if (rep.radii[i] > rep.radii[i - 1] && rep.alpha[i] > rep.alpha[i - 1]) rep.nonincreasing = false;
  return rep;
}

}  // namespace resonant
