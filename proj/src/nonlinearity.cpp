#include "resonant/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "resonant/simd.hpp"

namespace resonant {
namespace {

std::string describe(double t, const Point& x, double u, int dim) {
  std::ostringstream os;
  os.precision(6);
  os << "t=" << t << " x=(" << x[0];
  if (dim == 2) os << "," << x[1];
  os << ") u=" << u;
  return os.str();
}

void record(HypothesisCheck& c, double excess, double tol, const std::string& sample) {
  ++c.samples;
  if (excess > c.worst_excess) {
    c.worst_excess = excess;
    c.worst_sample = sample;
  }
  if (excess > tol) c.passed = false;
}

}  // namespace

BoundedLipschitz BoundedLipschitz::builtin(std::string_view name) {
  BoundedLipschitz g;
  g.name = std::string(name);
  if (name == "tanh") {
    g.fn = [](double u) { return std::tanh(u); };
    g.lipschitz = 1.0;
    g.sup = 1.0;
    g.limit_plus = 1.0;
    g.limit_minus = -1.0;
  } else if (name == "atan") {
    g.fn = [](double u) { return std::atan(u); };
    g.lipschitz = 1.0;
    g.sup = std::numbers::pi / 2.0;
    g.limit_plus = std::numbers::pi / 2.0;
    g.limit_minus = -std::numbers::pi / 2.0;
  } else if (name == "clamped") {
    g.fn = [](double u) { return std::clamp(u, -1.0, 1.0); };
    g.lipschitz = 1.0;
    g.sup = 1.0;
    g.limit_plus = 1.0;
    g.limit_minus = -1.0;
  } else {
    throw PreconditionError("unknown bounded function '" + std::string(name) + "' (expected tanh|atan|clamped)");
  }
  return g;
}

ModulatedProfile ModulatedProfile::zero() {
  return {[](const Point&) { return 0.0; }, TimeProfile{}, 0.0, "zero"};
}

bool Nonlinearity::has_limits() const {
  return static_cast<bool>(limit_liminf_plus) && static_cast<bool>(limit_limsup_minus) &&
         static_cast<bool>(limit_limsup_plus) && static_cast<bool>(limit_liminf_minus);
}

Nonlinearity Nonlinearity::negated() const {
  Nonlinearity n = *this;
  n.f = [f = f](double t, const Point& x, double u) { return -f(t, x, u); };
  if (has_limits()) {
    n.limit_liminf_plus = [g = limit_limsup_plus](double t, const Point& x) { return -g(t, x); };
    n.limit_limsup_minus = [g = limit_liminf_minus](double t, const Point& x) { return -g(t, x); };
    n.limit_limsup_plus = [g = limit_liminf_plus](double t, const Point& x) { return -g(t, x); };
    n.limit_liminf_minus = [g = limit_limsup_minus](double t, const Point& x) { return -g(t, x); };
  }
  n.description = "-(" + description + ")";
  return n;
}

Nonlinearity Nonlinearity::scaled(double factor) const {
  if (!(factor > 0.0)) throw PreconditionError("Nonlinearity::scaled: factor must be positive");
  Nonlinearity n = *this;
  n.f = [f = f, factor](double t, const Point& x, double u) { return factor * f(t, x, u); };
  auto scale_space = [factor](const SpatialFn& s) -> SpatialFn {
    if (!s) return s;
    return [s, factor](const Point& x) { return factor * s(x); };
  };
  auto scale_ts = [factor](const TimeSpaceFn& s) -> TimeSpaceFn {
    if (!s) return s;
    return [s, factor](double t, const Point& x) { return factor * s(t, x); };
  };
  n.growth_K = scale_space(growth_K);
  n.growth_L = scale_space(growth_L);
  n.zero_bound_M = scale_space(zero_bound_M);
  n.limit_liminf_plus = scale_ts(limit_liminf_plus);
  n.limit_limsup_minus = scale_ts(limit_limsup_minus);
  n.limit_limsup_plus = scale_ts(limit_limsup_plus);
  n.limit_liminf_minus = scale_ts(limit_liminf_minus);
  n.sup_bound = factor * sup_bound;
  std::ostringstream os;
  os << factor << "*(" << description << ")";
  n.description = os.str();
  return n;
}

Nonlinearity make_zero_nonlinearity(double period) {
  if (!(period > 0.0)) throw PreconditionError("nonlinearity: period must be positive");
  Nonlinearity n;
  n.f = [](double, const Point&, double) { return 0.0; };
  n.period = period;
  auto zero = [](const Point&) { return 0.0; };
  n.growth_K = zero;
  n.growth_L = zero;
  n.zero_bound_M = zero;
  auto zero_ts = [](double, const Point&) { return 0.0; };
  n.limit_liminf_plus = n.limit_limsup_minus = n.limit_limsup_plus = n.limit_liminf_minus = zero_ts;
  n.sup_bound = 0.0;
  n.description = "zero";
  return n;
}

Nonlinearity make_remark12(const ModulatedProfile& U, const ModulatedProfile& W, const BoundedLipschitz& g,
                           double period, double holder_theta) {
  if (!(period > 0.0)) throw PreconditionError("remark12: period must be positive");
  if (!(holder_theta > 0.0 && holder_theta < 1.0)) throw PreconditionError("remark12: theta must lie in (0,1)");
  if (std::abs(g.fn(0.0)) > 1e-12) throw PreconditionError("remark12: g(0) must vanish");
  Nonlinearity n;
  n.period = period;
  n.holder_theta = holder_theta;
  n.f = [U, W, g, period](double t, const Point& x, double u) { return U(t, x, period) + g.fn(W(t, x, period) * u); };
  const double cu = U.time.holder_constant(period, holder_theta);
  const double cw = W.time.holder_constant(period, holder_theta);
  n.growth_K = [U, W, g, cu, cw](const Point& x) {
    return std::max(std::abs(U.profile(x)) * cu, g.lipschitz * std::abs(W.profile(x)) * cw);
  };
  n.growth_L = [W, g](const Point& x) { return g.lipschitz * std::abs(W.profile(x)) * W.time.sup(); };
  n.zero_bound_M = [U](const Point& x) { return std::abs(U.profile(x)) * U.time.sup(); };
  auto limit = [U, W, g, period](int sign) -> TimeSpaceFn {
    return [U, W, g, period, sign](double t, const Point& x) {
      const double w = W(t, x, period) * sign;
      const double gl = w > 0.0 ? g.limit_plus : (w < 0.0 ? g.limit_minus : 0.0);
      return U(t, x, period) + gl;
    };
  };
  n.limit_liminf_plus = limit(+1);
  n.limit_limsup_plus = limit(+1);
  n.limit_limsup_minus = limit(-1);
  n.limit_liminf_minus = limit(-1);
  n.sup_bound = U.sup + g.sup;
  n.description = "remark12(U=" + U.description + ", W=" + W.description + ", g=" + g.name + ")";
  return n;
}

Nonlinearity make_separable(const SpatialFn& c, double c_sup, const BoundedLipschitz& g, const SpatialFn& d,
                            double d_sup, double period, double holder_theta) {
  if (!(period > 0.0)) throw PreconditionError("separable: period must be positive");
  if (!(holder_theta > 0.0 && holder_theta < 1.0)) throw PreconditionError("separable: theta must lie in (0,1)");
  const TimeProfile sine{TimeProfile::Kind::sin};
  Nonlinearity n;
  n.period = period;
  n.holder_theta = holder_theta;
  n.f = [c, g, d, sine, period](double t, const Point& x, double u) {
    return c(x) * g.fn(u) + d(x) * sine.value(t, period);
  };
  const double cs = sine.holder_constant(period, holder_theta);
  const double g0 = std::abs(g.fn(0.0));
  n.growth_K = [d, cs](const Point& x) { return std::abs(d(x)) * cs; };
  n.growth_L = [c, g](const Point& x) { return std::abs(c(x)) * g.lipschitz; };
  n.zero_bound_M = [c, d, g0](const Point& x) { return std::abs(c(x)) * g0 + std::abs(d(x)); };
  auto limit = [c, d, sine, period](double gl) -> TimeSpaceFn {
    return [c, d, sine, period, gl](double t, const Point& x) { return c(x) * gl + d(x) * sine.value(t, period); };
  };
  n.limit_liminf_plus = limit(g.limit_plus);
  n.limit_limsup_plus = limit(g.limit_plus);
  n.limit_limsup_minus = limit(g.limit_minus);
  n.limit_liminf_minus = limit(g.limit_minus);
  n.sup_bound = c_sup * g.sup + d_sup;
  n.description = "separable(g=" + g.name + ")";
  return n;
}

std::vector<Point> node_points(const Grid& grid) {
  std::vector<Point> pts(grid.size());
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = grid.point(i);
  return pts;
}

void eval_nemytskii(const Nonlinearity& nl, double t, std::span<const Point> points, std::span<const double> u,
                    std::span<double> out) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double v = nl.f(t, points[i], u[i]);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "nonlinearity produced a non-finite value at node " << i << " (x=" << points[i][0] << ", "
         << points[i][1] << ", t=" << t << ", u=" << u[i] << ")";
      throw NumericalError(os.str());
    }
    out[i] = v;
  }
}

Field eval_nemytskii(const Nonlinearity& nl, double t, const Field& u) {
  if (t < 0.0) throw PreconditionError("eval_nemytskii: t must be nonnegative");
  const auto pts = node_points(u.grid);
  Field out(u.grid);
  eval_nemytskii(nl, t, pts, u.span(), out.span());
  return out;
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& c) { return c.passed; });
}

const HypothesisCheck& ValidationReport::get(std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw PreconditionError("no hypothesis check named '" + std::string(name) + "'");
}

ValidationReport validate_hypotheses(const Nonlinearity& nl, const Grid& grid, int sample_count, std::uint64_t seed) {
  if (sample_count < 100) throw PreconditionError("validate_hypotheses: sample_count must be >= 100");
  ValidationReport rep;
  rep.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> node(0, grid.size() - 1);
  const double T = nl.period;
  const double theta = nl.holder_theta;
  const int dim = grid.dimension();
  auto random_u = [&]() {
    const double mag = std::pow(10.0, -3.0 + 6.0 * unit(rng));
    return unit(rng) < 0.5 ? -mag : mag;
  };

  auto named = [](const char* n) {
    HypothesisCheck c;
    c.name = n;
    return c;
  };
  HypothesisCheck periodic = named("periodicity"), zero_bound = named("zero_bound"),
                  holder = named("holder_lipschitz"), sup = named("sup_bound"), order = named("limit_order"),
                  op_holder = named("operator_holder"), op_growth = named("operator_growth");
  constexpr double tol = 1e-12;

  for (int k = 0; k < sample_count; ++k) {
    const double t = 2.0 * T * unit(rng);
    double s = 2.0 * T * unit(rng);
    const Point x = grid.point(node(rng));
    const double u = random_u();
    double v = unit(rng) < 0.5 ? random_u() : u + 1e-3 * random_u();
    if (k % 7 == 0) s = t;
    const double ftu = nl.f(t, x, u);
    const std::string where = describe(t, x, u, dim);

    record(periodic, std::abs(ftu - nl.f(t + T, x, u)) - tol * (1.0 + std::abs(ftu)), 0.0, where);

    const double f0 = nl.f(t, x, 0.0);
    const double m = nl.zero_bound_M(x);
    record(zero_bound, f0 - m, tol, describe(t, x, 0.0, dim));
    if (std::abs(f0) > m + tol) rep.zero_bound_two_sided = false;

    const double lhs = std::abs(ftu - nl.f(s, x, v));
    const double rhs = nl.growth_K(x) * (1.0 + std::abs(u)) * std::pow(std::abs(t - s), theta) +
                       nl.growth_L(x) * std::abs(u - v);
    record(holder, lhs - rhs, tol * (1.0 + rhs), where + " s=" + std::to_string(s) + " v=" + std::to_string(v));

    record(sup, std::abs(ftu) - nl.sup_bound, tol, where);

    if (nl.has_limits()) {
      const double a = nl.limit_liminf_plus(t, x) - nl.limit_limsup_plus(t, x);
      const double b = nl.limit_liminf_minus(t, x) - nl.limit_limsup_minus(t, x);
      record(order, std::max(a, b), tol, where);
    }
  }

  // operator-level bounds on random fields
  const Field kf = sample(grid, nl.growth_K);
  double k_sup = 0.0;
  for (double v : kf.values) k_sup = std::max(k_sup, std::abs(v));
  const double c_holder = norm_l2(kf) + k_sup;
  const auto pts = node_points(grid);
  const int field_samples = std::max(10, sample_count / 100);
  std::normal_distribution<double> normal;
  for (int k = 0; k < field_samples; ++k) {
    Field u(grid);
    const double amp = std::pow(10.0, -2.0 + 4.0 * unit(rng));
    const double width = 0.5 + 4.0 * unit(rng);
    const double cx = (2.0 * unit(rng) - 1.0) * 0.5 * grid.half_width();
    const double cy = dim == 2 ? (2.0 * unit(rng) - 1.0) * 0.5 * grid.half_width() : 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double dx = pts[i][0] - cx, dy = dim == 2 ? pts[i][1] - cy : 0.0;
      u[i] = amp * std::exp(-(dx * dx + dy * dy) / (2.0 * width * width)) * (1.0 + 0.1 * normal(rng));
    }
    const double t = 2.0 * T * unit(rng);
    const double s = 2.0 * T * unit(rng);
    const Field ft = eval_nemytskii(nl, t, u);
    const Field fs = eval_nemytskii(nl, s, u);
    const double h1 = norm_h1(u);
    const double lhs = norm_l2(linear_combination(1.0, ft, -1.0, fs));
    const double rhs = c_holder * (1.0 + h1) * std::pow(std::abs(t - s), theta);
    std::ostringstream os;
    os << "field amp=" << amp << " width=" << width << " t=" << t << " s=" << s;
    record(op_holder, lhs - rhs, tol * (1.0 + rhs), os.str());
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t worst_i = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double bound = nl.growth_L(pts[i]) * std::abs(u[i]) + nl.zero_bound_M(pts[i]) * (1.0 + h1);
      const double e = std::abs(ft[i]) - bound;
      if (e > worst) {
        worst = e;
        worst_i = i;
      }
    }
    record(op_growth, worst, tol, os.str() + " " + describe(t, pts[worst_i], u[worst_i], dim));
  }

  rep.checks = {periodic, zero_bound, holder, sup, order, op_holder, op_growth};
  return rep;
}

LimitEstimate estimate_limit(const Nonlinearity& nl, double t, const Point& x, int sign) {
  LimitEstimate e;
  for (double s : {1e3, 1e4, 1e5, 1e6}) e.samples.push_back(nl.f(t, x, sign * s));
  bool up = true, down = true;
  for (std::size_t i = 1; i < e.samples.size(); ++i) {
    if (e.samples[i] < e.samples[i - 1]) up = false;
    if (e.samples[i] > e.samples[i - 1]) down = false;
  }
  e.monotone = up || down;
  e.value = e.samples.back();
  return e;
}

}  // namespace resonant
