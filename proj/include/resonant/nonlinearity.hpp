#pragma once

// The forcing f(t, x, u), its Nemytskii operator, growth witnesses for the
// structural hypotheses, asymptotic limits used by Landesman-Lazer checks,
// and the two built-in families.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "resonant/profiles.hpp"
#include "resonant/spatial.hpp"

namespace resonant {

using PointwiseFn = std::function<double(double t, const Point& x, double u)>;
using TimeSpaceFn = std::function<double(double t, const Point& x)>;

/// A bounded Lipschitz scalar function with known limits at +-infinity.
struct BoundedLipschitz {
  std::string name;
  std::function<double(double)> fn;
  double lipschitz = 1.0;
  double sup = 1.0;
  double limit_plus = 0.0;
  double limit_minus = 0.0;

  /// "tanh", "atan" or "clamped" (clamp to [-1, 1]).
  static BoundedLipschitz builtin(std::string_view name);
};

/// profile(x) * tau(t) with a known bound sup_x |profile|.
struct ModulatedProfile {
  SpatialFn profile;
  TimeProfile time;
  double sup = 0.0;
  std::string description;

  double operator()(double t, const Point& x, double period) const { return profile(x) * time.value(t, period); }
  static ModulatedProfile zero();
};

struct Nonlinearity {
  PointwiseFn f;
  double period = 1.0;
  double holder_theta = 0.5;
  /// |f(t,x,u) - f(s,x,v)| <= growth_K(x) (1 + |u|) |t-s|^theta + growth_L(x) |u - v|
  SpatialFn growth_K;
  SpatialFn growth_L;
  /// sup_t |f(t, x, 0)|
  SpatialFn zero_bound_M;
  TimeSpaceFn limit_liminf_plus;   // liminf_{s->+inf} f
  TimeSpaceFn limit_limsup_minus;  // limsup_{s->-inf} f
  TimeSpaceFn limit_limsup_plus;   // limsup_{s->+inf} f
  TimeSpaceFn limit_liminf_minus;  // liminf_{s->-inf} f
  double sup_bound = 0.0;
  std::string description;

  double operator()(double t, const Point& x, double u) const { return f(t, x, u); }
  bool has_limits() const;
  /// -f with limits and witnesses carried over.
  Nonlinearity negated() const;
  /// f / n (used by the convergence regression).
  Nonlinearity scaled(double factor) const;
};

/// f = 0 with M = K = L = 0.
Nonlinearity make_zero_nonlinearity(double period);

/// f(t,x,u) = U(x,t) + g(W(x,t) u).
Nonlinearity make_remark12(const ModulatedProfile& U, const ModulatedProfile& W, const BoundedLipschitz& g,
                           double period, double holder_theta = 0.5);

/// f(t,x,u) = c(x) g(u) + d(x) sin(2 pi t / T); c_sup, d_sup bound |c|, |d|.
Nonlinearity make_separable(const SpatialFn& c, double c_sup, const BoundedLipschitz& g, const SpatialFn& d,
                            double d_sup, double period, double holder_theta = 0.5);

std::vector<Point> node_points(const Grid& grid);

/// out_i = f(t, x_i, u_i). Throws NumericalError naming the node on NaN/Inf.
void eval_nemytskii(const Nonlinearity& nl, double t, std::span<const Point> points, std::span<const double> u,
                    std::span<double> out);
Field eval_nemytskii(const Nonlinearity& nl, double t, const Field& u);

struct HypothesisCheck {
  std::string name;
  bool passed = true;
  /// Largest (lhs - rhs) seen; <= 0 when every sample satisfied the bound.
  double worst_excess = -std::numeric_limits<double>::infinity();
  std::string worst_sample;
  int samples = 0;
};

struct ValidationReport {
  std::vector<HypothesisCheck> checks;
  /// Whether |f(t,x,0)| <= M(x) also held (the one-sided bound is the hypothesis).
  bool zero_bound_two_sided = true;
  std::uint64_t seed = 0;
  bool all_passed() const;
  const HypothesisCheck& get(std::string_view name) const;
};

/// Monte-Carlo checks of periodicity, the zero bound, the Hoelder-Lipschitz
/// bound, the sup bound, limit ordering, and the operator-level bounds.
ValidationReport validate_hypotheses(const Nonlinearity& nl, const Grid& grid, int sample_count, std::uint64_t seed);

struct LimitEstimate {
  double value = 0.0;
  bool monotone = true;
  std::vector<double> samples;
};

/// Samples f at s = sign * {1e3, 1e4, 1e5, 1e6}; reports the last sample and
/// whether the sequence is monotone rather than guessing a limit.
LimitEstimate estimate_limit(const Nonlinearity& nl, double t, const Point& x, int sign);

}  // namespace resonant
