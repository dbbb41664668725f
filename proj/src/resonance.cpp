#include "resonant/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "resonant/simd.hpp"

namespace resonant {

AveragedMap::AveragedMap(const SpectralData& sd, const Nonlinearity& nl, int time_nodes)
    : kernel_(sd.kernel_basis), nl_(nl), time_nodes_(time_nodes) {
  if (sd.kernel_dim < 1 || kernel_.empty()) throw PreconditionError("AveragedMap: kernel is trivial (no resonance)");
  if (time_nodes < 16) throw PreconditionError("AveragedMap: time_nodes must be >= 16");
  points_ = node_points(kernel_.front().grid);
}

Coords AveragedMap::operator()(const Coords& c) const {
  if (c.size() != kernel_.size()) throw PreconditionError("averaged_map: coordinate count mismatch");
  const Grid& g = grid();
  Field u(g);
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (!std::isfinite(c[k])) throw PreconditionError("averaged_map: non-finite coordinates");
    simd::axpy(c[k], kernel_[k].span(), u.span());
  }
  Field avg(g), tmp(g);
  for (int j = 0; j < time_nodes_; ++j) {
    eval_nemytskii(nl_, nl_.period * j / time_nodes_, points_, u.span(), tmp.span());
    simd::axpy(1.0, tmp.span(), avg.span());
  }
  Coords out(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) out[k] = inner_l2(avg, kernel_[k]) / time_nodes_;
  return out;
}

Coords averaged_map(const AveragedMap& am, const Coords& c) { return am(c); }

namespace {

double norm(const Coords& c) {
  double s = 0.0;
  for (double v : c) s += v * v;
  return std::sqrt(s);
}

Eigen::MatrixXd jacobian(const CoordMap& map, const Coords& x, double step) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd j(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Coords xp = x, xm = x;
    xp[k] += step;
    xm[k] -= step;
    const Coords fp = map(xp), fm = map(xm);
    for (Eigen::Index i = 0; i < n; ++i) j(i, k) = (fp[i] - fm[i]) / (2.0 * step);
  }
  return j;
}

std::optional<int> boundary_degree(const CoordMap& map, double radius, int dim, int samples) {
  if (dim == 1) {
    const double a = map({radius})[0], b = map({-radius})[0];
    if (a == 0.0 || b == 0.0) return std::nullopt;
    return ((a > 0) - (a < 0) - ((b > 0) - (b < 0))) / 2;
  }
  if (dim != 2) return std::nullopt;
  // winding number of the boundary image, refining any arc whose image turns
  // by more than pi/4
  auto angle_at = [&](double th) {
    const Coords f = map({radius * std::cos(th), radius * std::sin(th)});
    return std::atan2(f[1], f[0]);
  };
  auto wrap = [](double d) {
    while (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
    while (d < -std::numbers::pi) d += 2.0 * std::numbers::pi;
    return d;
  };
  double total = 0.0;
  const double step = 2.0 * std::numbers::pi / samples;
  for (int i = 0; i < samples; ++i) {
    std::vector<std::pair<double, double>> stack{{i * step, (i + 1) * step}};
    while (!stack.empty()) {
      auto [a, b] = stack.back();
      stack.pop_back();
      const double d = wrap(angle_at(b) - angle_at(a));
      if (std::abs(d) > std::numbers::pi / 4.0 && b - a > 1e-9) {
        const double m = 0.5 * (a + b);
        stack.push_back({m, b});
        stack.push_back({a, m});
      } else {
        total += d;
      }
    }
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

std::vector<Coords> boundary_points(int dim, double radius, int samples) {
  std::vector<Coords> pts;
  if (dim == 1) return {{radius}, {-radius}};
  if (dim == 2) {
    for (int i = 0; i < samples; ++i) {
      const double th = 2.0 * std::numbers::pi * i / samples;
      pts.push_back({radius * std::cos(th), radius * std::sin(th)});
    }
    return pts;
  }
  // Fibonacci sphere
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < samples; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / samples;
    const double r = std::sqrt(1.0 - z * z);
    pts.push_back({radius * r * std::cos(golden * i), radius * r * std::sin(golden * i), radius * z});
  }
  return pts;
}

}  // namespace

DegreeResult brouwer_degree(const CoordMap& map, double radius, int dim, const DegreeConfig& cfg) {
  if (dim < 1 || dim > 3) throw PreconditionError("brouwer_degree: dimension must be 1, 2 or 3");
  if (!(radius > 0.0)) throw PreconditionError("brouwer_degree: radius must be positive");
  DegreeResult res;

  double bmin = std::numeric_limits<double>::infinity(), bmax = 0.0;
  for (const Coords& p : boundary_points(dim, radius, cfg.boundary_samples)) {
    const double v = norm(map(p));
    bmin = std::min(bmin, v);
    bmax = std::max(bmax, v);
  }
  res.boundary_min = bmin;
  if (!(bmin > cfg.boundary_tol * std::max(1.0, bmax))) {
    res.defined = false;
    res.note = "map vanishes (numerically) on the boundary sphere; degree undefined";
    return res;
  }
  res.boundary_degree = boundary_degree(map, radius, dim, cfg.boundary_samples);

  const double fscale = std::max(bmax, 1e-300);
  const double step = cfg.jacobian_step * radius;
  const int m = cfg.starts_per_axis;
  std::vector<Coords> starts;
  std::vector<int> idx(dim, 0);
  while (true) {
    Coords x(dim);
    for (int k = 0; k < dim; ++k) x[k] = m == 1 ? 0.0 : -radius + 2.0 * radius * idx[k] / (m - 1);
    if (norm(x) < radius) starts.push_back(x);
    int k = 0;
    while (k < dim && ++idx[k] == m) idx[k++] = 0;
    if (k == dim) break;
  }

  bool singular = false;
  for (Coords x : starts) {
    Coords f = map(x);
    double fn = norm(f);
    bool ok = false;
    for (int it = 0; it < cfg.newton_max; ++it) {
      if (fn <= cfg.newton_tol * fscale) {
        ok = true;
        break;
      }
      const Eigen::MatrixXd j = jacobian(map, x, step);
      Eigen::VectorXd rhs(dim);
      for (int k = 0; k < dim; ++k) rhs[k] = f[k];
      const Eigen::VectorXd dx = j.fullPivLu().solve(rhs);
      if (!dx.allFinite()) break;
      double alpha = 1.0;
      bool improved = false;
      for (int ls = 0; ls < 30; ++ls) {
        Coords xn = x;
        for (int k = 0; k < dim; ++k) xn[k] -= alpha * dx[k];
        const Coords fnew = map(xn);
        const double nn = norm(fnew);
        if (nn < fn) {
          x = xn;
          f = fnew;
          fn = nn;
          improved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!improved) break;
      if (alpha * dx.norm() <= 1e-15 * radius) {
        ok = fn <= std::sqrt(cfg.newton_tol) * fscale;
        break;
      }
    }
    if (!ok || norm(x) >= radius) continue;
    const bool dup = std::any_of(res.zeros.begin(), res.zeros.end(), [&](const DegreeZero& z) {
      Coords d = z.coords;
      for (int k = 0; k < dim; ++k) d[k] -= x[k];
      return norm(d) < 1e-6 * radius;
    });
    if (dup) continue;
    const Eigen::MatrixXd j = jacobian(map, x, step);
    const double det = j.determinant();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
    const auto& sv = svd.singularValues();
    DegreeZero z;
    z.coords = x;
    z.jacobian_det = det;
    z.jacobian_condition = sv[dim - 1] > 0.0 ? sv[0] / sv[dim - 1] : std::numeric_limits<double>::infinity();
    z.jacobian_sign = det > 0.0 ? 1 : (det < 0.0 ? -1 : 0);
    const double scale = std::pow(fscale / radius, dim);
    if (std::abs(det) < cfg.singular_tol * scale) singular = true;
    res.zeros.push_back(z);
  }
  std::sort(res.zeros.begin(), res.zeros.end(), [](const DegreeZero& a, const DegreeZero& b) { return a.coords < b.coords; });

  if (singular) {
    if (!res.boundary_degree) {
      res.defined = false;
      res.note = "degenerate zero and no boundary fallback for dim 3";
      return res;
    }
    res.method = DegreeMethod::boundary_grid;
    res.degree = *res.boundary_degree;
    res.note = "degenerate Jacobian at a zero; degree from the boundary map";
    return res;
  }
  res.method = DegreeMethod::regular_zeros;
  res.degree = 0;
  for (const auto& z : res.zeros) res.degree += z.jacobian_sign;
  if (res.boundary_degree && *res.boundary_degree != res.degree)
    res.note = "regular-zero count disagrees with the boundary degree; some zeros may have been missed";
  return res;
}

std::string to_string(LLCondition c) {
  switch (c) {
    case LLCondition::eq_1_5: return "eq_1_5";
    case LLCondition::eq_1_6: return "eq_1_6";
    case LLCondition::inconclusive: break;
  }
  return "inconclusive";
}

std::vector<Coords> sphere_directions(int dim, int count, std::uint64_t seed) {
  std::vector<Coords> dirs;
  if (dim == 1) return {{1.0}, {-1.0}};
  if (dim == 2) {
    for (int i = 0; i < count; ++i) {
      const double th = 2.0 * std::numbers::pi * i / count;
      dirs.push_back({std::cos(th), std::sin(th)});
    }
    return dirs;
  }
  for (int k = 0; k < dim; ++k)
    for (double s : {1.0, -1.0}) {
      Coords d(dim, 0.0);
      d[k] = s;
      dirs.push_back(d);
    }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  while (static_cast<int>(dirs.size()) < count) {
    Coords d(dim);
    for (double& v : d) v = normal(rng);
    const double n = norm(d);
    for (double& v : d) v /= n;
    dirs.push_back(d);
  }
  return dirs;
}

LLCertificate ll_check(const AveragedMap& am, int directions, std::uint64_t seed) {
  const Nonlinearity& nl = am.nonlinearity();
  if (!nl.has_limits()) throw PreconditionError("ll_check: nonlinearity has no asymptotic limit functions");
  const int dim = am.kernel_dim();
  if (directions < 2 * dim) throw PreconditionError("ll_check: need at least 2*kernel_dim directions");
  const Grid& g = am.grid();
  const auto pts = node_points(g);
  const std::size_t n = g.size();
  const int q = am.time_nodes();
  const double T = nl.period;
  const double hv = g.cell_volume();

  // time-integrated limit functions at every node
  std::vector<double> lp(n, 0.0), lm(n, 0.0), up(n, 0.0), um(n, 0.0);
  for (int j = 0; j < q; ++j) {
    const double s = T * j / q;
    for (std::size_t i = 0; i < n; ++i) {
      lp[i] += nl.limit_liminf_plus(s, pts[i]) * T / q;
      lm[i] += nl.limit_limsup_minus(s, pts[i]) * T / q;
      up[i] += nl.limit_limsup_plus(s, pts[i]) * T / q;
      um[i] += nl.limit_liminf_minus(s, pts[i]) * T / q;
    }
  }

  LLCertificate cert;
  cert.directions = sphere_directions(dim, directions, seed);
  cert.directions_tested = static_cast<int>(cert.directions.size());
  bool all_pos = true, all_neg = true;
  double min_plus = std::numeric_limits<double>::infinity(), max_minus = -std::numeric_limits<double>::infinity();
  std::size_t arg_min = 0, arg_max = 0;
  for (std::size_t d = 0; d < cert.directions.size(); ++d) {
    Field phi(g);
    for (int k = 0; k < dim; ++k) simd::axpy(cert.directions[d][k], am.kernel_basis()[k].span(), phi.span());
    double i5 = 0.0, i6 = 0.0, mag5 = 0.0, mag6 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = phi[i];
      if (p > 1e-12) {
        i5 += lp[i] * p;
        i6 += up[i] * p;
        mag5 += std::abs(lp[i] * p);
        mag6 += std::abs(up[i] * p);
      } else if (p < -1e-12) {
        i5 += lm[i] * p;
        i6 += um[i] * p;
        mag5 += std::abs(lm[i] * p);
        mag6 += std::abs(um[i] * p);
      }
    }
    i5 *= hv;
    i6 *= hv;
    cert.values_plus.push_back(i5);
    cert.values_minus.push_back(i6);
    if (!(i5 > 1e-12 * hv * mag5) || i5 == 0.0) all_pos = false;
    if (!(i6 < -1e-12 * hv * mag6) || i6 == 0.0) all_neg = false;
    if (i5 < min_plus) {
      min_plus = i5;
      arg_min = d;
    }
    if (i6 > max_minus) {
      max_minus = i6;
      arg_max = d;
    }
  }
  if (all_pos) {
    cert.condition = LLCondition::eq_1_5;
    cert.worst_direction = cert.directions[arg_min];
    cert.worst_value = min_plus;
  } else if (all_neg) {
    cert.condition = LLCondition::eq_1_6;
    cert.worst_direction = cert.directions[arg_max];
    cert.worst_value = max_minus;
  } else {
    cert.condition = LLCondition::inconclusive;
    cert.worst_direction = cert.directions[arg_min];
    cert.worst_value = min_plus;
  }
  return cert;
}

SphereSignReport sphere_sign_check(const AveragedMap& am, std::span<const double> radii, int directions,
                                   std::uint64_t seed) {
  if (radii.empty()) throw PreconditionError("sphere_sign_check: no radii");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw PreconditionError("sphere_sign_check: radii must be ascending");
  const int dim = am.kernel_dim();
  const auto dirs = sphere_directions(dim, std::max(directions, 2 * dim), seed);
  SphereSignReport rep;
  rep.radii.assign(radii.begin(), radii.end());
  for (double r : radii) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const Coords& d : dirs) {
      Coords c = d;
      for (double& v : c) v *= r;
      const Coords f = am(c);
      double s = 0.0;
      for (int k = 0; k < dim; ++k) s += f[k] * c[k];
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    rep.min_value.push_back(lo);
    rep.max_value.push_back(hi);
  }
  const std::size_t m = radii.size();
  std::size_t first_pos = m, first_neg = m;
  for (std::size_t i = m; i-- > 0;) {
    if (rep.min_value[i] > 0.0 && first_pos == i + 1) first_pos = i;
    if (rep.max_value[i] < 0.0 && first_neg == i + 1) first_neg = i;
  }
  if (first_pos < m) {
    rep.sign = 1;
    rep.r0 = radii[first_pos];
  } else if (first_neg < m) {
    rep.sign = -1;
    rep.r0 = radii[first_neg];
  }
  return rep;
}

}  // namespace resonant
