#include "resonant/krylov.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "resonant/error.hpp"
#include "resonant/simd.hpp"

namespace resonant::krylov {

double norm2(std::span<const double> v) { return std::sqrt(simd::sum_squares(v)); }

GmresResult gmres(const LinearMap& a, std::span<const double> b, std::span<const double> x0,
                  const GmresOptions& opts) {
  const std::size_t n = b.size();
  const int m = std::max(1, opts.restart);
  GmresResult res;
  res.x.assign(x0.begin(), x0.end());
  if (res.x.size() != n) res.x.assign(n, 0.0);

  const double bnorm = norm2(b);
  const double target = std::max(opts.abs_tol, opts.rel_tol * bnorm);
  std::vector<std::vector<double>> basis(m + 1, std::vector<double>(n));
  std::vector<double> w(n), r(n);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
  std::vector<double> cs(m), sn(m), g(m + 1);

  double prev_cycle_residual = std::numeric_limits<double>::infinity();
  while (true) {
    a(res.x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    double beta = norm2(r);
    res.residual_norm = beta;
    if (beta <= target) {
      res.converged = true;
      return res;
    }
    if (res.iterations >= opts.max_iterations) return res;
    if (beta >= prev_cycle_residual * (1.0 - 1e-12)) {
      res.stagnated = true;
      return res;
    }
    prev_cycle_residual = beta;

    for (std::size_t i = 0; i < n; ++i) basis[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    h.setZero();
    int k = 0;
    for (; k < m && res.iterations < opts.max_iterations; ++k) {
      ++res.iterations;
      a(basis[k], w);
      for (int j = 0; j <= k; ++j) {
        const double hj = simd::dot(w, basis[j]);
        h(j, k) = hj;
        simd::axpy(-hj, basis[j], w);
      }
      const double hn = norm2(w);
      h(k + 1, k) = hn;
      if (hn > 0.0)
        for (std::size_t i = 0; i < n; ++i) basis[k + 1][i] = w[i] / hn;
      for (int j = 0; j < k; ++j) {
        const double t = cs[j] * h(j, k) + sn[j] * h(j + 1, k);
        h(j + 1, k) = -sn[j] * h(j, k) + cs[j] * h(j + 1, k);
        h(j, k) = t;
      }
      const double denom = std::hypot(h(k, k), h(k + 1, k));
      cs[k] = denom == 0.0 ? 1.0 : h(k, k) / denom;
      sn[k] = denom == 0.0 ? 0.0 : h(k + 1, k) / denom;
      h(k, k) = denom;
      h(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      if (std::abs(g[k + 1]) <= target || hn == 0.0) {
        ++k;
        break;
      }
    }
    // back substitution on the k x k triangle
    std::vector<double> y(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= h(i, j) * y[j];
      y[i] = h(i, i) == 0.0 ? 0.0 : s / h(i, i);
    }
    for (int j = 0; j < k; ++j) simd::axpy(y[j], basis[j], res.x);
  }
}

namespace {

double phi1(double z) {
  if (std::abs(z) < 1e-5) return 1.0 + z / 2.0 + z * z / 6.0;
  return std::expm1(z) / z;
}

}  // namespace

ActionResult symmetric_action(const LinearMap& a, std::span<const double> v, double t, PhiKind kind,
                              const ActionOptions& opts) {
  const std::size_t n = v.size();
  ActionResult out;
  out.y.assign(n, 0.0);
  const double vnorm = norm2(v);
  if (vnorm == 0.0) {
    out.converged = true;
    return out;
  }
  const int max_dim = std::max(1, std::min<int>(opts.max_dim, static_cast<int>(n)));
  std::vector<std::vector<double>> q;
  q.reserve(max_dim + 1);
  q.emplace_back(n);
  for (std::size_t i = 0; i < n; ++i) q[0][i] = v[i] / vnorm;
  std::vector<double> alpha, beta;
  std::vector<double> w(n);

  Eigen::VectorXd coeffs;
  auto evaluate = [&](int m) {
    Eigen::VectorXd diag(m), sub(std::max(0, m - 1));
    for (int i = 0; i < m; ++i) diag[i] = alpha[i];
    for (int i = 0; i + 1 < m; ++i) sub[i] = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const Eigen::MatrixXd& s = es.eigenvectors();
    Eigen::VectorXd fe(m);
    for (int i = 0; i < m; ++i) {
      const double z = -t * es.eigenvalues()[i];
      fe[i] = kind == PhiKind::exp ? std::exp(z) : phi1(z);
    }
    // f(T) e1 = S f(Lambda) S^T e1
    coeffs = s * fe.cwiseProduct(s.row(0).transpose());
  };

  int m = 0;
  for (; m < max_dim; ++m) {
    a(q[m], w);
    const double am = simd::dot(w, q[m]);
    alpha.push_back(am);
    simd::axpy(-am, q[m], w);
    if (m > 0) simd::axpy(-beta[m - 1], q[m - 1], w);
    for (int j = 0; j <= m; ++j) simd::axpy(-simd::dot(w, q[j]), q[j], w);
    const double bm = norm2(w);
    const int dim = m + 1;
    evaluate(dim);
    out.dimension = dim;
    out.error_estimate = bm * std::abs(coeffs[dim - 1]);
    const bool breakdown = bm <= 1e-14 * std::max(1.0, std::abs(am));
    if (breakdown || out.error_estimate <= opts.tol) {
      out.converged = true;
      if (breakdown) out.error_estimate = 0.0;
      break;
    }
    beta.push_back(bm);
    q.emplace_back(n);
    for (std::size_t i = 0; i < n; ++i) q[m + 1][i] = w[i] / bm;
  }
  for (int j = 0; j < out.dimension; ++j) simd::axpy(vnorm * coeffs[j], q[j], out.y);
  return out;
}

std::vector<RitzValue> arnoldi_ritz(const LinearMap& a, std::span<const double> v0, int m) {
  const std::size_t n = v0.size();
  m = std::max(1, std::min<int>(m, static_cast<int>(n)));
  const double v0n = norm2(v0);
  if (v0n == 0.0) throw PreconditionError("arnoldi_ritz: zero start vector");
  std::vector<std::vector<double>> q(1, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) q[0][i] = v0[i] / v0n;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
  std::vector<double> w(n);
  int k = 0;
  for (; k < m; ++k) {
    a(q[k], w);
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j <= k; ++j) {
        const double hj = simd::dot(w, q[j]);
        h(j, k) += hj;
        simd::axpy(-hj, q[j], w);
      }
    const double hn = norm2(w);
    h(k + 1, k) = hn;
    if (hn <= 1e-14 * h.col(k).norm()) {
      ++k;
      h(k, k - 1) = 0.0;
      break;
    }
    q.emplace_back(n);
    for (std::size_t i = 0; i < n; ++i) q[k + 1][i] = w[i] / hn;
  }
  const Eigen::MatrixXd hk = h.topLeftCorner(k, k);
  Eigen::EigenSolver<Eigen::MatrixXd> es(hk, true);
  const double tail = h(k, k - 1);
  std::vector<RitzValue> out;
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXcd y = es.eigenvectors().col(i);
    y /= y.norm();
    out.push_back({es.eigenvalues()[i], std::abs(tail * y[k - 1])});
  }
  std::sort(out.begin(), out.end(),
            [](const RitzValue& x, const RitzValue& y) { return std::abs(x.value) > std::abs(y.value); });
  return out;
}

}  // namespace resonant::krylov
