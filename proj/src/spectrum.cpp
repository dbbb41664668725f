#include "resonant/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "resonant/krylov.hpp"

namespace resonant {
namespace {

using Vec = std::vector<double>;

void orthogonalize(Vec& w, const std::vector<Vec>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const Vec& b : basis) simd::axpy(-simd::dot(w, b), b, w);
}

struct Pair {
  double value;
  Vec vector;  // Euclidean unit norm
};

// One Lanczos run on (A - sigma)^{-1} restricted to the complement of
// `locked`. Returns converged Ritz pairs, largest inverse eigenvalue first.
std::vector<Pair> lanczos_run(const Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>& solver, double sigma,
                              std::size_t n, const std::vector<Vec>& locked, int wanted, const SpectrumOptions& opts,
                              std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vec q0(n);
  for (double& x : q0) x = normal(rng);
  orthogonalize(q0, locked);
  double nrm = krylov::norm2(q0);
  if (nrm == 0.0) return {};
  for (double& x : q0) x /= nrm;

  const int kmax = static_cast<int>(std::min<std::size_t>(opts.max_krylov, n - locked.size()));
  std::vector<Vec> q{q0};
  Vec alpha, beta;
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  Vec w(n);

  auto ritz = [&](int m, bool final) -> std::vector<Pair> {
    Eigen::VectorXd d(m), e(std::max(0, m - 1));
    for (int i = 0; i < m; ++i) d[i] = alpha[i];
    for (int i = 0; i + 1 < m; ++i) e[i] = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    const double bm = beta.size() >= static_cast<std::size_t>(m) ? beta[m - 1] : 0.0;
    std::vector<Pair> out;
    int converged_top = 0;
    for (int i = m - 1; i >= 0 && static_cast<int>(out.size()) < wanted; --i) {
      const double theta = es.eigenvalues()[i];
      const double est = std::abs(bm * es.eigenvectors()(m - 1, i));
      if (!(theta > 0.0) || est > opts.ritz_tol * std::abs(es.eigenvalues()[m - 1])) {
        if (!final) return {};
        break;
      }
      ++converged_top;
      Pair p{sigma + 1.0 / theta, Vec(n, 0.0)};
      for (int j = 0; j < m; ++j) simd::axpy(es.eigenvectors()(j, i), q[j], p.vector);
      out.push_back(std::move(p));
    }
    return out;
  };

  for (int m = 0; m < kmax; ++m) {
    for (std::size_t i = 0; i < n; ++i) rhs[static_cast<Eigen::Index>(i)] = q[m][i];
    Eigen::VectorXd sol = solver.solve(rhs);
    for (std::size_t i = 0; i < n; ++i) w[i] = sol[static_cast<Eigen::Index>(i)];
    const double am = simd::dot(w, q[m]);
    alpha.push_back(am);
    orthogonalize(w, locked);
    orthogonalize(w, q);
    const double bm = krylov::norm2(w);
    beta.push_back(bm);
    const int dim = m + 1;
    const bool exhausted = bm <= 1e-14 * std::abs(am) || dim == kmax;
    if (exhausted || (dim >= wanted && dim % 10 == 0)) {
      auto pairs = ritz(dim, exhausted);
      if (exhausted || static_cast<int>(pairs.size()) >= wanted) return pairs;
    }
    q.emplace_back(n);
    for (std::size_t i = 0; i < n; ++i) q[m + 1][i] = w[i] / bm;
  }
  return {};
}

double l2_weight(const Grid& g) { return std::sqrt(g.cell_volume()); }

void classify(SpectralData& sd, const std::vector<double>& values, const std::vector<Field>& vectors) {
  sd.eigenvalues.clear();
  sd.eigenvectors.clear();
  sd.above_threshold.clear();
  sd.kernel_basis.clear();
  sd.negative_basis.clear();
  sd.m_minus = 0;
  sd.kernel_dim = 0;
  sd.ill_separated = false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double lam = values[i];
    if (lam >= sd.v_bar_infinity - sd.zero_tol) {
      sd.above_threshold.push_back(lam);
      continue;
    }
    sd.eigenvalues.push_back(lam);
    sd.eigenvectors.push_back(vectors[i]);
    if (lam < -sd.zero_tol) {
      ++sd.m_minus;
      sd.negative_basis.push_back(vectors[i]);
    } else if (lam <= sd.zero_tol) {
      ++sd.kernel_dim;
      sd.kernel_basis.push_back(vectors[i]);
    }
    const double a = std::abs(lam);
    if (a >= sd.zero_tol / 10.0 && a <= 10.0 * sd.zero_tol) sd.ill_separated = true;
  }
  // modified Gram-Schmidt in L2 on the kernel basis
  for (std::size_t k = 0; k < sd.kernel_basis.size(); ++k) {
    Field& phi = sd.kernel_basis[k];
    for (std::size_t j = 0; j < k; ++j) {
      const double c = inner_l2(phi, sd.kernel_basis[j]);
      simd::axpy(-c, sd.kernel_basis[j].span(), phi.span());
    }
    const double nrm = norm_l2(phi);
    for (double& x : phi.values) x /= nrm;
  }
  if (sd.ill_separated)
    sd.warnings.push_back("an eigenvalue lies within a decade of zero_tol; kernel classification is fragile");
}

}  // namespace

SpectralData compute_low_spectrum(const DiscreteOperator& op, int count, double zero_tol, const SpectrumOptions& opts) {
  if (count < 1) throw PreconditionError("compute_low_spectrum: count must be >= 1");
  if (!(zero_tol > 0.0)) throw PreconditionError("compute_low_spectrum: zero_tol must be positive");
  const Grid& grid = op.grid();
  const std::size_t n = grid.size();
  count = static_cast<int>(std::min<std::size_t>(count, n));

  const double g = op.gershgorin_lower_bound();
  const double sigma = g - 1.0 - 0.01 * std::abs(g);
  const Eigen::SparseMatrix<double> shifted = op.to_eigen(-sigma);
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(shifted);
  if (llt.info() != Eigen::Success) throw ConvergenceError("compute_low_spectrum: shifted factorization failed");

  std::mt19937_64 rng(opts.seed);
  std::vector<Pair> locked;
  Vec av(n);
  auto locked_vectors = [&]() {
    std::vector<Vec> v;
    for (const Pair& p : locked) v.push_back(p.vector);
    return v;
  };
  for (int run = 0; run < opts.max_runs; ++run) {
    const int remaining = count - static_cast<int>(locked.size());
    const int wanted = std::max(1, remaining);
    auto found = lanczos_run(llt, sigma, n, locked_vectors(), wanted, opts, rng);
    if (found.empty()) break;
    std::sort(locked.begin(), locked.end(), [](const Pair& a, const Pair& b) { return a.value < b.value; });
    const double worst = locked.size() >= static_cast<std::size_t>(count) ? locked.back().value
                                                                         : std::numeric_limits<double>::infinity();
    bool improved = false;
    for (Pair& p : found) {
      if (static_cast<int>(locked.size()) < count || p.value < worst - opts.degeneracy_tol) {
        Vec v = p.vector;
        orthogonalize(v, locked_vectors());
        const double nrm = krylov::norm2(v);
        if (nrm < 0.5) continue;
        for (double& x : v) x /= nrm;
        // deflated runs can converge to ghosts of locked vectors; only a
        // small residual against A itself counts
        op.apply(v, av);
        const double lam = simd::dot(v, av);
        simd::axpy(-lam, v, av);
        if (krylov::norm2(av) > 1e-7 * (std::abs(lam) + std::abs(sigma))) continue;
        locked.push_back({lam, std::move(v)});
        improved = true;
      }
    }
    std::sort(locked.begin(), locked.end(), [](const Pair& a, const Pair& b) { return a.value < b.value; });
    if (static_cast<int>(locked.size()) > count) locked.resize(count);
    if (!improved && static_cast<int>(locked.size()) >= count) break;
  }
  if (locked.empty()) throw ConvergenceError("compute_low_spectrum: Lanczos found no converged eigenpair");

  // Rayleigh-Ritz of A on the locked subspace, then inverse-iteration polish
  // for the isolated part.
  const std::size_t k = locked.size();
  auto rayleigh_ritz = [&](std::vector<Pair>& pairs) {
    const std::size_t kk = pairs.size();
    std::vector<Vec> av(kk, Vec(n));
    for (std::size_t i = 0; i < kk; ++i) op.apply(pairs[i].vector, av[i]);
    Eigen::MatrixXd h(kk, kk);
    for (std::size_t i = 0; i < kk; ++i)
      for (std::size_t j = 0; j < kk; ++j) h(i, j) = simd::dot(pairs[i].vector, av[j]);
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    std::vector<Pair> out(kk, Pair{0.0, Vec(n, 0.0)});
    for (std::size_t i = 0; i < kk; ++i) {
      out[i].value = es.eigenvalues()[i];
      for (std::size_t j = 0; j < kk; ++j) simd::axpy(es.eigenvectors()(j, i), pairs[j].vector, out[i].vector);
    }
    pairs = std::move(out);
  };
  // Gram-Schmidt after locking keeps vectors orthonormal to ~1e-15.
  rayleigh_ritz(locked);

  const double v_bar = op.v_bar_infinity();
  const Eigen::SparseMatrix<double> a_eig = op.to_eigen(0.0);
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  for (int sweep = 0; sweep < 2; ++sweep) {
    bool any = false;
    for (std::size_t i = 0; i < k;) {
      std::size_t j = i + 1;
      while (j < k && locked[j].value - locked[i].value <= 1e-6 * (1.0 + std::abs(locked[i].value))) ++j;
      if (locked[i].value < v_bar) {
        any = true;
        const double shift = locked[i].value - 1e-8 * (1.0 + std::abs(locked[i].value));
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
        Eigen::SparseMatrix<double> m = a_eig;
        for (Eigen::Index d = 0; d < m.rows(); ++d) m.coeffRef(d, d) -= shift;
        ldlt.compute(m);
        if (ldlt.info() == Eigen::Success) {
          for (std::size_t p = i; p < j; ++p) {
            Eigen::Map<const Eigen::VectorXd> rhs(locked[p].vector.data(), static_cast<Eigen::Index>(n));
            Eigen::VectorXd sol = ldlt.solve(rhs);
            if (!sol.allFinite()) continue;
            std::copy(sol.data(), sol.data() + n, locked[p].vector.begin());
          }
        }
      }
      i = j;
    }
    if (!any) break;
    // re-orthonormalize (MGS) then Rayleigh-Ritz to restore exact symmetry
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < i; ++j)
        simd::axpy(-simd::dot(locked[i].vector, locked[j].vector), locked[j].vector, locked[i].vector);
      const double nrm = krylov::norm2(locked[i].vector);
      for (double& x : locked[i].vector) x /= nrm;
    }
    rayleigh_ritz(locked);
  }

  SpectralData sd;
  sd.zero_tol = zero_tol;
  sd.v_bar_infinity = v_bar;
  sd.recentering_shift = op.recentering_shift();
  const double w = l2_weight(grid);
  std::vector<double> values;
  std::vector<Field> vectors;
  Vec r(n);
  for (const Pair& p : locked) {
    Field f(grid);
    // fix the sign so the largest-magnitude entry is positive
    const auto it = std::max_element(p.vector.begin(), p.vector.end(),
                                     [](double a, double b) { return std::abs(a) < std::abs(b); });
    const double sgn = *it < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) f[i] = sgn * p.vector[i] / w;
    values.push_back(p.value);
    vectors.push_back(std::move(f));
    if (p.value < v_bar) {
      op.apply(p.vector, r);
      simd::axpy(-p.value, p.vector, r);
      // Euclidean-unit vector: ||r||_L2 relative to ||psi||_L2 is the Euclidean ratio
      sd.max_relative_residual = std::max(sd.max_relative_residual, krylov::norm2(r) / (std::abs(p.value) + 1.0));
    }
  }
  sd.count_exhausted = static_cast<int>(values.size()) >= count && values.back() < v_bar;
  if (sd.count_exhausted)
    sd.warnings.push_back("all requested eigenvalues lie below v_bar; increase the count");
  if (static_cast<int>(values.size()) < count)
    sd.warnings.push_back("only " + std::to_string(values.size()) + " of " + std::to_string(count) +
                          " eigenpairs converged");
  classify(sd, values, vectors);
  return sd;
}

Recentered recenter(const DiscreteOperator& op, const SpectralData& sd, double window) {
  double best = std::numeric_limits<double>::infinity();
  for (double lam : sd.eigenvalues)
    if (std::abs(lam) < std::abs(best)) best = lam;
  if (!(std::abs(best) <= window) || best == 0.0) return {op, sd};
  Recentered out{op.shifted(best), sd};
  SpectralData& s = out.spectrum;
  std::vector<double> values;
  std::vector<Field> vectors;
  for (std::size_t i = 0; i < sd.eigenvalues.size(); ++i) {
    values.push_back(sd.eigenvalues[i] - best);
    vectors.push_back(sd.eigenvectors[i]);
  }
  for (double lam : sd.above_threshold) {
    values.push_back(lam - best);
    vectors.emplace_back();
  }
  s.v_bar_infinity = sd.v_bar_infinity - best;
  s.recentering_shift = sd.recentering_shift + best;
  s.warnings.clear();
  classify(s, values, vectors);
  s.warnings.insert(s.warnings.begin(), sd.warnings.begin(), sd.warnings.end());
  return out;
}

std::vector<double> project_kernel(const SpectralData& sd, const Field& u) {
  if (sd.kernel_dim == 0) throw PreconditionError("project_kernel: kernel is trivial");
  std::vector<double> c;
  for (const Field& phi : sd.kernel_basis) c.push_back(inner_l2(u, phi));
  return c;
}

Field reconstruct(const SpectralData& sd, std::span<const double> coords) {
  if (sd.kernel_dim == 0) throw PreconditionError("reconstruct: kernel is trivial");
  if (coords.size() != sd.kernel_basis.size()) throw PreconditionError("reconstruct: coordinate count mismatch");
  Field out(sd.kernel_basis.front().grid);
  for (std::size_t k = 0; k < coords.size(); ++k) simd::axpy(coords[k], sd.kernel_basis[k].span(), out.span());
  return out;
}

Field project_negative(const SpectralData& sd, const Field& u) {
  Field out(u.grid);
  for (const Field& psi : sd.negative_basis) simd::axpy(inner_l2(u, psi), psi.span(), out.span());
  return out;
}

}  // namespace resonant
