#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "resonant/krylov.hpp"

using namespace resonant::krylov;

namespace {

LinearMap dense_map(const Eigen::MatrixXd& m) {
  return [m](std::span<const double> x, std::span<double> y) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())) = m * xv;
  };
}

Eigen::MatrixXd random_matrix(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = nd(rng);
  return m;
}

}  // namespace

TEST_CASE("gmres solves a nonsymmetric system") {
  const int n = 120;
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) * 4.0 + random_matrix(n, 3) / std::sqrt(n);
  const Eigen::VectorXd b = random_matrix(n, 4).col(0);
  std::vector<double> bv(b.data(), b.data() + n), x0(n, 0.0);
  GmresOptions o;
  o.restart = 20;
  const auto r = gmres(dense_map(a), bv, x0, o);
  CHECK(r.converged);
  const Eigen::VectorXd ref = a.partialPivLu().solve(b);
  for (int i = 0; i < n; ++i) CHECK(r.x[i] == doctest::Approx(ref[i]).epsilon(1e-8));
}

TEST_CASE("gmres zero right-hand side and exact initial guess") {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(5, 5) * 2.0;
  std::vector<double> b(5, 0.0), x0(5, 0.0);
  const auto r = gmres(dense_map(a), b, x0, {});
  CHECK(r.converged);
  CHECK(r.iterations == 0);
}

TEST_CASE("symmetric actions match dense functions") {
  const int n = 60;
  Eigen::MatrixXd s = random_matrix(n, 7);
  s = ((s + s.transpose()) / 2.0).eval() + Eigen::MatrixXd::Identity(n, n) * 6.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  const Eigen::VectorXd v = random_matrix(n, 8).col(0);
  std::vector<double> vv(v.data(), v.data() + n);
  const double t = 0.1;

  const auto e = symmetric_action(dense_map(s), vv, t, PhiKind::exp);
  CHECK(e.converged);
  const Eigen::VectorXd lam = es.eigenvalues();
  Eigen::VectorXd fe = (-t * lam.array()).exp().matrix();
  Eigen::VectorXd fp(n);
  for (int i = 0; i < n; ++i) {
    const double z = -t * lam[i];
    fp[i] = std::expm1(z) / z;
  }
  const Eigen::VectorXd ref_e = es.eigenvectors() * fe.asDiagonal() * es.eigenvectors().transpose() * v;
  const Eigen::VectorXd ref_p = es.eigenvectors() * fp.asDiagonal() * es.eigenvectors().transpose() * v;
  const auto p = symmetric_action(dense_map(s), vv, t, PhiKind::phi1);
  for (int i = 0; i < n; ++i) {
    CHECK(e.y[i] == doctest::Approx(ref_e[i]).epsilon(1e-8).scale(ref_e.norm()));
    CHECK(p.y[i] == doctest::Approx(ref_p[i]).epsilon(1e-8).scale(ref_p.norm()));
  }
}

TEST_CASE("arnoldi recovers outlying eigenvalues") {
  const int n = 200;
  // eigenvalues 5, 2, -1.5 plus a cluster in [0, 0.3], similarity-transformed
  Eigen::VectorXd d(n);
  d[0] = 5.0;
  d[1] = 2.0;
  d[2] = -1.5;
  for (int i = 3; i < n; ++i) d[i] = 0.3 * i / n;
  Eigen::MatrixXd q = random_matrix(n, 11) / std::sqrt(n) + Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd a = q * d.asDiagonal() * q.inverse();
  std::vector<double> v0(n, 1.0);
  const auto ritz = arnoldi_ritz(dense_map(a), v0, 30);
  REQUIRE(ritz.size() >= 3);
  CHECK(ritz[0].value.real() == doctest::Approx(5.0).epsilon(1e-8));
  CHECK(ritz[1].value.real() == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(ritz[2].value.real() == doctest::Approx(-1.5).epsilon(1e-8));
  CHECK(std::abs(ritz[0].value.imag()) < 1e-10);
}

TEST_CASE("arnoldi sees complex pairs") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a(0, 1) = -2.0;
  a(1, 0) = 2.0;
  a(2, 2) = 0.5;
  a(3, 3) = 0.1;
  std::vector<double> v0{1.0, 0.5, 0.25, 0.125};
  const auto ritz = arnoldi_ritz(dense_map(a), v0, 4);
  REQUIRE(ritz.size() == 4);
  CHECK(std::abs(ritz[0].value) == doctest::Approx(2.0));
  CHECK(std::abs(ritz[0].value.imag()) == doctest::Approx(2.0));
}
