#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "resonant/periodic.hpp"
#include "resonant/profiles.hpp"

using namespace resonant;

namespace {

struct Setup {
  DiscreteOperator op;
  SpectralData sd;
};

Setup lambda2(double L, int M) {
  const Grid g = build_grid(1, L, M);
  const auto op = assemble_operator(g, DiffusionMatrix::identity(1), parse_profile("poschl_teller(2)", g),
                                    parse_profile("constant(1)", g), 1.0);
  auto rc = recenter(op, compute_low_spectrum(op, 16, 1e-6), 1e-2);
  return {std::move(rc.op), std::move(rc.spectrum)};
}

Nonlinearity resonant_f(const Grid& g) {
  return make_separable(parse_profile("sech2(1)", g), 1.0, BoundedLipschitz::builtin("tanh"),
                        parse_profile("sech(0.1)", g), 0.1, 1.0);
}

SolveConfig cfg_default() {
  SolveConfig c;
  c.apriori_R0 = 10.0;
  return c;
}

}  // namespace

TEST_CASE("solve config validation") {
  SolveConfig c;
  CHECK_NOTHROW(validate(c));
  c.epsilon_schedule = {0.5, 0.1};
  CHECK_THROWS_AS(validate(c), PreconditionError);
  c.epsilon_schedule = {0.0, 1.0};
  CHECK_THROWS_AS(validate(c), PreconditionError);
  c = SolveConfig{};
  c.newton_tol = 0.0;
  CHECK_THROWS_AS(validate(c), PreconditionError);
}

TEST_CASE("f = 0 fixes the kernel") {
  const auto s = lambda2(20.0, 1025);
  const Field guess = reconstruct(s.sd, std::vector<double>{0.8});
  const auto rep = find_periodic(s.op, make_zero_nonlinearity(1.0), s.sd, cfg_default(), guess, 0.7);
  CHECK(rep.converged);
  CHECK(rep.iterations <= 1);
  CHECK(rep.residual <= 1e-8);
  CHECK(project_kernel(s.sd, rep.fixed_point)[0] == doctest::Approx(0.8).epsilon(1e-6));
}

TEST_CASE("u-independent forcing against the variation-of-constants oracle") {
  const auto s = lambda2(10.0, 129);
  const Grid& g = s.op.grid();
  // d even, kernel odd: no forcing component along the kernel
  const auto nl = make_separable(parse_profile("zero", g), 0.0, BoundedLipschitz::builtin("tanh"),
                                 parse_profile("sech(0.1)", g), 0.1, 1.0);
  SolveConfig cfg = cfg_default();
  cfg.integrator.dt = 1.0 / 512;
  const Field guess = reconstruct(s.sd, std::vector<double>{0.3});
  const auto rep = find_periodic(s.op, nl, s.sd, cfg, guess, 1.0);
  REQUIRE(rep.converged);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(s.op.to_eigen()));
  const Field d = sample(g, [](const Point& x) { return 0.1 / std::cosh(x[0]); });
  const Eigen::VectorXd dk = es.eigenvectors().transpose() * Eigen::Map<const Eigen::VectorXd>(d.values.data(), 129);
  const Eigen::VectorXd gk = es.eigenvectors().transpose() * Eigen::Map<const Eigen::VectorXd>(guess.values.data(), 129);
  const double w = 2.0 * M_PI;
  Eigen::VectorXd c(129);
  for (int k = 0; k < 129; ++k) {
    const double l = es.eigenvalues()[k];
    if (std::abs(l) < 1e-8) {
      c[k] = gk[k];
      continue;
    }
    const double integral = (l * std::sin(w) - w * std::cos(w) + w * std::exp(-l)) / (l * l + w * w);
    c[k] = dk[k] * integral / (1.0 - std::exp(-l));
  }
  const Eigen::VectorXd ref = es.eigenvectors() * c;
  const Field exact(g, std::vector<double>(ref.data(), ref.data() + 129));
  CHECK(norm_l2(linear_combination(1.0, rep.fixed_point, -1.0, exact)) <= 1e-4 * norm_l2(exact));
}

TEST_CASE("local index: scalar monodromy oracle") {
  const auto s = lambda2(20.0, 1025);
  // shifting by -0.5 gives eigenvalues -2.5 and 0.5: one monodromy eigenvalue e^{2.5} > 1
  const auto op = s.op.shifted(-0.5);
  auto cfg = cfg_default();
  PeriodicReport rep = find_periodic(op, make_zero_nonlinearity(1.0), s.sd, cfg, Field(op.grid()), 0.0);
  REQUIRE(rep.converged);
  const auto idx = local_index(op, make_zero_nonlinearity(1.0), cfg, rep);
  REQUIRE(idx);
  CHECK(*idx == -1);
  REQUIRE(!rep.monodromy_leading_eigs.empty());
  // Crank-Nicolson multiplies by (1 + z/2) / (1 - z/2) per step, z = -(lambda_0 + 0.5) dt
  const double z = -(s.sd.eigenvalues[0] + 0.5) * cfg.integrator.dt;
  const double steps = std::round(1.0 / cfg.integrator.dt);
  CHECK(rep.monodromy_leading_eigs[0].real() == doctest::Approx(std::pow((1.0 + z / 2.0) / (1.0 - z / 2.0), steps)).epsilon(1e-6));

  // the unshifted kernel is a unit multiplier: index undefined
  PeriodicReport r0 = find_periodic(s.op, make_zero_nonlinearity(1.0), s.sd, cfg, Field(op.grid()), 0.0);
  CHECK_FALSE(local_index(s.op, make_zero_nonlinearity(1.0), cfg, r0));
  CHECK(r0.monodromy_unit_eigen);
}

TEST_CASE("local index matches the sign of a dense finite-difference determinant") {
  const auto s = lambda2(8.0, 48);
  const auto nl = resonant_f(s.op.grid());
  auto cfg = cfg_default();
  for (double eps : {0.05, 0.4}) {
    PeriodicReport rep = find_periodic(s.op, nl, s.sd, cfg, Field(s.op.grid()), eps);
    REQUIRE(rep.converged);
    const auto idx = local_index(s.op, nl, cfg, rep);
    REQUIRE(idx);
    IntegratorConfig ic = cfg.integrator;
    ic.epsilon = eps;
    const std::size_t n = rep.fixed_point.size();
    Eigen::MatrixXd jm(n, n);
    const Field base = translation_operator(s.op, nl, ic, rep.fixed_point);
    for (std::size_t k = 0; k < n; ++k) {
      Field up = rep.fixed_point;
      up[k] += 1e-6;
      const Field pk = translation_operator(s.op, nl, ic, up);
      for (std::size_t i = 0; i < n; ++i) jm(i, k) = (pk[i] - base[i]) / 1e-6;
    }
    const double det = (Eigen::MatrixXd::Identity(n, n) - jm).determinant();
    CHECK(*idx == (det > 0 ? 1 : -1));
  }
}

TEST_CASE("continuation needs a nonzero degree") {
  const auto s = lambda2(20.0, 513);
  const auto nl = resonant_f(s.op.grid());
  DegreeResult none;
  none.defined = false;
  CHECK_THROWS_AS(continue_in_epsilon(s.op, nl, s.sd, cfg_default(), none), PreconditionError);
  DegreeResult zero;
  zero.degree = 0;
  CHECK_THROWS_AS(continue_in_epsilon(s.op, nl, s.sd, cfg_default(), zero), PreconditionError);
  DegreeResult one;
  one.degree = 1;
  one.zeros.push_back({{0.0}, 1, 0.4, 1.0});
  SolveConfig no_r0;
  CHECK_THROWS_AS(continue_in_epsilon(s.op, nl, s.sd, no_r0, one), PreconditionError);
}

TEST_CASE("averaging predictor and continuation") {
  const auto s = lambda2(20.0, 1025);
  const auto nl = resonant_f(s.op.grid());
  DegreeResult one;
  one.degree = 1;
  one.zeros.push_back({{0.0}, 1, 0.4, 1.0});
  SolveConfig c = cfg_default();
  c.epsilon_schedule = {0.01, 0.1, 0.5, 1.0};
  const auto reps = continue_in_epsilon(s.op, nl, s.sd, c, one);
  REQUIRE(reps.size() == 4);
  for (const auto& r : reps) {
    CHECK(r.converged);
    CHECK(r.residual <= c.newton_tol);
    CHECK(r.apriori_ok);
  }
  REQUIRE(reps[0].predictor_distance);
  CHECK(*reps[0].predictor_distance <= 10.0 * 0.01);

  // a tiny a-priori bound halts the schedule
  c.apriori_R0 = 1e-3;
  const auto halted = continue_in_epsilon(s.op, nl, s.sd, c, one);
  CHECK(halted.size() < 4);
  CHECK_FALSE(halted.back().apriori_ok);
}

TEST_CASE("index check sums over distinct fixed points") {
  const auto s = lambda2(20.0, 1025);
  const auto nl = resonant_f(s.op.grid());
  DegreeResult one;
  one.degree = 1;
  // the same zero listed twice is one fixed point
  one.zeros.push_back({{0.0}, 1, 0.4, 1.0});
  one.zeros.push_back({{1e-9}, 1, 0.4, 1.0});
  const auto chk = index_check(s.op, nl, s.sd, cfg_default(), one, 0.01, 1.0);
  CHECK(chk.fixed_points.size() == 1);
  CHECK(chk.all_defined);
  CHECK(chk.expected == -1);
  CHECK(chk.m_minus == 1);
  // the kernel multiplier exceeds 1 as well as the negative mode (measured +1, see README)
  CHECK(std::abs(chk.index_sum) == 1);
}
