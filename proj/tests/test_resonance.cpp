#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "resonant/profiles.hpp"
#include "resonant/resonance.hpp"

using namespace resonant;

namespace {

struct Setup {
  DiscreteOperator op;
  SpectralData sd;
};

Setup lambda2(int M = 2049) {
  const Grid g = build_grid(1, 20.0, M);
  const auto op = assemble_operator(g, DiffusionMatrix::identity(1), parse_profile("poschl_teller(2)", g),
                                    parse_profile("constant(1)", g), 1.0);
  auto rc = recenter(op, compute_low_spectrum(op, 16, 1e-6), 1e-2);
  return {std::move(rc.op), std::move(rc.spectrum)};
}

Nonlinearity sech2_tanh(const Grid& g) {
  return make_separable(parse_profile("sech2(1)", g), 1.0, BoundedLipschitz::builtin("tanh"), parse_profile("zero", g),
                        0.0, 1.0);
}

// Simpson on [-20, 20] with the closed-form kernel function
double averaged_oracle(double c) {
  const int n = 40000;
  const double a = -20.0, h = 40.0 / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = a + i * h;
    const double phi = std::sqrt(1.5) * std::tanh(x) / std::cosh(x);
    const double v = std::tanh(c * phi) * phi / std::pow(std::cosh(x), 2);
    s += (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0)) * v;
  }
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("averaged map against a quadrature oracle") {
  const auto s = lambda2();
  const auto nl = sech2_tanh(s.op.grid());
  const AveragedMap am(s.sd, nl);
  CHECK(am.kernel_dim() == 1);
  for (double c : {-3.0, -0.5, 0.2, 1.0, 4.0}) {
    // the basis sign is fixed so that its largest entry is positive; the oracle uses the same sign
    const double sign = s.sd.kernel_basis[0][1500] > 0 ? 1.0 : -1.0;
    CHECK(am({c})[0] == doctest::Approx(averaged_oracle(sign * c) * sign).epsilon(1e-3));
  }
}

TEST_CASE("averaged map is odd-equivariant under negation") {
  const auto s = lambda2(1025);
  const auto nl = make_separable(parse_profile("sech2(1)", s.op.grid()), 1.0, BoundedLipschitz::builtin("tanh"),
                                 parse_profile("sech(0.1)", s.op.grid()), 0.1, 1.0);
  const AveragedMap a(s.sd, nl), b(s.sd, nl.negated());
  for (double c : {-2.0, 0.3, 5.0}) CHECK(b({c})[0] == doctest::Approx(-a({c})[0]).epsilon(1e-14));
}

TEST_CASE("averaged map preconditions") {
  const Grid g = build_grid(1, 20.0, 257);
  const auto op = assemble_operator(g, DiffusionMatrix::identity(1), parse_profile("zero", g),
                                    parse_profile("constant(1)", g), 1.0);
  const auto sd = compute_low_spectrum(op, 2, 1e-6);
  CHECK_THROWS_AS(AveragedMap(sd, sech2_tanh(g)), PreconditionError);
  const auto s = lambda2(513);
  const AveragedMap am(s.sd, sech2_tanh(s.op.grid()));
  CHECK_THROWS_AS(am({1.0, 2.0}), PreconditionError);
}

TEST_CASE("degree of explicit maps") {
  const CoordMap id = [](const Coords& c) { return c; };
  const CoordMap neg = [](const Coords& c) {
    Coords o = c;
    for (double& v : o) v = -v;
    return o;
  };
  for (int dim : {1, 2, 3}) {
    CHECK(brouwer_degree(id, 1.0, dim).degree == 1);
    CHECK(brouwer_degree(neg, 1.0, dim).degree == (dim % 2 ? -1 : 1));
  }
  // cubic with three zeros in (-2, 2): signs +, -, + sum to 1
  const CoordMap cubic = [](const Coords& c) { return Coords{c[0] * c[0] * c[0] - c[0]}; };
  const auto d3 = brouwer_degree(cubic, 2.0, 1);
  CHECK(d3.degree == 1);
  CHECK(d3.zeros.size() == 3);
  REQUIRE(d3.boundary_degree);
  CHECK(*d3.boundary_degree == 1);
  // z^2 on the plane: one degenerate zero, degree 2 from the boundary
  const CoordMap sq = [](const Coords& c) { return Coords{c[0] * c[0] - c[1] * c[1], 2 * c[0] * c[1]}; };
  const auto d2 = brouwer_degree(sq, 1.0, 2);
  CHECK(d2.degree == 2);
  CHECK(d2.method == DegreeMethod::boundary_grid);
  // (z - a)(z - b) with distinct roots: regular zeros, degree 2
  const CoordMap two = [](const Coords& c) {
    const std::complex<double> z(c[0], c[1]);
    const auto w = (z - 0.3) * (z + std::complex<double>(0.1, 0.4));
    return Coords{w.real(), w.imag()};
  };
  const auto dt = brouwer_degree(two, 1.0, 2);
  CHECK(dt.degree == 2);
  CHECK(dt.method == DegreeMethod::regular_zeros);
  CHECK(dt.zeros.size() == 2);
  // conj(z) - 0.2 has degree -1
  const CoordMap conj = [](const Coords& c) { return Coords{c[0] - 0.2, -c[1]}; };
  CHECK(brouwer_degree(conj, 1.0, 2).degree == -1);
  // zero outside the ball
  const CoordMap shifted = [](const Coords& c) { return Coords{c[0] - 3.0}; };
  CHECK(brouwer_degree(shifted, 1.0, 1).degree == 0);
}

TEST_CASE("degree undefined with a zero on the sphere") {
  const CoordMap m = [](const Coords& c) { return Coords{c[0] - 1.0}; };
  CHECK_FALSE(brouwer_degree(m, 1.0, 1).defined);
  CHECK_THROWS_AS(brouwer_degree(m, 1.0, 4), PreconditionError);
  CHECK_THROWS_AS(brouwer_degree(m, -1.0, 1), PreconditionError);
}

TEST_CASE("Landesman-Lazer certificates") {
  const auto s = lambda2();
  const auto nl = sech2_tanh(s.op.grid());
  const AveragedMap am(s.sd, nl);
  const auto cert = ll_check(am, 2, 1);
  CHECK(cert.condition == LLCondition::eq_1_5);
  CHECK(cert.directions_tested == 2);
  // T int sech^2 |phi_1| = sqrt(3/2) * 2/3
  CHECK(cert.worst_value == doctest::Approx(std::sqrt(1.5) * 2.0 / 3.0).epsilon(1e-3));
  CHECK(cert.worst_value > 0.0);

  const AveragedMap an(s.sd, nl.negated());
  const auto neg = ll_check(an, 2, 1);
  CHECK(neg.condition == LLCondition::eq_1_6);
  CHECK(neg.worst_value < 0.0);
  CHECK(neg.worst_value == doctest::Approx(-std::sqrt(1.5) * 2.0 / 3.0).epsilon(1e-3));
  CHECK(to_string(LLCondition::inconclusive) == "inconclusive");

  // f = 0: every integral vanishes
  const AveragedMap az(s.sd, make_zero_nonlinearity(1.0));
  CHECK(ll_check(az, 2, 1).condition == LLCondition::inconclusive);
}

TEST_CASE("sphere sign and degree on the resonant kernel") {
  const auto s = lambda2();
  const auto nl = sech2_tanh(s.op.grid());
  const AveragedMap am(s.sd, nl);
  const std::vector<double> radii{0.5, 1.0, 2.0, 4.0};
  const auto rep = sphere_sign_check(am, radii, 2);
  CHECK(rep.sign == 1);
  CHECK(rep.found());
  for (double v : rep.min_value) CHECK(v > 0.0);
  const CoordMap map = [&am](const Coords& c) { return am(c); };
  for (double f : {2.0, 4.0}) CHECK(brouwer_degree(map, f * rep.r0, 1).degree == 1);

  const AveragedMap an(s.sd, nl.negated());
  const auto rn = sphere_sign_check(an, radii, 2);
  CHECK(rn.sign == -1);
  const CoordMap mn = [&an](const Coords& c) { return an(c); };
  CHECK(brouwer_degree(mn, 2.0 * rn.r0, 1).degree == -1);

  const std::vector<double> bad{2.0, 1.0};
  CHECK_THROWS_AS(sphere_sign_check(am, bad, 2), PreconditionError);
}

TEST_CASE("sphere directions") {
  CHECK(sphere_directions(1, 10, 0).size() == 2);
  const auto d2 = sphere_directions(2, 64, 0);
  CHECK(d2.size() == 64);
  for (const auto& d : d2) CHECK(std::hypot(d[0], d[1]) == doctest::Approx(1.0));
  const auto d3 = sphere_directions(3, 40, 5);
  CHECK(d3.size() == 40);
  for (const auto& d : d3) CHECK(std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) == doctest::Approx(1.0));
  CHECK(sphere_directions(3, 40, 5) == d3);
}
