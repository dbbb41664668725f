#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "resonant/profiles.hpp"

using namespace resonant;

TEST_CASE("call parsing") {
  const auto c = parse_call(" gaussian( 1.5 , 0.25 ) ");
  CHECK(c.name == "gaussian");
  REQUIRE(c.args.size() == 2);
  CHECK(c.args[0] == 1.5);
  CHECK(c.args[1] == 0.25);
  CHECK(parse_call("zero").args.empty());
  CHECK_THROWS_AS(parse_call("sech(1"), PreconditionError);
  CHECK_THROWS_AS(parse_call("sech(abc)"), PreconditionError);
}

TEST_CASE("named profiles evaluate their formulas") {
  const Grid g = build_grid(1, 5.0, 101);
  const Point x{0.7, 0.0};
  CHECK(parse_profile("poschl_teller(2)", g)(x) == doctest::Approx(6.0 / std::pow(std::cosh(0.7), 2)));
  CHECK(parse_profile("constant(1.5)", g)(x) == 1.5);
  CHECK(parse_profile("zero", g)(x) == 0.0);
  CHECK(parse_profile("gaussian(2, 0.5)", g)(x) == doctest::Approx(2.0 * std::exp(-0.49 / 0.5)));
  CHECK(parse_profile("sech(0.1)", g)(x) == doctest::Approx(0.1 / std::cosh(0.7)));
  CHECK(parse_profile("sech2(1)", g)(x) == doctest::Approx(1.0 / std::pow(std::cosh(0.7), 2)));
  CHECK_THROWS_AS(parse_profile("bessel(1)", g), PreconditionError);
  CHECK_THROWS_AS(parse_profile("poschl_teller()", g), PreconditionError);

  const Grid g2 = build_grid(2, 5.0, 41);
  const Point y{0.3, 0.4};
  // radial in 2D
  CHECK(parse_profile("poschl_teller(1)", g2)(y) == doctest::Approx(2.0 / std::pow(std::cosh(0.5), 2)));
  CHECK(parse_profile("sech(1)", g2)(y) == doctest::Approx(1.0 / (std::cosh(0.3) * std::cosh(0.4))));
}

TEST_CASE("csv profiles are node tables") {
  const Grid g = build_grid(1, 1.0, 16);
  const auto dir = std::filesystem::temp_directory_path() / "resonant_profile_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream o(dir / "v.csv");
    for (int i = 0; i < 16; ++i) o << i * 0.5 << "\n";
  }
  const auto f = parse_profile("csv:v.csv", g, dir);
  CHECK(f(g.point(3)) == doctest::Approx(1.5));
  {
    std::ofstream o(dir / "short.csv");
    o << "1\n2\n";
  }
  CHECK_THROWS_AS(parse_profile("csv:short.csv", g, dir), PreconditionError);
  CHECK_THROWS_AS(parse_profile("csv:missing.csv", g, dir), PreconditionError);
}

TEST_CASE("time profiles") {
  const auto s = TimeProfile::parse("sin");
  CHECK(s.value(0.25, 1.0) == doctest::Approx(1.0));
  CHECK(s.value(1.25, 1.0) == doctest::Approx(1.0));
  CHECK(TimeProfile::parse("one").value(0.3, 1.0) == 1.0);
  CHECK(TimeProfile::parse("cos").value(1.0, 2.0) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(TimeProfile::parse("tan"), PreconditionError);
  // Hoelder constant actually bounds sampled differences
  const double C = s.holder_constant(1.0, 0.5);
  for (double t = 0.0; t < 1.0; t += 0.013)
    for (double d : {1e-4, 1e-2, 0.3}) CHECK(std::abs(s.value(t + d, 1.0) - s.value(t, 1.0)) <= C * std::sqrt(d) + 1e-15);
}

TEST_CASE("builtin list is sorted and documented") {
  const auto& l = builtin_profiles();
  REQUIRE(!l.empty());
  for (std::size_t i = 1; i < l.size(); ++i) CHECK(l[i - 1].name < l[i].name);
  for (const auto& p : l) CHECK(!p.description.empty());
}
