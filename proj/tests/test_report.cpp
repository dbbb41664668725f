#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "resonant/report.hpp"

using namespace resonant;
using report::Json;

TEST_CASE("12 significant digits") {
  CHECK(report::round12(0.1234567890123456) == 0.123456789012);
  CHECK(report::round12(-2.99993186233111) == -2.99993186233);
  CHECK(report::round12(1.0 / 3.0) == 0.333333333333);
  CHECK(report::round12(6.02214076e23) == 6.02214076e23);
  CHECK(report::round12(0.0) == 0.0);
  CHECK(std::signbit(report::round12(-0.0)) == false);
  CHECK(std::isinf(report::round12(std::numeric_limits<double>::infinity())));
}

TEST_CASE("rounding walks the document and nulls non-finite values") {
  Json j;
  j["a"] = 1.0 / 7.0;
  j["b"] = {1.0 / 3.0, std::nan(""), 3};
  j["c"]["d"] = std::numeric_limits<double>::infinity();
  j["e"] = "text";
  const Json r = report::rounded(j);
  CHECK(r["a"].get<double>() == 0.142857142857);
  CHECK(r["b"][1].is_null());
  CHECK(r["b"][2].get<int>() == 3);
  CHECK(r["c"]["d"].is_null());
  CHECK(r["e"] == "text");
  // key order preserved, so dumps are stable
  CHECK(report::dump(j) == report::dump(j));
  CHECK(report::dump(j).find("\"a\"") < report::dump(j).find("\"b\""));
}

TEST_CASE("certificate layout") {
  LLCertificate ll;
  ll.condition = LLCondition::eq_1_5;
  ll.worst_direction = {1.0};
  ll.worst_value = 0.5;
  ll.directions_tested = 2;
  DegreeResult d;
  d.degree = 1;
  d.zeros.push_back({{0.0}, 1, 0.4, 1.0});
  const Json c = report::certificate(ll, d);
  CHECK(c["condition"] == "eq_1_5");
  CHECK(c["degree"] == 1);
  CHECK(c["zeros"][0]["sign"] == 1);
  CHECK(c["zeros"][0]["coords"][0] == 0.0);
  CHECK(c.contains("worst_direction"));
  CHECK(c.contains("worst_value"));
}

TEST_CASE("periodic report fields") {
  PeriodicReport r;
  r.epsilon = 0.01;
  r.converged = true;
  r.index_local = -1;
  r.monodromy_leading_eigs = {{20.0, 0.0}};
  const Json j = report::to_json(r);
  for (const char* k : {"epsilon", "residual", "h1_norm", "index_local", "monodromy_leading_eigs", "apriori_ok"})
    CHECK(j.contains(k));
  CHECK(j["index_local"] == -1);
  r.index_local.reset();
  CHECK(report::to_json(r)["index_local"].is_null());
}

TEST_CASE("csv text") {
  const Grid g = build_grid(1, 1.0, 16);
  Field u(g);
  u[3] = 1.0 / 3.0;
  const auto csv = report::field_csv("snap", u);
  const std::string t = report::to_text(csv);
  CHECK(t.rfind("x,u\n-1,0\n", 0) == 0);
  CHECK(t.find("0.333333333333") != std::string::npos);
  CHECK(std::count(t.begin(), t.end(), '\n') == 17);
}
