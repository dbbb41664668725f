#include "resonant/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace resonant::report {

double round12(double v) {
  if (!std::isfinite(v) || v == 0.0) return v == 0.0 ? 0.0 : v;  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

Json rounded(const Json& j) {
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) return nullptr;
    return round12(v);
  }
  if (j.is_object()) {
    Json out = Json::object();
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = rounded(it.value());
    return out;
  }
  if (j.is_array()) {
    Json out = Json::array();
    for (const auto& e : j) out.push_back(rounded(e));
    return out;
  }
  return j;
}

std::string dump(const Json& j) { return rounded(j).dump(2) + "\n"; }

namespace {

Json complex_list(const std::vector<std::complex<double>>& v) {
  Json a = Json::array();
  for (const auto& z : v) a.push_back(Json::array({z.real(), z.imag()}));
  return a;
}

}  // namespace

Json to_json(const SpectralData& sd) {
  Json j;
  j["eigenvalues"] = sd.eigenvalues;
  j["above_threshold"] = sd.above_threshold;
  j["m_minus"] = sd.m_minus;
  j["kernel_dim"] = sd.kernel_dim;
  j["zero_tol"] = sd.zero_tol;
  j["v_bar_infinity"] = sd.v_bar_infinity;
  j["recentering_shift"] = sd.recentering_shift;
  j["max_relative_residual"] = sd.max_relative_residual;
  j["count_exhausted"] = sd.count_exhausted;
  j["ill_separated"] = sd.ill_separated;
  j["warnings"] = sd.warnings;
  return j;
}

Json to_json(const DegreeResult& d) {
  Json j;
  j["defined"] = d.defined;
  if (d.defined)
    j["degree"] = d.degree;
  else
    j["degree"] = nullptr;
  j["method"] = d.method == DegreeMethod::regular_zeros ? "regular_zeros" : "boundary_grid";
  j["boundary_min"] = d.boundary_min;
  if (d.boundary_degree)
    j["boundary_degree"] = *d.boundary_degree;
  else
    j["boundary_degree"] = nullptr;
  Json zs = Json::array();
  for (const auto& z : d.zeros)
    zs.push_back({{"coords", z.coords}, {"sign", z.jacobian_sign}, {"det", z.jacobian_det},
                  {"condition", z.jacobian_condition}});
  j["zeros"] = zs;
  j["note"] = d.note;
  return j;
}

Json to_json(const LLCertificate& c) {
  Json j;
  j["condition"] = to_string(c.condition);
  j["worst_direction"] = c.worst_direction;
  j["worst_value"] = c.worst_value;
  j["directions_tested"] = c.directions_tested;
  return j;
}

Json to_json(const SphereSignReport& s) {
  Json j;
  j["radii"] = s.radii;
  j["min_value"] = s.min_value;
  j["max_value"] = s.max_value;
  j["sign"] = s.sign;
  if (s.found())
    j["r0"] = s.r0;
  else
    j["r0"] = nullptr;
  return j;
}

Json to_json(const PeriodicReport& r) {
  Json j;
  j["epsilon"] = r.epsilon;
  j["status"] = r.status;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["residual"] = r.residual;
  j["residual_half_dt"] = r.residual_half_dt;
  j["h1_norm"] = r.h1_norm;
  if (r.index_local)
    j["index_local"] = *r.index_local;
  else
    j["index_local"] = nullptr;
  j["monodromy_unit_eigen"] = r.monodromy_unit_eigen;
  j["monodromy_leading_eigs"] = complex_list(r.monodromy_leading_eigs);
  j["apriori_ok"] = r.apriori_ok;
  if (r.predictor_distance)
    j["predictor_distance"] = *r.predictor_distance;
  else
    j["predictor_distance"] = nullptr;
  return j;
}

Json to_json(const IndexCheck& c) {
  Json j;
  j["epsilon"] = c.epsilon;
  j["ball_radius"] = c.ball_radius;
  j["m_minus"] = c.m_minus;
  j["degree"] = c.degree;
  j["expected"] = c.expected;
  j["index_sum"] = c.index_sum;
  j["all_defined"] = c.all_defined;
  j["matches"] = c.matches;
  Json fp = Json::array();
  for (const auto& r : c.fixed_points) fp.push_back(to_json(r));
  j["fixed_points"] = fp;
  return j;
}

Json to_json(const TailReport& t) {
  return {{"radii", t.radii}, {"alpha", t.alpha}, {"R", t.bound_R}, {"nonincreasing", t.nonincreasing},
          {"smallest", t.smallest}};
}

Json to_json(const PairwiseTailReport& t) {
  return {{"radii", t.radii}, {"alpha", t.alpha}, {"Q", t.Q}, {"eta", t.eta}, {"nonincreasing", t.nonincreasing}};
}

Json to_json(const ValidationReport& v) {
  Json checks = Json::array();
  for (const auto& c : v.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"worst_excess", c.worst_excess},
                      {"worst_sample", c.worst_sample}, {"samples", c.samples}});
  return {{"all_passed", v.all_passed()}, {"zero_bound_two_sided", v.zero_bound_two_sided}, {"seed", v.seed},
          {"checks", checks}};
}

Json certificate(const LLCertificate& ll, const DegreeResult& deg) {
  Json j = to_json(ll);
  if (deg.defined)
    j["degree"] = deg.degree;
  else
    j["degree"] = nullptr;
  Json zs = Json::array();
  for (const auto& z : deg.zeros) zs.push_back({{"coords", z.coords}, {"sign", z.jacobian_sign}});
  j["zeros"] = zs;
  return j;
}

Csv field_csv(const std::string& name, const Field& u) {
  Csv c;
  c.name = name;
  const Grid& g = u.grid;
  if (g.dimension() == 1)
    c.header = {"x", "u"};
  else
    c.header = {"x", "y", "u"};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point p = g.point(i);
    if (g.dimension() == 1)
      c.rows.push_back({p[0], u[i]});
    else
      c.rows.push_back({p[0], p[1], u[i]});
  }
  return c;
}

std::string to_text(const Csv& csv) {
  std::string out;
  for (std::size_t k = 0; k < csv.header.size(); ++k) out += (k ? "," : "") + csv.header[k];
  out += '\n';
  char buf[40];
  for (const auto& row : csv.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.12g", row[k] == 0.0 ? 0.0 : row[k]);
      if (k) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace resonant::report
