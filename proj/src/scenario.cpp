#include "resonant/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

#include "resonant/error.hpp"
#include "resonant/evolution.hpp"
#include "resonant/nonlinearity.hpp"
#include "resonant/periodic.hpp"
#include "resonant/profiles.hpp"
#include "resonant/resonance.hpp"
#include "resonant/spectrum.hpp"

namespace resonant {

namespace {

Json parse_json_text(const std::string& text) {
  return Json::parse(text);
}

const char* kDefaults = R"J({
  "name": "unnamed",
  "seed": 7,
  "grid": {"dim": 1, "half_width": 20.0, "points": 2049},
  "diffusion": [1.0],
  "potential": {"V0": "poschl_teller(2)", "Vinf": "constant(1)", "v_bar": 1.0},
  "period": 1.0,
  "spectrum": {"count": 16, "zero_tol": null, "recenter": true, "recenter_window": null},
  "nonlinearity": {
    "family": "separable", "c": "sech2(1)", "g": "tanh", "d": "sech(0.1)",
    "U": {"profile": "zero", "time": "one"}, "W": {"profile": "zero", "time": "one"},
    "theta": 0.5, "negate": false
  },
  "hypothesis_samples": 200,
  "integrator": {
    "scheme": "imex_cn", "steps_per_period": 64, "substep_tolerance": 0.0,
    "krylov_tol": 1e-10, "krylov_max_dim": 64, "blowup_h1": 1e6
  },
  "solve": {
    "epsilon_schedule": [0.01, 0.1, 0.5, 1.0], "newton_tol": 1e-8, "max_newton": 30,
    "gmres_tol": 1e-10, "gmres_maxdim": 40, "apriori_R0": null, "fd_step": 1e-6,
    "arnoldi_dim": 30
  },
  "averaged_map": {"time_nodes": 64},
  "ll": {"directions": 64},
  "sphere": {"radii": [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0], "directions": 64},
  "degree": {"radius_factors": [2.0, 4.0], "fallback_radius": 10.0, "starts_per_axis": 17},
  "averaging": {"epsilon": 0.01},
  "index": {"epsilon": 0.01, "ball_radius": null},
  "tail": {
    "radii": [5.0, 10.0, 15.0], "periods": 2, "initial": "gaussian(1,1)",
    "pair_initial": "gaussian(1,1)", "mu": [0.0, 1.0], "refine": true
  },
  "regression": {"n": [1, 2, 4, 8], "initial": "gaussian(1,1)"},
  "analyses": ["spectrum"]
})J";

struct Builtin {
  std::string name;
  std::string description;
  std::string patch;
};

const std::vector<Builtin>& builtins() {
  static const std::vector<Builtin> list{
      {"free_decay", "V0 = 0, no bound states; kernel-dependent analyses report no resonance",
       R"J({"name": "free_decay", "potential": {"V0": "zero"}, "nonlinearity": {"family": "zero"},
           "analyses": ["spectrum", "degree"]})J"},
      {"pt_lambda1", "V0 = 2 sech^2 x, spectrum {-1, 0} before re-centering onto V_inf = 1",
       R"J({"name": "pt_lambda1", "potential": {"V0": "poschl_teller(1)"}, "analyses": ["spectrum"]})J"},
      {"pt_lambda1_ll", "pt_lambda1 with f = sech^2 tanh u + 0.1 sech sin, certificate and index",
       R"J({"name": "pt_lambda1_ll", "potential": {"V0": "poschl_teller(1)"},
           "analyses": ["spectrum", "ll_check", "degree", "index_check"]})J"},
      {"pt_lambda2", "V0 = 6 sech^2 x, spectrum {-3, 0}",
       R"J({"name": "pt_lambda2", "analyses": ["spectrum"]})J"},
      {"pt_lambda2_ll", "pt_lambda2 with f = sech^2 tanh u + 0.1 sech sin, every analysis",
       R"J({"name": "pt_lambda2_ll", "analyses": ["spectrum", "ll_check", "degree", "averaging_check",
           "tail_check", "periodic_solve", "index_check", "convergence_regression"]})J"},
      {"pt_lambda2_ll_neg", "pt_lambda2 with -f, the opposite certificate",
       R"J({"name": "pt_lambda2_ll_neg", "nonlinearity": {"negate": true},
           "analyses": ["spectrum", "ll_check", "degree"]})J"},
      {"pt_lambda2_remark12", "pt_lambda2 with f = 0.1 sech sin + tanh(sech^2 u)",
       R"J({"name": "pt_lambda2_remark12",
           "nonlinearity": {"family": "remark12", "U": {"profile": "sech(0.1)", "time": "sin"},
                            "W": {"profile": "sech2(1)", "time": "one"}, "g": "tanh"},
           "analyses": ["spectrum", "ll_check", "degree"]})J"},
  };
  return list;
}

const std::vector<std::string> kOrder{"spectrum",       "ll_check",   "degree",      "averaging_check",
                                      "tail_check",     "periodic_solve", "index_check", "convergence_regression"};

const std::map<std::string, std::vector<std::string>> kDeps{
    {"spectrum", {}},
    {"ll_check", {"spectrum"}},
    {"degree", {"spectrum"}},
    {"averaging_check", {"degree"}},
    {"tail_check", {"spectrum"}},
    {"periodic_solve", {"degree"}},
    {"index_check", {"degree"}},
    {"convergence_regression", {"spectrum"}},
};

// ---------------------------------------------------------------- config access

// checks that `obj` only has keys that the defaults know about
void check_keys(const Json& obj, const Json& schema, const std::string& path) {
  if (!obj.is_object()) return;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const std::string p = path.empty() ? it.key() : path + "." + it.key();
    if (!schema.contains(it.key())) throw ConfigError(p + ": unknown key");
    const Json& s = schema.at(it.key());
    if (s.is_object()) {
      if (!it.value().is_object()) throw ConfigError(p + ": expected a table");
      check_keys(it.value(), s, p);
    }
  }
}

class Reader {
 public:
  explicit Reader(const Json& root) : root_(root) {}

  const Json& node(const std::string& path) const {
    const Json* cur = &root_;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) {
      if (!cur->is_object() || !cur->contains(part)) throw ConfigError(path + ": missing");
      cur = &cur->at(part);
    }
    return *cur;
  }
  bool is_null(const std::string& path) const {
    try {
      return node(path).is_null();
    } catch (const ConfigError&) {
      return true;
    }
  }
  double real(const std::string& path) const {
    const Json& j = node(path);
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(path + ": must be finite");
    return v;
  }
  double positive(const std::string& path) const {
    const double v = real(path);
    if (!(v > 0.0)) throw ConfigError(path + ": must be positive");
    return v;
  }
  long integer(const std::string& path) const {
    const Json& j = node(path);
    if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
    return j.get<long>();
  }
  std::string text(const std::string& path) const {
    const Json& j = node(path);
    if (!j.is_string()) throw ConfigError(path + ": expected a string");
    return j.get<std::string>();
  }
  bool boolean(const std::string& path) const {
    const Json& j = node(path);
    if (!j.is_boolean()) throw ConfigError(path + ": expected true or false");
    return j.get<bool>();
  }
  std::vector<double> reals(const std::string& path) const {
    const Json& j = node(path);
    if (!j.is_array()) throw ConfigError(path + ": expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]: expected a number");
      out.push_back(j[i].get<double>());
    }
    return out;
  }
  std::vector<std::string> texts(const std::string& path) const {
    const Json& j = node(path);
    if (!j.is_array()) throw ConfigError(path + ": expected a list of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_string()) throw ConfigError(path + "[" + std::to_string(i) + "]: expected a string");
      out.push_back(j[i].get<std::string>());
    }
    return out;
  }

 private:
  const Json& root_;
};

// rethrows library precondition errors under a field path
template <class F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

double sup_on_grid(const SpatialFn& fn, const Grid& g) {
  double s = 0.0;
  for (const Point& p : node_points(g)) s = std::max(s, std::abs(fn(p)));
  return s;
}

// ---------------------------------------------------------------- typed scenario

struct Parsed {
  std::string name;
  std::uint64_t seed = 0;
  Grid grid;
  DiffusionMatrix diffusion;
  SpatialFn v0, vinf;
  double v_bar = 1.0;
  double period = 1.0;
  int count = 16;
  double zero_tol = 0.0;
  bool recenter_on = true;
  double recenter_window = 0.0;
  Nonlinearity nl;
  int hypothesis_samples = 200;
  IntegratorConfig integ;
  SolveConfig solve;
  bool apriori_auto = true;
  int time_nodes = 64;
  int ll_directions = 64;
  std::vector<double> sphere_radii;
  int sphere_directions = 64;
  std::vector<double> degree_factors;
  double fallback_radius = 10.0;
  int starts_per_axis = 17;
  double averaging_eps = 0.01;
  double index_eps = 0.01;
  std::optional<double> index_ball;
  std::vector<double> tail_radii;
  int tail_periods = 2;
  std::string tail_initial, tail_pair_initial;
  std::vector<double> tail_mu;
  bool tail_refine = true;
  std::vector<int> regression_n;
  std::string regression_initial;
  std::vector<std::string> analyses;  // closure, in run order
  std::vector<std::string> requested;
  std::filesystem::path base_dir;
  Json nonlinearity_doc;
};

BoundedLipschitz parse_g(const Reader& r, const std::string& path) {
  return at_path(path, [&] { return BoundedLipschitz::builtin(r.text(path)); });
}

ModulatedProfile parse_modulated(const Reader& r, const std::string& path, const Grid& g,
                                 const std::filesystem::path& base) {
  ModulatedProfile m;
  const std::string prof = r.text(path + ".profile");
  m.profile = at_path(path + ".profile", [&] { return parse_profile(prof, g, base); });
  m.time = at_path(path + ".time", [&] { return TimeProfile::parse(r.text(path + ".time")); });
  m.sup = sup_on_grid(m.profile, g);
  m.description = prof + "*" + m.time.name();
  return m;
}

Nonlinearity build_nonlinearity(const Reader& r, const std::string& path, const Grid& g, double period,
                                const std::filesystem::path& base) {
  const std::string fam = r.text(path + ".family");
  const double theta = r.real(path + ".theta");
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError(path + ".theta: must lie in (0, 1)");
  Nonlinearity nl;
  if (fam == "zero") {
    nl = make_zero_nonlinearity(period);
  } else if (fam == "separable") {
    const auto c = at_path(path + ".c", [&] { return parse_profile(r.text(path + ".c"), g, base); });
    const auto d = at_path(path + ".d", [&] { return parse_profile(r.text(path + ".d"), g, base); });
    nl = at_path(path, [&] {
      return make_separable(c, sup_on_grid(c, g), parse_g(r, path + ".g"), d, sup_on_grid(d, g), period, theta);
    });
  } else if (fam == "remark12") {
    const auto U = parse_modulated(r, path + ".U", g, base);
    const auto W = parse_modulated(r, path + ".W", g, base);
    nl = at_path(path, [&] { return make_remark12(U, W, parse_g(r, path + ".g"), period, theta); });
  } else {
    throw ConfigError(path + ".family: unknown family '" + fam + "' (expected zero|separable|remark12)");
  }
  if (r.boolean(path + ".negate")) nl = nl.negated();
  return nl;
}

Parsed parse(const Json& doc, const std::filesystem::path& base) {
  check_keys(doc, default_config(), "");
  const Reader r(doc);
  Parsed p;
  p.base_dir = base;
  p.name = r.text("name");
  if (p.name.empty() || p.name.find_first_of("/\\ ") != std::string::npos)
    throw ConfigError("name: must be non-empty without spaces or slashes");
  const long seed = r.integer("seed");
  if (seed < 0) throw ConfigError("seed: must be nonnegative");
  p.seed = static_cast<std::uint64_t>(seed);

  const long dim = r.integer("grid.dim");
  const double L = r.positive("grid.half_width");
  const long M = r.integer("grid.points");
  p.grid = at_path("grid", [&] { return build_grid(static_cast<int>(dim), L, static_cast<int>(M)); });

  const auto a = r.reals("diffusion");
  p.diffusion = at_path("diffusion", [&] { return DiffusionMatrix::from_entries(static_cast<int>(dim), a); });

  p.v_bar = r.positive("potential.v_bar");
  p.v0 = at_path("potential.V0", [&] { return parse_profile(r.text("potential.V0"), p.grid, base); });
  p.vinf = at_path("potential.Vinf", [&] { return parse_profile(r.text("potential.Vinf"), p.grid, base); });
  p.period = r.positive("period");

  p.count = static_cast<int>(r.integer("spectrum.count"));
  if (p.count < 1) throw ConfigError("spectrum.count: must be >= 1");
  p.zero_tol = r.is_null("spectrum.zero_tol") ? 1e-6 * p.v_bar : r.positive("spectrum.zero_tol");
  p.recenter_on = r.boolean("spectrum.recenter");
  p.recenter_window =
      r.is_null("spectrum.recenter_window") ? 1e-2 * p.v_bar : r.positive("spectrum.recenter_window");

  p.nl = build_nonlinearity(r, "nonlinearity", p.grid, p.period, base);
  p.nonlinearity_doc = r.node("nonlinearity");
  p.hypothesis_samples = static_cast<int>(r.integer("hypothesis_samples"));
  if (p.hypothesis_samples < 100) throw ConfigError("hypothesis_samples: must be >= 100");

  const std::string scheme = r.text("integrator.scheme");
  if (scheme == "imex_cn")
    p.integ.scheme = Scheme::imex_cn;
  else if (scheme == "exp_euler")
    p.integ.scheme = Scheme::exp_euler;
  else
    throw ConfigError("integrator.scheme: expected imex_cn or exp_euler");
  const long steps = r.integer("integrator.steps_per_period");
  if (steps < 16) throw ConfigError("integrator.steps_per_period: must be >= 16");
  p.integ.dt = p.period / static_cast<double>(steps);
  p.integ.substep_tolerance = r.real("integrator.substep_tolerance");
  if (p.integ.substep_tolerance < 0.0) throw ConfigError("integrator.substep_tolerance: must be >= 0");
  p.integ.krylov_tol = r.positive("integrator.krylov_tol");
  p.integ.krylov_max_dim = static_cast<int>(r.integer("integrator.krylov_max_dim"));
  if (p.integ.krylov_max_dim < 4) throw ConfigError("integrator.krylov_max_dim: must be >= 4");
  p.integ.blowup_h1 = r.positive("integrator.blowup_h1");
  at_path("integrator", [&] { validate_config(p.integ, p.period); return 0; });

  p.solve.epsilon_schedule = r.reals("solve.epsilon_schedule");
  p.solve.newton_tol = r.real("solve.newton_tol");
  p.solve.max_newton = static_cast<int>(r.integer("solve.max_newton"));
  p.solve.gmres_tol = r.real("solve.gmres_tol");
  p.solve.gmres_maxdim = static_cast<int>(r.integer("solve.gmres_maxdim"));
  p.apriori_auto = r.is_null("solve.apriori_R0");
  p.solve.apriori_R0 = p.apriori_auto ? 0.0 : r.positive("solve.apriori_R0");
  p.solve.fd_step = r.real("solve.fd_step");
  p.solve.arnoldi_dim = static_cast<int>(r.integer("solve.arnoldi_dim"));
  p.solve.integrator = p.integ;
  try {
    validate(p.solve);
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());  // already carries "solve.<field>"
  }

  p.time_nodes = static_cast<int>(r.integer("averaged_map.time_nodes"));
  if (p.time_nodes < 16) throw ConfigError("averaged_map.time_nodes: must be >= 16");
  p.ll_directions = static_cast<int>(r.integer("ll.directions"));
  if (p.ll_directions < 2) throw ConfigError("ll.directions: must be >= 2");
  p.sphere_radii = r.reals("sphere.radii");
  if (p.sphere_radii.empty()) throw ConfigError("sphere.radii: must not be empty");
  for (std::size_t i = 0; i < p.sphere_radii.size(); ++i)
    if (!(p.sphere_radii[i] > 0.0) || (i > 0 && !(p.sphere_radii[i] > p.sphere_radii[i - 1])))
      throw ConfigError("sphere.radii: must be positive and strictly increasing");
  p.sphere_directions = static_cast<int>(r.integer("sphere.directions"));
  if (p.sphere_directions < 2) throw ConfigError("sphere.directions: must be >= 2");
  p.degree_factors = r.reals("degree.radius_factors");
  if (p.degree_factors.empty()) throw ConfigError("degree.radius_factors: must not be empty");
  for (double f : p.degree_factors)
    if (!(f > 1.0)) throw ConfigError("degree.radius_factors: entries must exceed 1");
  p.fallback_radius = r.positive("degree.fallback_radius");
  p.starts_per_axis = static_cast<int>(r.integer("degree.starts_per_axis"));
  if (p.starts_per_axis < 1) throw ConfigError("degree.starts_per_axis: must be >= 1");

  p.averaging_eps = r.positive("averaging.epsilon");
  if (p.averaging_eps > 1.0) throw ConfigError("averaging.epsilon: must lie in (0, 1]");
  p.index_eps = r.positive("index.epsilon");
  if (p.index_eps > 1.0) throw ConfigError("index.epsilon: must lie in (0, 1]");
  if (!r.is_null("index.ball_radius")) p.index_ball = r.positive("index.ball_radius");

  p.tail_radii = r.reals("tail.radii");
  if (p.tail_radii.empty()) throw ConfigError("tail.radii: must not be empty");
  for (std::size_t i = 0; i < p.tail_radii.size(); ++i)
    if (!(p.tail_radii[i] > 0.0) || (i > 0 && !(p.tail_radii[i] > p.tail_radii[i - 1])))
      throw ConfigError("tail.radii: must be positive and strictly increasing");
  p.tail_periods = static_cast<int>(r.integer("tail.periods"));
  if (p.tail_periods < 1) throw ConfigError("tail.periods: must be >= 1");
  p.tail_initial = r.text("tail.initial");
  p.tail_pair_initial = r.text("tail.pair_initial");
  at_path("tail.initial", [&] { return parse_profile(p.tail_initial, p.grid, base); });
  at_path("tail.pair_initial", [&] { return parse_profile(p.tail_pair_initial, p.grid, base); });
  p.tail_mu = r.reals("tail.mu");
  if (p.tail_mu.size() != 2) throw ConfigError("tail.mu: expected two values");
  for (double m : p.tail_mu)
    if (!(m >= 0.0 && m <= 1.0)) throw ConfigError("tail.mu: entries must lie in [0, 1]");
  p.tail_refine = r.boolean("tail.refine");

  for (double v : r.reals("regression.n")) {
    if (v < 1.0 || v != std::floor(v)) throw ConfigError("regression.n: entries must be positive integers");
    p.regression_n.push_back(static_cast<int>(v));
  }
  if (p.regression_n.size() < 2) throw ConfigError("regression.n: need at least two values");
  p.regression_initial = r.text("regression.initial");
  at_path("regression.initial", [&] { return parse_profile(p.regression_initial, p.grid, base); });

  p.requested = r.texts("analyses");
  std::set<std::string> want;
  std::function<void(const std::string&)> add = [&](const std::string& a) {
    if (!kDeps.count(a)) throw ConfigError("analyses: unknown analysis '" + a + "'");
    if (want.insert(a).second)
      for (const auto& d : kDeps.at(a)) add(d);
  };
  for (const auto& a : p.requested) add(a);
  for (const auto& a : kOrder)
    if (want.count(a)) p.analyses.push_back(a);
  return p;
}

// ---------------------------------------------------------------- analyses

struct State {
  const Parsed& p;
  std::optional<DiscreteOperator> op;
  std::optional<SpectralData> sd;
  std::optional<LLCertificate> ll;
  std::optional<SphereSignReport> sphere;
  std::optional<DegreeResult> degree;
  double degree_radius = 0.0;
  std::vector<report::Csv> csv;
};

// spectrum with optional re-centering on a given grid
std::pair<DiscreteOperator, SpectralData> spectral_setup(const Parsed& p, const Grid& g) {
  DiscreteOperator op = assemble_operator(g, p.diffusion, p.v0, p.vinf, p.v_bar);
  SpectrumOptions so;
  so.seed = p.seed;
  SpectralData sd = compute_low_spectrum(op, p.count, p.zero_tol, so);
  if (p.recenter_on) {
    auto rc = recenter(op, sd, p.recenter_window);
    return {std::move(rc.op), std::move(rc.spectrum)};
  }
  return {std::move(op), std::move(sd)};
}

void require_resonance(const State& s) {
  if (!s.sd || s.sd->kernel_dim < 1) throw PreconditionError("no resonance: kernel is trivial");
}

Json run_spectrum(State& s) {
  auto [op, sd] = spectral_setup(s.p, s.p.grid);
  Json j = report::to_json(sd);
  j["raw_eigenvalues_before_recentering"] = nullptr;
  if (sd.recentering_shift != 0.0) {
    std::vector<double> raw;
    for (double v : sd.eigenvalues) raw.push_back(v + sd.recentering_shift);
    j["raw_eigenvalues_before_recentering"] = raw;
  }
  for (std::size_t k = 0; k < sd.kernel_basis.size(); ++k)
    s.csv.push_back(report::field_csv("kernel_" + std::to_string(k), sd.kernel_basis[k]));
  s.op = std::move(op);
  s.sd = std::move(sd);
  return j;
}

Json run_ll(State& s) {
  require_resonance(s);
  const AveragedMap am(*s.sd, s.p.nl, s.p.time_nodes);
  s.ll = ll_check(am, std::max(s.p.ll_directions, 2 * am.kernel_dim()), s.p.seed);
  return report::to_json(*s.ll);
}

Json run_degree(State& s) {
  require_resonance(s);
  if (s.sd->kernel_dim > 3) throw PreconditionError("degree: kernel dimension above 3 is not supported");
  const AveragedMap am(*s.sd, s.p.nl, s.p.time_nodes);
  s.sphere = sphere_sign_check(am, s.p.sphere_radii, s.p.sphere_directions, s.p.seed);
  Json j;
  j["sphere_sign"] = report::to_json(*s.sphere);
  std::vector<double> radii;
  if (s.sphere->found()) {
    for (double f : s.p.degree_factors) radii.push_back(f * s.sphere->r0);
  } else {
    radii.push_back(s.p.fallback_radius);
    j["note"] = "no sphere-sign radius found; degree on the fallback radius only";
  }
  DegreeConfig dc;
  dc.starts_per_axis = s.p.starts_per_axis;
  const CoordMap map = [&am](const Coords& c) { return am(c); };
  Json results = Json::array();
  bool consistent = true;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    DegreeResult d = brouwer_degree(map, radii[i], am.kernel_dim(), dc);
    Json dj = report::to_json(d);
    dj["radius"] = radii[i];
    results.push_back(dj);
    if (i == 0) {
      s.degree = d;
      s.degree_radius = radii[i];
    } else if (d.defined != s.degree->defined || d.degree != s.degree->degree) {
      consistent = false;
    }
  }
  j["results"] = results;
  j["radius_independent"] = consistent;
  if (s.degree->defined)
    j["degree"] = s.degree->degree;
  else
    j["degree"] = nullptr;
  j["kernel_dim"] = am.kernel_dim();
  if (s.ll) j["certificate"] = report::certificate(*s.ll, *s.degree);
  return j;
}

SolveConfig solve_config(const State& s) {
  SolveConfig c = s.p.solve;
  if (s.p.apriori_auto) {
    if (!s.sphere || !s.sphere->found())
      throw PreconditionError("solve.apriori_R0 is unset and no sphere-sign radius is available");
    c.apriori_R0 = 4.0 * s.sphere->r0;
  }
  return c;
}

const DegreeResult& require_degree(const State& s) {
  if (!s.degree) throw PreconditionError("degree certificate unavailable");
  if (!s.degree->defined || s.degree->degree == 0 || s.degree->zeros.empty())
    throw PreconditionError("degree certificate is zero or undefined; no existence guarantee to follow");
  return *s.degree;
}

Json run_averaging(State& s) {
  const DegreeResult& deg = require_degree(s);
  SolveConfig cfg = solve_config(s);
  const DegreeZero& z0 = *std::min_element(deg.zeros.begin(), deg.zeros.end(), [](const auto& a, const auto& b) {
    double na = 0, nb = 0;
    for (double v : a.coords) na += v * v;
    for (double v : b.coords) nb += v * v;
    return na < nb;
  });
  const Field predictor = reconstruct(*s.sd, z0.coords);
  const double eps = s.p.averaging_eps;
  const auto a = find_periodic(*s.op, s.p.nl, *s.sd, cfg, predictor, eps);
  const auto b = find_periodic(*s.op, s.p.nl, *s.sd, cfg, predictor, eps / 2.0);
  const double da = norm_h1(linear_combination(1.0, a.fixed_point, -1.0, predictor));
  const double db = norm_h1(linear_combination(1.0, b.fixed_point, -1.0, predictor));
  Json j;
  j["epsilon"] = eps;
  j["zero_coords"] = z0.coords;
  j["distance"] = da;
  j["distance_half_eps"] = db;
  j["constant"] = da / eps;
  j["halving_ratio"] = da > 0.0 ? db / da : 0.0;
  j["within_10_eps"] = da <= 10.0 * eps;
  j["halves"] = da > 0.0 && std::abs(db / da - 0.5) <= 0.15;
  j["residuals"] = {a.residual, b.residual};
  return j;
}

Field profile_field(const Parsed& p, const std::string& text, const Grid& g) {
  return sample(g, parse_profile(text, g, p.base_dir));
}

struct TailRun {
  TailReport single;
  PairwiseTailReport pair;
};

TailRun tail_on(const Parsed& p, const DiscreteOperator& op, const SpectralData& sd) {
  const Grid& g = op.grid();
  const double t_end = p.tail_periods * p.period;
  IntegratorConfig ic = p.integ;
  ic.epsilon = 1.0;
  const Field u0 = profile_field(p, p.tail_initial, g);
  const Field u1 = profile_field(p, p.tail_pair_initial, g);
  TailRun out;
  const Trajectory tr = Propagator(op, nemytskii_forcing(p.nl, g), ic).integrate(u0, t_end);
  HomotopyConfig h1, h2;
  h1.mu = p.tail_mu[0];
  h2.mu = p.tail_mu[1];
  const Trajectory ta = Propagator(op, homotopy_forcing(p.nl, sd, h1), ic).integrate(u0, t_end);
  const Trajectory tb = Propagator(op, homotopy_forcing(p.nl, sd, h2), ic).integrate(u1, t_end);
  // R bounds every solution considered in H1 over the whole window
  double R = 0.0;
  for (const Trajectory* t : {&tr, &ta, &tb})
    for (const Field& u : t->states) R = std::max(R, norm_h1(u));
  out.single = verify_tail_bound(tr, op.v_bar_infinity(), p.tail_radii, R);
  out.pair = verify_pairwise_tail(ta, tb, op.v_bar_infinity(), p.tail_radii, homotopy_eta(h1, h2));
  return out;
}

Json run_tail(State& s) {
  const TailRun base = tail_on(s.p, *s.op, *s.sd);
  Json j;
  j["single"] = report::to_json(base.single);
  j["pairwise"] = report::to_json(base.pair);
  if (s.p.tail_refine) {
    const Grid& g = s.p.grid;
    const Grid fine = build_grid(g.dimension(), g.half_width(), 2 * g.points_per_axis() - 1);
    auto [op2, sd2] = spectral_setup(s.p, fine);
    const TailRun ref = tail_on(s.p, op2, sd2);
    j["pairwise_refined"] = report::to_json(ref.pair);
    const double q = base.pair.Q, q2 = ref.pair.Q;
    const double change = std::max(q, q2) > 0.0 ? std::abs(q2 - q) / std::max(q, q2) : 0.0;
    j["Q_relative_change"] = change;
    j["Q_stable"] = change <= 0.2;
  }
  return j;
}

Json run_periodic(State& s) {
  const DegreeResult& deg = require_degree(s);
  const SolveConfig cfg = solve_config(s);
  const auto reps = continue_in_epsilon(*s.op, s.p.nl, *s.sd, cfg, deg);
  Json j;
  j["apriori_R0"] = cfg.apriori_R0;
  j["schedule"] = cfg.epsilon_schedule;
  Json arr = Json::array();
  bool all_conv = true, all_ok = true;
  for (const auto& r : reps) {
    arr.push_back(report::to_json(r));
    all_conv = all_conv && r.converged;
    all_ok = all_ok && r.apriori_ok;
  }
  j["reports"] = arr;
  j["completed"] = reps.size() == cfg.epsilon_schedule.size();
  j["all_converged"] = all_conv;
  j["apriori_ok"] = all_ok;
  if (!reps.empty()) s.csv.push_back(report::field_csv("fixed_point", reps.back().fixed_point));
  return j;
}

Json run_index(State& s) {
  const DegreeResult& deg = require_degree(s);
  const SolveConfig cfg = solve_config(s);
  const double ball = s.p.index_ball ? *s.p.index_ball : s.degree_radius;
  const IndexCheck chk = index_check(*s.op, s.p.nl, *s.sd, cfg, deg, s.p.index_eps, ball);
  Json j = report::to_json(chk);
  // the same count with the orientation of the resonant directions included
  const int kern = s.sd->kernel_dim;
  j["expected_with_kernel_orientation"] = ((s.sd->m_minus + kern) % 2 == 0 ? 1 : -1) * chk.degree;
  return j;
}

Json run_regression(State& s) {
  const Parsed& p = s.p;
  const Grid& g = p.grid;
  const Field u0 = profile_field(p, p.regression_initial, g);
  IntegratorConfig ic = p.integ;
  ic.epsilon = 1.0;
  auto traj = [&](const Nonlinearity& nl) { return Propagator(*s.op, nemytskii_forcing(nl, g), ic).integrate(u0, p.period); };
  const Trajectory lin = traj(make_zero_nonlinearity(p.period));
  std::vector<double> dev;
  for (int n : p.regression_n) {
    const Trajectory tn = traj(p.nl.scaled(1.0 / n));
    double worst = 0.0;
    for (std::size_t i = 0; i < tn.times.size(); ++i) {
      const double t = tn.times[i];
      if (t < 0.25 * p.period - 1e-12 || t > 0.75 * p.period + 1e-12) continue;
      worst = std::max(worst, norm_h1(linear_combination(1.0, tn.states[i], -1.0, lin.states[i])));
    }
    dev.push_back(worst);
  }
  std::vector<double> ratios;
  bool ok = true;
  for (std::size_t i = 1; i < dev.size(); ++i) {
    const double r = dev[i] > 0.0 ? dev[i - 1] / dev[i] : std::numeric_limits<double>::infinity();
    ratios.push_back(r);
    if (p.regression_n[i] == 2 * p.regression_n[i - 1] && !(r >= 1.5)) ok = false;
  }
  Json j;
  j["n"] = p.regression_n;
  j["deviation"] = dev;
  j["ratios"] = ratios;
  j["decreasing_1_5x"] = ok;
  return j;
}

const std::map<std::string, Json (*)(State&)> kRunners{
    {"spectrum", run_spectrum},           {"ll_check", run_ll},       {"degree", run_degree},
    {"averaging_check", run_averaging},   {"tail_check", run_tail},   {"periodic_solve", run_periodic},
    {"index_check", run_index},           {"convergence_regression", run_regression},
};

Json load_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_json_text(ss.str());
  } catch (const Json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

Json resolve_rec(Json doc, const std::filesystem::path& base, int depth) {
  if (depth > 8) throw ConfigError("extends: chain too deep (cycle?)");
  if (!doc.is_object()) throw ConfigError("<root>: expected a table");
  Json parent = default_config();
  if (doc.contains("extends")) {
    const Json ext = doc["extends"];
    doc.erase("extends");
    if (!ext.is_string()) throw ConfigError("extends: expected a string");
    const std::string e = ext.get<std::string>();
    const auto& names = builtin_scenario_names();
    if (std::find(names.begin(), names.end(), e) != names.end()) {
      parent = builtin_scenario(e);
    } else {
      const std::filesystem::path f = base / e;
      if (!std::filesystem::exists(f)) throw ConfigError("extends: '" + e + "' is neither a built-in nor a file");
      parent = resolve_rec(load_file(f), f.parent_path(), depth + 1);
    }
  }
  parent.merge_patch(doc);
  return parent;
}

}  // namespace

const Json& default_config() {
  static const Json d = parse_json_text(kDefaults);
  return d;
}

const std::vector<std::string>& builtin_scenario_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& b : builtins()) v.push_back(b.name);
    std::sort(v.begin(), v.end());
    return v;
  }();
  return names;
}

Json builtin_scenario(const std::string& name) {
  for (const auto& b : builtins()) {
    if (b.name != name) continue;
    Json d = default_config();
    d.merge_patch(parse_json_text(b.patch));
    return d;
  }
  throw ConfigError("extends: unknown built-in scenario '" + name + "'");
}

Json load_config(const std::filesystem::path& file) {
  return resolve_rec(load_file(file), file.parent_path(), 0);
}

Json resolve_config(const Json& doc, const std::filesystem::path& base_dir) { return resolve_rec(doc, base_dir, 0); }

const std::vector<std::string>& analysis_order() { return kOrder; }

ValidationSummary validate_scenario(const Json& resolved, const std::filesystem::path& base_dir) {
  const Parsed p = parse(resolved, base_dir);
  at_path("potential", [&] { return assemble_operator(p.grid, p.diffusion, p.v0, p.vinf, p.v_bar); });
  ValidationSummary s;
  s.name = p.name;
  s.seed = p.seed;
  s.analyses = p.analyses;
  s.nodes = p.grid.size();
  return s;
}

RunOutput run_scenario(const Json& resolved, const std::filesystem::path& base_dir) {
  const Parsed p = parse(resolved, base_dir);
  at_path("potential", [&] { return assemble_operator(p.grid, p.diffusion, p.v0, p.vinf, p.v_bar); });

  RunOutput out;
  out.name = p.name;
  Json bundle;
  bundle["scenario"] = p.name;
  bundle["seed"] = p.seed;
  bundle["nonlinearity"] = p.nl.description;
  {
    const auto v = validate_hypotheses(p.nl, p.grid, p.hypothesis_samples, p.seed);
    bundle["hypotheses"] = report::to_json(v);
  }
  State st{p, {}, {}, {}, {}, {}, 0.0, {}};
  Json timeline = Json::array();
  Json analyses = Json::object();
  std::set<std::string> failed;
  for (const auto& name : p.analyses) {
    Json entry;
    std::string blocked;
    for (const auto& d : kDeps.at(name))
      if (failed.count(d)) blocked = d;
    if (!blocked.empty()) {
      entry["status"] = "skipped";
      entry["reason"] = "dependency '" + blocked + "' failed";
      failed.insert(name);
    } else {
      timeline.push_back(name);
      try {
        entry = kRunners.at(name)(st);
        entry["status"] = "ok";
      } catch (const std::exception& e) {
        entry = Json::object();
        entry["status"] = "error";
        entry["error"] = e.what();
        failed.insert(name);
      }
    }
    entry["requested"] = std::find(p.requested.begin(), p.requested.end(), name) != p.requested.end();
    analyses[name] = entry;
  }
  out.partial = !failed.empty();
  bundle["timeline"] = timeline;
  bundle["analyses"] = analyses;
  bundle["status"] = out.partial ? "partial" : "ok";
  Json art = Json::array();
  for (const auto& c : st.csv) art.push_back(p.name + "_" + c.name + ".csv");
  bundle["artifacts"] = art;
  bundle["config"] = resolved;
  out.bundle = std::move(bundle);
  out.csv = std::move(st.csv);
  return out;
}

void write_outputs(const RunOutput& out, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  auto put = [&](const std::filesystem::path& f, const std::string& text) {
    std::ofstream o(f, std::ios::binary);
    o << text;
    if (!o) throw Error("cannot write " + f.string());
  };
  put(dir / (out.name + ".json"), report::dump(out.bundle));
  for (const auto& c : out.csv) put(dir / (out.name + "_" + c.name + ".csv"), report::to_text(c));
}

std::string list_builtins() {
  std::ostringstream o;
  o << "potentials\n";
  for (const auto& pi : builtin_profiles()) o << "  " << pi.name << "  " << pi.description << "\n";
  o << "\nnonlinearity families\n";
  o << "  zero  f = 0\n";
  o << "  separable  f(t,x,u) = c(x) g(u) + d(x) sin(2 pi t/T)\n";
  o << "  remark12(U=..., W=..., g=tanh|clamped|atan)  f(t,x,u) := U(x,t) + g(W(x,t)u)\n";
  o << "\nbounded functions g\n  atan\n  clamped\n  tanh\n";
  o << "\ntime profiles\n  cos\n  one\n  sin\n";
  o << "\nscenarios\n";
  for (const auto& n : builtin_scenario_names())
    for (const auto& b : builtins())
      if (b.name == n) o << "  " << b.name << "  " << b.description << "\n";
  o << "\nanalyses\n";
  for (const auto& a : kOrder) o << "  " << a << "\n";
  return o.str();
}

}  // namespace resonant
