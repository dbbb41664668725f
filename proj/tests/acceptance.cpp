// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "resonant/error.hpp"
#include "resonant/evolution.hpp"
#include "resonant/nonlinearity.hpp"
#include "resonant/scenario.hpp"
#include "resonant/spectrum.hpp"

using namespace resonant;

namespace {

int failures = 0;

void verdict(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Run {
  RunOutput out;
  double seconds = 0.0;
  const Json& a(const std::string& name) const { return out.bundle["analyses"][name]; }
  bool ok(const std::string& name) const { return a(name).value("status", "") == "ok"; }
};

Run run(const std::string& base, Json patch) {
  Json doc = {{"extends", base}};
  if (patch.is_object()) doc.merge_patch(patch);
  const auto t0 = std::chrono::steady_clock::now();
  Run r{run_scenario(resolve_config(doc, std::filesystem::current_path()), std::filesystem::current_path())};
  r.seconds = seconds_since(t0);
  return r;
}

const report::Csv* find_csv(const Run& r, const std::string& name) {
  for (const auto& c : r.out.csv)
    if (c.name == name) return &c;
  return nullptr;
}

// L2 distance on the grid to the normalized sech(x) tanh(x), sign taken from the overlap
double kernel_error(const report::Csv& k) {
  if (k.rows.size() < 2) return INFINITY;
  const double h = k.rows[1][0] - k.rows[0][0];
  std::vector<double> ref;
  double nn = 0.0, dot = 0.0;
  for (const auto& row : k.rows) {
    const double x = row[0];
    ref.push_back(std::tanh(x) / std::cosh(x));
    nn += ref.back() * ref.back() * h;
    dot += ref.back() * row[1] * h;
  }
  const double s = (dot < 0 ? -1.0 : 1.0) / std::sqrt(nn);
  double err = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) err += std::pow(k.rows[i][1] - s * ref[i], 2) * h;
  return std::sqrt(err);
}

struct SpectralFacts {
  bool ok = false;
  double lo = 0, hi = 0, kerr = 0;
  int m_minus = -1, kernel_dim = -1;
};

SpectralFacts spectral_facts(const Run& r) {
  SpectralFacts f;
  if (!r.ok("spectrum")) return f;
  const Json& s = r.a("spectrum");
  const Json& raw = s["raw_eigenvalues_before_recentering"].is_null() ? s["eigenvalues"]
                                                                        : s["raw_eigenvalues_before_recentering"];
  if (raw.size() != 2) return f;
  f.lo = raw[0].get<double>();
  f.hi = raw[1].get<double>();
  f.m_minus = s["m_minus"];
  f.kernel_dim = s["kernel_dim"];
  const report::Csv* k = find_csv(r, "kernel_0");
  f.kerr = k ? kernel_error(*k) : INFINITY;
  f.ok = true;
  return f;
}

bool spectral_pass(const SpectralFacts& f) {
  return f.ok && std::abs(f.lo + 3.0) <= 1e-3 && std::abs(f.hi) <= 1e-3 && f.m_minus == 1 && f.kernel_dim == 1 &&
         f.kerr <= 1e-3;
}

std::string spectral_text(const SpectralFacts& f) {
  if (!f.ok) return "spectrum did not run";
  char buf[256];
  std::snprintf(buf, sizeof buf, "eigenvalues %.6g %.6g, m_minus %d, kernel_dim %d, kernel L2 error %.3g", f.lo, f.hi,
                f.m_minus, f.kernel_dim, f.kerr);
  return buf;
}

struct DegreeFacts {
  bool ok = false;
  std::string condition;
  std::vector<int> degrees;
  double r0 = 0.0;
};

DegreeFacts degree_facts(const Run& r) {
  DegreeFacts f;
  if (!r.ok("ll_check") || !r.ok("degree")) return f;
  f.condition = r.a("ll_check")["condition"];
  const Json& d = r.a("degree");
  if (d["sphere_sign"]["r0"].is_number()) f.r0 = d["sphere_sign"]["r0"];
  for (const auto& e : d["results"]) f.degrees.push_back(e["degree"].is_number() ? e["degree"].get<int>() : 0);
  f.ok = true;
  return f;
}

bool degrees_all(const DegreeFacts& f, int want) {
  if (!f.ok || f.degrees.size() != 2 || f.r0 <= 0.0) return false;
  for (int d : f.degrees)
    if (d != want) return false;
  return true;
}

std::string degree_text(const DegreeFacts& f) {
  if (!f.ok) return "ll_check or degree failed";
  std::string s = f.condition + ", R0 " + fmt("%.4g", f.r0) + ", degrees";
  for (int d : f.degrees) s += " " + std::to_string(d);
  return s;
}

struct IndexFacts {
  bool ok = false;
  int sum = 0, expected = 0, with_kernel = 0, points = 0;
  bool all_defined = false;
  double worst_gap = INFINITY;  // smallest distance of a Ritz value from 1
  std::vector<double> h1;
};

IndexFacts index_facts(const Run& r) {
  IndexFacts f;
  if (!r.ok("index_check")) return f;
  const Json& c = r.a("index_check");
  f.sum = c["index_sum"];
  f.expected = c["expected"];
  f.with_kernel = c["expected_with_kernel_orientation"];
  f.all_defined = c["all_defined"];
  f.points = static_cast<int>(c["fixed_points"].size());
  for (const auto& fp : c["fixed_points"]) {
    f.h1.push_back(fp["h1_norm"]);
    for (const auto& e : fp["monodromy_leading_eigs"])
      f.worst_gap = std::min(f.worst_gap, std::hypot(e[0].get<double>() - 1.0, e[1].get<double>()));
  }
  f.ok = true;
  return f;
}

std::string index_text(const IndexFacts& f) {
  if (!f.ok) return "index_check failed";
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%d fixed point(s), index sum %d, expected %d; with the kernel orientation the formula gives %d; "
                "closest Ritz value to 1 at distance %.3g",
                f.points, f.sum, f.expected, f.with_kernel, f.worst_gap);
  return buf;
}

bool within(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)); }

}  // namespace

int main() {
  try {
    const Run spec_only = run("pt_lambda2", {{"analyses", {"spectrum"}}});
    const SpectralFacts s1 = spectral_facts(spec_only);
    verdict(1, spectral_pass(s1) && spec_only.seconds <= 30.0,
            spectral_text(s1) + fmt(", %.2f s", spec_only.seconds));

    {
      // epsilon = 0 flow from the kernel function
      const Grid g = build_grid(1, 20.0, 2049);
      const DiscreteOperator op0 =
          assemble_operator(g, DiffusionMatrix::identity(1), parse_profile("poschl_teller(2)", g),
                            parse_profile("constant(1)", g), 1.0);
      const SpectralData sd0 = compute_low_spectrum(op0, 16, 1e-6);
      const Recentered rc = recenter(op0, sd0, 1e-2);
      IntegratorConfig ic;
      ic.dt = 1.0 / 64.0;
      ic.epsilon = 0.0;
      if (rc.spectrum.kernel_dim < 1) {
        verdict(2, false, "no kernel function");
      } else {
        const Field& phi = rc.spectrum.kernel_basis[0];
        const Field u1 = translation_operator(rc.op, make_zero_nonlinearity(1.0), ic, phi);
        const double d = norm_l2(linear_combination(1.0, u1, -1.0, phi));
        verdict(2, d <= 1e-6, fmt("||Phi_T(phi) - phi||_L2 = %.3g", d));
      }
    }

    // 3, 4, 5, 6 and 8 share one run of the full scenario at M = 2049
    const Run full = run("pt_lambda2_ll", {});
    std::printf("  (full scenario ran in %.1f s, status %s)\n", full.seconds,
                full.out.bundle["status"].get<std::string>().c_str());

    if (full.ok("tail_check")) {
      const Json& t = full.a("tail_check");
      const Json& alpha = t["single"]["alpha"];
      bool nonincr = true;
      for (std::size_t i = 1; i < alpha.size(); ++i)
        if (alpha[i].get<double>() > alpha[i - 1].get<double>()) nonincr = false;
      const double a15 = alpha.back();
      const bool q_ok = t.contains("Q_stable") && t["Q_stable"].get<bool>();
      const double change = t.value("Q_relative_change", INFINITY);
      verdict(3, nonincr && a15 < 1e-4 && q_ok,
              fmt("alpha(15) = %.3g", a15) + (nonincr ? ", nonincreasing" : ", NOT nonincreasing") +
                  fmt(", pairwise Q change under refinement %.3g", change));
    } else {
      verdict(3, false, "tail_check failed: " + full.a("tail_check").value("error", std::string("?")));
    }

    const DegreeFacts d4 = degree_facts(full);
    const Run neg = run("pt_lambda2_ll_neg", {{"analyses", {"spectrum", "ll_check", "degree"}}});
    const DegreeFacts d4n = degree_facts(neg);
    verdict(4,
            d4.condition == "eq_1_5" && degrees_all(d4, 1) && d4n.condition == "eq_1_6" && degrees_all(d4n, -1),
            "f: " + degree_text(d4) + "; -f: " + degree_text(d4n));

    const IndexFacts i5 = index_facts(full);
    verdict(5, i5.ok && i5.all_defined && i5.worst_gap > 1e-6 && i5.sum == -1, index_text(i5));

    if (full.ok("averaging_check")) {
      const Json& a = full.a("averaging_check");
      const double dist = a["distance"], ratio = a["halving_ratio"];
      const bool ok = a["within_10_eps"].get<bool>() && std::abs(ratio - 0.5) <= 0.15;
      verdict(6, ok, fmt("distance %.4g", dist) + fmt(" (bound 10 eps = %.3g)", 10.0 * a["epsilon"].get<double>()) +
                         fmt(", halving ratio %.4g", ratio));
    } else {
      verdict(6, false, "averaging_check failed");
    }

    {
      const Run r7 = run("pt_lambda2_ll", {{"grid", {{"points", 1025}}}, {"analyses", {"periodic_solve"}}});
      if (r7.ok("periodic_solve")) {
        const Json& p = r7.a("periodic_solve");
        double worst = 0.0;
        for (const auto& rep : p["reports"]) worst = std::max(worst, rep["residual"].get<double>());
        const bool ok = p["completed"].get<bool>() && p["all_converged"].get<bool>() && p["apriori_ok"].get<bool>() &&
                        worst <= 1e-8 && r7.seconds <= 300.0;
        verdict(7, ok,
                std::to_string(p["reports"].size()) + " epsilon steps" + fmt(", worst residual %.3g", worst) +
                    (p["apriori_ok"].get<bool>() ? ", a priori bound held" : ", a priori bound exceeded") +
                    fmt(", %.1f s", r7.seconds));
      } else {
        verdict(7, false, "periodic_solve failed: " + r7.a("periodic_solve").value("error", std::string("?")));
      }
    }

    if (full.ok("convergence_regression")) {
      const Json& g = full.a("convergence_regression");
      std::string txt = "ratios";
      for (const auto& r : g["ratios"]) txt += fmt(" %.3g", r.get<double>());
      verdict(8, g["decreasing_1_5x"].get<bool>(), txt);
    } else {
      verdict(8, false, "convergence_regression failed");
    }

    {
      const Json fine = {{"grid", {{"points", 4097}, {"half_width", 30}}}};
      Json sf = fine;
      sf["analyses"] = {"spectrum"};
      const Run f1 = run("pt_lambda2", sf);
      Json pf = fine;
      pf["analyses"] = {"ll_check", "degree", "index_check"};
      const Run f45 = run("pt_lambda2_ll", pf);
      Json nf = fine;
      nf["analyses"] = {"ll_check", "degree"};
      const Run fneg = run("pt_lambda2_ll_neg", nf);

      const SpectralFacts s9 = spectral_facts(f1);
      const DegreeFacts d9 = degree_facts(f45), d9n = degree_facts(fneg);
      const IndexFacts i9 = index_facts(f45);
      std::string why;
      bool ok = s9.ok && d9.ok && d9n.ok && i9.ok && s1.ok && d4.ok && d4n.ok && i5.ok;
      if (ok) {
        if (s9.m_minus != s1.m_minus || s9.kernel_dim != s1.kernel_dim) why += " spectral integers moved;";
        if (d9.degrees != d4.degrees || d9n.degrees != d4n.degrees || d9.condition != d4.condition ||
            d9n.condition != d4n.condition)
          why += " degrees moved;";
        if (i9.sum != i5.sum || i9.points != i5.points) why += " index integers moved;";
        if (!within(s9.lo, s1.lo, 0.1) || !within(d9.r0, d4.r0, 0.1)) why += " a real moved by 10% or more;";
        for (std::size_t k = 0; k < std::min(i9.h1.size(), i5.h1.size()); ++k)
          if (!within(i9.h1[k], i5.h1[k], 0.1)) why += " fixed point norm moved by 10% or more;";
        ok = why.empty();
      } else {
        why = " an analysis failed on one of the grids";
      }
      char buf[256];
      std::snprintf(buf, sizeof buf, "M = 4097, L = 30: eigenvalue %.6g, degrees %d/%d, index sum %d, %.1f s",
                    s9.lo, d9.degrees.empty() ? 0 : d9.degrees[0], d9n.degrees.empty() ? 0 : d9n.degrees[0], i9.sum,
                    f1.seconds + f45.seconds + fneg.seconds);
      verdict(9, ok, buf + (why.empty() ? std::string() : ";" + why));
    }
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
