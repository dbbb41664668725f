#include "resonant/profiles.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

namespace resonant {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double sech(double x) { return 1.0 / std::cosh(x); }

void expect_args(const CallSpec& c, std::size_t n) {
  if (c.args.size() != n)
    throw PreconditionError("profile '" + c.name + "' expects " + std::to_string(n) + " argument(s)");
}

std::vector<double> read_csv_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open profile CSV '" + path.string() + "'");
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const std::string t = trim(cell);
      if (t.empty()) continue;
      out.push_back(std::stod(t));
    }
  }
  return out;
}

}  // namespace

CallSpec parse_call(std::string_view text) {
  const std::string s = trim(text);
  CallSpec c;
  const auto open = s.find('(');
  if (open == std::string::npos) {
    c.name = s;
    return c;
  }
  if (s.back() != ')') throw PreconditionError("malformed call '" + s + "'");
  c.name = trim(std::string_view(s).substr(0, open));
  const std::string inner = s.substr(open + 1, s.size() - open - 2);
  std::stringstream ss(inner);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const std::string t = trim(tok);
    if (t.empty()) throw PreconditionError("empty argument in '" + s + "'");
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
      throw PreconditionError("non-numeric argument '" + t + "' in '" + s + "'");
    c.args.push_back(v);
  }
  return c;
}

SpatialFn parse_profile(std::string_view text, const Grid& grid, const std::filesystem::path& base_dir) {
  const std::string s = trim(text);
  if (s.rfind("csv:", 0) == 0) {
    std::filesystem::path p = s.substr(4);
    if (p.is_relative()) p = base_dir / p;
    auto values = std::make_shared<std::vector<double>>(read_csv_values(p));
    if (values->size() != grid.size())
      throw PreconditionError("profile CSV '" + p.string() + "' has " + std::to_string(values->size()) +
                              " values, grid has " + std::to_string(grid.size()));
    const Grid g = grid;
    return [values, g](const Point& x) {
      const double h = g.spacing();
      auto index = [&](double c) {
        return static_cast<std::size_t>(std::lround((c + g.half_width()) / h));
      };
      const std::size_t m = static_cast<std::size_t>(g.points_per_axis());
      const std::size_t node = g.dimension() == 1 ? index(x[0]) : index(x[0]) * m + index(x[1]);
      return (*values)[std::min(node, values->size() - 1)];
    };
  }
  const CallSpec c = parse_call(s);
  const int dim = grid.dimension();
  if (c.name == "zero") {
    expect_args(c, 0);
    return [](const Point&) { return 0.0; };
  }
  if (c.name == "constant") {
    expect_args(c, 1);
    const double v = c.args[0];
    return [v](const Point&) { return v; };
  }
  if (c.name == "poschl_teller") {
    expect_args(c, 1);
    const double l = c.args[0];
    const double depth = l * (l + 1.0);
    return [depth, dim](const Point& x) {
      double r2 = 0.0;
      for (int k = 0; k < dim; ++k) r2 += x[k] * x[k];
      const double s = sech(std::sqrt(r2));
      return depth * s * s;
    };
  }
  if (c.name == "gaussian") {
    expect_args(c, 2);
    const double amp = c.args[0], sigma = c.args[1];
    if (!(sigma > 0.0)) throw PreconditionError("gaussian: sigma must be positive");
    return [amp, sigma, dim](const Point& x) {
      double r2 = 0.0;
      for (int k = 0; k < dim; ++k) r2 += x[k] * x[k];
      return amp * std::exp(-r2 / (2.0 * sigma * sigma));
    };
  }
  if (c.name == "sech2" || c.name == "sech") {
    expect_args(c, 1);
    const double amp = c.args[0];
    const bool squared = c.name == "sech2";
    return [amp, squared, dim](const Point& x) {
      double p = amp;
      for (int k = 0; k < dim; ++k) p *= squared ? sech(x[k]) * sech(x[k]) : sech(x[k]);
      return p;
    };
  }
  throw PreconditionError("unknown profile '" + c.name + "'");
}

const std::vector<ProfileInfo>& builtin_profiles() {
  static const std::vector<ProfileInfo> list{
      {"constant(c)", "c everywhere"},
      {"csv:<path>", "tabulated node values, row-major, one per node"},
      {"gaussian(A,sigma)", "A exp(-|x|^2 / (2 sigma^2))"},
      {"poschl_teller(lambda)", "lambda(lambda+1) sech^2(|x|)"},
      {"sech(A)", "A prod_k sech(x_k)"},
      {"sech2(A)", "A prod_k sech^2(x_k)"},
      {"zero", "0 everywhere"},
  };
  return list;
}

double TimeProfile::value(double t, double period) const {
  const double w = 2.0 * std::numbers::pi / period;
  switch (kind) {
    case Kind::sin: return std::sin(w * t);
    case Kind::cos: return std::cos(w * t);
    case Kind::one: break;
  }
  return 1.0;
}

double TimeProfile::holder_constant(double period, double theta) const {
  if (kind == Kind::one) return 0.0;
  // |sin a - sin b| <= min(2, w|t-s|) <= 2^(1-theta) (w|t-s|)^theta
  const double w = 2.0 * std::numbers::pi / period;
  return std::pow(2.0, 1.0 - theta) * std::pow(w, theta);
}

TimeProfile TimeProfile::parse(std::string_view name) {
  const std::string s = trim(name);
  TimeProfile p;
  if (s == "one" || s.empty()) p.kind = Kind::one;
  else if (s == "sin") p.kind = Kind::sin;
  else if (s == "cos") p.kind = Kind::cos;
  else throw PreconditionError("unknown time profile '" + s + "' (expected one|sin|cos)");
  return p;
}

std::string TimeProfile::name() const {
  switch (kind) {
    case Kind::sin: return "sin";
    case Kind::cos: return "cos";
    case Kind::one: break;
  }
  return "one";
}

}  // namespace resonant
