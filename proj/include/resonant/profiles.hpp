#pragma once

// Named spatial profiles usable from scenario files, e.g.
// "poschl_teller(2)", "constant(1)", "gaussian(1,0.5)", "sech2(1)",
// "sech(0.1)", "zero", or "csv:<path>" for tabulated node values.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "resonant/spatial.hpp"

namespace resonant {

struct CallSpec {
  std::string name;
  std::vector<double> args;
};

/// Parses "name" or "name(a, b, ...)" with numeric arguments.
CallSpec parse_call(std::string_view text);

/// Resolves a spatial profile. CSV profiles need the grid (one value per
/// node, row-major) and are resolved relative to base_dir.
SpatialFn parse_profile(std::string_view text, const Grid& grid,
                        const std::filesystem::path& base_dir = {});

struct ProfileInfo {
  std::string name;
  std::string description;
};

const std::vector<ProfileInfo>& builtin_profiles();

/// Time modulation tau(t) with period T: "one", "sin" (sin 2 pi t/T), "cos".
struct TimeProfile {
  enum class Kind { one, sin, cos } kind = Kind::one;
  double value(double t, double period) const;
  /// Hoelder constant C with |tau(t)-tau(s)| <= C |t-s|^theta for all t, s.
  double holder_constant(double period, double theta) const;
  double sup() const { return 1.0; }
  static TimeProfile parse(std::string_view name);
  std::string name() const;
};

}  // namespace resonant
