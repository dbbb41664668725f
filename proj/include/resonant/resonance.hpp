#pragma once

// The averaged kernel map Fbar(c) = (1/T) int_0^T P F(s, sum c_k phi_k) ds,
// Brouwer degree on balls of the kernel, Landesman-Lazer integrals and the
// sphere-sign test (Fbar(u), u) on large spheres.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "resonant/nonlinearity.hpp"
#include "resonant/spectrum.hpp"

namespace resonant {

using Coords = std::vector<double>;
using CoordMap = std::function<Coords(const Coords&)>;

class AveragedMap {
 public:
  AveragedMap(const SpectralData& sd, const Nonlinearity& nl, int time_nodes = 64);

  Coords operator()(const Coords& c) const;
  int kernel_dim() const { return static_cast<int>(kernel_.size()); }
  int time_nodes() const { return time_nodes_; }
  const std::vector<Field>& kernel_basis() const { return kernel_; }
  const Nonlinearity& nonlinearity() const { return nl_; }
  const Grid& grid() const { return kernel_.front().grid; }

 private:
  std::vector<Field> kernel_;
  Nonlinearity nl_;
  int time_nodes_;
  std::vector<Point> points_;
};

Coords averaged_map(const AveragedMap& am, const Coords& c);

enum class DegreeMethod { regular_zeros, boundary_grid };

struct DegreeZero {
  Coords coords;
  int jacobian_sign = 0;
  double jacobian_det = 0.0;
  double jacobian_condition = 0.0;
};

struct DegreeResult {
  bool defined = true;
  int degree = 0;
  std::vector<DegreeZero> zeros;
  DegreeMethod method = DegreeMethod::regular_zeros;
  double boundary_min = 0.0;
  /// Winding / boundary-sign degree, computed independently for dim <= 2.
  std::optional<int> boundary_degree;
  std::string note;
};

struct DegreeConfig {
  int starts_per_axis = 17;
  int newton_max = 60;
  double newton_tol = 1e-12;
  double jacobian_step = 1e-5;  // relative to the radius
  double singular_tol = 1e-8;
  double boundary_tol = 1e-10;
  int boundary_samples = 512;
};

DegreeResult brouwer_degree(const CoordMap& map, double radius, int dim, const DegreeConfig& cfg = {});

enum class LLCondition { eq_1_5, eq_1_6, inconclusive };
std::string to_string(LLCondition c);

struct LLCertificate {
  LLCondition condition = LLCondition::inconclusive;
  Coords worst_direction;
  double worst_value = 0.0;
  int directions_tested = 0;
  /// every sampled direction with its two integrals (positive form, negative form)
  std::vector<Coords> directions;
  std::vector<double> values_plus;
  std::vector<double> values_minus;
};

/// Unit directions used to sample the sphere of the kernel: +-1 in 1D,
/// `count` equispaced angles in 2D, seeded random points (plus axes) in 3D.
std::vector<Coords> sphere_directions(int dim, int count, std::uint64_t seed);

LLCertificate ll_check(const AveragedMap& am, int directions, std::uint64_t seed);

struct SphereSignReport {
  std::vector<double> radii;
  std::vector<double> min_value;
  std::vector<double> max_value;
  /// +1 uniformly positive beyond r0, -1 uniformly negative, 0 neither.
  int sign = 0;
  double r0 = 0.0;
  bool found() const { return sign != 0; }
};

SphereSignReport sphere_sign_check(const AveragedMap& am, std::span<const double> radii, int directions,
                                   std::uint64_t seed = 0);

}  // namespace resonant
