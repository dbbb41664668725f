#pragma once

// Truncated uniform grids on [-L, L]^N, grid functions, discrete norms and
// the finite-difference operator A = -sum a_ij d_i d_j - V0 + Vinf with
// homogeneous Dirichlet conditions outside the box.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "resonant/error.hpp"
#include "resonant/simd.hpp"

namespace resonant {

using Point = std::array<double, 2>;
using SpatialFn = std::function<double(const Point&)>;

class Grid {
 public:
  Grid() = default;

  int dimension() const { return dimension_; }
  double half_width() const { return half_width_; }
  int points_per_axis() const { return points_; }
  double spacing() const { return spacing_; }
  std::size_t size() const;
  /// h^N, the weight of the rectangle quadrature.
  double cell_volume() const;

  double coordinate(int axis_index) const { return -half_width_ + axis_index * spacing_; }
  /// Row-major: node = i0 * M + i1 in 2D (i0 along x, i1 along y).
  Point point(std::size_t node) const;

  bool operator==(const Grid&) const = default;

 private:
  friend Grid build_grid(int, double, int);
  int dimension_ = 1;
  double half_width_ = 1.0;
  int points_ = 16;
  double spacing_ = 0.0;
};

/// Nodes x_i = -L + i h, h = 2L/(M-1). Values vanish outside [-L, L]^N.
Grid build_grid(int dimension, double half_width, int points_per_axis);

struct Field {
  Grid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const Grid& g) : grid(g), values(g.size(), 0.0) {}
  Field(const Grid& g, std::vector<double> v);

  std::span<double> span() { return values; }
  std::span<const double> span() const { return values; }
  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  bool all_finite() const;
};

/// Samples a function of x at every node.
Field sample(const Grid& grid, const SpatialFn& fn);

/// u <- a*x + b*y style helpers on fields over the same grid.
Field linear_combination(double a, const Field& x, double b, const Field& y);

double inner_l2(const Field& u, const Field& v);
double norm_l2(const Field& u);
/// sqrt(||u||^2 + sum_k ||D_k u||^2), centered differences, zero outside.
double norm_h1(const Field& u);

class DiffusionMatrix {
 public:
  /// Identity (the Laplacian).
  static DiffusionMatrix identity(int dimension);
  /// Row-major N x N entries. Rejects asymmetric or non-PSD input.
  static DiffusionMatrix from_entries(int dimension, std::span<const double> entries);

  int dimension() const { return dimension_; }
  double operator()(int i, int j) const { return a_[i][j]; }
  double smallest_eigenvalue() const;

 private:
  int dimension_ = 1;
  std::array<std::array<double, 2>, 2> a_{{{1.0, 0.0}, {0.0, 1.0}}};
};

struct CsrMatrix {
  std::size_t rows = 0;
  std::vector<std::int32_t> row_ptr;
  std::vector<std::int32_t> col;
  std::vector<double> val;

  simd::CsrView view() const { return {rows, row_ptr.data(), col.data(), val.data()}; }
  /// Entry lookup on the sparse structure (0 when absent).
  double at(std::size_t r, std::size_t c) const;
};

class DiscreteOperator {
 public:
  const Grid& grid() const { return grid_; }
  const CsrMatrix& matrix() const { return matrix_; }
  double v_bar_infinity() const { return v_bar_; }
  const Field& potential_v0() const { return v0_; }
  const Field& potential_vinf() const { return vinf_; }
  const DiffusionMatrix& diffusion() const { return diffusion_; }
  /// Accumulated resonance re-centering: the operator equals A_assembled - shift * I.
  double recentering_shift() const { return shift_; }

  void apply(std::span<const double> u, std::span<double> out) const;
  Field apply(const Field& u) const;

  /// Lower bound on the spectrum from Gershgorin discs.
  double gershgorin_lower_bound() const;

  /// Returns A - s I; equivalently Vinf and v_bar lowered by s.
  DiscreteOperator shifted(double s) const;

  /// (A + diagonal_shift * I) as an Eigen matrix, for direct factorizations.
  Eigen::SparseMatrix<double> to_eigen(double diagonal_shift = 0.0) const;

  bool is_symmetric(double tol = 0.0) const;

 private:
  friend DiscreteOperator assemble_operator(const Grid&, const DiffusionMatrix&, const SpatialFn&,
                                            const SpatialFn&, double);
  Grid grid_;
  CsrMatrix matrix_;
  double v_bar_ = 1.0;
  Field v0_;
  Field vinf_;
  DiffusionMatrix diffusion_;
  double shift_ = 0.0;
};

/// Second-order centered differences; mixed derivatives use the 4-point cross
/// stencil. Rejects samples with vinf(x) < v_bar or v_bar <= 0.
DiscreteOperator assemble_operator(const Grid& grid, const DiffusionMatrix& a, const SpatialFn& v0,
                                   const SpatialFn& vinf, double v_bar);

}  // namespace resonant
