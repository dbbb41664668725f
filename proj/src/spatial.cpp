#include "resonant/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace resonant {

Grid build_grid(int dimension, double half_width, int points_per_axis) {
  if (dimension != 1 && dimension != 2)
    throw PreconditionError("build_grid: dimension " + std::to_string(dimension) +
                            " unsupported (expected 1 or 2)");
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw PreconditionError("build_grid: half_width must be positive");
  if (points_per_axis < 16)
    throw PreconditionError("build_grid: points_per_axis must be at least 16");
  Grid g;
  g.dimension_ = dimension;
  g.half_width_ = half_width;
  g.points_ = points_per_axis;
  g.spacing_ = 2.0 * half_width / (points_per_axis - 1);
  return g;
}

std::size_t Grid::size() const {
  const auto m = static_cast<std::size_t>(points_);
  return dimension_ == 1 ? m : m * m;
}

double Grid::cell_volume() const { return dimension_ == 1 ? spacing_ : spacing_ * spacing_; }

Point Grid::point(std::size_t node) const {
  if (dimension_ == 1) return {coordinate(static_cast<int>(node)), 0.0};
  const auto m = static_cast<std::size_t>(points_);
  return {coordinate(static_cast<int>(node / m)), coordinate(static_cast<int>(node % m))};
}

Field::Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size())
    throw PreconditionError("Field: value count does not match the grid");
}

bool Field::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

Field sample(const Grid& grid, const SpatialFn& fn) {
  Field f(grid);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = fn(grid.point(i));
  return f;
}

Field linear_combination(double a, const Field& x, double b, const Field& y) {
  if (!(x.grid == y.grid)) throw PreconditionError("linear_combination: grid mismatch");
  Field out = y;
  simd::axpby(a, x.span(), b, out.span());
  return out;
}

double inner_l2(const Field& u, const Field& v) {
  if (!(u.grid == v.grid)) throw PreconditionError("inner_l2: grid mismatch");
  return u.grid.cell_volume() * simd::dot(u.span(), v.span());
}

double norm_l2(const Field& u) { return std::sqrt(u.grid.cell_volume() * simd::sum_squares(u.span())); }

double norm_h1(const Field& u) {
  const Grid& g = u.grid;
  const double h = g.spacing();
  const auto m = static_cast<std::size_t>(g.points_per_axis());
  const double inv2h = 1.0 / (2.0 * h);
  double grad = 0.0;
  if (g.dimension() == 1) {
    for (std::size_t i = 0; i < m; ++i) {
      const double up = i + 1 < m ? u[i + 1] : 0.0;
      const double um = i > 0 ? u[i - 1] : 0.0;
      const double d = (up - um) * inv2h;
      grad += d * d;
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t c = i * m + j;
        const double xp = i + 1 < m ? u[c + m] : 0.0;
        const double xm = i > 0 ? u[c - m] : 0.0;
        const double yp = j + 1 < m ? u[c + 1] : 0.0;
        const double ym = j > 0 ? u[c - 1] : 0.0;
        const double dx = (xp - xm) * inv2h;
        const double dy = (yp - ym) * inv2h;
        grad += dx * dx + dy * dy;
      }
    }
  }
  const double l2sq = simd::sum_squares(u.span());
  return std::sqrt(g.cell_volume() * (l2sq + grad));
}

DiffusionMatrix DiffusionMatrix::identity(int dimension) {
  DiffusionMatrix d;
  d.dimension_ = dimension;
  return d;
}

DiffusionMatrix DiffusionMatrix::from_entries(int dimension, std::span<const double> entries) {
  if (dimension != 1 && dimension != 2)
    throw PreconditionError("DiffusionMatrix: dimension must be 1 or 2");
  const auto n = static_cast<std::size_t>(dimension);
  if (entries.size() != n * n) throw PreconditionError("DiffusionMatrix: expected N*N entries");
  DiffusionMatrix d;
  d.dimension_ = dimension;
  d.a_ = {{{0.0, 0.0}, {0.0, 0.0}}};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d.a_[i][j] = entries[i * n + j];
  if (dimension == 2 && d.a_[0][1] != d.a_[1][0])
    throw PreconditionError("DiffusionMatrix: matrix is not symmetric");
  if (d.smallest_eigenvalue() < -1e-12)
    throw PreconditionError("DiffusionMatrix: matrix is not positive semidefinite");
  return d;
}

double DiffusionMatrix::smallest_eigenvalue() const {
  if (dimension_ == 1) return a_[0][0];
  const double tr = a_[0][0] + a_[1][1];
  const double diff = a_[0][0] - a_[1][1];
  return 0.5 * (tr - std::sqrt(diff * diff + 4.0 * a_[0][1] * a_[0][1]));
}

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  for (auto k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
    if (static_cast<std::size_t>(col[k]) == c) return val[k];
  return 0.0;
}

void DiscreteOperator::apply(std::span<const double> u, std::span<double> out) const {
  simd::spmv(matrix_.view(), u, out);
}

Field DiscreteOperator::apply(const Field& u) const {
  if (!(u.grid == grid_)) throw PreconditionError("DiscreteOperator::apply: grid mismatch");
  Field out(grid_);
  apply(u.span(), out.span());
  return out;
}

double DiscreteOperator::gershgorin_lower_bound() const {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < matrix_.rows; ++r) {
    double diag = 0.0, off = 0.0;
    for (auto k = matrix_.row_ptr[r]; k < matrix_.row_ptr[r + 1]; ++k) {
      if (static_cast<std::size_t>(matrix_.col[k]) == r)
        diag = matrix_.val[k];
      else
        off += std::abs(matrix_.val[k]);
    }
    lo = std::min(lo, diag - off);
  }
  return lo;
}

DiscreteOperator DiscreteOperator::shifted(double s) const {
  DiscreteOperator out = *this;
  for (std::size_t r = 0; r < out.matrix_.rows; ++r)
    for (auto k = out.matrix_.row_ptr[r]; k < out.matrix_.row_ptr[r + 1]; ++k)
      if (static_cast<std::size_t>(out.matrix_.col[k]) == r) out.matrix_.val[k] -= s;
  for (auto& v : out.vinf_.values) v -= s;
  out.v_bar_ -= s;
  out.shift_ += s;
  return out;
}

Eigen::SparseMatrix<double> DiscreteOperator::to_eigen(double diagonal_shift) const {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(matrix_.val.size());
  for (std::size_t r = 0; r < matrix_.rows; ++r)
    for (auto k = matrix_.row_ptr[r]; k < matrix_.row_ptr[r + 1]; ++k) {
      double v = matrix_.val[k];
      if (static_cast<std::size_t>(matrix_.col[k]) == r) v += diagonal_shift;
      trips.emplace_back(static_cast<int>(r), matrix_.col[k], v);
    }
  Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(matrix_.rows),
                                static_cast<Eigen::Index>(matrix_.rows));
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

bool DiscreteOperator::is_symmetric(double tol) const {
  for (std::size_t r = 0; r < matrix_.rows; ++r)
    for (auto k = matrix_.row_ptr[r]; k < matrix_.row_ptr[r + 1]; ++k) {
      const auto c = static_cast<std::size_t>(matrix_.col[k]);
      if (std::abs(matrix_.val[k] - matrix_.at(c, r)) > tol) return false;
    }
  return true;
}

DiscreteOperator assemble_operator(const Grid& grid, const DiffusionMatrix& a, const SpatialFn& v0,
                                   const SpatialFn& vinf, double v_bar) {
  if (!(v_bar > 0.0)) throw PreconditionError("assemble_operator: v_bar must be positive");
  if (a.dimension() != grid.dimension())
    throw PreconditionError("assemble_operator: diffusion matrix dimension differs from grid");
  if (a.smallest_eigenvalue() < -1e-12)
    throw PreconditionError("assemble_operator: diffusion matrix is not positive semidefinite");

  DiscreteOperator op;
  op.grid_ = grid;
  op.v_bar_ = v_bar;
  op.diffusion_ = a;
  op.v0_ = sample(grid, v0);
  op.vinf_ = sample(grid, vinf);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(op.v0_[i])) throw PreconditionError("assemble_operator: V0 not finite at node " + std::to_string(i));
    if (!(op.vinf_[i] >= v_bar))
      throw PreconditionError("assemble_operator: Vinf(x) < v_bar at node " + std::to_string(i));
  }

  const double h2 = grid.spacing() * grid.spacing();
  const auto m = static_cast<std::ptrdiff_t>(grid.points_per_axis());
  CsrMatrix& mat = op.matrix_;
  mat.rows = grid.size();
  mat.row_ptr.assign(1, 0);

  std::map<std::int32_t, double> row;
  auto flush = [&]() {
    for (const auto& [c, v] : row) {
      if (v == 0.0) continue;
      mat.col.push_back(c);
      mat.val.push_back(v);
    }
    mat.row_ptr.push_back(static_cast<std::int32_t>(mat.col.size()));
    row.clear();
  };

  if (grid.dimension() == 1) {
    const double c = a(0, 0) / h2;
    for (std::ptrdiff_t i = 0; i < m; ++i) {
      row[static_cast<std::int32_t>(i)] += 2.0 * c - op.v0_[i] + op.vinf_[i];
      if (i > 0) row[static_cast<std::int32_t>(i - 1)] += -c;
      if (i + 1 < m) row[static_cast<std::int32_t>(i + 1)] += -c;
      flush();
    }
  } else {
    const double cx = a(0, 0) / h2;
    const double cy = a(1, 1) / h2;
    const double cxy = -2.0 * a(0, 1) / (4.0 * h2);
    auto idx = [m](std::ptrdiff_t i, std::ptrdiff_t j) { return static_cast<std::int32_t>(i * m + j); };
    auto inside = [m](std::ptrdiff_t i, std::ptrdiff_t j) { return i >= 0 && j >= 0 && i < m && j < m; };
    for (std::ptrdiff_t i = 0; i < m; ++i) {
      for (std::ptrdiff_t j = 0; j < m; ++j) {
        const auto self = static_cast<std::size_t>(idx(i, j));
        row[idx(i, j)] += 2.0 * cx + 2.0 * cy - op.v0_[self] + op.vinf_[self];
        if (inside(i - 1, j)) row[idx(i - 1, j)] += -cx;
        if (inside(i + 1, j)) row[idx(i + 1, j)] += -cx;
        if (inside(i, j - 1)) row[idx(i, j - 1)] += -cy;
        if (inside(i, j + 1)) row[idx(i, j + 1)] += -cy;
        if (cxy != 0.0) {
          if (inside(i + 1, j + 1)) row[idx(i + 1, j + 1)] += cxy;
          if (inside(i - 1, j - 1)) row[idx(i - 1, j - 1)] += cxy;
          if (inside(i + 1, j - 1)) row[idx(i + 1, j - 1)] -= cxy;
          if (inside(i - 1, j + 1)) row[idx(i - 1, j + 1)] -= cxy;
        }
        flush();
      }
    }
  }
  return op;
}

}  // namespace resonant
