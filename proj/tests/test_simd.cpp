#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "resonant/simd.hpp"
#include "resonant/spatial.hpp"

using namespace resonant;

namespace {

std::vector<double> random_vec(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

double naive_dot(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}

}  // namespace

TEST_CASE("scalar table matches long-double reference") {
  const auto& k = simd::scalar_kernels();
  for (std::size_t n : {0u, 1u, 3u, 7u, 8u, 17u, 1000u, 4097u}) {
    const auto a = random_vec(n, 1), b = random_vec(n, 2);
    CHECK(k.dot(a.data(), b.data(), n) == doctest::Approx(naive_dot(a, b)).epsilon(1e-13));
    CHECK(k.sum_squares(a.data(), n) == doctest::Approx(naive_dot(a, a)).epsilon(1e-13));
  }
}

TEST_CASE("avx2 variants agree with the scalar reference") {
  const auto* v = simd::avx2_kernels();
  if (!v) {
    MESSAGE("AVX2 unavailable on this host; nothing to compare");
    return;
  }
  const auto& s = simd::scalar_kernels();
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 31u, 1025u, 4097u}) {
    const auto a = random_vec(n, 10 + n), b = random_vec(n, 20 + n);
    const double scale = std::sqrt(naive_dot(a, a) * naive_dot(b, b)) + 1e-300;
    CHECK(std::abs(v->dot(a.data(), b.data(), n) - s.dot(a.data(), b.data(), n)) <= 1e-14 * scale);
    CHECK(std::abs(v->sum_squares(a.data(), n) - s.sum_squares(a.data(), n)) <= 1e-14 * (naive_dot(a, a) + 1e-300));

    auto y1 = b, y2 = b;
    s.axpy(0.37, a.data(), y1.data(), n);
    v->axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));

    y1 = b;
    y2 = b;
    s.axpby(-1.25, a.data(), 0.5, y1.data(), n);
    v->axpby(-1.25, a.data(), 0.5, y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));
  }
}

TEST_CASE("spmv variants agree on assembled operators") {
  for (int dim : {1, 2}) {
    const Grid g = build_grid(dim, 5.0, dim == 1 ? 203 : 37);
    const auto op = assemble_operator(
        g, dim == 1 ? DiffusionMatrix::identity(1) : DiffusionMatrix::from_entries(2, std::vector{1.0, 0.3, 0.3, 0.8}),
        [](const Point& x) { return 2.0 / std::cosh(x[0]); }, [](const Point&) { return 1.0; }, 1.0);
    const auto x = random_vec(g.size(), 99);
    std::vector<double> y1(g.size()), y2(g.size());
    simd::scalar_kernels().spmv(op.matrix().view(), x.data(), y1.data());
    // independent oracle: entry-wise lookup
    for (std::size_t r = 0; r < g.size(); r += 7) {
      double acc = 0.0;
      for (std::int32_t k = op.matrix().row_ptr[r]; k < op.matrix().row_ptr[r + 1]; ++k)
        acc += op.matrix().at(r, op.matrix().col[k]) * x[op.matrix().col[k]];
      CHECK(y1[r] == doctest::Approx(acc).epsilon(1e-14));
    }
    if (const auto* v = simd::avx2_kernels()) {
      v->spmv(op.matrix().view(), x.data(), y2.data());
      for (std::size_t i = 0; i < g.size(); ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-13));
    }
  }
}

TEST_CASE("select switches tables and rejects unknown names") {
  const std::string before = simd::active().name;
  CHECK(simd::select("scalar"));
  CHECK(std::string(simd::active().name) == "scalar");
  CHECK_FALSE(simd::select("neon"));
  if (simd::avx2_kernels()) {
    CHECK(simd::select("avx2"));
    CHECK(std::string(simd::active().name) == "avx2");
  }
  simd::select(before);
}
