#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "rdslab/kernels.hpp"

using namespace rdslab::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 3.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

// Long-double reference reductions, independent of both tables.
long double ref_dot(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return s;
}

const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 64, 100, 1023, 4096};

void check_table(const KernelTable& t) {
  std::mt19937_64 rng(42);
  for (std::size_t n : kSizes) {
    const auto a = random_vector(n, rng);
    const auto b = random_vector(n, rng);
    long double abs_sum = 0, sq = 0, s = 0, mx = 0;
    for (double x : a) {
      abs_sum += std::fabs(x);
      sq += static_cast<long double>(x) * x;
      s += x;
      mx = std::max<long double>(mx, std::fabs(x));
    }
    long double dot_scale = 0;
    for (std::size_t i = 0; i < n; ++i) dot_scale += std::fabs(a[i] * b[i]);
    CHECK(std::fabs(t.dot(a.data(), b.data(), n) - ref_dot(a, b)) <= 1e-14 * (1 + dot_scale));
    CHECK(std::fabs(t.sum(a.data(), n) - s) <= 1e-14 * (1 + abs_sum));
    CHECK(std::fabs(t.sum_abs(a.data(), n) - abs_sum) <= 1e-14 * (1 + abs_sum));
    CHECK(std::fabs(t.sum_sq(a.data(), n) - sq) <= 1e-14 * (1 + sq));
    CHECK(t.max_abs(a.data(), n) == static_cast<double>(mx));

    std::vector<double> y = b;
    t.axpy(0.7, a.data(), y.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == b[i] + 0.7 * a[i]);
    y = b;
    t.xpay(a.data(), -1.3, y.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == a[i] + -1.3 * b[i]);
    y = b;
    t.mul(a.data(), y.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == b[i] * a[i]);
  }
}

}  // namespace

TEST_CASE("scalar kernels match naive references") { check_table(scalar_table()); }

TEST_CASE("avx2 kernels match naive references") {
  const KernelTable* t = avx2_table();
  if (!t) {
    MESSAGE("avx2 variant unavailable on this machine");
    return;
  }
  check_table(*t);
}

TEST_CASE("avx2 elementwise kernels and stencils are bit-identical to scalar") {
  const KernelTable* v = avx2_table();
  if (!v) return;
  const KernelTable& s = scalar_table();
  std::mt19937_64 rng(7);
  for (std::size_t n : kSizes) {
    const auto a = random_vector(n, rng);
    const auto b = random_vector(n, rng);
    auto y1 = b, y2 = b;
    s.axpy(0.3, a.data(), y1.data(), n);
    v->axpy(0.3, a.data(), y2.data(), n);
    CHECK(bitwise_equal(y1, y2));
    y1 = b, y2 = b;
    s.xpay(a.data(), 2.5, y1.data(), n);
    v->xpay(a.data(), 2.5, y2.data(), n);
    CHECK(bitwise_equal(y1, y2));
    y1 = b, y2 = b;
    s.mul(a.data(), y1.data(), n);
    v->mul(a.data(), y2.data(), n);
    CHECK(bitwise_equal(y1, y2));
    CHECK(s.max_abs(a.data(), n) == v->max_abs(a.data(), n));
    if (n >= 2) {
      std::vector<double> o1(n), o2(n);
      s.laplacian_1d(a.data(), o1.data(), n, 17.0);
      v->laplacian_1d(a.data(), o2.data(), n, 17.0);
      CHECK(bitwise_equal(o1, o2));
    }
  }
  for (auto [nx, ny] : {std::pair<std::size_t, std::size_t>{4, 4}, {5, 7}, {16, 12}, {33, 9}, {64, 64}}) {
    const auto a = random_vector(nx * ny, rng);
    std::vector<double> o1(nx * ny), o2(nx * ny);
    s.laplacian_2d(a.data(), o1.data(), nx, ny, 3.0, 5.0);
    v->laplacian_2d(a.data(), o2.data(), nx, ny, 3.0, 5.0);
    CHECK(bitwise_equal(o1, o2));
  }
}

TEST_CASE("stencils agree with a direct ghost-node formula") {
  std::mt19937_64 rng(3);
  const std::size_t nx = 6, ny = 5;
  const auto u = random_vector(nx * ny, rng);
  std::vector<double> out(nx * ny);
  scalar_table().laplacian_2d(u.data(), out.data(), nx, ny, 2.0, 3.0);
  auto at = [&](long ix, long iy) {
    ix = std::clamp(ix, 0L, static_cast<long>(nx) - 1);
    iy = std::clamp(iy, 0L, static_cast<long>(ny) - 1);
    return u[static_cast<std::size_t>(iy) * nx + static_cast<std::size_t>(ix)];
  };
  for (long iy = 0; iy < static_cast<long>(ny); ++iy)
    for (long ix = 0; ix < static_cast<long>(nx); ++ix) {
      const double c = at(ix, iy);
      const double expect = (at(ix - 1, iy) - 2 * c + at(ix + 1, iy)) * 2.0 + (at(ix, iy - 1) - 2 * c + at(ix, iy + 1)) * 3.0;
      CHECK(out[static_cast<std::size_t>(iy) * nx + static_cast<std::size_t>(ix)] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("select switches the active table") {
  CHECK(select("scalar"));
  CHECK(active().name == scalar_table().name);
  CHECK_FALSE(select("no-such-variant"));
  if (avx2_table()) {
    CHECK(select("avx2"));
    CHECK(active().name == avx2_table()->name);
  }
  select("scalar");
}
