#include <algorithm>
#include <cmath>

#include "rdslab/kernels.hpp"

namespace rdslab::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

double sum_abs_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i]);
  return s;
}

double sum_sq_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

double max_abs_scalar(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i]));
  return m;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpay_scalar(const double* x, double alpha, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + alpha * y[i];
}

void mul_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= x[i];
}

void laplacian_1d_scalar(const double* in, double* out, std::size_t n, double inv_h2) {
  for (std::size_t i = 0; i < n; ++i) {
    const double c = in[i];
    const double l = in[i == 0 ? 0 : i - 1];
    const double r = in[i + 1 == n ? i : i + 1];
    out[i] = ((l - c) + (r - c)) * inv_h2;
  }
}

void laplacian_2d_scalar(const double* in, double* out, std::size_t nx, std::size_t ny,
                         double inv_hx2, double inv_hy2) {
  for (std::size_t iy = 0; iy < ny; ++iy) {
    const double* row = in + iy * nx;
    const double* down = in + (iy == 0 ? iy : iy - 1) * nx;
    const double* up = in + (iy + 1 == ny ? iy : iy + 1) * nx;
    double* dst = out + iy * nx;
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const double c = row[ix];
      const double l = row[ix == 0 ? 0 : ix - 1];
      const double r = row[ix + 1 == nx ? ix : ix + 1];
      dst[ix] = ((l - c) + (r - c)) * inv_hx2 + ((down[ix] - c) + (up[ix] - c)) * inv_hy2;
    }
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{
      "scalar",          dot_scalar,  sum_scalar, sum_abs_scalar,      sum_sq_scalar,
      max_abs_scalar,    axpy_scalar, xpay_scalar, mul_scalar,         laplacian_1d_scalar,
      laplacian_2d_scalar,
  };
  return table;
}

}  // namespace rdslab::kernels
