#pragma once

// Data-parallel inner loops shared by the grid and solver modules.
//
// Every kernel has a scalar reference implementation. Vector variants are
// compiled into separate translation units and chosen once at runtime.
// Elementwise kernels (axpy, xpay, mul, stencils) must reproduce the scalar
// result bit-for-bit; reductions may differ by rounding only.

#include <cstddef>
#include <span>
#include <string_view>

namespace rdslab::kernels {

struct KernelTable {
  std::string_view name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  double (*sum_abs)(const double* a, std::size_t n);
  double (*sum_sq)(const double* a, std::size_t n);
  double (*max_abs)(const double* a, std::size_t n);

  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = x + alpha * y
  void (*xpay)(const double* x, double alpha, double* y, std::size_t n);
  // y *= x
  void (*mul)(const double* x, double* y, std::size_t n);

  // Cell-centred Neumann Laplacian, reflected ghost nodes.
  void (*laplacian_1d)(const double* in, double* out, std::size_t n, double inv_h2);
  // Row-major layout, index = iy * nx + ix.
  void (*laplacian_2d)(const double* in, double* out, std::size_t nx, std::size_t ny,
                       double inv_hx2, double inv_hy2);
};

const KernelTable& scalar_table();

// nullptr when the variant was not compiled in or the CPU lacks the ISA.
const KernelTable* avx2_table();

// The table used by the library. Resolved on first use from the
// RDSLAB_KERNELS environment variable ("scalar", "avx2", "auto"; default auto).
const KernelTable& active();

// Force a variant by name. Returns false if it is unavailable.
bool select(std::string_view name);

// Span conveniences over active().
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
double sum_abs(std::span<const double> a);
double sum_sq(std::span<const double> a);
double max_abs(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void xpay(std::span<const double> x, double alpha, std::span<double> y);
void mul(std::span<const double> x, std::span<double> y);

}  // namespace rdslab::kernels
