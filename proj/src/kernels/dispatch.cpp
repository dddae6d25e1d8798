#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>

#include "rdslab/kernels.hpp"

namespace rdslab::kernels {

#if defined(RDSLAB_HAVE_AVX2)
const KernelTable& avx2_table_unchecked();
#endif

const KernelTable* avx2_table() {
#if defined(RDSLAB_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  if (supported) return &avx2_table_unchecked();
#endif
  return nullptr;
}

namespace {

const KernelTable* resolve_default() {
  const char* env = std::getenv("RDSLAB_KERNELS");
  const std::string choice = env ? env : "auto";
  if (choice == "scalar") return &scalar_table();
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{resolve_default()};
  return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool select(std::string_view name) {
  const KernelTable* t = nullptr;
  if (name == "scalar") {
    t = &scalar_table();
  } else if (name == "avx2") {
    t = avx2_table();
  } else if (name == "auto") {
    t = avx2_table() ? avx2_table() : &scalar_table();
  }
  if (!t) return false;
  current().store(t, std::memory_order_release);
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), std::min(a.size(), b.size()));
}
double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }
double sum_abs(std::span<const double> a) { return active().sum_abs(a.data(), a.size()); }
double sum_sq(std::span<const double> a) { return active().sum_sq(a.data(), a.size()); }
double max_abs(std::span<const double> a) { return active().max_abs(a.data(), a.size()); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), std::min(x.size(), y.size()));
}
void xpay(std::span<const double> x, double alpha, std::span<double> y) {
  active().xpay(x.data(), alpha, y.data(), std::min(x.size(), y.size()));
}
void mul(std::span<const double> x, std::span<double> y) {
  active().mul(x.data(), y.data(), std::min(x.size(), y.size()));
}

}  // namespace rdslab::kernels
