#pragma once

// Weighted reductions over spectral coordinates.
//
// Every kernel exists as a scalar reference and, where the target supports
// it, an AVX2 variant. All sums use Neumaier compensation (per lane in the
// vector variants, folded in a fixed lane order), so the variants agree to a
// few ulps of the sum of absolute terms. active_kernels() picks one table per
// process; results are therefore bit-stable within a run.
//
// Naming: h = smoother weights, inv = lambda^-1, y = observations,
// xi = noise draws, theta = signal, rho = normalized variance profile.

#include <cstddef>
#include <span>
#include <string_view>

namespace specreg::kernels {

using cspan = std::span<const double>;

struct KernelTable {
  std::string_view name;

  /// sum_k (inv(k) * (2h(k) - h(k)^2))^2
  double (*variance_terms)(cspan h, cspan inv);
  /// sum_k inv(k) * h(k)
  double (*weighted_sum)(cspan h, cspan inv);
  /// sum_k inv(k) * h(k)^2
  double (*weighted_sq)(cspan h, cspan inv);
  /// sum_k ((1 - h(k)) * y(k))^2
  double (*residual)(cspan h, cspan y);
  /// sum_k inv(k) * (2h(k) - h(k)^2) * (xi(k)^2 - 1)
  double (*eta)(cspan h, cspan inv, cspan xi);
  /// sum_k (theta(k) - h(k) * y(k))^2
  double (*loss)(cspan theta, cspan h, cspan y);
  /// sum_k rho(k)^2 / (1 - 2 mu rho(k))
  double (*qcirc_sum)(cspan rho, double mu);
};

const KernelTable& scalar_kernels();

/// AVX2 table, or nullptr when the build or the CPU lacks AVX2.
const KernelTable* avx2_kernels();

/// The table used by the library. AVX2 when available, unless the
/// environment variable SPECREG_KERNELS=scalar is set.
const KernelTable& active_kernels();

/// Neumaier-compensated accumulator, the scalar building block of every
/// kernel.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace specreg::kernels
