// Compiled with -mavx2. Only reached through avx2_kernels() after a CPU check.
#include "specreg/kernels.hpp"

#include <immintrin.h>

namespace specreg::kernels::avx2 {
namespace {

// Four independent Neumaier accumulators, one per lane.
struct Acc4 {
  __m256d sum = _mm256_setzero_pd();
  __m256d comp = _mm256_setzero_pd();

  void add(__m256d x) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    const __m256d t = _mm256_add_pd(sum, x);
    const __m256d abs_s = _mm256_andnot_pd(sign_mask, sum);
    const __m256d abs_x = _mm256_andnot_pd(sign_mask, x);
    const __m256d s_big = _mm256_cmp_pd(abs_s, abs_x, _CMP_GE_OQ);
    const __m256d when_s = _mm256_add_pd(_mm256_sub_pd(sum, t), x);
    const __m256d when_x = _mm256_add_pd(_mm256_sub_pd(x, t), sum);
    comp = _mm256_add_pd(comp, _mm256_blendv_pd(when_x, when_s, s_big));
    sum = t;
  }

  // Lane order is fixed (0..3), then the scalar tail.
  CompensatedSum fold() const {
    alignas(32) double s[4];
    alignas(32) double c[4];
    _mm256_store_pd(s, sum);
    _mm256_store_pd(c, comp);
    CompensatedSum out;
    for (int i = 0; i < 4; ++i) out.add(s[i]);
    for (int i = 0; i < 4; ++i) out.add(c[i]);
    return out;
  }
};

inline __m256d two_h_minus_h2(__m256d h) {
  return _mm256_mul_pd(h, _mm256_sub_pd(_mm256_set1_pd(2.0), h));
}

double variance_terms(cspan h, cspan inv) {
  const std::size_t n = h.size();
  const std::size_t nv = n & ~std::size_t{3};
  Acc4 acc;
  for (std::size_t k = 0; k < nv; k += 4) {
    const __m256d t = _mm256_mul_pd(_mm256_loadu_pd(&inv[k]), two_h_minus_h2(_mm256_loadu_pd(&h[k])));
    acc.add(_mm256_mul_pd(t, t));
  }
  CompensatedSum out = acc.fold();
  for (std::size_t k = nv; k < n; ++k) {
    const double t = inv[k] * (2.0 * h[k] - h[k] * h[k]);
    out.add(t * t);
  }
  return out.value();
}

double weighted_sum(cspan h, cspan inv) {
  const std::size_t n = h.size();
  const std::size_t nv = n & ~std::size_t{3};
  Acc4 acc;
  for (std::size_t k = 0; k < nv; k += 4)
    acc.add(_mm256_mul_pd(_mm256_loadu_pd(&inv[k]), _mm256_loadu_pd(&h[k])));
  CompensatedSum out = acc.fold();
  for (std::size_t k = nv; k < n; ++k) out.add(inv[k] * h[k]);
  return out.value();
}

double weighted_sq(cspan h, cspan inv) {
  const std::size_t n = h.size();
  const std::size_t nv = n & ~std::size_t{3};
  Acc4 acc;
  for (std::size_t k = 0; k < nv; k += 4) {
    const __m256d hv = _mm256_loadu_pd(&h[k]);
    acc.add(_mm256_mul_pd(_mm256_loadu_pd(&inv[k]), _mm256_mul_pd(hv, hv)));
  }
  CompensatedSum out = acc.fold();
  for (std::size_t k = nv; k < n; ++k) out.add(inv[k] * (h[k] * h[k]));
  return out.value();
}

double residual(cspan h, cspan y) {
  const std::size_t n = h.size();
  const std::size_t nv = n & ~std::size_t{3};
  const __m256d one = _mm256_set1_pd(1.0);
  Acc4 acc;
  for (std::size_t k = 0; k < nv; k += 4) {
    const __m256d t = _mm256_mul_pd(_mm256_sub_pd(one, _mm256_loadu_pd(&h[k])), _mm256_loadu_pd(&y[k]));
    acc.add(_mm256_mul_pd(t, t));
  }
  CompensatedSum out = acc.fold();
  for (std::size_t k = nv; k < n; ++k) {
    const double t = (1.0 - h[k]) * y[k];
    out.add(t * t);
  }
  return out.value();
}

double eta(cspan h, cspan inv, cspan xi) {
  const std::size_t n = h.size();
  const std::size_t nv = n & ~std::size_t{3};
  const __m256d one = _mm256_set1_pd(1.0);
  Acc4 acc;
  for (std::size_t k = 0; k < nv; k += 4) {
    const __m256d w = _mm256_mul_pd(_mm256_loadu_pd(&inv[k]), two_h_minus_h2(_mm256_loadu_pd(&h[k])));
    const __m256d x = _mm256_loadu_pd(&xi[k]);
    acc.add(_mm256_mul_pd(w, _mm256_sub_pd(_mm256_mul_pd(x, x), one)));
  }
  CompensatedSum out = acc.fold();
  for (std::size_t k = nv; k < n; ++k) {
    const double w = inv[k] * (2.0 * h[k] - h[k] * h[k]);
    out.add(w * (xi[k] * xi[k] - 1.0));
  }
  return out.value();
}

double loss(cspan theta, cspan h, cspan y) {
  const std::size_t n = h.size();
  const std::size_t nv = n & ~std::size_t{3};
  Acc4 acc;
  for (std::size_t k = 0; k < nv; k += 4) {
    const __m256d t = _mm256_sub_pd(_mm256_loadu_pd(&theta[k]),
                                    _mm256_mul_pd(_mm256_loadu_pd(&h[k]), _mm256_loadu_pd(&y[k])));
    acc.add(_mm256_mul_pd(t, t));
  }
  CompensatedSum out = acc.fold();
  for (std::size_t k = nv; k < n; ++k) {
    const double t = theta[k] - h[k] * y[k];
    out.add(t * t);
  }
  return out.value();
}

double qcirc_sum(cspan rho, double mu) {
  const std::size_t n = rho.size();
  const std::size_t nv = n & ~std::size_t{3};
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two_mu = _mm256_set1_pd(2.0 * mu);
  Acc4 acc;
  for (std::size_t k = 0; k < nv; k += 4) {
    const __m256d r = _mm256_loadu_pd(&rho[k]);
    const __m256d den = _mm256_sub_pd(one, _mm256_mul_pd(two_mu, r));
    acc.add(_mm256_div_pd(_mm256_mul_pd(r, r), den));
  }
  CompensatedSum out = acc.fold();
  for (std::size_t k = nv; k < n; ++k) out.add(rho[k] * rho[k] / (1.0 - 2.0 * mu * rho[k]));
  return out.value();
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{"avx2",   variance_terms, weighted_sum, weighted_sq,
                             residual, eta,            loss,         qcirc_sum};
  return t;
}

}  // namespace specreg::kernels::avx2
