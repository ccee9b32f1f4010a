#include "specreg/kernels.hpp"

namespace specreg::kernels {
namespace {

double variance_terms(cspan h, cspan inv) {
  CompensatedSum acc;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double t = inv[k] * (2.0 * h[k] - h[k] * h[k]);
    acc.add(t * t);
  }
  return acc.value();
}

double weighted_sum(cspan h, cspan inv) {
  CompensatedSum acc;
  for (std::size_t k = 0; k < h.size(); ++k) acc.add(inv[k] * h[k]);
  return acc.value();
}

double weighted_sq(cspan h, cspan inv) {
  CompensatedSum acc;
  for (std::size_t k = 0; k < h.size(); ++k) acc.add(inv[k] * (h[k] * h[k]));
  return acc.value();
}

double residual(cspan h, cspan y) {
  CompensatedSum acc;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double t = (1.0 - h[k]) * y[k];
    acc.add(t * t);
  }
  return acc.value();
}

double eta(cspan h, cspan inv, cspan xi) {
  CompensatedSum acc;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double w = inv[k] * (2.0 * h[k] - h[k] * h[k]);
    acc.add(w * (xi[k] * xi[k] - 1.0));
  }
  return acc.value();
}

double loss(cspan theta, cspan h, cspan y) {
  CompensatedSum acc;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double t = theta[k] - h[k] * y[k];
    acc.add(t * t);
  }
  return acc.value();
}

double qcirc_sum(cspan rho, double mu) {
  CompensatedSum acc;
  for (double r : rho) acc.add(r * r / (1.0 - 2.0 * mu * r));
  return acc.value();
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar",  variance_terms, weighted_sum, weighted_sq,
                                 residual,  eta,            loss,         qcirc_sum};
  return table;
}

}  // namespace specreg::kernels
