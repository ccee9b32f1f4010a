#include "specreg/smoothers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace specreg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::vector<double> geometric_alphas(double lo, double hi, std::size_t count) {
  if (count == 0) throw ValidationError("grid: count must be positive");
  if (!(lo > 0.0) || !(hi > 0.0) || !std::isfinite(lo) || !std::isfinite(hi))
    throw ValidationError("grid: geometric bounds must be finite and positive");
  if (lo > hi) throw ValidationError("grid: alpha_min exceeds alpha_max");
  std::vector<double> alphas(count);
  if (count == 1) {
    alphas[0] = hi;
    return alphas;
  }
  const double log_ratio = std::log(lo / hi);
  for (std::size_t g = 0; g < count; ++g)
    alphas[g] = hi * std::exp(log_ratio * static_cast<double>(g) / static_cast<double>(count - 1));
  alphas.back() = lo;
  return alphas;
}

std::vector<double> sorted_descending(std::vector<double> alphas) {
  if (alphas.empty()) throw ValidationError("grid: explicit alpha list is empty");
  for (double a : alphas)
    if (!(a > 0.0) || std::isnan(a)) throw ValidationError("grid: alphas must be positive");
  std::stable_sort(alphas.begin(), alphas.end(), std::greater<>());
  return alphas;
}

long long landweber_iterations(double alpha) {
  const double k = std::round(1.0 / alpha);
  if (!(k >= 1.0) || k > 1e15) throw ValidationError("grid: landweber alpha must be 1/k for an integer k >= 1");
  return static_cast<long long>(k);
}

}  // namespace

std::string family_name(const SmootherFamily& family) {
  return std::visit(overloaded{[](const Cutoff&) { return std::string("cutoff"); },
                               [](const Tikhonov&) { return std::string("tikhonov"); },
                               [](const Landweber&) { return std::string("landweber"); },
                               [](const Pinsker&) { return std::string("pinsker"); }},
                    family);
}

double landweber_step(const Landweber& family, const Spectrum& spectrum) {
  return family.step == 0.0 ? 1.1 * spectrum[0] : family.step;
}

void validate_family(const SmootherFamily& family, const Spectrum& spectrum) {
  std::visit(overloaded{[](const Cutoff&) {},
                        [](const Tikhonov& t) {
                          if (t.order < 1) throw ValidationError("tikhonov: order must be a positive integer");
                        },
                        [&](const Landweber& l) {
                          const double a = landweber_step(l, spectrum);
                          if (!std::isfinite(a) || !(a > spectrum[0]))
                            throw ValidationError("landweber: step a must exceed lambda(1) for the iterations to converge");
                        },
                        [](const Pinsker& p) {
                          if (!(p.nu > 0.0) || !std::isfinite(p.nu))
                            throw ValidationError("pinsker: weight exponent nu must be positive");
                        }},
             family);
}

double cutoff_weight(double lambda, double alpha) { return lambda >= alpha ? 1.0 : 0.0; }

double tikhonov_weight(double lambda, double alpha, int order) {
  return std::pow(lambda / (lambda + alpha), order);
}

double landweber_weight(double lambda, double step, long long iterations) {
  return 1.0 - std::pow(1.0 - lambda / step, static_cast<double>(iterations + 1));
}

double pinsker_weight(double lambda, double alpha, double nu) {
  return std::max(0.0, 1.0 - alpha * std::pow(lambda, -nu));
}

GridSpec default_grid(const SmootherFamily& family) {
  GridSpec spec;
  if (std::holds_alternative<Cutoff>(family)) {
    spec.kind = GridSpec::Kind::natural;
  } else if (std::holds_alternative<Landweber>(family)) {
    spec.kind = GridSpec::Kind::natural;
    spec.count = 100;
  } else {
    spec.kind = GridSpec::Kind::geometric;
    spec.count = 100;
  }
  return spec;
}

SmootherGrid::SmootherGrid(std::optional<SmootherFamily> family, std::shared_ptr<const Spectrum> spectrum,
                           std::vector<double> alphas, std::vector<double> weights)
    : family_(std::move(family)), spectrum_(std::move(spectrum)), alphas_(std::move(alphas)), weights_(std::move(weights)) {
  if (!spectrum_) throw ValidationError("grid: missing spectrum");
  if (alphas_.empty()) throw ValidationError("grid: empty grid");
  if (weights_.size() != alphas_.size() * spectrum_->size())
    throw ValidationError("grid: weight matrix shape does not match grid size x spectrum length");
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const double h = weights_[i];
    if (!(h >= 0.0 && h <= 1.0)) {
      std::ostringstream msg;
      msg << "grid: weight h[" << i / spectrum_->size() + 1 << "][" << i % spectrum_->size() + 1 << "] = " << h
          << " is outside [0, 1] (check family parameters)";
      throw ValidationError(msg.str());
    }
  }
}

std::span<const double> SmootherGrid::weights_at(std::size_t g) const {
  if (g >= alphas_.size())
    throw std::out_of_range("grid: row " + std::to_string(g) + " out of range (size " + std::to_string(size()) + ")");
  return std::span<const double>(weights_).subspan(g * dim(), dim());
}

double SmootherGrid::max_log_spacing() const {
  double worst = 0.0;
  for (std::size_t g = 0; g + 1 < alphas_.size(); ++g) {
    const double a = alphas_[g];
    const double b = alphas_[g + 1];
    if (a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b)) worst = std::max(worst, std::abs(std::log(a / b)));
  }
  return worst;
}

SmootherGrid build_grid(const SmootherFamily& family, std::shared_ptr<const Spectrum> spectrum_ptr, const GridSpec& spec) {
  if (!spectrum_ptr) throw ValidationError("grid: missing spectrum");
  const Spectrum& spectrum = *spectrum_ptr;
  validate_family(family, spectrum);
  const std::size_t n = spectrum.size();
  const double lam_max = spectrum[0];
  const double lam_min = spectrum[n - 1];

  std::vector<double> alphas;
  std::vector<double> weights;

  auto fill_rows = [&](const std::function<double(std::size_t g, double lambda)>& weight) {
    weights.resize(alphas.size() * n);
    for (std::size_t g = 0; g < alphas.size(); ++g)
      for (std::size_t k = 0; k < n; ++k) weights[g * n + k] = weight(g, spectrum[k]);
  };

  if (const auto* landweber = std::get_if<Landweber>(&family)) {
    const double a = landweber_step(*landweber, spectrum);
    std::vector<long long> iterations;
    switch (spec.kind) {
      case GridSpec::Kind::natural:
        if (spec.count == 0) throw ValidationError("grid: landweber iteration count must be positive");
        for (std::size_t k = 1; k <= spec.count; ++k) iterations.push_back(static_cast<long long>(k));
        break;
      case GridSpec::Kind::geometric: {
        const double hi = spec.alpha_max.value_or(1.0);
        const double lo = spec.alpha_min.value_or(std::max(1e-6, lam_min / (10.0 * a)));
        for (double alpha : geometric_alphas(lo, hi, spec.count)) iterations.push_back(landweber_iterations(alpha));
        break;
      }
      case GridSpec::Kind::explicit_alphas:
        for (double alpha : sorted_descending(spec.alphas)) iterations.push_back(landweber_iterations(alpha));
        break;
    }
    std::sort(iterations.begin(), iterations.end());
    iterations.erase(std::unique(iterations.begin(), iterations.end()), iterations.end());
    for (long long k : iterations) alphas.push_back(1.0 / static_cast<double>(k));
    fill_rows([&](std::size_t g, double lambda) { return landweber_weight(lambda, a, iterations[g]); });
    return SmootherGrid(family, std::move(spectrum_ptr), std::move(alphas), std::move(weights));
  }

  if (std::holds_alternative<Cutoff>(family) && spec.kind == GridSpec::Kind::natural) {
    // Row j keeps the first j+1 coordinates, threshold lambda(j+1).
    alphas.assign(spectrum.lambda().begin(), spectrum.lambda().end());
    weights.assign(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k <= j; ++k) weights[j * n + k] = 1.0;
    return SmootherGrid(family, std::move(spectrum_ptr), std::move(alphas), std::move(weights));
  }

  double default_lo = 1e-2 * lam_min;
  double default_hi = lam_max;
  if (const auto* p = std::get_if<Pinsker>(&family)) {
    default_lo = 1e-3 * std::pow(lam_min, p->nu);
    default_hi = 0.5 * std::pow(lam_max, p->nu);
  }
  switch (spec.kind) {
    case GridSpec::Kind::natural:
      throw ValidationError("grid: family '" + family_name(family) + "' has no natural grid; use geometric or explicit");
    case GridSpec::Kind::geometric:
      alphas = geometric_alphas(spec.alpha_min.value_or(default_lo), spec.alpha_max.value_or(default_hi), spec.count);
      break;
    case GridSpec::Kind::explicit_alphas:
      alphas = sorted_descending(spec.alphas);
      break;
  }

  std::visit(overloaded{[&](const Cutoff&) { fill_rows([&](std::size_t g, double l) { return cutoff_weight(l, alphas[g]); }); },
                        [&](const Tikhonov& t) {
                          fill_rows([&](std::size_t g, double l) { return tikhonov_weight(l, alphas[g], t.order); });
                        },
                        [&](const Pinsker& p) {
                          fill_rows([&](std::size_t g, double l) { return pinsker_weight(l, alphas[g], p.nu); });
                        },
                        [](const Landweber&) {}},
             family);
  return SmootherGrid(family, std::move(spectrum_ptr), std::move(alphas), std::move(weights));
}

std::string OrderedCheck::describe() const {
  std::ostringstream out;
  switch (failure) {
    case Failure::none:
      return "ordered";
    case Failure::row_not_monotone:
      out << "row g=" << g1 + 1 << " is not monotone in k (rises at k=" << k_prime + 1 << ", falls at k=" << k + 1 << ")";
      break;
    case Failure::rows_cross:
      out << "rows cross: h[" << g1 + 1 << "][" << k_prime + 1 << "] < h[" << g2 + 1 << "][" << k_prime + 1 << "] but h["
          << g1 + 1 << "][" << k + 1 << "] > h[" << g2 + 1 << "][" << k + 1 << "]";
      break;
  }
  return out.str();
}

namespace {

std::optional<OrderedCheck> crossing(std::span<const double> a, std::span<const double> b, std::size_t ga, std::size_t gb) {
  const std::size_t n = a.size();
  std::size_t k_prime = n;
  for (std::size_t k = 0; k < n; ++k)
    if (a[k] < b[k]) {
      k_prime = k;
      break;
    }
  if (k_prime == n) return std::nullopt;
  for (std::size_t k = 0; k < n; ++k)
    if (a[k] > b[k] + kOrderedTolerance) return OrderedCheck{OrderedCheck::Failure::rows_cross, ga, gb, k_prime, k};
  return std::nullopt;
}

}  // namespace

OrderedCheck verify_ordered(const SmootherGrid& grid) {
  const std::size_t rows = grid.size();
  const std::size_t n = grid.dim();

  for (std::size_t g = 0; g < rows; ++g) {
    const auto h = grid.weights_at(g);
    std::optional<std::size_t> first_rise;
    std::optional<std::size_t> first_fall;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (!first_rise && h[k + 1] > h[k] + kOrderedTolerance) first_rise = k + 1;
      if (!first_fall && h[k + 1] < h[k] - kOrderedTolerance) first_fall = k + 1;
    }
    if (first_rise && first_fall) return OrderedCheck{OrderedCheck::Failure::row_not_monotone, g, g, *first_rise, *first_fall};
  }

  // Fast path: rows sorted by total weight that dominate their predecessor
  // exactly form a chain, so no pair can cross.
  std::vector<double> totals(rows);
  for (std::size_t g = 0; g < rows; ++g) {
    const auto h = grid.weights_at(g);
    totals[g] = std::accumulate(h.begin(), h.end(), 0.0);
  }
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return totals[a] < totals[b]; });
  bool chain = true;
  for (std::size_t i = 0; chain && i + 1 < rows; ++i) {
    const auto lo = grid.weights_at(order[i]);
    const auto hi = grid.weights_at(order[i + 1]);
    for (std::size_t k = 0; k < n; ++k)
      if (lo[k] > hi[k]) {
        chain = false;
        break;
      }
  }
  if (chain) return {};

  for (std::size_t g1 = 0; g1 < rows; ++g1)
    for (std::size_t g2 = 0; g2 < rows; ++g2) {
      if (g1 == g2) continue;
      if (auto bad = crossing(grid.weights_at(g1), grid.weights_at(g2), g1, g2)) return *bad;
    }
  return {};
}

}  // namespace specreg
