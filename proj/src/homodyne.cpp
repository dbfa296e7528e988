#include "hdtomo/homodyne.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>

#include "hdtomo/errors.hpp"

namespace hdt {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::vector<double> draw_phase(const StateSpec& state, const DetectionChain& chain, double theta,
                               std::size_t n, std::uint64_t seed, std::size_t phase_index) {
  const QuadratureSampler sampler(state, chain, theta);
  std::mt19937_64 rng(phase_substream_seed(seed, phase_index));
  std::vector<double> out(n);
  for (auto& v : out) v = sampler.quantile(static_cast<double>(rng() >> 11) * 0x1.0p-53);
  return out;
}

void check_sampling_args(const std::vector<double>& phases, std::size_t n_per_phase) {
  if (n_per_phase == 0) throw RangeError("n_per_phase must be at least 1");
  if (phases.empty()) throw RangeError("at least one phase is required");
  for (double th : phases)
    if (!(th >= 0.0 && th < std::numbers::pi)) throw RangeError("phases must lie in [0, pi)");
}

}  // namespace

QuadratureDataset::QuadratureDataset(StateSpec state, DetectionChain chain,
                                     std::vector<double> phases,
                                     std::vector<std::vector<double>> samples, std::uint64_t seed)
    : state_(state),
      chain_(std::move(chain)),
      phases_(std::move(phases)),
      samples_(std::move(samples)),
      seed_(seed),
      n_per_phase_(0) {
  if (phases_.size() != samples_.size())
    throw RangeError("dataset has " + std::to_string(phases_.size()) + " phases but " +
                     std::to_string(samples_.size()) + " sample lists");
  if (phases_.empty()) throw RangeError("dataset has no phases");
  n_per_phase_ = samples_.front().size();
  for (std::size_t i = 0; i < phases_.size(); ++i) {
    if (!(phases_[i] >= 0.0 && phases_[i] < std::numbers::pi))
      throw RangeError("dataset phase outside [0, pi)");
    if (samples_[i].empty())
      throw RangeError("phase " + std::to_string(i) + " has no samples");
    for (double v : samples_[i])
      if (!std::isfinite(v)) throw RangeError("non-finite quadrature sample");
    n_per_phase_ = std::min(n_per_phase_, samples_[i].size());
  }
}

std::uint64_t phase_substream_seed(std::uint64_t seed, std::size_t phase_index) {
  return splitmix64(seed + (static_cast<std::uint64_t>(phase_index) + 1) * 0x9E3779B97F4A7C15ULL);
}

QuadratureSampler::QuadratureSampler(const StateSpec& state, const DetectionChain& chain,
                                     double theta) {
  const double sigma = std::sqrt(damped_marginal_variance(state, chain, theta));
  const double half = kHalfWidthSigmas * sigma;
  const std::size_t n = kTablePoints;
  const double dx = 2.0 * half / static_cast<double>(n - 1);

  // C decays like exp(-sigma^2 xi^2 / 2); the xi step keeps the periodic
  // images of the density 40 sigma apart.
  const double dxi = 2.0 * std::numbers::pi / (40.0 * sigma);
  const auto n_xi = static_cast<std::size_t>(std::ceil(12.0 / sigma / dxi)) + 1;
  std::vector<std::complex<double>> cf(n_xi);
  for (std::size_t k = 0; k < n_xi; ++k)
    cf[k] = damped_char_fn(state, chain, theta, dxi * static_cast<double>(k));

  x_.resize(n);
  pdf_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -half + dx * static_cast<double>(i);
    x_[i] = x;
    // (1/pi) * integral_0^inf Re[C(xi) e^{-i xi x}], trapezoid with half
    // weight at xi = 0.
    const std::complex<double> rot = std::polar(1.0, -dxi * x);
    std::complex<double> acc = 0.0;
    for (std::size_t k = n_xi; k-- > 1;) acc = (acc + cf[k]) * rot;
    const double val = (acc.real() + 0.5 * cf[0].real()) * dxi * std::numbers::inv_pi;
    if (val < -1e-9)
      throw NumericalError("tabulated quadrature density is negative (" + std::to_string(val) +
                           ") at x = " + std::to_string(x) +
                           "; widen the characteristic-function range");
    pdf_[i] = std::max(val, 0.0);
  }

  cdf_.resize(n);
  cdf_[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) cdf_[i] = cdf_[i - 1] + 0.5 * dx * (pdf_[i - 1] + pdf_[i]);
  const double total = cdf_.back();
  if (!(total > 0.0) || !std::isfinite(total))
    throw NumericalError("tabulated quadrature density has no mass");
  for (auto& c : cdf_) c /= total;
  for (auto& p : pdf_) p /= total;
}

double QuadratureSampler::quantile(double u) const {
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) return x_.back();
  if (it == cdf_.begin()) return x_.front();
  const auto i = static_cast<std::size_t>(it - cdf_.begin()) - 1;
  const double frac = (u - cdf_[i]) / (cdf_[i + 1] - cdf_[i]);
  return x_[i] + frac * (x_[i + 1] - x_[i]);
}

double QuadratureSampler::cdf(double x) const {
  if (x <= x_.front()) return 0.0;
  if (x >= x_.back()) return 1.0;
  const double dx = x_[1] - x_[0];
  const auto i = std::min(static_cast<std::size_t>((x - x_.front()) / dx), x_.size() - 2);
  const double frac = (x - x_[i]) / dx;
  return cdf_[i] + frac * (cdf_[i + 1] - cdf_[i]);
}

QuadratureDataset sample_quadratures(const StateSpec& state, const DetectionChain& chain,
                                     const std::vector<double>& phases, std::size_t n_per_phase,
                                     std::uint64_t seed) {
  check_sampling_args(phases, n_per_phase);
  const auto n_phases = static_cast<std::ptrdiff_t>(phases.size());
  std::vector<std::vector<double>> samples(phases.size());
  std::string failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n_phases; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      samples[idx] = draw_phase(state, chain, phases[idx], n_per_phase, seed, idx);
    } catch (const std::exception& e) {
#pragma omp critical(hdt_sampling_failure)
      if (failure.empty()) failure = e.what();
    }
  }
  if (!failure.empty()) throw NumericalError(failure);
  return QuadratureDataset(state, chain, phases, std::move(samples), seed);
}

QuadratureDataset sample_quadratures_serial(const StateSpec& state, const DetectionChain& chain,
                                            const std::vector<double>& phases,
                                            std::size_t n_per_phase, std::uint64_t seed) {
  check_sampling_args(phases, n_per_phase);
  std::vector<std::vector<double>> samples(phases.size());
  for (std::size_t i = 0; i < phases.size(); ++i)
    samples[i] = draw_phase(state, chain, phases[i], n_per_phase, seed, i);
  return QuadratureDataset(state, chain, phases, std::move(samples), seed);
}

EmpiricalHistogram histogram(std::span<const double> samples, std::size_t n_bins, double lo,
                             double hi) {
  if (n_bins < 2) throw RangeError("histogram needs at least 2 bins");
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw RangeError("histogram range must be finite with hi > lo");
  if (samples.empty()) throw RangeError("histogram of an empty sample set");

  EmpiricalHistogram h;
  h.bin_edges.resize(n_bins + 1);
  const double width = (hi - lo) / static_cast<double>(n_bins);
  for (std::size_t i = 0; i <= n_bins; ++i) h.bin_edges[i] = lo + width * static_cast<double>(i);
  h.bin_edges.back() = hi;
  h.counts.assign(n_bins, 0);
  for (double v : samples) {
    if (v < lo || v > hi) {
      ++h.out_of_range;
      continue;
    }
    auto bin = static_cast<std::size_t>((v - lo) / width);
    bin = std::min(bin, n_bins - 1);
    ++h.counts[bin];
    ++h.total;
  }
  h.coverage_warning =
      static_cast<double>(h.total) < 0.999 * static_cast<double>(samples.size());
  return h;
}

EmpiricalHistogram histogram(const QuadratureDataset& dataset, std::size_t phase_index,
                             std::size_t n_bins, double lo, double hi) {
  if (phase_index >= dataset.n_phases()) throw RangeError("phase index out of range");
  return histogram(dataset.samples(phase_index), n_bins, lo, hi);
}

}  // namespace hdt
