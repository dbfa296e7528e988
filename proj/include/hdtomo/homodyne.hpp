#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hdtomo/channels.hpp"
#include "hdtomo/states.hpp"

namespace hdt {

/// Simulated balanced-homodyne record: raw (unrescaled) quadrature outcomes
/// at each scanned local-oscillator phase. Immutable once built.
class QuadratureDataset {
public:
  /// Throws RangeError if phases and sample lists disagree in length, a phase
  /// lies outside [0, pi), a phase has no samples, or a sample is not finite.
  QuadratureDataset(StateSpec state, DetectionChain chain, std::vector<double> phases,
                    std::vector<std::vector<double>> samples, std::uint64_t seed);

  const StateSpec& state() const noexcept { return state_; }
  const DetectionChain& chain() const noexcept { return chain_; }
  const std::vector<double>& phases() const noexcept { return phases_; }
  std::span<const double> samples(std::size_t phase_index) const { return samples_.at(phase_index); }
  std::size_t n_phases() const noexcept { return phases_.size(); }
  /// Samples per phase when uniform, else the smallest count.
  std::size_t n_per_phase() const noexcept { return n_per_phase_; }
  std::uint64_t seed() const noexcept { return seed_; }

private:
  StateSpec state_;
  DetectionChain chain_;
  std::vector<double> phases_;
  std::vector<std::vector<double>> samples_;
  std::uint64_t seed_;
  std::size_t n_per_phase_;
};

/// Seed of the random stream used for phase `phase_index`:
/// splitmix64(seed + (phase_index + 1) * 0x9E3779B97F4A7C15). The stream is
/// std::mt19937_64 seeded with this value; uniforms are (x >> 11) * 2^-53.
std::uint64_t phase_substream_seed(std::uint64_t seed, std::size_t phase_index);

/// Inverse-CDF sampler for the measured quadrature at one phase. The density
/// is tabulated on 4096 points over +-8 standard deviations by numerical
/// Fourier inversion of damped_char_fn.
class QuadratureSampler {
public:
  static constexpr std::size_t kTablePoints = 4096;
  static constexpr double kHalfWidthSigmas = 8.0;

  /// Throws NumericalError if the tabulated density dips below -1e-9.
  QuadratureSampler(const StateSpec& state, const DetectionChain& chain, double theta);

  /// Maps u in [0, 1) through the inverse CDF.
  double quantile(double u) const;
  /// Tabulated CDF (linear between nodes).
  double cdf(double x) const;

  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& pdf() const noexcept { return pdf_; }

private:
  std::vector<double> x_;
  std::vector<double> pdf_;
  std::vector<double> cdf_;
};

/// Draws n_per_phase i.i.d. outcomes per phase. Phases are sampled in
/// parallel on independent substreams; the result depends only on the
/// arguments.
QuadratureDataset sample_quadratures(const StateSpec& state, const DetectionChain& chain,
                                     const std::vector<double>& phases, std::size_t n_per_phase,
                                     std::uint64_t seed);

/// Serial reference with identical output.
QuadratureDataset sample_quadratures_serial(const StateSpec& state, const DetectionChain& chain,
                                            const std::vector<double>& phases,
                                            std::size_t n_per_phase, std::uint64_t seed);

struct EmpiricalHistogram {
  std::vector<double> bin_edges;
  std::vector<std::uint64_t> counts;
  /// Sum of counts (in-range samples only).
  std::uint64_t total = 0;
  std::uint64_t out_of_range = 0;
  /// Set when fewer than 99.9% of the samples fall inside the range.
  bool coverage_warning = false;
};

/// Fixed-width binning over [lo, hi]; the last bin is closed on the right.
EmpiricalHistogram histogram(std::span<const double> samples, std::size_t n_bins, double lo,
                             double hi);
EmpiricalHistogram histogram(const QuadratureDataset& dataset, std::size_t phase_index,
                             std::size_t n_bins, double lo, double hi);

}  // namespace hdt
