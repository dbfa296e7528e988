#pragma once

#include <complex>
#include <cstddef>
#include <optional>

#include "hdtomo/states.hpp"

namespace hdt {

/// Bulk absorption of the amplifier crystal: coefficient k [1/m] and
/// length d [m]. The layered absorption model needs k*d <= 1.
class CrystalParams {
public:
  CrystalParams(double k_per_m, double length_m);

  static CrystalParams lossless() { return CrystalParams(0.0, 1e-3); }
  /// 1 mm BBO with k = 0.1 / m.
  static CrystalParams bbo() { return CrystalParams(0.1, 1e-3); }

  double k() const noexcept { return k_; }
  double d() const noexcept { return d_; }
  double kd() const noexcept { return k_ * d_; }

  friend bool operator==(const CrystalParams&, const CrystalParams&) = default;

private:
  double k_;
  double d_;
};

/// Single-pass degenerate parametric amplifier. `r_raw` is the gain the
/// crystal would give without absorption; it must cover the k*d/2
/// absorption correction.
class AmplifierParams {
public:
  AmplifierParams(double r_raw, CrystalParams crystal);

  double r_raw() const noexcept { return r_raw_; }
  const CrystalParams& crystal() const noexcept { return crystal_; }

  friend bool operator==(const AmplifierParams&, const AmplifierParams&) = default;

private:
  double r_raw_;
  CrystalParams crystal_;
};

/// Input transmissivity eta_i (amplifier input coating), detection
/// efficiency eta_d (including amplifier output loss) and an optional
/// amplifier between them.
class DetectionChain {
public:
  DetectionChain(double eta_i, double eta_d, std::optional<AmplifierParams> amp = std::nullopt);

  static DetectionChain lossless() { return DetectionChain(1.0, 1.0); }

  double eta_i() const noexcept { return eta_i_; }
  double eta_d() const noexcept { return eta_d_; }
  const std::optional<AmplifierParams>& amplifier() const noexcept { return amp_; }

  friend bool operator==(const DetectionChain&, const DetectionChain&) = default;

private:
  double eta_i_;
  double eta_d_;
  std::optional<AmplifierParams> amp_;
};

/// A detection chain reduced to the parameters of the rescaled
/// reconstruction: C'(z) = C(z) exp(-epsilon_r |z|^2 / 4) after the
/// quadrature axis is divided by gain_scale.
struct EffectiveLoss {
  double epsilon_r;
  double gain_scale;
  double r_eff;
  double sigma_a2;
};

/// r = r_raw - k d / 2.
double effective_squeezing(const AmplifierParams& amp);

/// Variance of the bulk-absorption noise referred to the amplifier input,
/// (k d / 4 r)(1 - exp(-2 r)); k d / 2 at r = 0.
double bulk_noise_variance(const AmplifierParams& amp);

/// Same quantity for a crystal cut into n_layers slabs; converges to
/// bulk_noise_variance as n_layers grows.
double bulk_noise_variance_layered(const AmplifierParams& amp, std::size_t n_layers);

EffectiveLoss effective_loss(const DetectionChain& chain);

/// Characteristic function of the measured (raw, unrescaled) quadrature at
/// phase theta. Throws NumericalError when the exponent overflows.
std::complex<double> damped_char_fn(const StateSpec& state, const DetectionChain& chain,
                                    double theta, double xi);

/// Variance of the raw measured quadrature at phase theta.
double damped_marginal_variance(const StateSpec& state, const DetectionChain& chain, double theta);

/// Squeezing in dB for a gain r: (20 / ln 10) r.
double gain_to_db(double r);
double db_to_gain(double db);

}  // namespace hdt
