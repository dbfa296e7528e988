#include "hdtomo/channels.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hdtomo/errors.hpp"

namespace hdt {

namespace {

struct NoiseTerms {
  double gain;      // sqrt(eta_i eta_d) e^r
  double variance;  // added quadrature variance at the detector
};

// Variance added on top of the rescaled signal, in raw detector units:
// (1 - eta_i) eta_d e^{2r} / 2 + sigma_a^2 eta_d e^{2r} + (1 - eta_d) / 2.
NoiseTerms noise_terms(const DetectionChain& chain) {
  const auto loss = effective_loss(chain);
  const double e2r = std::exp(2.0 * loss.r_eff);
  const double eta_i = chain.eta_i();
  const double eta_d = chain.eta_d();
  const double var =
      0.5 * (1.0 - eta_i) * eta_d * e2r + loss.sigma_a2 * eta_d * e2r + 0.5 * (1.0 - eta_d);
  return {loss.gain_scale, var};
}

}  // namespace

CrystalParams::CrystalParams(double k_per_m, double length_m) : k_(k_per_m), d_(length_m) {
  if (!std::isfinite(k_per_m) || k_per_m < 0.0)
    throw RangeError("crystal absorption k must be finite and non-negative");
  if (!std::isfinite(length_m) || length_m <= 0.0)
    throw RangeError("crystal length d must be positive");
  if (k_ * d_ > 1.0) throw RangeError("crystal k*d must not exceed 1 (thin absorber)");
}

AmplifierParams::AmplifierParams(double r_raw, CrystalParams crystal)
    : r_raw_(r_raw), crystal_(crystal) {
  if (!std::isfinite(r_raw) || r_raw < 0.0)
    throw RangeError("raw amplifier gain must be finite and non-negative");
  if (r_raw < 0.5 * crystal.kd())
    throw RangeError("raw amplifier gain " + std::to_string(r_raw) +
                     " is below the absorption correction k*d/2");
}

DetectionChain::DetectionChain(double eta_i, double eta_d, std::optional<AmplifierParams> amp)
    : eta_i_(eta_i), eta_d_(eta_d), amp_(amp) {
  if (!(eta_i > 0.0 && eta_i <= 1.0)) throw RangeError("eta_i must lie in (0, 1]");
  if (!(eta_d > 0.0 && eta_d <= 1.0)) throw RangeError("eta_d must lie in (0, 1]");
}

double effective_squeezing(const AmplifierParams& amp) {
  const double r = amp.r_raw() - 0.5 * amp.crystal().kd();
  if (r < 0.0) throw RangeError("effective squeezing is negative");
  return r;
}

double bulk_noise_variance(const AmplifierParams& amp) {
  const double kd = amp.crystal().kd();
  const double r = effective_squeezing(amp);
  if (r == 0.0) return 0.5 * kd;
  // -expm1(-2r) keeps precision for small r.
  return kd / (4.0 * r) * -std::expm1(-2.0 * r);
}

double bulk_noise_variance_layered(const AmplifierParams& amp, std::size_t n_layers) {
  if (n_layers == 0) throw RangeError("layer count must be at least 1");
  const double kd = amp.crystal().kd();
  const double r = effective_squeezing(amp);
  const double n = static_cast<double>(n_layers);
  if (r == 0.0) return 0.5 * kd;
  return kd / (2.0 * n) * -std::expm1(-2.0 * r) / std::expm1(2.0 * r / n);
}

EffectiveLoss effective_loss(const DetectionChain& chain) {
  const double eta_i = chain.eta_i();
  const double eta_d = chain.eta_d();
  const double eps_i = (1.0 - eta_i) / eta_i;
  const double eps_d = (1.0 - eta_d) / eta_d;
  double r = 0.0;
  double sigma2 = 0.0;
  if (const auto& amp = chain.amplifier()) {
    r = effective_squeezing(*amp);
    sigma2 = bulk_noise_variance(*amp);
  }
  EffectiveLoss out{};
  out.r_eff = r;
  out.sigma_a2 = sigma2;
  out.epsilon_r = eps_i + (2.0 * sigma2 + eps_d * std::exp(-2.0 * r)) / eta_i;
  out.gain_scale = std::sqrt(eta_i * eta_d) * std::exp(r);
  return out;
}

std::complex<double> damped_char_fn(const StateSpec& state, const DetectionChain& chain,
                                    double theta, double xi) {
  if (!std::isfinite(theta) || !std::isfinite(xi))
    throw RangeError("phase and xi must be finite");
  const auto nt = noise_terms(chain);
  const double u = nt.gain * xi;
  if (!std::isfinite(u)) throw NumericalError("gain * xi overflows");
  const auto terms = char_fn_terms(state, u * std::cos(theta), u * std::sin(theta));
  const double exponent = -0.25 * terms.quadratic - 0.5 * xi * xi * nt.variance;
  if (!std::isfinite(exponent) || !std::isfinite(terms.polynomial))
    throw NumericalError("damped characteristic function overflows at xi = " + std::to_string(xi));
  if (exponent < -745.0) return {0.0, 0.0};
  return {terms.polynomial * std::exp(exponent), 0.0};
}

double damped_marginal_variance(const StateSpec& state, const DetectionChain& chain,
                                double theta) {
  const auto nt = noise_terms(chain);
  return nt.gain * nt.gain * marginal_variance(state, theta) + nt.variance;
}

double gain_to_db(double r) { return 20.0 / std::numbers::ln10 * r; }
double db_to_gain(double db) { return db * std::numbers::ln10 / 20.0; }

}  // namespace hdt
