#pragma once

#include <complex>
#include <string>
#include <string_view>

namespace hdt {

enum class StateKind { Vacuum, SqueezedVacuum, SinglePhoton, SqueezedSinglePhoton };

std::string_view to_string(StateKind kind);
/// Accepts the snake_case names produced by to_string. Throws RangeError.
StateKind parse_state_kind(std::string_view name);

/// Ideal single-mode input state. Quadratures use the vacuum-variance-1/2
/// convention; squeezing is axis aligned with q anti-squeezed (variance s/2)
/// and p squeezed (variance 1/(2s)), s = exp(2 r1).
class StateSpec {
public:
  static constexpr double kMaxSqueezing = 10.0;

  /// r1 is ignored (forced to 0) for Vacuum and SinglePhoton.
  /// Throws RangeError when r1 is negative, non-finite or above kMaxSqueezing.
  explicit StateSpec(StateKind kind, double r1 = 0.0);

  static StateSpec vacuum() { return StateSpec(StateKind::Vacuum); }
  static StateSpec single_photon() { return StateSpec(StateKind::SinglePhoton); }
  static StateSpec squeezed_vacuum(double r1) { return StateSpec(StateKind::SqueezedVacuum, r1); }
  static StateSpec squeezed_single_photon(double r1) {
    return StateSpec(StateKind::SqueezedSinglePhoton, r1);
  }

  StateKind kind() const noexcept { return kind_; }
  double r1() const noexcept { return r1_; }
  /// Squeezing factor exp(2 r1).
  double s() const noexcept { return s_; }
  /// True for the single-photon family (non-Gaussian, negative at the origin).
  bool has_photon() const noexcept {
    return kind_ == StateKind::SinglePhoton || kind_ == StateKind::SqueezedSinglePhoton;
  }

  friend bool operator==(const StateSpec&, const StateSpec&) = default;

private:
  StateKind kind_;
  double r1_;
  double s_;
};

/// Characteristic function split as C = polynomial * exp(-quadratic / 4).
/// Lets callers combine exponents before exponentiating.
struct CharFnTerms {
  double polynomial;
  double quadratic;
};

CharFnTerms char_fn_terms(const StateSpec& state, double z_re, double z_im);

double wigner(const StateSpec& state, double q, double p);

/// C(z) = integral of W(q,p) exp(i(z' q + z'' p)).
std::complex<double> char_fn(const StateSpec& state, double z_re, double z_im);

/// Probability density of the quadrature q cos(theta) + p sin(theta).
/// theta must lie in [0, pi); callers own phase wrapping.
double marginal_pdf(const StateSpec& state, double theta, double q);

/// Variance of the quadrature at phase theta (mean is zero for every state).
double marginal_variance(const StateSpec& state, double theta);

double mean_photon_number(const StateSpec& state);

}  // namespace hdt
