#include "hdtomo/states.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hdtomo/errors.hpp"

namespace hdt {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw RangeError(std::string(what) + " must be finite");
}

// rho^2 = s cos^2 + sin^2 / s: squared scale of the quadrature at theta
// relative to the unsqueezed state.
double quadrature_scale2(const StateSpec& st, double theta) {
  const double c = std::cos(theta);
  const double sn = std::sin(theta);
  return st.s() * c * c + sn * sn / st.s();
}

}  // namespace

std::string_view to_string(StateKind kind) {
  switch (kind) {
    case StateKind::Vacuum: return "vacuum";
    case StateKind::SqueezedVacuum: return "squeezed_vacuum";
    case StateKind::SinglePhoton: return "single_photon";
    case StateKind::SqueezedSinglePhoton: return "squeezed_single_photon";
  }
  return "unknown";
}

StateKind parse_state_kind(std::string_view name) {
  for (auto k : {StateKind::Vacuum, StateKind::SqueezedVacuum, StateKind::SinglePhoton,
                 StateKind::SqueezedSinglePhoton}) {
    if (to_string(k) == name) return k;
  }
  throw RangeError("unknown state kind '" + std::string(name) + "'");
}

StateSpec::StateSpec(StateKind kind, double r1) : kind_(kind), r1_(r1), s_(1.0) {
  if (kind == StateKind::Vacuum || kind == StateKind::SinglePhoton) {
    r1_ = 0.0;
    return;
  }
  if (!std::isfinite(r1) || r1 < 0.0)
    throw RangeError("squeezing r1 must be finite and non-negative");
  if (r1 > kMaxSqueezing)
    throw RangeError("squeezing r1 = " + std::to_string(r1) + " exceeds the supported maximum of " +
                     std::to_string(kMaxSqueezing));
  s_ = std::exp(2.0 * r1);
}

CharFnTerms char_fn_terms(const StateSpec& state, double z_re, double z_im) {
  require_finite(z_re, "z'");
  require_finite(z_im, "z''");
  const double quad = state.s() * z_re * z_re + z_im * z_im / state.s();
  const double poly = state.has_photon() ? 1.0 - 0.5 * quad : 1.0;
  return {poly, quad};
}

double wigner(const StateSpec& state, double q, double p) {
  require_finite(q, "q");
  require_finite(p, "p");
  const double s = state.s();
  const double a = q * q / s + p * p * s;
  const double gauss = std::exp(-a) * std::numbers::inv_pi;
  return state.has_photon() ? (2.0 * a - 1.0) * gauss : gauss;
}

std::complex<double> char_fn(const StateSpec& state, double z_re, double z_im) {
  const auto t = char_fn_terms(state, z_re, z_im);
  return {t.polynomial * std::exp(-0.25 * t.quadratic), 0.0};
}

double marginal_pdf(const StateSpec& state, double theta, double q) {
  require_finite(q, "q");
  if (!(theta >= 0.0 && theta < std::numbers::pi))
    throw RangeError("phase theta must lie in [0, pi)");
  const double rho = std::sqrt(quadrature_scale2(state, theta));
  const double x = q / rho;
  const double g = std::exp(-x * x) * std::numbers::inv_sqrtpi / rho;
  return state.has_photon() ? 2.0 * x * x * g : g;
}

double marginal_variance(const StateSpec& state, double theta) {
  const double v = 0.5 * quadrature_scale2(state, theta);
  return state.has_photon() ? 3.0 * v : v;
}

double mean_photon_number(const StateSpec& state) {
  const double sh = std::sinh(state.r1());
  switch (state.kind()) {
    case StateKind::Vacuum: return 0.0;
    case StateKind::SinglePhoton: return 1.0;
    case StateKind::SqueezedVacuum: return sh * sh;
    case StateKind::SqueezedSinglePhoton: return 3.0 * sh * sh + 1.0;
  }
  return 0.0;
}

}  // namespace hdt
