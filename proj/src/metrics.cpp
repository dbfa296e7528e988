#include "hdtomo/metrics.hpp"

#include <cmath>
#include <numbers>

#include "hdtomo/errors.hpp"

namespace hdt {

namespace {

void check_non_negative(double r1, double epsilon_r) {
  if (!(r1 >= 0.0) || !std::isfinite(r1)) throw RangeError("r1 must be non-negative");
  if (!(epsilon_r >= 0.0) || !std::isfinite(epsilon_r))
    throw RangeError("epsilon_r must be non-negative");
}

}  // namespace

double fidelity_bsv(double r1, double epsilon_r) {
  check_non_negative(r1, epsilon_r);
  const double s = std::exp(2.0 * r1);
  return 2.0 / std::sqrt((epsilon_r * s + 2.0) * (epsilon_r / s + 2.0));
}

double fidelity_numeric(const WignerGrid& w_ideal, const WignerGrid& w_recon) {
  if (w_ideal.q_axis != w_recon.q_axis || w_ideal.p_axis != w_recon.p_axis)
    throw RangeError("fidelity needs grids on identical axes");
  if (w_ideal.n_q() < 2 || w_ideal.n_p() < 2) throw RangeError("fidelity of an empty grid");
  double sum = 0.0;
  for (std::size_t i = 0; i < w_ideal.values.size(); ++i) sum += w_ideal.values[i] * w_recon.values[i];
  return 2.0 * std::numbers::pi * sum * w_ideal.dq() * w_ideal.dp();
}

double wigner_depth(double r1, double epsilon_r) {
  check_non_negative(r1, epsilon_r);
  const double s = std::exp(2.0 * r1);
  const double prod = (epsilon_r + s) * (epsilon_r + 1.0 / s);
  return (epsilon_r * epsilon_r - 1.0) / (std::numbers::pi * prod * std::sqrt(prod));
}

GridMinimum scan_minimum(const WignerGrid& w) {
  if (w.values.empty()) throw RangeError("minimum of an empty grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < w.values.size(); ++i)
    if (w.values[i] < w.values[best]) best = i;
  const std::size_t np = w.n_p();
  return {w.values[best], w.q_axis[best / np], w.p_axis[best % np]};
}

QualityReport quality_report(const WignerGrid& w_ideal, const WignerGrid& w_recon,
                             double epsilon_r) {
  QualityReport r;
  r.fidelity = fidelity_numeric(w_ideal, w_recon);
  const auto m = scan_minimum(w_recon);
  r.min_value = m.value;
  r.min_q = m.q;
  r.min_p = m.p;
  auto nearest = [](const std::vector<double>& axis) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < axis.size(); ++i)
      if (std::abs(axis[i]) < std::abs(axis[best])) best = i;
    return best;
  };
  r.depth = w_recon.at(nearest(w_recon.q_axis), nearest(w_recon.p_axis));
  r.epsilon_r_used = epsilon_r;
  return r;
}

}  // namespace hdt
