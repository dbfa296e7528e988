#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hdtomo/channels.hpp"
#include "hdtomo/homodyne.hpp"
#include "hdtomo/states.hpp"

namespace hdt {

/// Characteristic function sampled along rays z = xi e^{i theta}. Each ray
/// carries its own radial step (xi_k = k * xi_step[ray]); all rays share
/// n_xi nodes starting at xi = 0. Values are row-major [ray][k].
struct PolarCharGrid {
  std::vector<double> theta;
  std::vector<double> xi_step;
  std::size_t n_xi = 0;
  std::vector<std::complex<double>> values;

  std::size_t n_theta() const noexcept { return theta.size(); }
  double xi_max(std::size_t ray) const { return xi_step.at(ray) * static_cast<double>(n_xi - 1); }
  const std::complex<double>& at(std::size_t ray, std::size_t k) const {
    return values[ray * n_xi + k];
  }
  std::complex<double>& at(std::size_t ray, std::size_t k) { return values[ray * n_xi + k]; }
};

/// W(q, p) on a uniform rectangular grid, row-major [q][p].
struct WignerGrid {
  std::vector<double> q_axis;
  std::vector<double> p_axis;
  std::vector<double> values;
  /// Numerical caveats attached by the producer (truncation, coverage).
  std::vector<std::string> warnings;

  std::size_t n_q() const noexcept { return q_axis.size(); }
  std::size_t n_p() const noexcept { return p_axis.size(); }
  double dq() const { return q_axis.at(1) - q_axis.at(0); }
  double dp() const { return p_axis.at(1) - p_axis.at(0); }
  double at(std::size_t iq, std::size_t ip) const { return values[iq * p_axis.size() + ip]; }
  double& at(std::size_t iq, std::size_t ip) { return values[iq * p_axis.size() + ip]; }
  /// Riemann sum of W dq dp.
  double integral() const;
  double max_abs() const;
};

/// Reconstruction settings. Inversion happens in a stretched frame
/// (q / lambda, lambda p) with lambda^2 = frame_aspect, where the
/// reconstructed state is close to round; xi_max and grid_half_width are
/// measured in that frame. frame_aspect = 1 is the plain (q, p) frame.
struct ReconstructionConfig {
  double xi_max = 12.0;
  std::size_t n_xi = 512;
  std::size_t n_theta = 180;
  double grid_half_width = 6.0;
  std::size_t grid_n = 257;
  /// Gaussian taper exp(-alpha xi^2) applied before inversion.
  double apodization_alpha = 0.0;
  /// Overrides the chain's gain_scale when set (calibrated gain).
  std::optional<double> rescale_gain;
  double frame_aspect = 1.0;
  /// Table points per shortest period of the filtered projections.
  std::size_t table_oversampling = 16;

  /// Throws RangeError on xi_max <= 0, n_theta < 8, grid_n < 32, n_xi < 2,
  /// non-positive frame_aspect or rescale_gain, negative apodization.
  void validate() const;
};

/// Defaults for a state seen through a chain with effective loss epsilon_r:
/// frame matched to the blurred aspect ratio, xi_max = 12 / sigma for
/// analytic grids and the 1e-6 decay point of |C| for sampled ones.
ReconstructionConfig default_reconstruction_config(const StateSpec& state, double epsilon_r,
                                                   bool sampled);

/// Local-oscillator phases uniformly spaced in the reconstruction frame:
/// theta_k = atan2(aspect * sin(phi_k), cos(phi_k)), phi_k = k pi / n.
/// For aspect > 1 they crowd around pi/2, where the squeezed marginal
/// changes fastest.
std::vector<double> matched_phases(std::size_t n, double frame_aspect);

/// Raw radial step for phase theta so that, after rescaling by `gain`, the
/// rays are uniformly sampled in the reconstruction frame.
double raw_xi_step(const ReconstructionConfig& config, double theta, double gain);

/// Gain used to rescale the measured axis: config override or chain value.
double rescale_gain_for(const ReconstructionConfig& config, const DetectionChain& chain);

/// Mean of exp(i xi q_j) over each phase's samples.
PolarCharGrid empirical_char_fn(const QuadratureDataset& dataset, const ReconstructionConfig& config);
PolarCharGrid empirical_char_fn_serial(const QuadratureDataset& dataset,
                                       const ReconstructionConfig& config);

/// damped_char_fn on the same nodes empirical_char_fn would use, at the
/// phases matched_phases(config.n_theta, config.frame_aspect).
PolarCharGrid analytic_char_grid(const StateSpec& state, const DetectionChain& chain,
                                 const ReconstructionConfig& config);

/// Reinterprets the radial axis as |z| = g * xi. Values are untouched.
PolarCharGrid unbiased_rescale(PolarCharGrid grid, double g);

/// 2-D inverse Fourier transform of a rescaled polar grid: per-ray filtered
/// projections back-projected onto the output grid, trapezoid weights in
/// both variables.
WignerGrid invert_to_wigner(const PolarCharGrid& grid, const ReconstructionConfig& config);
WignerGrid invert_to_wigner_serial(const PolarCharGrid& grid, const ReconstructionConfig& config);

/// (1 / pi eps) exp(-(q^2 + p^2) / eps). Throws RangeError for eps <= 0.
double blur_kernel(double epsilon, double q, double p);

/// Discrete separable convolution with the blur kernel, zero outside the
/// grid. Each 1-D kernel is truncated at 5 sqrt(eps) and renormalized to
/// unit sum. Throws RangeError when the truncated kernel is wider than the
/// grid.
WignerGrid convolve_blur(const WignerGrid& w, double epsilon);
WignerGrid convolve_blur_serial(const WignerGrid& w, double epsilon);

/// Closed-form reconstructed Wigner function of `state` after a chain with
/// effective loss epsilon_r (epsilon_r = 0 gives the ideal state).
double blurred_wigner_closed_form(const StateSpec& state, double epsilon_r, double q, double p);

/// Uniform axis of n points over [-half_width, half_width].
std::vector<double> uniform_axis(double half_width, std::size_t n);

/// Output axes of a reconstruction with `config`.
std::pair<std::vector<double>, std::vector<double>> reconstruction_axes(
    const ReconstructionConfig& config);

WignerGrid closed_form_grid(const StateSpec& state, double epsilon_r,
                            const std::vector<double>& q_axis, const std::vector<double>& p_axis);

/// analytic_char_grid -> unbiased_rescale -> invert_to_wigner.
WignerGrid reconstruct_analytic(const StateSpec& state, const DetectionChain& chain,
                                const ReconstructionConfig& config);
/// empirical_char_fn -> unbiased_rescale -> invert_to_wigner.
WignerGrid reconstruct_sampled(const QuadratureDataset& dataset, const ReconstructionConfig& config);

}  // namespace hdt
