#pragma once

// Per-item numerical kernels shared by the serial reference paths and the
// OpenMP paths. Both call these with identical arguments and only differ in
// how the outer loop is scheduled, so their results are bit-identical.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace hdt::kernels {

/// out[k] = (1/n) sum_j exp(i k step q_j), k = 0 .. out.size()-1.
void empirical_cf_ray(std::span<const double> samples, double step,
                      std::span<std::complex<double>> out);

/// Filtered projection of one ray, tabulated for cubic interpolation:
/// h(t) = integral over xi of |xi| C(xi e^{i theta}) e^{-alpha xi^2} e^{-i xi t}
/// in the reconstruction frame.
struct FilteredRay {
  double cos_t = 1.0;  // direction in the reconstruction frame
  double sin_t = 0.0;
  double weight = 0.0;  // angular quadrature weight
  double t0 = 0.0;
  double inv_dt = 1.0;
  std::vector<double> table;
};

struct RayGeometry {
  double theta_frame;  // ray angle in the reconstruction frame, [0, pi)
  double xi_step;      // radial step in the reconstruction frame
};

/// Maps a ray at phase theta with radial step `step` (rescaled units) into
/// the frame (q / lambda, lambda p), lambda^2 = frame_aspect.
RayGeometry ray_geometry(double theta, double step, double frame_aspect);

/// Builds the table over t in [-t_max, t_max] (plus stencil margin).
FilteredRay filter_ray(std::span<const std::complex<double>> values, RayGeometry geometry,
                       double alpha, double t_max, std::size_t oversampling);

/// (1 / 4 pi^2) sum_k weight_k h_k(u cos_k + v sin_k).
double backproject(std::span<const FilteredRay> rays, double u, double v);

/// Periodic trapezoid weights (period pi) for angles in [0, pi), any order.
std::vector<double> periodic_trapezoid_weights(std::span<const double> angles);

/// Normalized Gaussian taps exp(-(m step)^2 / eps) for |m| <= radius.
std::vector<double> blur_taps(double epsilon, double step, std::size_t radius);

/// out[i] = sum_m taps[m] in[i + m - radius] with zeros outside, strided
/// access so one routine serves rows and columns.
void convolve_line(const double* in, double* out, std::size_t n, std::ptrdiff_t stride,
                   std::span<const double> taps);

}  // namespace hdt::kernels
