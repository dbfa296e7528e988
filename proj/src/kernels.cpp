#include "hdtomo/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace hdt::kernels {

void empirical_cf_ray(std::span<const double> samples, double step,
                      std::span<std::complex<double>> out) {
  const std::size_t n_xi = out.size();
  std::vector<double> re(n_xi, 0.0), im(n_xi, 0.0);
  for (double q : samples) {
    const double zr = std::cos(step * q);
    const double zi = std::sin(step * q);
    double wr = 1.0, wi = 0.0;
    for (std::size_t k = 0; k < n_xi; ++k) {
      re[k] += wr;
      im[k] += wi;
      const double nr = wr * zr - wi * zi;
      wi = wr * zi + wi * zr;
      wr = nr;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  for (std::size_t k = 0; k < n_xi; ++k) out[k] = {re[k] * inv_n, im[k] * inv_n};
}

RayGeometry ray_geometry(double theta, double step, double frame_aspect) {
  const double lambda = std::sqrt(frame_aspect);
  const double x = lambda * std::cos(theta);
  const double y = std::sin(theta) / lambda;
  double ang = std::atan2(y, x);
  if (ang < 0.0) ang += std::numbers::pi;
  if (ang >= std::numbers::pi) ang -= std::numbers::pi;
  return {ang, step * std::hypot(x, y)};
}

FilteredRay filter_ray(std::span<const std::complex<double>> values, RayGeometry geometry,
                       double alpha, double t_max, std::size_t oversampling) {
  const std::size_t n = values.size();
  const double dxi = geometry.xi_step;
  const double xi_max = dxi * static_cast<double>(n - 1);

  // Trapezoid weights with the half weight at xi_max; the node at xi = 0
  // carries no weight because of the |xi| factor.
  std::vector<std::complex<double>> a(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double xi = dxi * static_cast<double>(j);
    const double tw = (j + 1 == n) ? 0.5 : 1.0;
    a[j] = values[j] * (xi * std::exp(-alpha * xi * xi) * dxi * tw);
  }
  // Euler-Maclaurin correction for the |xi| kink at the origin:
  // d/dxi [xi C e^{-i xi t}] at 0 equals C(0).
  const std::complex<double> kink = values[0] * (dxi * dxi / 12.0);

  const double dt = std::numbers::pi / (xi_max * static_cast<double>(oversampling));
  const double t0 = -t_max - 2.0 * dt;
  const auto n_t = static_cast<std::size_t>(std::ceil(2.0 * (t_max + 2.0 * dt) / dt)) + 2;

  FilteredRay ray;
  ray.cos_t = std::cos(geometry.theta_frame);
  ray.sin_t = std::sin(geometry.theta_frame);
  ray.t0 = t0;
  ray.inv_dt = 1.0 / dt;
  ray.table.resize(n_t);
  for (std::size_t m = 0; m < n_t; ++m) {
    const double t = t0 + dt * static_cast<double>(m);
    const std::complex<double> rot = std::polar(1.0, -dxi * t);
    std::complex<double> acc = 0.0;
    for (std::size_t j = n; j-- > 1;) acc = (acc + a[j]) * rot;
    ray.table[m] = 2.0 * (acc + kink).real();
  }
  return ray;
}

double backproject(std::span<const FilteredRay> rays, double u, double v) {
  double sum = 0.0;
  for (const auto& ray : rays) {
    const double pos = (u * ray.cos_t + v * ray.sin_t - ray.t0) * ray.inv_dt;
    const double fl = std::floor(pos);
    const double f = pos - fl;
    const auto i = static_cast<std::size_t>(fl);
    const double* h = ray.table.data() + (i - 1);
    // 4-point Lagrange interpolation on nodes -1, 0, 1, 2.
    const double wm1 = -f * (f - 1.0) * (f - 2.0) / 6.0;
    const double w0 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
    const double w1 = -(f + 1.0) * f * (f - 2.0) / 2.0;
    const double w2 = (f + 1.0) * f * (f - 1.0) / 6.0;
    sum += ray.weight * (wm1 * h[0] + w0 * h[1] + w1 * h[2] + w2 * h[3]);
  }
  return sum / (4.0 * std::numbers::pi * std::numbers::pi);
}

std::vector<double> periodic_trapezoid_weights(std::span<const double> angles) {
  const std::size_t n = angles.size();
  std::vector<double> w(n, 0.0);
  if (n == 0) return w;
  if (n == 1) {
    w[0] = std::numbers::pi;
    return w;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return angles[a] < angles[b]; });
  for (std::size_t k = 0; k < n; ++k) {
    const double prev = k == 0 ? angles[order[n - 1]] - std::numbers::pi : angles[order[k - 1]];
    const double next = k + 1 == n ? angles[order[0]] + std::numbers::pi : angles[order[k + 1]];
    w[order[k]] = 0.5 * (next - prev);
  }
  return w;
}

std::vector<double> blur_taps(double epsilon, double step, std::size_t radius) {
  std::vector<double> taps(2 * radius + 1);
  for (std::size_t m = 0; m < taps.size(); ++m) {
    const double x = step * (static_cast<double>(m) - static_cast<double>(radius));
    taps[m] = std::exp(-x * x / epsilon);
  }
  const double sum = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (auto& t : taps) t /= sum;
  return taps;
}

void convolve_line(const double* in, double* out, std::size_t n, std::ptrdiff_t stride,
                   std::span<const double> taps) {
  const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);
  const auto len = static_cast<std::ptrdiff_t>(n);
  for (std::ptrdiff_t i = 0; i < len; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - radius);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(len - 1, i + radius);
    double acc = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) acc += taps[static_cast<std::size_t>(j - i + radius)] * in[j * stride];
    out[i * stride] = acc;
  }
}

}  // namespace hdt::kernels
