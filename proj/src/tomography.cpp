#include "hdtomo/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hdtomo/errors.hpp"
#include "hdtomo/kernels.hpp"

namespace hdt {

namespace {

using kernels::FilteredRay;

std::vector<kernels::RayGeometry> ray_geometries(const PolarCharGrid& grid, double aspect) {
  std::vector<kernels::RayGeometry> geo(grid.n_theta());
  for (std::size_t k = 0; k < geo.size(); ++k)
    geo[k] = kernels::ray_geometry(grid.theta[k], grid.xi_step[k], aspect);
  return geo;
}

void check_grid(const PolarCharGrid& grid) {
  if (grid.n_theta() == 0 || grid.n_xi < 2) throw RangeError("polar grid is empty");
  if (grid.xi_step.size() != grid.n_theta() || grid.values.size() != grid.n_theta() * grid.n_xi)
    throw RangeError("polar grid arrays are inconsistent");
}

// Shared set-up of the inversion: geometry, weights, output axes, warnings.
struct InversionPlan {
  std::vector<kernels::RayGeometry> geometry;
  std::vector<double> weights;
  double t_max = 0.0;
  WignerGrid out;
  std::vector<double> u;
};

InversionPlan plan_inversion(const PolarCharGrid& grid, const ReconstructionConfig& config) {
  config.validate();
  check_grid(grid);
  InversionPlan plan;
  plan.geometry = ray_geometries(grid, config.frame_aspect);
  std::vector<double> angles(plan.geometry.size());
  for (std::size_t k = 0; k < angles.size(); ++k) angles[k] = plan.geometry[k].theta_frame;
  plan.weights = kernels::periodic_trapezoid_weights(angles);
  plan.t_max = config.grid_half_width * std::numbers::sqrt2;
  plan.u = uniform_axis(config.grid_half_width, config.grid_n);
  auto [q, p] = reconstruction_axes(config);
  plan.out.q_axis = std::move(q);
  plan.out.p_axis = std::move(p);
  plan.out.values.assign(config.grid_n * config.grid_n, 0.0);

  if (config.apodization_alpha == 0.0) {
    double edge = 0.0;
    for (std::size_t k = 0; k < grid.n_theta(); ++k)
      edge = std::max(edge, std::abs(grid.at(k, grid.n_xi - 1)));
    if (edge > 0.01)
      plan.out.warnings.push_back("truncation: |C| = " + std::to_string(edge) +
                                  " at xi_max exceeds 0.01; increase xi_max or apodize");
  }
  return plan;
}

FilteredRay make_ray(const PolarCharGrid& grid, const InversionPlan& plan,
                     const ReconstructionConfig& config, std::size_t k) {
  std::span<const std::complex<double>> row(grid.values.data() + k * grid.n_xi, grid.n_xi);
  auto ray = kernels::filter_ray(row, plan.geometry[k], config.apodization_alpha, plan.t_max,
                                 config.table_oversampling);
  ray.weight = plan.weights[k];
  return ray;
}

void backproject_row(const std::vector<FilteredRay>& rays, InversionPlan& plan, std::size_t i) {
  const std::size_t n = plan.u.size();
  for (std::size_t j = 0; j < n; ++j)
    plan.out.values[i * n + j] = kernels::backproject(rays, plan.u[i], plan.u[j]);
}

struct BlurPlan {
  std::vector<double> taps_q;
  std::vector<double> taps_p;
};

BlurPlan plan_blur(const WignerGrid& w, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw RangeError("blur epsilon must be positive");
  if (w.n_q() < 2 || w.n_p() < 2 || w.values.size() != w.n_q() * w.n_p())
    throw RangeError("Wigner grid is empty or inconsistent");
  const double reach = 5.0 * std::sqrt(epsilon);
  auto radius_for = [&](double step, std::size_t n, const char* axis) {
    const auto r = static_cast<std::size_t>(std::ceil(reach / step));
    const std::size_t allowed = (n - 1) / 2;
    if (r > allowed)
      throw RangeError(std::string("blur kernel radius 5*sqrt(eps) = ") + std::to_string(reach) +
                       " needs " + std::to_string(r - allowed) +
                       " more samples of padding per side along " + axis);
    return r;
  };
  const std::size_t rq = radius_for(w.dq(), w.n_q(), "q");
  const std::size_t rp = radius_for(w.dp(), w.n_p(), "p");
  return {kernels::blur_taps(epsilon, w.dq(), rq), kernels::blur_taps(epsilon, w.dp(), rp)};
}

}  // namespace

double WignerGrid::integral() const {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum * dq() * dp();
}

double WignerGrid::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

void ReconstructionConfig::validate() const {
  if (!(xi_max > 0.0) || !std::isfinite(xi_max)) throw RangeError("xi_max must be positive");
  if (n_xi < 2) throw RangeError("n_xi must be at least 2");
  if (n_theta < 8) throw RangeError("n_theta must be at least 8");
  if (grid_n < 32) throw RangeError("grid_n must be at least 32");
  if (!(grid_half_width > 0.0) || !std::isfinite(grid_half_width))
    throw RangeError("grid_half_width must be positive");
  if (!(apodization_alpha >= 0.0) || !std::isfinite(apodization_alpha))
    throw RangeError("apodization_alpha must be non-negative");
  if (rescale_gain && !(*rescale_gain > 0.0 && std::isfinite(*rescale_gain)))
    throw RangeError("rescale_gain must be positive");
  if (!(frame_aspect > 0.0) || !std::isfinite(frame_aspect))
    throw RangeError("frame_aspect must be positive");
  if (table_oversampling < 2) throw RangeError("table_oversampling must be at least 2");
}

ReconstructionConfig default_reconstruction_config(const StateSpec& state, double epsilon_r,
                                                   bool sampled) {
  if (!(epsilon_r >= 0.0) || !std::isfinite(epsilon_r))
    throw RangeError("epsilon_r must be non-negative");
  const double s = state.s();
  ReconstructionConfig c;
  c.frame_aspect = std::sqrt((s + epsilon_r) / (1.0 / s + epsilon_r));
  // Per-axis variance of the Gaussian envelope in the matched frame.
  const double sigma = std::sqrt(0.5 * std::sqrt((s + epsilon_r) * (1.0 / s + epsilon_r)));
  c.grid_half_width = 6.0 * std::numbers::sqrt2 * sigma;
  if (!sampled) {
    c.xi_max = 12.0 / sigma;
    return c;
  }
  // Sampled data: stop where |C| falls below 1e-6, beyond which the
  // empirical estimate is pure noise.
  const double lambda = std::sqrt(c.frame_aspect);
  auto tail = [&](double x) {
    const auto along_q = char_fn_terms(state, x / lambda, 0.0);
    const auto along_p = char_fn_terms(state, 0.0, x * lambda);
    const double dq2 = x * x / c.frame_aspect;
    const double dp2 = x * x * c.frame_aspect;
    const double cq = std::abs(along_q.polynomial) * std::exp(-0.25 * (along_q.quadratic + epsilon_r * dq2));
    const double cp = std::abs(along_p.polynomial) * std::exp(-0.25 * (along_p.quadratic + epsilon_r * dp2));
    return std::max(cq, cp);
  };
  const double dx = 0.01 / sigma;
  double last = dx;
  for (double x = dx; x < 40.0 / sigma; x += dx)
    if (tail(x) >= 1e-6) last = x;
  c.xi_max = last + dx;
  c.n_xi = 128;
  c.apodization_alpha = 1e-3 / (c.xi_max * c.xi_max);
  return c;
}

std::vector<double> matched_phases(std::size_t n, double frame_aspect) {
  if (n == 0) throw RangeError("phase count must be positive");
  if (!(frame_aspect > 0.0)) throw RangeError("frame_aspect must be positive");
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double phi = std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    double th = std::atan2(frame_aspect * std::sin(phi), std::cos(phi));
    if (th >= std::numbers::pi) th -= std::numbers::pi;
    out[k] = th;
  }
  return out;
}

double raw_xi_step(const ReconstructionConfig& config, double theta, double gain) {
  const double frame_step = config.xi_max / static_cast<double>(config.n_xi - 1);
  const double kappa = kernels::ray_geometry(theta, 1.0, config.frame_aspect).xi_step;
  return frame_step / (gain * kappa);
}

double rescale_gain_for(const ReconstructionConfig& config, const DetectionChain& chain) {
  return config.rescale_gain.value_or(effective_loss(chain).gain_scale);
}

namespace {

PolarCharGrid empirical_layout(const QuadratureDataset& dataset, const ReconstructionConfig& config) {
  config.validate();
  const double g = rescale_gain_for(config, dataset.chain());
  PolarCharGrid grid;
  grid.theta = dataset.phases();
  grid.n_xi = config.n_xi;
  grid.xi_step.resize(grid.theta.size());
  for (std::size_t k = 0; k < grid.theta.size(); ++k)
    grid.xi_step[k] = raw_xi_step(config, grid.theta[k], g);
  grid.values.assign(grid.theta.size() * grid.n_xi, {});
  return grid;
}

void fill_empirical_ray(const QuadratureDataset& dataset, PolarCharGrid& grid, std::size_t k) {
  kernels::empirical_cf_ray(dataset.samples(k), grid.xi_step[k],
                            std::span(grid.values.data() + k * grid.n_xi, grid.n_xi));
}

}  // namespace

PolarCharGrid empirical_char_fn(const QuadratureDataset& dataset, const ReconstructionConfig& config) {
  auto grid = empirical_layout(dataset, config);
  const auto n = static_cast<std::ptrdiff_t>(grid.n_theta());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < n; ++k) fill_empirical_ray(dataset, grid, static_cast<std::size_t>(k));
  return grid;
}

PolarCharGrid empirical_char_fn_serial(const QuadratureDataset& dataset,
                                       const ReconstructionConfig& config) {
  auto grid = empirical_layout(dataset, config);
  for (std::size_t k = 0; k < grid.n_theta(); ++k) fill_empirical_ray(dataset, grid, k);
  return grid;
}

PolarCharGrid analytic_char_grid(const StateSpec& state, const DetectionChain& chain,
                                 const ReconstructionConfig& config) {
  config.validate();
  const double g = rescale_gain_for(config, chain);
  PolarCharGrid grid;
  grid.theta = matched_phases(config.n_theta, config.frame_aspect);
  grid.n_xi = config.n_xi;
  grid.xi_step.resize(grid.theta.size());
  grid.values.resize(grid.theta.size() * grid.n_xi);
  for (std::size_t k = 0; k < grid.theta.size(); ++k) {
    grid.xi_step[k] = raw_xi_step(config, grid.theta[k], g);
    for (std::size_t j = 0; j < grid.n_xi; ++j)
      grid.at(k, j) = damped_char_fn(state, chain, grid.theta[k], grid.xi_step[k] * static_cast<double>(j));
  }
  return grid;
}

PolarCharGrid unbiased_rescale(PolarCharGrid grid, double g) {
  if (!(g > 0.0) || !std::isfinite(g)) throw RangeError("rescale gain must be positive");
  for (auto& step : grid.xi_step) step *= g;
  return grid;
}

WignerGrid invert_to_wigner(const PolarCharGrid& grid, const ReconstructionConfig& config) {
  auto plan = plan_inversion(grid, config);
  std::vector<FilteredRay> rays(grid.n_theta());
  const auto n_rays = static_cast<std::ptrdiff_t>(rays.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < n_rays; ++k)
    rays[static_cast<std::size_t>(k)] = make_ray(grid, plan, config, static_cast<std::size_t>(k));
  const auto n_rows = static_cast<std::ptrdiff_t>(plan.u.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n_rows; ++i) backproject_row(rays, plan, static_cast<std::size_t>(i));
  return std::move(plan.out);
}

WignerGrid invert_to_wigner_serial(const PolarCharGrid& grid, const ReconstructionConfig& config) {
  auto plan = plan_inversion(grid, config);
  std::vector<FilteredRay> rays(grid.n_theta());
  for (std::size_t k = 0; k < rays.size(); ++k) rays[k] = make_ray(grid, plan, config, k);
  for (std::size_t i = 0; i < plan.u.size(); ++i) backproject_row(rays, plan, i);
  return std::move(plan.out);
}

double blur_kernel(double epsilon, double q, double p) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw RangeError("blur epsilon must be positive");
  return std::exp(-(q * q + p * p) / epsilon) / (std::numbers::pi * epsilon);
}

WignerGrid convolve_blur(const WignerGrid& w, double epsilon) {
  const auto plan = plan_blur(w, epsilon);
  const std::size_t nq = w.n_q(), np = w.n_p();
  WignerGrid tmp = w;
  WignerGrid out = w;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(nq); ++i)
    kernels::convolve_line(w.values.data() + i * np, tmp.values.data() + i * np, np, 1, plan.taps_p);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(np); ++j)
    kernels::convolve_line(tmp.values.data() + j, out.values.data() + j, nq,
                           static_cast<std::ptrdiff_t>(np), plan.taps_q);
  return out;
}

WignerGrid convolve_blur_serial(const WignerGrid& w, double epsilon) {
  const auto plan = plan_blur(w, epsilon);
  const std::size_t nq = w.n_q(), np = w.n_p();
  WignerGrid tmp = w;
  WignerGrid out = w;
  for (std::size_t i = 0; i < nq; ++i)
    kernels::convolve_line(w.values.data() + i * np, tmp.values.data() + i * np, np, 1, plan.taps_p);
  for (std::size_t j = 0; j < np; ++j)
    kernels::convolve_line(tmp.values.data() + j, out.values.data() + j, nq,
                           static_cast<std::ptrdiff_t>(np), plan.taps_q);
  return out;
}

double blurred_wigner_closed_form(const StateSpec& state, double epsilon_r, double q, double p) {
  if (!(epsilon_r >= 0.0) || !std::isfinite(epsilon_r))
    throw RangeError("epsilon_r must be non-negative");
  if (!std::isfinite(q) || !std::isfinite(p)) throw RangeError("q and p must be finite");
  const double s = state.s();
  const double e = epsilon_r;
  const double aq = e + s;
  const double ap = e + 1.0 / s;
  const double prod = aq * ap;
  const double gauss = std::exp(-q * q / aq - p * p / ap);
  if (!state.has_photon()) return gauss / (std::numbers::pi * std::sqrt(prod));
  const double num = 2.0 * q * q * (s * e + 1.0) / aq + 2.0 * p * p * aq / (s * e + 1.0) + e * e - 1.0;
  return num / (std::numbers::pi * prod * std::sqrt(prod)) * gauss;
}

std::vector<double> uniform_axis(double half_width, std::size_t n) {
  if (n < 2) throw RangeError("axis needs at least 2 points");
  std::vector<double> axis(n);
  const double step = 2.0 * half_width / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) axis[i] = -half_width + step * static_cast<double>(i);
  return axis;
}

std::pair<std::vector<double>, std::vector<double>> reconstruction_axes(
    const ReconstructionConfig& config) {
  const double lambda = std::sqrt(config.frame_aspect);
  auto q = uniform_axis(config.grid_half_width * lambda, config.grid_n);
  auto p = uniform_axis(config.grid_half_width / lambda, config.grid_n);
  return {std::move(q), std::move(p)};
}

WignerGrid closed_form_grid(const StateSpec& state, double epsilon_r,
                            const std::vector<double>& q_axis, const std::vector<double>& p_axis) {
  WignerGrid w;
  w.q_axis = q_axis;
  w.p_axis = p_axis;
  w.values.resize(q_axis.size() * p_axis.size());
  for (std::size_t i = 0; i < q_axis.size(); ++i)
    for (std::size_t j = 0; j < p_axis.size(); ++j)
      w.at(i, j) = blurred_wigner_closed_form(state, epsilon_r, q_axis[i], p_axis[j]);
  return w;
}

WignerGrid reconstruct_analytic(const StateSpec& state, const DetectionChain& chain,
                                const ReconstructionConfig& config) {
  const double g = rescale_gain_for(config, chain);
  return invert_to_wigner(unbiased_rescale(analytic_char_grid(state, chain, config), g), config);
}

WignerGrid reconstruct_sampled(const QuadratureDataset& dataset, const ReconstructionConfig& config) {
  const double g = rescale_gain_for(config, dataset.chain());
  return invert_to_wigner(unbiased_rescale(empirical_char_fn(dataset, config), g), config);
}

}  // namespace hdt
