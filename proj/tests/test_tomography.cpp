#include <catch_amalgamated.hpp>

#include <omp.h>

#include <cmath>
#include <random>

#include "hdtomo/errors.hpp"
#include "hdtomo/tomography.hpp"
#include "oracles.hpp"

using namespace hdt;
using Catch::Approx;
using oracle::kPi;

namespace {

ReconstructionConfig plain_config(double xi_max, std::size_t n_xi) {
  ReconstructionConfig c;
  c.xi_max = xi_max;
  c.n_xi = n_xi;
  c.n_theta = 8;
  c.rescale_gain = 1.0;
  return c;
}

DetectionChain amp_chain() { return DetectionChain(0.9999, 0.95, AmplifierParams(2.3, CrystalParams::bbo())); }

double linf(const WignerGrid& a, const WignerGrid& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace

TEST_CASE("empirical char fn examples") {
  const auto cfg = plain_config(10.0, 101);
  const auto chain = DetectionChain::lossless();
  {
    const QuadratureDataset ds(StateSpec::vacuum(), chain, {0.3}, {{0.0}}, 1);
    const auto g = empirical_char_fn(ds, cfg);
    for (std::size_t j = 0; j < g.n_xi; ++j) CHECK(g.at(0, j) == std::complex<double>(1.0, 0.0));
  }
  {
    const double a = 0.7;
    const QuadratureDataset ds(StateSpec::vacuum(), chain, {0.0}, {{-a, a}}, 1);
    const auto g = empirical_char_fn(ds, cfg);
    for (std::size_t j = 0; j < g.n_xi; ++j) {
      const double xi = g.xi_step[0] * static_cast<double>(j);
      CHECK(std::abs(g.at(0, j) - std::complex<double>(std::cos(a * xi), 0.0)) < 1e-12);
    }
  }
  {
    const std::size_t n = 1000000;
    const auto ds = sample_quadratures(StateSpec::vacuum(), chain, {0.0}, n, 42);
    const auto g = empirical_char_fn(ds, plain_config(4.0, 81));
    double worst = 0;
    for (std::size_t j = 0; j < g.n_xi; ++j) {
      const double xi = g.xi_step[0] * static_cast<double>(j);
      worst = std::max(worst, std::abs(g.at(0, j) - std::exp(-xi * xi / 4)));
    }
    CHECK(worst < 5.0 / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("analytic grid tabulates damped_char_fn") {
  const auto st = StateSpec::squeezed_vacuum(3);
  const DetectionChain chain(1.0, 0.95);
  ReconstructionConfig cfg = default_reconstruction_config(st, 1.0 / 19.0, false);
  const auto g = analytic_char_grid(st, chain, cfg);
  for (std::size_t k : {0u, 37u, 90u})
    for (std::size_t j : {0u, 5u, 200u}) {
      const double xi = g.xi_step[k] * static_cast<double>(j);
      const double s = st.s(), th = g.theta[k];
      const double z2 = 0.95 * xi * xi * (s * std::cos(th) * std::cos(th) + std::sin(th) * std::sin(th) / s);
      CHECK(g.at(k, j).real() == Approx(std::exp(-z2 / 4 - 0.05 * xi * xi / 4)).epsilon(1e-13).margin(1e-300));
    }
}

TEST_CASE("unbiased rescale") {
  const auto st = StateSpec::squeezed_single_photon(1);
  ReconstructionConfig cfg = default_reconstruction_config(st, 0.0, false);
  cfg.n_theta = 16;
  cfg.n_xi = 64;
  const auto chain = amp_chain();
  const auto raw = analytic_char_grid(st, chain, cfg);
  const auto same = unbiased_rescale(raw, 1.0);
  CHECK(same.xi_step == raw.xi_step);
  CHECK(same.values == raw.values);
  CHECK_THROWS_AS(unbiased_rescale(raw, 0.0), RangeError);

  // detector loss only: C'(z) = C(z) exp(-eps_d |z|^2 / 4), eps_d = 1/19
  const DetectionChain lossy(1.0, 0.95);
  const auto v = unbiased_rescale(analytic_char_grid(StateSpec::vacuum(), lossy, cfg), std::sqrt(0.95));
  for (std::size_t k = 0; k < v.n_theta(); ++k)
    for (std::size_t j = 0; j < v.n_xi; j += 7) {
      const double z = v.xi_step[k] * static_cast<double>(j);
      const double expect = std::exp(-z * z / 4) * std::exp(-z * z / (19.0 * 4));
      // relative error grows with the size of the exponent
      const double tol = 1e-15 * (1.0 + z * z / 3.0);
      CHECK(std::abs(v.at(k, j).real() - expect) <= tol * expect);
    }

  // amplified chain, 100 random nodes
  const oracle::Chain c{0.9999, 0.95, true, 2.3};
  const auto r = unbiased_rescale(raw, oracle::gain(c));
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> K(0, r.n_theta() - 1), J(0, r.n_xi - 1);
  for (int i = 0; i < 100; ++i) {
    const std::size_t k = K(rng), j = J(rng);
    const double z = r.xi_step[k] * static_cast<double>(j);
    const auto expect = char_fn(st, z * std::cos(r.theta[k]), z * std::sin(r.theta[k])) *
                        std::exp(-oracle::epsilon_r(c) * z * z / 4);
    CHECK(std::abs(r.at(k, j) - expect) < 1e-10);
  }
}

TEST_CASE("inversion examples") {
  SECTION("vacuum on a +-4 grid") {
    ReconstructionConfig cfg = default_reconstruction_config(StateSpec::vacuum(), 0.0, false);
    cfg.grid_half_width = 4.0;
    cfg.grid_n = 161;
    const auto w = reconstruct_analytic(StateSpec::vacuum(), DetectionChain::lossless(), cfg);
    const auto ref = closed_form_grid(StateSpec::vacuum(), 0.0, w.q_axis, w.p_axis);
    CHECK(linf(w, ref) < 1e-6);
    CHECK(w.warnings.empty());
  }
  SECTION("squeezed vacuum r1=1 lossless") {
    const auto st = StateSpec::squeezed_vacuum(1);
    const auto cfg = default_reconstruction_config(st, 0.0, false);
    const auto w = reconstruct_analytic(st, DetectionChain::lossless(), cfg);
    CHECK(linf(w, closed_form_grid(st, 0.0, w.q_axis, w.p_axis)) < 1e-5);
  }
  SECTION("squeezed single photon through a lossy chain") {
    const auto st = StateSpec::squeezed_single_photon(1);
    const DetectionChain chain(1.0, 0.95);
    const double eps = effective_loss(chain).epsilon_r;
    const auto cfg = default_reconstruction_config(st, eps, false);
    const auto w = reconstruct_analytic(st, chain, cfg);
    CHECK(linf(w, closed_form_grid(st, eps, w.q_axis, w.p_axis)) < 1e-4);
  }
}

TEST_CASE("analytic round trip for every state and chain") {
  const std::vector<StateSpec> states = {StateSpec::vacuum(), StateSpec::single_photon(),
                                         StateSpec::squeezed_vacuum(1), StateSpec::squeezed_single_photon(1)};
  const std::vector<DetectionChain> chains = {DetectionChain::lossless(), DetectionChain(1.0, 0.95), amp_chain()};
  for (const auto& st : states)
    for (const auto& chain : chains) {
      const double eps = effective_loss(chain).epsilon_r;
      const auto cfg = default_reconstruction_config(st, eps, false);
      const auto w = reconstruct_analytic(st, chain, cfg);
      const auto ref = closed_form_grid(st, eps, w.q_axis, w.p_axis);
      INFO(to_string(st.kind()) << " eps=" << eps);
      CHECK(linf(w, ref) < 1e-4 * ref.max_abs());
      CHECK(w.warnings.empty());
      CHECK(std::abs(w.integral() - 1.0) < 0.01);
    }
}

TEST_CASE("truncation warning") {
  const auto st = StateSpec::squeezed_vacuum(1);
  auto cfg = default_reconstruction_config(st, 0.0, false);
  cfg.xi_max = 2.0;
  cfg.grid_n = 33;
  const auto w = reconstruct_analytic(st, DetectionChain::lossless(), cfg);
  REQUIRE(w.warnings.size() == 1);
  CHECK(w.warnings[0].rfind("truncation", 0) == 0);
  cfg.apodization_alpha = 0.1;
  CHECK(reconstruct_analytic(st, DetectionChain::lossless(), cfg).warnings.empty());
}

TEST_CASE("config validation") {
  ReconstructionConfig c;
  CHECK_NOTHROW(c.validate());
  c.n_theta = 7;
  CHECK_THROWS_AS(c.validate(), RangeError);
  c = {};
  c.grid_n = 31;
  CHECK_THROWS_AS(c.validate(), RangeError);
  c = {};
  c.xi_max = 0;
  CHECK_THROWS_AS(c.validate(), RangeError);
  c = {};
  c.rescale_gain = -1.0;
  CHECK_THROWS_AS(c.validate(), RangeError);
}

TEST_CASE("blur kernel") {
  CHECK(blur_kernel(0.3, 0, 0) == Approx(1 / (kPi * 0.3)));
  const double total =
      oracle::trapz2([](double q, double p) { return blur_kernel(0.3, q, p); }, -4, 4, 400, -4, 4, 400);
  CHECK(total == Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(blur_kernel(0.0, 0, 0), RangeError);
}

TEST_CASE("convolve_blur against closed forms") {
  for (const auto& st : {StateSpec::squeezed_vacuum(1), StateSpec::squeezed_single_photon(1)}) {
    const auto cfg = default_reconstruction_config(st, 0.3, false);
    const auto [q, p] = reconstruction_axes(cfg);
    const auto ideal = closed_form_grid(st, 0.0, q, p);
    const auto blurred = convolve_blur(ideal, 0.1);
    CHECK(linf(blurred, closed_form_grid(st, 0.1, q, p)) < 1e-5);
    CHECK(blurred.integral() == Approx(ideal.integral()).epsilon(1e-8));
    // semigroup
    const auto twice = convolve_blur(convolve_blur(ideal, 0.04), 0.06);
    CHECK(linf(twice, blurred) < 1e-6);
    // delta limit
    CHECK(linf(convolve_blur(ideal, 1e-6), ideal) < 1e-6);
  }
}

TEST_CASE("convolve_blur margin error") {
  const auto axis = uniform_axis(1.0, 33);
  const auto w = closed_form_grid(StateSpec::vacuum(), 0.0, axis, axis);
  try {
    convolve_blur(w, 1.0);
    FAIL("expected a margin error");
  } catch (const RangeError& e) {
    CHECK(std::string(e.what()).find("padding") != std::string::npos);
  }
}

TEST_CASE("closed-form examples") {
  const auto bsv = StateSpec::squeezed_vacuum(3);
  for (double q : {-3.0, 0.0, 5.0})
    for (double p : {-0.02, 0.0, 0.05})
      CHECK(blurred_wigner_closed_form(bsv, 0.0, q, p) == Approx(wigner(bsv, q, p)).epsilon(1e-14));
  const auto ssp = StateSpec::squeezed_single_photon(3);
  for (double q : {-3.0, 0.0, 5.0})
    for (double p : {-0.02, 0.0, 0.05})
      CHECK(blurred_wigner_closed_form(ssp, 0.0, q, p) == Approx(wigner(ssp, q, p)).epsilon(1e-13).margin(1e-15));
  CHECK(std::abs(blurred_wigner_closed_form(ssp, 1.0, 0, 0)) < 1e-18);
  CHECK(blurred_wigner_closed_form(ssp, 0.012409567655379018755, 0, 0) ==
        Approx(-0.0216194346020020856454).epsilon(1e-12));
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
  const auto st = StateSpec::squeezed_single_photon(1);
  const auto chain = amp_chain();
  const double eps = effective_loss(chain).epsilon_r;
  auto cfg = default_reconstruction_config(st, eps, true);
  cfg.n_theta = 24;
  cfg.grid_n = 65;
  const auto phases = matched_phases(cfg.n_theta, cfg.frame_aspect);
  const auto ds = sample_quadratures(st, chain, phases, 2000, 5);
  omp_set_num_threads(3);
  const auto cf_par = empirical_char_fn(ds, cfg);
  const auto cf_ser = empirical_char_fn_serial(ds, cfg);
  CHECK(cf_par.values == cf_ser.values);
  const auto g = unbiased_rescale(cf_par, rescale_gain_for(cfg, chain));
  const auto w_par = invert_to_wigner(g, cfg);
  const auto w_ser = invert_to_wigner_serial(g, cfg);
  CHECK(w_par.values == w_ser.values);
  const auto b_par = convolve_blur(w_par, 0.05);
  const auto b_ser = convolve_blur_serial(w_par, 0.05);
  CHECK(b_par.values == b_ser.values);
  omp_set_num_threads(1);
}

TEST_CASE("matched phases") {
  const auto ph = matched_phases(180, 1.0);
  for (std::size_t k = 0; k < ph.size(); ++k) CHECK(ph[k] == Approx(kPi * k / 180).margin(1e-15));
  for (double th : matched_phases(90, 4000.0)) {
    CHECK(th >= 0.0);
    CHECK(th < kPi);
  }
}
