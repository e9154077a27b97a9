// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include "popkit/fitting.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "popkit/scaling.hpp"

using namespace popkit;

TEST_SUITE("fitting") {

TEST_CASE("eta from a clean plateau") {
  const double v = std::exp(-2.0);
  const EtaFit fit = extract_eta({v, v, v});
  CHECK(fit.eta_hat == doctest::Approx(2.0).epsilon(1e-12));

  // Synthetic deep-depth values from the closed form at small x. The
  // boundary term contributes 2x/eta, so the plateau needs x below about
  // 1e-3 for a 2%-spread window and a half-percent eta recovery.
  const EtaFit fit2 = extract_eta({xeb_scaling({0.002, 3.0}), xeb_scaling({0.001, 3.0})});
  CHECK(fit2.eta_hat == doctest::Approx(3.0).epsilon(0.005));

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> jitter(-1e-4, 1e-4);
  const EtaFit fit3 = extract_eta({std::exp(-2.0) + jitter(rng), std::exp(-2.0) + jitter(rng),
                                   std::exp(-2.0) + jitter(rng)});
  CHECK(fit3.eta_hat == doctest::Approx(2.0).epsilon(0.01));

  CHECK_THROWS_AS(extract_eta({0.5}), std::invalid_argument);
  CHECK_THROWS_AS(extract_eta({0.5, 0.4, 0.3}), std::runtime_error);
}

TEST_CASE("xeb inversion") {
  const XInversion floor = invert_xeb_for_x(std::exp(-2.0), 2.0);
  CHECK(floor.x == 0.0);
  CHECK(floor.clamped_at_floor);

  const double target = xeb_scaling({1.3, 2.0});
  const XInversion inv = invert_xeb_for_x(target, 2.0);
  CHECK_FALSE(inv.clamped_at_floor);
  CHECK(inv.x == doctest::Approx(1.3).epsilon(1e-6));

  const XInversion noisy = invert_xeb_for_x(target + 1e-4, 2.0);
  CHECK(noisy.x == doctest::Approx(1.3).epsilon(0.01));

  CHECK_THROWS_AS(invert_xeb_for_x(1e30, 2.0), std::invalid_argument);
}

TEST_CASE("tau fit on synthetic collapse data") {
  const double tau0 = 1.7, c0 = 0.9;
  std::vector<TauFitPoint> pts;
  for (int n : {12, 16, 20})
    for (int t = 1; t <= 20; ++t)
      pts.push_back({n, static_cast<double>(t), c0 * n * std::exp(-t / tau0)});
  const FitResult fit = fit_tau(pts);
  CHECK(fit.tau_hat == doctest::Approx(tau0).epsilon(1e-10));
  CHECK(fit.n0_hat == doctest::Approx(1.0 / c0).epsilon(1e-10));
  CHECK(fit.residual_rms < 1e-12);

  std::mt19937_64 rng(23);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<TauFitPoint> noisy = pts;
  for (auto& p : noisy) p.x_hat *= std::exp(noise(rng));
  const FitResult fit2 = fit_tau(noisy);
  CHECK(fit2.tau_hat == doctest::Approx(tau0).epsilon(0.01));

  std::vector<TauFitPoint> degenerate;
  for (int t = 1; t <= 5; ++t)
    degenerate.push_back({12, static_cast<double>(t), 12.0 * std::exp(-t / tau0)});
  CHECK_THROWS_AS(fit_tau(degenerate), std::invalid_argument);
}

TEST_CASE("collapse residual distinguishes collapsed from scattered curves") {
  std::vector<CollapsePoint> good, bad;
  for (int n : {12, 16, 20})
    for (int t = 1; t <= 20; ++t) {
      const double x = n * std::exp(-t / 1.7);
      const double delta = delta_log_xeb({x, 2.0});
      good.push_back({n, x, delta});
      bad.push_back({n, x, delta * (1.0 + 0.1 * (n - 16))});
    }
  CHECK(collapse_residual(good) < 1e-3);
  CHECK(collapse_residual(bad) > 0.01);
}

TEST_CASE("local slopes of the closed-form deviation") {
  // Frozen against direct evaluation of the closed form: at eta = 6 the
  // log-log slope rises from ~1 at small x to a maximum near 1.3 around
  // x ~ 2.5 and relaxes back towards 1 at large x; the quadratic exponent
  // is only reached asymptotically in eta.
  std::vector<std::pair<double, double>> curve;
  for (double lx = std::log(0.05); lx < std::log(40.0); lx += 0.02) {
    const double x = std::exp(lx);
    curve.emplace_back(x, delta_log_xeb({x, 6.0}));
  }
  const WindowSlope deep = window_slope(curve, 0.2, 0.45);
  CHECK(deep.slope == doctest::Approx(1.08).epsilon(0.03));
  const WindowSlope mid = window_slope(curve, 1.33, 3.0);
  CHECK(mid.slope == doctest::Approx(1.30).epsilon(0.04));
  const WindowSlope shallow = window_slope(curve, 13.0, 30.0);
  CHECK(shallow.slope == doctest::Approx(1.10).epsilon(0.03));

  // eta = 0: delta equals x exactly, slope 1 on any window.
  std::vector<std::pair<double, double>> clean;
  for (double lx = std::log(0.01); lx < std::log(0.2); lx += 0.05)
    clean.emplace_back(std::exp(lx), delta_log_xeb({std::exp(lx), 0.0}));
  const WindowSlope unit = window_slope(clean, 0.01, 0.2);
  CHECK(unit.slope == doctest::Approx(1.0).epsilon(1e-9));

  CHECK_THROWS_AS(window_slope(curve, 100.0, 200.0), std::invalid_argument);
}

TEST_CASE("regime report covers multiple windows") {
  std::vector<std::pair<double, double>> curve;
  for (double lx = std::log(0.05); lx < std::log(40.0); lx += 0.05) {
    const double x = std::exp(lx);
    curve.emplace_back(x, delta_log_xeb({x, 6.0}));
  }
  const auto report = regime_report(curve, {{0.2, 0.45}, {1.33, 3.0}, {13.0, 30.0}});
  REQUIRE(report.size() == 3);
  for (const auto& w : report) CHECK(w.n_points >= 5);
}

}  // TEST_SUITE
