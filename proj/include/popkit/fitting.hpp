// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#ifndef POPKIT_FITTING_HPP
#define POPKIT_FITTING_HPP

#include <utility>
#include <vector>

namespace popkit {

struct EtaFit {
  double eta_hat = 0.0;
  double plateau_mean = 0.0;
  double rel_spread = 0.0;
  int n_points = 0;
};

/// Noise scale from the deep-depth XEB plateau: eta = -log(plateau mean).
/// Uses the last three values (all, if fewer are given) and requires their
/// relative spread to stay below 2%.
EtaFit extract_eta(const std::vector<double>& deep_xeb_values);

struct XInversion {
  double x = 0.0;
  bool clamped_at_floor = false;
};

/// Solves xeb_scaling({x, eta}) = value for x by bracketed bisection to
/// |dx| < 1e-8. Monotonicity in x is asserted on a coarse grid first.
/// Values below the x=0 floor e^{-eta} clamp to x = 0 with a flag; values
/// above xeb_scaling(x_max, eta) throw.
XInversion invert_xeb_for_x(double xeb_value, double eta, double x_max = 50.0);

struct TauFitPoint {
  int n_sites = 0;
  double t = 0.0;
  double x_hat = 0.0;
};

struct FitResult {
  double eta_hat = 0.0;
  double tau_hat = 0.0;
  double n0_hat = 0.0;
  double log_c = 0.0;
  double residual_rms = 0.0;
};

/// Least squares of log x = log N - t/tau + log c over the table.
/// Needs >= 3 distinct depths and >= 2 distinct sizes.
FitResult fit_tau(const std::vector<TauFitPoint>& points);

/// (x, delta) curves keyed by size, for the collapse residual.
struct CollapsePoint {
  int n_sites = 0;
  double x = 0.0;
  double delta = 0.0;
};

/// RMS spread of delta across sizes at matched x: each per-size curve is
/// interpolated in log x onto a common grid over the overlap region and
/// the root-mean-square cross-size deviation is returned.
double collapse_residual(const std::vector<CollapsePoint>& points, int grid_points = 48);

struct WindowSlope {
  double x_lo = 0.0;
  double x_hi = 0.0;
  double slope = 0.0;
  double std_err = 0.0;
  int n_points = 0;
};

/// Local slope of log(delta) versus log(x) inside [x_lo, x_hi].
/// Requires at least 5 points with positive delta in the window.
WindowSlope window_slope(const std::vector<std::pair<double, double>>& curve, double x_lo,
                         double x_hi);

/// Slopes over a list of windows.
std::vector<WindowSlope> regime_report(const std::vector<std::pair<double, double>>& curve,
                                       const std::vector<std::pair<double, double>>& windows);

}  // namespace popkit

#endif
