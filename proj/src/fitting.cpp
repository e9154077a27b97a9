// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include "popkit/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>

#include "popkit/scaling.hpp"

namespace popkit {

EtaFit extract_eta(const std::vector<double>& deep_xeb_values) {
  if (deep_xeb_values.size() < 2)
    throw std::invalid_argument("extract_eta: need at least two deep-depth values");
  const std::size_t use = std::min<std::size_t>(3, deep_xeb_values.size());
  std::vector<double> tail(deep_xeb_values.end() - static_cast<std::ptrdiff_t>(use),
                           deep_xeb_values.end());
  double mean = 0.0, lo = tail[0], hi = tail[0];
  for (double v : tail) {
    mean += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  mean /= static_cast<double>(use);
  if (mean <= 0.0) throw std::runtime_error("extract_eta: plateau is not positive");
  EtaFit fit;
  fit.rel_spread = (hi - lo) / mean;
  if (fit.rel_spread >= 0.02)
    throw std::runtime_error("extract_eta: no plateau detected (relative spread >= 2%)");
  fit.plateau_mean = mean;
  fit.eta_hat = -std::log(mean);
  fit.n_points = static_cast<int>(use);
  return fit;
}

XInversion invert_xeb_for_x(double xeb_value, double eta, double x_max) {
  // Monotonicity of the closed form in x, asserted on a coarse grid.
  double prev = xeb_scaling({0.0, eta});
  for (int i = 1; i <= 32; ++i) {
    const double x = x_max * i / 32.0;
    const double cur = xeb_scaling({x, eta});
    if (cur <= prev) throw std::runtime_error("invert_xeb_for_x: xeb not increasing in x");
    prev = cur;
  }

  const double floor = xeb_scaling({0.0, eta});
  if (xeb_value <= floor + 1e-10 * (1.0 + std::abs(floor))) return {0.0, true};
  if (xeb_value > xeb_scaling({x_max, eta}))
    throw std::invalid_argument("invert_xeb_for_x: value above the x_max range");

  double lo = 0.0, hi = x_max;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (xeb_scaling({mid, eta}) < xeb_value)
      lo = mid;
    else
      hi = mid;
  }
  return {0.5 * (lo + hi), false};
}

FitResult fit_tau(const std::vector<TauFitPoint>& points) {
  std::set<double> depths;
  std::set<int> sizes;
  std::size_t usable = 0;
  for (const auto& p : points) {
    if (p.x_hat > 0.0) {
      depths.insert(p.t);
      sizes.insert(p.n_sites);
      ++usable;
    }
  }
  if (depths.size() < 3 || sizes.size() < 2)
    throw std::invalid_argument("fit_tau: need >= 3 depths and >= 2 sizes with x_hat > 0");

  Eigen::MatrixXd a(static_cast<Eigen::Index>(usable), 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(usable));
  Eigen::Index row = 0;
  for (const auto& p : points) {
    if (p.x_hat <= 0.0) continue;
    a(row, 0) = -p.t;
    a(row, 1) = 1.0;
    y(row) = std::log(p.x_hat) - std::log(static_cast<double>(p.n_sites));
    ++row;
  }
  const Eigen::VectorXd beta = a.colPivHouseholderQr().solve(y);
  if (!(beta(0) > 0.0)) throw std::runtime_error("fit_tau: non-positive rate (tau undefined)");

  FitResult out;
  out.tau_hat = 1.0 / beta(0);
  out.log_c = beta(1);
  out.n0_hat = std::exp(-beta(1));
  out.residual_rms = std::sqrt((a * beta - y).squaredNorm() / static_cast<double>(usable));
  return out;
}

double collapse_residual(const std::vector<CollapsePoint>& points, int grid_points) {
  if (grid_points < 2) throw std::invalid_argument("collapse_residual: bad grid");
  // One curve per size, interpolated in (log x, log delta) onto a common
  // grid spanning the overlap of all x ranges; the spread is measured in
  // delta units. Non-positive deltas (plateau jitter) are dropped.
  std::map<int, std::vector<std::pair<double, double>>> curves;
  for (const auto& p : points)
    if (p.x > 0.0 && p.delta > 0.0) curves[p.n_sites].emplace_back(std::log(p.x), std::log(p.delta));
  if (curves.size() < 2) throw std::invalid_argument("collapse_residual: need >= 2 sizes");

  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (auto& [n, c] : curves) {
    std::sort(c.begin(), c.end());
    lo = std::max(lo, c.front().first);
    hi = std::min(hi, c.back().first);
  }
  if (!(hi > lo)) throw std::runtime_error("collapse_residual: curves do not overlap in x");

  const auto interp = [](const std::vector<std::pair<double, double>>& c, double lx) {
    auto it = std::lower_bound(c.begin(), c.end(), std::make_pair(lx, -1e300));
    if (it == c.begin()) return c.front().second;
    if (it == c.end()) return c.back().second;
    const auto& [x1, y1] = *it;
    const auto& [x0, y0] = *(it - 1);
    const double t = x1 > x0 ? (lx - x0) / (x1 - x0) : 0.0;
    return y0 + t * (y1 - y0);
  };

  double acc = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    const double lx = lo + (hi - lo) * i / (grid_points - 1);
    double mean = 0.0;
    for (const auto& [n, c] : curves) mean += std::exp(interp(c, lx));
    mean /= static_cast<double>(curves.size());
    double var = 0.0;
    for (const auto& [n, c] : curves) {
      const double d = std::exp(interp(c, lx)) - mean;
      var += d * d;
    }
    acc += var / static_cast<double>(curves.size());
  }
  return std::sqrt(acc / grid_points);
}

WindowSlope window_slope(const std::vector<std::pair<double, double>>& curve, double x_lo,
                         double x_hi) {
  std::vector<double> lx, ly;
  for (const auto& [x, delta] : curve) {
    if (x >= x_lo && x <= x_hi && delta > 0.0 && x > 0.0) {
      lx.push_back(std::log(x));
      ly.push_back(std::log(delta));
    }
  }
  const auto n = static_cast<int>(lx.size());
  if (n < 5) throw std::invalid_argument("window_slope: fewer than 5 points in window");

  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += lx[static_cast<std::size_t>(i)];
    my += ly[static_cast<std::size_t>(i)];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dx = lx[static_cast<std::size_t>(i)] - mx;
    sxx += dx * dx;
    sxy += dx * (ly[static_cast<std::size_t>(i)] - my);
  }
  if (sxx <= 0.0) throw std::runtime_error("window_slope: degenerate x values");

  WindowSlope out;
  out.x_lo = x_lo;
  out.x_hi = x_hi;
  out.n_points = n;
  out.slope = sxy / sxx;
  double ss_res = 0.0;
  for (int i = 0; i < n; ++i) {
    const double pred = my + out.slope * (lx[static_cast<std::size_t>(i)] - mx);
    const double r = ly[static_cast<std::size_t>(i)] - pred;
    ss_res += r * r;
  }
  out.std_err = n > 2 ? std::sqrt(ss_res / ((n - 2) * sxx)) : 0.0;
  return out;
}

std::vector<WindowSlope> regime_report(const std::vector<std::pair<double, double>>& curve,
                                       const std::vector<std::pair<double, double>>& windows) {
  std::vector<WindowSlope> out;
  out.reserve(windows.size());
  for (const auto& [lo, hi] : windows) out.push_back(window_slope(curve, lo, hi));
  return out;
}

}  // namespace popkit
