// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include "popkit/scaling.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace popkit {

namespace {

double binomial(int n, int r) {
  double v = 1.0;
  for (int i = 0; i < r; ++i) v = v * (n - i) / (i + 1);
  return v;
}

struct StructPair {
  ReplicaMatrix a;
  ReplicaMatrix p;
};

const StructPair& structure_cached(int k) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<StructPair>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[k];
  if (!slot) {
    const PermutationTable& table = PermutationTable::cached(k);
    slot = std::make_unique<StructPair>(
        StructPair{transposition_adjacency(table), fixed_point_matrix(table)});
  }
  return *slot;
}

}  // namespace

Regime classify_regime(const ScalingPoint& p) {
  if (p.x > 3.0 * p.eta) return Regime::short_depth;
  if (p.x < std::min(1.0, p.eta / 3.0)) return Regime::deep;
  return Regime::intermediate;
}

const ReplicaMatrix& adjacency_cached(int k) { return structure_cached(k).a; }
const ReplicaMatrix& field_cached(int k) { return structure_cached(k).p; }

double rescaled_moment(int k, const ScalingPoint& p) {
  if (k < 1 || k > kMaxReplicaDegree)
    throw std::invalid_argument("rescaled_moment: k must be in [1, 7]");
  if (k == 1) return 1.0;
  const StructPair& s = structure_cached(k);
  const ReplicaMatrix gen = p.x * s.a - p.eta * s.p;
  // The generator is symmetric (A symmetric, P diagonal), so the dense
  // exponential reduces to a spectral sum over (1|v_i)^2 e^{lambda_i}.
  Eigen::SelfAdjointEigenSolver<ReplicaMatrix> es(gen);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("rescaled_moment: eigensolver failed");
  const Eigen::VectorXd overlaps = es.eigenvectors().transpose() * Eigen::VectorXd::Ones(gen.rows());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < overlaps.size(); ++i)
    acc += overlaps(i) * overlaps(i) * std::exp(es.eigenvalues()(i));
  return acc;
}

double xeb_scaling(const ScalingPoint& p) {
  const double theta = std::hypot(p.x, p.eta / 2.0);
  double bracket;
  if (theta < 1e-12) {
    bracket = 1.0 + p.x;  // cosh -> 1, sinh(t)/t -> 1
  } else {
    bracket = std::cosh(theta) + p.x * std::sinh(theta) / theta;
  }
  return 2.0 * std::exp(-p.eta / 2.0) * bracket - 1.0;
}

double delta_log_xeb(const ScalingPoint& p) {
  return std::log1p(xeb_scaling(p)) - std::log1p(std::exp(-p.eta));
}

double asymptotic_moment_short_depth(int k, const ScalingPoint& p) {
  if (k < 1 || k > kMaxReplicaDegree)
    throw std::invalid_argument("asymptotic_moment_short_depth: k must be in [1, 7]");
  const double kk = 0.5 * k * (k - 1);
  return static_cast<double>(factorial(k)) * std::exp(p.x * kk - p.eta * (k - 1));
}

double asymptotic_moment_deep(int k, const ScalingPoint& p) {
  if (k < 1 || k > kMaxReplicaDegree)
    throw std::invalid_argument("asymptotic_moment_deep: k must be in [1, 7]");
  if (p.eta <= 0.0)
    throw std::domain_error("asymptotic_moment_deep: requires eta > 0");
  const double kk = static_cast<double>(k) * (k - 1);
  return std::exp(p.x * p.x * kk / (4.0 * p.eta)) * (1.0 + p.x * kk / (2.0 * p.eta));
}

double global_depolarizing_moment(int k, double eps_glob) {
  if (k < 1 || k > kMaxReplicaDegree)
    throw std::invalid_argument("global_depolarizing_moment: k must be in [1, 7]");
  if (eps_glob < 0.0 || eps_glob > 1.0)
    throw std::invalid_argument("global_depolarizing_moment: eps must be in [0, 1]");
  const ReplicaMatrix& p = field_cached(k);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    acc += std::pow(1.0 - eps_glob, p(i, i));
  return acc;
}

double spt_moment(int k, double eps) {
  double acc = 0.0;
  for (int j = 0; j <= k; ++j)
    acc += binomial(k, j) * std::pow(eps, j) * std::pow(1.0 - eps, k - j) *
           static_cast<double>(factorial(k - j));
  return acc;
}

double pt_pdf(double w) { return w < 0.0 ? 0.0 : std::exp(-w); }

double spt_pdf(double w, double eps) {
  if (eps < 0.0 || eps >= 1.0)
    throw std::invalid_argument("spt_pdf: eps must be in [0, 1)");
  if (w < eps) return 0.0;
  return std::exp(-(w - eps) / (1.0 - eps)) / (1.0 - eps);
}

double lognormal_pt_pdf(double w, double x) {
  if (w < 0.0) return 0.0;
  if (x < 0.0) throw std::invalid_argument("lognormal_pt_pdf: x must be >= 0");
  if (x < 1e-14) return pt_pdf(w);
  const double mu = -x / 2.0;
  const double sigma = std::sqrt(x);
  // P(w) = int dy phi((y-mu)/sigma)/sigma * e^{-y} exp(-w e^{-y}).
  const int n = 4097;
  const double span = 12.0;
  const double lo = mu - span * sigma, hi = mu + span * sigma;
  const double h = (hi - lo) / (n - 1);
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = lo + h * i;
    const double z = (y - mu) / sigma;
    const double f = norm * std::exp(-0.5 * z * z - y - w * std::exp(-y));
    acc += (i == 0 || i == n - 1) ? 0.5 * f : f;
  }
  return acc * h;
}

DensityCurve lognormal_pt_curve(double x, double w_min, double w_max, int n) {
  if (n < 2 || w_min <= 0.0 || w_max <= w_min)
    throw std::invalid_argument("lognormal_pt_curve: bad grid");
  DensityCurve c;
  c.w.resize(static_cast<std::size_t>(n));
  c.pdf.resize(static_cast<std::size_t>(n));
  const double step = std::log(w_max / w_min) / (n - 1);
  for (int i = 0; i < n; ++i) {
    c.w[static_cast<std::size_t>(i)] = w_min * std::exp(step * i);
    c.pdf[static_cast<std::size_t>(i)] = lognormal_pt_pdf(c.w[static_cast<std::size_t>(i)], x);
  }
  // Renormalize to unit mass on the grid (trapezoid in w).
  double mass = 0.0;
  for (int i = 0; i + 1 < n; ++i)
    mass += 0.5 * (c.pdf[static_cast<std::size_t>(i)] + c.pdf[static_cast<std::size_t>(i + 1)]) *
            (c.w[static_cast<std::size_t>(i + 1)] - c.w[static_cast<std::size_t>(i)]);
  for (auto& v : c.pdf) v /= mass;
  return c;
}

}  // namespace popkit
