// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include "popkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace popkit {

MeanErr mean_std_err(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("mean_std_err: empty input");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= std::max(1.0, n - 1.0);
  return {mean, std::sqrt(var / n)};
}

MeanErr jackknife_grouped_mean(const std::vector<double>& group_sums,
                               const std::vector<std::int64_t>& group_counts) {
  if (group_sums.empty() || group_sums.size() != group_counts.size())
    throw std::invalid_argument("jackknife_grouped_mean: bad input");
  const std::size_t g = group_sums.size();
  double total = 0.0;
  std::int64_t n = 0;
  for (std::size_t i = 0; i < g; ++i) {
    total += group_sums[i];
    n += group_counts[i];
  }
  const double full = total / static_cast<double>(n);
  if (g == 1) return {full, 0.0};

  std::vector<double> loo(g);
  double loo_mean = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    loo[i] = (total - group_sums[i]) / static_cast<double>(n - group_counts[i]);
    loo_mean += loo[i];
  }
  loo_mean /= static_cast<double>(g);
  double var = 0.0;
  for (std::size_t i = 0; i < g; ++i) var += (loo[i] - loo_mean) * (loo[i] - loo_mean);
  var *= static_cast<double>(g - 1) / static_cast<double>(g);
  return {full, std::sqrt(var)};
}

double ks_statistic(const std::vector<double>& sorted_samples,
                    const std::function<double(double)>& cdf) {
  const std::size_t n = sorted_samples.size();
  if (n == 0) throw std::invalid_argument("ks_statistic: empty sample");
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(sorted_samples[i]);
    const double lo = static_cast<double>(i) / static_cast<double>(n);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    d = std::max(d, std::max(std::abs(f - lo), std::abs(f - hi)));
  }
  return d;
}

double ks_critical(double alpha, std::size_t n) {
  double c;
  if (alpha == 0.01) {
    c = 1.62762;
  } else if (alpha == 0.05) {
    c = 1.35810;
  } else {
    throw std::invalid_argument("ks_critical: unsupported alpha");
  }
  return c / std::sqrt(static_cast<double>(n));
}

Histogram log_histogram(const std::vector<double>& values, double lo, double hi, int bins) {
  if (!(lo > 0.0) || hi <= lo || bins < 1)
    throw std::invalid_argument("log_histogram: bad binning");
  Histogram h;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  const double step = std::log(hi / lo) / bins;
  for (int i = 0; i <= bins; ++i)
    h.edges[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    ++h.total;
    if (v < lo) {
      ++h.underflow;
    } else if (v >= hi) {
      ++h.overflow;
    } else {
      int b = static_cast<int>(std::log(v / lo) / step);
      b = std::clamp(b, 0, bins - 1);
      ++h.counts[static_cast<std::size_t>(b)];
    }
  }
  return h;
}

std::string Histogram::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\"edges\":[";
  for (std::size_t i = 0; i < edges.size(); ++i) os << (i ? "," : "") << edges[i];
  os << "],\"counts\":[";
  for (std::size_t i = 0; i < counts.size(); ++i) os << (i ? "," : "") << counts[i];
  os << "],\"underflow\":" << underflow << ",\"overflow\":" << overflow
     << ",\"total\":" << total << "}";
  return os.str();
}

}  // namespace popkit
