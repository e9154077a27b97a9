// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include "popkit/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "popkit/parallel.hpp"

namespace popkit {

namespace {

std::atomic<int> g_default_threads{0};

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

void set_default_threads(int n) { g_default_threads.store(n); }

int default_threads() {
  const int n = g_default_threads.load();
  if (n > 0) return n;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::mt19937_64 RandomStream::make_engine() const {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ id);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

RandomStream RandomStream::substream(std::uint64_t task) const {
  return {seed, splitmix64(id ^ splitmix64(task + 1))};
}

Eigen::MatrixXcd sample_haar_isometry(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXcd g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) g(i, j) = std::complex<double>(normal(rng), normal(rng));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, cols);
  // Fold the R-diagonal phases back in so Q is Haar, not just orthonormal.
  for (int j = 0; j < cols; ++j) {
    const std::complex<double> r = qr.matrixQR()(j, j);
    const double a = std::abs(r);
    if (a > 0.0) q.col(j) *= r / a;
  }
  return q;
}

Eigen::MatrixXcd sample_haar_unitary(int dim, std::mt19937_64& rng) {
  return sample_haar_isometry(dim, dim, rng);
}

Eigen::VectorXcd sample_haar_state(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXcd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = std::complex<double>(normal(rng), normal(rng));
  return v / v.norm();
}

namespace {

std::string digits_to_string(const std::vector<int>& digits) {
  std::string s;
  s.reserve(digits.size());
  for (int v : digits) s.push_back(static_cast<char>('0' + v));
  return s;
}

std::vector<int> random_digits(int n, int d, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dist(0, d - 1);
  std::vector<int> out(static_cast<std::size_t>(n));
  for (auto& v : out) v = dist(rng);
  return out;
}

// -----------------------------------------------------------------------
// Physical variant: w = D <psi| prod_i rho_{x_i} |psi>, evaluated exactly
// by a left-to-right bond contraction of the staircase MPS.
// -----------------------------------------------------------------------

using Isometries = std::vector<Eigen::MatrixXcd>;  // (d chi) x chi per gate

Isometries sample_staircase(const RmpsSpec& spec, std::mt19937_64& rng) {
  Isometries v;
  const int chi = static_cast<int>(spec.chi());
  v.reserve(static_cast<std::size_t>(spec.n_gates()));
  for (int g = 0; g < spec.n_gates(); ++g)
    v.push_back(sample_haar_isometry(spec.d * chi, chi, rng));
  return v;
}

double physical_overlap(const RmpsSpec& spec, const Isometries& gates,
                        const std::vector<int>& digits,
                        const std::vector<Eigen::MatrixXcd>& rho) {
  const int chi = static_cast<int>(spec.chi());
  const int d = spec.d;
  const int g_count = spec.n_gates();

  // L(beta, beta') carries the emitted-site contractions with the bra/ket
  // bond pair open.
  Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(chi, chi);
  {
    const Eigen::MatrixXcd& v0 = gates[0];
    const Eigen::MatrixXcd& r = rho[static_cast<std::size_t>(digits[0])];
    for (int s = 0; s < d; ++s)
      for (int sp = 0; sp < d; ++sp) {
        if (r(s, sp) == std::complex<double>(0.0, 0.0)) continue;
        l.noalias() += r(s, sp) * (v0.block(s * chi, 0, chi, 1).conjugate() *
                                   v0.block(sp * chi, 0, chi, 1).transpose());
      }
  }
  for (int g = 1; g < g_count - 1; ++g) {
    const Eigen::MatrixXcd& v = gates[static_cast<std::size_t>(g)];
    const Eigen::MatrixXcd& r = rho[static_cast<std::size_t>(digits[static_cast<std::size_t>(g)])];
    Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(chi, chi);
    for (int s = 0; s < d; ++s) {
      const Eigen::MatrixXcd left = v.block(s * chi, 0, chi, chi).conjugate() * l;
      for (int sp = 0; sp < d; ++sp) {
        if (r(s, sp) == std::complex<double>(0.0, 0.0)) continue;
        next.noalias() += r(s, sp) * (left * v.block(sp * chi, 0, chi, chi).transpose());
      }
    }
    l = next;
  }

  // Last gate: its physical site contracts with rho as usual and the final
  // bond contracts with the tensor product of the last r rho matrices.
  Eigen::MatrixXcd bond = Eigen::MatrixXcd::Identity(1, 1);
  for (int j = 0; j < spec.r; ++j) {
    const Eigen::MatrixXcd& rj =
        rho[static_cast<std::size_t>(digits[static_cast<std::size_t>(g_count + j)])];
    Eigen::MatrixXcd next(bond.rows() * d, bond.cols() * d);
    for (Eigen::Index i = 0; i < bond.rows(); ++i)
      for (Eigen::Index jj = 0; jj < bond.cols(); ++jj)
        next.block(i * d, jj * d, d, d) = bond(i, jj) * rj;
    bond = next;
  }

  const Eigen::MatrixXcd& v = gates[static_cast<std::size_t>(g_count - 1)];
  const Eigen::MatrixXcd& r =
      rho[static_cast<std::size_t>(digits[static_cast<std::size_t>(g_count - 1)])];
  std::complex<double> acc = 0.0;
  for (int s = 0; s < d; ++s) {
    const Eigen::MatrixXcd left = v.block(s * chi, 0, chi, chi).conjugate() * l;
    for (int sp = 0; sp < d; ++sp) {
      if (r(s, sp) == std::complex<double>(0.0, 0.0)) continue;
      acc += r(s, sp) * (left * v.block(sp * chi, 0, chi, chi).transpose())
                            .cwiseProduct(bond)
                            .sum();
    }
  }
  const double w = std::pow(static_cast<double>(d), spec.n_sites) * acc.real();
  return w;
}

// -----------------------------------------------------------------------
// Ladder variant: exact sum over reset patterns up to m_max errors.
//
// Per gate the channel is (1-eps) id + eps (reset block to 1/Q). A reset
// closes the open amplitude segment with its squared norm and restarts
// from the maximally mixed block, realized without bias by a Gaussian
// probe z with E[z z^dag] = 1. Segments between resets never interact, so
// one probe column per reset position, propagated alongside the pure
// amplitude, carries the entire pattern sum via a scalar recursion in the
// number of errors.
// -----------------------------------------------------------------------

double binomial_tail_above(int n, double p, int m_max) {
  if (m_max >= n) return 0.0;
  double pmf = std::pow(1.0 - p, n);  // m = 0
  double cdf = pmf;
  for (int m = 1; m <= m_max; ++m) {
    pmf *= p / (1.0 - p) * static_cast<double>(n - m + 1) / static_cast<double>(m);
    cdf += pmf;
  }
  return std::max(0.0, 1.0 - cdf);
}

struct LadderCircuit {
  Isometries gates;                       // double precision, (d chi) x chi
  std::vector<Eigen::MatrixXcf> gates_f;  // float copy for the probe block
};

LadderCircuit sample_ladder_circuit(const RmpsSpec& spec, std::mt19937_64& rng) {
  LadderCircuit c;
  c.gates = sample_staircase(spec, rng);
  c.gates_f.reserve(c.gates.size());
  for (const auto& g : c.gates) c.gates_f.push_back(g.cast<std::complex<float>>());
  return c;
}

int final_bond_index(const RmpsSpec& spec, const std::vector<int>& digits) {
  int beta_star = 0;
  for (int j = 0; j < spec.r; ++j)
    beta_star = beta_star * spec.d + digits[static_cast<std::size_t>(spec.n_gates() + j)];
  return beta_star;
}

double ladder_overlap(const RmpsSpec& spec, const LadderCircuit& circuit,
                      const std::vector<int>& digits, int m_max, std::mt19937_64& rng) {
  const int chi = static_cast<int>(spec.chi());
  const int g_count = spec.n_gates();
  const int q = spec.gate_dim();
  const double eps = spec.ladder_epsilon;
  const double big_d = std::pow(static_cast<double>(spec.d), spec.n_sites);
  const int beta_star = final_bond_index(spec, digits);

  const bool with_noise = eps > 0.0 && m_max >= 1;
  std::normal_distribution<double> normal;

  const auto block = [&](int g) {
    return circuit.gates[static_cast<std::size_t>(g)].block(
        static_cast<Eigen::Index>(digits[static_cast<std::size_t>(g)]) * chi, 0, chi, chi);
  };

  // Backward sweep: rows[j] = beta_star row of A_{G-1} ... A_{j+1}. The
  // expected final factor of a probe restarted at j is then exactly
  // ||rows[j]||^2 / Q, which removes the large single-component variance
  // the stochastic amplitude would carry.
  std::vector<Eigen::VectorXcd> rows;
  if (with_noise) {
    rows.assign(static_cast<std::size_t>(g_count), Eigen::VectorXcd());
    Eigen::VectorXcd r = Eigen::VectorXcd::Zero(chi);
    r(beta_star) = 1.0;
    rows[static_cast<std::size_t>(g_count - 1)] = r;
    for (int g = g_count - 1; g >= 1; --g) {
      r = (block(g).transpose() * r).eval();
      rows[static_cast<std::size_t>(g - 1)] = r;
    }
  }

  Eigen::VectorXcd u;  // pure branch
  Eigen::MatrixXcf probes(chi, with_noise && m_max >= 2 ? std::max(0, g_count - 1) : 0);
  Eigen::MatrixXcf probes_tmp(probes.rows(), probes.cols());
  int n_cols = 0;
  // flux[j][m-1]: weight (eps powers included) of patterns with m errors
  // whose last reset sits at gate j.
  std::vector<std::vector<double>> flux;
  std::vector<double> closure_new(static_cast<std::size_t>(std::max(1, m_max)), 0.0);
  double w = 0.0;

  for (int g = 0; g < g_count; ++g) {
    const auto x_g = static_cast<std::size_t>(digits[static_cast<std::size_t>(g)]);

    if (with_noise) {
      // Closures: norm of each open branch just before this gate.
      const double c_pure = g == 0 ? 1.0 : u.squaredNorm();
      std::fill(closure_new.begin(), closure_new.end(), 0.0);
      closure_new[0] = eps * c_pure;
      for (int j = 0; j < n_cols; ++j) {
        const double c_j = static_cast<double>(probes.col(j).squaredNorm());
        for (int m = 2; m <= m_max; ++m)
          closure_new[static_cast<std::size_t>(m - 1)] +=
              eps * flux[static_cast<std::size_t>(j)][static_cast<std::size_t>(m - 2)] * c_j;
      }
      // Branches whose last reset sits at this gate: the rest of the
      // circuit runs reset-free, so the final factor is exact.
      if (g < g_count) {
        const double fin = g == g_count - 1
                               ? 1.0 / q
                               : rows[static_cast<std::size_t>(g)].squaredNorm() / q;
        for (int m = 1; m <= m_max; ++m)
          w += closure_new[static_cast<std::size_t>(m - 1)] *
               std::pow(1.0 - eps, g_count - m) * fin;
      }
    }

    const Eigen::MatrixXcd& v = circuit.gates[static_cast<std::size_t>(g)];
    if (g < g_count - 1) {
      if (g == 0)
        u = v.block(static_cast<Eigen::Index>(x_g) * chi, 0, chi, 1);
      else
        u = (block(g) * u).eval();
      if (with_noise && m_max >= 2) {
        if (n_cols > 0) {
          const auto& vf = circuit.gates_f[static_cast<std::size_t>(g)];
          probes_tmp.leftCols(n_cols).noalias() =
              vf.block(static_cast<Eigen::Index>(x_g) * chi, 0, chi, chi) *
              probes.leftCols(n_cols);
          probes.swap(probes_tmp);
        }
        // New probe column for resets at this gate: the projected uniform
        // block state, realized as a Gaussian with E[z z^dag] = 1/Q.
        const double scale = 1.0 / std::sqrt(2.0 * q);
        for (int i = 0; i < chi; ++i)
          probes(i, n_cols) = std::complex<float>(static_cast<float>(normal(rng) * scale),
                                                  static_cast<float>(normal(rng) * scale));
        flux.push_back(closure_new);
        ++n_cols;
      }
    } else {
      // Final gate, pure branch: project the output onto (x_g, beta_star).
      const Eigen::Index row = static_cast<Eigen::Index>(x_g) * chi + beta_star;
      const std::complex<double> amp_pure = (v.row(row).head(chi) * u)(0, 0);
      w += std::pow(1.0 - eps, g_count) * std::norm(amp_pure);
    }
  }
  return big_d * w;
}

// Exact mixed-state ladder evolution: rho' = (1-eps) A rho A^dag +
// (eps/Q) tr(rho) 1. Every reset order is summed; viable for modest chi.
double ladder_overlap_exact(const RmpsSpec& spec, const LadderCircuit& circuit,
                            const std::vector<int>& digits) {
  const int chi = static_cast<int>(spec.chi());
  const int g_count = spec.n_gates();
  const int q = spec.gate_dim();
  const double eps = spec.ladder_epsilon;
  const double big_d = std::pow(static_cast<double>(spec.d), spec.n_sites);
  const int beta_star = final_bond_index(spec, digits);

  const auto block = [&](int g) {
    return circuit.gates[static_cast<std::size_t>(g)].block(
        static_cast<Eigen::Index>(digits[static_cast<std::size_t>(g)]) * chi, 0, chi, chi);
  };

  Eigen::MatrixXcd rho;
  {
    const Eigen::VectorXcd u0 = circuit.gates[0].block(
        static_cast<Eigen::Index>(digits[0]) * chi, 0, chi, 1);
    rho = (1.0 - eps) * (u0 * u0.adjoint());
    rho += (eps / q) * Eigen::MatrixXcd::Identity(chi, chi);
  }
  for (int g = 1; g < g_count - 1; ++g) {
    const Eigen::MatrixXcd a = block(g);
    const double tr = rho.trace().real();
    rho = (1.0 - eps) * (a * rho * a.adjoint());
    rho += (eps / q) * tr * Eigen::MatrixXcd::Identity(chi, chi);
  }
  const int g = g_count - 1;
  const Eigen::Index row_idx =
      static_cast<Eigen::Index>(digits[static_cast<std::size_t>(g)]) * chi + beta_star;
  const Eigen::RowVectorXcd row = circuit.gates[static_cast<std::size_t>(g)].row(row_idx).head(chi);
  const double p = (1.0 - eps) * (row * rho * row.adjoint())(0, 0).real() +
                   (eps / q) * rho.trace().real();
  return big_d * p;
}

}  // namespace

RmpsSampleResult sample_rmps_overlaps(const RmpsSpec& spec, int n_circuits,
                                      int n_bits_per_circuit, const RandomStream& stream,
                                      const LadderSampleOptions& options) {
  spec.validate();
  if (n_circuits < 1 || n_bits_per_circuit < 1)
    throw std::invalid_argument("sample_rmps_overlaps: need positive sample counts");

  RmpsSampleResult result;
  const auto total = static_cast<std::size_t>(n_circuits) * static_cast<std::size_t>(n_bits_per_circuit);
  result.samples.resize(total);

  if (spec.variant == RmpsVariant::physical) {
    std::vector<Eigen::MatrixXcd> rho;
    rho.reserve(static_cast<std::size_t>(spec.d));
    for (int x = 0; x < spec.d; ++x) rho.push_back(projected_adjoint(spec.channel, x));
    parallel_for(static_cast<std::size_t>(n_circuits), [&](std::size_t c) {
      auto rng = stream.substream(c).make_engine();
      const Isometries gates = sample_staircase(spec, rng);
      for (int b = 0; b < n_bits_per_circuit; ++b) {
        const std::vector<int> digits = random_digits(spec.n_sites, spec.d, rng);
        OverlapSample& s = result.samples[c * static_cast<std::size_t>(n_bits_per_circuit) +
                                          static_cast<std::size_t>(b)];
        s.w = physical_overlap(spec, gates, digits, rho);
        s.circuit_id = static_cast<std::int64_t>(c);
        s.bitstring = digits_to_string(digits);
      }
    });
    return result;
  }

  const bool exact = options.method == LadderMethod::exact ||
                     (options.method == LadderMethod::automatic && spec.chi() <= 32);
  int m_max = options.m_max;
  if (exact) {
    m_max = spec.n_gates();
  } else if (options.auto_m_max) {
    while (m_max < spec.n_gates() &&
           binomial_tail_above(spec.n_gates(), spec.ladder_epsilon, m_max) > options.tail_target)
      ++m_max;
  }
  result.m_max_used = m_max;
  result.tail_bound =
      exact ? 0.0 : binomial_tail_above(spec.n_gates(), spec.ladder_epsilon, m_max);

  const int repeats = std::max(1, options.probe_repeats);
  std::vector<double> noise_acc(static_cast<std::size_t>(n_circuits), 0.0);
  parallel_for(static_cast<std::size_t>(n_circuits), [&](std::size_t c) {
    auto rng = stream.substream(c).make_engine();
    const LadderCircuit circuit = sample_ladder_circuit(spec, rng);
    for (int b = 0; b < n_bits_per_circuit; ++b) {
      const std::vector<int> digits = random_digits(spec.n_sites, spec.d, rng);
      OverlapSample& s = result.samples[c * static_cast<std::size_t>(n_bits_per_circuit) +
                                        static_cast<std::size_t>(b)];
      if (exact) {
        s.w = ladder_overlap_exact(spec, circuit, digits);
      } else if (repeats == 1) {
        s.w = ladder_overlap(spec, circuit, digits, m_max, rng);
      } else {
        double mean = 0.0, sq = 0.0;
        for (int rep = 0; rep < repeats; ++rep) {
          const double w = ladder_overlap(spec, circuit, digits, m_max, rng);
          mean += w;
          sq += w * w;
        }
        mean /= repeats;
        sq /= repeats;
        s.w = mean;
        if (mean > 0.0)
          noise_acc[c] += std::max(0.0, sq - mean * mean) / (mean * mean);
      }
      s.circuit_id = static_cast<std::int64_t>(c);
      s.bitstring = digits_to_string(digits);
    }
  });
  if (!exact && repeats > 1) {
    double acc = 0.0;
    for (double v : noise_acc) acc += v;
    result.probe_noise_rel = std::sqrt(acc / static_cast<double>(result.samples.size()));
  }
  return result;
}

// -----------------------------------------------------------------------
// Brickwall density-matrix oracle.
// -----------------------------------------------------------------------

namespace {

// In-place two-qudit gate on a statevector; sites are adjacent, site 0 is
// the most significant digit.
void apply_pair_gate(Eigen::VectorXcd& psi, const Eigen::MatrixXcd& u, int a, int n_sites, int d) {
  const std::size_t dim2 = static_cast<std::size_t>(d) * d;
  std::size_t stride = 1;
  for (int i = 0; i < n_sites - 2 - a; ++i) stride *= static_cast<std::size_t>(d);
  const std::size_t hi_count = static_cast<std::size_t>(psi.size()) / (stride * dim2);
  Eigen::VectorXcd block(static_cast<Eigen::Index>(dim2));
  for (std::size_t hi = 0; hi < hi_count; ++hi) {
    for (std::size_t lo = 0; lo < stride; ++lo) {
      const std::size_t base = hi * stride * dim2 + lo;
      for (std::size_t s = 0; s < dim2; ++s)
        block(static_cast<Eigen::Index>(s)) = psi(static_cast<Eigen::Index>(base + s * stride));
      block = (u * block).eval();
      for (std::size_t s = 0; s < dim2; ++s)
        psi(static_cast<Eigen::Index>(base + s * stride)) = block(static_cast<Eigen::Index>(s));
    }
  }
}

void apply_pair_gate_rho(Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& u, int a, int n_sites,
                         int d) {
  for (Eigen::Index col = 0; col < rho.cols(); ++col) {
    Eigen::VectorXcd v = rho.col(col);
    apply_pair_gate(v, u, a, n_sites, d);
    rho.col(col) = v;
  }
  rho.adjointInPlace();
  for (Eigen::Index col = 0; col < rho.cols(); ++col) {
    Eigen::VectorXcd v = rho.col(col);
    apply_pair_gate(v, u, a, n_sites, d);
    rho.col(col) = v;
  }
  rho.adjointInPlace();
}

// Single-site Kraus map on rho at `site`.
void apply_site_channel_rho(Eigen::MatrixXcd& rho, const KrausChannel& ch, int site, int n_sites) {
  const int d = ch.dim;
  std::size_t stride = 1;
  for (int i = 0; i < n_sites - 1 - site; ++i) stride *= static_cast<std::size_t>(d);
  const std::size_t dim = static_cast<std::size_t>(rho.rows());
  const std::size_t hi_count = dim / (stride * static_cast<std::size_t>(d));

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
  Eigen::MatrixXcd tmp(rho.rows(), rho.cols());
  for (const auto& k : ch.kraus) {
    tmp = rho;
    // tmp <- K rho K^dag via the vector kernel on columns then rows.
    for (Eigen::Index col = 0; col < tmp.cols(); ++col) {
      Eigen::VectorXcd v = tmp.col(col);
      Eigen::VectorXcd w = Eigen::VectorXcd::Zero(v.size());
      for (std::size_t hi = 0; hi < hi_count; ++hi)
        for (std::size_t lo = 0; lo < stride; ++lo) {
          const std::size_t base = hi * stride * d + lo;
          for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
              w(static_cast<Eigen::Index>(base + static_cast<std::size_t>(i) * stride)) +=
                  k(i, j) * v(static_cast<Eigen::Index>(base + static_cast<std::size_t>(j) * stride));
        }
      tmp.col(col) = w;
    }
    tmp.adjointInPlace();
    for (Eigen::Index col = 0; col < tmp.cols(); ++col) {
      Eigen::VectorXcd v = tmp.col(col);
      Eigen::VectorXcd w = Eigen::VectorXcd::Zero(v.size());
      for (std::size_t hi = 0; hi < hi_count; ++hi)
        for (std::size_t lo = 0; lo < stride; ++lo) {
          const std::size_t base = hi * stride * d + lo;
          for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
              w(static_cast<Eigen::Index>(base + static_cast<std::size_t>(i) * stride)) +=
                  k(i, j) * v(static_cast<Eigen::Index>(base + static_cast<std::size_t>(j) * stride));
        }
      tmp.col(col) = w;
    }
    tmp.adjointInPlace();
    out += tmp;
  }
  rho = out;
}

// Two-site Kraus map on an adjacent pair (a, a+1), via embedding each
// Kraus operator with the pair-gate kernel.
void apply_pair_channel_rho(Eigen::MatrixXcd& rho, const KrausChannel& ch, int a, int n_sites,
                            int d) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
  for (const auto& k : ch.kraus) {
    Eigen::MatrixXcd tmp = rho;
    for (Eigen::Index col = 0; col < tmp.cols(); ++col) {
      Eigen::VectorXcd v = tmp.col(col);
      apply_pair_gate(v, k, a, n_sites, d);
      tmp.col(col) = v;
    }
    tmp.adjointInPlace();
    for (Eigen::Index col = 0; col < tmp.cols(); ++col) {
      Eigen::VectorXcd v = tmp.col(col);
      apply_pair_gate(v, k, a, n_sites, d);
      tmp.col(col) = v;
    }
    tmp.adjointInPlace();
    out += tmp;
  }
  rho = out;
}

}  // namespace

BrickwallDists simulate_brickwall_exact(const BrickwallSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  std::size_t dim = 1;
  for (int i = 0; i < spec.n_sites; ++i) {
    dim *= static_cast<std::size_t>(spec.d);
    if (dim > 1024) throw std::invalid_argument("simulate_brickwall_exact: d^N exceeds 1024");
  }

  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
  psi(0) = 1.0;
  Eigen::MatrixXcd rho =
      Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  rho(0, 0) = 1.0;

  const bool noisy = !spec.noiseless();
  for (int layer = 0; layer < spec.depth; ++layer) {
    for (auto [a, b] : brickwall_layer_pairs(spec.n_sites, layer)) {
      const Eigen::MatrixXcd u = sample_haar_unitary(spec.d * spec.d, rng);
      if (noisy && spec.placement == NoisePlacement::two_site_per_gate &&
          spec.timing == NoiseTiming::before_gate)
        apply_pair_channel_rho(rho, spec.channel, a, spec.n_sites, spec.d);
      apply_pair_gate(psi, u, a, spec.n_sites, spec.d);
      apply_pair_gate_rho(rho, u, a, spec.n_sites, spec.d);
      if (noisy && spec.placement == NoisePlacement::two_site_per_gate &&
          spec.timing == NoiseTiming::after_gate)
        apply_pair_channel_rho(rho, spec.channel, a, spec.n_sites, spec.d);
    }
    if (noisy && spec.placement == NoisePlacement::one_site_per_layer)
      for (int site = 0; site < spec.n_sites; ++site)
        apply_site_channel_rho(rho, spec.channel, site, spec.n_sites);
  }

  BrickwallDists out;
  out.p_ideal = psi.cwiseAbs2();
  out.p_noisy = rho.diagonal().real();
  out.purity = rho.squaredNorm();
  return out;
}

double empirical_xeb(const Eigen::VectorXd& p_noisy, const Eigen::VectorXd& p_ideal) {
  if (p_noisy.size() != p_ideal.size() || p_noisy.size() == 0)
    throw std::invalid_argument("empirical_xeb: dimension mismatch");
  return static_cast<double>(p_noisy.size()) * p_noisy.dot(p_ideal) - 1.0;
}

MeanErr brickwall_empirical_xeb(const BrickwallSpec& spec, int n_circuits,
                                const RandomStream& stream) {
  if (n_circuits < 2) throw std::invalid_argument("brickwall_empirical_xeb: need >= 2 circuits");
  std::vector<double> xebs(static_cast<std::size_t>(n_circuits));
  parallel_for(static_cast<std::size_t>(n_circuits), [&](std::size_t c) {
    auto rng = stream.substream(c).make_engine();
    const BrickwallDists dists = simulate_brickwall_exact(spec, rng);
    xebs[c] = empirical_xeb(dists.p_noisy, dists.p_ideal);
  });
  return mean_std_err(xebs);
}

MomentEstimate empirical_moments(const std::vector<OverlapSample>& samples, int k_max) {
  if (samples.empty()) throw std::invalid_argument("empirical_moments: empty sample set");
  if (k_max < 1) throw std::invalid_argument("empirical_moments: k_max must be >= 1");
  std::int64_t max_id = 0;
  for (const auto& s : samples) max_id = std::max(max_id, s.circuit_id);
  const auto groups = static_cast<std::size_t>(max_id + 1);

  MomentEstimate out;
  out.values.resize(static_cast<std::size_t>(k_max));
  out.std_errors.resize(static_cast<std::size_t>(k_max));
  std::vector<double> sums(groups);
  std::vector<std::int64_t> counts(groups);
  for (int k = 1; k <= k_max; ++k) {
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (const auto& s : samples) {
      sums[static_cast<std::size_t>(s.circuit_id)] += std::pow(s.w, k);
      ++counts[static_cast<std::size_t>(s.circuit_id)];
    }
    const MeanErr est = jackknife_grouped_mean(sums, counts);
    out.values[static_cast<std::size_t>(k - 1)] = est.mean;
    out.std_errors[static_cast<std::size_t>(k - 1)] = est.std_err;
  }
  return out;
}

HaarGlobalResult sample_haar_global(int dim, double eps_glob, int n_states,
                                    int n_bits_per_state, const RandomStream& stream) {
  if (dim < 2) throw std::invalid_argument("sample_haar_global: dim must be >= 2");
  if (eps_glob < 0.0 || eps_glob > 1.0)
    throw std::invalid_argument("sample_haar_global: eps must be in [0, 1]");
  if (n_states < 2 || n_bits_per_state < 1)
    throw std::invalid_argument("sample_haar_global: need >= 2 states");

  HaarGlobalResult result;
  result.samples.resize(static_cast<std::size_t>(n_states) *
                        static_cast<std::size_t>(n_bits_per_state));
  std::vector<double> xebs(static_cast<std::size_t>(n_states));
  parallel_for(static_cast<std::size_t>(n_states), [&](std::size_t c) {
    auto rng = stream.substream(c).make_engine();
    const Eigen::VectorXcd psi = sample_haar_state(dim, rng);
    const Eigen::VectorXd p = psi.cwiseAbs2();
    const double sum_p2 = p.squaredNorm();
    xebs[c] = dim * (1.0 - eps_glob) * sum_p2 + eps_glob - 1.0;
    std::uniform_int_distribution<int> dist(0, dim - 1);
    for (int b = 0; b < n_bits_per_state; ++b) {
      const int x = dist(rng);
      OverlapSample& s = result.samples[c * static_cast<std::size_t>(n_bits_per_state) +
                                        static_cast<std::size_t>(b)];
      s.w = dim * ((1.0 - eps_glob) * p(x) + eps_glob / dim);
      s.circuit_id = static_cast<std::int64_t>(c);
      s.bitstring = std::to_string(x);
    }
  });
  result.xeb = mean_std_err(xebs);
  return result;
}

}  // namespace popkit
