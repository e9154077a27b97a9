// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include "popkit/brickwall.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "popkit/fitting.hpp"
#include "popkit/weingarten.hpp"

namespace popkit {

namespace {

constexpr std::size_t kMaxContractionStates = std::size_t{1} << 24;
constexpr double kSpanTol = 1e-10;

std::size_t ipow(std::size_t base, int e) {
  std::size_t v = 1;
  for (int i = 0; i < e; ++i) v *= base;
  return v;
}

// Vectorized permutation operator on k replicas of a q-dimensional site:
// component at replica-major index ((i_0,j_0),...,(i_{k-1},j_{k-1})) equals
// prod_m delta(i_{sigma(m)}, j_m).
Eigen::VectorXd permutation_vector(const Permutation& sigma, int q) {
  const int k = sigma.degree();
  const std::size_t dim = ipow(static_cast<std::size_t>(q) * q, k);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  std::vector<int> i_idx(static_cast<std::size_t>(k), 0);
  // Enumerate the q^k row indices; the column indices follow from sigma.
  for (;;) {
    std::size_t idx = 0;
    for (int m = 0; m < k; ++m) {
      const int im = i_idx[static_cast<std::size_t>(m)];
      const int jm = i_idx[static_cast<std::size_t>(sigma(m))];
      idx = idx * static_cast<std::size_t>(q) * q + static_cast<std::size_t>(im) * q + jm;
    }
    v(static_cast<Eigen::Index>(idx)) = 1.0;
    int m = k - 1;
    while (m >= 0 && ++i_idx[static_cast<std::size_t>(m)] == q) i_idx[static_cast<std::size_t>(m--)] = 0;
    if (m < 0) break;
  }
  return v;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Superoperator of the channel applied to the masked replicas of one
// q-dimensional site; identity on the others. Dimension (q^2)^k.
Eigen::MatrixXcd masked_superoperator(const KrausChannel& channel, int k,
                                      const std::vector<bool>& mask) {
  if (static_cast<int>(mask.size()) != k)
    throw std::invalid_argument("masked_superoperator: mask size != k");
  const int q = channel.dim;
  const Eigen::MatrixXcd s = channel.superoperator();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(q * q, q * q);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(1, 1);
  for (int m = 0; m < k; ++m) acc = kron(acc, mask[static_cast<std::size_t>(m)] ? s : id);
  return acc;
}

ReplicaMatrix project_to_permutation_basis(const Eigen::MatrixXcd& super, int k, int q) {
  const PermutationTable& table = PermutationTable::cached(k);
  const auto n = static_cast<Eigen::Index>(table.size());
  Eigen::MatrixXd basis(super.rows(), n);
  for (Eigen::Index s = 0; s < n; ++s)
    basis.col(s) = permutation_vector(table[static_cast<std::size_t>(s)], q);
  Eigen::MatrixXcd j = basis.transpose() * super * basis;
  if (j.imag().cwiseAbs().maxCoeff() > 1e-10)
    throw std::runtime_error("site_noise_matrix: non-real permutation matrix element");
  return j.real();
}

// sigma with point j bridged out of its cycle and remapped to a fixed point.
Permutation bridge_to_fixed(const Permutation& sigma, int j) {
  std::vector<int> im(sigma.images());
  const int target = sigma(j);
  if (target != j) {
    const int pre = static_cast<int>(std::distance(
        im.begin(), std::find(im.begin(), im.end(), j)));
    im[static_cast<std::size_t>(pre)] = target;
    im[static_cast<std::size_t>(j)] = j;
  }
  return Permutation(im);
}

}  // namespace

void BrickwallSpec::validate() const {
  if (n_sites < 2 || n_sites % 2 != 0)
    throw std::invalid_argument("BrickwallSpec: n_sites must be even and >= 2");
  if (depth < 1) throw std::invalid_argument("BrickwallSpec: depth must be >= 1");
  if (d < 2) throw std::invalid_argument("BrickwallSpec: d must be >= 2");
  if (!noiseless()) {
    const int want = placement == NoisePlacement::two_site_per_gate ? d * d : d;
    if (channel.dim != want)
      throw std::invalid_argument("BrickwallSpec: channel dimension does not match placement");
    if (timing == NoiseTiming::before_gate && placement != NoisePlacement::two_site_per_gate)
      throw std::invalid_argument("BrickwallSpec: before_gate timing needs two-site placement");
  }
}

bool BrickwallSpec::noiseless() const {
  return channel.kraus.empty() || channel.label == "identity";
}

std::vector<std::pair<int, int>> brickwall_layer_pairs(int n_sites, int layer) {
  std::vector<std::pair<int, int>> pairs;
  for (int a = layer % 2; a + 1 < n_sites; a += 2) pairs.emplace_back(a, a + 1);
  return pairs;
}

AveragedGate averaged_gate_decomposition(int k, int d) {
  if (k < 1 || k > 3) throw std::invalid_argument("averaged_gate_decomposition: k must be in [1, 3]");
  AveragedGate g;
  g.k = k;
  g.d = d;
  g.weingarten = weingarten_matrix(PermutationTable::cached(k), d * d);
  return g;
}

ReplicaMatrix site_noise_matrix(const KrausChannel& channel, int k,
                                const std::vector<bool>& noisy_replica_mask, int d) {
  if (channel.dim != d) throw std::invalid_argument("site_noise_matrix: channel dim != d");
  if (static_cast<int>(noisy_replica_mask.size()) != k)
    throw std::invalid_argument("site_noise_matrix: mask size != k");
  return project_to_permutation_basis(masked_superoperator(channel, k, noisy_replica_mask), k, d);
}

ReplicaMatrix pair_label_mixing(const KrausChannel& channel, int k,
                                const std::vector<bool>& noisy_replica_mask) {
  if (static_cast<int>(noisy_replica_mask.size()) != k)
    throw std::invalid_argument("pair_label_mixing: mask size != k");
  const int q = channel.dim;
  const PermutationTable& table = PermutationTable::cached(k);
  const auto n = static_cast<Eigen::Index>(table.size());

  if (channel.label == "depolarizing") {
    // Trace-replacement on replica j maps |sigma>> to
    // q^{[sigma(j)=j]-1} |bridge_j(sigma)>>; compose (1-eps) id + eps (...)
    // over the masked replicas.
    const double eps = channel.param;
    ReplicaMatrix r = ReplicaMatrix::Identity(n, n);
    for (int j = 0; j < k; ++j) {
      if (!noisy_replica_mask[static_cast<std::size_t>(j)]) continue;
      ReplicaMatrix rj = (1.0 - eps) * ReplicaMatrix::Identity(n, n);
      for (Eigen::Index s = 0; s < n; ++s) {
        const Permutation& sigma = table[static_cast<std::size_t>(s)];
        const double factor = sigma(j) == j ? 1.0 : 1.0 / q;
        const auto t = static_cast<Eigen::Index>(table.index_of(bridge_to_fixed(sigma, j)));
        rj(t, s) += eps * factor;
      }
      r = rj * r;
    }
    return r;
  }

  if (k > 2)
    throw std::invalid_argument("pair_label_mixing: dense reconstruction limited to k <= 2");
  const Eigen::MatrixXcd super = masked_superoperator(channel, k, noisy_replica_mask);
  Eigen::MatrixXd basis(super.rows(), n);
  for (Eigen::Index s = 0; s < n; ++s)
    basis.col(s) = permutation_vector(table[static_cast<std::size_t>(s)], q);
  const ReplicaMatrix gram = gram_matrix(table, q);
  ReplicaMatrix r(n, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const Eigen::VectorXcd image = super * basis.col(s);
    if (image.imag().cwiseAbs().maxCoeff() > kSpanTol)
      throw std::runtime_error("pair_label_mixing: channel image is not real");
    const Eigen::VectorXd overlaps = basis.transpose() * image.real();
    const Eigen::VectorXd coeff = gram.ldlt().solve(overlaps);
    if ((image.real() - basis * coeff).norm() > kSpanTol * image.real().norm())
      throw std::runtime_error("pair_label_mixing: channel leaves the permutation span");
    r.col(s) = coeff;
  }
  return r;
}

namespace {

// Time-directed exact contraction of the replicated, gate-averaged
// brickwall. The state holds one weight per assignment of S_k labels to
// sites: the network below the cut equals sum_cfg V[cfg] prod_i |cfg_i>>_d.
class ReplicaLattice {
 public:
  ReplicaLattice(const BrickwallSpec& spec, int k, std::vector<bool> mask)
      : spec_(spec), k_(k), mask_(std::move(mask)),
        m_(static_cast<std::size_t>(factorial(k))),
        table_(PermutationTable::cached(k)) {
    spec_.validate();
    n_states_ = ipow(m_, spec_.n_sites);
    if (n_states_ > kMaxContractionStates)
      throw std::invalid_argument("replica contraction: state space exceeds the N cap");
    wg_gate_ = weingarten_matrix(table_, spec_.d * spec_.d);
    gram_site_ = gram_matrix(table_, spec_.d);
    if (!spec_.noiseless()) {
      if (spec_.placement == NoisePlacement::two_site_per_gate)
        pair_mix_ = pair_label_mixing(spec_.channel, k_, mask_);
      else
        site_super_ = masked_superoperator(spec_.channel, k_, mask_);
    }
    v_.assign(n_states_, 0.0);
    v_[0] = 1.0;
    fresh_.assign(static_cast<std::size_t>(spec_.n_sites), true);
    pending_.assign(static_cast<std::size_t>(spec_.n_sites), 0);
  }

  /// Runs layers [0, t) and returns sum_x E[prod over replicas of p-type
  /// contraction], i.e. the raw partition sum before any D rescaling.
  double contract() {
    for (int layer = 0; layer < spec_.depth; ++layer) apply_layer(layer);
    return close();
  }

  void apply_layer(int layer) {
    for (auto [a, b] : brickwall_layer_pairs(spec_.n_sites, layer)) apply_gate(a, b);
    if (!spec_.noiseless() && spec_.placement == NoisePlacement::one_site_per_layer)
      for (auto& c : pending_) ++c;
  }

  double close() const {
    // Fold sites from the most significant digit downwards.
    std::vector<double> buf(v_);
    std::size_t size = n_states_;
    for (int site = spec_.n_sites - 1; site >= 0; --site) {
      const Eigen::VectorXd f = closing_vector(site);
      const std::size_t chunk = size / m_;
      for (std::size_t i = 0; i < chunk; ++i) {
        double acc = 0.0;
        for (std::size_t s = 0; s < m_; ++s) acc += buf[i + s * chunk] * f(static_cast<Eigen::Index>(s));
        buf[i] = acc;
      }
      size = chunk;
    }
    return buf[0];
  }

 private:
  // J factor between the current label of `site` and the next gate's
  // covector; reflects any noise layers pending on that site.
  const ReplicaMatrix& bond_matrix(int site) {
    const int count = pending_[static_cast<std::size_t>(site)];
    auto it = bond_cache_.find(count);
    if (it != bond_cache_.end()) return it->second;
    ReplicaMatrix j;
    if (count == 0) {
      j = gram_site_;
    } else {
      Eigen::MatrixXcd s = site_super_;
      for (int i = 1; i < count; ++i) s = s * site_super_;
      j = project_to_permutation_basis(s, k_, spec_.d);
    }
    return bond_cache_.emplace(count, std::move(j)).first->second;
  }

  Eigen::VectorXd closing_vector(int site) const {
    const auto n = static_cast<Eigen::Index>(m_);
    const int q = spec_.d;
    const int count = pending_[static_cast<std::size_t>(site)];
    Eigen::VectorXd f(n);
    if (count == 0) {
      // sum_x <<x^{(x)k} | sigma>>_d = d for every sigma.
      f.setConstant(static_cast<double>(q));
      return f;
    }
    Eigen::MatrixXcd s = site_super_;
    for (int i = 1; i < count; ++i) s = s * site_super_;
    for (Eigen::Index si = 0; si < n; ++si) {
      const Eigen::VectorXcd img = s * permutation_vector(table_[static_cast<std::size_t>(si)], q);
      double acc = 0.0;
      for (int x = 0; x < q; ++x) {
        std::size_t idx = 0;
        for (int mrep = 0; mrep < k_; ++mrep)
          idx = idx * static_cast<std::size_t>(q) * q + static_cast<std::size_t>(x) * q + x;
        acc += img(static_cast<Eigen::Index>(idx)).real();
      }
      f(si) = acc;
    }
    return f;
  }

  void apply_gate(int a, int b) {
    const auto n = static_cast<Eigen::Index>(m_);
    const bool fresh_a = fresh_[static_cast<std::size_t>(a)];
    const bool fresh_b = fresh_[static_cast<std::size_t>(b)];

    // Input factors per site: ones-column for a fresh site (the initial
    // product state overlaps every permutation with weight 1), otherwise
    // the noise-dressed bond matrix.
    ReplicaMatrix ja, jb;
    if (fresh_a) {
      ja = ReplicaMatrix::Zero(n, n);
      ja.col(0).setOnes();
    } else {
      ja = bond_matrix(a);
    }
    if (fresh_b) {
      jb = ReplicaMatrix::Zero(n, n);
      jb.col(0).setOnes();
    } else {
      jb = bond_matrix(b);
    }

    // K[sigma][la + m*lb] = sum_pi Wg_{pi,sigma} Ja[pi][la] Jb[pi][lb],
    // optionally pre-mixed by the before-gate pair channel and post-mixed
    // by the after-gate one.
    Eigen::MatrixXd kmat(n, n * n);
    for (Eigen::Index s = 0; s < n; ++s)
      for (Eigen::Index la = 0; la < n; ++la)
        for (Eigen::Index lb = 0; lb < n; ++lb) {
          double acc = 0.0;
          for (Eigen::Index p = 0; p < n; ++p) acc += wg_gate_(p, s) * ja(p, la) * jb(p, lb);
          kmat(s, la + n * lb) = acc;
        }

    const bool mix_after = !spec_.noiseless() &&
                           spec_.placement == NoisePlacement::two_site_per_gate &&
                           spec_.timing == NoiseTiming::after_gate;
    const bool mix_before = !spec_.noiseless() &&
                            spec_.placement == NoisePlacement::two_site_per_gate &&
                            spec_.timing == NoiseTiming::before_gate;
    if (mix_after) kmat = pair_mix_ * kmat;
    if (mix_before) {
      if (fresh_a != fresh_b)
        throw std::runtime_error("replica contraction: mixed fresh/used gate inputs");
      if (fresh_a) {
        // Layer-0 inputs: replace the all-ones factor by <<pi| N(|0><0|^{(x)k}).
        const Eigen::VectorXd f0 = fresh_pair_noise_factor();
        for (Eigen::Index s = 0; s < n; ++s) {
          double acc = 0.0;
          for (Eigen::Index p = 0; p < n; ++p) acc += wg_gate_(p, s) * f0(p);
          for (Eigen::Index la = 0; la < n; ++la)
            for (Eigen::Index lb = 0; lb < n; ++lb)
              kmat(s, la + n * lb) = (la == 0 && lb == 0) ? acc : 0.0;
        }
      } else {
        Eigen::MatrixXd pairmix(n * n, n * n);
        pair_input_mixing(pairmix);
        kmat = kmat * pairmix;
      }
    }

    const std::size_t sa = ipow(m_, a);
    const std::size_t groups_hi = n_states_ / (sa * m_ * m_);
    std::vector<double> vals(m_ * m_), out(m_);
    for (std::size_t hi = 0; hi < groups_hi; ++hi) {
      const std::size_t base_hi = hi * sa * m_ * m_;
      for (std::size_t lo = 0; lo < sa; ++lo) {
        const std::size_t base = base_hi + lo;
        for (std::size_t la = 0; la < m_; ++la)
          for (std::size_t lb = 0; lb < m_; ++lb)
            vals[la + m_ * lb] = v_[base + la * sa + lb * sa * m_];
        for (std::size_t s = 0; s < m_; ++s) {
          double acc = 0.0;
          for (std::size_t c = 0; c < m_ * m_; ++c)
            acc += kmat(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(c)) * vals[c];
          out[s] = acc;
        }
        for (std::size_t la = 0; la < m_; ++la)
          for (std::size_t lb = 0; lb < m_; ++lb)
            v_[base + la * sa + lb * sa * m_] = (la == lb) ? out[la] : 0.0;
      }
    }

    fresh_[static_cast<std::size_t>(a)] = fresh_[static_cast<std::size_t>(b)] = false;
    pending_[static_cast<std::size_t>(a)] = pending_[static_cast<std::size_t>(b)] = 0;
  }

  void pair_input_mixing(Eigen::MatrixXd& out) const {
    // Depolarizing rule on a pair of independent labels: the
    // trace-replacement on replica j bridges both site labels at once,
    // with one factor d per label that already fixes j.
    if (spec_.channel.label != "depolarizing")
      throw std::invalid_argument("before_gate timing supports the depolarizing channel only");
    const auto n = static_cast<Eigen::Index>(m_);
    const double eps = spec_.channel.param;
    const int q = spec_.d * spec_.d;
    out = Eigen::MatrixXd::Identity(n * n, n * n);
    for (int j = 0; j < k_; ++j) {
      if (!mask_[static_cast<std::size_t>(j)]) continue;
      Eigen::MatrixXd rj = (1.0 - eps) * Eigen::MatrixXd::Identity(n * n, n * n);
      for (Eigen::Index la = 0; la < n; ++la)
        for (Eigen::Index lb = 0; lb < n; ++lb) {
          const Permutation& pa = table_[static_cast<std::size_t>(la)];
          const Permutation& pb = table_[static_cast<std::size_t>(lb)];
          double factor = 1.0 / q;
          if (pa(j) == j) factor *= spec_.d;
          if (pb(j) == j) factor *= spec_.d;
          const auto ia = static_cast<Eigen::Index>(table_.index_of(bridge_to_fixed(pa, j)));
          const auto ib = static_cast<Eigen::Index>(table_.index_of(bridge_to_fixed(pb, j)));
          rj(ia + n * ib, la + n * lb) += eps * factor;
        }
      out = rj * out;
    }
  }

  Eigen::VectorXd fresh_pair_noise_factor() const {
    const int q = spec_.d * spec_.d;
    const Eigen::MatrixXcd super = masked_superoperator(spec_.channel, k_, mask_);
    std::size_t idx0 = 0;  // (|0><0|)^{(x)k}: all row/col indices zero
    Eigen::VectorXcd vin = Eigen::VectorXcd::Zero(super.cols());
    vin(static_cast<Eigen::Index>(idx0)) = 1.0;
    const Eigen::VectorXcd img = super * vin;
    const auto n = static_cast<Eigen::Index>(m_);
    Eigen::VectorXd f(n);
    for (Eigen::Index p = 0; p < n; ++p)
      f(p) = permutation_vector(table_[static_cast<std::size_t>(p)], q).dot(img.real());
    return f;
  }

  BrickwallSpec spec_;
  int k_;
  std::vector<bool> mask_;
  std::size_t m_;
  const PermutationTable& table_;
  std::size_t n_states_ = 0;
  ReplicaMatrix wg_gate_, gram_site_, pair_mix_;
  Eigen::MatrixXcd site_super_;
  std::vector<double> v_;
  std::vector<bool> fresh_;
  std::vector<int> pending_;
  std::map<int, ReplicaMatrix> bond_cache_;
};

}  // namespace

double xeb_brickwall_avg(const BrickwallSpec& spec) {
  ReplicaLattice lattice(spec, 2, {true, false});
  const double raw = lattice.contract();
  return std::pow(static_cast<double>(spec.d), spec.n_sites) * raw - 1.0;
}

double ipr_brickwall_avg(const BrickwallSpec& spec, int k) {
  if (k < 1 || k > 3) throw std::invalid_argument("ipr_brickwall_avg: k must be in [1, 3]");
  ReplicaLattice lattice(spec, k, std::vector<bool>(static_cast<std::size_t>(k), true));
  return lattice.contract();
}

std::vector<XebCurveRow> brickwall_xeb_curve(const std::vector<int>& n_list, int t_max, int d,
                                             double eta0, NoisePlacement placement,
                                             const std::string& channel_type) {
  if (channel_type == "amplitude_damping" &&
      (placement != NoisePlacement::one_site_per_layer || d != 2))
    throw std::invalid_argument("brickwall_xeb_curve: amplitude damping needs one-site placement at d = 2");
  std::vector<XebCurveRow> rows;
  for (int n : n_list) {
    std::vector<XebCurveRow> size_rows;
    for (int t = 1; t <= t_max; ++t) {
      BrickwallSpec spec;
      spec.n_sites = n;
      spec.depth = t;
      spec.d = d;
      spec.placement = placement;
      const double rate = eta0 / (static_cast<double>(n) * t);
      if (channel_type == "amplitude_damping")
        spec.channel = make_amplitude_damping(rate);
      else
        spec.channel = placement == NoisePlacement::two_site_per_gate
                           ? make_depolarizing(d * d, rate)
                           : make_depolarizing(d, rate);
      XebCurveRow row;
      row.n_sites = n;
      row.depth = t;
      row.rate = rate;
      row.xeb = xeb_brickwall_avg(spec);
      size_rows.push_back(row);
    }
    // Each curve carries its own measured deep plateau as the x -> 0
    // reference: with open boundaries the effective noise per depth has
    // an O(1/N) gate-count correction, so the plateaus differ across N.
    std::vector<double> deep;
    for (const auto& row : size_rows)
      if (row.depth > t_max - 3) deep.push_back(row.xeb);
    const double ref = std::log1p(extract_eta(deep).plateau_mean);
    for (auto& row : size_rows) row.delta_log = std::log1p(row.xeb) - ref;
    rows.insert(rows.end(), size_rows.begin(), size_rows.end());
  }
  return rows;
}

}  // namespace popkit
