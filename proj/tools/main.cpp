// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.
//
// Command-line surface: every subcommand is a thin wrapper over the
// library, writes CSV/JSON outputs with 17-digit floats, and drops a run
// manifest next to them.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "popkit/brickwall.hpp"
#include "popkit/channels.hpp"
#include "popkit/fitting.hpp"
#include "popkit/gram_charlier.hpp"
#include "popkit/io.hpp"
#include "popkit/montecarlo.hpp"
#include "popkit/parallel.hpp"
#include "popkit/rmps.hpp"
#include "popkit/scaling.hpp"
#include "popkit/weingarten.hpp"

using nlohmann::json;
using namespace popkit;

namespace {

struct CommonArgs {
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 0;
  std::string config_path;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--out", args.out_dir, "Output directory");
  cmd->add_option("--seed", args.seed, "Random seed");
  cmd->add_option("--threads", args.threads, "Worker threads (0 = all cores)");
  cmd->add_option("--config", args.config_path, "JSON config file (schema 1)");
}

json load_config(const std::string& path, const std::vector<std::string>& known_keys) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  json cfg = json::parse(in);
  if (!cfg.is_object()) throw CLI::ValidationError("--config", "config must be a JSON object");
  if (cfg.value("schema", 0) != 1)
    throw CLI::ValidationError("--config", "unsupported or missing \"schema\" (expected 1)");
  for (const auto& [key, value] : cfg.items()) {
    if (key == "schema") continue;
    bool ok = false;
    for (const auto& k : known_keys) ok = ok || k == key;
    if (!ok) throw CLI::ValidationError("--config", "unknown config key: " + key);
  }
  return cfg;
}

KrausChannel channel_from_spec(const std::string& type, double param, int dim) {
  if (type == "identity") return make_identity_channel(dim);
  if (type == "depolarizing") return make_depolarizing(dim, param);
  if (type == "amplitude_damping") {
    if (dim != 2) throw CLI::ValidationError("--channel", "amplitude damping needs dim 2");
    return make_amplitude_damping(param);
  }
  throw CLI::ValidationError("--channel", "unknown channel type: " + type);
}

class ManifestScope {
 public:
  ManifestScope(std::string command, const CommonArgs& args, json config)
      : start_(std::chrono::steady_clock::now()), args_(args) {
    manifest_.command = std::move(command);
    manifest_.seed = args.seed;
    manifest_.threads = args.threads;
    manifest_.config_json = config.dump();
    if (args.threads > 0) set_default_threads(args.threads);
  }

  void add_output(const std::string& path) { manifest_.outputs.push_back(path); }
  std::string path(const std::string& name) const { return args_.out_dir + "/" + name; }

  ~ManifestScope() {
    manifest_.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    try {
      atomic_write(path("manifest.json"), manifest_.to_json() + "\n");
    } catch (...) {
    }
  }

 private:
  std::chrono::steady_clock::time_point start_;
  CommonArgs args_;
  RunManifest manifest_;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

// --------------------------------------------------------------------
// moments
// --------------------------------------------------------------------
int run_moments(const CommonArgs& args, double x, double eta, int k_max) {
  ManifestScope scope("moments", args, {{"x", x}, {"eta", eta}, {"kmax", k_max}});
  CsvWriter csv({"x", "eta", "k", "moment"});
  for (int k = 1; k <= k_max; ++k)
    csv.add_row({format_double(x), format_double(eta), std::to_string(k),
                 format_double(rescaled_moment(k, {x, eta}))});
  const std::string path = scope.path("moments.csv");
  csv.write(path);
  scope.add_output(path);
  std::cout << path << "\n";
  return 0;
}

// --------------------------------------------------------------------
// xeb-curve (closed form sweep)
// --------------------------------------------------------------------
int run_xeb_curve(const CommonArgs& args, double eta, double x_min, double x_max, int n) {
  ManifestScope scope("xeb-curve", args,
                      {{"eta", eta}, {"x_min", x_min}, {"x_max", x_max}, {"n", n}});
  CsvWriter csv({"x", "eta", "xeb", "delta_log_xeb"});
  for (int i = 0; i < n; ++i) {
    const double x =
        n == 1 ? x_min : x_min * std::pow(x_max / x_min, static_cast<double>(i) / (n - 1));
    csv.add_row({format_double(x), format_double(eta), format_double(xeb_scaling({x, eta})),
                 format_double(delta_log_xeb({x, eta}))});
  }
  const std::string path = scope.path("xeb_curve.csv");
  csv.write(path);
  scope.add_output(path);
  std::cout << path << "\n";
  return 0;
}

// --------------------------------------------------------------------
// rmps-exact
// --------------------------------------------------------------------
struct RmpsCliArgs {
  std::string variant = "ladder";
  int n_sites = 16;
  int d = 2;
  int r = 2;
  std::string channel_type = "depolarizing";
  double channel_param = 0.0;
  double epsilon = 0.0;
  int k_max = 2;
  bool convergence = false;
  double x = 0.5;
  double eta = 2.0;
  std::vector<int> n_list;
};

RmpsSpec make_rmps_spec(const RmpsCliArgs& a) {
  RmpsSpec spec;
  spec.n_sites = a.n_sites;
  spec.d = a.d;
  spec.r = a.r;
  if (a.variant == "physical") {
    spec.variant = RmpsVariant::physical;
    spec.channel = channel_from_spec(a.channel_type, a.channel_param, a.d);
  } else if (a.variant == "ladder") {
    spec.variant = RmpsVariant::ladder;
    spec.ladder_epsilon = a.epsilon;
  } else {
    throw CLI::ValidationError("--variant", "must be physical or ladder");
  }
  return spec;
}

int run_rmps_exact(const CommonArgs& args, const RmpsCliArgs& a) {
  ManifestScope scope("rmps-exact", args,
                      {{"variant", a.variant}, {"N", a.n_sites}, {"d", a.d}, {"r", a.r},
                       {"kmax", a.k_max}, {"convergence", a.convergence}});
  CsvWriter csv({"variant", "N", "d", "chi", "k", "eta_nominal", "x_attained", "ipr",
                 "moment", "scaling_prediction", "rel_dev"});
  if (a.convergence) {
    const RmpsVariant variant =
        a.variant == "physical" ? RmpsVariant::physical : RmpsVariant::ladder;
    for (int k = 2; k <= a.k_max; ++k) {
      for (const auto& row : scaling_convergence_report(variant, k, a.x, a.eta, a.n_list, a.d)) {
        const double ipr =
            row.moment * std::exp((1.0 - k) * row.n_sites * std::log(static_cast<double>(a.d)));
        csv.add_row({a.variant, std::to_string(row.n_sites), std::to_string(a.d),
                     std::to_string(row.chi), std::to_string(k), format_double(a.eta),
                     format_double(row.x_attained), format_double(ipr), format_double(row.moment),
                     format_double(row.prediction), format_double(row.rel_dev)});
      }
    }
  } else {
    const RmpsSpec spec = make_rmps_spec(a);
    const double eta_nominal = a.variant == "ladder"
                                   ? a.epsilon * spec.n_gates()
                                   : effective_epsilon(spec.channel) * a.n_sites;
    const double x_att = (a.d - 1) * static_cast<double>(a.n_sites) /
                         (a.d * static_cast<double>(spec.chi()));
    for (int k = 1; k <= a.k_max; ++k) {
      const double moment = rmps_moment(spec, k);
      const double pred = rescaled_moment(k, {x_att, eta_nominal});
      const double ipr =
          moment * std::exp((1.0 - k) * a.n_sites * std::log(static_cast<double>(a.d)));
      csv.add_row({a.variant, std::to_string(a.n_sites), std::to_string(a.d),
                   std::to_string(spec.chi()), std::to_string(k), format_double(eta_nominal),
                   format_double(x_att), format_double(ipr), format_double(moment),
                   format_double(pred), format_double(std::abs(moment / pred - 1.0))});
    }
  }
  const std::string path = scope.path("rmps_exact.csv");
  csv.write(path);
  scope.add_output(path);
  std::cout << path << "\n";
  return 0;
}

// --------------------------------------------------------------------
// rmps-sample
// --------------------------------------------------------------------
int run_rmps_sample(const CommonArgs& args, const RmpsCliArgs& a, int n_circuits, int n_bits,
                    int m_max, bool auto_m_max, int probe_repeats, int k_max_moments) {
  ManifestScope scope("rmps-sample", args,
                      {{"variant", a.variant}, {"N", a.n_sites}, {"d", a.d}, {"r", a.r},
                       {"circuits", n_circuits}, {"bits", n_bits}, {"m_max", m_max},
                       {"auto_m_max", auto_m_max}});
  const RmpsSpec spec = make_rmps_spec(a);
  LadderSampleOptions opt;
  opt.m_max = m_max;
  opt.auto_m_max = auto_m_max;
  opt.probe_repeats = probe_repeats;
  const RmpsSampleResult res =
      sample_rmps_overlaps(spec, n_circuits, n_bits, {args.seed, 0}, opt);

  CsvWriter csv({"circuit_id", "bitstring", "w"});
  for (const auto& s : res.samples)
    csv.add_row({std::to_string(s.circuit_id), s.bitstring, format_double(s.w)});
  const std::string samples_path = scope.path("samples.csv");
  csv.write(samples_path);
  scope.add_output(samples_path);

  std::vector<double> w;
  w.reserve(res.samples.size());
  for (const auto& s : res.samples) w.push_back(s.w);
  const Histogram hist = log_histogram(w);
  const std::string hist_path = scope.path("histogram.json");
  atomic_write(hist_path, hist.to_json() + "\n");
  scope.add_output(hist_path);

  const MomentEstimate moments = empirical_moments(res.samples, k_max_moments);
  CsvWriter mcsv({"k", "moment", "std_err"});
  for (int k = 1; k <= k_max_moments; ++k)
    mcsv.add_row({std::to_string(k), format_double(moments.values[static_cast<std::size_t>(k - 1)]),
                  format_double(moments.std_errors[static_cast<std::size_t>(k - 1)])});
  const std::string m_path = scope.path("moments_empirical.csv");
  mcsv.write(m_path);
  scope.add_output(m_path);

  json summary{{"tail_bound", res.tail_bound},
               {"m_max_used", res.m_max_used},
               {"probe_noise_rel", res.probe_noise_rel},
               {"n_samples", res.samples.size()}};
  const std::string s_path = scope.path("sample_summary.json");
  atomic_write(s_path, summary.dump(2) + "\n");
  scope.add_output(s_path);
  std::cout << samples_path << "\n";
  return 0;
}

// --------------------------------------------------------------------
// brickwall-avg
// --------------------------------------------------------------------
int run_brickwall_avg(const CommonArgs& args, const std::vector<int>& n_list, int t_max, int d,
                      double eta0, const std::string& placement_name,
                      const std::string& channel_type) {
  ManifestScope scope("brickwall-avg", args,
                      {{"N_list", n_list}, {"t_max", t_max}, {"d", d}, {"eta0", eta0},
                       {"placement", placement_name}, {"channel", channel_type}});
  const NoisePlacement placement = placement_name == "one_site"
                                       ? NoisePlacement::one_site_per_layer
                                       : NoisePlacement::two_site_per_gate;
  const auto rows = brickwall_xeb_curve(n_list, t_max, d, eta0, placement, channel_type);
  CsvWriter csv({"N", "t", "d", "noise_label", "rate", "xeb", "delta_log_xeb"});
  const std::string label =
      (placement == NoisePlacement::two_site_per_gate ? "two_site_" : "one_site_") + channel_type;
  for (const auto& row : rows)
    csv.add_row({std::to_string(row.n_sites), std::to_string(row.depth), std::to_string(d), label,
                 format_double(row.rate), format_double(row.xeb), format_double(row.delta_log)});
  const std::string path = scope.path("brickwall_xeb.csv");
  csv.write(path);
  scope.add_output(path);
  std::cout << path << "\n";
  return 0;
}

// --------------------------------------------------------------------
// brickwall-sim (Monte Carlo oracle)
// --------------------------------------------------------------------
int run_brickwall_sim(const CommonArgs& args, int n, int t, int d, const std::string& channel_type,
                      double rate, const std::string& placement_name, int n_circuits) {
  ManifestScope scope("brickwall-sim", args,
                      {{"N", n}, {"t", t}, {"d", d}, {"channel", channel_type}, {"rate", rate},
                       {"placement", placement_name}, {"circuits", n_circuits}});
  BrickwallSpec spec;
  spec.n_sites = n;
  spec.depth = t;
  spec.d = d;
  spec.placement = placement_name == "one_site" ? NoisePlacement::one_site_per_layer
                                                : NoisePlacement::two_site_per_gate;
  const int q = spec.placement == NoisePlacement::two_site_per_gate ? d * d : d;
  spec.channel = channel_from_spec(channel_type, rate, q);
  const MeanErr xeb = brickwall_empirical_xeb(spec, n_circuits, {args.seed, 0});
  const double exact = xeb_brickwall_avg(spec);
  CsvWriter csv({"N", "t", "d", "noise_label", "rate", "xeb_mc", "xeb_std_err", "xeb_exact"});
  csv.add_row({std::to_string(n), std::to_string(t), std::to_string(d), channel_type,
               format_double(rate), format_double(xeb.mean), format_double(xeb.std_err),
               format_double(exact)});
  const std::string path = scope.path("brickwall_sim.csv");
  csv.write(path);
  scope.add_output(path);
  std::cout << path << "\n";
  return 0;
}

// --------------------------------------------------------------------
// fit
// --------------------------------------------------------------------
int run_fit(const CommonArgs& args, const std::string& input, double x_fit_min, double x_fit_max) {
  ManifestScope scope("fit", args, {{"input", input}});
  std::ifstream in(input);
  if (!in) throw CLI::ValidationError("--input", "cannot open " + input);
  std::string line;
  std::map<std::string, int> col;
  std::vector<std::map<std::string, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv_line(line);
    if (col.empty()) {
      for (std::size_t i = 0; i < cells.size(); ++i) col[cells[i]] = static_cast<int>(i);
      if (!col.count("N") || !col.count("t") || !col.count("xeb"))
        throw CLI::ValidationError("--input", "need columns N, t, xeb");
      continue;
    }
    std::map<std::string, double> row;
    for (const auto& [name, idx] : col) {
      if (name == "noise_label") continue;
      row[name] = std::stod(cells[static_cast<std::size_t>(idx)]);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw CLI::ValidationError("--input", "no data rows");

  // Deep plateau pooled over sizes: the three largest depths present.
  double t_max = 0.0;
  for (const auto& r : rows) t_max = std::max(t_max, r.at("t"));
  std::vector<double> deep;
  for (const auto& r : rows)
    if (r.at("t") > t_max - 3.0) deep.push_back(r.at("xeb"));
  const EtaFit eta_fit = extract_eta(deep);

  std::vector<TauFitPoint> pts;
  std::vector<CollapsePoint> collapse_pts;
  int clamped = 0;
  for (const auto& r : rows) {
    const XInversion inv = invert_xeb_for_x(r.at("xeb"), eta_fit.eta_hat);
    if (inv.clamped_at_floor) {
      ++clamped;
      continue;
    }
    if (inv.x < x_fit_min || inv.x > x_fit_max) continue;
    pts.push_back({static_cast<int>(r.at("N")), r.at("t"), inv.x});
  }
  const FitResult tau_fit = fit_tau(pts);
  for (const auto& r : rows) {
    const double x = std::exp(tau_fit.log_c) * r.at("N") * std::exp(-r.at("t") / tau_fit.tau_hat);
    collapse_pts.push_back(
        {static_cast<int>(r.at("N")), x,
         std::log1p(r.at("xeb")) - std::log1p(std::exp(-eta_fit.eta_hat))});
  }
  const double collapse = collapse_residual(collapse_pts);

  json out{{"eta_hat", eta_fit.eta_hat},
           {"plateau_mean", eta_fit.plateau_mean},
           {"plateau_rel_spread", eta_fit.rel_spread},
           {"tau_hat", tau_fit.tau_hat},
           {"n0_hat", tau_fit.n0_hat},
           {"log_c", tau_fit.log_c},
           {"fit_residual_rms", tau_fit.residual_rms},
           {"collapse_residual", collapse},
           {"points_used", pts.size()},
           {"points_clamped_at_floor", clamped}};

  CsvWriter csv({"N", "t", "xeb", "x_hat", "x_fitted", "delta_log_xeb"});
  for (const auto& r : rows) {
    const XInversion inv = invert_xeb_for_x(r.at("xeb"), eta_fit.eta_hat);
    const double x_fitted =
        std::exp(tau_fit.log_c) * r.at("N") * std::exp(-r.at("t") / tau_fit.tau_hat);
    csv.add_row({format_double(r.at("N")), format_double(r.at("t")), format_double(r.at("xeb")),
                 format_double(inv.clamped_at_floor ? 0.0 : inv.x), format_double(x_fitted),
                 format_double(std::log1p(r.at("xeb")) -
                               std::log1p(std::exp(-eta_fit.eta_hat)))});
  }
  const std::string xhat_path = scope.path("x_hat.csv");
  csv.write(xhat_path);
  scope.add_output(xhat_path);
  const std::string fit_path = scope.path("fit.json");
  atomic_write(fit_path, out.dump(2) + "\n");
  scope.add_output(fit_path);
  std::cout << fit_path << "\n";
  return 0;
}

// --------------------------------------------------------------------
// pop-predict
// --------------------------------------------------------------------
int run_pop_predict(const CommonArgs& args, double x, double eta, int order, int k_max) {
  ManifestScope scope("pop-predict", args,
                      {{"x", x}, {"eta", eta}, {"order", order}, {"kmax", k_max}});
  PopPredictOptions opt;
  opt.order = order;
  opt.k_max = k_max;
  const PopPrediction pred = pop_prediction({x, eta}, opt);
  CsvWriter csv({"w", "pdf", "pdf_log_w"});
  for (std::size_t i = 0; i < pred.curve.w.size(); ++i)
    csv.add_row({format_double(pred.curve.w[i]), format_double(pred.curve.pdf_w[i]),
                 format_double(pred.curve.pdf_log[i])});
  const std::string curve_path = scope.path("pop_curve.csv");
  csv.write(curve_path);
  scope.add_output(curve_path);

  json model{{"method", pred.curve.method}, {"clipped_mass", pred.curve.clipped_mass}};
  if (pred.model) {
    model["mu"] = pred.model->mu;
    model["sigma"] = pred.model->sigma;
    model["hermite_coeffs"] = pred.model->hermite_coeffs;
    model["residuals"] = pred.model->residuals;
  }
  model["input_moments"] = pred.input_moments.values;
  const std::string model_path = scope.path("pop_model.json");
  atomic_write(model_path, model.dump(2) + "\n");
  scope.add_output(model_path);
  std::cout << curve_path << "\n";
  return 0;
}

// --------------------------------------------------------------------
// pop-compare
// --------------------------------------------------------------------
int run_pop_compare(const CommonArgs& args, const std::string& samples_path, double x, double eta,
                    int order) {
  ManifestScope scope("pop-compare", args,
                      {{"samples", samples_path}, {"x", x}, {"eta", eta}, {"order", order}});
  std::ifstream in(samples_path);
  if (!in) throw CLI::ValidationError("--samples", "cannot open " + samples_path);
  std::string line;
  std::vector<double> w;
  bool header_seen = false;
  int w_col = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv_line(line);
    if (!header_seen) {
      header_seen = true;
      for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i] == "w") w_col = static_cast<int>(i);
      if (w_col < 0) throw CLI::ValidationError("--samples", "need a 'w' column");
      continue;
    }
    w.push_back(std::stod(cells[static_cast<std::size_t>(w_col)]));
  }
  if (w.empty()) throw CLI::ValidationError("--samples", "no samples");
  std::sort(w.begin(), w.end());

  PopPredictOptions opt;
  opt.order = order;
  const PopPrediction pred = pop_prediction({x, eta}, opt);
  const auto cdf = curve_cdf(pred.curve);
  const double ks = ks_statistic(w, cdf);

  const Histogram hist = log_histogram(w);
  const std::string hist_path = scope.path("histogram.json");
  atomic_write(hist_path, hist.to_json() + "\n");
  scope.add_output(hist_path);

  // chi^2 against the prediction on well-populated histogram bins.
  double chi2 = 0.0;
  int chi2_bins = 0;
  for (std::size_t b = 0; b + 1 < hist.edges.size(); ++b) {
    const double expect =
        (cdf(hist.edges[b + 1]) - cdf(hist.edges[b])) * static_cast<double>(hist.total);
    if (expect < 5.0) continue;
    const double diff = static_cast<double>(hist.counts[b]) - expect;
    chi2 += diff * diff / expect;
    ++chi2_bins;
  }

  json out{{"n_samples", w.size()},
           {"ks_distance", ks},
           {"ks_critical_1pct", ks_critical(0.01, w.size())},
           {"ks_pass_1pct", ks < ks_critical(0.01, w.size())},
           {"chi2", chi2},
           {"chi2_bins", chi2_bins},
           {"method", pred.curve.method}};
  const std::string path = scope.path("pop_compare.json");
  atomic_write(path, out.dump(2) + "\n");
  scope.add_output(path);
  std::cout << path << "\n";
  return 0;
}

// --------------------------------------------------------------------
// debug-dump
// --------------------------------------------------------------------
int run_debug_dump(const CommonArgs& args, int k, int q) {
  ManifestScope scope("debug-dump", args, {{"k", k}, {"q", q}});
  const PermutationTable& table = PermutationTable::cached(k);
  json perms = json::array();
  for (std::size_t i = 0; i < table.size(); ++i) {
    json rec{{"index", i}, {"images", table[i].images()}};
    const auto cc = cycle_counts(table[i]);
    rec["cycle_counts"] = cc.by_length;
    perms.push_back(rec);
  }
  const std::string table_path = scope.path("permutations.json");
  atomic_write(table_path, json{{"k", k}, {"elements", perms}}.dump(2) + "\n");
  scope.add_output(table_path);

  const auto dump_matrix = [&](const ReplicaMatrix& m, const std::string& name) {
    std::ostringstream os;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_double(m(i, j));
      os << "\n";
    }
    const std::string path = scope.path(name);
    atomic_write(path, os.str());
    scope.add_output(path);
  };
  dump_matrix(gram_matrix(table, q), "gram.csv");
  dump_matrix(weingarten_matrix(table, q), "weingarten.csv");
  dump_matrix(transposition_adjacency(table), "adjacency.csv");
  dump_matrix(fixed_point_matrix(table), "field.csv");
  std::cout << table_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"popkit: anticoncentration of noisy random circuits"};
  app.require_subcommand(1);

  CommonArgs common;

  auto* moments_cmd = app.add_subcommand("moments", "Scaling-limit moments E[w^k]");
  double m_x = 0.5, m_eta = 2.0;
  int m_kmax = 6;
  moments_cmd->add_option("--x", m_x, "Rescaled inverse depth");
  moments_cmd->add_option("--eta", m_eta, "Rescaled noise");
  moments_cmd->add_option("--kmax", m_kmax, "Largest moment order")->check(CLI::Range(1, 7));
  add_common(moments_cmd, common);

  auto* xeb_cmd = app.add_subcommand("xeb-curve", "Closed-form XEB sweep in x");
  double c_eta = 2.0, c_xmin = 1e-3, c_xmax = 30.0;
  int c_n = 200;
  xeb_cmd->add_option("--eta", c_eta, "Rescaled noise");
  xeb_cmd->add_option("--x-min", c_xmin, "Smallest x");
  xeb_cmd->add_option("--x-max", c_xmax, "Largest x");
  xeb_cmd->add_option("--n", c_n, "Points (log-spaced)");
  add_common(xeb_cmd, common);

  RmpsCliArgs rmps;
  auto* rmps_cmd = app.add_subcommand("rmps-exact", "Exact transfer-matrix RMPS moments");
  rmps_cmd->add_option("--variant", rmps.variant, "physical | ladder");
  rmps_cmd->add_option("--N", rmps.n_sites, "Number of qudits");
  rmps_cmd->add_option("--d", rmps.d, "Local dimension");
  rmps_cmd->add_option("--r", rmps.r, "Bond exponent (chi = d^r)");
  rmps_cmd->add_option("--channel-type", rmps.channel_type, "physical channel type");
  rmps_cmd->add_option("--channel-param", rmps.channel_param, "physical channel parameter");
  rmps_cmd->add_option("--epsilon", rmps.epsilon, "ladder per-gate depolarizing rate");
  rmps_cmd->add_option("--kmax", rmps.k_max, "Largest moment order")->check(CLI::Range(1, 6));
  rmps_cmd->add_flag("--convergence", rmps.convergence, "Scaling-convergence sweep mode");
  rmps_cmd->add_option("--x", rmps.x, "Target x for the sweep");
  rmps_cmd->add_option("--eta", rmps.eta, "Target eta for the sweep");
  rmps_cmd->add_option("--N-list", rmps.n_list, "Sizes for the sweep");
  add_common(rmps_cmd, common);

  RmpsCliArgs samp;
  int s_circuits = 400, s_bits = 50, s_mmax = 3, s_repeats = 1, s_kmax = 2;
  bool s_auto = false;
  auto* sample_cmd = app.add_subcommand("rmps-sample", "Monte Carlo RMPS bitstring overlaps");
  sample_cmd->add_option("--variant", samp.variant, "physical | ladder");
  sample_cmd->add_option("--N", samp.n_sites, "Number of qudits");
  sample_cmd->add_option("--d", samp.d, "Local dimension");
  sample_cmd->add_option("--r", samp.r, "Bond exponent (chi = d^r)");
  sample_cmd->add_option("--channel-type", samp.channel_type, "physical channel type");
  sample_cmd->add_option("--channel-param", samp.channel_param, "physical channel parameter");
  sample_cmd->add_option("--epsilon", samp.epsilon, "ladder per-gate depolarizing rate");
  sample_cmd->add_option("--circuits", s_circuits, "Circuit realizations");
  sample_cmd->add_option("--bits", s_bits, "Bitstrings per circuit");
  sample_cmd->add_option("--mmax", s_mmax, "Error-pattern truncation order");
  sample_cmd->add_flag("--auto-mmax", s_auto, "Raise mmax until the tail bound is negligible");
  sample_cmd->add_option("--probe-repeats", s_repeats, "Reset-probe sets averaged per sample");
  sample_cmd->add_option("--kmax", s_kmax, "Empirical moment orders")->check(CLI::Range(1, 6));
  add_common(sample_cmd, common);

  std::vector<int> b_nlist{12};
  int b_tmax = 20, b_d = 2;
  double b_eta0 = 6.0;
  std::string b_placement = "two_site", b_channel = "depolarizing";
  auto* bavg_cmd = app.add_subcommand("brickwall-avg", "Exact circuit-averaged brickwall XEB");
  bavg_cmd->add_option("--N-list", b_nlist, "Even system sizes");
  bavg_cmd->add_option("--t-max", b_tmax, "Largest depth");
  bavg_cmd->add_option("--d", b_d, "Local dimension");
  bavg_cmd->add_option("--eta0", b_eta0, "Noise budget (rate = eta0 / (N t))");
  bavg_cmd->add_option("--placement", b_placement, "two_site | one_site");
  bavg_cmd->add_option("--channel-type", b_channel, "depolarizing | amplitude_damping");
  add_common(bavg_cmd, common);

  int bs_n = 6, bs_t = 4, bs_d = 2, bs_circuits = 300;
  double bs_rate = 0.05;
  std::string bs_channel = "depolarizing", bs_placement = "two_site";
  auto* bsim_cmd = app.add_subcommand("brickwall-sim", "Brute-force noisy brickwall Monte Carlo");
  bsim_cmd->add_option("--N", bs_n, "Even system size (d^N <= 1024)");
  bsim_cmd->add_option("--t", bs_t, "Depth");
  bsim_cmd->add_option("--d", bs_d, "Local dimension");
  bsim_cmd->add_option("--channel-type", bs_channel, "Channel type");
  bsim_cmd->add_option("--rate", bs_rate, "Channel parameter");
  bsim_cmd->add_option("--placement", bs_placement, "two_site | one_site");
  bsim_cmd->add_option("--circuits", bs_circuits, "Circuit realizations");
  add_common(bsim_cmd, common);

  std::string f_input;
  double f_xmin = 0.02, f_xmax = 20.0;
  auto* fit_cmd = app.add_subcommand("fit", "Extract (eta, tau) from a brickwall-avg CSV");
  fit_cmd->add_option("--input", f_input, "CSV with N, t, xeb columns")->required();
  fit_cmd->add_option("--x-fit-min", f_xmin, "Smallest x used in the tau fit");
  fit_cmd->add_option("--x-fit-max", f_xmax, "Largest x used in the tau fit");
  add_common(fit_cmd, common);

  double p_x = 0.5, p_eta = 2.0;
  int p_order = 4, p_kmax = 6;
  auto* ppredict_cmd = app.add_subcommand("pop-predict", "Universal PoP density prediction");
  ppredict_cmd->add_option("--x", p_x, "Rescaled inverse depth");
  ppredict_cmd->add_option("--eta", p_eta, "Rescaled noise");
  ppredict_cmd->add_option("--order", p_order, "Hermite order")->check(CLI::Range(2, 6));
  ppredict_cmd->add_option("--kmax", p_kmax, "Moments used")->check(CLI::Range(2, 7));
  add_common(ppredict_cmd, common);

  std::string pc_samples;
  double pc_x = 0.5, pc_eta = 2.0;
  int pc_order = 6;
  auto* pcompare_cmd = app.add_subcommand("pop-compare", "KS/chi2 of samples vs the prediction");
  pcompare_cmd->add_option("--samples", pc_samples, "samples.csv from rmps-sample")->required();
  pcompare_cmd->add_option("--x", pc_x, "Rescaled inverse depth");
  pcompare_cmd->add_option("--eta", pc_eta, "Rescaled noise");
  pcompare_cmd->add_option("--order", pc_order, "Hermite order")->check(CLI::Range(2, 6));
  add_common(pcompare_cmd, common);

  int dd_k = 3, dd_q = 4;
  auto* dump_cmd = app.add_subcommand("debug-dump", "Permutation tables and replica matrices");
  dump_cmd->add_option("--k", dd_k, "Group degree")->check(CLI::Range(1, 7));
  dump_cmd->add_option("--q", dd_q, "Hilbert space dimension");
  add_common(dump_cmd, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!common.config_path.empty()) {
      // The config provides run parameters; flags given explicitly on the
      // command line still win for the shared scalar options.
      const json cfg = load_config(
          common.config_path,
          {"model", "x", "eta", "kmax", "seed", "threads", "out", "N", "d", "r", "t", "t_max",
           "N_list", "epsilon", "eta0", "channel", "circuits", "bits", "mmax", "auto_mmax",
           "order", "placement", "rate"});
      if (cfg.contains("x")) m_x = p_x = pc_x = rmps.x = samp.x = cfg["x"].get<double>();
      if (cfg.contains("eta")) m_eta = p_eta = pc_eta = rmps.eta = samp.eta = cfg["eta"].get<double>();
      if (cfg.contains("kmax")) m_kmax = p_kmax = rmps.k_max = cfg["kmax"].get<int>();
      if (cfg.contains("seed")) common.seed = cfg["seed"].get<std::uint64_t>();
      if (cfg.contains("threads")) common.threads = cfg["threads"].get<int>();
      if (cfg.contains("out")) common.out_dir = cfg["out"].get<std::string>();
      if (cfg.contains("model")) {
        const std::string model = cfg["model"].get<std::string>();
        if (model == "rmps_physical") rmps.variant = samp.variant = "physical";
        else if (model == "rmps_ladder") rmps.variant = samp.variant = "ladder";
        else if (model != "brickwall" && model != "haar_global")
          throw CLI::ValidationError("--config", "unknown model: " + model);
      }
      if (cfg.contains("N")) rmps.n_sites = samp.n_sites = bs_n = cfg["N"].get<int>();
      if (cfg.contains("d")) rmps.d = samp.d = b_d = bs_d = cfg["d"].get<int>();
      if (cfg.contains("r")) rmps.r = samp.r = cfg["r"].get<int>();
      if (cfg.contains("t")) bs_t = cfg["t"].get<int>();
      if (cfg.contains("t_max")) b_tmax = cfg["t_max"].get<int>();
      if (cfg.contains("N_list")) b_nlist = rmps.n_list = cfg["N_list"].get<std::vector<int>>();
      if (cfg.contains("epsilon")) rmps.epsilon = samp.epsilon = cfg["epsilon"].get<double>();
      if (cfg.contains("eta0")) b_eta0 = cfg["eta0"].get<double>();
      if (cfg.contains("rate")) bs_rate = cfg["rate"].get<double>();
      if (cfg.contains("circuits")) s_circuits = bs_circuits = cfg["circuits"].get<int>();
      if (cfg.contains("bits")) s_bits = cfg["bits"].get<int>();
      if (cfg.contains("mmax")) s_mmax = cfg["mmax"].get<int>();
      if (cfg.contains("auto_mmax")) s_auto = cfg["auto_mmax"].get<bool>();
      if (cfg.contains("order")) p_order = pc_order = cfg["order"].get<int>();
      if (cfg.contains("placement"))
        b_placement = bs_placement = cfg["placement"].get<std::string>();
      if (cfg.contains("channel") && cfg["channel"].contains("type"))
        b_channel = cfg["channel"]["type"].get<std::string>();
      if (cfg.contains("channel")) {
        const json& ch = cfg["channel"];
        for (const auto& [key, value] : ch.items())
          if (key != "type" && key != "param" && key != "dim")
            throw CLI::ValidationError("--config", "unknown channel key: " + key);
        rmps.channel_type = samp.channel_type = bs_channel = ch.value("type", "depolarizing");
        rmps.channel_param = samp.channel_param = ch.value("param", 0.0);
        if (ch.contains("param")) bs_rate = ch["param"].get<double>();
      }
    }
    if (moments_cmd->parsed()) return run_moments(common, m_x, m_eta, m_kmax);
    if (xeb_cmd->parsed()) return run_xeb_curve(common, c_eta, c_xmin, c_xmax, c_n);
    if (rmps_cmd->parsed()) return run_rmps_exact(common, rmps);
    if (sample_cmd->parsed())
      return run_rmps_sample(common, samp, s_circuits, s_bits, s_mmax, s_auto, s_repeats, s_kmax);
    if (bavg_cmd->parsed())
      return run_brickwall_avg(common, b_nlist, b_tmax, b_d, b_eta0, b_placement, b_channel);
    if (bsim_cmd->parsed())
      return run_brickwall_sim(common, bs_n, bs_t, bs_d, bs_channel, bs_rate, bs_placement,
                               bs_circuits);
    if (fit_cmd->parsed()) return run_fit(common, f_input, f_xmin, f_xmax);
    if (ppredict_cmd->parsed()) return run_pop_predict(common, p_x, p_eta, p_order, p_kmax);
    if (pcompare_cmd->parsed()) return run_pop_compare(common, pc_samples, pc_x, pc_eta, pc_order);
    if (dump_cmd->parsed()) return run_debug_dump(common, dd_k, dd_q);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
