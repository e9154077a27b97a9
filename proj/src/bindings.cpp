// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "popkit/brickwall.hpp"
#include "popkit/channels.hpp"
#include "popkit/fitting.hpp"
#include "popkit/gram_charlier.hpp"
#include "popkit/io.hpp"
#include "popkit/montecarlo.hpp"
#include "popkit/rmps.hpp"
#include "popkit/scaling.hpp"
#include "popkit/weingarten.hpp"

namespace py = pybind11;
using namespace popkit;

namespace {

RmpsSpec build_rmps_spec(const std::string& variant, int n_sites, int d, int r,
                         const KrausChannel* channel, double ladder_epsilon) {
  RmpsSpec spec;
  spec.n_sites = n_sites;
  spec.d = d;
  spec.r = r;
  if (variant == "physical") {
    spec.variant = RmpsVariant::physical;
    if (!channel) throw std::invalid_argument("physical variant needs a channel");
    spec.channel = *channel;
  } else if (variant == "ladder") {
    spec.variant = RmpsVariant::ladder;
    spec.ladder_epsilon = ladder_epsilon;
  } else {
    throw std::invalid_argument("variant must be 'physical' or 'ladder'");
  }
  return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Permutation-space replica tools for the anticoncentration of noisy random circuits";
  m.attr("__version__") = kVersion;

  // Structural matrices on S_k.
  m.def("gram_matrix",
        [](int k, int q) { return gram_matrix(PermutationTable::cached(k), q); },
        py::arg("k"), py::arg("q"), "Overlap matrix G(q) on S_k");
  m.def("weingarten_matrix",
        [](int k, int q) { return weingarten_matrix(PermutationTable::cached(k), q); },
        py::arg("k"), py::arg("q"), "Pseudo-inverse of the Gram matrix");
  m.def("noisy_weingarten",
        [](int k, int q, double eps) {
          return noisy_weingarten(PermutationTable::cached(k), q, eps);
        },
        py::arg("k"), py::arg("q"), py::arg("eps"),
        "Weingarten coefficients dressed by a depolarizing reset channel");
  m.def("transposition_adjacency",
        [](int k) { return transposition_adjacency(PermutationTable::cached(k)); }, py::arg("k"));
  m.def("fixed_point_field",
        [](int k) { return fixed_point_matrix(PermutationTable::cached(k)); }, py::arg("k"));

  // Channels.
  py::class_<KrausChannel>(m, "KrausChannel")
      .def_readonly("dim", &KrausChannel::dim)
      .def_readonly("label", &KrausChannel::label)
      .def_readonly("param", &KrausChannel::param)
      .def("cptp_residual", &KrausChannel::cptp_residual)
      .def("apply", &KrausChannel::apply, py::arg("rho"));
  m.def("identity_channel", &make_identity_channel, py::arg("dim"));
  m.def("depolarizing", &make_depolarizing, py::arg("dim"), py::arg("eps"));
  m.def("amplitude_damping", &make_amplitude_damping, py::arg("gamma"));
  m.def("projected_adjoint", &projected_adjoint, py::arg("channel"), py::arg("x"));
  m.def("lambda_weights",
        [](const KrausChannel& ch, int k) {
          return lambda_weights(ch, PermutationTable::cached(k));
        },
        py::arg("channel"), py::arg("k"));
  m.def("effective_epsilon", &effective_epsilon, py::arg("channel"));

  // Scaling-limit formulas.
  m.def("rescaled_moment",
        [](int k, double x, double eta) { return rescaled_moment(k, {x, eta}); }, py::arg("k"),
        py::arg("x"), py::arg("eta"), "E[w^k] = (1| exp(x A - eta P) |1)");
  m.def("xeb_scaling", [](double x, double eta) { return xeb_scaling({x, eta}); }, py::arg("x"),
        py::arg("eta"));
  m.def("delta_log_xeb", [](double x, double eta) { return delta_log_xeb({x, eta}); },
        py::arg("x"), py::arg("eta"));
  m.def("asymptotic_moment_short_depth",
        [](int k, double x, double eta) { return asymptotic_moment_short_depth(k, {x, eta}); },
        py::arg("k"), py::arg("x"), py::arg("eta"));
  m.def("asymptotic_moment_deep",
        [](int k, double x, double eta) { return asymptotic_moment_deep(k, {x, eta}); },
        py::arg("k"), py::arg("x"), py::arg("eta"));
  m.def("global_depolarizing_moment", &global_depolarizing_moment, py::arg("k"),
        py::arg("eps_glob"));
  m.def("spt_moment", &spt_moment, py::arg("k"), py::arg("eps"));
  m.def("pt_pdf", &pt_pdf, py::arg("w"));
  m.def("spt_pdf", &spt_pdf, py::arg("w"), py::arg("eps"));
  m.def("lognormal_pt_pdf", &lognormal_pt_pdf, py::arg("w"), py::arg("x"));

  // Exact RMPS transfer matrices.
  m.def("rmps_moment",
        [](const std::string& variant, int n_sites, int d, int r, int k,
           const KrausChannel* channel, double ladder_epsilon) {
          return rmps_moment(build_rmps_spec(variant, n_sites, d, r, channel, ladder_epsilon), k);
        },
        py::arg("variant"), py::arg("n_sites"), py::arg("d"), py::arg("r"), py::arg("k"),
        py::arg("channel") = nullptr, py::arg("ladder_epsilon") = 0.0,
        "Finite-size E[w^k] of the noisy staircase state");
  m.def("scaling_convergence_report",
        [](const std::string& variant, int k, double x, double eta, const std::vector<int>& n_list,
           int d) {
          const RmpsVariant v =
              variant == "physical" ? RmpsVariant::physical : RmpsVariant::ladder;
          py::list out;
          for (const auto& row : scaling_convergence_report(v, k, x, eta, n_list, d)) {
            py::dict rec;
            rec["n_sites"] = row.n_sites;
            rec["chi"] = row.chi;
            rec["x_attained"] = row.x_attained;
            rec["moment"] = row.moment;
            rec["prediction"] = row.prediction;
            rec["rel_dev"] = row.rel_dev;
            out.append(rec);
          }
          return out;
        },
        py::arg("variant"), py::arg("k"), py::arg("x"), py::arg("eta"), py::arg("n_list"),
        py::arg("d") = 2);

  // Brickwall replica contraction.
  m.def("xeb_brickwall_avg",
        [](int n_sites, int depth, int d, const KrausChannel* channel,
           const std::string& placement) {
          BrickwallSpec spec;
          spec.n_sites = n_sites;
          spec.depth = depth;
          spec.d = d;
          spec.channel = channel ? *channel : make_identity_channel(d * d);
          spec.placement = placement == "one_site" ? NoisePlacement::one_site_per_layer
                                                   : NoisePlacement::two_site_per_gate;
          return xeb_brickwall_avg(spec);
        },
        py::arg("n_sites"), py::arg("depth"), py::arg("d") = 2, py::arg("channel") = nullptr,
        py::arg("placement") = "two_site",
        "Exact circuit-averaged linear XEB of a noisy brickwall");
  m.def("ipr_brickwall_avg",
        [](int n_sites, int depth, int k, int d, const KrausChannel* channel,
           const std::string& placement) {
          BrickwallSpec spec;
          spec.n_sites = n_sites;
          spec.depth = depth;
          spec.d = d;
          spec.channel = channel ? *channel : make_identity_channel(d * d);
          spec.placement = placement == "one_site" ? NoisePlacement::one_site_per_layer
                                                   : NoisePlacement::two_site_per_gate;
          return ipr_brickwall_avg(spec, k);
        },
        py::arg("n_sites"), py::arg("depth"), py::arg("k"), py::arg("d") = 2,
        py::arg("channel") = nullptr, py::arg("placement") = "two_site",
        "Exact circuit-averaged I_k of a noisy brickwall (k <= 3)");

  // Monte Carlo.
  m.def("sample_rmps_w",
        [](const std::string& variant, int n_sites, int d, int r, const KrausChannel* channel,
           double ladder_epsilon, int n_circuits, int n_bits, std::uint64_t seed, int m_max,
           bool auto_m_max, int probe_repeats) {
          const RmpsSpec spec = build_rmps_spec(variant, n_sites, d, r, channel, ladder_epsilon);
          LadderSampleOptions opt;
          opt.m_max = m_max;
          opt.auto_m_max = auto_m_max;
          opt.probe_repeats = probe_repeats;
          const auto res = sample_rmps_overlaps(spec, n_circuits, n_bits, {seed, 0}, opt);
          Eigen::VectorXd w(static_cast<Eigen::Index>(res.samples.size()));
          for (std::size_t i = 0; i < res.samples.size(); ++i)
            w(static_cast<Eigen::Index>(i)) = res.samples[i].w;
          return py::make_tuple(w, res.tail_bound, res.m_max_used);
        },
        py::arg("variant"), py::arg("n_sites"), py::arg("d"), py::arg("r"),
        py::arg("channel") = nullptr, py::arg("ladder_epsilon") = 0.0, py::arg("n_circuits") = 100,
        py::arg("n_bits") = 10, py::arg("seed") = 0, py::arg("m_max") = 3,
        py::arg("auto_m_max") = false, py::arg("probe_repeats") = 1,
        "Bitstring overlap samples w; returns (w, tail_bound, m_max_used)");
  m.def("sample_haar_global_w",
        [](int dim, double eps_glob, int n_states, int n_bits, std::uint64_t seed) {
          const auto res = sample_haar_global(dim, eps_glob, n_states, n_bits, {seed, 0});
          Eigen::VectorXd w(static_cast<Eigen::Index>(res.samples.size()));
          for (std::size_t i = 0; i < res.samples.size(); ++i)
            w(static_cast<Eigen::Index>(i)) = res.samples[i].w;
          return py::make_tuple(w, res.xeb.mean, res.xeb.std_err);
        },
        py::arg("dim"), py::arg("eps_glob"), py::arg("n_states"), py::arg("n_bits"),
        py::arg("seed") = 0);

  // Gram-Charlier reconstruction.
  py::class_<GramCharlierModel>(m, "GramCharlierModel")
      .def_readonly("mu", &GramCharlierModel::mu)
      .def_readonly("sigma", &GramCharlierModel::sigma)
      .def_readonly("hermite_coeffs", &GramCharlierModel::hermite_coeffs)
      .def_readonly("residuals", &GramCharlierModel::residuals)
      .def("model_moment", &GramCharlierModel::model_moment, py::arg("k"));
  m.def("fit_gram_charlier",
        [](const std::vector<double>& moments, int order) {
          MomentVector m;
          m.values = moments;
          return fit_gram_charlier(m, order);
        },
        py::arg("moments"), py::arg("order") = 4,
        "Fit the log-w Hermite series to E[w^k], k = 1..len(moments)");
  m.def("pop_prediction",
        [](double x, double eta, int order, int k_max) {
          PopPredictOptions opt;
          opt.order = order;
          opt.k_max = k_max;
          const PopPrediction pred = pop_prediction({x, eta}, opt);
          const auto n = static_cast<Eigen::Index>(pred.curve.w.size());
          Eigen::VectorXd w(n), pdf(n), pdf_log(n);
          for (Eigen::Index i = 0; i < n; ++i) {
            w(i) = pred.curve.w[static_cast<std::size_t>(i)];
            pdf(i) = pred.curve.pdf_w[static_cast<std::size_t>(i)];
            pdf_log(i) = pred.curve.pdf_log[static_cast<std::size_t>(i)];
          }
          return py::make_tuple(w, pdf, pdf_log, pred.curve.method);
        },
        py::arg("x"), py::arg("eta"), py::arg("order") = 4, py::arg("k_max") = 6,
        "Universal PoP density; returns (w, pdf, pdf_log_w, method)");

  // Parameter extraction.
  m.def("extract_eta",
        [](const std::vector<double>& deep) {
          const EtaFit fit = extract_eta(deep);
          return py::make_tuple(fit.eta_hat, fit.plateau_mean, fit.rel_spread);
        },
        py::arg("deep_xeb_values"), "Returns (eta_hat, plateau_mean, rel_spread)");
  m.def("invert_xeb_for_x",
        [](double xeb_value, double eta) {
          const XInversion inv = invert_xeb_for_x(xeb_value, eta);
          return py::make_tuple(inv.x, inv.clamped_at_floor);
        },
        py::arg("xeb_value"), py::arg("eta"));
  m.def("fit_tau",
        [](const std::vector<int>& n_sites, const std::vector<double>& t,
           const std::vector<double>& x_hat) {
          if (n_sites.size() != t.size() || t.size() != x_hat.size())
            throw std::invalid_argument("fit_tau: length mismatch");
          std::vector<TauFitPoint> pts(n_sites.size());
          for (std::size_t i = 0; i < pts.size(); ++i)
            pts[i] = {n_sites[i], t[i], x_hat[i]};
          const FitResult fit = fit_tau(pts);
          py::dict out;
          out["tau_hat"] = fit.tau_hat;
          out["n0_hat"] = fit.n0_hat;
          out["log_c"] = fit.log_c;
          out["residual_rms"] = fit.residual_rms;
          return out;
        },
        py::arg("n_sites"), py::arg("t"), py::arg("x_hat"));
}
