#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbma/bma.hpp"
#include "cbma/candidate_space.hpp"
#include "cbma/dataset.hpp"
#include "cbma/effects.hpp"
#include "cbma/ipw.hpp"
#include "cbma/k2.hpp"
#include "cbma/posterior.hpp"
#include "cbma/rng.hpp"
#include "cbma/scm.hpp"
#include "cbma/vb.hpp"

namespace cbma {

enum class Estimator { Quasi, Mc, Vb, K2, Full, Ipw };

inline const char* estimator_name(Estimator e) {
  switch (e) {
    case Estimator::Quasi: return "quasi";
    case Estimator::Mc: return "mc";
    case Estimator::Vb: return "vb";
    case Estimator::K2: return "k2";
    case Estimator::Full: return "full";
    case Estimator::Ipw: return "ipw";
  }
  throw std::invalid_argument("unknown estimator");
}

inline Estimator parse_estimator(const std::string& name) {
  for (Estimator e : {Estimator::Quasi, Estimator::Mc, Estimator::Vb,
                      Estimator::K2, Estimator::Full, Estimator::Ipw}) {
    if (name == estimator_name(e)) return e;
  }
  throw std::invalid_argument("unknown estimator name: " + name);
}

struct ExperimentConfig {
  int n1 = 2;
  int n2 = 2;
  double edge_prob = 0.5;
  bool include_direct_xy = true;
  std::vector<int> sample_sizes;
  int trials = 1;
  std::uint64_t master_seed = 0;
  std::vector<Estimator> estimators;
  PriorConfig prior;
  VBConfig vb;
  double x_value = 1.0;
  int mc_samples = 1000;

  void validate() const {
    if (n1 < 0 || n2 < 0) throw std::invalid_argument("n1, n2 must be >= 0");
    if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) {
      throw std::invalid_argument("edge_prob outside [0,1]");
    }
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (sample_sizes.empty()) throw std::invalid_argument("no sample sizes");
    for (int n : sample_sizes) {
      if (n < 2) throw std::invalid_argument("sample sizes must be >= 2");
    }
    if (mc_samples < 1) throw std::invalid_argument("mc_samples must be >= 1");
    prior.validate();
    vb.validate();
  }
};

struct BenchmarkRow {
  std::string estimator;
  int sample_size = 0;
  double mean_squared_error = 0.0;
  double std_error = 0.0;
  int trials = 0;  // trials aggregated (failures are excluded)
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;  // sorted by (estimator, N)
  std::string provenance;          // config echo incl. master seed
};

// Benchmark graph family: covariates W_1..W_n1 are possible common causes of
// X and Y, X has possible indirect effects on Y through Z_1..Z_n2, W's may
// also feed the Z's, and optionally a direct X->Y edge. All edges share the
// probability p.
inline CandidateSpace build_wz_space(int n1, int n2, double p,
                                     bool include_direct_xy) {
  if (n1 < 0 || n2 < 0) throw std::invalid_argument("n1, n2 must be >= 0");
  std::vector<std::string> nodes;
  for (int i = 1; i <= n1; ++i) nodes.push_back("W" + std::to_string(i));
  const int x = n1;
  nodes.push_back("X");
  for (int i = 1; i <= n2; ++i) nodes.push_back("Z" + std::to_string(i));
  const int y = n1 + n2 + 1;
  nodes.push_back("Y");

  std::vector<Edge> edges;
  for (int w = 0; w < n1; ++w) {
    edges.push_back({w, x});
    edges.push_back({w, y});
    for (int z = 0; z < n2; ++z) edges.push_back({w, x + 1 + z});
  }
  for (int z = 0; z < n2; ++z) {
    edges.push_back({x, x + 1 + z});
    edges.push_back({x + 1 + z, y});
  }
  if (include_direct_xy) edges.push_back({x, y});
  return CandidateSpace(Dag(std::move(nodes), std::move(edges)), p);
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string config_echo(const ExperimentConfig& cfg) {
  std::string s;
  s += "n1=" + std::to_string(cfg.n1);
  s += " n2=" + std::to_string(cfg.n2);
  s += " edge_prob=" + format_double(cfg.edge_prob);
  s += std::string(" include_direct_xy=") + (cfg.include_direct_xy ? "1" : "0");
  s += " sample_sizes=";
  for (std::size_t i = 0; i < cfg.sample_sizes.size(); ++i) {
    s += (i ? "," : "") + std::to_string(cfg.sample_sizes[i]);
  }
  s += " trials=" + std::to_string(cfg.trials);
  s += " master_seed=" + std::to_string(cfg.master_seed);
  s += " estimators=";
  for (std::size_t i = 0; i < cfg.estimators.size(); ++i) {
    s += (i ? "," : "") + std::string(estimator_name(cfg.estimators[i]));
  }
  s += " tau=" + format_double(cfg.prior.coeff_var);
  s += " noise_precision=" + format_double(cfg.prior.noise_precision);
  s += " kappa=" + format_double(cfg.vb.kappa);
  s += " nu=" + format_double(cfg.vb.nu);
  s += " vb_max_iter=" + std::to_string(cfg.vb.max_iter);
  s += " vb_tol=" + format_double(cfg.vb.tol);
  s += " x_value=" + format_double(cfg.x_value);
  s += " mc_samples=" + std::to_string(cfg.mc_samples);
  return s;
}

inline double run_estimator(Estimator est, const CandidateSpace& space,
                            const Dataset& data, const ExperimentConfig& cfg,
                            std::uint64_t seed) {
  switch (est) {
    case Estimator::Quasi:
      return bma_mie_quasi(space, data, cfg.prior, "X", "Y", cfg.x_value);
    case Estimator::Mc:
      return bma_mie_mc(space, data, cfg.prior, "X", "Y", cfg.x_value,
                        cfg.mc_samples, seed)
          .value;
    case Estimator::Vb: {
      VBConfig vb_cfg = cfg.vb;
      vb_cfg.noise_precision = cfg.prior.noise_precision;
      const auto states = vb_fit_all(data, space, vb_cfg);
      return vb_mie(states, space, "X", "Y", cfg.x_value);
    }
    case Estimator::K2: {
      const K2Trace trace = k2_search(space, data, cfg.prior);
      return estimate_via_graph(trace.selected, data, cfg.prior, "X", "Y",
                                cfg.x_value);
    }
    case Estimator::Full:
      return estimate_via_graph(space.dag_full, data, cfg.prior, "X", "Y",
                                cfg.x_value);
    case Estimator::Ipw: {
      std::vector<std::string> covariates;
      for (const std::string& c : data.columns) {
        if (c != "X" && c != "Y") covariates.push_back(c);
      }
      return ipw_ate(data, "X", "Y", covariates,
                     1.0 / std::sqrt(double(data.sample_count())));
    }
  }
  throw std::invalid_argument("unknown estimator");
}

}  // namespace detail

// Runs the synthetic benchmark: per trial a true model is drawn from the
// assumed prior, datasets of each size are simulated, and every requested
// estimator's squared error against the true total effect times x_value is
// recorded. Trial t depends only on (master_seed, t), so reports are fully
// deterministic and dropping an estimator does not disturb the others.
// Estimator failures exclude that trial from that estimator's aggregate.
inline BenchmarkReport run_benchmark(const ExperimentConfig& cfg) {
  cfg.validate();
  const CandidateSpace space =
      build_wz_space(cfg.n1, cfg.n2, cfg.edge_prob, cfg.include_direct_xy);
  std::vector<Estimator> estimators;
  for (Estimator e : cfg.estimators) {
    if (std::find(estimators.begin(), estimators.end(), e) == estimators.end()) {
      estimators.push_back(e);
    }
    if (e == Estimator::Quasi || e == Estimator::Mc) {
      check_enumeration_cap(space, kEnumerationCap);
    }
  }

  std::map<std::pair<std::string, int>, std::vector<double>> errors;
  for (Estimator e : estimators) {
    for (int n : cfg.sample_sizes) errors[{estimator_name(e), n}];
  }

  for (int t = 0; t < cfg.trials; ++t) {
    const LinearScm truth =
        sample_model(space, cfg.prior.coeff_var, cfg.prior.noise_precision,
                     derive_seed(cfg.master_seed, {1, std::uint64_t(t)}));
    const double true_mie =
        total_effect(truth.dag, truth.weights, "X", "Y") * cfg.x_value;
    for (int n : cfg.sample_sizes) {
      const Dataset data = simulate(
          truth, n,
          derive_seed(cfg.master_seed, {2, std::uint64_t(t), std::uint64_t(n)}));
      for (Estimator est : estimators) {
        const std::uint64_t est_seed =
            derive_seed(cfg.master_seed, {3, std::uint64_t(t), std::uint64_t(n),
                                          std::uint64_t(est)});
        try {
          const double v = detail::run_estimator(est, space, data, cfg, est_seed);
          const double err = v - true_mie;
          errors[{estimator_name(est), n}].push_back(err * err);
        } catch (const std::exception&) {
          // excluded from this estimator's aggregate; visible in the
          // report through the per-row trial count
        }
      }
    }
  }

  BenchmarkReport report;
  report.provenance = detail::config_echo(cfg);
  for (const auto& [key, errs] : errors) {
    BenchmarkRow row;
    row.estimator = key.first;
    row.sample_size = key.second;
    row.trials = static_cast<int>(errs.size());
    if (!errs.empty()) {
      double mean = 0.0;
      for (double e : errs) mean += e;
      mean /= double(errs.size());
      double var = 0.0;
      for (double e : errs) var += (e - mean) * (e - mean);
      row.mean_squared_error = mean;
      row.std_error = errs.size() > 1
                          ? std::sqrt(var / double(errs.size() - 1) /
                                      double(errs.size()))
                          : 0.0;
    } else {
      row.mean_squared_error = std::nan("");
      row.std_error = std::nan("");
    }
    report.rows.push_back(std::move(row));
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const BenchmarkRow& a, const BenchmarkRow& b) {
              return a.estimator != b.estimator ? a.estimator < b.estimator
                                                : a.sample_size < b.sample_size;
            });
  return report;
}

// Writes the report as CSV with a fixed header and a leading comment line
// echoing the config and master seed. Byte-identical for identical configs.
inline void emit_report(const BenchmarkReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report file: " + path);
  out << "# " << report.provenance << "\n";
  out << "estimator,N,mse,stderr,trials\n";
  for (const BenchmarkRow& row : report.rows) {
    out << row.estimator << "," << row.sample_size << ","
        << detail::format_double(row.mean_squared_error) << ","
        << detail::format_double(row.std_error) << "," << row.trials << "\n";
  }
  if (!out) throw std::runtime_error("write failure on " + path);
}

struct AteOptions {
  PriorConfig prior;
  VBConfig vb;
  double edge_prob = 0.5;     // prior probability of each candidate edge
  double l1_penalty = -1.0;   // ipw only; < 0 means 1/sqrt(N)
};

// ATE of a binary treatment: for the SCM methods the candidate space has
// every covariate as a possible common cause of treatment and outcome plus a
// direct treatment->outcome edge, and the ATE is the total-effect
// coefficient (intervention values 1 and 0). For ipw this delegates to the
// Horvitz-Thompson estimator.
inline double estimate_ate(const Dataset& data, const std::string& treatment,
                           const std::string& outcome,
                           const std::vector<std::string>& covariates,
                           Estimator method, const AteOptions& opt = {}) {
  if (method == Estimator::Ipw) {
    const double lambda = opt.l1_penalty >= 0.0
                              ? opt.l1_penalty
                              : 1.0 / std::sqrt(double(data.sample_count()));
    return ipw_ate(data, treatment, outcome, covariates, lambda);
  }

  std::vector<std::string> nodes = covariates;
  nodes.push_back(treatment);
  nodes.push_back(outcome);
  const int n_cov = static_cast<int>(covariates.size());
  const int x = n_cov;
  const int y = n_cov + 1;
  std::vector<Edge> edges;
  for (int w = 0; w < n_cov; ++w) {
    edges.push_back({w, x});
    edges.push_back({w, y});
  }
  edges.push_back({x, y});
  const CandidateSpace space(Dag(std::move(nodes), std::move(edges)),
                             opt.edge_prob);

  switch (method) {
    case Estimator::Vb: {
      VBConfig vb_cfg = opt.vb;
      vb_cfg.noise_precision = opt.prior.noise_precision;
      const auto states = vb_fit_all(data, space, vb_cfg);
      return vb_mie(states, space, treatment, outcome, 1.0);
    }
    case Estimator::Quasi:
      return bma_mie_quasi(space, data, opt.prior, treatment, outcome, 1.0);
    case Estimator::K2: {
      const K2Trace trace = k2_search(space, data, opt.prior);
      return estimate_via_graph(trace.selected, data, opt.prior, treatment,
                                outcome, 1.0);
    }
    case Estimator::Full:
      return estimate_via_graph(space.dag_full, data, opt.prior, treatment,
                                outcome, 1.0);
    default:
      throw std::invalid_argument(
          "estimate_ate supports vb, quasi, k2, full, ipw");
  }
}

}  // namespace cbma
