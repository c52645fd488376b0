// Command-line front end: `gen` simulates a dataset from a graph-space
// prior draw, `bench` runs the synthetic estimator benchmark, `estimate`
// computes a single MIE estimate, `ate` a single average treatment effect.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cbma/cbma.hpp"

namespace {

struct CommonFlags {
  double tau = 1.0;
  double noise_precision = 1.0;
  double kappa = 1e-6;
  double nu = 1e-6;
  int vb_max_iter = 5000;
  double vb_tol = 1e-6;
  int mc_samples = 1000;
};

void add_model_flags(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--tau", flags->tau, "prior variance of each coefficient");
  cmd->add_option("--noise-precision", flags->noise_precision,
                  "known noise precision s_eps");
  cmd->add_option("--kappa", flags->kappa, "gamma hyperprior shape");
  cmd->add_option("--nu", flags->nu, "gamma hyperprior rate");
  cmd->add_option("--vb-max-iter", flags->vb_max_iter, "VB iteration cap");
  cmd->add_option("--vb-tol", flags->vb_tol, "VB convergence threshold");
  cmd->add_option("--mc-samples", flags->mc_samples,
                  "Monte Carlo samples per candidate (method mc)");
}

cbma::PriorConfig prior_of(const CommonFlags& f) {
  return {f.tau, f.noise_precision};
}

cbma::VBConfig vb_of(const CommonFlags& f) {
  cbma::VBConfig cfg;
  cfg.kappa = f.kappa;
  cfg.nu = f.nu;
  cfg.noise_precision = f.noise_precision;
  cfg.max_iter = f.vb_max_iter;
  cfg.tol = f.vb_tol;
  return cfg;
}

std::vector<cbma::Estimator> parse_estimators(const std::string& csv) {
  std::vector<cbma::Estimator> out;
  std::string token;
  std::stringstream ss(csv);
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) out.push_back(cbma::parse_estimator(token));
  }
  if (out.empty()) throw CLI::ValidationError("--estimators", "empty list");
  return out;
}

void load_config_file(const std::string& path, cbma::ExperimentConfig* cfg) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json doc;
  in >> doc;
  if (doc.contains("n1")) cfg->n1 = doc["n1"].get<int>();
  if (doc.contains("n2")) cfg->n2 = doc["n2"].get<int>();
  if (doc.contains("edge_prob")) cfg->edge_prob = doc["edge_prob"].get<double>();
  if (doc.contains("include_direct_xy")) {
    cfg->include_direct_xy = doc["include_direct_xy"].get<bool>();
  }
  if (doc.contains("sample_sizes")) {
    cfg->sample_sizes = doc["sample_sizes"].get<std::vector<int>>();
  }
  if (doc.contains("trials")) cfg->trials = doc["trials"].get<int>();
  if (doc.contains("master_seed")) {
    cfg->master_seed = doc["master_seed"].get<std::uint64_t>();
  }
  if (doc.contains("estimators")) {
    cfg->estimators.clear();
    for (const auto& e : doc["estimators"]) {
      cfg->estimators.push_back(cbma::parse_estimator(e.get<std::string>()));
    }
  }
  if (doc.contains("tau")) cfg->prior.coeff_var = doc["tau"].get<double>();
  if (doc.contains("noise_precision")) {
    cfg->prior.noise_precision = doc["noise_precision"].get<double>();
  }
  if (doc.contains("kappa")) cfg->vb.kappa = doc["kappa"].get<double>();
  if (doc.contains("nu")) cfg->vb.nu = doc["nu"].get<double>();
  if (doc.contains("vb_max_iter")) cfg->vb.max_iter = doc["vb_max_iter"].get<int>();
  if (doc.contains("vb_tol")) cfg->vb.tol = doc["vb_tol"].get<double>();
  if (doc.contains("x_value")) cfg->x_value = doc["x_value"].get<double>();
  if (doc.contains("mc_samples")) cfg->mc_samples = doc["mc_samples"].get<int>();
}

std::vector<std::string> split_names(const std::string& csv) {
  std::vector<std::string> out;
  std::string token;
  std::stringstream ss(csv);
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) out.push_back(token);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian model averaging for causal effect estimation"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand(
      "gen", "sample a model from a graph-space prior and simulate a dataset");
  std::string gen_space, gen_out;
  int gen_n = 0;
  std::uint64_t gen_seed = 0;
  CommonFlags gen_flags;
  gen->add_option("--space", gen_space, "graph-space JSON file")->required();
  gen->add_option("--n", gen_n, "number of samples")->required();
  gen->add_option("--seed", gen_seed, "RNG seed")->required();
  gen->add_option("--out", gen_out, "output dataset CSV")->required();
  add_model_flags(gen, &gen_flags);

  // bench
  auto* bench = app.add_subcommand("bench", "run the synthetic benchmark");
  std::string bench_config, bench_out = "report.csv", bench_estimators;
  std::string bench_sizes;
  int bench_n1 = 2, bench_n2 = 2, bench_trials = 1;
  double bench_edge_prob = 0.5, bench_x_value = 1.0;
  std::uint64_t bench_seed = 0;
  bool bench_no_direct = false;
  bench->add_option("--config", bench_config, "JSON config file");
  auto* opt_n1 = bench->add_option("--n1", bench_n1, "number of W covariates");
  auto* opt_n2 = bench->add_option("--n2", bench_n2, "number of Z covariates");
  auto* opt_p =
      bench->add_option("--edge-prob", bench_edge_prob, "edge probability");
  bench->add_flag("--no-direct-xy", bench_no_direct,
                  "drop the direct X->Y candidate edge");
  bench->add_option("--sample-sizes", bench_sizes,
                    "comma-separated N values (default 25,50,100,200)");
  auto* opt_trials =
      bench->add_option("--trials", bench_trials, "trials per configuration");
  bench->add_option("--seed", bench_seed, "master seed")->required();
  bench->add_option("--estimators", bench_estimators,
                    "comma-separated subset of quasi,mc,vb,k2,full,ipw");
  auto* opt_xv =
      bench->add_option("--x-value", bench_x_value, "intervention value");
  CommonFlags bench_flags;
  add_model_flags(bench, &bench_flags);
  bench->add_option("--out", bench_out, "report CSV path");

  // estimate
  auto* est = app.add_subcommand(
      "estimate", "estimate the mean intervention effect from a dataset");
  std::string est_data, est_space, est_method = "vb", est_x = "X", est_y = "Y";
  std::string est_center;
  double est_x_value = 1.0;
  std::uint64_t est_seed = 0;
  CommonFlags est_flags;
  est->add_option("--data", est_data, "dataset CSV")->required();
  est->add_option("--space", est_space, "graph-space JSON file")->required();
  est->add_option("--method", est_method, "quasi|mc|vb|k2|full")->required();
  est->add_option("--x", est_x, "treatment variable name")->required();
  est->add_option("--y", est_y, "outcome variable name")->required();
  est->add_option("--x-value", est_x_value, "intervention value");
  est->add_option("--seed", est_seed, "RNG seed (method mc)");
  est->add_option("--center", est_center, "comma-separated columns to center");
  add_model_flags(est, &est_flags);

  // ate
  auto* ate = app.add_subcommand(
      "ate", "estimate the average treatment effect of a binary treatment");
  std::string ate_data, ate_treatment, ate_outcome, ate_covariates;
  std::string ate_method = "vb", ate_center;
  double ate_edge_prob = 0.5, ate_lambda = -1.0;
  CommonFlags ate_flags;
  ate->add_option("--data", ate_data, "dataset CSV")->required();
  ate->add_option("--treatment", ate_treatment, "treatment column")->required();
  ate->add_option("--outcome", ate_outcome, "outcome column")->required();
  ate->add_option("--covariates", ate_covariates,
                  "comma-separated covariate columns")
      ->required();
  ate->add_option("--method", ate_method, "vb|quasi|k2|full|ipw")->required();
  ate->add_option("--edge-prob", ate_edge_prob,
                  "prior probability of each candidate edge");
  ate->add_option("--lambda", ate_lambda,
                  "l1 penalty for the propensity fit (default 1/sqrt(N))");
  ate->add_option("--center", ate_center, "comma-separated columns to center");
  add_model_flags(ate, &ate_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const cbma::CandidateSpace space = cbma::load_space(gen_space);
      const cbma::LinearScm model = cbma::sample_model(
          space, gen_flags.tau, gen_flags.noise_precision,
          cbma::derive_seed(gen_seed, {1}));
      const cbma::Dataset data =
          cbma::simulate(model, gen_n, cbma::derive_seed(gen_seed, {2}));
      cbma::save_csv_dataset(data, gen_out);
      std::cerr << "wrote " << data.sample_count() << " samples of "
                << data.column_count() << " variables to " << gen_out << "\n";
    } else if (bench->parsed()) {
      cbma::ExperimentConfig cfg;
      cfg.sample_sizes = {25, 50, 100, 200};
      cfg.estimators = {cbma::Estimator::Vb, cbma::Estimator::K2,
                        cbma::Estimator::Full};
      if (!bench_config.empty()) load_config_file(bench_config, &cfg);
      // explicit flags override the config file
      if (opt_n1->count()) cfg.n1 = bench_n1;
      if (opt_n2->count()) cfg.n2 = bench_n2;
      if (opt_p->count()) cfg.edge_prob = bench_edge_prob;
      if (opt_trials->count()) cfg.trials = bench_trials;
      if (opt_xv->count()) cfg.x_value = bench_x_value;
      cfg.master_seed = bench_seed;
      if (!bench_estimators.empty()) cfg.estimators = parse_estimators(bench_estimators);
      if (!bench_sizes.empty()) {
        cfg.sample_sizes.clear();
        for (const std::string& tok : split_names(bench_sizes)) {
          cfg.sample_sizes.push_back(std::stoi(tok));
        }
      }
      if (bench_no_direct) cfg.include_direct_xy = false;
      for (auto* opt : {bench->get_option("--tau")}) {
        if (opt->count()) cfg.prior.coeff_var = bench_flags.tau;
      }
      if (bench->get_option("--noise-precision")->count()) {
        cfg.prior.noise_precision = bench_flags.noise_precision;
        cfg.vb.noise_precision = bench_flags.noise_precision;
      }
      if (bench->get_option("--kappa")->count()) cfg.vb.kappa = bench_flags.kappa;
      if (bench->get_option("--nu")->count()) cfg.vb.nu = bench_flags.nu;
      if (bench->get_option("--vb-max-iter")->count()) {
        cfg.vb.max_iter = bench_flags.vb_max_iter;
      }
      if (bench->get_option("--vb-tol")->count()) cfg.vb.tol = bench_flags.vb_tol;
      if (bench->get_option("--mc-samples")->count()) {
        cfg.mc_samples = bench_flags.mc_samples;
      }
      const cbma::BenchmarkReport report = cbma::run_benchmark(cfg);
      cbma::emit_report(report, bench_out);
      std::cerr << "wrote " << report.rows.size() << " rows to " << bench_out
                << "\n";
    } else if (est->parsed()) {
      cbma::ColumnSpec spec;
      spec.center = split_names(est_center);
      const cbma::Dataset data = cbma::load_csv_dataset(est_data, spec);
      const cbma::CandidateSpace space = cbma::load_space(est_space);
      const cbma::PriorConfig prior = prior_of(est_flags);
      double value = 0.0;
      const cbma::Estimator method = cbma::parse_estimator(est_method);
      switch (method) {
        case cbma::Estimator::Quasi:
          value = cbma::bma_mie_quasi(space, data, prior, est_x, est_y,
                                      est_x_value);
          break;
        case cbma::Estimator::Mc:
          value = cbma::bma_mie_mc(space, data, prior, est_x, est_y,
                                   est_x_value, est_flags.mc_samples, est_seed)
                      .value;
          break;
        case cbma::Estimator::Vb: {
          const auto states = cbma::vb_fit_all(data, space, vb_of(est_flags));
          value = cbma::vb_mie(states, space, est_x, est_y, est_x_value);
          break;
        }
        case cbma::Estimator::K2: {
          const cbma::K2Trace trace = cbma::k2_search(space, data, prior);
          value = cbma::estimate_via_graph(trace.selected, data, prior, est_x,
                                           est_y, est_x_value);
          break;
        }
        case cbma::Estimator::Full:
          value = cbma::estimate_via_graph(space.dag_full, data, prior, est_x,
                                           est_y, est_x_value);
          break;
        default:
          throw std::runtime_error("estimate supports quasi, mc, vb, k2, full");
      }
      std::printf("%.12g\n", value);
    } else if (ate->parsed()) {
      cbma::ColumnSpec spec;
      spec.center = split_names(ate_center);
      const cbma::Dataset data = cbma::load_csv_dataset(ate_data, spec);
      cbma::AteOptions opt;
      opt.prior = prior_of(ate_flags);
      opt.vb = vb_of(ate_flags);
      opt.edge_prob = ate_edge_prob;
      opt.l1_penalty = ate_lambda;
      const double value =
          cbma::estimate_ate(data, ate_treatment, ate_outcome,
                             split_names(ate_covariates),
                             cbma::parse_estimator(ate_method), opt);
      std::printf("%.12g\n", value);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
