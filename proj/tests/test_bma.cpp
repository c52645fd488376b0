#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "cbma/bma.hpp"
#include "cbma/effects.hpp"
#include "cbma/scm.hpp"

using cbma::CandidateSpace;
using cbma::Dag;
using cbma::Dataset;
using cbma::Edge;
using cbma::PriorConfig;

namespace {

Dataset standard_normal_data(int n, const std::vector<std::string>& names,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd values(n, names.size());
  for (int i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < names.size(); ++j) values(i, j) = normal(rng);
  }
  return Dataset(names, std::move(values));
}

}  // namespace

TEST_CASE("graph posterior: p = 1 pins the full graph") {
  const CandidateSpace space(Dag({"a", "b", "c"}, {{0, 1}, {1, 2}}), 1.0);
  const Dataset data = standard_normal_data(30, {"a", "b", "c"}, 1);
  const auto post = cbma::graph_posterior(space, data, PriorConfig{});
  REQUIRE(post.weights.size() == 4);
  REQUIRE_THAT(post.weights[3], Catch::Matchers::WithinAbs(1.0, 1e-12));
  REQUIRE_THAT(post.weights[0] + post.weights[1] + post.weights[2],
               Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("graph posterior: p = 0 pins the empty graph") {
  const CandidateSpace space(Dag({"a", "b", "c"}, {{0, 1}, {0, 2}}), 0.0);
  const Dataset data = standard_normal_data(25, {"a", "b", "c"}, 2);
  const auto post = cbma::graph_posterior(space, data, PriorConfig{});
  REQUIRE_THAT(post.weights[0], Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("graph posterior: identical evidence splits 50/50") {
  // an all-zero parent column makes the with-edge and without-edge
  // evidences coincide exactly
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(20, 2);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < 20; ++i) values(i, 1) = normal(rng);
  const Dataset data({"a", "b"}, values);
  const CandidateSpace space(Dag({"a", "b"}, {{0, 1}}), 0.5);
  const auto post = cbma::graph_posterior(space, data, PriorConfig{});
  REQUIRE_THAT(post.weights[0], Catch::Matchers::WithinAbs(0.5, 1e-12));
  REQUIRE_THAT(post.weights[1], Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("graph posterior weights always sum to one") {
  const CandidateSpace space(
      Dag({"a", "b", "c", "d"}, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}), 0.3);
  for (std::uint64_t seed : {4u, 5u, 6u}) {
    const Dataset data = standard_normal_data(40, {"a", "b", "c", "d"}, seed);
    const auto post = cbma::graph_posterior(space, data, PriorConfig{});
    double total = 0.0;
    for (double w : post.weights) total += w;
    REQUIRE_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("graph posterior log weights match the assembled parts") {
  const CandidateSpace space(Dag({"a", "b", "c"}, {{0, 1}, {0, 2}, {1, 2}}), 0.4);
  const Dataset data = standard_normal_data(35, {"a", "b", "c"}, 7);
  const PriorConfig prior{0.8, 1.5};
  const auto post = cbma::graph_posterior(space, data, prior);
  for (std::uint64_t mask = 0; mask < post.size(); ++mask) {
    const Dag g = post.graph(mask);
    const double expected = cbma::log_marginal_graph(data, g, prior) +
                            std::log(cbma::graph_prior(space, g));
    REQUIRE_THAT(post.log_weights[mask],
                 Catch::Matchers::WithinAbs(expected, 1e-9));
  }
}

TEST_CASE("quasi estimator on a single-candidate space is the plug-in") {
  const CandidateSpace space(Dag({"X", "Y"}, {{0, 1}}), 1.0);
  cbma::LinearScm scm(space.dag_full, {1.5}, 1.0);
  const Dataset data = cbma::simulate(scm, 300, 11);
  const PriorConfig prior{};
  const double quasi = cbma::bma_mie_quasi(space, data, prior, "X", "Y", 2.0);
  const auto post = cbma::node_posterior(data, 1, {0}, prior);
  REQUIRE_THAT(quasi, Catch::Matchers::WithinAbs(post.mean(0) * 2.0, 1e-12));
}

TEST_CASE("quasi estimator is zero when no candidate has an x-y path") {
  const CandidateSpace space(Dag({"X", "Y", "a"}, {{0, 2}, {1, 2}}), 0.5);
  const Dataset data = standard_normal_data(50, {"X", "Y", "a"}, 13);
  REQUIRE(cbma::bma_mie_quasi(space, data, PriorConfig{}, "X", "Y", 1.0) == 0.0);
}

TEST_CASE("quasi estimator matches the explicit four-candidate sum") {
  // two-edge space x -> z -> y enumerates to {}, {xz}, {zy}, {xz, zy}
  const CandidateSpace space(Dag({"x", "z", "y"}, {{0, 1}, {1, 2}}), 0.5);
  cbma::LinearScm scm(space.dag_full, {1.2, -0.8}, 1.0);
  const Dataset data = cbma::simulate(scm, 200, 17);
  const PriorConfig prior{};

  const double quasi = cbma::bma_mie_quasi(space, data, prior, "x", "y", 1.0);

  // hand enumeration: only the both-edges candidate links x to y
  double weights[4];
  double log_w[4];
  for (std::uint64_t mask = 0; mask < 4; ++mask) {
    const Dag g = cbma::subgraph(space, mask);
    log_w[mask] = cbma::log_marginal_graph(data, g, prior) +
                  std::log(cbma::graph_prior(space, g));
  }
  const double max_lw = *std::max_element(log_w, log_w + 4);
  double total = 0.0;
  for (int i = 0; i < 4; ++i) {
    weights[i] = std::exp(log_w[i] - max_lw);
    total += weights[i];
  }
  const double mu_xz = cbma::node_posterior(data, 1, {0}, prior).mean(0);
  const double mu_zy = cbma::node_posterior(data, 2, {1}, prior).mean(0);
  const double expected = (weights[3] / total) * mu_xz * mu_zy;
  REQUIRE_THAT(quasi, Catch::Matchers::WithinAbs(expected, 1e-12));
}

TEST_CASE("quasi estimator agrees with a naive enumeration replay") {
  // replay in reversed enumeration order from assembled parts; also checks
  // order invariance of the weighted sum
  std::mt19937_64 rng(19);
  std::normal_distribution<double> coeff(0.0, 1.0);
  const CandidateSpace space(Dag({"X", "m", "Y"}, {{0, 1}, {0, 2}, {1, 2}}), 0.35);
  std::vector<double> weights(3);
  for (double& w : weights) w = coeff(rng);
  const cbma::LinearScm scm(space.dag_full, weights, 1.0);
  const Dataset data = cbma::simulate(scm, 150, 23);
  const PriorConfig prior{};

  const double quasi = cbma::bma_mie_quasi(space, data, prior, "X", "Y", 1.0);

  double num = 0.0, den = 0.0;
  const auto graphs = cbma::enumerate_candidates(space);
  for (auto it = graphs.rbegin(); it != graphs.rend(); ++it) {
    const Dag& g = *it;
    const double w = std::exp(cbma::log_marginal_graph(data, g, prior)) *
                     cbma::graph_prior(space, g);
    const auto parents = g.parent_lists();
    std::vector<double> mu(g.edges.size());
    for (int j = 0; j < g.node_count(); ++j) {
      if (parents[j].empty()) continue;
      const auto post = cbma::node_posterior(data, j, parents[j], prior);
      for (std::size_t i = 0; i < parents[j].size(); ++i) {
        const Edge e{parents[j][i], j};
        const auto pos = std::lower_bound(g.edges.begin(), g.edges.end(), e);
        mu[pos - g.edges.begin()] = post.mean(i);
      }
    }
    num += w * cbma::total_effect(g, mu, "X", "Y");
    den += w;
  }
  REQUIRE_THAT(quasi, Catch::Matchers::WithinAbs(num / den, 1e-10));
}

TEST_CASE("mc estimator: zero when no path exists") {
  const CandidateSpace space(Dag({"X", "Y", "a"}, {{1, 2}}), 0.5);
  const Dataset data = standard_normal_data(40, {"X", "Y", "a"}, 29);
  const auto mc =
      cbma::bma_mie_mc(space, data, PriorConfig{}, "X", "Y", 1.0, 200, 5);
  REQUIRE(mc.value == 0.0);
  REQUIRE(mc.std_error == 0.0);
}

TEST_CASE("mc estimator is deterministic given the seed") {
  const CandidateSpace space(Dag({"X", "z", "Y"}, {{0, 1}, {1, 2}, {0, 2}}), 0.5);
  const Dataset data = standard_normal_data(60, {"X", "z", "Y"}, 31);
  const auto a = cbma::bma_mie_mc(space, data, PriorConfig{}, "X", "Y", 1.0, 500, 77);
  const auto b = cbma::bma_mie_mc(space, data, PriorConfig{}, "X", "Y", 1.0, 500, 77);
  REQUIRE(a.value == b.value);
  REQUIRE(a.std_error == b.std_error);
}

TEST_CASE("mc estimator agrees with quasi within Monte Carlo error") {
  // with each path visiting each node once, E[path product] factorizes over
  // node-wise independent posteriors, so mc and quasi share the estimand
  const CandidateSpace space(Dag({"X", "Y"}, {{0, 1}}), 0.5);
  cbma::LinearScm scm(space.dag_full, {2.0}, 1.0);
  const Dataset data = cbma::simulate(scm, 200, 37);
  const PriorConfig prior{};
  const double quasi = cbma::bma_mie_quasi(space, data, prior, "X", "Y", 3.0);
  const auto mc = cbma::bma_mie_mc(space, data, prior, "X", "Y", 3.0, 100000, 41);
  REQUIRE(std::abs(mc.value - quasi) <= 3.0 * mc.std_error);
}

TEST_CASE("mc standard deviation scales like n^{-1/2}", "[slow]") {
  const CandidateSpace space(Dag({"X", "z", "Y"}, {{0, 1}, {1, 2}, {0, 2}}), 0.5);
  cbma::LinearScm scm(space.dag_full, {1.0, 1.0, 1.0}, 1.0);
  const Dataset data = cbma::simulate(scm, 100, 43);
  const PriorConfig prior{};

  std::vector<double> log_n, log_sd;
  for (int n_samples : {100, 1000, 10000}) {
    std::vector<double> values;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      values.push_back(cbma::bma_mie_mc(space, data, prior, "X", "Y", 1.0,
                                        n_samples, 1000 + seed)
                           .value);
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= (values.size() - 1);
    log_n.push_back(std::log(double(n_samples)));
    log_sd.push_back(0.5 * std::log(var));
  }
  // least-squares slope of log sd on log n
  const double mean_x = (log_n[0] + log_n[1] + log_n[2]) / 3.0;
  const double mean_y = (log_sd[0] + log_sd[1] + log_sd[2]) / 3.0;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < 3; ++i) {
    sxy += (log_n[i] - mean_x) * (log_sd[i] - mean_y);
    sxx += (log_n[i] - mean_x) * (log_n[i] - mean_x);
  }
  const double slope = sxy / sxx;
  REQUIRE(slope < -0.35);
  REQUIRE(slope > -0.65);
}

TEST_CASE("estimators refuse spaces above the cap") {
  std::vector<std::string> nodes;
  std::vector<Edge> edges;
  for (int i = 0; i < 22; ++i) nodes.push_back("v" + std::to_string(i));
  for (int i = 0; i < 21; ++i) edges.push_back({i, i + 1});
  const CandidateSpace space(Dag(std::move(nodes), std::move(edges)), 0.5);
  const Dataset data = standard_normal_data(10, space.dag_full.nodes, 47);
  REQUIRE_THROWS_AS(cbma::graph_posterior(space, data, PriorConfig{}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(
      cbma::bma_mie_quasi(space, data, PriorConfig{}, "v0", "v21", 1.0),
      std::invalid_argument);
}
