#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "cbma/posterior.hpp"
#include "cbma/scm.hpp"
#include "oracles.hpp"

using cbma::Dag;
using cbma::Dataset;
using cbma::PriorConfig;

namespace {

Dataset random_dataset(int n, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd values(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) values(i, j) = normal(rng);
  }
  std::vector<std::string> names;
  for (int j = 0; j < m; ++j) names.push_back("v" + std::to_string(j));
  return Dataset(std::move(names), std::move(values));
}

}  // namespace

TEST_CASE("node posterior scalar example") {
  // single observation (parent = 1, child = 1): Sigma = (1*1 + 1)^{-1} = 0.5
  Eigen::MatrixXd values(1, 2);
  values << 1.0, 1.0;
  const Dataset data({"p", "c"}, values);
  const auto post = cbma::node_posterior(data, 1, {0}, PriorConfig{1.0, 1.0});
  REQUIRE_THAT(post.mean(0), Catch::Matchers::WithinAbs(0.5, 1e-15));
  REQUIRE_THAT(post.covariance(0, 0), Catch::Matchers::WithinAbs(0.5, 1e-15));
}

TEST_CASE("node posterior with no parents is empty") {
  const Dataset data = random_dataset(10, 2, 1);
  const auto post = cbma::node_posterior(data, 0, {}, PriorConfig{});
  REQUIRE(post.mean.size() == 0);
  REQUIRE(post.covariance.size() == 0);
}

TEST_CASE("node posterior matches dense-grid integration") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> coeff(0.0, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    const int parents = trial % 2 ? 2 : 1;
    const int n = 10 + trial * 7;
    Dataset data = random_dataset(n, parents + 1, 100 + trial);
    // give the child real signal from the parents
    Eigen::VectorXd truth(parents);
    for (int k = 0; k < parents; ++k) truth(k) = coeff(rng);
    data.values.col(parents) =
        data.values.leftCols(parents) * truth + data.values.col(parents);

    std::vector<int> parent_cols;
    for (int k = 0; k < parents; ++k) parent_cols.push_back(k);
    const PriorConfig prior{1.0, 1.0};
    const auto post = cbma::node_posterior(data, parents, parent_cols, prior);

    const Eigen::MatrixXd design = data.values.leftCols(parents);
    const Eigen::VectorXd target = data.values.col(parents);
    const oracle::GridPosterior ref =
        parents == 1
            ? oracle::grid_posterior_1d(design, target, 1.0, 1.0)
            : oracle::grid_posterior_2d(design, target, 1.0, 1.0);
    for (int k = 0; k < parents; ++k) {
      REQUIRE_THAT(post.mean(k), Catch::Matchers::WithinAbs(ref.mean(k), 1e-4));
      for (int l = 0; l < parents; ++l) {
        REQUIRE_THAT(post.covariance(k, l),
                     Catch::Matchers::WithinAbs(ref.covariance(k, l), 1e-4));
      }
    }
  }
}

TEST_CASE("empty-graph evidence is the product of standard normal densities") {
  const Dataset data = random_dataset(40, 3, 3);
  const Dag empty({"v0", "v1", "v2"}, {});
  const double lml = cbma::log_marginal_graph(data, empty, PriorConfig{1.0, 1.0});
  double direct = 0.0;
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 40; ++i) {
      direct += oracle::normal_log_density(data.values(i, j), 0.0, 1.0);
    }
  }
  REQUIRE_THAT(lml, Catch::Matchers::WithinAbs(direct, 1e-9));
}

TEST_CASE("evidence satisfies the Bayes identity at arbitrary theta") {
  // ln p(D|G) = ln p(D|G,theta) + ln p(theta|G) - ln p(theta|G,D)
  std::mt19937_64 rng(23);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const PriorConfig prior{0.5 + 0.1 * trial, 2.0 / (1.0 + trial % 3)};
    const Dag g({"v0", "v1", "v2"}, {{0, 1}, {0, 2}, {1, 2}});
    Dataset data = random_dataset(30, 3, 500 + trial);
    const double lml = cbma::log_marginal_graph(data, g, prior);

    for (int point = 0; point < 5; ++point) {
      // theta laid out per node: b <- {a}, c <- {a, b}
      Eigen::VectorXd theta_b(1), theta_c(2);
      theta_b << normal(rng);
      theta_c << normal(rng), normal(rng);

      double log_lik = 0.0;
      const double noise_var = 1.0 / prior.noise_precision;
      for (int i = 0; i < 30; ++i) {
        log_lik += oracle::normal_log_density(data.values(i, 0), 0.0, noise_var);
        log_lik += oracle::normal_log_density(
            data.values(i, 1), theta_b(0) * data.values(i, 0), noise_var);
        log_lik += oracle::normal_log_density(
            data.values(i, 2),
            theta_c(0) * data.values(i, 0) + theta_c(1) * data.values(i, 1),
            noise_var);
      }
      double log_prior = oracle::normal_log_density(theta_b(0), 0.0, prior.coeff_var);
      for (int k = 0; k < 2; ++k) {
        log_prior += oracle::normal_log_density(theta_c(k), 0.0, prior.coeff_var);
      }
      const auto post_b = cbma::node_posterior(data, 1, {0}, prior);
      const auto post_c = cbma::node_posterior(data, 2, {0, 1}, prior);
      const double log_post =
          oracle::mvn_log_density(theta_b, post_b.mean, post_b.covariance) +
          oracle::mvn_log_density(theta_c, post_c.mean, post_c.covariance);

      REQUIRE_THAT(log_lik + log_prior - log_post,
                   Catch::Matchers::WithinAbs(lml, 1e-8));
    }
  }
}

TEST_CASE("adding a null parent lowers the evidence on average", "[slow]") {
  // Occam factor: a parent whose true coefficient is 0 costs evidence
  int lower = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    const cbma::LinearScm scm(Dag({"X", "W", "Y"}, {{0, 2}}), {1.0}, 1.0);
    const Dataset data = cbma::simulate(scm, 500, 7000 + t);
    const PriorConfig prior{1.0, 1.0};
    const double with_true = cbma::log_marginal_node(data, 2, {0}, prior);
    const double with_null = cbma::log_marginal_node(data, 2, {0, 1}, prior);
    if (with_null < with_true) ++lower;
  }
  REQUIRE(lower > trials / 2);
}

TEST_CASE("posterior covariance is SPD and approaches the prior as s_eps -> 0") {
  const Dataset data = random_dataset(50, 4, 9);
  const auto post = cbma::node_posterior(data, 3, {0, 1, 2}, PriorConfig{1.0, 1e-8});
  REQUIRE(post.covariance.isApprox(post.covariance.transpose(), 1e-12));
  Eigen::LLT<Eigen::MatrixXd> llt(post.covariance);
  REQUIRE(llt.info() == Eigen::Success);
  REQUIRE((post.covariance - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <
          1e-6);
}
