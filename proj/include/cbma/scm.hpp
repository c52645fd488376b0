#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "cbma/candidate_space.hpp"
#include "cbma/dag.hpp"
#include "cbma/dataset.hpp"
#include "cbma/rng.hpp"

namespace cbma {

// Linear Gaussian structural model: each variable is the weighted sum of its
// parents plus N(0, 1/noise_precision) noise, no intercepts.
struct LinearScm {
  Dag dag;
  std::vector<double> weights;  // aligned with dag.edges
  double noise_precision = 1.0;

  LinearScm() = default;

  LinearScm(Dag g, std::vector<double> w, double s_eps)
      : dag(std::move(g)), weights(std::move(w)), noise_precision(s_eps) {
    if (weights.size() != dag.edges.size()) {
      throw std::invalid_argument("weights do not cover the edge set");
    }
    if (!(noise_precision > 0.0)) {
      throw std::invalid_argument("noise_precision must be > 0");
    }
  }
};

// Draws a model from the space prior: each edge included independently with
// its probability, each included coefficient ~ N(0, prior_var).
inline LinearScm sample_model(const CandidateSpace& space, double prior_var,
                              double noise_precision, std::uint64_t rng_seed) {
  if (!(prior_var > 0.0)) throw std::invalid_argument("prior_var must be > 0");
  if (!(noise_precision > 0.0)) {
    throw std::invalid_argument("noise_precision must be > 0");
  }
  std::mt19937_64 rng = make_rng(rng_seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Edge> edges;
  for (int i = 0; i < space.edge_count(); ++i) {
    if (unif(rng) < space.edge_prob[i]) edges.push_back(space.dag_full.edges[i]);
  }
  std::normal_distribution<double> coeff(0.0, std::sqrt(prior_var));
  std::vector<double> weights(edges.size());
  for (double& w : weights) w = coeff(rng);
  return LinearScm(Dag(space.dag_full.nodes, std::move(edges)),
                   std::move(weights), noise_precision);
}

// Generates n samples in topological order; bit-identical for equal seeds.
inline Dataset simulate(const LinearScm& scm, int n, std::uint64_t rng_seed) {
  if (n < 1) throw std::invalid_argument("sample count must be >= 1");
  const int m = scm.dag.node_count();
  std::mt19937_64 rng = make_rng(rng_seed);
  std::normal_distribution<double> noise(
      0.0, 1.0 / std::sqrt(scm.noise_precision));

  Eigen::MatrixXd values(n, m);
  const std::vector<int> order = scm.dag.topological_order();
  for (int j : order) {
    for (int row = 0; row < n; ++row) values(row, j) = noise(rng);
    for (std::size_t e = 0; e < scm.dag.edges.size(); ++e) {
      if (scm.dag.edges[e].to == j) {
        values.col(j) += scm.weights[e] * values.col(scm.dag.edges[e].from);
      }
    }
  }
  return Dataset(scm.dag.nodes, std::move(values));
}

}  // namespace cbma
