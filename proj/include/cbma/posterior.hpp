#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cbma/dag.hpp"
#include "cbma/dataset.hpp"

namespace cbma {

// Conjugate prior: theta_ij ~ N(0, coeff_var) per edge, known noise
// precision.
struct PriorConfig {
  double coeff_var = 1.0;        // tau
  double noise_precision = 1.0;  // s_eps

  void validate() const {
    if (!(coeff_var > 0.0)) throw std::invalid_argument("coeff_var must be > 0");
    if (!(noise_precision > 0.0)) {
      throw std::invalid_argument("noise_precision must be > 0");
    }
  }
};

// Gaussian posterior over the incoming-edge coefficients of one node.
struct NodePosterior {
  int node = -1;
  std::vector<int> parents;  // ascending column indices
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

namespace detail {

inline Eigen::MatrixXd design_matrix(const Dataset& data,
                                     const std::vector<int>& parents) {
  Eigen::MatrixXd design(data.sample_count(), parents.size());
  for (std::size_t k = 0; k < parents.size(); ++k) {
    data.check_column(parents[k]);
    design.col(k) = data.values.col(parents[k]);
  }
  return design;
}

// Evidence and posterior from the sufficient statistics X'X, X'x, x'x.
// Returns the log marginal; fills mean (and covariance when requested).
inline double node_evidence_from_stats(const Eigen::MatrixXd& xtx,
                                       const Eigen::VectorXd& xty, double yty,
                                       Eigen::Index n, const PriorConfig& prior,
                                       Eigen::VectorXd* mean_out,
                                       Eigen::MatrixXd* cov_out) {
  prior.validate();
  const double s_eps = prior.noise_precision;
  const double inv_tau = 1.0 / prior.coeff_var;
  const Eigen::Index m = xtx.rows();

  if (m == 0) {
    if (mean_out) mean_out->resize(0);
    if (cov_out) cov_out->resize(0, 0);
    return 0.5 * n * std::log(s_eps) - 0.5 * s_eps * yty -
           0.5 * n * std::log(2.0 * std::numbers::pi);
  }

  Eigen::MatrixXd a = s_eps * xtx;
  a.diagonal().array() += inv_tau;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("posterior precision matrix is not SPD");
  }
  Eigen::VectorXd mu = s_eps * llt.solve(xty);

  // E_j = (s/2)||x - X mu||^2 + (1/(2 tau)) mu'mu, expanded in the stats
  const double resid = yty - 2.0 * mu.dot(xty) + mu.dot(xtx * mu);
  const double energy = 0.5 * s_eps * resid + 0.5 * inv_tau * mu.squaredNorm();
  const double log_det_a =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();

  const double log_ml = 0.5 * m * std::log(inv_tau) +
                        0.5 * n * std::log(s_eps) - energy - 0.5 * log_det_a -
                        0.5 * n * std::log(2.0 * std::numbers::pi);
  if (mean_out) *mean_out = mu;
  if (cov_out) {
    *cov_out = llt.solve(Eigen::MatrixXd::Identity(m, m));
    // exact symmetry for downstream Cholesky factorizations
    *cov_out = 0.5 * (*cov_out + cov_out->transpose()).eval();
  }
  return log_ml;
}

}  // namespace detail

// Closed-form Gaussian posterior of the coefficients of `node` regressed on
// `parents`: Sigma = (s X'X + tau^{-1} I)^{-1}, mu = s Sigma X'x.
inline NodePosterior node_posterior(const Dataset& data, int node,
                                    const std::vector<int>& parents,
                                    const PriorConfig& prior) {
  prior.validate();
  data.check_column(node);
  NodePosterior post;
  post.node = node;
  post.parents = parents;
  const Eigen::MatrixXd design = detail::design_matrix(data, parents);
  const Eigen::VectorXd target = data.values.col(node);
  detail::node_evidence_from_stats(
      design.transpose() * design, design.transpose() * target,
      target.squaredNorm(), data.sample_count(), prior, &post.mean,
      &post.covariance);
  return post;
}

// Log marginal likelihood ln p(x_j | X_j) of one node given its parent set.
inline double log_marginal_node(const Dataset& data, int node,
                                const std::vector<int>& parents,
                                const PriorConfig& prior) {
  data.check_column(node);
  const Eigen::MatrixXd design = detail::design_matrix(data, parents);
  const Eigen::VectorXd target = data.values.col(node);
  return detail::node_evidence_from_stats(
      design.transpose() * design, design.transpose() * target,
      target.squaredNorm(), data.sample_count(), prior, nullptr, nullptr);
}

// ln p(D | G) = sum_j ln p(x_j | X_j); parentless nodes contribute the
// zero-mean Gaussian log density of their column.
inline double log_marginal_graph(const Dataset& data, const Dag& g,
                                 const PriorConfig& prior) {
  const std::vector<int> cols = resolve_columns(data, g.nodes);
  const std::vector<std::vector<int>> parents = g.parent_lists();
  double total = 0.0;
  for (int j = 0; j < g.node_count(); ++j) {
    std::vector<int> parent_cols;
    parent_cols.reserve(parents[j].size());
    for (int p : parents[j]) parent_cols.push_back(cols[p]);
    total += log_marginal_node(data, cols[j], parent_cols, prior);
  }
  return total;
}

}  // namespace cbma
