#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbma/candidate_space.hpp"
#include "cbma/dataset.hpp"
#include "cbma/posterior.hpp"
#include "cbma/rng.hpp"

namespace cbma {

// Posterior over the enumerated candidate graphs. Candidates are indexed by
// their edge-subset mask in the fixed enumeration order, so the graph list
// is implicit; graph(i) materializes one on demand.
struct GraphPosterior {
  CandidateSpace space;
  std::vector<double> log_weights;  // unnormalized ln(evidence * prior)
  std::vector<double> weights;      // normalized, sums to 1

  std::uint64_t size() const { return weights.size(); }
  Dag graph(std::uint64_t index) const { return subgraph(space, index); }
};

namespace detail {

// Max-shifted exponential normalization of log weights.
inline std::vector<double> normalize_log_weights(
    const std::vector<double>& log_weights) {
  double max_lw = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) max_lw = std::max(max_lw, lw);
  if (!std::isfinite(max_lw)) {
    throw std::runtime_error("all candidate log weights are -inf");
  }
  std::vector<double> w(log_weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    w[i] = std::exp(log_weights[i] - max_lw);
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

// Per-node cache over parent subsets. Both the evidence and the edge prior
// factor per node, so a candidate's log weight is the sum of one table entry
// per node and its plug-in coefficients are the cached posterior means.
struct NodeSubsetTable {
  int node = -1;  // space node index
  int col = -1;   // dataset column
  std::vector<int> edge_ids;             // incoming edges, ascending
  std::vector<double> log_weight;        // evidence + prior part, 2^k entries
  std::vector<Eigen::VectorXd> means;    // posterior means per subset
  std::vector<Eigen::MatrixXd> chols;    // lower Cholesky of covariance
};

inline std::vector<NodeSubsetTable> build_node_tables(
    const CandidateSpace& space, const Dataset& data, const PriorConfig& prior,
    bool with_chol) {
  prior.validate();
  const std::vector<int> cols = resolve_columns(data, space.dag_full.nodes);
  const int node_count = space.dag_full.node_count();
  std::vector<NodeSubsetTable> tables(node_count);
  for (int j = 0; j < node_count; ++j) {
    NodeSubsetTable& t = tables[j];
    t.node = j;
    t.col = cols[j];
    for (int e = 0; e < space.edge_count(); ++e) {
      if (space.dag_full.edges[e].to == j) t.edge_ids.push_back(e);
    }
    const int k = static_cast<int>(t.edge_ids.size());

    Eigen::MatrixXd design(data.sample_count(), k);
    for (int i = 0; i < k; ++i) {
      design.col(i) =
          data.values.col(cols[space.dag_full.edges[t.edge_ids[i]].from]);
    }
    const Eigen::VectorXd target = data.values.col(t.col);
    const Eigen::MatrixXd xtx_full = design.transpose() * design;
    const Eigen::VectorXd xty_full = design.transpose() * target;
    const double yty = target.squaredNorm();

    const std::uint64_t subsets = std::uint64_t{1} << k;
    t.log_weight.resize(subsets);
    t.means.resize(subsets);
    if (with_chol) t.chols.resize(subsets);
    for (std::uint64_t s = 0; s < subsets; ++s) {
      std::vector<int> sel;
      for (int i = 0; i < k; ++i) {
        if (s >> i & 1) sel.push_back(i);
      }
      const int ms = static_cast<int>(sel.size());
      Eigen::MatrixXd xtx(ms, ms);
      Eigen::VectorXd xty(ms);
      for (int a = 0; a < ms; ++a) {
        xty(a) = xty_full(sel[a]);
        for (int b = 0; b < ms; ++b) xtx(a, b) = xtx_full(sel[a], sel[b]);
      }
      Eigen::MatrixXd cov;
      const double evidence = node_evidence_from_stats(
          xtx, xty, yty, data.sample_count(), prior, &t.means[s],
          with_chol ? &cov : nullptr);
      double log_prior = 0.0;
      for (int i = 0; i < k; ++i) {
        const double p = space.edge_prob[t.edge_ids[i]];
        log_prior += (s >> i & 1) ? std::log(p) : std::log1p(-p);
      }
      t.log_weight[s] = evidence + log_prior;
      if (with_chol) {
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (ms > 0 && llt.info() != Eigen::Success) {
          throw std::runtime_error("posterior covariance is not SPD");
        }
        t.chols[s] = llt.matrixL();
      }
    }
  }
  return tables;
}

inline std::uint64_t local_subset(const NodeSubsetTable& t,
                                  std::uint64_t mask) {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < t.edge_ids.size(); ++i) {
    s |= ((mask >> t.edge_ids[i]) & 1ULL) << i;
  }
  return s;
}

// One directed path from x to y in the full graph. A step's coefficient
// lives in its target node's posterior; local_bit is the edge's position in
// that node's incoming-edge list.
struct PathStep {
  int edge_id;
  int target_node;
  int local_bit;
};

struct FullPath {
  std::uint64_t edge_mask = 0;
  std::vector<PathStep> steps;
};

inline std::vector<FullPath> enumerate_paths(
    const CandidateSpace& space, const std::vector<NodeSubsetTable>& tables,
    int x, int y) {
  std::vector<std::vector<std::pair<int, int>>> children(
      space.dag_full.node_count());  // (child, edge id)
  for (int e = 0; e < space.edge_count(); ++e) {
    children[space.dag_full.edges[e].from].emplace_back(
        space.dag_full.edges[e].to, e);
  }
  auto local_bit_of = [&](int node, int edge_id) {
    const auto& ids = tables[node].edge_ids;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] == edge_id) return static_cast<int>(i);
    }
    throw std::logic_error("edge missing from node table");
  };
  std::vector<FullPath> paths;
  FullPath current;
  auto dfs = [&](auto&& self, int node) -> void {
    if (node == y) {
      paths.push_back(current);
      return;
    }
    for (const auto& [child, edge_id] : children[node]) {
      current.steps.push_back({edge_id, child, local_bit_of(child, edge_id)});
      current.edge_mask |= std::uint64_t{1} << edge_id;
      self(self, child);
      current.edge_mask &= ~(std::uint64_t{1} << edge_id);
      current.steps.pop_back();
    }
  };
  dfs(dfs, x);
  return paths;
}

// Path-sum total effect of one candidate, with coefficients looked up in the
// per-node tables at the candidate's local subsets.
inline double path_sum(const std::vector<FullPath>& paths,
                       const std::vector<NodeSubsetTable>& tables,
                       const std::vector<std::uint64_t>& subsets,
                       std::uint64_t mask) {
  double total = 0.0;
  for (const FullPath& path : paths) {
    if ((mask & path.edge_mask) != path.edge_mask) continue;
    double product = 1.0;
    for (const PathStep& step : path.steps) {
      const std::uint64_t s = subsets[step.target_node];
      const int coeff_idx = std::popcount(
          s & ((std::uint64_t{1} << step.local_bit) - 1));
      product *= tables[step.target_node].means[s](coeff_idx);
    }
    total += product;
  }
  return total;
}

}  // namespace detail

// Enumerated posterior over candidates: weight(G) proportional to
// evidence(G) * prior(G), normalized with a max-shifted exponential sum.
inline GraphPosterior graph_posterior(const CandidateSpace& space,
                                      const Dataset& data,
                                      const PriorConfig& prior,
                                      int cap = kEnumerationCap) {
  const std::uint64_t n = candidate_count(space, cap);
  const auto tables = detail::build_node_tables(space, data, prior, false);
  GraphPosterior posterior;
  posterior.space = space;
  posterior.log_weights.resize(n);
  for (std::uint64_t mask = 0; mask < n; ++mask) {
    double lw = 0.0;
    for (const auto& t : tables) lw += t.log_weight[detail::local_subset(t, mask)];
    posterior.log_weights[mask] = lw;
  }
  posterior.weights = detail::normalize_log_weights(posterior.log_weights);
  return posterior;
}

// Bayes quasi-optimal MIE estimate: the posterior-weighted average over all
// candidates of the plug-in total effect at the per-graph posterior means
// (for a Gaussian posterior the MAP is the mean), times x_value.
inline double bma_mie_quasi(const CandidateSpace& space, const Dataset& data,
                            const PriorConfig& prior, const std::string& x,
                            const std::string& y, double x_value,
                            int cap = kEnumerationCap) {
  const std::uint64_t n = candidate_count(space, cap);
  const auto tables = detail::build_node_tables(space, data, prior, false);
  const int xi = space.dag_full.node_index(x);
  const int yi = space.dag_full.node_index(y);
  if (xi == yi) throw std::invalid_argument("x and y must differ");
  const auto paths = detail::enumerate_paths(space, tables, xi, yi);

  std::vector<double> log_weights(n);
  std::vector<double> effects(n);
  std::vector<std::uint64_t> subsets(tables.size());
  for (std::uint64_t mask = 0; mask < n; ++mask) {
    double lw = 0.0;
    for (std::size_t j = 0; j < tables.size(); ++j) {
      subsets[j] = detail::local_subset(tables[j], mask);
      lw += tables[j].log_weight[subsets[j]];
    }
    log_weights[mask] = lw;
    effects[mask] = detail::path_sum(paths, tables, subsets, mask);
  }
  const std::vector<double> weights = detail::normalize_log_weights(log_weights);
  double estimate = 0.0;
  for (std::uint64_t mask = 0; mask < n; ++mask) {
    estimate += weights[mask] * effects[mask];
  }
  return estimate * x_value;
}

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Bayes optimal MIE estimate with the inner posterior integral done by Monte
// Carlo: per candidate, the total effect is averaged over draws from the
// node-wise independent Gaussian posteriors, then combined with the graph
// posterior. std_error is the delta-method error of the combined estimate.
inline McEstimate bma_mie_mc(const CandidateSpace& space, const Dataset& data,
                             const PriorConfig& prior, const std::string& x,
                             const std::string& y, double x_value,
                             int n_samples, std::uint64_t rng_seed,
                             int cap = kEnumerationCap) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  const std::uint64_t n = candidate_count(space, cap);
  const auto tables = detail::build_node_tables(space, data, prior, true);
  const int xi = space.dag_full.node_index(x);
  const int yi = space.dag_full.node_index(y);
  if (xi == yi) throw std::invalid_argument("x and y must differ");
  const auto paths = detail::enumerate_paths(space, tables, xi, yi);

  std::mt19937_64 rng = make_rng(rng_seed);
  std::normal_distribution<double> std_normal(0.0, 1.0);

  std::vector<double> log_weights(n);
  std::vector<double> sample_means(n);
  std::vector<double> sample_vars(n);
  std::vector<std::uint64_t> subsets(tables.size());
  std::vector<Eigen::VectorXd> thetas(tables.size());
  for (std::uint64_t mask = 0; mask < n; ++mask) {
    double lw = 0.0;
    for (std::size_t j = 0; j < tables.size(); ++j) {
      subsets[j] = detail::local_subset(tables[j], mask);
      lw += tables[j].log_weight[subsets[j]];
    }
    log_weights[mask] = lw;

    double sum = 0.0;
    double sum_sq = 0.0;
    for (int s = 0; s < n_samples; ++s) {
      for (std::size_t j = 0; j < tables.size(); ++j) {
        const Eigen::VectorXd& mu = tables[j].means[subsets[j]];
        const Eigen::Index dim = mu.size();
        Eigen::VectorXd z(dim);
        for (Eigen::Index d = 0; d < dim; ++d) z(d) = std_normal(rng);
        thetas[j] = mu + tables[j].chols[subsets[j]] * z;
      }
      double effect = 0.0;
      for (const detail::FullPath& path : paths) {
        if ((mask & path.edge_mask) != path.edge_mask) continue;
        double product = 1.0;
        for (const detail::PathStep& step : path.steps) {
          const std::uint64_t sub = subsets[step.target_node];
          const int coeff_idx = std::popcount(
              sub & ((std::uint64_t{1} << step.local_bit) - 1));
          product *= thetas[step.target_node](coeff_idx);
        }
        effect += product;
      }
      sum += effect;
      sum_sq += effect * effect;
    }
    sample_means[mask] = sum / n_samples;
    sample_vars[mask] =
        n_samples > 1
            ? std::max(0.0, (sum_sq - sum * sum / n_samples) / (n_samples - 1))
            : 0.0;
  }

  const std::vector<double> weights = detail::normalize_log_weights(log_weights);
  McEstimate result;
  double variance = 0.0;
  for (std::uint64_t mask = 0; mask < n; ++mask) {
    result.value += weights[mask] * sample_means[mask];
    variance += weights[mask] * weights[mask] * sample_vars[mask] / n_samples;
  }
  result.value *= x_value;
  result.std_error = std::sqrt(variance) * std::abs(x_value);
  return result;
}

}  // namespace cbma
