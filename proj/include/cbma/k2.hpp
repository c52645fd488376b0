#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "cbma/candidate_space.hpp"
#include "cbma/dataset.hpp"
#include "cbma/effects.hpp"
#include "cbma/posterior.hpp"

namespace cbma {

struct K2Step {
  int node = -1;
  Edge edge;
  bool accepted = false;
};

struct K2Trace {
  Dag selected;
  std::vector<double> score_history;  // non-decreasing log posterior
  std::vector<K2Step> steps;
};

// Greedy per-node parent selection scored by the model posterior: one pass
// per node over its allowed incoming edges in the fixed edge order, adding
// an edge iff the node-local score ln p(x_j|X_j) + ln(p_e / (1 - p_e))
// strictly increases. No removal, no backtracking.
inline K2Trace k2_search(const CandidateSpace& space, const Dataset& data,
                         const PriorConfig& prior) {
  prior.validate();
  const std::vector<int> cols = resolve_columns(data, space.dag_full.nodes);
  const int node_count = space.dag_full.node_count();
  std::vector<bool> accepted(space.edge_count(), false);

  std::vector<double> node_evidence(node_count);
  for (int j = 0; j < node_count; ++j) {
    node_evidence[j] = log_marginal_node(data, cols[j], {}, prior);
  }
  auto global_score = [&] {
    double s = std::accumulate(node_evidence.begin(), node_evidence.end(), 0.0);
    for (int e = 0; e < space.edge_count(); ++e) {
      const double p = space.edge_prob[e];
      s += accepted[e] ? std::log(p) : std::log1p(-p);
    }
    return s;
  };

  K2Trace trace;
  trace.score_history.push_back(global_score());
  for (int j : space.dag_full.topological_order()) {
    std::vector<int> parent_cols;
    for (int e = 0; e < space.edge_count(); ++e) {
      const Edge& edge = space.dag_full.edges[e];
      if (edge.to != j) continue;
      std::vector<int> tried = parent_cols;
      tried.insert(
          std::upper_bound(tried.begin(), tried.end(), cols[edge.from]),
          cols[edge.from]);
      const double tried_evidence = log_marginal_node(data, cols[j], tried, prior);
      const double p = space.edge_prob[e];
      const double delta =
          tried_evidence - node_evidence[j] + std::log(p) - std::log1p(-p);
      const bool accept = delta > 0.0;
      if (accept) {
        parent_cols = std::move(tried);
        node_evidence[j] = tried_evidence;
        accepted[e] = true;
      }
      trace.steps.push_back({j, edge, accept});
      trace.score_history.push_back(global_score());
    }
  }

  std::vector<Edge> selected_edges;
  for (int e = 0; e < space.edge_count(); ++e) {
    if (accepted[e]) selected_edges.push_back(space.dag_full.edges[e]);
  }
  trace.selected = Dag(space.dag_full.nodes, std::move(selected_edges));
  return trace;
}

// Plug-in MIE under a single fixed graph: per-node conjugate posterior means
// as coefficients, total effect times x_value. With g = G_full this is the
// full-model MAP baseline.
inline double estimate_via_graph(const Dag& g, const Dataset& data,
                                 const PriorConfig& prior, const std::string& x,
                                 const std::string& y, double x_value) {
  const std::vector<int> cols = resolve_columns(data, g.nodes);
  const std::vector<std::vector<int>> parents = g.parent_lists();
  std::vector<double> weights(g.edges.size(), 0.0);
  for (int j = 0; j < g.node_count(); ++j) {
    if (parents[j].empty()) continue;
    std::vector<int> parent_cols;
    parent_cols.reserve(parents[j].size());
    for (int p : parents[j]) parent_cols.push_back(cols[p]);
    const NodePosterior post = node_posterior(data, cols[j], parent_cols, prior);
    for (std::size_t i = 0; i < parents[j].size(); ++i) {
      const Edge e{parents[j][i], j};
      const auto it = std::lower_bound(g.edges.begin(), g.edges.end(), e);
      weights[static_cast<std::size_t>(it - g.edges.begin())] =
          post.mean(static_cast<Eigen::Index>(i));
    }
  }
  return total_effect(g, weights, x, y) * x_value;
}

}  // namespace cbma
