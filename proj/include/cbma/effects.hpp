#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbma/dag.hpp"

namespace cbma {

namespace detail {

inline void check_effect_args(const Dag& dag, const std::vector<double>& weights,
                              int x, int y) {
  if (weights.size() != dag.edges.size()) {
    throw std::invalid_argument("weights do not cover the edge set");
  }
  if (x < 0 || x >= dag.node_count() || y < 0 || y >= dag.node_count()) {
    throw std::invalid_argument("node index out of range");
  }
  if (x == y) throw std::invalid_argument("x and y must differ");
}

}  // namespace detail

// Total effect of x on y: sum over directed paths of the product of edge
// coefficients, by depth-first path enumeration. The mean intervention
// effect at do(x = v) is this coefficient times v.
inline double total_effect(const Dag& dag, const std::vector<double>& weights,
                           int x, int y) {
  detail::check_effect_args(dag, weights, x, y);
  std::vector<std::vector<std::pair<int, double>>> children(dag.node_count());
  for (std::size_t e = 0; e < dag.edges.size(); ++e) {
    children[dag.edges[e].from].emplace_back(dag.edges[e].to, weights[e]);
  }
  double sum = 0.0;
  auto dfs = [&](auto&& self, int node, double product) -> void {
    if (node == y) {
      sum += product;
      return;  // acyclic: no path re-enters y
    }
    for (const auto& [child, w] : children[node]) {
      self(self, child, product * w);
    }
  };
  dfs(dfs, x, 1.0);
  return sum;
}

inline double total_effect(const Dag& dag, const std::vector<double>& weights,
                           const std::string& x, const std::string& y) {
  return total_effect(dag, weights, dag.node_index(x), dag.node_index(y));
}

// Closed form for the same path sum: entry (x, y) of (I - Theta)^{-1} with
// Theta(i,j) the coefficient of edge i->j. The Neumann series terminates on
// a DAG, so this matches total_effect exactly.
inline double total_effect_closed(const Dag& dag,
                                  const std::vector<double>& weights, int x,
                                  int y) {
  detail::check_effect_args(dag, weights, x, y);
  const int m = dag.node_count();
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(m, m);
  for (std::size_t e = 0; e < dag.edges.size(); ++e) {
    system(dag.edges[e].from, dag.edges[e].to) -= weights[e];
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Unit(m, y);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  // det(I - Theta) = 1 for any DAG; a singular solve here is an internal error
  Eigen::VectorXd column = lu.solve(rhs);
  if (!column.allFinite()) {
    throw std::runtime_error("singular system in total_effect_closed");
  }
  return column(x);
}

inline double total_effect_closed(const Dag& dag,
                                  const std::vector<double>& weights,
                                  const std::string& x, const std::string& y) {
  return total_effect_closed(dag, weights, dag.node_index(x), dag.node_index(y));
}

}  // namespace cbma
