#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbma/dag.hpp"

namespace cbma {

// Hard bound on exact enumeration: 2^20 ~ 1e6 candidate graphs.
inline constexpr int kEnumerationCap = 20;

// The possible-edge set E_full with per-edge existence probabilities.
// The model class is the set of all edge subsets of dag_full; every subset
// of a DAG's edges is itself a DAG, so candidates are acyclic by
// construction. With a scalar probability p this is the classic
// p^|E_G| (1-p)^|E_full \ E_G| prior.
struct CandidateSpace {
  Dag dag_full;
  std::vector<double> edge_prob;  // aligned with dag_full.edges

  CandidateSpace() = default;

  CandidateSpace(Dag full, std::vector<double> probs)
      : dag_full(std::move(full)), edge_prob(std::move(probs)) {
    if (edge_prob.size() != dag_full.edges.size()) {
      throw std::invalid_argument("edge_prob size does not match edge count");
    }
    for (double p : edge_prob) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("edge probability outside [0,1]");
      }
    }
  }

  CandidateSpace(Dag full, double p)
      : CandidateSpace(std::move(full),
                       std::vector<double>(full.edges.size(), p)) {}

  int edge_count() const { return static_cast<int>(dag_full.edges.size()); }
};

inline void check_enumeration_cap(const CandidateSpace& space, int cap) {
  if (space.edge_count() > cap) {
    throw std::invalid_argument(
        "candidate enumeration refused: |E_full| = " +
        std::to_string(space.edge_count()) + " exceeds the cap of " +
        std::to_string(cap) + " edges (2^" +
        std::to_string(space.edge_count()) + " graphs)");
  }
}

inline std::uint64_t candidate_count(const CandidateSpace& space, int cap = kEnumerationCap) {
  check_enumeration_cap(space, cap);
  return std::uint64_t{1} << space.edge_count();
}

// Candidate with edge subset given by `mask` over the fixed edge ordering
// (bit i selects dag_full.edges[i]).
inline Dag subgraph(const CandidateSpace& space, std::uint64_t mask) {
  std::vector<Edge> edges;
  for (int i = 0; i < space.edge_count(); ++i) {
    if (mask >> i & 1) edges.push_back(space.dag_full.edges[i]);
  }
  return Dag(space.dag_full.nodes, std::move(edges));
}

// All 2^|E_full| candidates in binary counting order over the fixed edge
// ordering. Refuses above the cap.
inline std::vector<Dag> enumerate_candidates(const CandidateSpace& space,
                                             int cap = kEnumerationCap) {
  const std::uint64_t n = candidate_count(space, cap);
  std::vector<Dag> out;
  out.reserve(n);
  for (std::uint64_t mask = 0; mask < n; ++mask) {
    out.push_back(subgraph(space, mask));
  }
  return out;
}

// Prior probability of the candidate `g`: product over E_full of p_e for
// included edges and (1-p_e) for excluded ones.
inline double graph_prior(const CandidateSpace& space, const Dag& g) {
  if (g.nodes != space.dag_full.nodes) {
    throw std::invalid_argument("graph nodes do not match the candidate space");
  }
  for (const Edge& e : g.edges) {
    if (!space.dag_full.has_edge(e)) {
      throw std::invalid_argument(
          "invalid graph: edge (" + std::to_string(e.from) + "," +
          std::to_string(e.to) + ") is not in E_full");
    }
  }
  double prob = 1.0;
  for (int i = 0; i < space.edge_count(); ++i) {
    const bool present = g.has_edge(space.dag_full.edges[i]);
    prob *= present ? space.edge_prob[i] : 1.0 - space.edge_prob[i];
  }
  return prob;
}

// Log prior of the candidate selected by `mask`; -inf is a valid result for
// edges pinned to probability 0 or 1.
inline double log_graph_prior_mask(const CandidateSpace& space,
                                   std::uint64_t mask) {
  double lp = 0.0;
  for (int i = 0; i < space.edge_count(); ++i) {
    const double p = space.edge_prob[i];
    lp += (mask >> i & 1) ? std::log(p) : std::log1p(-p);
  }
  return lp;
}

}  // namespace cbma
