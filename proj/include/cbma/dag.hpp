#pragma once

#include <algorithm>
#include <compare>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace cbma {

struct Edge {
  int from = 0;
  int to = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Directed acyclic graph over named nodes. Edges are stored sorted by
// (from, to); this ordering is the tie-breaker for everything downstream
// (candidate enumeration, greedy scans, seeding).
struct Dag {
  std::vector<std::string> nodes;
  std::vector<Edge> edges;

  Dag() = default;

  Dag(std::vector<std::string> node_names, std::vector<Edge> edge_list)
      : nodes(std::move(node_names)), edges(std::move(edge_list)) {
    std::sort(edges.begin(), edges.end());
    validate();
  }

  int node_count() const { return static_cast<int>(nodes.size()); }

  int node_index(const std::string& name) const {
    for (int i = 0; i < node_count(); ++i) {
      if (nodes[i] == name) return i;
    }
    throw std::invalid_argument("unknown node name: " + name);
  }

  bool has_edge(const Edge& e) const {
    return std::binary_search(edges.begin(), edges.end(), e);
  }

  // Parents of each node, ascending by node index.
  std::vector<std::vector<int>> parent_lists() const {
    std::vector<std::vector<int>> parents(nodes.size());
    for (const Edge& e : edges) parents[e.to].push_back(e.from);
    return parents;
  }

  // Canonical topological order (Kahn, smallest index first).
  // Throws if the edge set contains a cycle.
  std::vector<int> topological_order() const {
    const int m = node_count();
    std::vector<int> indegree(m, 0);
    for (const Edge& e : edges) ++indegree[e.to];
    std::vector<int> order;
    order.reserve(m);
    std::vector<bool> emitted(m, false);
    for (int step = 0; step < m; ++step) {
      int next = -1;
      for (int i = 0; i < m; ++i) {
        if (!emitted[i] && indegree[i] == 0) {
          next = i;
          break;
        }
      }
      if (next < 0) throw std::invalid_argument("graph contains a cycle");
      emitted[next] = true;
      order.push_back(next);
      for (const Edge& e : edges) {
        if (e.from == next) --indegree[e.to];
      }
    }
    return order;
  }

 private:
  void validate() const {
    std::unordered_set<std::string> seen;
    for (const std::string& n : nodes) {
      if (n.empty()) throw std::invalid_argument("empty node name");
      if (!seen.insert(n).second) {
        throw std::invalid_argument("duplicate node name: " + n);
      }
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const Edge& e = edges[i];
      if (e.from < 0 || e.from >= node_count() || e.to < 0 ||
          e.to >= node_count()) {
        throw std::invalid_argument("edge endpoint out of range");
      }
      if (e.from == e.to) throw std::invalid_argument("self-loop edge");
      if (i > 0 && edges[i - 1] == e) {
        throw std::invalid_argument("duplicate edge");
      }
      if (has_edge({e.to, e.from})) {
        throw std::invalid_argument("edge present in both orientations");
      }
    }
    topological_order();  // throws on cycles
  }
};

}  // namespace cbma
