#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "cbma/candidate_space.hpp"
#include "cbma/scm.hpp"

using cbma::CandidateSpace;
using cbma::Dag;
using cbma::Edge;

namespace {

CandidateSpace chain_space(int edges, double p) {
  std::vector<std::string> nodes;
  std::vector<Edge> es;
  for (int i = 0; i <= edges; ++i) nodes.push_back("v" + std::to_string(i));
  for (int i = 0; i < edges; ++i) es.push_back({i, i + 1});
  return CandidateSpace(Dag(std::move(nodes), std::move(es)), p);
}

// random DAG over the upper-triangular edge set
CandidateSpace random_space(int nodes, int edges, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> names;
  for (int i = 0; i < nodes; ++i) names.push_back("v" + std::to_string(i));
  std::vector<Edge> all;
  for (int i = 0; i < nodes; ++i) {
    for (int j = i + 1; j < nodes; ++j) all.push_back({i, j});
  }
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::min<std::size_t>(edges, all.size()));
  return CandidateSpace(Dag(std::move(names), std::move(all)), p);
}

}  // namespace

TEST_CASE("enumeration counts") {
  REQUIRE(cbma::enumerate_candidates(chain_space(3, 0.5)).size() == 8);
  REQUIRE(cbma::enumerate_candidates(chain_space(5, 0.5)).size() == 32);
  const CandidateSpace empty(Dag({"a", "b"}, {}), 0.5);
  const auto only = cbma::enumerate_candidates(empty);
  REQUIRE(only.size() == 1);
  REQUIRE(only[0].edges.empty());
}

TEST_CASE("enumeration is binary counting over the fixed edge order") {
  const CandidateSpace space = chain_space(2, 0.5);
  const auto graphs = cbma::enumerate_candidates(space);
  REQUIRE(graphs[0].edges.empty());
  REQUIRE(graphs[1].edges == std::vector<Edge>{{0, 1}});
  REQUIRE(graphs[2].edges == std::vector<Edge>{{1, 2}});
  REQUIRE(graphs[3].edges == std::vector<Edge>{{0, 1}, {1, 2}});
}

TEST_CASE("enumeration cap is refused with the size in the message") {
  const CandidateSpace big = random_space(8, 22, 0.5, 11);
  REQUIRE(big.edge_count() == 22);
  try {
    cbma::enumerate_candidates(big);
    FAIL("expected refusal");
  } catch (const std::invalid_argument& e) {
    REQUIRE(std::string(e.what()).find("22") != std::string::npos);
  }
}

TEST_CASE("graph prior values") {
  const CandidateSpace uniform = chain_space(5, 0.5);
  for (const Dag& g : cbma::enumerate_candidates(uniform)) {
    REQUIRE_THAT(cbma::graph_prior(uniform, g),
                 Catch::Matchers::WithinAbs(0.03125, 1e-15));
  }

  const CandidateSpace sure = chain_space(3, 1.0);
  REQUIRE(cbma::graph_prior(sure, sure.dag_full) == 1.0);
  REQUIRE(cbma::graph_prior(sure, Dag(sure.dag_full.nodes, {})) == 0.0);

  const CandidateSpace skewed = chain_space(5, 0.3);
  const Dag two(skewed.dag_full.nodes, {{0, 1}, {1, 2}});
  REQUIRE_THAT(cbma::graph_prior(skewed, two),
               Catch::Matchers::WithinAbs(0.3 * 0.3 * 0.7 * 0.7 * 0.7, 1e-12));
}

TEST_CASE("graph prior rejects edges outside the space") {
  const CandidateSpace space = chain_space(2, 0.5);
  const Dag outside(space.dag_full.nodes, {{0, 2}});
  REQUIRE_THROWS_AS(cbma::graph_prior(space, outside), std::invalid_argument);
}

TEST_CASE("graph prior sums to one over all candidates") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.05, 0.95);
    CandidateSpace space = random_space(6, 10, 0.5, seed);
    for (double& p : space.edge_prob) p = unif(rng);
    double total = 0.0;
    for (const Dag& g : cbma::enumerate_candidates(space)) {
      total += cbma::graph_prior(space, g);
    }
    REQUIRE_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("sample_model respects degenerate probabilities") {
  const CandidateSpace sure = chain_space(4, 1.0);
  const CandidateSpace never = chain_space(4, 0.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    REQUIRE(cbma::sample_model(sure, 1.0, 1.0, seed).dag.edges ==
            sure.dag_full.edges);
    REQUIRE(cbma::sample_model(never, 1.0, 1.0, seed).dag.edges.empty());
  }
}

TEST_CASE("sample_model edge inclusion frequency matches p") {
  const CandidateSpace space = chain_space(3, 0.5);
  std::vector<int> counts(3, 0);
  const int draws = 10000;
  for (int d = 0; d < draws; ++d) {
    const cbma::LinearScm model = cbma::sample_model(space, 1.0, 1.0, 900 + d);
    for (const Edge& e : model.dag.edges) {
      for (int i = 0; i < 3; ++i) {
        if (space.dag_full.edges[i] == e) ++counts[i];
      }
    }
  }
  for (int i = 0; i < 3; ++i) {
    REQUIRE_THAT(counts[i] / double(draws),
                 Catch::Matchers::WithinAbs(0.5, 0.015));
  }
}

TEST_CASE("sample_model is deterministic in the seed") {
  const CandidateSpace space = random_space(6, 9, 0.4, 5);
  const auto a = cbma::sample_model(space, 1.0, 2.0, 1234);
  const auto b = cbma::sample_model(space, 1.0, 2.0, 1234);
  REQUIRE(a.dag.edges == b.dag.edges);
  REQUIRE(a.weights == b.weights);
}
