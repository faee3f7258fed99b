#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "biconnect/graphs.hpp"
#include "oracles.hpp"

using namespace biconnect;

namespace {

void expect_balanced(const FourGraphConfig& cfg, const PFData& pf, double tol) {
  for (double r : balance_residuals(cfg, pf)) EXPECT_LT(r, tol);
  for (const auto& layer : pf.mu)
    for (double m : layer) EXPECT_GT(m, 0.0);
  EXPECT_EQ(pf(Layer::V0, 0), 1.0);
}

// Same configuration with vertices of every layer and edges of every graph
// permuted.
FourGraphConfig permuted(const FourGraphConfig& cfg, std::mt19937_64& rng) {
  std::array<std::vector<std::size_t>, 4> perm;
  for (Layer l : kLayers) {
    perm[index_of(l)].resize(cfg.layer_size(l));
    std::iota(perm[index_of(l)].begin(), perm[index_of(l)].end(), 0);
    std::shuffle(perm[index_of(l)].begin(), perm[index_of(l)].end(), rng);
  }
  FourGraphConfig out = cfg;
  for (GraphSlot g : kSlots) {
    auto edges = cfg.graph(g).edges;
    std::shuffle(edges.begin(), edges.end(), rng);
    BipartiteGraph b;
    for (const auto& e : edges)
      b.add_edge(perm[index_of(source_layer(g))][e.source], perm[index_of(range_layer(g))][e.range]);
    out.graph(g) = b;
  }
  return out;
}

}  // namespace

TEST(Graphs, Example1Shape) {
  const auto c = example1();
  EXPECT_EQ(c.layer_size(Layer::V0), 3u);
  EXPECT_EQ(c.layer_size(Layer::V3), 2u);
  EXPECT_EQ(c.layer_size(Layer::V1), 2u);
  EXPECT_EQ(c.layer_size(Layer::V2), 3u);
  for (GraphSlot g : kSlots) EXPECT_EQ(c.graph(g).edge_count(), 4u);
  EXPECT_EQ(c.layers[0].front(), "1");
  EXPECT_EQ(c.layers[2].back(), "10");
  EXPECT_TRUE(validate_config(c).passed());
  EXPECT_FALSE(validate_config(c).has_warnings());
}

TEST(Graphs, Example2Shape) {
  const auto c = example2();
  EXPECT_EQ(c.layer_size(Layer::V0), 6u);
  EXPECT_EQ(c.layer_size(Layer::V3), 5u);
  EXPECT_EQ(c.layer_size(Layer::V1), 3u);
  EXPECT_EQ(c.layer_size(Layer::V2), 3u);
  EXPECT_EQ(c.layers[2].back(), "17");
  EXPECT_TRUE(validate_config(c).passed());
}

TEST(Graphs, DisconnectedG0Fails) {
  auto c = example1();
  c.graph(GraphSlot::G0) = BipartiteGraph{};
  c.graph(GraphSlot::G0).add_edge(0, 0);
  c.graph(GraphSlot::G0).add_edge(1, 0);
  c.graph(GraphSlot::G0).add_edge(2, 1);
  const auto r = validate_config(c);
  EXPECT_FALSE(r.passed());
  ASSERT_NE(r.find("G0-connected"), nullptr);
  EXPECT_EQ(r.find("G0-connected")->status, CheckStatus::Fail);
  EXPECT_THROW(compute_pf(c), StructuralError);
}

TEST(Graphs, UnresolvableIdIsStructuralError) {
  auto c = example1();
  c.graph(GraphSlot::G1).add_edge(7, 0);
  EXPECT_THROW(validate_config(c), StructuralError);
}

TEST(Graphs, ParallelConfigWarnsOnSingleEdges) {
  const auto c = parallel_config(3);
  const auto r = validate_config(c);
  EXPECT_TRUE(r.passed());
  EXPECT_TRUE(r.has_warnings());
  EXPECT_EQ(r.find("edge-count-G0")->status, CheckStatus::Warn);
  EXPECT_EQ(r.find("edge-count-G2")->status, CheckStatus::Warn);
  EXPECT_EQ(r.find("edge-count-G1")->status, CheckStatus::Pass);
  const auto pf = compute_pf(c);
  EXPECT_NEAR(pf.beta1, 3.0, 1e-10);
  EXPECT_NEAR(pf.beta0, 1.0, 1e-10);
  expect_balanced(c, pf, 1e-10);
  EXPECT_EQ(parallel_config(2).graph(GraphSlot::G1).edge_count(), 2u);
  EXPECT_EQ(parallel_config(2).graph(GraphSlot::G0).edge_count(), 1u);
}

TEST(Graphs, HadamardStarWeights) {
  const auto c = hadamard_config(4);
  const auto pf = compute_pf(c);
  EXPECT_NEAR(pf.beta0, 2.0, 1e-10);
  EXPECT_NEAR(pf.beta1, 2.0, 1e-10);
  EXPECT_NEAR(pf(Layer::V1, 2), 0.5, 1e-10);
  EXPECT_NEAR(pf(Layer::V3, 1), 0.5, 1e-10);
  EXPECT_NEAR(pf(Layer::V2, 0), 1.0, 1e-10);
  expect_balanced(c, pf, 1e-10);
}

TEST(Graphs, Example1IsFourCopiesOfA5) {
  const auto c = example1();
  const auto pf = compute_pf(c);
  const double r3 = std::sqrt(3.0);
  EXPECT_NEAR(pf.beta0, r3, 1e-9);
  EXPECT_NEAR(pf.beta1, r3, 1e-9);
  EXPECT_NEAR(pf.beta0, oracle::pf_eigenvalue(c.graph(GraphSlot::G0), 3, 2), 1e-9);
  EXPECT_NEAR(pf(Layer::V0, 1), 2.0, 1e-9);
  EXPECT_NEAR(pf(Layer::V3, 0), r3, 1e-9);
  expect_balanced(c, pf, 1e-10);
  EXPECT_GT(pf.beta0, 1.0);
  EXPECT_GT(pf.beta1, 1.0);
}

TEST(Graphs, Example2Values) {
  const auto c = example2();
  const auto pf = compute_pf(c);
  EXPECT_NEAR(pf.beta0, 2.0 * std::cos(std::numbers::pi / 12.0), 1e-9);
  EXPECT_NEAR(pf.beta1, std::sqrt(3.0 + std::sqrt(3.0)), 1e-9);
  EXPECT_NEAR(pf.beta1, oracle::pf_eigenvalue(c.graph(GraphSlot::G1), 6, 3), 1e-9);
  EXPECT_NEAR(pf.beta1, oracle::pf_eigenvalue(c.graph(GraphSlot::G3), 5, 3), 1e-9);
  expect_balanced(c, pf, 1e-10);
  EXPECT_GT(pf.beta0, 1.0);
  EXPECT_GT(pf.beta1, 1.0);
}

TEST(Graphs, PfIsDeterministic) {
  const auto a = compute_pf(example2());
  const auto b = compute_pf(example2());
  EXPECT_EQ(a.mu, b.mu);
  EXPECT_EQ(a.beta0, b.beta0);
}

TEST(Graphs, BetaInvariantUnderRelabeling) {
  std::mt19937_64 rng(7);
  for (const auto& base : {example1(), example2()}) {
    const auto pf = compute_pf(base);
    for (int trial = 0; trial < 5; ++trial) {
      const auto q = compute_pf(permuted(base, rng));
      EXPECT_NEAR(q.beta0, pf.beta0, 1e-9);
      EXPECT_NEAR(q.beta1, pf.beta1, 1e-9);
    }
  }
}

TEST(Graphs, IncompatibleVerticalGraphIsInconsistent) {
  // G1 with degrees that no joint weight can balance.
  auto c = example1();
  c.graph(GraphSlot::G1) = BipartiteGraph{};
  c.graph(GraphSlot::G1).add_edge(0, 0);
  c.graph(GraphSlot::G1).add_edge(1, 1);
  c.graph(GraphSlot::G1).add_edge(2, 1);
  c.graph(GraphSlot::G1).add_edge(2, 0);
  EXPECT_THROW(compute_pf(c), InconsistencyError);
}

TEST(Graphs, BuiltinIds) {
  EXPECT_EQ(builtin_example("hadamard:3").layer_size(Layer::V1), 3u);
  EXPECT_EQ(builtin_example("parallel:5").graph(GraphSlot::G3).edge_count(), 5u);
  EXPECT_THROW(builtin_example("nope"), InputError);
  EXPECT_THROW(builtin_example("hadamard:x"), InputError);
  EXPECT_THROW(builtin_example("hadamard:1"), StructuralError);
}
