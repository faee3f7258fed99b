#pragma once

// Four-graph configurations and their Perron-Frobenius weights.
//
//        G0
//   V0 -----> V3
//   |          |
// G1|          |G3
//   v          v
//   V1 -----> V2
//        G2

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "biconnect/error.hpp"
#include "biconnect/report.hpp"

namespace biconnect {

enum class Layer : std::uint8_t { V0 = 0, V1 = 1, V2 = 2, V3 = 3 };
enum class GraphSlot : std::uint8_t { G0 = 0, G1 = 1, G2 = 2, G3 = 3 };

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

constexpr std::size_t index_of(Layer l) { return static_cast<std::size_t>(l); }
constexpr std::size_t index_of(GraphSlot g) { return static_cast<std::size_t>(g); }

constexpr Layer source_layer(GraphSlot g) {
  switch (g) {
    case GraphSlot::G0: return Layer::V0;
    case GraphSlot::G1: return Layer::V0;
    case GraphSlot::G2: return Layer::V1;
    case GraphSlot::G3: return Layer::V3;
  }
  return Layer::V0;
}

constexpr Layer range_layer(GraphSlot g) {
  switch (g) {
    case GraphSlot::G0: return Layer::V3;
    case GraphSlot::G1: return Layer::V1;
    case GraphSlot::G2: return Layer::V2;
    case GraphSlot::G3: return Layer::V2;
  }
  return Layer::V0;
}

inline std::string_view layer_name(Layer l) {
  static constexpr std::array<std::string_view, 4> names{"V0", "V1", "V2", "V3"};
  return names[index_of(l)];
}

inline std::string_view graph_name(GraphSlot g) {
  static constexpr std::array<std::string_view, 4> names{"G0", "G1", "G2", "G3"};
  return names[index_of(g)];
}

inline constexpr std::array<Layer, 4> kLayers{Layer::V0, Layer::V1, Layer::V2, Layer::V3};
inline constexpr std::array<GraphSlot, 4> kSlots{GraphSlot::G0, GraphSlot::G1, GraphSlot::G2,
                                                 GraphSlot::G3};

struct VertexId {
  Layer layer = Layer::V0;
  std::size_t index = 0;
  friend auto operator<=>(const VertexId&, const VertexId&) = default;
};

/// An oriented edge. `source`/`range` index into the source/range layer of the
/// slot the owning graph occupies. `factors` is non-empty only for edges of a
/// composite (stacked) vertical graph and lists the constituent edge ids.
struct Edge {
  std::size_t id = 0;
  std::size_t source = 0;
  std::size_t range = 0;
  std::vector<std::size_t> factors;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct BipartiteGraph {
  std::vector<Edge> edges;
  bool reversed = false;  // this graph is the tilde of a stored graph

  std::size_t edge_count() const { return edges.size(); }
  const Edge& edge(std::size_t id) const { return edges.at(id); }

  /// Δ_{xy}: number of edges from x to y.
  std::size_t multiplicity(std::size_t x, std::size_t y) const {
    return static_cast<std::size_t>(std::count_if(
        edges.begin(), edges.end(), [&](const Edge& e) { return e.source == x && e.range == y; }));
  }

  bool parallel(std::size_t a, std::size_t b) const {
    return edges[a].source == edges[b].source && edges[a].range == edges[b].range;
  }

  /// Same edge list up to the `reversed` flag and factor bookkeeping.
  bool same_structure(const BipartiteGraph& other) const {
    if (edges.size() != other.edges.size()) return false;
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (edges[i].source != other.edges[i].source || edges[i].range != other.edges[i].range)
        return false;
    return true;
  }

  /// Orientation-reversed copy; edge ids are preserved.
  BipartiteGraph reversed_graph() const {
    BipartiteGraph out;
    out.reversed = !reversed;
    out.edges.reserve(edges.size());
    for (const auto& e : edges) out.edges.push_back({e.id, e.range, e.source, e.factors});
    return out;
  }

  void add_edge(std::size_t source, std::size_t range) {
    edges.push_back({edges.size(), source, range, {}});
  }
};

struct FourGraphConfig {
  std::string name;
  std::array<std::vector<std::string>, 4> layers;  // vertex labels, indexed by Layer
  std::array<BipartiteGraph, 4> graphs;            // indexed by GraphSlot

  const BipartiteGraph& graph(GraphSlot g) const { return graphs[index_of(g)]; }
  BipartiteGraph& graph(GraphSlot g) { return graphs[index_of(g)]; }
  std::size_t layer_size(Layer l) const { return layers[index_of(l)].size(); }

  VertexId source(GraphSlot g, std::size_t edge) const {
    return {source_layer(g), graph(g).edge(edge).source};
  }
  VertexId range(GraphSlot g, std::size_t edge) const {
    return {range_layer(g), graph(g).edge(edge).range};
  }
};

/// Throws StructuralError unless every edge id is contiguous and every endpoint
/// resolves inside the slot's declared layers.
inline void check_structure(const FourGraphConfig& cfg) {
  for (GraphSlot g : kSlots) {
    const auto& gr = cfg.graph(g);
    const auto ns = cfg.layer_size(source_layer(g));
    const auto nr = cfg.layer_size(range_layer(g));
    for (std::size_t i = 0; i < gr.edges.size(); ++i) {
      const auto& e = gr.edges[i];
      if (e.id != i)
        throw StructuralError(std::string(graph_name(g)) + ": edge ids must be contiguous from 0");
      if (e.source >= ns || e.range >= nr)
        throw StructuralError(std::string(graph_name(g)) + ": edge " + std::to_string(i) +
                              " has an endpoint outside its layers");
    }
  }
}

namespace detail {

inline bool bipartite_connected(const BipartiteGraph& g, std::size_t ns, std::size_t nr) {
  const std::size_t n = ns + nr;
  if (n == 0) return false;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : g.edges) parent[find(e.source)] = find(ns + e.range);
  const auto root = find(0);
  for (std::size_t v = 1; v < n; ++v)
    if (find(v) != root) return false;
  return true;
}

}  // namespace detail

inline ValidationReport validate_config(const FourGraphConfig& cfg) {
  check_structure(cfg);
  ValidationReport r;
  std::vector<std::size_t> empty;
  for (Layer l : kLayers)
    if (cfg.layer_size(l) == 0) empty.push_back(index_of(l));
  r.add("layers-nonempty", empty.empty() ? CheckStatus::Pass : CheckStatus::Fail,
        static_cast<double>(empty.size()), empty);
  // Endpoint/layer agreement is enforced by check_structure above.
  r.add("layer-consistency", CheckStatus::Pass);
  for (GraphSlot g : {GraphSlot::G0, GraphSlot::G2}) {
    const bool ok = detail::bipartite_connected(cfg.graph(g), cfg.layer_size(source_layer(g)),
                                                cfg.layer_size(range_layer(g)));
    r.add(std::string(graph_name(g)) + "-connected", ok ? CheckStatus::Pass : CheckStatus::Fail,
          ok ? 0.0 : 1.0);
  }
  for (GraphSlot g : kSlots) {
    const auto n = cfg.graph(g).edge_count();
    r.add(std::string("edge-count-") + std::string(graph_name(g)),
          n > 1 ? CheckStatus::Pass : CheckStatus::Warn, static_cast<double>(n));
  }
  return r;
}

struct PFData {
  std::array<std::vector<double>, 4> mu;
  double beta0 = 0.0;
  double beta1 = 0.0;
  double tol = 0.0;

  double operator()(Layer l, std::size_t i) const { return mu[index_of(l)].at(i); }
  double operator()(VertexId v) const { return (*this)(v.layer, v.index); }
};

/// Max-norm residuals of the eight balance equations, in the order
/// G0 (V3 side, V0 side), G2 (V2, V1), G1 (V1, V0), G3 (V2, V3).
inline std::array<double, 8> balance_residuals(const FourGraphConfig& cfg, const PFData& pf) {
  std::array<double, 8> res{};
  auto one_graph = [&](GraphSlot g, double beta, std::size_t slot) {
    const Layer ls = source_layer(g), lr = range_layer(g);
    std::vector<double> into_range(cfg.layer_size(lr), 0.0), into_source(cfg.layer_size(ls), 0.0);
    for (const auto& e : cfg.graph(g).edges) {
      into_range[e.range] += pf(ls, e.source);
      into_source[e.source] += pf(lr, e.range);
    }
    double a = 0.0, b = 0.0;
    for (std::size_t y = 0; y < into_range.size(); ++y)
      a = std::max(a, std::abs(into_range[y] - beta * pf(lr, y)));
    for (std::size_t x = 0; x < into_source.size(); ++x)
      b = std::max(b, std::abs(into_source[x] - beta * pf(ls, x)));
    res[slot] = a;
    res[slot + 1] = b;
  };
  one_graph(GraphSlot::G0, pf.beta0, 0);
  one_graph(GraphSlot::G2, pf.beta0, 2);
  one_graph(GraphSlot::G1, pf.beta1, 4);
  one_graph(GraphSlot::G3, pf.beta1, 6);
  return res;
}

inline constexpr std::size_t kPfIterationCap = 100000;
inline constexpr double kDefaultPfTol = 1e-10;

namespace detail {

struct PfBlock {
  std::vector<double> source_side;
  std::vector<double> range_side;
  double beta = 0.0;
};

// Power iteration on (A + I) for the symmetric bipartite adjacency A of g; the
// shift separates the PF eigenvalue β+1 from the mirrored -β+1.
inline PfBlock power_iterate(const BipartiteGraph& g, std::size_t ns, std::size_t nr, double tol) {
  const std::size_t n = ns + nr;
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n))), y(n);
  double beta = 0.0;
  for (std::size_t it = 0; it < kPfIterationCap; ++it) {
    std::fill(y.begin(), y.end(), 0.0);
    for (const auto& e : g.edges) {
      y[e.source] += x[ns + e.range];
      y[ns + e.range] += x[e.source];
    }
    // Rayleigh quotient of A and residual ||Ax - βx||.
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num += x[i] * y[i];
      den += x[i] * x[i];
    }
    beta = num / den;
    double resid = 0.0;
    for (std::size_t i = 0; i < n; ++i) resid = std::max(resid, std::abs(y[i] - beta * x[i]));
    if (resid < std::max(tol * 1e-3, 1e-14)) {
      PfBlock out;
      out.beta = beta;
      out.source_side.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(ns));
      out.range_side.assign(x.begin() + static_cast<std::ptrdiff_t>(ns), x.end());
      return out;
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] += x[i];
      norm += y[i] * y[i];
    }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
  }
  throw ConvergenceError("power iteration did not converge within " +
                         std::to_string(kPfIterationCap) + " steps");
}

}  // namespace detail

/// Joint Perron-Frobenius weights: μ on V0⊔V3 from G0 and on V1⊔V2 from G2,
/// with the relative scale of the two blocks fixed by the G1 balance equations.
/// Normalized so that μ(first vertex of V0) = 1.
inline PFData compute_pf(const FourGraphConfig& cfg, double tol = kDefaultPfTol) {
  const auto report = validate_config(cfg);
  if (!report.passed()) {
    std::string names;
    for (const auto& f : report.failures()) names += " " + f.name;
    throw StructuralError("configuration fails validation:" + names);
  }
  const auto top = detail::power_iterate(cfg.graph(GraphSlot::G0), cfg.layer_size(Layer::V0),
                                         cfg.layer_size(Layer::V3), tol);
  const auto bottom = detail::power_iterate(cfg.graph(GraphSlot::G2), cfg.layer_size(Layer::V1),
                                            cfg.layer_size(Layer::V2), tol);
  if (std::abs(top.beta - bottom.beta) > tol * std::max(1.0, top.beta))
    throw InconsistencyError("G0 and G2 have different PF eigenvalues", std::abs(top.beta - bottom.beta));

  PFData pf;
  pf.tol = tol;
  pf.beta0 = 0.5 * (top.beta + bottom.beta);
  const double s = top.source_side.at(0);
  for (double v : top.source_side) pf.mu[index_of(Layer::V0)].push_back(v / s);
  for (double v : top.range_side) pf.mu[index_of(Layer::V3)].push_back(v / s);

  // With u = μ|V0 and v = unit-scale μ|V1, the G1 equations read
  // D^T u = β1 c v and D (c v) = β1 u; least squares gives β1 c and β1 / c.
  const auto& u = pf.mu[index_of(Layer::V0)];
  const auto& v = bottom.source_side;
  double dtu_v = 0.0, vv = 0.0, dv_u = 0.0, uu = 0.0;
  for (const auto& e : cfg.graph(GraphSlot::G1).edges) {
    dtu_v += u[e.source] * v[e.range];
    dv_u += v[e.range] * u[e.source];
  }
  for (double x : v) vv += x * x;
  for (double x : u) uu += x * x;
  const double beta_c = dtu_v / vv, beta_over_c = dv_u / uu;
  if (!(beta_c > 0.0) || !(beta_over_c > 0.0))
    throw InconsistencyError("G1 does not link the V0 and V1 weights", 1.0);
  const double c = std::sqrt(beta_c / beta_over_c);
  pf.beta1 = std::sqrt(beta_c * beta_over_c);
  for (double x : bottom.source_side) pf.mu[index_of(Layer::V1)].push_back(c * x);
  for (double x : bottom.range_side) pf.mu[index_of(Layer::V2)].push_back(c * x);

  const auto res = balance_residuals(cfg, pf);
  const double worst = *std::max_element(res.begin(), res.end());
  if (worst >= tol)
    throw InconsistencyError("no joint PF weight satisfies all balance equations (worst residual " +
                                 std::to_string(worst) + ")",
                             worst);
  for (const auto& layer : pf.mu)
    for (double m : layer)
      if (!(m > 0.0)) throw InconsistencyError("non-positive PF weight", m);
  return pf;
}

/// Rescales μ so that μ(first vertex of V0) = 1.
inline PFData normalized(PFData pf) {
  const double s = pf.mu[index_of(Layer::V0)].at(0);
  for (auto& layer : pf.mu)
    for (auto& m : layer) m /= s;
  return pf;
}

// ---------------------------------------------------------------------------
// Built-in configurations

namespace detail {

inline std::vector<std::string> labels(int first, int last) {
  std::vector<std::string> out;
  for (int i = first; i <= last; ++i) out.push_back(std::to_string(i));
  return out;
}

// Edges given by figure labels; `offset_s`/`offset_r` are the first labels of
// the source/range layers.
inline BipartiteGraph labelled(std::initializer_list<std::pair<int, int>> edges, int offset_s,
                               int offset_r) {
  BipartiteGraph g;
  for (auto [s, r] : edges)
    g.add_edge(static_cast<std::size_t>(s - offset_s), static_cast<std::size_t>(r - offset_r));
  return g;
}

}  // namespace detail

/// Example 1: four copies of the path A5, vertices labelled 1-10.
inline FourGraphConfig example1() {
  FourGraphConfig c;
  c.name = "example1";
  c.layers[index_of(Layer::V0)] = detail::labels(1, 3);
  c.layers[index_of(Layer::V3)] = detail::labels(4, 5);
  c.layers[index_of(Layer::V1)] = detail::labels(6, 7);
  c.layers[index_of(Layer::V2)] = detail::labels(8, 10);
  c.graph(GraphSlot::G0) = detail::labelled({{1, 4}, {2, 4}, {2, 5}, {3, 5}}, 1, 4);
  c.graph(GraphSlot::G1) = detail::labelled({{1, 6}, {2, 6}, {2, 7}, {3, 7}}, 1, 6);
  c.graph(GraphSlot::G2) = detail::labelled({{6, 8}, {6, 9}, {7, 9}, {7, 10}}, 6, 8);
  c.graph(GraphSlot::G3) = detail::labelled({{4, 8}, {4, 9}, {5, 9}, {5, 10}}, 4, 8);
  return c;
}

/// Example 2: four different graphs, vertices labelled 1-17.
inline FourGraphConfig example2() {
  FourGraphConfig c;
  c.name = "example2";
  c.layers[index_of(Layer::V0)] = detail::labels(1, 6);
  c.layers[index_of(Layer::V3)] = detail::labels(7, 11);
  c.layers[index_of(Layer::V1)] = detail::labels(12, 14);
  c.layers[index_of(Layer::V2)] = detail::labels(15, 17);
  c.graph(GraphSlot::G0) = detail::labelled(
      {{1, 7}, {2, 7}, {2, 8}, {3, 8}, {3, 9}, {4, 9}, {4, 10}, {5, 10}, {5, 11}, {6, 11}}, 1, 7);
  c.graph(GraphSlot::G1) = detail::labelled(
      {{1, 12}, {4, 12}, {4, 13}, {2, 13}, {5, 13}, {3, 13}, {3, 14}, {6, 14}}, 1, 12);
  c.graph(GraphSlot::G2) =
      detail::labelled({{12, 15}, {13, 15}, {13, 16}, {13, 17}, {14, 17}}, 12, 15);
  c.graph(GraphSlot::G3) = detail::labelled(
      {{7, 15}, {10, 15}, {10, 16}, {9, 15}, {9, 17}, {8, 16}, {8, 17}, {11, 17}}, 7, 15);
  return c;
}

/// Star configuration carrying an n×n complex Hadamard matrix: V0 = V2 = {*},
/// V1 and V3 have n vertices, and every graph is the n-edge star.
inline FourGraphConfig hadamard_config(std::size_t n) {
  if (n < 2) throw StructuralError("hadamard configuration needs n >= 2");
  FourGraphConfig c;
  c.name = "hadamard:" + std::to_string(n);
  c.layers[index_of(Layer::V0)] = {"*0"};
  c.layers[index_of(Layer::V2)] = {"*2"};
  for (std::size_t i = 0; i < n; ++i) {
    c.layers[index_of(Layer::V1)].push_back("r" + std::to_string(i));
    c.layers[index_of(Layer::V3)].push_back("c" + std::to_string(i));
    c.graph(GraphSlot::G0).add_edge(0, i);
    c.graph(GraphSlot::G1).add_edge(0, i);
    c.graph(GraphSlot::G2).add_edge(i, 0);
    c.graph(GraphSlot::G3).add_edge(i, 0);
  }
  return c;
}

/// Single vertex per layer, n parallel edges on G1 and G3, one edge on G0, G2.
inline FourGraphConfig parallel_config(std::size_t n) {
  if (n < 2) throw StructuralError("parallel configuration needs n >= 2");
  FourGraphConfig c;
  c.name = "parallel:" + std::to_string(n);
  c.layers = {std::vector<std::string>{"p"}, {"q"}, {"r"}, {"s"}};
  c.graph(GraphSlot::G0).add_edge(0, 0);
  c.graph(GraphSlot::G2).add_edge(0, 0);
  for (std::size_t i = 0; i < n; ++i) {
    c.graph(GraphSlot::G1).add_edge(0, 0);
    c.graph(GraphSlot::G3).add_edge(0, 0);
  }
  return c;
}

/// "example1", "example2", "hadamard:N", "parallel:N".
inline FourGraphConfig builtin_example(std::string_view id) {
  if (id == "example1") return example1();
  if (id == "example2") return example2();
  auto with_n = [&](std::string_view prefix) -> std::size_t {
    const auto rest = id.substr(prefix.size());
    if (rest.empty()) throw InputError("missing size in example id '" + std::string(id) + "'");
    std::size_t n = 0;
    for (char ch : rest) {
      if (ch < '0' || ch > '9') throw InputError("bad size in example id '" + std::string(id) + "'");
      n = n * 10 + static_cast<std::size_t>(ch - '0');
    }
    return n;
  };
  if (id.rfind("hadamard:", 0) == 0) return hadamard_config(with_n("hadamard:"));
  if (id.rfind("parallel:", 0) == 0) return parallel_config(with_n("parallel:"));
  throw InputError("unknown example id '" + std::string(id) + "'");
}

}  // namespace biconnect
