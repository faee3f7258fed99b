#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "biconnect/graphs.hpp"
#include "biconnect/linalg.hpp"
#include "biconnect/report.hpp"

namespace biconnect {

/// Edge ids (ξ0, ξ1, ξ2, ξ3) in (G0, G1, G2, G3): top, left, bottom, right.
using CellKey = std::array<std::size_t, 4>;

struct Corners {
  std::size_t x0, x1, x2, x3;
};

/// True iff the ids resolve and s(ξ0)=s(ξ1), r(ξ0)=s(ξ3), r(ξ1)=s(ξ2), r(ξ2)=r(ξ3).
inline bool cell_matches(const FourGraphConfig& cfg, const CellKey& c) {
  for (GraphSlot g : kSlots)
    if (c[index_of(g)] >= cfg.graph(g).edge_count()) return false;
  const auto& e0 = cfg.graph(GraphSlot::G0).edges[c[0]];
  const auto& e1 = cfg.graph(GraphSlot::G1).edges[c[1]];
  const auto& e2 = cfg.graph(GraphSlot::G2).edges[c[2]];
  const auto& e3 = cfg.graph(GraphSlot::G3).edges[c[3]];
  return e0.source == e1.source && e0.range == e3.source && e1.range == e2.source &&
         e2.range == e3.range;
}

inline Corners corners(const FourGraphConfig& cfg, const CellKey& c) {
  const auto& e0 = cfg.graph(GraphSlot::G0).edge(c[0]);
  const auto& e2 = cfg.graph(GraphSlot::G2).edge(c[2]);
  return {e0.source, e2.source, e2.range, e0.range};
}

/// Every matching cell, in lexicographic key order.
inline std::vector<CellKey> matching_cells(const FourGraphConfig& cfg) {
  std::vector<CellKey> out;
  const auto& g0 = cfg.graph(GraphSlot::G0);
  const auto& g1 = cfg.graph(GraphSlot::G1);
  const auto& g2 = cfg.graph(GraphSlot::G2);
  const auto& g3 = cfg.graph(GraphSlot::G3);
  for (const auto& e0 : g0.edges)
    for (const auto& e1 : g1.edges) {
      if (e1.source != e0.source) continue;
      for (const auto& e2 : g2.edges) {
        if (e2.source != e1.range) continue;
        for (const auto& e3 : g3.edges)
          if (e3.source == e0.range && e3.range == e2.range)
            out.push_back({e0.id, e1.id, e2.id, e3.id});
      }
    }
  return out;
}

/// Complex value per cell on a four-graph configuration. Values are stored
/// sparsely; evaluating a non-matching or absent cell gives exactly 0.
class Connection {
 public:
  Connection() = default;

  Connection(FourGraphConfig cfg, std::optional<PFData> pf, std::map<CellKey, Complex> values)
      : cfg_(std::move(cfg)), pf_(std::move(pf)), values_(std::move(values)) {
    check_structure(cfg_);
    for (const auto& [key, v] : values_)
      if (!cell_matches(cfg_, key) && v != Complex(0.0))
        throw StructuralError("nonzero value on a non-matching cell");
    std::erase_if(values_, [&](const auto& kv) { return !cell_matches(cfg_, kv.first); });
  }

  const FourGraphConfig& config() const { return cfg_; }
  const std::optional<PFData>& pf_data() const { return pf_; }
  const PFData& pf() const {
    if (!pf_) throw InputError("connection carries no Perron-Frobenius data");
    return *pf_;
  }
  bool has_pf() const { return pf_.has_value(); }

  Complex operator()(const CellKey& c) const {
    const auto it = values_.find(c);
    return it == values_.end() ? Complex(0.0) : it->second;
  }
  Complex operator()(std::size_t e0, std::size_t e1, std::size_t e2, std::size_t e3) const {
    return (*this)(CellKey{e0, e1, e2, e3});
  }

  const std::map<CellKey, Complex>& values() const { return values_; }

  /// √(μ(s ξ0) μ(r ξ2) / (μ(r ξ0) μ(s ξ2))): the factor attached to a
  /// horizontally reflected cell.
  double reflection_factor(const CellKey& c) const {
    const auto k = corners(cfg_, c);
    const auto& p = pf();
    return std::sqrt(p(Layer::V0, k.x0) * p(Layer::V2, k.x2) /
                     (p(Layer::V3, k.x3) * p(Layer::V1, k.x1)));
  }

 private:
  FourGraphConfig cfg_;
  std::optional<PFData> pf_;
  std::map<CellKey, Complex> values_;
};

// ---------------------------------------------------------------------------
// Unitarity

/// The matrix of W for one corner pair (x0, x2): rows are paths (ξ1, ξ2)
/// through V1, columns are paths (ξ0, ξ3) through V3.
struct UnitarityBlock {
  std::size_t x0 = 0, x2 = 0;
  std::vector<std::array<std::size_t, 2>> rows;  // (ξ1, ξ2)
  std::vector<std::array<std::size_t, 2>> cols;  // (ξ0, ξ3)
  MatrixC m;
};

inline std::vector<UnitarityBlock> unitarity_blocks(const Connection& w) {
  const auto& cfg = w.config();
  std::vector<UnitarityBlock> blocks;
  for (std::size_t x0 = 0; x0 < cfg.layer_size(Layer::V0); ++x0)
    for (std::size_t x2 = 0; x2 < cfg.layer_size(Layer::V2); ++x2) {
      UnitarityBlock b;
      b.x0 = x0;
      b.x2 = x2;
      for (const auto& e1 : cfg.graph(GraphSlot::G1).edges)
        if (e1.source == x0)
          for (const auto& e2 : cfg.graph(GraphSlot::G2).edges)
            if (e2.source == e1.range && e2.range == x2) b.rows.push_back({e1.id, e2.id});
      for (const auto& e0 : cfg.graph(GraphSlot::G0).edges)
        if (e0.source == x0)
          for (const auto& e3 : cfg.graph(GraphSlot::G3).edges)
            if (e3.source == e0.range && e3.range == x2) b.cols.push_back({e0.id, e3.id});
      if (b.rows.empty() && b.cols.empty()) continue;
      b.m = MatrixC::Zero(static_cast<Eigen::Index>(b.rows.size()),
                          static_cast<Eigen::Index>(b.cols.size()));
      for (std::size_t i = 0; i < b.rows.size(); ++i)
        for (std::size_t j = 0; j < b.cols.size(); ++j)
          b.m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              w(b.cols[j][0], b.rows[i][0], b.rows[i][1], b.cols[j][1]);
      blocks.push_back(std::move(b));
    }
  return blocks;
}

namespace detail {

// Runs fn(i) for i in [0, n); results land in caller-owned slots, so the
// outcome does not depend on scheduling.
template <class Fn>
void for_each_index(std::size_t n, bool parallel, Fn fn) {
  if (!parallel || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(
                                                           n, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += workers) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Blockwise unitarity. Entries: "shape" (blocks whose row and column counts
/// differ) and "unitarity" (max deviation of M*M and MM* from the identity).
inline ValidationReport check_unitarity(const Connection& w, double tol = kDefaultCheckTol,
                                        bool parallel = false) {
  const auto blocks = unitarity_blocks(w);
  std::vector<double> defects(blocks.size(), 0.0);
  std::vector<char> square(blocks.size(), 1);
  detail::for_each_index(blocks.size(), parallel, [&](std::size_t i) {
    const auto& b = blocks[i];
    if (b.rows.size() != b.cols.size()) {
      square[i] = 0;
      defects[i] = 1.0;
    } else {
      defects[i] = unitarity_defect(b.m);
    }
  });
  ValidationReport r;
  std::vector<std::size_t> bad_shape, bad_value;
  double worst = 0.0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::size_t flat = blocks[i].x0 * w.config().layer_size(Layer::V2) + blocks[i].x2;
    if (!square[i]) bad_shape.push_back(flat);
    else if (defects[i] >= tol) bad_value.push_back(flat);
    if (square[i]) worst = std::max(worst, defects[i]);
  }
  r.add("shape", bad_shape.empty() ? CheckStatus::Pass : CheckStatus::Fail,
        static_cast<double>(bad_shape.size()), bad_shape);
  r.add("unitarity", bad_value.empty() ? CheckStatus::Pass : CheckStatus::Fail, worst, bad_value);
  return r;
}

// ---------------------------------------------------------------------------
// Renormalizations

enum class Renormalization { Prime, Bar, BarPrime };

inline const char* to_string(Renormalization m) {
  switch (m) {
    case Renormalization::Prime: return "prime";
    case Renormalization::Bar: return "bar";
    case Renormalization::BarPrime: return "bar_prime";
  }
  return "?";
}

inline Renormalization parse_renormalization(std::string_view s) {
  if (s == "prime") return Renormalization::Prime;
  if (s == "bar") return Renormalization::Bar;
  if (s == "bar_prime" || s == "bar-prime") return Renormalization::BarPrime;
  throw InputError("unknown renormalization '" + std::string(s) + "'");
}

namespace detail {

// How the reflected configuration is read off the original one.
struct Reflection {
  std::array<Layer, 4> layer_from;                          // new layer i <- old layer
  std::array<std::pair<GraphSlot, bool>, 4> graph_from;     // new slot i <- (old slot, reversed)
  std::array<std::size_t, 4> key_from;                      // new key[i] = old key[key_from[i]]
  bool conjugate;
  bool reflection_factor;
  const char* suffix;
};

inline Reflection reflection(Renormalization m) {
  using L = Layer;
  using G = GraphSlot;
  switch (m) {
    case Renormalization::Prime:
      // (ξ̃0, ξ3, ξ̃2, ξ1)
      return {{L::V3, L::V2, L::V1, L::V0},
              {{{G::G0, true}, {G::G3, false}, {G::G2, true}, {G::G1, false}}},
              {0, 3, 2, 1}, true, true, "'"};
    case Renormalization::Bar:
      // (ξ2, ξ̃1, ξ0, ξ̃3)
      return {{L::V1, L::V0, L::V3, L::V2},
              {{{G::G2, false}, {G::G1, true}, {G::G0, false}, {G::G3, true}}},
              {2, 1, 0, 3}, true, true, "~"};
    case Renormalization::BarPrime:
      // (ξ̃2, ξ̃3, ξ̃0, ξ̃1)
      return {{L::V2, L::V3, L::V0, L::V1},
              {{{G::G2, true}, {G::G3, true}, {G::G0, true}, {G::G1, true}}},
              {2, 3, 0, 1}, false, false, "~'"};
  }
  return {};
}

inline FourGraphConfig reflect_config(const FourGraphConfig& cfg, const Reflection& r) {
  FourGraphConfig out;
  out.name = cfg.name + r.suffix;
  for (std::size_t i = 0; i < 4; ++i) {
    out.layers[i] = cfg.layers[index_of(r.layer_from[i])];
    const auto& [slot, rev] = r.graph_from[i];
    out.graphs[i] = rev ? cfg.graph(slot).reversed_graph() : cfg.graph(slot);
  }
  return out;
}

inline PFData reflect_pf(const PFData& pf, const Reflection& r) {
  PFData out = pf;
  for (std::size_t i = 0; i < 4; ++i) out.mu[i] = pf.mu[index_of(r.layer_from[i])];
  return normalized(out);
}

}  // namespace detail

/// prime:     W'(ξ̃0, ξ3, ξ̃2, ξ1)  = κ · conj W(ξ0, ξ1, ξ2, ξ3)
/// bar:       W̄(ξ2, ξ̃1, ξ0, ξ̃3)  = κ · conj W(ξ0, ξ1, ξ2, ξ3)
/// bar_prime: W̄'(ξ̃2, ξ̃3, ξ̃0, ξ̃1) = W(ξ0, ξ1, ξ2, ξ3)
/// with κ = √(μ(s ξ0) μ(r ξ2) / (μ(r ξ0) μ(s ξ2))).
inline Connection renormalize(const Connection& w, Renormalization mode) {
  const auto r = detail::reflection(mode);
  std::map<CellKey, Complex> values;
  for (const auto& [key, v] : w.values()) {
    CellKey nk{key[r.key_from[0]], key[r.key_from[1]], key[r.key_from[2]], key[r.key_from[3]]};
    Complex nv = r.conjugate ? std::conj(v) : v;
    if (r.reflection_factor) nv *= w.reflection_factor(key);
    values.emplace(nk, nv);
  }
  std::optional<PFData> pf;
  if (w.has_pf()) pf = detail::reflect_pf(w.pf(), r);
  return Connection(detail::reflect_config(w.config(), r), std::move(pf), std::move(values));
}

/// CellKey of the bar_prime cell corresponding to `key` (the 180° relabeling).
inline CellKey rotate_half_turn(const CellKey& key) { return {key[2], key[3], key[0], key[1]}; }

/// Unitarity of W and of W'. Entry names carry the prefixes "W:" and "W':".
inline ValidationReport check_biunitarity(const Connection& w, double tol = kDefaultCheckTol,
                                          bool parallel = false) {
  ValidationReport r;
  r.merge(check_unitarity(w, tol, parallel), "W:");
  r.merge(check_unitarity(renormalize(w, Renormalization::Prime), tol, parallel), "W':");
  return r;
}

// ---------------------------------------------------------------------------
// Gauge equivalence

/// Block unitaries on E(G1) (u) and E(G3) (v); entries vanish off parallel pairs.
struct GaugePair {
  MatrixC u;
  MatrixC v;
};

namespace detail {

inline double off_parallel_mass(const MatrixC& m, const BipartiteGraph& g) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (!g.parallel(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))
        worst = std::max(worst, std::abs(m(i, j)));
  return worst;
}

inline void check_gauge_shape(const FourGraphConfig& cfg, const GaugePair& g, double tol) {
  const auto n1 = static_cast<Eigen::Index>(cfg.graph(GraphSlot::G1).edge_count());
  const auto n3 = static_cast<Eigen::Index>(cfg.graph(GraphSlot::G3).edge_count());
  if (g.u.rows() != n1 || g.u.cols() != n1 || g.v.rows() != n3 || g.v.cols() != n3)
    throw MismatchError("gauge blocks do not match E(G1) x E(G1) and E(G3) x E(G3)");
  if (off_parallel_mass(g.u, cfg.graph(GraphSlot::G1)) > tol ||
      off_parallel_mass(g.v, cfg.graph(GraphSlot::G3)) > tol)
    throw MismatchError("gauge matrix has entries between non-parallel edges");
}

}  // namespace detail

/// W1(ξ0,ξ1,ξ2,ξ3) = Σ_{ξ'1,ξ'3} U_{ξ1,ξ'1} W(ξ0,ξ'1,ξ2,ξ'3) V_{ξ'3,ξ3}.
inline Connection gauge_transform(const Connection& w, const GaugePair& g,
                                  double tol = kDefaultCheckTol) {
  const auto& cfg = w.config();
  detail::check_gauge_shape(cfg, g, tol);
  if (unitarity_defect(g.u) > tol || unitarity_defect(g.v) > tol)
    throw MismatchError("gauge blocks are not unitary");
  const auto& g1 = cfg.graph(GraphSlot::G1);
  const auto& g3 = cfg.graph(GraphSlot::G3);
  std::map<CellKey, Complex> values;
  for (const auto& key : matching_cells(cfg)) {
    Complex acc = 0.0;
    for (std::size_t a = 0; a < g1.edge_count(); ++a) {
      if (!g1.parallel(a, key[1])) continue;
      for (std::size_t b = 0; b < g3.edge_count(); ++b) {
        if (!g3.parallel(b, key[3])) continue;
        acc += g.u(static_cast<Eigen::Index>(key[1]), static_cast<Eigen::Index>(a)) *
               w(key[0], a, key[2], b) *
               g.v(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(key[3]));
      }
    }
    if (acc != Complex(0.0)) values.emplace(key, acc);
  }
  return Connection(cfg, w.pf_data(), std::move(values));
}

/// Random block-unitary matrix supported on parallel pairs of `g`.
template <class R>
MatrixC random_block_unitary(const BipartiteGraph& g, R& rng) {
  const auto n = static_cast<Eigen::Index>(g.edge_count());
  MatrixC m = MatrixC::Zero(n, n);
  std::vector<char> done(g.edge_count(), 0);
  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    if (done[i]) continue;
    std::vector<std::size_t> block;
    for (std::size_t j = i; j < g.edge_count(); ++j)
      if (g.parallel(i, j)) {
        block.push_back(j);
        done[j] = 1;
      }
    const MatrixC q = random_unitary(block.size(), rng);
    for (std::size_t a = 0; a < block.size(); ++a)
      for (std::size_t b = 0; b < block.size(); ++b)
        m(static_cast<Eigen::Index>(block[a]), static_cast<Eigen::Index>(block[b])) =
            q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  }
  return m;
}

template <class R>
GaugePair random_gauge(const FourGraphConfig& cfg, R& rng) {
  MatrixC u = random_block_unitary(cfg.graph(GraphSlot::G1), rng);
  MatrixC v = random_block_unitary(cfg.graph(GraphSlot::G3), rng);
  return {std::move(u), std::move(v)};
}

// ---------------------------------------------------------------------------
// Product and direct sum

namespace detail {

inline bool same_layers(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return a.size() == b.size();
}

// Stacked vertical graph: edges (a, b) with r(a) = s(b).
inline BipartiteGraph compose_vertical(const BipartiteGraph& upper, const BipartiteGraph& lower) {
  BipartiteGraph out;
  for (const auto& a : upper.edges)
    for (const auto& b : lower.edges)
      if (a.range == b.source) out.edges.push_back({out.edges.size(), a.source, b.range, {a.id, b.id}});
  return out;
}

inline double max_relative_gap(const std::vector<double>& a, const std::vector<double>& b,
                               double scale) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - scale * b[i]) / std::max(1.0, std::abs(a[i])));
  return worst;
}

}  // namespace detail

/// Vertical product: w2 sits below w1 and its top graph is w1's bottom graph.
/// value(ξ0, (ξ1,ξ5), ξ4, (ξ3,ξ7)) = Σ_{ξ2} W1(ξ0,ξ1,ξ2,ξ3) W2(ξ2,ξ5,ξ4,ξ7).
inline Connection product(const Connection& w1, const Connection& w2, double tol = kDefaultCheckTol) {
  const auto& c1 = w1.config();
  const auto& c2 = w2.config();
  if (!c1.graph(GraphSlot::G2).same_structure(c2.graph(GraphSlot::G0)) ||
      !detail::same_layers(c1.layers[index_of(Layer::V1)], c2.layers[index_of(Layer::V0)]) ||
      !detail::same_layers(c1.layers[index_of(Layer::V2)], c2.layers[index_of(Layer::V3)]))
    throw MismatchError("bottom graph of the first connection is not the top graph of the second");
  const auto& p1 = w1.pf();
  const auto& p2 = w2.pf();
  const double scale = p1(Layer::V1, 0) / p2(Layer::V0, 0);
  if (detail::max_relative_gap(p1.mu[index_of(Layer::V1)], p2.mu[index_of(Layer::V0)], scale) > tol ||
      detail::max_relative_gap(p1.mu[index_of(Layer::V2)], p2.mu[index_of(Layer::V3)], scale) > tol)
    throw MismatchError("PF weights disagree on the shared layers");

  FourGraphConfig cfg;
  cfg.name = "(" + c1.name + ")*(" + c2.name + ")";
  cfg.layers[index_of(Layer::V0)] = c1.layers[index_of(Layer::V0)];
  cfg.layers[index_of(Layer::V3)] = c1.layers[index_of(Layer::V3)];
  cfg.layers[index_of(Layer::V1)] = c2.layers[index_of(Layer::V1)];
  cfg.layers[index_of(Layer::V2)] = c2.layers[index_of(Layer::V2)];
  cfg.graph(GraphSlot::G0) = c1.graph(GraphSlot::G0);
  cfg.graph(GraphSlot::G2) = c2.graph(GraphSlot::G2);
  cfg.graph(GraphSlot::G1) =
      detail::compose_vertical(c1.graph(GraphSlot::G1), c2.graph(GraphSlot::G1));
  cfg.graph(GraphSlot::G3) =
      detail::compose_vertical(c1.graph(GraphSlot::G3), c2.graph(GraphSlot::G3));

  PFData pf;
  pf.tol = p1.tol;
  pf.beta0 = p1.beta0;
  pf.beta1 = p1.beta1 * p2.beta1;
  pf.mu[index_of(Layer::V0)] = p1.mu[index_of(Layer::V0)];
  pf.mu[index_of(Layer::V3)] = p1.mu[index_of(Layer::V3)];
  for (double m : p2.mu[index_of(Layer::V1)]) pf.mu[index_of(Layer::V1)].push_back(scale * m);
  for (double m : p2.mu[index_of(Layer::V2)]) pf.mu[index_of(Layer::V2)].push_back(scale * m);
  const auto res = balance_residuals(cfg, pf);
  const double worst = *std::max_element(res.begin(), res.end());
  if (worst > std::max(tol, 10 * p1.tol))
    throw InconsistencyError("product PF weights violate the balance equations", worst);

  const auto& mid = c1.graph(GraphSlot::G2);
  std::map<CellKey, Complex> values;
  for (const auto& key : matching_cells(cfg)) {
    const auto& left = cfg.graph(GraphSlot::G1).edge(key[1]).factors;
    const auto& right = cfg.graph(GraphSlot::G3).edge(key[3]).factors;
    Complex acc = 0.0;
    for (std::size_t e2 = 0; e2 < mid.edge_count(); ++e2)
      acc += w1(key[0], left[0], e2, right[0]) * w2(e2, left[1], key[2], right[1]);
    if (acc != Complex(0.0)) values.emplace(key, acc);
  }
  return Connection(std::move(cfg), std::move(pf), std::move(values));
}

/// W1 ⊕ W2 on (G0, G1 ⊔ G1', G2, G3 ⊔ G3'); edges of the second summand are
/// numbered after those of the first. Mixed cells are 0.
inline Connection direct_sum(const Connection& w1, const Connection& w2,
                             double pf_tol = kDefaultPfTol) {
  const auto& c1 = w1.config();
  const auto& c2 = w2.config();
  for (Layer l : kLayers)
    if (c1.layer_size(l) != c2.layer_size(l)) throw MismatchError("direct sum needs equal layers");
  if (!c1.graph(GraphSlot::G0).same_structure(c2.graph(GraphSlot::G0)) ||
      !c1.graph(GraphSlot::G2).same_structure(c2.graph(GraphSlot::G2)))
    throw MismatchError("direct sum needs the same horizontal graphs");
  FourGraphConfig cfg = c1;
  cfg.name = "(" + c1.name + ")+(" + c2.name + ")";
  const auto n1 = c1.graph(GraphSlot::G1).edge_count();
  const auto n3 = c1.graph(GraphSlot::G3).edge_count();
  for (const auto& e : c2.graph(GraphSlot::G1).edges) cfg.graph(GraphSlot::G1).add_edge(e.source, e.range);
  for (const auto& e : c2.graph(GraphSlot::G3).edges) cfg.graph(GraphSlot::G3).add_edge(e.source, e.range);
  std::map<CellKey, Complex> values = w1.values();
  for (const auto& [k, v] : w2.values()) values.emplace(CellKey{k[0], k[1] + n1, k[2], k[3] + n3}, v);
  auto pf = compute_pf(cfg, pf_tol);
  return Connection(std::move(cfg), std::move(pf), std::move(values));
}

// ---------------------------------------------------------------------------
// Intertwiners and irreducibility

namespace detail {

inline std::vector<std::array<std::size_t, 2>> parallel_pairs(const BipartiteGraph& g) {
  std::vector<std::array<std::size_t, 2>> out;
  for (std::size_t i = 0; i < g.edge_count(); ++i)
    for (std::size_t j = 0; j < g.edge_count(); ++j)
      if (g.parallel(i, j)) out.push_back({i, j});
  return out;
}

inline bool same_config_shape(const FourGraphConfig& a, const FourGraphConfig& b) {
  for (Layer l : kLayers)
    if (a.layer_size(l) != b.layer_size(l)) return false;
  for (GraphSlot g : kSlots)
    if (!a.graph(g).same_structure(b.graph(g))) return false;
  return true;
}

}  // namespace detail

/// Basis of the pairs (u, v), supported on parallel pairs of G1 / G3, with
/// Σ_{ξ'1} u_{ξ1ξ'1} W2(ξ0,ξ'1,ξ2,ξ3) = Σ_{ξ'3} W1(ξ0,ξ1,ξ2,ξ'3) v_{ξ'3ξ3}
/// for every cell. A unitary equivalence W1 = U·W2·V gives the solution (U, V*).
inline std::vector<GaugePair> intertwiner_space(const Connection& w1, const Connection& w2,
                                                double tol = kDefaultCheckTol,
                                                std::size_t cap = kMaxSystemDimension) {
  const auto& cfg = w1.config();
  if (!detail::same_config_shape(cfg, w2.config()))
    throw MismatchError("intertwiners need connections on identical configurations");
  const auto& g1 = cfg.graph(GraphSlot::G1);
  const auto& g3 = cfg.graph(GraphSlot::G3);
  const auto up = detail::parallel_pairs(g1);
  const auto vp = detail::parallel_pairs(g3);
  const auto cells = matching_cells(cfg);
  const std::size_t unknowns = up.size() + vp.size();
  if (unknowns > cap || cells.size() > cap)
    throw CapExceededError("intertwiner system exceeds the dimension cap");

  MatrixC a = MatrixC::Zero(static_cast<Eigen::Index>(cells.size()),
                            static_cast<Eigen::Index>(unknowns));
  for (std::size_t r = 0; r < cells.size(); ++r) {
    const auto& k = cells[r];
    for (std::size_t c = 0; c < up.size(); ++c)
      if (up[c][0] == k[1]) a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += w2(k[0], up[c][1], k[2], k[3]);
    for (std::size_t c = 0; c < vp.size(); ++c)
      if (vp[c][1] == k[3])
        a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(up.size() + c)) -= w1(k[0], k[1], k[2], vp[c][0]);
  }
  const MatrixC ns = nullspace(a, tol);
  std::vector<GaugePair> out;
  const auto n1 = static_cast<Eigen::Index>(g1.edge_count());
  const auto n3 = static_cast<Eigen::Index>(g3.edge_count());
  for (Eigen::Index j = 0; j < ns.cols(); ++j) {
    GaugePair p{MatrixC::Zero(n1, n1), MatrixC::Zero(n3, n3)};
    for (std::size_t c = 0; c < up.size(); ++c)
      p.u(static_cast<Eigen::Index>(up[c][0]), static_cast<Eigen::Index>(up[c][1])) = ns(static_cast<Eigen::Index>(c), j);
    for (std::size_t c = 0; c < vp.size(); ++c)
      p.v(static_cast<Eigen::Index>(vp[c][0]), static_cast<Eigen::Index>(vp[c][1])) =
          ns(static_cast<Eigen::Index>(up.size() + c), j);
    out.push_back(std::move(p));
  }
  return out;
}

/// Max residual of the intertwiner equation for a given pair.
inline double intertwiner_residual(const Connection& w1, const Connection& w2, const GaugePair& p) {
  const auto& cfg = w1.config();
  const auto& g1 = cfg.graph(GraphSlot::G1);
  const auto& g3 = cfg.graph(GraphSlot::G3);
  double worst = 0.0;
  for (const auto& k : matching_cells(cfg)) {
    Complex lhs = 0.0, rhs = 0.0;
    for (std::size_t a = 0; a < g1.edge_count(); ++a)
      lhs += p.u(static_cast<Eigen::Index>(k[1]), static_cast<Eigen::Index>(a)) * w2(k[0], a, k[2], k[3]);
    for (std::size_t b = 0; b < g3.edge_count(); ++b)
      rhs += w1(k[0], k[1], k[2], b) * p.v(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(k[3]));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

/// Irreducible iff the self-intertwiner algebra is one-dimensional: a larger
/// algebra contains a nontrivial projection, which splits W after a gauge change.
inline bool is_irreducible(const Connection& w, double tol = kDefaultCheckTol,
                           std::size_t cap = kMaxSystemDimension) {
  return intertwiner_space(w, w, tol, cap).size() == 1;
}

// ---------------------------------------------------------------------------
// Fixture generators

/// h_{jk} = exp(2πi jk / n) / √n.
inline MatrixC fourier_matrix(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  MatrixC h(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index k = 0; k < m; ++k)
      h(j, k) = std::polar(1.0 / std::sqrt(static_cast<double>(n)),
                           2.0 * std::numbers::pi * static_cast<double>(j * k) / static_cast<double>(n));
  return h;
}

/// W(ξ0, ξ1, ξ2, ξ3) = h(ξ1, ξ3) on the star configuration hadamard_config(n):
/// the cell through V1-vertex i and V3-vertex j carries h(i, j).
inline Connection hadamard_connection(const MatrixC& h, double pf_tol = kDefaultPfTol) {
  if (h.rows() != h.cols() || h.rows() < 2)
    throw MismatchError("hadamard connection needs a square matrix of size >= 2");
  auto cfg = hadamard_config(static_cast<std::size_t>(h.rows()));
  cfg.name = "hadamard";
  auto pf = compute_pf(cfg, pf_tol);
  std::map<CellKey, Complex> values;
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
      const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
      values.emplace(CellKey{uj, ui, ui, uj}, h(i, j));
    }
  return Connection(std::move(cfg), std::move(pf), std::move(values));
}

/// Same matrix on the parallel-edge configuration (single vertex per layer).
inline Connection parallel_connection(const MatrixC& h, double pf_tol = kDefaultPfTol) {
  if (h.rows() != h.cols() || h.rows() < 2)
    throw MismatchError("parallel connection needs a square matrix of size >= 2");
  auto cfg = parallel_config(static_cast<std::size_t>(h.rows()));
  auto pf = compute_pf(cfg, pf_tol);
  std::map<CellKey, Complex> values;
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    for (Eigen::Index j = 0; j < h.cols(); ++j)
      values.emplace(CellKey{0, static_cast<std::size_t>(i), 0, static_cast<std::size_t>(j)}, h(i, j));
  return Connection(std::move(cfg), std::move(pf), std::move(values));
}

/// Identity layer below a horizontal graph g: G0 = G2 = g, vertical graphs are
/// one edge per vertex, W(ξ, s(ξ), ξ, r(ξ)) = 1.
inline Connection trivial_connection(const BipartiteGraph& g, std::vector<std::string> source_labels,
                                     std::vector<std::string> range_labels,
                                     double pf_tol = kDefaultPfTol) {
  FourGraphConfig cfg;
  cfg.name = "trivial";
  cfg.layers[index_of(Layer::V0)] = source_labels;
  cfg.layers[index_of(Layer::V1)] = std::move(source_labels);
  cfg.layers[index_of(Layer::V3)] = range_labels;
  cfg.layers[index_of(Layer::V2)] = std::move(range_labels);
  cfg.graph(GraphSlot::G0) = g;
  cfg.graph(GraphSlot::G2) = g;
  cfg.graph(GraphSlot::G0).reversed = cfg.graph(GraphSlot::G2).reversed = false;
  for (std::size_t x = 0; x < cfg.layer_size(Layer::V0); ++x) cfg.graph(GraphSlot::G1).add_edge(x, x);
  for (std::size_t y = 0; y < cfg.layer_size(Layer::V3); ++y) cfg.graph(GraphSlot::G3).add_edge(y, y);
  auto pf = compute_pf(cfg, pf_tol);
  std::map<CellKey, Complex> values;
  for (const auto& e : g.edges) values.emplace(CellKey{e.id, e.source, e.id, e.range}, 1.0);
  return Connection(std::move(cfg), std::move(pf), std::move(values));
}

/// Trivial connection that stacks below w (its top graph is w's G2).
inline Connection trivial_below(const Connection& w, double pf_tol = kDefaultPfTol) {
  const auto& c = w.config();
  return trivial_connection(c.graph(GraphSlot::G2), c.layers[index_of(Layer::V1)],
                            c.layers[index_of(Layer::V2)], pf_tol);
}

}  // namespace biconnect
