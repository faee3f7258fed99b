#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <tuple>
#include <utility>
#include <vector>

#include "biconnect/connection.hpp"

namespace biconnect {

// ---------------------------------------------------------------------------
// Fields of strings

/// Coefficients f_{ρ1,ρ2} on pairs of parallel edges of one vertical graph.
struct StringField {
  GraphSlot slot = GraphSlot::G1;
  BipartiteGraph graph;
  MatrixC coeffs;  // E × E, zero off parallel pairs

  std::size_t size() const { return graph.edge_count(); }
  Complex operator()(std::size_t r1, std::size_t r2) const {
    return coeffs(static_cast<Eigen::Index>(r1), static_cast<Eigen::Index>(r2));
  }
  Complex& at(std::size_t r1, std::size_t r2) {
    return coeffs(static_cast<Eigen::Index>(r1), static_cast<Eigen::Index>(r2));
  }
};

inline StringField zero_field(const BipartiteGraph& g, GraphSlot slot = GraphSlot::G1) {
  const auto n = static_cast<Eigen::Index>(g.edge_count());
  return {slot, g, MatrixC::Zero(n, n)};
}

inline StringField identity_field(const BipartiteGraph& g, GraphSlot slot = GraphSlot::G1) {
  auto f = zero_field(g, slot);
  f.coeffs.setIdentity();
  return f;
}

/// Builds a field from a dense matrix, rejecting mass off parallel pairs.
inline StringField make_field(const BipartiteGraph& g, MatrixC coeffs, GraphSlot slot = GraphSlot::G1) {
  const auto n = static_cast<Eigen::Index>(g.edge_count());
  if (coeffs.rows() != n || coeffs.cols() != n) throw MismatchError("field size does not match the graph");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (!g.parallel(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) && coeffs(i, j) != Complex(0.0))
        throw StructuralError("field coefficient on a non-parallel edge pair");
  return {slot, g, std::move(coeffs)};
}

/// Independent complex Gaussian coefficients on every parallel pair.
template <class R>
StringField random_field(const BipartiteGraph& g, R& rng, GraphSlot slot = GraphSlot::G1) {
  std::normal_distribution<double> d(0.0, 1.0);
  auto f = zero_field(g, slot);
  for (std::size_t i = 0; i < g.edge_count(); ++i)
    for (std::size_t j = 0; j < g.edge_count(); ++j)
      if (g.parallel(i, j)) f.at(i, j) = Complex(d(rng), d(rng));
  return f;
}

inline void require_same_graph(const StringField& f, const BipartiteGraph& g) {
  if (!f.graph.same_structure(g)) throw MismatchError("field does not live on the expected graph");
}

/// (f·g)_{ρ1ρ2} = Σ_ρ f_{ρ1ρ} g_{ρρ2}.
inline StringField field_product(const StringField& f, const StringField& g) {
  require_same_graph(g, f.graph);
  return {f.slot, f.graph, f.coeffs * g.coeffs};
}

inline StringField adjoint(const StringField& f) { return {f.slot, f.graph, f.coeffs.adjoint()}; }

inline StringField operator+(const StringField& f, const StringField& g) {
  require_same_graph(g, f.graph);
  return {f.slot, f.graph, f.coeffs + g.coeffs};
}

inline StringField operator*(Complex c, const StringField& f) { return {f.slot, f.graph, c * f.coeffs}; }

/// Frobenius inner product Σ conj f g.
inline Complex field_inner(const StringField& f, const StringField& g) {
  require_same_graph(g, f.graph);
  return (f.coeffs.adjoint() * g.coeffs).trace();
}

inline double field_distance(const StringField& f, const StringField& g) {
  require_same_graph(g, f.graph);
  return (f.coeffs - g.coeffs).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Horizontal transport through one connection

/// T(ξ, ξ', σ1, σ2) = Σ_{ρ1,ρ2,η} f_{ρ1ρ2} W(ξ,ρ1,η,σ1) conj W(ξ',ρ2,η,σ2).
struct TransportResult {
  std::map<std::array<std::size_t, 4>, Complex> values;
  double defect = 0.0;
  StringField candidate;               // averaged diagonal, always filled
  std::optional<StringField> field;    // present iff defect < tol
};

namespace detail {

// Edges of a graph grouped by source vertex.
inline std::vector<std::vector<std::size_t>> by_source(const BipartiteGraph& g, std::size_t n) {
  std::vector<std::vector<std::size_t>> out(n);
  for (const auto& e : g.edges) out[e.source].push_back(e.id);
  return out;
}

// Σ_η W(ξ,ρ,η,σ) conj W(ξ',ρ',η,σ') for all admissible legs, as a sparse
// table; `emit(ξ, ξ', ρ, ρ', σ, σ', value)` receives each nonzero entry.
template <class Emit>
void for_each_transfer(const Connection& w, std::size_t rho, std::size_t rho2, Emit emit) {
  const auto& cfg = w.config();
  const auto& g0 = cfg.graph(GraphSlot::G0);
  const auto& g1 = cfg.graph(GraphSlot::G1);
  const auto& g2 = cfg.graph(GraphSlot::G2);
  const auto& g3 = cfg.graph(GraphSlot::G3);
  const auto& e = g1.edge(rho);
  const auto& e2 = g1.edge(rho2);
  if (e.range != e2.range) return;
  for (const auto& xi : g0.edges) {
    if (xi.source != e.source) continue;
    for (const auto& xi2 : g0.edges) {
      if (xi2.source != e2.source) continue;
      for (const auto& s : g3.edges) {
        if (s.source != xi.range) continue;
        for (const auto& s2 : g3.edges) {
          if (s2.source != xi2.range || s2.range != s.range) continue;
          Complex acc = 0.0;
          for (const auto& eta : g2.edges)
            if (eta.source == e.range && eta.range == s.range)
              acc += w(xi.id, rho, eta.id, s.id) * std::conj(w(xi2.id, rho2, eta.id, s2.id));
          if (acc != Complex(0.0)) emit(xi.id, xi2.id, s.id, s2.id, acc);
        }
      }
    }
  }
}

}  // namespace detail

inline TransportResult transport_field(const StringField& f, const Connection& w,
                                       double tol = kDefaultCheckTol) {
  const auto& cfg = w.config();
  require_same_graph(f, cfg.graph(GraphSlot::G1));
  const auto& g1 = cfg.graph(GraphSlot::G1);
  const auto& g0 = cfg.graph(GraphSlot::G0);
  const auto& g3 = cfg.graph(GraphSlot::G3);
  TransportResult out;
  for (std::size_t r1 = 0; r1 < g1.edge_count(); ++r1)
    for (std::size_t r2 = 0; r2 < g1.edge_count(); ++r2) {
      const Complex c = f(r1, r2);
      if (c == Complex(0.0)) continue;
      detail::for_each_transfer(w, r1, r2, [&](std::size_t x, std::size_t x2, std::size_t s, std::size_t s2, Complex v) {
        out.values[{x, x2, s, s2}] += c * v;
      });
    }

  // f̃(σ1,σ2) = mean over ξ ending at s(σ1) of T(ξ,ξ,σ1,σ2).
  out.candidate = zero_field(g3, GraphSlot::G3);
  std::vector<std::size_t> arriving(cfg.layer_size(Layer::V3), 0);
  for (const auto& xi : g0.edges) ++arriving[xi.range];
  for (const auto& [k, v] : out.values)
    if (k[0] == k[1]) out.candidate.at(k[2], k[3]) += v / static_cast<double>(arriving[g3.edge(k[2]).source]);

  double off = 0.0, spread = 0.0;
  for (const auto& [k, v] : out.values)
    if (k[0] != k[1]) off = std::max(off, std::abs(v));
  for (const auto& xi : g0.edges)
    for (const auto& s : g3.edges) {
      if (s.source != xi.range) continue;
      for (const auto& s2 : g3.edges) {
        if (!g3.parallel(s.id, s2.id)) continue;
        const auto it = out.values.find({xi.id, xi.id, s.id, s2.id});
        const Complex t = it == out.values.end() ? Complex(0.0) : it->second;
        spread = std::max(spread, std::abs(t - out.candidate(s.id, s2.id)));
      }
    }
  out.defect = off + spread;
  if (out.defect < tol) out.field = out.candidate;
  return out;
}

struct HalfFlatness {
  bool half_flat = false;
  double defect = 0.0;
  std::optional<StringField> ftilde;
};

inline HalfFlatness check_half_flatness(const StringField& f, const Connection& w,
                                        double tol = kDefaultCheckTol) {
  auto t = transport_field(f, w, tol);
  return {t.field.has_value(), t.defect, std::move(t.field)};
}

// ---------------------------------------------------------------------------
// Words and flatness

/// Horizontally composable connections: the right vertical graph of each
/// letter is the left vertical graph of the next.
class ConnectionWord {
 public:
  ConnectionWord() = default;
  explicit ConnectionWord(std::vector<Connection> letters) : letters_(std::move(letters)) {
    if (letters_.empty()) throw MismatchError("empty connection word");
    for (std::size_t k = 0; k + 1 < letters_.size(); ++k) {
      const auto& a = letters_[k].config();
      const auto& b = letters_[k + 1].config();
      if (!a.graph(GraphSlot::G3).same_structure(b.graph(GraphSlot::G1)) ||
          a.layer_size(Layer::V3) != b.layer_size(Layer::V0) ||
          a.layer_size(Layer::V2) != b.layer_size(Layer::V1))
        throw MismatchError("letters " + std::to_string(k) + " and " + std::to_string(k + 1) +
                            " are not horizontally composable");
    }
  }

  const std::vector<Connection>& letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  const Connection& operator[](std::size_t k) const { return letters_.at(k); }
  const BipartiteGraph& left_graph() const { return letters_.front().config().graph(GraphSlot::G1); }
  const BipartiteGraph& right_graph() const { return letters_.back().config().graph(GraphSlot::G3); }

  bool closed() const {
    const auto& a = letters_.back().config();
    const auto& b = letters_.front().config();
    return right_graph().same_structure(left_graph()) && a.layer_size(Layer::V3) == b.layer_size(Layer::V0) &&
           a.layer_size(Layer::V2) == b.layer_size(Layer::V1);
  }

 private:
  std::vector<Connection> letters_;
};

/// The canonical closed word [a, a'].
inline ConnectionWord closed_word(const Connection& a) {
  return ConnectionWord({a, renormalize(a, Renormalization::Prime)});
}

struct FlatnessResult {
  bool flat = false;
  double defect = 0.0;
};

namespace detail {

// Key of the two-row grid: top edges, lower top edges, right legs (ρ, ρ').
using GridKey = std::tuple<std::vector<std::size_t>, std::vector<std::size_t>, std::size_t, std::size_t>;
using Grid = std::map<GridKey, Complex>;

// Contracts the grid of the word with f on the left boundary.
inline Grid contract_grid(const StringField& f, const ConnectionWord& word) {
  Grid state;
  const auto n = f.size();
  for (std::size_t r1 = 0; r1 < n; ++r1)
    for (std::size_t r2 = 0; r2 < n; ++r2)
      if (f(r1, r2) != Complex(0.0)) state[{{}, {}, r1, r2}] = f(r1, r2);
  for (const auto& w : word.letters()) {
    Grid next;
    // Group by boundary legs so each transfer table is built once.
    std::map<std::pair<std::size_t, std::size_t>, std::vector<const Grid::value_type*>> by_legs;
    for (const auto& entry : state) by_legs[{std::get<2>(entry.first), std::get<3>(entry.first)}].push_back(&entry);
    for (const auto& [legs, entries] : by_legs) {
      std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t, Complex>> transfer;
      for_each_transfer(w, legs.first, legs.second,
                        [&](std::size_t x, std::size_t x2, std::size_t s, std::size_t s2, Complex v) {
                          transfer.emplace_back(x, x2, s, s2, v);
                        });
      for (const auto* entry : entries)
        for (const auto& [x, x2, s, s2, v] : transfer) {
          auto top = std::get<0>(entry->first);
          auto low = std::get<1>(entry->first);
          top.push_back(x);
          low.push_back(x2);
          next[{std::move(top), std::move(low), s, s2}] += entry->second * v;
        }
    }
    state = std::move(next);
  }
  return state;
}

// Connected top paths through the word: ξ_{k+1} starts where ξ_k ends.
inline std::vector<std::vector<std::size_t>> top_paths(const ConnectionWord& word) {
  std::vector<std::vector<std::size_t>> paths{{}};
  for (std::size_t k = 0; k < word.size(); ++k) {
    const auto& g0 = word[k].config().graph(GraphSlot::G0);
    std::vector<std::vector<std::size_t>> next;
    for (const auto& p : paths)
      for (const auto& e : g0.edges) {
        if (!p.empty() && word[k - 1].config().graph(GraphSlot::G0).edge(p.back()).range != e.source) continue;
        auto q = p;
        q.push_back(e.id);
        next.push_back(std::move(q));
      }
    paths = std::move(next);
  }
  return paths;
}

// Grid minus δ ⊗ δ ⊗ f on the right boundary.
inline Grid flatness_residual(const StringField& f, const ConnectionWord& word) {
  Grid r = contract_grid(f, word);
  const auto& last = word[word.size() - 1].config();
  const auto& g3 = last.graph(GraphSlot::G3);
  const auto& g0 = last.graph(GraphSlot::G0);
  for (const auto& p : top_paths(word)) {
    const auto end = g0.edge(p.back()).range;
    for (const auto& s : g3.edges) {
      if (s.source != end) continue;
      for (const auto& s2 : g3.edges)
        if (g3.parallel(s.id, s2.id) && f(s.id, s2.id) != Complex(0.0)) r[{p, p, s.id, s2.id}] -= f(s.id, s2.id);
    }
  }
  return r;
}

inline double max_abs(const Grid& g) {
  double m = 0.0;
  for (const auto& [k, v] : g) m = std::max(m, std::abs(v));
  return m;
}

inline void require_closed(const StringField& f, const ConnectionWord& word) {
  if (!word.closed()) throw MismatchError("flatness needs a closed word");
  require_same_graph(f, word.left_graph());
}

}  // namespace detail

/// Two-row grid (word above, conjugate cells below, no extra weights) with f
/// on the left boundary, compared with δ_{ξ⃗ξ⃗'} f on the right boundary.
inline FlatnessResult check_flatness(const StringField& f, const ConnectionWord& word,
                                     double tol = kDefaultCheckTol) {
  detail::require_closed(f, word);
  const double d = detail::max_abs(detail::flatness_residual(f, word));
  return {d < tol, d};
}

/// The field carried across the word by successive transports (candidates
/// are used even where a transport is not exact), and the worst defect seen.
struct WordTransport {
  StringField field;
  double defect = 0.0;
};

inline WordTransport transport_word(const StringField& f, const ConnectionWord& word,
                                    double tol = kDefaultCheckTol) {
  WordTransport out{f, 0.0};
  for (const auto& w : word.letters()) {
    auto t = transport_field(out.field, w, tol);
    out.defect = std::max(out.defect, t.defect);
    out.field = t.candidate;
    out.field.slot = GraphSlot::G1;
  }
  return out;
}

/// Orthonormal basis of the fields on the word's left graph with zero
/// flatness residual.
inline std::vector<StringField> solve_flat_fields(const ConnectionWord& word, double tol = kDefaultCheckTol,
                                                  std::size_t cap = kMaxSystemDimension) {
  const auto& g = word.left_graph();
  if (!word.closed()) throw MismatchError("flat fields need a closed word");
  std::vector<std::array<std::size_t, 2>> pairs;
  for (std::size_t i = 0; i < g.edge_count(); ++i)
    for (std::size_t j = 0; j < g.edge_count(); ++j)
      if (g.parallel(i, j)) pairs.push_back({i, j});
  if (pairs.size() > cap) throw CapExceededError("flat-field system exceeds the dimension cap");

  std::vector<detail::Grid> columns;
  std::map<detail::GridKey, std::size_t> rows;
  for (const auto& [i, j] : pairs) {
    auto e = zero_field(g);
    e.at(i, j) = 1.0;
    columns.push_back(detail::flatness_residual(e, word));
    for (const auto& [k, v] : columns.back()) rows.emplace(k, 0);
    if (rows.size() > cap) throw CapExceededError("flat-field system exceeds the dimension cap");
  }
  std::size_t idx = 0;
  for (auto& [k, v] : rows) v = idx++;
  MatrixC a = MatrixC::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t c = 0; c < columns.size(); ++c)
    for (const auto& [k, v] : columns[c]) a(static_cast<Eigen::Index>(rows.at(k)), static_cast<Eigen::Index>(c)) = v;

  const MatrixC ns = nullspace(a, tol);
  std::vector<StringField> out;
  for (Eigen::Index j = 0; j < ns.cols(); ++j) {
    auto f = zero_field(g);
    for (std::size_t c = 0; c < pairs.size(); ++c) f.at(pairs[c][0], pairs[c][1]) = ns(static_cast<Eigen::Index>(c), j);
    out.push_back(std::move(f));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Open strings and the action of fields

inline constexpr std::size_t kDefaultLevelCap = 6;

/// Basis element of the truncated open-string bimodule: a top path from *0
/// alternating G0 and reversed G0, a bottom path from *1 alternating G2 and
/// reversed G2, and a vertical edge joining their ends (G1 at even level, G3
/// at odd level).
struct OpenString {
  std::vector<std::size_t> top;
  std::vector<std::size_t> bottom;
  std::size_t terminal = 0;
  std::size_t level() const { return top.size(); }
  friend auto operator<=>(const OpenString&, const OpenString&) = default;
};

namespace detail {

// Paths of the given length from `start`, alternating g forward and backward.
inline std::vector<std::pair<std::vector<std::size_t>, std::size_t>> zigzag_paths(const BipartiteGraph& g,
                                                                                 std::size_t start,
                                                                                 std::size_t length) {
  std::vector<std::pair<std::vector<std::size_t>, std::size_t>> paths{{{}, start}};
  for (std::size_t step = 0; step < length; ++step) {
    std::vector<std::pair<std::vector<std::size_t>, std::size_t>> next;
    const bool forward = step % 2 == 0;
    for (const auto& [p, end] : paths)
      for (const auto& e : g.edges)
        if ((forward ? e.source : e.range) == end) {
          auto q = p;
          q.push_back(e.id);
          next.emplace_back(std::move(q), forward ? e.range : e.source);
        }
    paths = std::move(next);
  }
  return paths;
}

}  // namespace detail

/// All basis strings of a level, in lexicographic order.
inline std::vector<OpenString> open_string_space(const Connection& w, std::size_t star0, std::size_t star1,
                                                 std::size_t level, std::size_t level_cap = kDefaultLevelCap,
                                                 std::size_t cap = kMaxSystemDimension) {
  const auto& cfg = w.config();
  if (level > level_cap) throw CapExceededError("open-string level exceeds the cap");
  if (star0 >= cfg.layer_size(Layer::V0) || star1 >= cfg.layer_size(Layer::V1))
    throw InputError("base points must lie in V0 and V1");
  const auto tops = detail::zigzag_paths(cfg.graph(GraphSlot::G0), star0, level);
  const auto bottoms = detail::zigzag_paths(cfg.graph(GraphSlot::G2), star1, level);
  const auto& vertical = cfg.graph(level % 2 == 0 ? GraphSlot::G1 : GraphSlot::G3);
  std::vector<OpenString> out;
  for (const auto& [tp, tend] : tops)
    for (const auto& [bp, bend] : bottoms)
      for (const auto& e : vertical.edges)
        if (e.source == tend && e.range == bend) {
          out.push_back({tp, bp, e.id});
          if (out.size() > cap) throw CapExceededError("open-string space exceeds the dimension cap");
        }
  std::sort(out.begin(), out.end());
  return out;
}

/// Σ_i c_{ik} (s with terminal edge ξ_k replaced by ξ_i).
inline std::vector<std::pair<OpenString, Complex>> act_flat_field(const StringField& f, const OpenString& s) {
  std::vector<std::pair<OpenString, Complex>> out;
  if (s.terminal >= f.size()) throw MismatchError("terminal edge is not in the field's graph");
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Complex c = f(i, s.terminal);
    if (c == Complex(0.0)) continue;
    auto t = s;
    t.terminal = i;
    out.emplace_back(std::move(t), c);
  }
  return out;
}

namespace detail {

inline std::map<OpenString, std::size_t> index_strings(const std::vector<OpenString>& v) {
  std::map<OpenString, std::size_t> m;
  for (std::size_t i = 0; i < v.size(); ++i) m.emplace(v[i], i);
  return m;
}

inline MatrixC action_matrix(const StringField& f, const std::vector<OpenString>& basis) {
  const auto idx = index_strings(basis);
  const auto n = static_cast<Eigen::Index>(basis.size());
  MatrixC a = MatrixC::Zero(n, n);
  for (std::size_t k = 0; k < basis.size(); ++k)
    for (const auto& [t, c] : act_flat_field(f, basis[k]))
      a(static_cast<Eigen::Index>(idx.at(t)), static_cast<Eigen::Index>(k)) += c;
  return a;
}

// ι: level k → k+1 with coefficients of the cell spanned by the new top
// edge, the old terminal edge, the new bottom edge and the new terminal edge
// (W at even k, W' at odd k).
inline MatrixC embedding(const Connection& cell, const std::vector<OpenString>& from,
                         const std::vector<OpenString>& to) {
  const auto idx = index_strings(from);
  MatrixC m = MatrixC::Zero(static_cast<Eigen::Index>(to.size()), static_cast<Eigen::Index>(from.size()));
  for (std::size_t r = 0; r < to.size(); ++r) {
    const auto& t = to[r];
    OpenString s{{t.top.begin(), t.top.end() - 1}, {t.bottom.begin(), t.bottom.end() - 1}, 0};
    const auto& g = cell.config().graph(GraphSlot::G1);
    for (const auto& e : g.edges) {
      s.terminal = e.id;
      const auto it = idx.find(s);
      if (it == idx.end()) continue;
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(it->second)) =
          cell(t.top.back(), e.id, t.bottom.back(), t.terminal);
    }
  }
  return m;
}

}  // namespace detail

/// Max entry of ι∘A_level − A_{level+1}∘ι, where A is f at even levels and
/// f's transported candidate f̃ at odd levels.
inline double check_action_well_defined(const StringField& f, const Connection& w, std::size_t level,
                                        double tol = kDefaultCheckTol, std::size_t star0 = 0,
                                        std::size_t star1 = 0, std::size_t level_cap = kDefaultLevelCap) {
  require_same_graph(f, w.config().graph(GraphSlot::G1));
  if (level + 1 > level_cap) throw CapExceededError("open-string level exceeds the cap");
  const auto ftilde = transport_field(f, w, tol).candidate;
  const auto from = open_string_space(w, star0, star1, level, level_cap);
  const auto to = open_string_space(w, star0, star1, level + 1, level_cap);
  const bool even = level % 2 == 0;
  const Connection cell = even ? w : renormalize(w, Renormalization::Prime);
  const MatrixC iota = detail::embedding(cell, from, to);
  const MatrixC a_from = detail::action_matrix(even ? f : ftilde, from);
  const MatrixC a_to = detail::action_matrix(even ? ftilde : f, to);
  if (iota.size() == 0) return 0.0;
  return (iota * a_from - a_to * iota).cwiseAbs().maxCoeff();
}

}  // namespace biconnect
