#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "biconnect/strings.hpp"
#include "biconnect/tensor4.hpp"

namespace biconnect {

/// 2-tensor on one vertical graph; entry (left leg, right leg). On the left
/// of a 4-tensor its right leg is contracted with the tensor's left leg; on
/// the right its left leg is contracted with the tensor's right leg.
struct TwoTensor {
  GraphSlot slot = GraphSlot::G1;
  BipartiteGraph graph;
  MatrixC values;

  Complex operator()(std::size_t left, std::size_t right) const {
    return values(static_cast<Eigen::Index>(left), static_cast<Eigen::Index>(right));
  }
};

namespace detail {

// μ(r ρ) / μ(s ρ) for every edge of a vertical graph.
inline std::vector<double> edge_ratios(const BipartiteGraph& g, GraphSlot slot, const PFData& pf) {
  std::vector<double> out;
  for (const auto& e : g.edges) out.push_back(pf(range_layer(slot), e.range) / pf(source_layer(slot), e.source));
  return out;
}

}  // namespace detail

/// F(ρ2, ρ1) = μ(r ρ1) / μ(s ρ1) · f_{ρ1ρ2}.
inline TwoTensor field_to_two_tensor(const StringField& f, const PFData& pf) {
  const auto w = detail::edge_ratios(f.graph, f.slot, pf);
  TwoTensor t{f.slot, f.graph, f.coeffs.transpose()};
  for (Eigen::Index j = 0; j < t.values.cols(); ++j) t.values.col(j) *= w[static_cast<std::size_t>(j)];
  return t;
}

inline StringField two_tensor_to_field(const TwoTensor& t, const PFData& pf) {
  const auto w = detail::edge_ratios(t.graph, t.slot, pf);
  MatrixC m = t.values;
  for (Eigen::Index j = 0; j < m.cols(); ++j) m.col(j) /= w[static_cast<std::size_t>(j)];
  return {t.slot, t.graph, m.transpose()};
}

inline TwoTensor identity_two_tensor(const BipartiteGraph& g, GraphSlot slot = GraphSlot::G1) {
  const auto n = static_cast<Eigen::Index>(g.edge_count());
  return {slot, g, MatrixC::Identity(n, n)};
}

struct ZipperCheck {
  bool holds = false;
  double defect = 0.0;
};

namespace detail {

// μ(s ρ) / μ(r ρ): the weight attached to a boundary leg of a zipper identity.
inline double leg_weight(const FourGraphConfig& cfg, const PFData& pf, GraphSlot slot, std::size_t edge) {
  const auto& e = cfg.graph(slot).edge(edge);
  return pf(source_layer(slot), e.source) / pf(range_layer(slot), e.range);
}

inline void require_tensor_graph(const TwoTensor& t, const BipartiteGraph& g) {
  if (!t.graph.same_structure(g) || t.values.rows() != static_cast<Eigen::Index>(g.edge_count()))
    throw MismatchError("2-tensor does not live on the expected vertical graph");
}

}  // namespace detail

/// For all (ξ, ρ3, η', σ1):
///   w(ρ3) Σ_ρ F(ρ3, ρ) a(ξ, ρ, η', σ1) = w(σ1) Σ_σ a(ξ, ρ3, η', σ) F̃(σ, σ1)
/// with boundary weights w(e) = μ(s e) / μ(r e).
inline ZipperCheck check_half_zipper(const TwoTensor& f, const TwoTensor& ft, const FourTensor& a,
                                     double tol = kDefaultCheckTol) {
  const auto& cfg = a.config();
  const auto& pf = a.pf();
  const auto& g1 = cfg.graph(GraphSlot::G1);
  const auto& g3 = cfg.graph(GraphSlot::G3);
  detail::require_tensor_graph(f, g1);
  detail::require_tensor_graph(ft, g3);
  double worst = 0.0;
  for (const auto& xi : cfg.graph(GraphSlot::G0).edges)
    for (const auto& eta : cfg.graph(GraphSlot::G2).edges)
      for (const auto& r3 : g1.edges) {
        if (r3.source != xi.source || r3.range != eta.source) continue;
        for (const auto& s1 : g3.edges) {
          if (s1.source != xi.range || s1.range != eta.range) continue;
          Complex lhs = 0.0, rhs = 0.0;
          for (const auto& r : g1.edges) lhs += f(r3.id, r.id) * a(xi.id, r.id, eta.id, s1.id);
          for (const auto& s : g3.edges) rhs += a(xi.id, r3.id, eta.id, s.id) * ft(s.id, s1.id);
          lhs *= detail::leg_weight(cfg, pf, GraphSlot::G1, r3.id);
          rhs *= detail::leg_weight(cfg, pf, GraphSlot::G3, s1.id);
          worst = std::max(worst, std::abs(lhs - rhs));
        }
      }
  return {worst < tol, worst};
}

struct HalfZipperSolution {
  TwoTensor candidate;
  double defect = 0.0;
  std::optional<TwoTensor> ftilde;  // present iff the candidate passes
};

/// The only F̃ that can satisfy the half zipper: move the left side to the
/// W normalization and strip W from the right by its unitarity,
///   F̃(σ', σ1) = Σ_{ρ3,η'} conj W(ξ,ρ3,η',σ') R(ξ,ρ3,η',σ1),
/// averaged over the top edges ξ ending at s(σ').
inline HalfZipperSolution solve_half_zipper(const TwoTensor& f, const FourTensor& a,
                                            double tol = kDefaultCheckTol) {
  const auto& cfg = a.config();
  const auto& pf = a.pf();
  const auto& g0 = cfg.graph(GraphSlot::G0);
  const auto& g1 = cfg.graph(GraphSlot::G1);
  const auto& g2 = cfg.graph(GraphSlot::G2);
  const auto& g3 = cfg.graph(GraphSlot::G3);
  detail::require_tensor_graph(f, g1);
  const auto w = tensor_to_connection(a);
  const auto n3 = static_cast<Eigen::Index>(g3.edge_count());
  TwoTensor cand{GraphSlot::G3, g3, MatrixC::Zero(n3, n3)};
  std::vector<std::size_t> arriving(cfg.layer_size(Layer::V3), 0);
  for (const auto& xi : g0.edges) ++arriving[xi.range];

  for (const auto& xi : g0.edges)
    for (const auto& sp : g3.edges) {
      if (sp.source != xi.range) continue;
      for (const auto& s1 : g3.edges) {
        if (!g3.parallel(sp.id, s1.id)) continue;
        Complex acc = 0.0;
        for (const auto& r3 : g1.edges) {
          if (r3.source != xi.source) continue;
          for (const auto& eta : g2.edges) {
            if (eta.source != r3.range || eta.range != s1.range) continue;
            Complex lhs = 0.0;
            for (const auto& r : g1.edges) lhs += f(r3.id, r.id) * a(xi.id, r.id, eta.id, s1.id);
            lhs *= detail::leg_weight(cfg, pf, GraphSlot::G1, r3.id);
            const CellKey key{xi.id, r3.id, eta.id, s1.id};
            const double q = std::sqrt(w.reflection_factor(key));
            const Complex r_val = lhs / (q * detail::leg_weight(cfg, pf, GraphSlot::G3, s1.id));
            acc += std::conj(w(xi.id, r3.id, eta.id, sp.id)) * r_val;
          }
        }
        cand.values(static_cast<Eigen::Index>(sp.id), static_cast<Eigen::Index>(s1.id)) +=
            acc / static_cast<double>(arriving[sp.source]);
      }
    }
  const auto check = check_half_zipper(f, cand, a, tol);
  HalfZipperSolution out{cand, check.defect, std::nullopt};
  if (check.holds) out.ftilde = out.candidate;
  return out;
}

namespace detail {

// Chain of the word's tensors with the middle vertical legs summed:
// key (left leg, top edges, bottom edges, right leg).
using ChainKey = std::tuple<std::size_t, std::vector<std::size_t>, std::vector<std::size_t>, std::size_t>;

inline std::map<ChainKey, Complex> chain(const std::vector<FourTensor>& word) {
  std::map<ChainKey, Complex> state;
  for (const auto& e : word.front().config().graph(GraphSlot::G1).edges) state[{e.id, {}, {}, e.id}] = 1.0;
  for (const auto& a : word) {
    std::map<std::size_t, std::vector<std::pair<CellKey, Complex>>> by_left;
    for (const auto& [k, v] : a.values()) by_left[k[1]].emplace_back(k, v);
    std::map<ChainKey, Complex> next;
    for (const auto& [key, v] : state) {
      const auto it = by_left.find(std::get<3>(key));
      if (it == by_left.end()) continue;
      for (const auto& [cell, c] : it->second) {
        auto top = std::get<1>(key);
        auto bottom = std::get<2>(key);
        top.push_back(cell[0]);
        bottom.push_back(cell[2]);
        next[{std::get<0>(key), std::move(top), std::move(bottom), cell[3]}] += v * c;
      }
    }
    state = std::move(next);
  }
  return state;
}

}  // namespace detail

/// For every boundary configuration of the closed word a_1 … a_m:
///   w(ρ1) Σ_ρ F(ρ1, ρ) C(ρ, …, ρ2) = w(ρ2) Σ_ρ C(ρ1, …, ρ) F(ρ, ρ2)
/// with C the chain of tensors and w(e) = μ(s e) / μ(r e) on the left
/// (first letter) and right (last letter) boundaries.
inline ZipperCheck check_zipper(const TwoTensor& f, const ConnectionWord& word, double tol = kDefaultCheckTol) {
  if (!word.closed()) throw MismatchError("the zipper condition needs a closed word");
  detail::require_tensor_graph(f, word.left_graph());
  std::vector<FourTensor> tensors;
  for (const auto& w : word.letters()) tensors.push_back(connection_to_tensor(w));
  const auto c = detail::chain(tensors);
  const auto& first = tensors.front();
  const auto& last = tensors.back();
  const auto n = f.graph.edge_count();

  std::map<detail::ChainKey, Complex> diff;
  for (const auto& [key, v] : c) {
    const auto& [r_left, top, bottom, r_right] = key;
    // Left side: the chain's left leg is ρ, new boundary leg ρ1.
    for (std::size_t r1 = 0; r1 < n; ++r1) {
      const Complex fv = f(r1, r_left);
      if (fv == Complex(0.0)) continue;
      diff[{r1, top, bottom, r_right}] +=
          detail::leg_weight(first.config(), first.pf(), GraphSlot::G1, r1) * fv * v;
    }
    // Right side: the chain's right leg is ρ, new boundary leg ρ2.
    for (std::size_t r2 = 0; r2 < n; ++r2) {
      const Complex fv = f(r_right, r2);
      if (fv == Complex(0.0)) continue;
      diff[{r_left, top, bottom, r2}] -= detail::leg_weight(last.config(), last.pf(), GraphSlot::G3, r2) * v * fv;
    }
  }
  double worst = 0.0;
  for (const auto& [k, v] : diff) worst = std::max(worst, std::abs(v));
  return {worst < tol, worst};
}

/// The four conditions for one field on one closed word.
struct TheoremReport {
  bool half_zipper = false;
  bool zipper = false;
  bool half_flat = false;
  bool flat = false;
  double half_zipper_defect = 0.0;
  double zipper_defect = 0.0;
  double half_flat_defect = 0.0;
  double flat_defect = 0.0;
  bool agreement = false;
  std::optional<StringField> ftilde;
  std::optional<TwoTensor> Ftilde;
};

inline TheoremReport verify_theorem(const StringField& f, const ConnectionWord& word, double tol = kDefaultCheckTol) {
  if (!word.closed()) throw MismatchError("the theorem needs a closed word");
  require_same_graph(f, word.left_graph());
  const auto& w = word[0];
  const auto big_f = field_to_two_tensor(f, w.pf());
  TheoremReport r;
  const auto hz = solve_half_zipper(big_f, connection_to_tensor(w), tol);
  r.half_zipper = hz.ftilde.has_value();
  r.half_zipper_defect = hz.defect;
  r.Ftilde = hz.ftilde;
  const auto z = check_zipper(big_f, word, tol);
  r.zipper = z.holds;
  r.zipper_defect = z.defect;
  const auto hf = check_half_flatness(f, w, tol);
  r.half_flat = hf.half_flat;
  r.half_flat_defect = hf.defect;
  r.ftilde = hf.ftilde;
  const auto fl = check_flatness(f, word, tol);
  r.flat = fl.flat;
  r.flat_defect = fl.defect;
  r.agreement = r.half_zipper == r.zipper && r.zipper == r.half_flat && r.half_flat == r.flat;
  return r;
}

}  // namespace biconnect
