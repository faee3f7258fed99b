#pragma once

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "biconnect/connection.hpp"

namespace biconnect {

/// 4-tensor a with legs ξ (top, G0), ρ (left, G1), η (bottom, G2), σ (right,
/// G3). Cells are the same keys as for connections.
class FourTensor {
 public:
  FourTensor() = default;
  FourTensor(FourGraphConfig cfg, PFData pf, std::map<CellKey, Complex> values)
      : data_(std::move(cfg), std::move(pf), std::move(values)) {}

  const FourGraphConfig& config() const { return data_.config(); }
  const PFData& pf() const { return data_.pf(); }
  const std::map<CellKey, Complex>& values() const { return data_.values(); }
  Complex operator()(const CellKey& c) const { return data_(c); }
  Complex operator()(std::size_t xi, std::size_t rho, std::size_t eta, std::size_t sigma) const {
    return data_(xi, rho, eta, sigma);
  }

  /// (μ(s ξ) μ(r η) / (μ(r ξ) μ(s η)))^{1/4}; a = factor · W.
  double factor(const CellKey& c) const { return std::sqrt(data_.reflection_factor(c)); }

 private:
  Connection data_;
};

inline FourTensor connection_to_tensor(const Connection& w) {
  const auto& pf = w.pf();
  std::map<CellKey, Complex> values;
  for (const auto& [k, v] : w.values()) values.emplace(k, std::sqrt(w.reflection_factor(k)) * v);
  return FourTensor(w.config(), pf, std::move(values));
}

inline Connection tensor_to_connection(const FourTensor& a) {
  std::map<CellKey, Complex> values;
  for (const auto& [k, v] : a.values()) values.emplace(k, v / a.factor(k));
  return Connection(a.config(), a.pf(), std::move(values));
}

/// ā(η, ρ̃, ξ, σ̃) = conj a(ξ, ρ, η, σ), living on the bar configuration.
inline FourTensor tensor_conjugate(const FourTensor& a) {
  const auto r = detail::reflection(Renormalization::Bar);
  std::map<CellKey, Complex> values;
  for (const auto& [k, v] : a.values()) values.emplace(CellKey{k[2], k[1], k[0], k[3]}, std::conj(v));
  return FourTensor(detail::reflect_config(a.config(), r), detail::reflect_pf(a.pf(), r),
                    std::move(values));
}

/// Entries "identity-1" and "identity-2":
/// (1) Σ_{η,ρ} √(μ(rξ)μ(sη)/(μ(sξ)μ(rη))) a(ξ,ρ,η,σ) conj a(ξ',ρ,η,σ') = δ_{ξξ'} δ_{σσ'}
/// (2) Σ_{η,σ} √(μ(sξ)μ(rη)/(μ(rξ)μ(sη))) a(ξ,ρ,η,σ) conj a(ξ',ρ',η,σ) = δ_{ξξ'} δ_{ρρ'}
/// over all free legs that can meet (the remaining δ's only restrict to such legs).
inline ValidationReport check_tensor_biunitarity(const FourTensor& a, double tol = kDefaultCheckTol) {
  const auto& cfg = a.config();
  const auto& pf = a.pf();
  const auto& g0 = cfg.graph(GraphSlot::G0).edges;
  const auto& g1 = cfg.graph(GraphSlot::G1).edges;
  const auto& g2 = cfg.graph(GraphSlot::G2).edges;
  const auto& g3 = cfg.graph(GraphSlot::G3).edges;
  auto ratio = [&](std::size_t xi, std::size_t eta) {
    return std::sqrt(pf(Layer::V3, g0[xi].range) * pf(Layer::V1, g2[eta].source) /
                     (pf(Layer::V0, g0[xi].source) * pf(Layer::V2, g2[eta].range)));
  };

  double d1 = 0.0;
  std::vector<std::size_t> bad1;
  for (std::size_t x0 = 0; x0 < cfg.layer_size(Layer::V0); ++x0)
    for (std::size_t x2 = 0; x2 < cfg.layer_size(Layer::V2); ++x2) {
      std::vector<std::array<std::size_t, 2>> legs, sums;  // (ξ,σ) and (ρ,η)
      for (const auto& xi : g0)
        if (xi.source == x0)
          for (const auto& s : g3)
            if (s.source == xi.range && s.range == x2) legs.push_back({xi.id, s.id});
      for (const auto& rho : g1)
        if (rho.source == x0)
          for (const auto& eta : g2)
            if (eta.source == rho.range && eta.range == x2) sums.push_back({rho.id, eta.id});
      double local = 0.0;
      for (const auto& [xi, s] : legs)
        for (const auto& [xi2, s2] : legs) {
          Complex acc = 0.0;
          for (const auto& [rho, eta] : sums)
            acc += ratio(xi, eta) * a(xi, rho, eta, s) * std::conj(a(xi2, rho, eta, s2));
          local = std::max(local, std::abs(acc - ((xi == xi2 && s == s2) ? 1.0 : 0.0)));
        }
      if (local >= tol) bad1.push_back(x0 * cfg.layer_size(Layer::V2) + x2);
      d1 = std::max(d1, local);
    }

  double d2 = 0.0;
  std::vector<std::size_t> bad2;
  for (std::size_t x3 = 0; x3 < cfg.layer_size(Layer::V3); ++x3)
    for (std::size_t x1 = 0; x1 < cfg.layer_size(Layer::V1); ++x1) {
      std::vector<std::array<std::size_t, 2>> legs, sums;  // (ξ,ρ) and (η,σ)
      for (const auto& xi : g0)
        if (xi.range == x3)
          for (const auto& rho : g1)
            if (rho.source == xi.source && rho.range == x1) legs.push_back({xi.id, rho.id});
      for (const auto& eta : g2)
        if (eta.source == x1)
          for (const auto& s : g3)
            if (s.source == x3 && s.range == eta.range) sums.push_back({eta.id, s.id});
      double local = 0.0;
      for (const auto& [xi, rho] : legs)
        for (const auto& [xi2, rho2] : legs) {
          Complex acc = 0.0;
          for (const auto& [eta, s] : sums)
            acc += a(xi, rho, eta, s) * std::conj(a(xi2, rho2, eta, s)) / ratio(xi, eta);
          local = std::max(local, std::abs(acc - ((xi == xi2 && rho == rho2) ? 1.0 : 0.0)));
        }
      if (local >= tol) bad2.push_back(x3 * cfg.layer_size(Layer::V1) + x1);
      d2 = std::max(d2, local);
    }

  ValidationReport r;
  r.add("identity-1", bad1.empty() ? CheckStatus::Pass : CheckStatus::Fail, d1, bad1);
  r.add("identity-2", bad2.empty() ? CheckStatus::Pass : CheckStatus::Fail, d2, bad2);
  return r;
}

}  // namespace biconnect
