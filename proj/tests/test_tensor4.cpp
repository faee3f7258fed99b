#include <gtest/gtest.h>

#include <cmath>

#include "biconnect/tensor4.hpp"

using namespace biconnect;

namespace {

std::vector<Connection> biunitary_fixtures() {
  std::vector<Connection> out;
  for (std::size_t n = 2; n <= 5; ++n) out.push_back(hadamard_connection(fourier_matrix(n)));
  out.push_back(parallel_connection(fourier_matrix(3)));
  const auto f3 = hadamard_connection(fourier_matrix(3));
  out.push_back(direct_sum(f3, f3));
  out.push_back(product(f3, renormalize(f3, Renormalization::Bar)));
  out.push_back(trivial_connection(example1().graph(GraphSlot::G0), example1().layers[0], example1().layers[3]));
  return out;
}

Connection single_cell(double m_s_xi, double m_r_xi, double m_s_eta, double m_r_eta) {
  PFData pf;
  pf.mu = {std::vector<double>{m_s_xi}, {m_s_eta}, {m_r_eta}, {m_r_xi}};
  pf.beta0 = pf.beta1 = 1.0;
  return Connection(parallel_config(2), pf, {{CellKey{0, 0, 0, 0}, 1.0}});
}

}  // namespace

TEST(Tensor4, ConstantWeightsLeaveValuesUnchanged) {
  const auto w = parallel_connection(fourier_matrix(3));
  const auto a = connection_to_tensor(w);
  for (const auto& [k, v] : w.values()) EXPECT_EQ(a(k), v);
  const auto back = tensor_to_connection(a);
  for (const auto& [k, v] : w.values()) EXPECT_EQ(back(k), v);
}

TEST(Tensor4, FourthRootArithmetic) {
  const auto w = single_cell(16.0, 1.0, 1.0, 1.0);
  const auto a = connection_to_tensor(w);
  EXPECT_NEAR(a(0, 0, 0, 0).real(), 2.0, 1e-15);
  const FourTensor t(w.config(), w.pf(), {{CellKey{0, 0, 0, 0}, 1.0}});
  EXPECT_NEAR(tensor_to_connection(t)(0, 0, 0, 0).real(), 0.5, 1e-15);
}

TEST(Tensor4, RoundTrips) {
  for (const auto& w : biunitary_fixtures()) {
    const auto back = tensor_to_connection(connection_to_tensor(w));
    for (const auto& key : matching_cells(w.config())) EXPECT_NEAR(std::abs(back(key) - w(key)), 0.0, 1e-12);
    const auto a = connection_to_tensor(w);
    const auto aa = tensor_conjugate(tensor_conjugate(a));
    for (const auto& key : matching_cells(w.config())) EXPECT_NEAR(std::abs(aa(key) - a(key)), 0.0, 1e-12);
  }
}

TEST(Tensor4, ZeroStaysZeroAndFactorsArePositive) {
  for (const auto& w : biunitary_fixtures()) {
    const auto a = connection_to_tensor(w);
    for (const auto& key : matching_cells(w.config())) {
      EXPECT_GT(a.factor(key), 0.0);
      if (w(key) == Complex(0.0)) EXPECT_EQ(a(key), Complex(0.0));
    }
  }
}

TEST(Tensor4, ConjugateOfRealTensorIsFlip) {
  MatrixC h(2, 2);
  h << 1.0, 1.0, 1.0, -1.0;
  const auto a = connection_to_tensor(hadamard_connection(h / std::sqrt(2.0)));
  const auto b = tensor_conjugate(a);
  for (const auto& [k, v] : a.values()) EXPECT_EQ(b(k[2], k[1], k[0], k[3]), v);
}

TEST(Tensor4, ConjugateMatchesBar) {
  for (const auto& w : biunitary_fixtures()) {
    const auto wb = tensor_to_connection(tensor_conjugate(connection_to_tensor(w)));
    const auto bar = renormalize(w, Renormalization::Bar);
    for (const auto& key : matching_cells(bar.config())) EXPECT_NEAR(std::abs(wb(key) - bar(key)), 0.0, 1e-12);
  }
}

TEST(Tensor4, BiunitarityEquivalence) {
  for (const auto& w : biunitary_fixtures()) {
    const auto rc = check_biunitarity(w);
    const auto rt = check_tensor_biunitarity(connection_to_tensor(w));
    EXPECT_TRUE(rc.passed());
    EXPECT_TRUE(rt.passed());
    EXPECT_LT(rt.worst_defect(), 10 * kDefaultCheckTol);
  }
}

TEST(Tensor4, IdentityMatrixFailsSecondIdentity) {
  const auto w = hadamard_connection(MatrixC::Identity(2, 2));
  const auto r = check_tensor_biunitarity(connection_to_tensor(w));
  EXPECT_EQ(r.find("identity-1")->status, CheckStatus::Pass);
  EXPECT_EQ(r.find("identity-2")->status, CheckStatus::Fail);
  const auto rc = check_biunitarity(w);
  const double dc = rc.worst_defect(), dt = r.worst_defect();
  EXPECT_LE(dt, 10 * dc);
  EXPECT_LE(dc, 10 * dt);
}

TEST(Tensor4, PerturbationIsDetected) {
  for (const auto& w : biunitary_fixtures()) {
    const auto a = connection_to_tensor(w);
    auto values = a.values();
    values.begin()->second += 1e-3;
    const FourTensor b(a.config(), a.pf(), values);
    const auto r = check_tensor_biunitarity(b);
    EXPECT_FALSE(r.passed());
    EXPECT_GE(r.worst_defect(), 1e-4);
    auto wv = w.values();
    wv.begin()->second += 1e-3;
    const double dc = check_biunitarity(Connection(w.config(), w.pf_data(), wv)).worst_defect();
    EXPECT_LE(r.worst_defect(), 10 * dc);
    EXPECT_LE(dc, 10 * r.worst_defect());
  }
}
