#include <gtest/gtest.h>

#include <cmath>

#include "biconnect/strings.hpp"
#include "oracles.hpp"

using namespace biconnect;

namespace {

struct Fixture {
  const char* name;
  Connection w;
  std::size_t flat_dim;  // produced by oracle::flat_dimension, see OracleDimensions
};

Connection phase_gauged(const Connection& w, double t) {
  const auto& c = w.config();
  const auto n1 = static_cast<Eigen::Index>(c.graph(GraphSlot::G1).edge_count());
  const auto n3 = static_cast<Eigen::Index>(c.graph(GraphSlot::G3).edge_count());
  GaugePair g{MatrixC::Zero(n1, n1), MatrixC::Zero(n3, n3)};
  for (Eigen::Index i = 0; i < n1; ++i) g.u(i, i) = std::polar(1.0, t * static_cast<double>(i * i + 1));
  for (Eigen::Index i = 0; i < n3; ++i) g.v(i, i) = std::polar(1.0, 0.3 * t * static_cast<double>(i));
  return gauge_transform(w, g);
}

std::vector<Fixture> fixtures() {
  const auto f2 = hadamard_connection(fourier_matrix(2));
  const auto f3 = hadamard_connection(fourier_matrix(3));
  return {{"fourier2", f2, 1},
          {"fourier3", f3, 1},
          {"fourier3-gauged", phase_gauged(f3, 0.4), 1},
          {"parallel2", parallel_connection(fourier_matrix(2)), 4},
          {"parallel3", parallel_connection(fourier_matrix(3)), 9},
          {"fourier2-sum", direct_sum(f2, f2), 4}};
}

Connection perturbed(const Connection& w, double eps) {
  auto v = w.values();
  v.begin()->second += eps;
  return Connection(w.config(), w.pf_data(), v);
}

StringField counterexample(const Connection& w) {
  auto f = zero_field(w.config().graph(GraphSlot::G1));
  f.at(0, 0) = 1.0;
  return f;
}

}  // namespace

TEST(Strings, OracleDimensions) {
  for (const auto& fx : fixtures()) EXPECT_EQ(oracle::flat_dimension(fx.w), fx.flat_dim) << fx.name;
}

TEST(Strings, SolverMatchesOracle) {
  for (const auto& fx : fixtures()) {
    const auto basis = solve_flat_fields(closed_word(fx.w));
    EXPECT_EQ(basis.size(), fx.flat_dim) << fx.name;
    for (const auto& f : basis) EXPECT_TRUE(check_flatness(f, closed_word(fx.w)).flat) << fx.name;
  }
}

TEST(Strings, SolverBasisIsOrthonormal) {
  const auto basis = solve_flat_fields(closed_word(fixtures()[5].w));
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < basis.size(); ++j)
      EXPECT_NEAR(std::abs(field_inner(basis[i], basis[j]) - (i == j ? 1.0 : 0.0)), 0.0, 1e-12);
}

TEST(Strings, IdentityInSpan) {
  for (const auto& fx : fixtures()) {
    const auto id = identity_field(fx.w.config().graph(GraphSlot::G1));
    const auto basis = solve_flat_fields(closed_word(fx.w));
    auto proj = zero_field(id.graph);
    for (const auto& b : basis) proj = proj + field_inner(b, id) * b;
    EXPECT_LT(field_distance(proj, id), 1e-10) << fx.name;
  }
}

TEST(Strings, DimensionIsGaugeInvariant) {
  Rng rng(21);
  const auto s = fixtures()[5].w;
  for (int t = 0; t < 5; ++t) {
    const auto g = gauge_transform(s, random_gauge(s.config(), rng));
    EXPECT_EQ(solve_flat_fields(closed_word(g)).size(), 4u);
  }
  const auto f3 = fixtures()[1].w;
  EXPECT_EQ(solve_flat_fields(closed_word(phase_gauged(f3, 1.1))).size(), 1u);
}

TEST(Strings, IdentityTransportsToIdentity) {
  for (const auto& fx : fixtures()) {
    const auto id = identity_field(fx.w.config().graph(GraphSlot::G1));
    const auto t = transport_field(id, fx.w);
    EXPECT_LT(t.defect, 1e-10) << fx.name;
    ASSERT_TRUE(t.field.has_value());
    EXPECT_LT(field_distance(*t.field, identity_field(fx.w.config().graph(GraphSlot::G3))), 1e-10);
    const auto h = check_half_flatness(id, fx.w);
    EXPECT_TRUE(h.half_flat);
  }
}

TEST(Strings, RandomFieldsAreNotTransportable) {
  Rng rng(4);
  const auto w = fixtures()[1].w;
  for (int i = 0; i < 10; ++i) {
    const auto f = random_field(w.config().graph(GraphSlot::G1), rng);
    const auto t = transport_field(f, w);
    EXPECT_GE(t.defect, 1e-4);
    EXPECT_FALSE(t.field.has_value());
    EXPECT_FALSE(check_half_flatness(f, w).half_flat);
    EXPECT_FALSE(check_flatness(f, closed_word(w)).flat);
  }
}

TEST(Strings, Linearity) {
  Rng rng(8);
  const auto w = fixtures()[5].w;
  const auto& g = w.config().graph(GraphSlot::G1);
  const auto f = random_field(g, rng), h = random_field(g, rng);
  const Complex l(0.7, -1.3);
  const auto tf = transport_field(f, w), th = transport_field(h, w), tc = transport_field(l * f + h, w);
  for (const auto& [k, v] : tc.values) {
    const auto a = tf.values.count(k) ? tf.values.at(k) : Complex(0.0);
    const auto b = th.values.count(k) ? th.values.at(k) : Complex(0.0);
    EXPECT_NEAR(std::abs(v - (l * a + b)), 0.0, 1e-12);
  }
  const auto s = open_string_space(w, 0, 0, 2)[3];
  const auto af = act_flat_field(f, s), ac = act_flat_field(l * f, s);
  ASSERT_EQ(af.size(), ac.size());
  for (std::size_t i = 0; i < af.size(); ++i) EXPECT_NEAR(std::abs(ac[i].second - l * af[i].second), 0.0, 1e-14);
}

TEST(Strings, PerturbationBreaksIdentityFlatness) {
  for (const auto& fx : fixtures()) {
    const auto p = perturbed(fx.w, 1e-3);
    const auto id = identity_field(p.config().graph(GraphSlot::G1));
    const auto r = check_flatness(id, closed_word(p));
    EXPECT_FALSE(r.flat) << fx.name;
    EXPECT_GE(r.defect, 1e-4) << fx.name;
    const double b = check_biunitarity(p).worst_defect();
    EXPECT_LE(r.defect, 10 * b) << fx.name;
    EXPECT_LE(b, 10 * r.defect) << fx.name;
  }
}

TEST(Strings, TransportCompositionAgreesWithFlatness) {
  Rng rng(99);
  for (const auto& fx : fixtures()) {
    const auto word = closed_word(fx.w);
    std::vector<StringField> samples = solve_flat_fields(word);
    samples.push_back(identity_field(word.left_graph()));
    for (int i = 0; i < 100; ++i) samples.push_back(random_field(word.left_graph(), rng));
    for (const auto& f : samples) {
      const auto t = transport_word(f, word);
      const bool by_transport = t.defect < kDefaultCheckTol && field_distance(t.field, f) < kDefaultCheckTol;
      EXPECT_EQ(by_transport, check_flatness(f, word).flat) << fx.name;
    }
  }
}

TEST(Strings, FieldAlgebra) {
  Rng rng(2);
  const auto s = fixtures()[5].w;
  const auto& g = s.config().graph(GraphSlot::G1);
  const auto id = identity_field(g);
  const auto f = random_field(g, rng), h = random_field(g, rng), k = random_field(g, rng);
  EXPECT_LT(field_distance(field_product(id, f), f), 1e-15);
  EXPECT_LT(field_distance(field_product(f, id), f), 1e-15);
  EXPECT_LT(field_distance(field_product(field_product(f, h), k), field_product(f, field_product(h, k))), 1e-12);
  const auto word = closed_word(s);
  const auto basis = solve_flat_fields(word);
  for (const auto& a : basis) {
    EXPECT_TRUE(check_flatness(adjoint(a), word).flat);
    for (const auto& b : basis) EXPECT_LT(check_flatness(field_product(a, b), word).defect, 1e-8);
  }
  EXPECT_THROW(field_product(f, identity_field(hadamard_config(2).graph(GraphSlot::G1))), MismatchError);
}

TEST(Strings, WordsMustComposeAndClose) {
  const auto f3 = fixtures()[1].w;
  EXPECT_THROW(ConnectionWord({f3, f3}), MismatchError);
  const ConnectionWord open({f3});
  EXPECT_FALSE(open.closed());
  EXPECT_THROW(check_flatness(identity_field(f3.config().graph(GraphSlot::G1)), open), MismatchError);
  EXPECT_THROW(solve_flat_fields(open), MismatchError);
  EXPECT_TRUE(closed_word(f3).closed());
}

TEST(Strings, OpenStringCounts) {
  const auto par = parallel_connection(fourier_matrix(3));
  EXPECT_EQ(open_string_space(par, 0, 0, 0).size(), 3u);
  for (const auto& w : {hadamard_connection(fourier_matrix(3)), par,
                        trivial_connection(example1().graph(GraphSlot::G0), example1().layers[0], example1().layers[3])})
    for (std::size_t level = 0; level <= 4; ++level)
      for (std::size_t s0 = 0; s0 < w.config().layer_size(Layer::V0); ++s0)
        EXPECT_EQ(open_string_space(w, s0, 0, level).size(), oracle::count_open_strings(w.config(), s0, 0, level));
  const Connection e1(example1(), std::nullopt, {});
  for (std::size_t s0 = 0; s0 < 3; ++s0)
    for (std::size_t s1 = 0; s1 < 2; ++s1)
      EXPECT_EQ(open_string_space(e1, s0, s1, 2).size(), oracle::count_open_strings(example1(), s0, s1, 2));
  EXPECT_THROW(open_string_space(par, 0, 0, 7), CapExceededError);
  EXPECT_THROW(open_string_space(par, 4, 0, 1), InputError);
}

TEST(Strings, ActionOfFields) {
  Rng rng(6);
  const auto par = parallel_connection(fourier_matrix(3));
  const auto f = random_field(par.config().graph(GraphSlot::G1), rng);
  const auto strings = open_string_space(par, 0, 0, 0);
  const MatrixC a = detail::action_matrix(f, strings);
  EXPECT_LT((a - f.coeffs).cwiseAbs().maxCoeff(), 1e-15);
  const auto id = identity_field(par.config().graph(GraphSlot::G1));
  for (const auto& s : open_string_space(par, 0, 0, 2)) {
    const auto r = act_flat_field(id, s);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].first, s);
    EXPECT_EQ(r[0].second, Complex(1.0));
  }
}

TEST(Strings, ActionIsWellDefinedForFlatFields) {
  for (const auto& fx : fixtures()) {
    const auto id = identity_field(fx.w.config().graph(GraphSlot::G1));
    for (std::size_t level = 0; level <= 3; ++level) {
      EXPECT_LT(check_action_well_defined(id, fx.w, level), 1e-12) << fx.name;
      for (const auto& f : solve_flat_fields(closed_word(fx.w)))
        EXPECT_LT(check_action_well_defined(f, fx.w, level), 1e-9) << fx.name;
    }
  }
}

TEST(Strings, NonFlatFieldBreaksAction) {
  const auto w = fixtures()[1].w;
  const auto f = counterexample(w);
  EXPECT_FALSE(check_flatness(f, closed_word(w)).flat);
  double worst = 0.0;
  for (std::size_t level = 0; level <= 3; ++level) worst = std::max(worst, check_action_well_defined(f, w, level));
  EXPECT_GE(worst, 1e-4);
}
