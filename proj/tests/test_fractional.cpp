#include <gtest/gtest.h>

#include <random>

#include "fraclap/bubbles.hpp"
#include "fraclap/constants.hpp"
#include "fraclap/error.hpp"
#include "fraclap/fractional.hpp"

using namespace fraclap;

namespace {

Vec random_field(std::size_t m, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> d(-1, 1);
  Vec v(m);
  for (auto& x : v) x = d(gen);
  return v;
}

std::vector<SpectralBasis> bases() {
  return {build_box_basis({{-1, 1}}, 2.0 / 256), build_box_basis({{0, 1}, {0, 1}}, 1.0 / 33)};
}

double rel(const Vec& a, const Vec& b) { return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff(); }

}  // namespace

// Operator laws over many random fields and exponents.
TEST(FractionalProperty, Semigroup) {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> ex(-0.95, 0.95);
  for (const auto& b : bases())
    for (int rep = 0; rep < 10; ++rep) {
      const double s1 = ex(gen), s2 = ex(gen);
      const Vec u = random_field(b.size(), 100 + rep);
      EXPECT_LT(rel(apply_power(b, apply_power(b, u, s1), s2), apply_power(b, u, s1 + s2)), 1e-10);
    }
}

TEST(FractionalProperty, InverseAndSelfAdjoint) {
  for (const auto& b : bases())
    for (double s : {0.1, 0.2, 0.5, 0.75, 0.95})
      for (int rep = 0; rep < 5; ++rep) {
        const Vec u = random_field(b.size(), 200 + rep), v = random_field(b.size(), 300 + rep);
        EXPECT_LT(rel(apply_power(b, apply_power(b, u, s), -s), u), 1e-10);
        const double lhs = dot(b.grid(), apply_power(b, u, s), v);
        const double rhs = dot(b.grid(), u, apply_power(b, v, s));
        EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(lhs) + 1e-12);
      }
}

TEST(FractionalProperty, EnergyFormIsPositiveAndMatchesPairing) {
  for (const auto& b : bases())
    for (int rep = 0; rep < 5; ++rep) {
      const Vec u = random_field(b.size(), 400 + rep);
      const double e = energy_form(b, u, 0.3);
      EXPECT_GT(e, 0);
      EXPECT_NEAR(e, dot(b.grid(), apply_power(b, u, 0.3), u), 1e-11 * e);
    }
}

TEST(FractionalProperty, InversePreservesPositivity) {
  for (const auto& b : bases())
    for (int rep = 0; rep < 5; ++rep) {
      Vec f = random_field(b.size(), 500 + rep).cwiseAbs();
      EXPECT_GT(apply_power(b, f, -0.4).minCoeff(), 0);
    }
}

TEST(Fractional, PowerOneIsTheStencil) {
  for (const auto& b : bases()) {
    const Vec u = random_field(b.size(), 7);
    EXPECT_LT(rel(apply_power(b, u, 1.0), apply_stencil(b.grid(), u)), 1e-10);
  }
}

TEST(Fractional, QuotientOfConcentratedBubbleNearSharpConstant) {
  // small s keeps the bubble tail w ~ |x|^{2s-1} short enough to truncate
  const double s = 0.1;
  auto b = build_box_basis({{-1, 1}}, 2.0 / 65536);
  const ConstantSet k = closed_form_constants(1, s);
  const BubbleParams bp{1e-3, {0, 0, 0}};
  Vec w = bubble_on_grid(bp, b.grid(), s);
  w.array() -= bubble_value(bp, {1, 0, 0}, 1, s);
  const double q = sobolev_quotient(b, w, s);
  EXPECT_NEAR(q * k.S * k.S, 1.0, 0.05);
}

TEST(Fractional, Errors) {
  auto b = bases().front();
  EXPECT_THROW(apply_power(b, Vec::Zero(b.size()), 2.5), ConfigError);
  EXPECT_THROW(sobolev_quotient(b, Vec::Zero(b.size()), 0.3), ConfigError);
  EXPECT_THROW(critical_exponent(1, 0.5), ConfigError);
  EXPECT_THROW(apply_power(b, Vec::Zero(3), 0.5), ConfigError);
}
