#include <gtest/gtest.h>
#include <cmath>
#include <numbers>

#include "fraclap/constants.hpp"
#include "fraclap/error.hpp"

using namespace fraclap;

namespace {
struct Frozen {
  int n;
  double s, S, Cs, a, c, b, c0, c1, c2, D, E;
};
// Evaluated independently at 30 digits.
const Frozen kFrozen[] = {
    {1, 0.2, 1.05115542177455931645, 0.384382996899886753559, 0.278624678053099001540, 0.658195086835779483418,
     1.55485427695026896517, 0.779229393807285552668, 2.36230003542734906088, 4.90539648461662230262,
     2.29928781844796976378, 0.884341468633834524529},
    {2, 0.45, 0.764330698413334211514, 0.880080823086943253250, 0.140069213314670860257, 1.01377124933073760512,
     7.33731647125599874108, 3.30179241206519943349, 7.23764505661398703599, 32.2871575963618268994,
     5.71198664289053316084, 1.84257633641630101963},
    {3, 0.75, 0.493394057078008049951, 2.09209924010620329790, 0.0634936359342409697858, 1.61713451825528544135,
     41.1871837492687201437, 16.8742447327793253030, 25.4692378922844775411, 0, 21.9664979996099840766,
     6.27614228560285259332},
};
}  // namespace

TEST(Constants, FrozenValues) {
  for (const auto& f : kFrozen) {
    const ConstantSet k = closed_form_constants(f.n, f.s);
    for (auto [got, want] : {std::pair{k.S, f.S}, {k.Cs, f.Cs}, {k.a, f.a}, {k.c, f.c}, {k.b, f.b}, {k.c0, f.c0},
                             {k.c1, f.c1}, {k.D, f.D}, {k.E, f.E}})
      EXPECT_NEAR(got, want, 1e-12 * want) << "n=" << f.n << " s=" << f.s;
    if (f.c2 > 0) {
      ASSERT_TRUE(k.c2.has_value());
      EXPECT_NEAR(*k.c2, f.c2, 1e-12 * f.c2);
    } else {
      EXPECT_FALSE(k.c2.has_value());
      EXPECT_FALSE(k.d_literal.has_value());
    }
  }
}

TEST(Constants, QuadratureOracleAgrees) {
  for (const auto& f : kFrozen) {
    const double n = f.n, s = f.s;
    for (double alpha : {n, (n + 2 * s) / 2, n - 2 * s}) {
      if (!(2 * alpha > n)) continue;
      const double closed = bubble_integral_closed(f.n, alpha);
      EXPECT_NEAR(bubble_integral_oracle(f.n, s, alpha), closed, 1e-10 * closed);
    }
  }
}

TEST(Constants, HalfLaplacianIdentities) {
  for (int n : {1, 2, 3}) {
    if (n <= 1) continue;
    const ConstantSet k = closed_form_constants(n, 0.5);
    EXPECT_NEAR(k.Cs, 1.0, 1e-15);
    if (n == 2) EXPECT_NEAR(k.c, 1.0, 1e-15);
  }
}

TEST(Constants, DEIdentity) {
  for (const auto& f : kFrozen) {
    const ConstantSet k = closed_form_constants(f.n, f.s);
    EXPECT_NEAR(k.D, (f.n - 2 * f.s + 2) * k.E, 1e-12 * k.D);
  }
}

TEST(Constants, DerivedRelations) {
  const ConstantSet k = closed_form_constants(1, 0.2);
  EXPECT_NEAR(k.b, k.c * k.c1, 1e-13 * k.b);
  EXPECT_DOUBLE_EQ(k.g_literal, k.g_corrected);
  EXPECT_NEAR(*k.d_amplitude * k.c * k.c, *k.d_corrected, 1e-14 * *k.d_corrected);
  EXPECT_NEAR(k.p, 7.0 / 3, 1e-15);
  // the printed pi^{n/s} factor in c2 versus the normalization pi^{n/2}
  EXPECT_NEAR(*k.c2_literal / *k.c2, std::pow(std::numbers::pi, 1 / 0.2 - 0.5), 1e-12 * *k.c2_literal / *k.c2);
}

TEST(Constants, SphereArea) {
  EXPECT_NEAR(sphere_area(1), 2.0, 1e-15);
  EXPECT_NEAR(sphere_area(2), 2 * std::numbers::pi, 1e-14);
  EXPECT_NEAR(sphere_area(3), 4 * std::numbers::pi, 1e-14);
}

TEST(Constants, Errors) {
  EXPECT_THROW(closed_form_constants(4, 0.5), ConfigError);
  EXPECT_THROW(closed_form_constants(1, 0.5), ConfigError);
  EXPECT_THROW(closed_form_constants(1, 1.2), ConfigError);
  EXPECT_THROW(bubble_integral_closed(2, 1.0), ConfigError);
  EXPECT_THROW(bubble_integral_oracle(2, 0.5, 0.9), ConfigError);
}
