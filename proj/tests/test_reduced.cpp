#include <gtest/gtest.h>

#include <cmath>

#include "fraclap/error.hpp"
#include "fraclap/reduced.hpp"
#include "fraclap/solver.hpp"

using namespace fraclap;

namespace {

struct Square {
  SpectralBasis basis = build_box_basis({{-1, 1}, {-1, 1}}, 2.0 / 48);
  double s = 0.25;
  GreenCache cache{basis, s};
  ConstantSet k = closed_form_constants(2, s);
};

const Square& square() {
  static const Square sq;
  return sq;
}

ReducedConfig two_peaks() {
  ReducedConfig c;
  c.k = 2;
  c.lambdas = {0.8, 1.3};
  c.sigmas = {Point{-0.41, 0.13, 0}, Point{0.37, -0.22, 0}};
  c.delta0 = 0.2;
  return c;
}

// Central differences of upsilon in packed coordinates.
Eigen::VectorXd fd_grad(const GreenCache& cache, const ConstantSet& k, const ReducedConfig& c, ProblemKind kind) {
  const int n = cache.grid().dim();
  const auto x = pack(c, n);
  Eigen::VectorXd g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double step = 1e-6 * std::max(1.0, std::abs(x[j]));
    auto xp = x, xm = x;
    xp[j] += step;
    xm[j] -= step;
    g[j] = (upsilon(cache, k, unpack(c, xp, n), kind) - upsilon(cache, k, unpack(c, xm, n), kind)) / (2 * step);
  }
  return g;
}

}  // namespace

TEST(Reduced, SingleBubbleFormulaAtNodes) {
  const auto& sq = square();
  const DomainGrid& g = sq.basis.grid();
  const double m = 2 - 2 * sq.s;
  for (Point x : {Point{0, 0, 0}, Point{0.25, -0.5, 0}}) {
    const long y = g.nearest_node(x);
    ReducedConfig c;
    c.lambdas = {0.9};
    c.sigmas = {g.coord(y)};
    c.delta0 = 0.2;
    const double tau = sq.cache.tau()[y];
    const double expect = sq.k.c1 * sq.k.c1 * tau * std::pow(0.9, m) - *sq.k.c2 * std::pow(0.9, 2 * sq.s);
    EXPECT_NEAR(upsilon(sq.cache, sq.k, c, ProblemKind::critical), expect, 1e-12 * std::abs(expect));
    EXPECT_NEAR(robin_at(sq.cache, g.coord(y)), tau, 1e-12);
  }
}

TEST(ReducedProperty, GradientMatchesFiniteDifferences) {
  const auto& sq = square();
  for (ProblemKind kind : {ProblemKind::critical, ProblemKind::subcritical}) {
    ReducedConfig c = two_peaks();
    for (int rep = 0; rep < 3; ++rep) {
      c.sigmas[0][0] += 0.037;
      c.sigmas[1][1] -= 0.029;
      c.lambdas[1] *= 1.1;
      const Eigen::VectorXd an = upsilon_grad(sq.cache, sq.k, c, kind);
      const Eigen::VectorXd fd = fd_grad(sq.cache, sq.k, c, kind);
      EXPECT_LT((an - fd).norm(), 1e-6 * an.norm()) << to_string(kind) << " rep " << rep;
    }
  }
}

TEST(ReducedProperty, PermutationInvariance) {
  const auto& sq = square();
  ReducedConfig c = two_peaks(), p = c;
  std::swap(p.lambdas[0], p.lambdas[1]);
  std::swap(p.sigmas[0], p.sigmas[1]);
  for (ProblemKind kind : {ProblemKind::critical, ProblemKind::subcritical}) {
    const double a = upsilon(sq.cache, sq.k, c, kind), b = upsilon(sq.cache, sq.k, p, kind);
    EXPECT_NEAR(a, b, 1e-12 * std::abs(a));
  }
}

TEST(ReducedProperty, GreenInterpolantIsSymmetric) {
  const auto& sq = square();
  const Point x{-0.41, 0.13, 0}, y{0.37, -0.22, 0};
  EXPECT_NEAR(green_at(sq.cache, x, y), green_at(sq.cache, y, x), 1e-10);
  EXPECT_GT(green_at(sq.cache, x, y), 0);
}

TEST(Reduced, LambdaStarIsStationary) {
  const auto& sq = square();
  const Point x{0.1, -0.05, 0};
  const double tau = robin_at(sq.cache, x);
  const double ls = lambda_star(sq.k, tau);
  ReducedConfig c;
  c.lambdas = {ls};
  c.sigmas = {x};
  c.delta0 = std::min(0.2, 0.5 / ls);
  const Eigen::VectorXd gr = upsilon_grad(sq.cache, sq.k, c, ProblemKind::critical);
  EXPECT_LT(std::abs(gr[0]), 1e-10 * upsilon_scale(sq.cache, sq.k, c, ProblemKind::critical));
}

TEST(Reduced, SingleBubbleFinderMatchesClosedForm) {
  // interval: the stationary scale is large, so delta0 must sit below 1 / lambda*
  const auto b = build_box_basis({{-1, 1}}, 2.0 / 512);
  const double s = 0.2;
  GreenCache cache(b, s);
  const ConstantSet k = closed_form_constants(1, s);
  const double ls = lambda_star(k, cache.tau()[b.grid().nearest_node({0, 0, 0})]);
  ReducedConfig c;
  c.lambdas = {1.3 * ls};
  c.sigmas = {Point{0.13, 0, 0}};
  c.delta0 = std::min(default_delta0(b.grid()), 0.5 / ls);
  const CriticalResult r = find_critical_config(cache, k, c, ProblemKind::critical);
  EXPECT_NEAR(r.config.sigmas[0][0], 0.0, 1e-6);
  EXPECT_NEAR(r.config.lambdas[0] / ls, 1.0, 1e-6);
  EXPECT_GT(r.hessian_eigenvalues.cwiseAbs().minCoeff(), 0);
}

TEST(Reduced, SquareFinderReachesCenter) {
  const auto& sq = square();
  ReducedConfig c;
  const double ls = lambda_star(sq.k, robin_at(sq.cache, {0, 0, 0}));
  c.lambdas = {0.8 * ls};
  c.sigmas = {Point{0.15, -0.1, 0}};
  c.delta0 = 0.1;
  const CriticalResult r = find_critical_config(sq.cache, sq.k, c, ProblemKind::critical);
  EXPECT_LT(std::hypot(r.config.sigmas[0][0], r.config.sigmas[0][1]), 1e-6);
  EXPECT_NEAR(r.config.lambdas[0] / ls, 1.0, 1e-6);
}

TEST(Reduced, Admissibility) {
  const auto& sq = square();
  const DomainGrid& g = sq.basis.grid();
  ReducedConfig c = two_peaks();
  EXPECT_EQ(admissibility_violation(g, c), "");
  auto bad = c;
  bad.lambdas[0] = 0.1;
  EXPECT_NE(admissibility_violation(g, bad).find("outside"), std::string::npos);
  bad = c;
  bad.sigmas[1] = Point{-0.3, 0.13, 0};
  EXPECT_NE(admissibility_violation(g, bad).find("closer"), std::string::npos);
  bad = c;
  bad.sigmas[0] = Point{0.9, 0, 0};
  EXPECT_NE(admissibility_violation(g, bad).find("boundary"), std::string::npos);
  bad = c;
  bad.lambdas.pop_back();
  EXPECT_NE(admissibility_violation(g, bad), "");
  EXPECT_THROW(upsilon(sq.cache, sq.k, bad, ProblemKind::critical), ConfigError);
  EXPECT_NEAR(distance_to_boundary(g, {0.5, 0.25, 0}), 0.5, 1e-12);
  EXPECT_EQ(distance_to_boundary(g, {1.5, 0, 0}), 0.0);
}

TEST(Reduced, PackRoundTrip) {
  const ReducedConfig c = two_peaks();
  const auto x = pack(c, 2);
  ASSERT_EQ(x.size(), 6u);
  EXPECT_EQ(x[0], 0.8);
  EXPECT_EQ(x[2], -0.41);
  const ReducedConfig d = unpack(c, x, 2);
  EXPECT_EQ(d.lambdas, c.lambdas);
  EXPECT_EQ(d.sigmas[1][1], c.sigmas[1][1]);
}

TEST(Reduced, DumbbellMask) {
  const Mask m = dumbbell_mask(2, 1.0, 0.25, 1.0 / 16);
  EXPECT_EQ(m.rows, 16);
  EXPECT_EQ(m.cols, 48);
  EXPECT_TRUE(mask_connected(m));
  // mirror symmetric in both directions
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) {
      EXPECT_EQ(m.at(r, c), m.at(r, m.cols - 1 - c));
      EXPECT_EQ(m.at(r, c), m.at(m.rows - 1 - r, c));
    }
  int neck = 0;
  for (int r = 0; r < m.rows; ++r) neck += m.at(r, 24);
  EXPECT_EQ(neck, 4);
  EXPECT_TRUE(mask_connected(dumbbell_mask(3, 1.0, 0.125, 1.0 / 16)));
  EXPECT_THROW(dumbbell_mask(2, 1.0, 0.0625, 1.0 / 16), ConfigError);
  EXPECT_THROW(dumbbell_mask(2, 1.0, 1.5, 1.0 / 16), ConfigError);
  EXPECT_THROW(dumbbell_mask(2, 1.0, 0.3, 1.0 / 16), ConfigError);
  EXPECT_THROW(dumbbell_mask(0, 1.0, 0.25, 1.0 / 16), ConfigError);
}

TEST(Reduced, Errors) {
  const auto& sq = square();
  EXPECT_THROW(lambda_star(closed_form_constants(3, 0.75), 0.5), ConfigError);
  ReducedConfig c = two_peaks();
  c.delta0 = 0.6;
  EXPECT_THROW(find_critical_config(sq.cache, sq.k, c, ProblemKind::critical), ConfigError);
  const auto big = build_box_basis({{-1, 1}, {-1, 1}}, 2.0 / 128);
  GreenCache lazy(big, 0.25);
  EXPECT_THROW(robin_at(lazy, {0, 0, 0}), ConfigError);
  EXPECT_THROW(robin_at(sq.cache, {0.99, 0, 0}), ConfigError);
}
