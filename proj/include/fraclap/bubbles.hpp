#pragma once

#include <vector>

#include "fraclap/basis.hpp"
#include "fraclap/greens.hpp"

namespace fraclap {

struct BubbleParams {
  double lambda = 1.0;
  Point xi{0, 0, 0};
};

// deriv = -1: w itself; 0: d/dlambda; j = 1..n: d/dxi^j.
double bubble_value(const BubbleParams& b, const Point& x, int n, double s, int deriv = -1);
std::vector<double> bubble_eval(const BubbleParams& b, const std::vector<Point>& xs, int n, double s,
                                int deriv = -1);
// Sampled on the nodes of a grid.
Vec bubble_on_grid(const BubbleParams& b, const DomainGrid& g, double s, int deriv = -1);

struct ProjectedBubble {
  Vec Pw;
  std::vector<Vec> Ppsi;  // j = 0..n
};

// Solutions of A_s u = w^p and A_s u = p w^{p-1} psi^j with zero Dirichlet data.
ProjectedBubble project_bubble(const SpectralBasis& basis, const BubbleParams& b, double s);

struct ProjectionRow {
  double eps = 0;
  double scale = 0;         // lambda eps^{alpha0}
  double residual = 0;      // r(eps) for P w
  double psi0_residual = 0; // same test for P psi^0
  double far_ratio_dev = 0; // max |P w / (c1 scale^{(n-2s)/2} G) - 1| on the far set
};

struct ProjectionExpansion {
  std::vector<ProjectionRow> rows;
  bool decreasing = false;
};

// The bubble w_{lambda eps^{alpha0}, xi} on the fixed grid (equivalent to the dilated domain by
// scaling); xi must be a grid node. H(., xi) comes from the Green cache.
// The far set is |x - xi| > far_radius at distance >= boundary_margin from the boundary: G vanishes
// linearly there while P w only vanishes like d^{2s}, so the ratio is not uniform up to the wall.
ProjectionExpansion projection_expansion_residual(const GreenCache& cache, const BubbleParams& b,
                                                  const std::vector<double>& eps, double alpha0,
                                                  double far_radius = 0.5, double boundary_margin = 0.25);

}  // namespace fraclap
