#include "fraclap/bubbles.hpp"

#include <cmath>

#include "fraclap/constants.hpp"
#include "fraclap/error.hpp"
#include "fraclap/fractional.hpp"
#include "fraclap/reduced.hpp"

namespace fraclap {

double bubble_value(const BubbleParams& b, const Point& x, int n, double s, int deriv) {
  static thread_local int cached_n = -1;
  static thread_local double cached_s = -1, cached_c = 0;
  if (n != cached_n || s != cached_s) {
    cached_c = closed_form_constants(n, s).c;
    cached_n = n;
    cached_s = s;
  }
  const double beta = (n - 2 * s) / 2;
  double r2 = 0;
  for (int d = 0; d < n; ++d) r2 += (x[d] - b.xi[d]) * (x[d] - b.xi[d]);
  const double l = b.lambda, q = l * l + r2;
  const double w = cached_c * std::pow(l / q, beta);
  if (deriv < 0) return w;
  if (deriv == 0) return beta * w * (r2 - l * l) / (l * q);
  if (deriv > n) throw ConfigError("bubble_eval: derivative index out of range");
  return beta * w * 2 * (x[deriv - 1] - b.xi[deriv - 1]) / q;
}

std::vector<double> bubble_eval(const BubbleParams& b, const std::vector<Point>& xs, int n, double s,
                                int deriv) {
  if (!(b.lambda > 0)) throw ConfigError("bubble: lambda must be positive");
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = bubble_value(b, xs[i], n, s, deriv);
  return out;
}

Vec bubble_on_grid(const BubbleParams& b, const DomainGrid& g, double s, int deriv) {
  if (!(b.lambda > 0)) throw ConfigError("bubble: lambda must be positive");
  Vec v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = bubble_value(b, g.coord(i), g.dim(), s, deriv);
  return v;
}

ProjectedBubble project_bubble(const SpectralBasis& basis, const BubbleParams& b, double s) {
  const DomainGrid& g = basis.grid();
  if (!g.contains(b.xi)) throw ConfigError("project_bubble: center outside the domain");
  const int n = g.dim();
  const double p = critical_exponent(n, s);
  const Vec inv = basis.multiplier(-s);
  const Vec w = bubble_on_grid(b, g, s);
  ProjectedBubble out;
  out.Pw = basis.apply_multiplier(w.array().pow(p).matrix(), inv);
  const Vec wp1 = p * w.array().pow(p - 1);
  for (int j = 0; j <= n; ++j) {
    Vec psi = bubble_on_grid(b, g, s, j);
    out.Ppsi.push_back(basis.apply_multiplier(wp1.cwiseProduct(psi), inv));
  }
  return out;
}

ProjectionExpansion projection_expansion_residual(const GreenCache& cache, const BubbleParams& b,
                                                  const std::vector<double>& eps, double alpha0,
                                                  double far_radius, double boundary_margin) {
  if (eps.size() < 2) throw ConfigError("projection expansion: need at least two scales");
  const DomainGrid& g = cache.grid();
  const int n = g.dim();
  const double s = cache.s();
  const long y = g.nearest_node(b.xi);
  if (y < 0 || distance(g.coord(y), b.xi, n) > 1e-9 * g.h(0))
    throw ConfigError("projection expansion: center must be a grid node");
  const ConstantSet k = closed_form_constants(n, s);
  const double beta = (n - 2 * s) / 2;

  const Vec G = cache.column(y);
  Vec H(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    H[i] = (long(i) == y) ? robin_function(cache, y) : regular_part(cache, i, y);

  ProjectionExpansion out;
  for (double e : eps) {
    ProjectionRow row;
    row.eps = e;
    BubbleParams bb = b;
    bb.lambda = b.lambda * std::pow(e, alpha0);
    row.scale = bb.lambda;
    ProjectedBubble pb = project_bubble(cache.basis(), bb, s);
    const Vec w = bubble_on_grid(bb, g, s);
    const Vec psi0 = bubble_on_grid(bb, g, s, 0);
    const double amp = k.c1 * std::pow(bb.lambda, beta);
    // dilated-frame remainder divided by eps^{(n-2s) alpha0}, written in original variables
    row.residual = (pb.Pw - w + amp * H).cwiseAbs().maxCoeff() / std::pow(e, alpha0 * beta);
    const double amp0 = beta * k.c1 * std::pow(bb.lambda, beta - 1);
    row.psi0_residual =
        (pb.Ppsi[0] - psi0 + amp0 * H).cwiseAbs().maxCoeff() / std::pow(e, alpha0 * (beta - 1));
    double dev = 0;
    bool any = false;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (distance(g.coord(i), b.xi, n) <= far_radius) continue;
      if (distance_to_boundary(g, g.coord(i)) < boundary_margin) continue;
      any = true;
      dev = std::max(dev, std::abs(pb.Pw[i] / (amp * G[i]) - 1.0));
    }
    if (!any) throw ConfigError("projection expansion: far-field set is empty");
    row.far_ratio_dev = dev;
    out.rows.push_back(row);
  }
  out.decreasing = true;
  for (std::size_t i = 1; i < out.rows.size(); ++i)
    if (!(out.rows[i].residual < out.rows[i - 1].residual)) out.decreasing = false;
  return out;
}

}  // namespace fraclap
