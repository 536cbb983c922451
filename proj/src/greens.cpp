#include "fraclap/greens.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "fraclap/constants.hpp"
#include "fraclap/error.hpp"
#include "fraclap/fractional.hpp"

namespace fraclap {

namespace {
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

constexpr int kNear = 6;  // lattice singular part within this many cells per axis (n > 1)

// e^{-x} I_nu(x)
double scaled_i(int nu, double x) {
  if (x < 500) return std::exp(-x) * boost::math::cyl_bessel_i(nu, x);
  const double mu = 4.0 * nu * nu;
  double term = 1, sum = 1;
  for (int k = 1; k < 8; ++k) {
    term *= -(mu - (2 * k - 1) * (2 * k - 1)) / (8 * x * k);
    sum += term;
  }
  return sum / std::sqrt(2 * M_PI * x);
}

int near_index(std::array<int, 3> j, int n) {
  for (auto& v : j) v = std::abs(v);
  std::sort(j.begin(), j.begin() + n, std::greater<>());
  int idx = 0;
  for (int d = 0; d < n; ++d) idx = idx * (kNear + 1) + j[d];
  return idx;
}
}  // namespace

double lattice_green(int n, double s, std::array<int, 3> offset) {
  if (n < 1 || n > 3) throw ConfigError("lattice_green: n must be 1, 2 or 3");
  if (!(n > 2 * s)) throw ConfigError("lattice_green: need n > 2s");
  if (n == 1) {
    const int j = std::abs(offset[0]);
    return std::tgamma(1 - 2 * s) / (std::tgamma(s) * std::tgamma(1 - s)) *
           std::exp(std::lgamma(j + s) - std::lgamma(j + 1 - s));
  }
  // lambda^{-s} = Gamma(s)^{-1} int t^{s-1} e^{-t lambda} dt; the lattice heat kernel is a
  // product of e^{-2t} I_j(2t).
  auto f = [&](double t) {
    double v = std::pow(t, s - 1);
    for (int d = 0; d < n; ++d) v *= scaled_i(std::abs(offset[d]), 2 * t);
    return v;
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  double v = ts.integrate(f, 0.0, 1.0) + es.integrate(f, 1.0, std::numeric_limits<double>::infinity());
  return v / std::tgamma(s);
}

double lattice_green_origin(int n, double s) { return lattice_green(n, s, {0, 0, 0}); }

Vec green_column(const SpectralBasis& basis, std::size_t y, double s) {
  if (y >= basis.size()) throw ConfigError("green_column: source is not a grid node");
  Vec delta = Vec::Zero(basis.size());
  delta[y] = 1.0 / basis.grid().weight();
  return apply_power(basis, delta, -s);
}

GreenCache::GreenCache(const SpectralBasis& basis, double s, GreenOptions opts)
    : basis_(basis), s_(s), opts_(opts) {
  const DomainGrid& g = basis.grid();
  const int n = g.dim();
  if (!(n > 2 * s)) throw ConfigError("Green function needs n > 2s");
  a_ = closed_form_constants(n, s).a;
  lattice_ = lattice_green_origin(n, s) * std::pow(g.h(0), 2 * s - n);
  if (n > 1) near_.assign(std::size_t(std::pow(kNear + 1, n)), nan);
  std::array<int, 3> j{0, 0, 0};
  for (j[0] = 0; n > 1 && j[0] <= kNear; ++j[0])
    for (j[1] = 0; j[1] <= (n > 1 ? j[0] : 0); ++j[1])
      for (j[2] = 0; j[2] <= (n > 2 ? j[1] : 0); ++j[2])
        near_[near_index(j, n)] = lattice_green(n, s, j) * std::pow(g.h(0), 2 * s - n);
  minus_s_ = basis.multiplier(-s);
  const std::size_t m = g.size();
  full_ = m <= opts.full_cap;
  if (!full_) return;

  G_.resize(m, m);
  for (std::size_t j = 0; j < m; ++j) {
    Vec e = Vec::Zero(m);
    e[j] = 1.0 / g.weight();
    G_.col(j) = basis.apply_multiplier(e, minus_s_);
  }
  tau_ = Vec::Constant(m, nan);
  for (std::size_t y = 0; y < m; ++y)
    if (g.boundary_distance(y) >= opts.robin_margin) tau_[y] = robin_uncached(y);
  grad_ = Eigen::MatrixXd::Constant(m, n, nan);
  for (std::size_t y = 0; y < m; ++y) {
    if (g.boundary_distance(y) < opts.robin_margin + 1) continue;
    for (int d = 0; d < n; ++d) {
      auto ij = g.lattice(y);
      auto lo = ij, hi = ij;
      lo[d] -= 1;
      hi[d] += 1;
      grad_(y, d) = (tau_[g.node_at(hi)] - tau_[g.node_at(lo)]) / (2 * g.h(d));
    }
  }
}

std::string GreenCache::method_name() const {
  return opts_.method == RobinMethod::lattice ? "lattice" : "extrapolate-j1j2";
}

Vec GreenCache::column(std::size_t j) const {
  if (j >= grid().size()) throw ConfigError("green_column: source is not a grid node");
  if (full_) return G_.col(j);
  Vec e = Vec::Zero(grid().size());
  e[j] = 1.0 / grid().weight();
  return basis_.apply_multiplier(e, minus_s_);
}

double GreenCache::G(std::size_t i, std::size_t j) const {
  if (full_) return G_(i, j);
  return column(j)[i];
}

double GreenCache::singular(std::size_t x, std::size_t y) const {
  const DomainGrid& g = grid();
  const int n = g.dim();
  const auto& a = g.lattice(x);
  const auto& b = g.lattice(y);
  std::array<int, 3> j{0, 0, 0};
  bool near = true;
  for (int d = 0; d < n; ++d) {
    j[d] = a[d] - b[d];
    near = near && std::abs(j[d]) <= kNear && g.h(d) == g.h(0);
  }
  if (n == 1) return lattice_green(1, s_, j) * std::pow(g.h(0), 2 * s_ - 1);
  if (near) return near_[near_index(j, n)];
  return a_ * std::pow(distance(g.coord(x), g.coord(y), n), 2 * s_ - n);
}

double GreenCache::robin_uncached(std::size_t y) const {
  if (opts_.method == RobinMethod::lattice) return lattice_ - G(y, y);
  double sum = 0;
  for (int d = 0; d < grid().dim(); ++d) sum += robin_extrapolated(*this, y, d);
  return sum / grid().dim();
}

double regular_part(const GreenCache& cache, std::size_t x, std::size_t y) {
  if (x == y) throw ConfigError("regular_part: x = y, use robin_function");
  return cache.singular(x, y) - cache.G(x, y);
}

double robin_function(const GreenCache& cache, std::size_t y) {
  const DomainGrid& g = cache.grid();
  if (y >= g.size()) throw ConfigError("robin_function: not a grid node");
  if (g.boundary_distance(y) < cache.options().robin_margin)
    throw ConfigError("robin_function: node too close to the boundary");
  if (cache.full()) return cache.tau()[y];
  return cache.robin_uncached(y);
}

double robin_extrapolated(const GreenCache& cache, std::size_t y, int axis) {
  const DomainGrid& g = cache.grid();
  if (g.boundary_distance(y) < 3) throw ConfigError("robin_extrapolated: node too close to the boundary");
  const Vec col = cache.column(y);
  const int n = g.dim();
  const double s = cache.s();
  double avg[2];
  for (int j = 1; j <= 2; ++j) {
    double v = 0;
    for (int sgn : {-1, 1}) {
      auto ij = g.lattice(y);
      ij[axis] += sgn * j;
      long x = g.node_at(ij);
      v += cache.a() * std::pow(j * g.h(axis), 2 * s - n) - col[x];
    }
    avg[j - 1] = v / 2;
  }
  // tau + K j^{2s-n-2}, two points, two unknowns
  const double e = 2 * s - n - 2;
  const double k1 = 1.0, k2 = std::pow(2.0, e);
  const double K = (avg[0] - avg[1]) / (k1 - k2);
  return avg[0] - K * k1;
}

Eigen::VectorXd robin_gradient(const GreenCache& cache, std::size_t y) {
  const DomainGrid& g = cache.grid();
  if (y >= g.size()) throw ConfigError("robin_gradient: not a grid node");
  if (g.boundary_distance(y) < cache.options().robin_margin + 1)
    throw ConfigError("robin_gradient: node too close to the boundary");
  Eigen::VectorXd out(g.dim());
  if (cache.full()) return cache.grad_tau().row(y).transpose();
  for (int d = 0; d < g.dim(); ++d) {
    auto lo = g.lattice(y), hi = g.lattice(y);
    lo[d] -= 1;
    hi[d] += 1;
    out[d] = (robin_function(cache, g.node_at(hi)) - robin_function(cache, g.node_at(lo))) / (2 * g.h(d));
  }
  return out;
}

}  // namespace fraclap
