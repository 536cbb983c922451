#include "fraclap/reduced.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fraclap/error.hpp"

namespace fraclap {

double default_alpha0(int n, double s, ProblemKind kind) {
  return kind == ProblemKind::critical ? 1.0 / (n - 4 * s) : 1.0 / (n - 2 * s);
}

double default_delta0(const DomainGrid& g) { return 0.1 * g.diameter(); }

double distance_to_boundary(const DomainGrid& g, const Point& x) {
  const int n = g.dim();
  if (!g.contains(x)) return 0.0;
  if (g.kind() == DomainGrid::Kind::box) {
    double d = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) d = std::min({d, x[a] - g.bounds(a).lo, g.bounds(a).hi - x[a]});
    return d;
  }
  const Mask& m = *g.mask();
  double best = std::numeric_limits<double>::infinity();
  for (int r = -1; r <= m.rows; ++r)
    for (int c = -1; c <= m.cols; ++c) {
      if (m.at(r, c)) continue;
      const double dx = (c + 1) * m.h - x[0], dy = (r + 1) * m.h - x[1];
      best = std::min(best, std::hypot(dx, dy));
    }
  return best;
}

std::string admissibility_violation(const DomainGrid& g, const ReducedConfig& c) {
  const int n = g.dim();
  if (c.k < 1) return "k must be positive";
  if (int(c.lambdas.size()) != c.k || int(c.sigmas.size()) != c.k) return "lambdas/sigmas do not match k";
  if (!(c.delta0 > 0)) return "delta0 must be positive";
  for (int i = 0; i < c.k; ++i) {
    if (!(c.lambdas[i] > c.delta0 && c.lambdas[i] < 1 / c.delta0))
      return "lambda_" + std::to_string(i + 1) + " outside (delta0, 1/delta0)";
    if (!(distance_to_boundary(g, c.sigmas[i]) > c.delta0))
      return "sigma_" + std::to_string(i + 1) + " within delta0 of the boundary";
    for (int j = 0; j < i; ++j)
      if (!(distance(c.sigmas[i], c.sigmas[j], n) > c.delta0))
        return "sigma_" + std::to_string(j + 1) + " and sigma_" + std::to_string(i + 1) + " closer than delta0";
  }
  return {};
}

namespace {

// Catmull-Rom weights and their derivatives in the local coordinate f in [0, 1).
void cr_weights(double f, double w[4], double dw[4]) {
  const double f2 = f * f, f3 = f2 * f;
  w[0] = 0.5 * (-f3 + 2 * f2 - f);
  w[1] = 0.5 * (3 * f3 - 5 * f2 + 2);
  w[2] = 0.5 * (-3 * f3 + 4 * f2 + f);
  w[3] = 0.5 * (f3 - f2);
  dw[0] = 0.5 * (-3 * f2 + 4 * f - 1);
  dw[1] = 0.5 * (9 * f2 - 10 * f);
  dw[2] = 0.5 * (-9 * f2 + 8 * f + 1);
  dw[3] = 0.5 * (3 * f2 - 2 * f);
}

// Tensor stencil of 4^n nodes around x with weights and weight gradients.
struct Stencil {
  std::vector<long> node;
  std::vector<double> w;
  std::vector<std::array<double, 3>> dw;
};

Stencil stencil(const DomainGrid& g, const Point& x) {
  const int n = g.dim();
  int base[3] = {0, 0, 0};
  double w1[3][4], dw1[3][4];
  for (int d = 0; d < n; ++d) {
    const double u = (x[d] - g.bounds(d).lo) / g.h(d) - 1;
    base[d] = int(std::floor(u));
    cr_weights(u - base[d], w1[d], dw1[d]);
    for (int k = 0; k < 4; ++k) dw1[d][k] /= g.h(d);
  }
  int total = 1;
  for (int d = 0; d < n; ++d) total *= 4;
  Stencil st;
  st.node.reserve(total);
  for (int code = 0; code < total; ++code) {
    std::array<int, 3> ij{0, 0, 0};
    int off[3] = {0, 0, 0}, c = code;
    for (int d = 0; d < n; ++d) {
      off[d] = c % 4;
      c /= 4;
      ij[d] = base[d] - 1 + off[d];
    }
    double w = 1;
    std::array<double, 3> dw{1, 1, 1};
    for (int d = 0; d < n; ++d) {
      w *= w1[d][off[d]];
      for (int e = 0; e < n; ++e) dw[e] *= (e == d ? dw1[d][off[d]] : w1[d][off[d]]);
    }
    const long j = g.node_at(ij);
    if (j < 0) throw ConfigError("interpolation stencil leaves the domain; move the point inward");
    st.node.push_back(j);
    st.w.push_back(w);
    st.dw.push_back(dw);
  }
  return st;
}

void require_full(const GreenCache& cache) {
  if (!cache.full()) throw ConfigError("reduced energy needs a full Green cache (grid too large)");
}

double h_entry(const GreenCache& cache, long i, long j) {
  if (i == j) {
    const double t = cache.tau()[i];
    if (!std::isfinite(t)) throw ConfigError("Robin value unavailable this close to the boundary");
    return t;
  }
  return regular_part(cache, std::size_t(i), std::size_t(j));
}

double regular_at(const GreenCache& cache, const Point& x, const Point& y, Eigen::VectorXd* grad_x) {
  const int n = cache.grid().dim();
  const Stencil sx = stencil(cache.grid(), x), sy = stencil(cache.grid(), y);
  double v = 0;
  if (grad_x) grad_x->setZero(n);
  for (std::size_t a = 0; a < sx.node.size(); ++a) {
    double row = 0;
    for (std::size_t b = 0; b < sy.node.size(); ++b) row += sy.w[b] * h_entry(cache, sx.node[a], sy.node[b]);
    v += sx.w[a] * row;
    if (grad_x)
      for (int d = 0; d < n; ++d) (*grad_x)[d] += sx.dw[a][d] * row;
  }
  return v;
}

}  // namespace

double robin_at(const GreenCache& cache, const Point& x, Eigen::VectorXd* grad) {
  require_full(cache);
  const int n = cache.grid().dim();
  const Stencil st = stencil(cache.grid(), x);
  double v = 0;
  if (grad) grad->setZero(n);
  for (std::size_t a = 0; a < st.node.size(); ++a) {
    const double t = cache.tau()[st.node[a]];
    if (!std::isfinite(t)) throw ConfigError("Robin value unavailable this close to the boundary");
    v += st.w[a] * t;
    if (grad)
      for (int d = 0; d < n; ++d) (*grad)[d] += st.dw[a][d] * t;
  }
  return v;
}

double green_at(const GreenCache& cache, const Point& x, const Point& y, Eigen::VectorXd* grad_x) {
  require_full(cache);
  const int n = cache.grid().dim();
  const double r = distance(x, y, n);
  if (!(r > 0)) throw ConfigError("green_at: points coincide");
  const double e = 2 * cache.s() - n;
  const double sing = cache.a() * std::pow(r, e);
  // H is symmetric, so interpolating in both arguments keeps G(x, y) = G(y, x)
  const double H = regular_at(cache, x, y, grad_x);
  if (grad_x) {
    for (int d = 0; d < n; ++d)
      (*grad_x)[d] = cache.a() * e * std::pow(r, e - 2) * (x[d] - y[d]) - (*grad_x)[d];
  }
  return sing - H;
}

namespace {

struct Terms {
  double value = 0;
  Eigen::VectorXd grad;
};

Terms evaluate(const GreenCache& cache, const ConstantSet& k, const ReducedConfig& c, ProblemKind kind,
               bool with_grad) {
  const DomainGrid& g = cache.grid();
  if (auto why = admissibility_violation(g, c); !why.empty()) throw ConfigError("inadmissible configuration: " + why);
  const int n = g.dim();
  const double s = cache.s();
  const double m = n - 2 * s;
  const double c1sq = k.c1 * k.c1;
  double c2 = 0, logc = 0;
  if (kind == ProblemKind::critical) {
    if (!k.c2) throw ConfigError("critical reduced energy needs n > 4s");
    c2 = *k.c2;
  } else {
    logc = k.c1 * m * m / (4.0 * n);
  }
  Terms out;
  if (with_grad) out.grad = Eigen::VectorXd::Zero(c.k * (n + 1));
  double block = 0;
  for (int i = 0; i < c.k; ++i) {
    const double li = c.lambdas[i];
    Eigen::VectorXd gt;
    const double t = robin_at(cache, c.sigmas[i], with_grad ? &gt : nullptr);
    block += t * std::pow(li, m);
    if (with_grad) {
      out.grad[i] += c1sq * t * m * std::pow(li, m - 1);
      for (int d = 0; d < n; ++d) out.grad[c.k + i * n + d] += c1sq * gt[d] * std::pow(li, m);
    }
    for (int h = 0; h < c.k; ++h) {
      if (h == i) continue;
      const double lh = c.lambdas[h];
      Eigen::VectorXd gg;
      const double G = green_at(cache, c.sigmas[i], c.sigmas[h], with_grad ? &gg : nullptr);
      const double pr = std::pow(li * lh, m / 2);
      block -= G * pr;
      if (with_grad) {
        // both (i, h) and (h, i) terms depend on lambda_i and sigma_i
        out.grad[i] -= 2 * c1sq * G * (m / 2) * pr / li;
        for (int d = 0; d < n; ++d) out.grad[c.k + i * n + d] -= 2 * c1sq * gg[d] * pr;
      }
    }
    if (kind == ProblemKind::critical) {
      out.value -= c2 * std::pow(li, 2 * s);
      if (with_grad) out.grad[i] -= c2 * 2 * s * std::pow(li, 2 * s - 1);
    } else {
      out.value -= logc * std::log(li);
      if (with_grad) out.grad[i] -= logc / li;
    }
  }
  out.value += c1sq * block;
  return out;
}

}  // namespace

double upsilon(const GreenCache& cache, const ConstantSet& k, const ReducedConfig& c, ProblemKind kind) {
  return evaluate(cache, k, c, kind, false).value;
}

Eigen::VectorXd upsilon_grad(const GreenCache& cache, const ConstantSet& k, const ReducedConfig& c,
                             ProblemKind kind) {
  return evaluate(cache, k, c, kind, true).grad;
}

double upsilon_scale(const GreenCache& cache, const ConstantSet& k, const ReducedConfig& c, ProblemKind kind) {
  const double s = cache.s();
  const int n = cache.grid().dim();
  const double m = n - 2 * s;
  double sc = 0;
  for (int i = 0; i < c.k; ++i) {
    sc += k.c1 * k.c1 * std::abs(robin_at(cache, c.sigmas[i])) * std::pow(c.lambdas[i], m);
    if (kind == ProblemKind::critical && k.c2)
      sc += *k.c2 * std::pow(c.lambdas[i], 2 * s);
    else
      sc += k.c1 * m * m / (4.0 * n);
  }
  return sc;
}

std::vector<double> pack(const ReducedConfig& c, int n) {
  std::vector<double> x(c.lambdas);
  for (const Point& p : c.sigmas)
    for (int d = 0; d < n; ++d) x.push_back(p[d]);
  return x;
}

ReducedConfig unpack(const ReducedConfig& like, const std::vector<double>& x, int n) {
  ReducedConfig c = like;
  if (x.size() != std::size_t(like.k * (n + 1))) throw ConfigError("unpack: wrong vector length");
  for (int i = 0; i < c.k; ++i) {
    c.lambdas[i] = x[i];
    for (int d = 0; d < n; ++d) c.sigmas[i][d] = x[c.k + i * n + d];
  }
  return c;
}

double lambda_star(const ConstantSet& k, double tau) {
  if (!k.c2) throw ConfigError("lambda_star needs n > 4s");
  const double m = k.n - 2 * k.s;
  return std::pow(2 * k.s * *k.c2 / (m * k.c1 * k.c1 * tau), 1 / (k.n - 4 * k.s));
}

namespace {

Eigen::MatrixXd fd_hessian(const GreenCache& cache, const ConstantSet& k, const ReducedConfig& c, ProblemKind kind) {
  const int n = cache.grid().dim();
  const std::vector<double> x = pack(c, n);
  const int m = int(x.size());
  Eigen::MatrixXd H(m, m);
  for (int j = 0; j < m; ++j) {
    const double step = j < c.k ? 1e-5 * x[j] : 1e-3 * cache.grid().h(0);
    auto xp = x, xm = x;
    xp[j] += step;
    xm[j] -= step;
    H.col(j) = (upsilon_grad(cache, k, unpack(c, xp, n), kind) - upsilon_grad(cache, k, unpack(c, xm, n), kind)) /
               (2 * step);
  }
  return 0.5 * (H + H.transpose());
}

}  // namespace

CriticalResult find_critical_config(const GreenCache& cache, const ConstantSet& k, const ReducedConfig& start,
                                    ProblemKind kind, const FinderOptions& opts) {
  const DomainGrid& g = cache.grid();
  const int n = g.dim();
  if (auto why = admissibility_violation(g, start); !why.empty())
    throw ConfigError("start configuration not admissible: " + why);
  ReducedConfig c = start;
  Eigen::VectorXd grad = upsilon_grad(cache, k, c, kind);
  double scale = upsilon_scale(cache, k, c, kind);
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (grad.norm() <= opts.grad_tol * scale) break;
    const Eigen::MatrixXd H = fd_hessian(cache, k, c, kind);
    Eigen::VectorXd dir = H.fullPivLu().solve(-grad);
    if (!dir.allFinite()) dir = -grad;
    // cap the step: lambdas by half their value, centers by a quarter of their room to the boundary
    double cap = 1;
    for (int i = 0; i < c.k; ++i) {
      cap = std::min(cap, 0.5 * c.lambdas[i] / std::max(std::abs(dir[i]), 1e-300));
      double ds = 0;
      for (int d = 0; d < n; ++d) ds += dir[c.k + i * n + d] * dir[c.k + i * n + d];
      const double room = std::max(c.delta0, distance_to_boundary(g, c.sigmas[i]) - c.delta0);
      if (ds > 0) cap = std::min(cap, 0.25 * room / std::sqrt(ds));
    }
    dir *= cap;
    const std::vector<double> x = pack(c, n);
    bool accepted = false, blocked = false;
    double t = 1;
    for (int h = 0; h < 40; ++h, t *= 0.5) {
      std::vector<double> xt = x;
      for (std::size_t j = 0; j < xt.size(); ++j) xt[j] += t * dir[j];
      ReducedConfig ct = unpack(c, xt, n);
      if (!admissibility_violation(g, ct).empty()) {
        blocked = true;
        continue;
      }
      Eigen::VectorXd gt;
      try {
        gt = upsilon_grad(cache, k, ct, kind);
      } catch (const ConfigError&) {
        blocked = true;
        continue;
      }
      if (gt.norm() < (1 - 1e-4 * t) * grad.norm()) {
        c = ct;
        grad = gt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (blocked) throw NumericalError("critical point search migrated out of O^{delta0}", grad.norm() / scale);
      throw NumericalError("critical point search stalled", grad.norm() / scale);
    }
    scale = upsilon_scale(cache, k, c, kind);
  }
  if (grad.norm() > opts.grad_tol * scale)
    throw NumericalError("critical point search did not converge", grad.norm() / scale);
  CriticalResult r;
  r.config = c;
  r.value = upsilon(cache, k, c, kind);
  r.grad_norm = grad.norm();
  r.scale = scale;
  r.iterations = it;
  r.hessian = fd_hessian(cache, k, c, kind);
  r.hessian_eigenvalues = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(r.hessian).eigenvalues();
  return r;
}

Mask dumbbell_mask(int k, double lobe, double neck, double h) {
  if (k < 1) throw ConfigError("dumbbell: need at least one lobe");
  if (!(h > 0)) throw ConfigError("dumbbell: h must be positive");
  const long L = std::lround(lobe / h), W = std::lround(neck / h);
  if (std::abs(L * h - lobe) > 1e-9 * lobe || std::abs(W * h - neck) > 1e-9 * std::max(neck, h))
    throw ConfigError("dumbbell: lobe and neck must be multiples of h");
  if (W < 2) throw ConfigError("dumbbell: neck narrower than 2h");
  if (W > L) throw ConfigError("dumbbell: neck wider than a lobe");
  if (L * (2 * k - 1) > 4096) throw ConfigError("dumbbell: raster too large");
  Mask m;
  m.rows = int(L);
  m.cols = int(L * (2 * k - 1));
  m.h = h;
  m.on.assign(std::size_t(m.rows) * m.cols, 0);
  const long r0 = (L - W) / 2;
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) {
      const bool in_lobe = (c / L) % 2 == 0;
      const bool in_neck = r >= r0 && r < r0 + W;
      if (in_lobe || in_neck) m.on[std::size_t(r) * m.cols + c] = 1;
    }
  return m;
}

}  // namespace fraclap
