#include "fraclap/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>
#include <unsupported/Eigen/IterativeSolvers>

#include "fraclap/bubbles.hpp"
#include "fraclap/error.hpp"
#include "fraclap/fractional.hpp"
#include "fraclap/reduced.hpp"

namespace fraclap {
class ShiftedOperator;
}

namespace Eigen::internal {
template <>
struct traits<fraclap::ShiftedOperator> : public traits<Eigen::SparseMatrix<double>> {};
}  // namespace Eigen::internal

namespace fraclap {

// y -> y - diag(d) A_s^{-1} y, the Jacobian right-preconditioned by A_s^{-1}.
class ShiftedOperator : public Eigen::EigenBase<ShiftedOperator> {
 public:
  using Scalar = double;
  using RealScalar = double;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

  ShiftedOperator(const NonlinearProblem& prob, const Vec& d) : prob_(prob), d_(d) {}
  Eigen::Index rows() const { return d_.size(); }
  Eigen::Index cols() const { return d_.size(); }

  template <typename Rhs>
  Eigen::Product<ShiftedOperator, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const {
    return Eigen::Product<ShiftedOperator, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
  }

  Vec apply(const Vec& y) const {
    ++calls;
    return y - d_.cwiseProduct(prob_.apply_inverse(y));
  }
  mutable int calls = 0;

 private:
  const NonlinearProblem& prob_;
  const Vec& d_;
};

}  // namespace fraclap

namespace Eigen::internal {
template <typename Rhs>
struct generic_product_impl<fraclap::ShiftedOperator, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<fraclap::ShiftedOperator, Rhs,
                                generic_product_impl<fraclap::ShiftedOperator, Rhs>> {
  using Scalar = typename Product<fraclap::ShiftedOperator, Rhs>::Scalar;
  template <typename Dest>
  static void scaleAndAddTo(Dest& dst, const fraclap::ShiftedOperator& lhs, const Rhs& rhs, const Scalar& alpha) {
    dst += alpha * lhs.apply(rhs);
  }
};
}  // namespace Eigen::internal

namespace fraclap {

ProblemKind parse_kind(const std::string& s) {
  if (s == "critical") return ProblemKind::critical;
  if (s == "subcritical") return ProblemKind::subcritical;
  throw ConfigError("unknown problem kind '" + s + "'");
}

void check_epsilon(const SpectralBasis& basis, double s, double eps, ProblemKind kind) {
  const int n = basis.grid().dim();
  const double p = critical_exponent(n, s);
  if (kind == ProblemKind::critical) {
    if (!(n > 4 * s)) throw ConfigError("critical problem needs n > 4s");
    const double lim = std::pow(basis.eigenvalues()[0], s);
    if (!(eps > 0 && eps < lim))
      throw ConfigError("critical problem needs 0 < eps < lambda_1^s = " + std::to_string(lim));
  } else {
    if (!(eps > 0 && eps < p - 1)) throw ConfigError("subcritical problem needs 0 < eps < p - 1");
  }
}

NonlinearProblem::NonlinearProblem(const SpectralBasis& basis, double s, ProblemKind kind, SolveOptions opts)
    : basis_(basis), s_(s), p_(critical_exponent(basis.grid().dim(), s)), kind_(kind), opts_(opts) {
  plus_s_ = basis.multiplier(s);
  minus_s_ = basis.multiplier(-s);
  k_ = closed_form_constants(basis.grid().dim(), s);
  const std::size_t m = basis.size();
  if (m <= opts.dense_limit) {
    dense_.resize(m, m);
    for (std::size_t j = 0; j < m; ++j) {
      Vec e = Vec::Zero(m);
      e[j] = 1.0;
      dense_.col(j) = apply_As(e);
    }
  }
}

double NonlinearProblem::exponent(double eps) const {
  return kind_ == ProblemKind::critical ? p_ : p_ - eps;
}

Vec NonlinearProblem::nonlinearity(const Vec& u, double eps) const {
  const double q = exponent(eps);
  Vec f = u.cwiseMax(0.0).array().pow(q).matrix();
  if (kind_ == ProblemKind::critical) f += eps * u;
  return f;
}

Vec NonlinearProblem::derivative(const Vec& u, double eps) const {
  const double q = exponent(eps);
  Vec d = q * u.cwiseMax(0.0).array().pow(q - 1).matrix();
  if (kind_ == ProblemKind::critical) d.array() += eps;
  return d;
}

Vec NonlinearProblem::residual(const Vec& u, double eps) const { return apply_As(u) - nonlinearity(u, eps); }

double NonlinearProblem::energy(const Vec& u, double eps) const {
  const double w = basis_.grid().weight();
  const double q = exponent(eps);
  double F = u.cwiseMax(0.0).array().pow(q + 1).sum() / (q + 1);
  if (kind_ == ProblemKind::critical) F += 0.5 * eps * u.squaredNorm();
  return 0.5 * energy_form(basis_, u, s_) - w * F;
}

Eigen::VectorXd NonlinearProblem::linear_solve(const Vec& dfu, const Vec& rhs, int* krylov, double forcing) const {
  if (dense_.size() > 0) {
    Eigen::MatrixXd J = dense_;
    J.diagonal() -= dfu;
    return J.partialPivLu().solve(rhs);
  }
  ShiftedOperator op(*this, dfu);
  Eigen::GMRES<ShiftedOperator, Eigen::IdentityPreconditioner> gmres;
  gmres.compute(op);
  gmres.set_restart(opts_.gmres_restart);
  gmres.setMaxIterations(opts_.gmres_max);
  gmres.setTolerance(std::max(opts_.gmres_tol, forcing));
  Vec y = gmres.solve(rhs);
  if (krylov) *krylov += int(gmres.iterations());
  return apply_inverse(y);
}

Vec NonlinearProblem::newton(Vec u, double eps, NewtonStats* stats) const {
  NewtonStats local;
  NewtonStats& st = stats ? *stats : local;
  Vec F = residual(u, eps);
  double r = F.cwiseAbs().maxCoeff();
  double last_gain = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int it = 0; it < opts_.max_newton; ++it) {
    const double scale = std::pow(u.cwiseAbs().maxCoeff(), p_);
    if (!(scale > 0) || !std::isfinite(r)) break;
    if (r <= opts_.polish_tol * scale) return u;
    if (r <= opts_.residual_tol * scale && last_gain < 2) return u;
    // inexact Newton: loose Krylov solves while far from the root
    // no tighter than needed to reach polish_tol in this step
    const double forcing = std::max(std::min(1e-3, 0.1 * r / scale), 0.1 * opts_.polish_tol * scale / r);
    Vec d = linear_solve(derivative(u, eps), -F, &st.krylov, forcing);
    ++st.iterations;
    double t = 1;
    bool accepted = false;
    Vec un, Fn;
    double rn = 0;
    for (int k = 0; k <= opts_.max_halvings; ++k, t *= 0.5) {
      un = u + t * d;
      Fn = residual(un, eps);
      rn = Fn.cwiseAbs().maxCoeff();
      if (rn <= (1 - 1e-4 * t) * r) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (r <= opts_.residual_tol * scale) return u;
      throw NumericalError("Newton line search failed", r / scale);
    }
    last_gain = r / rn;
    stalled = t < 1.0 / 64 ? stalled + 1 : 0;
    if (stalled >= 4 && !(rn <= opts_.residual_tol * scale)) throw NumericalError("Newton stagnated", rn / scale);
    if (opts_.trace) {
      std::ostringstream os;
      os << "  newton " << st.iterations << " res=" << rn / scale << " t=" << t << " krylov=" << st.krylov;
      opts_.trace(os.str());
    }
    u = std::move(un);
    F = std::move(Fn);
    r = rn;
  }
  const double scale = std::pow(u.cwiseAbs().maxCoeff(), p_);
  if (scale > 0 && r <= opts_.residual_tol * scale) return u;
  throw NumericalError("Newton did not converge", scale > 0 ? r / scale : r);
}

double NonlinearProblem::quotient(const Vec& v, double eps) const {
  const double w = basis_.grid().weight();
  const double rr = exponent(eps) + 1;
  double num = energy_form(basis_, v, s_);
  if (kind_ == ProblemKind::critical) num -= eps * w * v.squaredNorm();
  const double S = w * v.cwiseAbs().array().pow(rr).sum();
  return num / std::pow(S, 2 / rr);
}

Vec NonlinearProblem::minimize_quotient(Vec v, double eps, double* quotient_out, int* iterations) const {
  const DomainGrid& g = basis_.grid();
  const double w = g.weight();
  const double rr = exponent(eps) + 1;
  const bool crit = kind_ == ProblemKind::critical;
  auto normalize = [&](Vec x) { return Vec(x.cwiseAbs() / lp_norm(g, x, rr)); };
  v = normalize(v);
  double J = quotient(v, eps);
  double alpha = 1.0;
  int it = 0;
  for (; it < opts_.stage1_max; ++it) {
    const Vec Av = apply_As(v);
    const double S = w * v.cwiseAbs().array().pow(rr).sum();
    const double den = std::pow(S, 2 / rr);
    Vec grad = 2 * Av;
    if (crit) grad -= 2 * eps * v;
    grad -= J * 2 * std::pow(S, 2 / rr - 1) * v.cwiseAbs().array().pow(rr - 2).cwiseProduct(v.array()).matrix();
    grad /= den;
    const Vec d = -apply_inverse(grad);
    const double slope = w * grad.dot(d);
    if (!(slope < 0)) break;
    bool accepted = false;
    double Jn = J;
    Vec vn;
    for (int k = 0; k < 40; ++k, alpha *= 0.5) {
      vn = normalize(v + alpha * d);
      Jn = quotient(vn, eps);
      if (Jn <= J + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double drop = J - Jn;
    v = std::move(vn);
    J = Jn;
    alpha = std::min(alpha * 2, 4.0);
    if (drop < opts_.stage1_tol * std::abs(J)) {
      ++it;
      break;
    }
  }
  if (quotient_out) *quotient_out = J;
  if (iterations) *iterations = it;
  return v;
}

SolveReport NonlinearProblem::report(const Vec& u, double eps, const NewtonStats& st, int stage1) const {
  SolveReport r;
  r.kind = kind_;
  r.epsilon = eps;
  r.s = s_;
  r.u = u;
  r.energy = energy(u, eps);
  r.residual = residual(u, eps).cwiseAbs().maxCoeff();
  r.stage1_iterations = stage1;
  r.newton_iterations = st.iterations;
  r.krylov_iterations = st.krylov;
  blowup_diagnostics(r, basis_.grid(), k_, opts_.min_cells);
  return r;
}

namespace {
Point domain_center(const DomainGrid& g) {
  Point c{0, 0, 0};
  if (g.kind() == DomainGrid::Kind::box) {
    for (int d = 0; d < g.dim(); ++d) c[d] = 0.5 * (g.bounds(d).lo + g.bounds(d).hi);
    return c;
  }
  for (std::size_t i = 0; i < g.size(); ++i)
    for (int d = 0; d < g.dim(); ++d) c[d] += g.coord(i)[d] / g.size();
  return g.coord(g.nearest_node(c) >= 0 ? g.nearest_node(c) : 0);
}

void require_positive(const Vec& u) {
  if (!(u.minCoeff() > 0)) throw NumericalError("computed solution is not positive", u.minCoeff());
}
}  // namespace

SolveReport solve_least_energy(const SpectralBasis& basis, double s, double eps, ProblemKind kind,
                               const SolveOptions& opts) {
  check_epsilon(basis, s, eps, kind);
  NonlinearProblem prob(basis, s, kind, opts);
  const DomainGrid& g = basis.grid();
  const Point center = domain_center(g);

  // stage 1a: best centered bubble scale by golden-section search in log(lambda)
  auto q_of = [&](double loglam) {
    BubbleParams b{std::exp(loglam), center};
    return prob.quotient(bubble_on_grid(b, g, s), eps);
  };
  double lo = std::log(2 * g.h(0)), hi = std::log(0.5 * g.diameter());
  const double phi = 0.5 * (std::sqrt(5.0) - 1);
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = q_of(x1), f2 = q_of(x2);
  for (int i = 0; i < 40; ++i) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = q_of(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = q_of(x2);
    }
  }
  Vec v = bubble_on_grid(BubbleParams{std::exp(0.5 * (lo + hi)), center}, g, s);

  // stage 1b: descent on the sphere
  double J = 0;
  int it1 = 0;
  v = prob.minimize_quotient(v, eps, &J, &it1);
  if (!(J > 0)) throw NumericalError("quotient minimization produced a nonpositive value", J);

  // stage 2: A_s v - eps v = J v^{q} on |v|_{q+1} = 1, so u = J^{1/(q-1)} v solves the equation
  const double q = prob.exponent(eps);
  Vec u = std::pow(J, 1 / (q - 1)) * v;

  // stage 3
  NonlinearProblem::NewtonStats st;
  u = prob.newton(u, eps, &st);
  require_positive(u);
  return prob.report(u, eps, st, it1);
}

SolveReport solve_from(const SpectralBasis& basis, double s, double eps, ProblemKind kind, const Vec& u0,
                       const SolveOptions& opts) {
  check_epsilon(basis, s, eps, kind);
  if (std::size_t(u0.size()) != basis.size()) throw ConfigError("initial guess does not match the grid");
  NonlinearProblem prob(basis, s, kind, opts);
  NonlinearProblem::NewtonStats st;
  Vec u = prob.newton(u0, eps, &st);
  require_positive(u);
  return prob.report(u, eps, st);
}

SolveReport solve_multipeak(const SpectralBasis& basis, double s, double eps, const ReducedConfig& init,
                            const SolveOptions& opts, double* eps_used) {
  const DomainGrid& g = basis.grid();
  if (auto why = admissibility_violation(g, init); !why.empty())
    throw ConfigError("multipeak: configuration not admissible: " + why);
  NonlinearProblem prob(basis, s, ProblemKind::critical, opts);
  std::string last;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    const double e = eps / std::pow(2.0, attempt);
    check_epsilon(basis, s, e, ProblemKind::critical);
    Vec u = Vec::Zero(g.size());
    for (int i = 0; i < init.k; ++i) {
      BubbleParams b{init.lambdas[i] * std::pow(e, init.alpha0), init.sigmas[i]};
      u += project_bubble(basis, b, s).Pw;
    }
    NonlinearProblem::NewtonStats st;
    try {
      u = prob.newton(u, e, &st);
    } catch (const NumericalError& err) {
      last = err.what();
      continue;
    }
    require_positive(u);
    auto peaks = local_maxima(g, u);
    if (int(peaks.size()) != init.k) throw NumericalError("merged peaks: found " + std::to_string(peaks.size()));
    // each maximum must be closest to a different center
    std::vector<bool> used(init.k, false);
    for (std::size_t pk : peaks) {
      int best = 0;
      for (int i = 1; i < init.k; ++i)
        if (distance(g.coord(pk), init.sigmas[i], g.dim()) < distance(g.coord(pk), init.sigmas[best], g.dim()))
          best = i;
      if (used[best]) throw NumericalError("merged peaks: two maxima share a center");
      used[best] = true;
    }
    if (eps_used) *eps_used = e;
    return prob.report(u, e, st);
  }
  throw NumericalError("multipeak Newton failed after halving eps three times: " + last);
}

double rescale_exponent(const SolveReport& report, int n) {
  const double s = report.s;
  const double p = critical_exponent(n, s);
  const double q = report.kind == ProblemKind::critical ? p : p - report.epsilon;
  return (q - 1) / (2 * s);
}

void blowup_diagnostics(SolveReport& r, const DomainGrid& g, const ConstantSet& k, double min_cells) {
  const int n = g.dim();
  Eigen::Index imax = 0;
  const double umax = r.u.maxCoeff(&imax);
  r.mu_eps = umax / k.c;
  r.x_node = long(imax);
  r.x_eps = g.coord(imax);
  const double e = rescale_exponent(r, n);
  const double scale = std::pow(r.mu_eps, e);
  r.core_width = 1.0 / scale;
  r.cells_per_core = r.core_width / g.h(0);
  r.resolved = r.cells_per_core >= min_cells;
  BubbleParams unit{1.0, {0, 0, 0}};
  double ratio = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    Point y{0, 0, 0};
    const Point x = g.coord(i);
    for (int d = 0; d < n; ++d) y[d] = (x[d] - r.x_eps[d]) * scale;
    ratio = std::max(ratio, r.u[i] / (r.mu_eps * bubble_value(unit, y, n, r.s)));
  }
  r.bound_ratio = ratio;
}

double interpolate(const DomainGrid& g, const Vec& u, const Point& x) {
  const int n = g.dim();
  std::array<int, 3> base{0, 0, 0};
  double frac[3] = {0, 0, 0};
  for (int d = 0; d < n; ++d) {
    const double xi = (x[d] - g.bounds(d).lo) / g.h(d) - 1;
    if (xi < -1 || xi > g.extent(d)) return 0.0;
    base[d] = int(std::floor(xi));
    frac[d] = xi - base[d];
  }
  double sum = 0;
  for (int corner = 0; corner < (1 << n); ++corner) {
    auto ij = base;
    double wgt = 1;
    for (int d = 0; d < n; ++d) {
      const int bit = (corner >> d) & 1;
      ij[d] += bit;
      wgt *= bit ? frac[d] : 1 - frac[d];
    }
    if (wgt == 0) continue;
    const long j = g.node_at(ij);
    if (j >= 0) sum += wgt * u[j];
  }
  return sum;
}

std::vector<double> rescaled_profile(const SolveReport& r, const DomainGrid& g, const std::vector<Point>& ys) {
  const int n = g.dim();
  const double inv = std::pow(r.mu_eps, -rescale_exponent(r, n));
  std::vector<double> out;
  out.reserve(ys.size());
  for (const Point& y : ys) {
    Point x{0, 0, 0};
    for (int d = 0; d < n; ++d) x[d] = r.x_eps[d] + inv * y[d];
    out.push_back(interpolate(g, r.u, x) / r.mu_eps);
  }
  return out;
}

std::vector<std::size_t> local_maxima(const DomainGrid& g, const Vec& u, double rel) {
  const int n = g.dim();
  const double thresh = rel * u.maxCoeff();
  std::vector<std::size_t> out;
  int total = 1;
  for (int d = 0; d < n; ++d) total *= 3;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (u[i] < thresh) continue;
    bool is_max = true;
    for (int code = 0; code < total && is_max; ++code) {
      auto ij = g.lattice(i);
      int c = code;
      bool self = true;
      for (int d = 0; d < n; ++d) {
        const int off = c % 3 - 1;
        c /= 3;
        ij[d] += off;
        if (off) self = false;
      }
      if (self) continue;
      const long j = g.node_at(ij);
      if (j >= 0 && u[j] >= u[i]) is_max = false;
    }
    if (is_max) out.push_back(i);
  }
  return out;
}

}  // namespace fraclap
