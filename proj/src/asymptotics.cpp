#include "fraclap/asymptotics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "fraclap/bubbles.hpp"
#include "fraclap/error.hpp"
#include "fraclap/greens.hpp"

namespace fraclap {

Vec prolong(const SpectralBasis& from, const Vec& u, const SpectralBasis& to) {
  const DomainGrid& gf = from.grid();
  const DomainGrid& gt = to.grid();
  const int n = gf.dim();
  if (gf.kind() != DomainGrid::Kind::box || gt.kind() != DomainGrid::Kind::box || gt.dim() != n)
    throw ConfigError("prolong: box grids of equal dimension required");
  for (int d = 0; d < n; ++d) {
    const double L1 = gf.bounds(d).hi - gf.bounds(d).lo, L2 = gt.bounds(d).hi - gt.bounds(d).lo;
    if (std::abs(gf.bounds(d).lo - gt.bounds(d).lo) > 1e-12 * L1 || std::abs(L1 - L2) > 1e-12 * L1 ||
        gt.extent(d) < gf.extent(d))
      throw ConfigError("prolong: target must be a finer grid on the same box");
  }
  // coefficients are with respect to sqrt(2/L) sin(k pi (x - lo) / L) on both grids
  const Vec a = from.analyze_raw(u);
  Vec b = Vec::Zero(gt.size());
  for (std::size_t i = 0; i < gf.size(); ++i) b[gt.node_at(gf.lattice(i))] = a[i];
  return to.synthesize_raw(b);
}

double green_limit_residual(const SpectralBasis& basis, const SolveReport& r, const ConstantSet& k, double radius) {
  const DomainGrid& g = basis.grid();
  if (r.x_node < 0 || std::size_t(r.u.size()) != g.size()) throw ConfigError("green residual: report does not match grid");
  const Vec G = green_column(basis, std::size_t(r.x_node), r.s);
  const double umax = r.u.maxCoeff();
  double num = 0, den = 0;
  bool any = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(distance(g.coord(i), r.x_eps, g.dim()) > radius)) continue;
    any = true;
    const double bg = k.b * G[i];
    num = std::max(num, std::abs(umax * r.u[i] - bg));
    den = std::max(den, std::abs(bg));
  }
  if (!any) throw ConfigError("green residual: no nodes outside the exclusion radius");
  return num / den;
}

namespace {

// Exponent of mu in eps: mu ~ eps^{expo}.
double mu_exponent(int n, double s, ProblemKind kind) {
  return kind == ProblemKind::critical ? -(n - 2 * s) / (2 * (n - 4 * s)) : -0.5;
}

// Rescales the current solution by the amplitude factor k_eff about its peak.
Vec predict(const DomainGrid& g, const SolveReport& cur, double k_eff, int n) {
  const double stretch = std::pow(k_eff, rescale_exponent(cur, n));
  Vec u(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    Point x = g.coord(i);
    for (int d = 0; d < n; ++d) x[d] = cur.x_eps[d] + (x[d] - cur.x_eps[d]) * stretch;
    u[i] = k_eff * interpolate(g, cur.u, x);
  }
  return u;
}

Point center_of(const DomainGrid& g) {
  Point c{0, 0, 0};
  for (int d = 0; d < g.dim(); ++d) c[d] = 0.5 * (g.bounds(d).lo + g.bounds(d).hi);
  return c;
}

}  // namespace

SweepTable epsilon_sweep(const SpectralBasis& basis0, double s, ProblemKind kind, const std::vector<double>& eps,
                         const SweepOptions& opts) {
  if (eps.empty()) throw ConfigError("sweep: empty eps list");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0)) throw ConfigError("sweep: eps values must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw ConfigError("sweep: eps list must be strictly decreasing");
    check_epsilon(basis0, s, eps[i], kind);
  }
  const DomainGrid& g0 = basis0.grid();
  const int n = g0.dim();
  const bool refinable = g0.kind() == DomainGrid::Kind::box;
  std::vector<Interval> bounds;
  for (int d = 0; d < n; ++d) bounds.push_back(g0.bounds(d));
  const ConstantSet k = closed_form_constants(n, s);
  const double radius = opts.green_radius > 0 ? opts.green_radius : 0.25 * g0.diameter();
  const double expo = mu_exponent(n, s, kind);

  const auto t0 = std::chrono::steady_clock::now();
  auto note = [&](const SolveReport& r, const char* what) {
    if (!opts.log) return;
    std::ostringstream os;
    os << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << "s " << what << " eps=" << r.epsilon << " size=" << r.u.size() << " umax=" << r.u.maxCoeff()
       << " cells=" << r.cells_per_core << " newton=" << r.newton_iterations << " krylov=" << r.krylov_iterations;
    opts.log(os.str());
  };

  SweepTable table;
  table.kind = kind;
  table.n = n;
  table.s = s;

  SpectralBasis basis = basis0;
  int level = 0;
  auto remaining_refinements = [&] {
    int r = 0;
    while (refinable && level + r < opts.max_refinements) {
      std::size_t next = 1;
      for (int d = 0; d < n; ++d) next *= (std::size_t(basis.grid().extent(d) + 1) << (r + 1)) - 1;
      if (next > opts.max_size) break;
      ++r;
    }
    return r;
  };
  auto refine = [&](SolveReport& cur) {
    SpectralBasis fine = build_box_basis(bounds, basis.grid().h(0) / 2);
    Vec u = prolong(basis, cur.u, fine);
    cur = solve_from(fine, s, cur.epsilon, kind, u, opts.solve);
    basis = fine;
    ++level;
    note(cur, "refine");
  };
  auto refine_while_coarse = [&](SolveReport& cur) {
    while (cur.cells_per_core < opts.refine_cells && remaining_refinements() > 0) refine(cur);
  };

  SolveReport cur = solve_least_energy(basis, s, eps[0], kind, opts.solve);
  note(cur, "start");
  int newton_total = cur.newton_iterations;
  refine_while_coarse(cur);

  // Observed slope of log umax against log eps; the asymptotic exponent is only reached slowly.
  double last_le = std::log(cur.epsilon), last_lu = std::log(cur.u.maxCoeff());
  double slope = std::nan("");
  auto accept = [&] {
    const double le = std::log(cur.epsilon), lu = std::log(cur.u.maxCoeff());
    if (le < last_le - 1e-3) slope = std::clamp((lu - last_lu) / (le - last_le), expo, 0.3 * expo);
    last_le = le;
    last_lu = lu;
  };
  auto amplitude = [&](double e_next) {
    const double ratio = e_next / cur.epsilon;
    if (std::isnan(slope)) return 0.5 * std::pow(ratio, expo) + 0.5;
    return std::pow(ratio, slope);
  };

  bool alive = true;
  for (std::size_t r = 0; r < eps.size(); ++r) {
    SweepRow row;
    row.epsilon = eps[r];
    int steps = 0;
    if (alive && r > 0) {
      double dlog = std::log(0.7);
      while (cur.epsilon > eps[r]) {
        double e_next = std::max(eps[r], cur.epsilon * std::exp(dlog));
        if (e_next < eps[r] * (1 + 1e-12)) e_next = eps[r];
        const double k_eff = amplitude(e_next);
        const double width_ratio = std::pow(k_eff, -rescale_exponent(cur, n));
        const double cells_here = cur.cells_per_core * width_ratio;
        const double cells_target = cur.cells_per_core * std::pow(amplitude(eps[r]), -rescale_exponent(cur, n));
        if (cells_target * std::pow(2.0, remaining_refinements()) < opts.solve.min_cells) {
          alive = false;  // no admissible grid resolves the target
          break;
        }
        if (cells_here < opts.step_cells && remaining_refinements() > 0) {
          try {
            refine(cur);
          } catch (const NumericalError& e) {
            if (opts.log) opts.log(std::string("refine failed: ") + e.what());
            alive = false;
            break;
          }
          continue;
        }
        try {
          SolveReport next = solve_from(basis, s, e_next, kind, predict(basis.grid(), cur, k_eff, n), opts.solve);
          cur = std::move(next);
          note(cur, "step");
          refine_while_coarse(cur);
          accept();
          newton_total += cur.newton_iterations;
          dlog = std::max(dlog * 1.5, std::log(0.5));
        } catch (const NumericalError& e) {
          if (opts.log) opts.log(std::string("step rejected: ") + e.what());
          dlog *= 0.5;
          if (std::abs(dlog) < 1e-4) {
            alive = false;
            break;
          }
        }
        if (++steps > opts.max_steps) {
          alive = false;
          break;
        }
      }
    }
    row.continuation_steps = steps;
    if (alive && cur.epsilon == eps[r]) {
      const DomainGrid& g = basis.grid();
      const double umax = cur.u.maxCoeff();
      row.converged = true;
      row.mu_eps = cur.mu_eps;
      row.x_eps = cur.x_eps;
      row.x_cells = distance(cur.x_eps, center_of(g), n) / g.h(0);
      row.rate_critical = eps[r] * std::pow(umax, 2 * (n - 4 * s) / (n - 2 * s));
      row.rate_subcritical = eps[r] * umax * umax;
      row.green_residual = green_limit_residual(basis, cur, k, radius);
      row.bound_ratio = cur.bound_ratio;
      row.energy = cur.energy;
      row.residual = cur.residual;
      row.cells_per_core = cur.cells_per_core;
      row.grid_size = g.size();
      row.newton_iterations = newton_total;
      row.resolved = cur.resolved;
      std::vector<Point> ys;
      for (int d = 0; d < n; ++d)
        for (int j = -100; j <= 100; ++j) {
          Point y{0, 0, 0};
          y[d] = 0.05 * j;
          ys.push_back(y);
        }
      const auto b = rescaled_profile(cur, g, ys);
      const BubbleParams unit{1.0, {0, 0, 0}};
      for (std::size_t j = 0; j < ys.size(); ++j)
        row.b_dev = std::max(row.b_dev, std::abs(b[j] - bubble_value(unit, ys[j], n, s)));
      table.reports.push_back(cur);
      table.bases.push_back(basis);
      table.report_row.push_back(int(r));
    } else {
      alive = false;
    }
    newton_total = 0;
    table.rows.push_back(row);
  }
  bool any = false;
  for (const auto& row : table.rows) any = any || (row.converged && row.resolved);
  if (!any) throw NumericalError("sweep: every row is under-resolved; use a finer grid");
  return table;
}

RateFit rate_fit(const std::vector<double>& eps, const std::vector<double>& v, const std::vector<double>& targets,
                 double tol) {
  if (eps.size() != v.size()) throw ConfigError("rate_fit: length mismatch");
  if (eps.size() < 3) throw NumericalError("rate_fit: need at least three resolved rows");
  RateFit f;
  f.used_eps = eps;
  const std::size_t m = eps.size();
  const double e1 = eps[m - 2], e2 = eps[m - 1];
  f.limit = (e1 * v[m - 1] - e2 * v[m - 2]) / (e1 - e2);
  f.cauchy = true;
  for (std::size_t i = 2; i < m; ++i)
    if (!(std::abs(v[i] - v[i - 1]) < std::abs(v[i - 1] - v[i - 2]))) f.cauchy = false;
  std::vector<double> counted;
  for (double t : targets) {
    f.targets.push_back(t);
    const double ratio = f.limit / t;
    f.ratios.push_back(ratio);
    if (std::abs(ratio - 1) <= tol) {
      bool seen = false;
      for (double c : counted) seen = seen || std::abs(c - t) <= 1e-12 * std::abs(t);
      if (!seen) {
        counted.push_back(t);
        ++f.within;
      }
    }
  }
  return f;
}

RateFit rate_fit(const SweepTable& table, const std::vector<double>& targets, double tol) {
  std::vector<double> e, v;
  for (const auto& row : table.rows) {
    if (!(row.converged && row.resolved)) continue;
    e.push_back(row.epsilon);
    v.push_back(table.kind == ProblemKind::critical ? row.rate_critical : row.rate_subcritical);
  }
  return rate_fit(e, v, targets, tol);
}

}  // namespace fraclap
