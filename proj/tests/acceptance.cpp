// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fraclap/asymptotics.hpp"
#include "fraclap/bubbles.hpp"
#include "fraclap/constants.hpp"
#include "fraclap/error.hpp"
#include "fraclap/extension.hpp"
#include "fraclap/fractional.hpp"
#include "fraclap/greens.hpp"
#include "fraclap/reduced.hpp"
#include "fraclap/solver.hpp"

using namespace fraclap;

namespace {

using Clock = std::chrono::steady_clock;

// Collects sub-gates of one criterion.
struct Gate {
  bool ok = true;
  std::ostringstream detail;

  void check(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " FAILED(" << what << ")";
    }
  }
  template <class T>
  Gate& note(const std::string& key, const T& v) {
    detail << ' ' << key << '=' << v;
    return *this;
  }
};

int failures = 0;

void run(int id, const std::string& title, double limit_s, const std::function<void(Gate&)>& body) {
  Gate g;
  const auto t0 = Clock::now();
  try {
    body(g);
  } catch (const std::exception& e) {
    g.check(false, std::string("exception: ") + e.what());
  }
  const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
  g.check(dt < limit_s, "runtime");
  if (!g.ok) ++failures;
  std::printf("[%s] criterion %d: %s (%.1fs, limit %.0fs)%s\n", g.ok ? "PASS" : "FAIL", id, title.c_str(), dt,
              limit_s, g.detail.str().c_str());
  std::fflush(stdout);
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::abs(b); }

Vec random_field(std::size_t m, std::mt19937& gen) {
  std::uniform_real_distribution<double> d(-1, 1);
  Vec v(m);
  for (auto& x : v) x = d(gen);
  return v;
}

Point center_of(const DomainGrid& g) {
  Point c{0, 0, 0};
  for (int d = 0; d < g.dim(); ++d) c[d] = 0.5 * (g.bounds(d).lo + g.bounds(d).hi);
  return c;
}

double robin_center(const SpectralBasis& b, double s) {
  GreenOptions go;
  go.full_cap = 0;
  const GreenCache cache(b, s, go);
  return robin_function(cache, std::size_t(b.grid().nearest_node(center_of(b.grid()))));
}

// Shared state across criteria.
const double kSweepS = 0.2;
const std::vector<double> kSweepEps{0.2, 0.1, 0.05, 0.025};
std::optional<SweepTable> critical_table, subcritical_table;
std::vector<std::pair<SpectralBasis, SolveReport>> extra_reports;

SpectralBasis sweep_basis() { return build_box_basis({{-1, 1}}, 2.0 / 2048); }

// Location, Green-limit and rate gates shared by the two sweeps.
void sweep_gates(Gate& g, const SweepTable& t, const std::vector<double>& targets, bool need_cauchy) {
  bool all = true;
  double prev_green = INFINITY;
  bool green_decreasing = true;
  double final_green = NAN, worst_cells = 0;
  for (const auto& row : t.rows) {
    const bool ok = row.converged && row.resolved;
    g.detail << " [eps=" << row.epsilon;
    if (!ok) {
      g.detail << " unresolved]";
      all = false;
      continue;
    }
    g.detail << " N=" << row.grid_size << " x_cells=" << row.x_cells << " green=" << row.green_residual
             << " rate=" << (t.kind == ProblemKind::critical ? row.rate_critical : row.rate_subcritical) << ']';
    worst_cells = std::max(worst_cells, row.x_cells);
    green_decreasing = green_decreasing && row.green_residual < prev_green;
    prev_green = row.green_residual;
    final_green = row.green_residual;
  }
  g.check(all, "every eps resolved");
  g.check(worst_cells <= 2, "x_eps within 2 cells");
  g.check(green_decreasing, "green residual decreasing");
  g.check(final_green <= 0.10, "final green residual <= 0.10");
  const RateFit f = rate_fit(t, targets);
  g.note("limit", f.limit);
  for (std::size_t i = 0; i < f.ratios.size(); ++i) g.note("ratio" + std::to_string(i), f.ratios[i]);
  g.note("cauchy", f.cauchy).note("within", f.within);
  if (need_cauchy) g.check(f.cauchy, "rate product Cauchy-decreasing");
  g.check(f.within == 1, "limit within 30% of exactly one variant");
}

void criterion1(Gate& g) {
  struct Case {
    int n;
    double s;
  };
  double worst = 0;
  for (auto [n, s] : {Case{1, 0.2}, Case{2, 0.45}, Case{3, 0.75}}) {
    const ConstantSet k = closed_form_constants(n, s);
    const double c = k.c;
    const double c0 = std::pow(c, k.p + 1) * bubble_integral_oracle(n, s, n);
    const double c1 = std::pow(c, k.p) * bubble_integral_oracle(n, s, (n + 2 * s) / 2);
    worst = std::max({worst, rel_diff(k.c0, c0), rel_diff(k.c1, c1), rel_diff(k.b, c * c1)});
    if (2 * (n - 2 * s) > n) {
      g.check(k.c2.has_value(), "c2 defined for n > 4s");
      if (k.c2) worst = std::max(worst, rel_diff(*k.c2, c * c * bubble_integral_oracle(n, s, n - 2 * s)));
    } else {
      // int w^2 diverges when n <= 4s; both routes must agree that it does
      bool oracle_refuses = false;
      try {
        bubble_integral_oracle(n, s, n - 2 * s);
      } catch (const ConfigError&) {
        oracle_refuses = true;
      }
      g.check(!k.c2 && oracle_refuses, "c2 undefined for n <= 4s");
      g.note("c2(" + std::to_string(n) + ")", "undefined");
    }
    g.check(std::abs(k.D - (n - 2 * s + 2) * k.E) <= 1e-12 * std::abs(k.D), "D = (n-2s+2)E");
  }
  g.note("worst_rel", worst);
  g.check(worst <= 1e-8, "oracle agreement 1e-8");
  const ConstantSet h = closed_form_constants(2, 0.5);
  g.note("C_half", h.Cs).note("c_2_half", h.c);
  g.check(h.Cs == 1.0 && extension_constant(0.5) == 1.0, "C_{1/2} = 1");
  g.check(std::abs(h.c - 1.0) <= 1e-15, "c_{2,1/2} = 1");
}

void criterion2(Gate& g) {
  std::mt19937 gen(12345);
  double worst = 0;
  const std::vector<SpectralBasis> domains{build_box_basis({{-1, 1}}, 2.0 / 512),
                                           build_box_basis({{-1, 1}, {-1, 1}}, 2.0 / 48),
                                           build_box_basis({{0, 1}, {0, 1}, {0, 1}}, 1.0 / 16)};
  auto rel = [](const Vec& a, const Vec& b) { return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff(); };
  for (const auto& b : domains)
    for (int rep = 0; rep < 3; ++rep) {
      const Vec u = random_field(b.size(), gen), v = random_field(b.size(), gen);
      const double s1 = 0.3, s2 = 0.45;
      worst = std::max(worst, rel(apply_power(b, apply_power(b, u, s1), s2), apply_power(b, u, s1 + s2)));
      worst = std::max(worst, rel(apply_power(b, apply_power(b, u, s1), -s1), u));
      const double l = apply_power(b, u, s2).dot(v), r = u.dot(apply_power(b, v, s2));
      worst = std::max(worst, std::abs(l - r) / (apply_power(b, u, s2).norm() * v.norm()));
    }
  g.note("worst_rel", worst);
  g.check(worst <= 1e-10, "operator laws 1e-10");
}

void criterion3(Gate& g) {
  double analytic = 0, numerical = 0;
  for (const auto& b : {build_box_basis({{-1, 1}}, 2.0 / 512), build_box_basis({{-1, 1}, {-1, 1}}, 2.0 / 48)}) {
    const DomainGrid& grid = b.grid();
    Vec u(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Point x = grid.coord(i);
      double v = 1;
      for (int d = 0; d < grid.dim(); ++d) v *= (1 - x[d] * x[d]) * (1 - x[d] * x[d]);
      u[i] = v;
    }
    for (double s : {0.2, 0.5, 0.75}) {
      const FluxResidual f = flux_residual(b, u, s);
      analytic = std::max(analytic, f.analytic);
      numerical = std::max(numerical, f.numerical);
    }
  }
  double khalf = 0;
  for (double r : {1e-3, 0.1, 1.0, 5.0, 20.0}) {
    const double exact = std::sqrt(std::numbers::pi / (2 * r)) * std::exp(-r);
    khalf = std::max(khalf, rel_diff(bessel_k(0.5, r), exact));
  }
  g.note("analytic", analytic).note("numerical", numerical).note("K_half", khalf);
  g.check(analytic <= 1e-12, "analytic flux 1e-12");
  g.check(numerical <= 1e-3, "numerical flux 1e-3");
  g.check(khalf <= 1e-10, "K_{1/2} 1e-10");
}

void criterion4(Gate& g) {
  double sym = 0, grad = 0;
  bool positive = true, tau_positive = true;
  for (const auto& b : {build_box_basis({{-1, 1}}, 2.0 / 1024), build_box_basis({{-1, 1}, {-1, 1}}, 2.0 / 48)})
    for (double s : {0.2, 0.45}) {
      const GreenCache cache(b, s);
      const auto& G = cache.matrix();
      sym = std::max(sym, (G - G.transpose()).cwiseAbs().maxCoeff() / G.maxCoeff());
      positive = positive && G.minCoeff() > 0;
      for (Eigen::Index i = 0; i < cache.tau().size(); ++i)
        if (std::isfinite(cache.tau()[i])) tau_positive = tau_positive && cache.tau()[i] > 0;
      const std::size_t c = std::size_t(b.grid().nearest_node(center_of(b.grid())));
      const double scale = std::abs(robin_function(cache, c));
      grad = std::max(grad, robin_gradient(cache, c).cwiseAbs().maxCoeff() / scale);
    }
  g.note("symmetry", sym).note("grad_tau_over_scale", grad);
  g.check(sym <= 1e-9, "symmetry 1e-9");
  g.check(positive, "G > 0");
  g.check(tau_positive, "tau > 0");
  g.check(grad <= 1e-4, "grad tau(center) 1e-4 scale");

  // s close to 1: the column through the center, normalized at the source, approaches the Laplacian Green function
  const auto b = build_box_basis({{0, 1}}, 1.0 / 1024);
  const DomainGrid& grid = b.grid();
  for (double yv : {0.5, 0.25, 0.7}) {
    const std::size_t y = std::size_t(grid.nearest_node({yv, 0, 0}));
    const Vec col = green_column(b, y, 0.95);
    const double yy = grid.coord(y)[0];
    double dev = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double x = grid.coord(i)[0];
      const double t = std::min(x, yy) * (1 - std::max(x, yy)) / (yy * (1 - yy));
      dev = std::max(dev, std::abs(col[i] / col[y] - t));
    }
    if (yv == 0.5) {
      g.note("tent_dev", dev);
      g.check(dev <= 0.05, "tent agreement 5%");
    } else {
      g.note("tent_dev_y" + std::to_string(yv).substr(0, 4), dev);  // informational
    }
  }
}

void criterion5(Gate& g) {
  const double s = 0.2;
  const auto b = build_box_basis({{-1, 1}}, 2.0 / 1024);
  const GreenCache cache(b, s);
  const auto ex = projection_expansion_residual(cache, BubbleParams{1.0, {0, 0, 0}}, {0.2, 0.1, 0.05}, 1 / (1 - 2 * s));
  for (const auto& r : ex.rows)
    g.detail << " [eps=" << r.eps << " r=" << r.residual << " far_dev=" << r.far_ratio_dev << ']';
  g.check(ex.decreasing, "r(eps) strictly decreasing");
  g.check(ex.rows.back().far_ratio_dev <= 0.10, "far-field ratio within 10%");
}

void criterion6(Gate& g) {
  const auto b = sweep_basis();
  critical_table = epsilon_sweep(b, kSweepS, ProblemKind::critical, kSweepEps);
  const ConstantSet k = closed_form_constants(1, kSweepS);
  const double tau = robin_center(b, kSweepS);
  g.note("tau0", tau);
  sweep_gates(g, *critical_table, {*k.d_literal * tau, *k.d_corrected * tau}, true);
}

void criterion7(Gate& g) {
  const auto b = sweep_basis();
  subcritical_table = epsilon_sweep(b, kSweepS, ProblemKind::subcritical, kSweepEps);
  const ConstantSet k = closed_form_constants(1, kSweepS);
  const double tau = robin_center(b, kSweepS);
  g.note("tau0", tau);
  sweep_gates(g, *subcritical_table, {k.g_literal * tau, k.g_corrected * tau}, false);
}

void criterion8(Gate& g) {
  if (!critical_table) throw NumericalError("critical sweep unavailable");
  const auto& t = *critical_table;
  for (std::size_t i = 0; i < t.reports.size(); ++i) {
    if (t.reports[i].epsilon != 0.05) continue;
    const PohozaevResult p = pohozaev_residual(t.bases[i], t.reports[i]);
    g.note("N", t.bases[i].size()).note("gap", p.gap);
    g.check(p.gap <= 0.05, "Pohozaev gap 5%");
    return;
  }
  g.check(false, "no eps = 0.05 solution");
}

void criterion9(Gate& g) {
  const double s = 0.25;
  const auto sq = build_box_basis({{-1, 1}, {-1, 1}}, 2.0 / 48);
  const GreenCache cache(sq, s);
  const ConstantSet k = closed_form_constants(2, s);

  ReducedConfig c;
  c.k = 2;
  c.lambdas = {0.8, 1.3};
  c.sigmas = {Point{-0.41, 0.13, 0}, Point{0.37, -0.22, 0}};
  c.delta0 = 0.2;
  double fd_worst = 0;
  for (ProblemKind kind : {ProblemKind::critical, ProblemKind::subcritical}) {
    const Eigen::VectorXd an = upsilon_grad(cache, k, c, kind);
    const auto x = pack(c, 2);
    Eigen::VectorXd fd(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double step = 1e-6 * std::max(1.0, std::abs(x[j]));
      auto xp = x, xm = x;
      xp[j] += step;
      xm[j] -= step;
      fd[j] = (upsilon(cache, k, unpack(c, xp, 2), kind) - upsilon(cache, k, unpack(c, xm, 2), kind)) / (2 * step);
    }
    fd_worst = std::max(fd_worst, (an - fd).norm() / an.norm());
  }
  g.note("grad_fd_rel", fd_worst);
  g.check(fd_worst <= 1e-6, "upsilon_grad vs FD 1e-6");

  const double ls = lambda_star(k, robin_at(cache, {0, 0, 0}));
  ReducedConfig one;
  one.lambdas = {0.8 * ls};
  one.sigmas = {Point{0.15, -0.1, 0}};
  one.delta0 = 0.1;
  const CriticalResult r1 = find_critical_config(cache, k, one, ProblemKind::critical);
  const double lerr = std::abs(r1.config.lambdas[0] / ls - 1);
  g.note("lambda_star", ls).note("lambda_rel_err", lerr);
  g.check(lerr <= 1e-6, "k=1 finder matches lambda*");

  // two unit lobes joined by a neck along x: lobes are x < 1 and x > 2
  const Mask m = dumbbell_mask(2, 1.0, 0.25, 1.0 / 16);
  const SpectralBasis db = build_masked_basis(m);
  const GreenCache dcache(db, s);
  ReducedConfig two;
  two.k = 2;
  two.lambdas = {0.1, 0.1};
  two.sigmas = {Point{0.5, 0.5, 0}, Point{2.5, 0.5, 0}};
  two.delta0 = 0.05;
  two.alpha0 = 1.0;
  const CriticalResult r2 = find_critical_config(dcache, k, two, ProblemKind::critical);
  auto lobe = [](const Point& x) { return x[0] < 1 ? 0 : (x[0] > 2 ? 1 : -1); };
  const int l0 = lobe(r2.config.sigmas[0]), l1 = lobe(r2.config.sigmas[1]);
  const Eigen::VectorXd ev = r2.hessian_eigenvalues.cwiseAbs();
  g.note("sigma0_x", r2.config.sigmas[0][0]).note("sigma1_x", r2.config.sigmas[1][0]);
  g.note("hess_min", ev.minCoeff()).note("hess_max", ev.maxCoeff());
  g.check(l0 >= 0 && l1 >= 0 && l0 != l1, "finder centers in distinct lobes");
  g.check(ev.minCoeff() > 1e-8 * ev.maxCoeff(), "nonsingular Hessian");

  double eps_used = 0;
  const SolveReport mp = solve_multipeak(db, s, 1.0, r2.config, {}, &eps_used);
  const auto peaks = local_maxima(db.grid(), mp.u);
  std::vector<int> lobes;
  for (auto p : peaks) lobes.push_back(lobe(db.grid().coord(p)));
  g.note("multipeak_eps", eps_used).note("peaks", peaks.size());
  g.check(peaks.size() == 2 && lobes[0] >= 0 && lobes[1] >= 0 && lobes[0] != lobes[1], "peaks in distinct lobes");
  extra_reports.emplace_back(db, mp);
}

// Structural checks on a single solve; returns the largest identity defect.
void solve_invariants(Gate& g, const SpectralBasis& b, const SolveReport& r, double& worst_res, double& worst_id,
                      double& worst_b0) {
  const DomainGrid& grid = b.grid();
  const int n = grid.dim();
  const double p = critical_exponent(n, r.s);
  const double umax = r.u.maxCoeff();
  g.check(r.u.minCoeff() > 0, "positivity");
  worst_res = std::max(worst_res, r.residual / std::pow(umax, p));
  const double lhs = energy_form(b, r.u, r.s);
  double rhs;
  if (r.kind == ProblemKind::critical) {
    rhs = std::pow(lp_norm(grid, r.u, p + 1), p + 1) + r.epsilon * dot(grid, r.u, r.u);
  } else {
    const double q = p - r.epsilon + 1;
    rhs = std::pow(lp_norm(grid, r.u, q), q);
  }
  worst_id = std::max(worst_id, std::abs(lhs - rhs) / lhs);
  g.check(std::isfinite(r.bound_ratio), "bound_ratio finite");
  const double c = closed_form_constants(n, r.s).c;
  worst_b0 = std::max(worst_b0, std::abs(rescaled_profile(r, grid, {Point{0, 0, 0}})[0] - c));
}

void criterion10(Gate& g) {
  double worst_res = 0, worst_id = 0, worst_b0 = 0;
  int count = 0;
  for (const auto* t : {critical_table ? &*critical_table : nullptr, subcritical_table ? &*subcritical_table : nullptr}) {
    if (!t) {
      g.check(false, "sweep unavailable");
      continue;
    }
    double prev = INFINITY;
    bool trend = true;
    for (std::size_t i = 0; i < t->reports.size(); ++i) {
      solve_invariants(g, t->bases[i], t->reports[i], worst_res, worst_id, worst_b0);
      trend = trend && t->reports[i].bound_ratio <= prev * (1 + 1e-6);
      prev = t->reports[i].bound_ratio;
      ++count;
    }
    g.check(trend, std::string("bound_ratio non-increasing (") + to_string(t->kind) + ")");
  }
  for (const auto& [b, r] : extra_reports) {
    solve_invariants(g, b, r, worst_res, worst_id, worst_b0);
    ++count;
  }
  g.note("reports", count).note("residual_rel", worst_res).note("identity_rel", worst_id).note("b0_dev", worst_b0);
  g.check(count > 0, "reports available");
  g.check(worst_res <= 1e-9, "residual 1e-9 |u|^p");
  g.check(worst_id <= 1e-9, "identity 1e-9");
  g.check(worst_b0 <= 1e-12, "b_eps(0) = c");
}

}  // namespace

int main() {
  run(1, "closed-form constants", 5, criterion1);
  run(2, "operator laws", 5, criterion2);
  run(3, "extension flux", 10, criterion3);
  run(4, "Green structure", 60, criterion4);
  run(5, "projection expansion", 60, criterion5);
  run(6, "critical sweep", 600, criterion6);
  run(7, "subcritical sweep", 600, criterion7);
  run(8, "Pohozaev gap", 120, criterion8);
  run(9, "reduced energy", 300, criterion9);
  run(10, "solver invariants", 600, criterion10);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
