#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fraclap/basis.hpp"
#include "fraclap/constants.hpp"
#include "fraclap/solver.hpp"

namespace fraclap {

struct SweepRow {
  double epsilon = 0;
  double mu_eps = 0;
  Point x_eps{0, 0, 0};
  double x_cells = 0;          // |x_eps - center| in cells of the row's grid
  double rate_critical = 0;    // eps |u|_inf^{2(n-4s)/(n-2s)}
  double rate_subcritical = 0; // eps |u|_inf^2
  double green_residual = 0;
  double bound_ratio = 0;
  double b_dev = 0;            // max |b_eps - w_1| over |y| <= 5
  double energy = 0;
  double residual = 0;
  double cells_per_core = 0;
  std::size_t grid_size = 0;
  int newton_iterations = 0;
  int continuation_steps = 0;
  bool converged = false;
  bool resolved = false;
};

struct SweepTable {
  ProblemKind kind = ProblemKind::critical;
  int n = 1;
  double s = 0;
  std::vector<SweepRow> rows;
  // Converged rows keep their solution and the basis it lives on.
  std::vector<SolveReport> reports;
  std::vector<SpectralBasis> bases;
  std::vector<int> report_row;  // row index of each report
};

struct SweepOptions {
  SolveOptions solve;
  int max_refinements = 10;    // grid halvings allowed beyond the input basis
  std::size_t max_size = std::size_t(1) << 21;
  double refine_cells = 12;    // refine once the core spans fewer cells than this
  double step_cells = 10;      // continuation steps may not thin the core below this
  double green_radius = -1;    // default diam / 4
  int max_steps = 60;          // continuation steps per target
  std::function<void(const std::string&)> log;  // progress lines, optional
};

// Continuation in eps with grid sequencing on boxes (each refinement halves h).
// Targets that the finest admissible grid cannot represent are recorded as unconverged.
SweepTable epsilon_sweep(const SpectralBasis& basis, double s, ProblemKind kind, const std::vector<double>& eps,
                         const SweepOptions& opts = {});

// max_{|x - x_eps| > radius} | |u| u(x) - b G(x, x_eps) | / max |b G| over the same set.
double green_limit_residual(const SpectralBasis& basis, const SolveReport& report, const ConstantSet& k,
                            double radius);

struct RateFit {
  double limit = 0;
  std::vector<double> used_eps;
  bool cauchy = false;                 // successive differences shrink
  std::vector<double> targets;
  std::vector<double> ratios;          // limit / target
  int within = 0;                      // distinct target values with ratio in [1 - tol, 1 + tol]
};

// First-order Richardson extrapolation in eps through the last two resolved rows.
RateFit rate_fit(const SweepTable& table, const std::vector<double>& targets, double tol = 0.3);
RateFit rate_fit(const std::vector<double>& eps, const std::vector<double>& values,
                 const std::vector<double>& targets, double tol = 0.3);

// Prolongation onto a finer box grid over the same domain by zero-padding sine coefficients.
Vec prolong(const SpectralBasis& from, const Vec& u, const SpectralBasis& to);

}  // namespace fraclap
