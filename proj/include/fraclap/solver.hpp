#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fraclap/basis.hpp"
#include "fraclap/constants.hpp"
#include "fraclap/report.hpp"

namespace fraclap {

struct ReducedConfig;

struct SolveOptions {
  double residual_tol = 1e-9;   // required |F|_inf / |u|_inf^p
  double polish_tol = 1e-13;    // keep iterating toward this while it still helps
  int max_newton = 60;
  int max_halvings = 30;
  std::size_t dense_limit = 1500;
  int gmres_restart = 30;
  int gmres_max = 600;
  double gmres_tol = 1e-11;
  int stage1_max = 300;
  double stage1_tol = 1e-10;
  double min_cells = 6;         // resolution guard across the core width
  std::function<void(const std::string&)> trace;  // per-iteration Newton log
};

// Operators of A_s u = f_eps(u) on a fixed basis, reused across Newton solves.
class NonlinearProblem {
 public:
  NonlinearProblem(const SpectralBasis& basis, double s, ProblemKind kind, SolveOptions opts = {});

  const SpectralBasis& basis() const { return basis_; }
  double s() const { return s_; }
  double p() const { return p_; }
  ProblemKind kind() const { return kind_; }
  const SolveOptions& options() const { return opts_; }

  double exponent(double eps) const;  // p (critical) or p - eps
  Vec nonlinearity(const Vec& u, double eps) const;
  Vec derivative(const Vec& u, double eps) const;
  Vec residual(const Vec& u, double eps) const;
  Vec apply_As(const Vec& u) const { return basis_.apply_multiplier(u, plus_s_); }
  Vec apply_inverse(const Vec& u) const { return basis_.apply_multiplier(u, minus_s_); }
  double energy(const Vec& u, double eps) const;

  // Damped Newton from u0; throws NumericalError on failure.
  struct NewtonStats {
    int iterations = 0;
    int krylov = 0;
  };
  Vec newton(Vec u0, double eps, NewtonStats* stats = nullptr) const;

  // Preconditioned projected gradient descent of the Sobolev-type quotient on the unit
  // L^{r}-sphere (r = p + 1 or p - eps + 1). Returns the minimizer and the quotient value.
  Vec minimize_quotient(Vec v, double eps, double* quotient, int* iterations) const;
  double quotient(const Vec& v, double eps) const;

  SolveReport report(const Vec& u, double eps, const NewtonStats& st, int stage1 = 0) const;

 private:
  SpectralBasis basis_;
  double s_, p_;
  ProblemKind kind_;
  SolveOptions opts_;
  Vec plus_s_, minus_s_;
  Eigen::MatrixXd dense_;  // A_s as a matrix for small grids
  ConstantSet k_;

  Eigen::VectorXd linear_solve(const Vec& dfu, const Vec& rhs, int* krylov, double forcing) const;
};

// Checks the admissible range of eps for the kind.
void check_epsilon(const SpectralBasis& basis, double s, double eps, ProblemKind kind);

SolveReport solve_least_energy(const SpectralBasis& basis, double s, double eps, ProblemKind kind,
                               const SolveOptions& opts = {});
// Newton only, from a given initial guess.
SolveReport solve_from(const SpectralBasis& basis, double s, double eps, ProblemKind kind, const Vec& u0,
                       const SolveOptions& opts = {});
SolveReport solve_multipeak(const SpectralBasis& basis, double s, double eps, const ReducedConfig& init,
                            const SolveOptions& opts = {}, double* eps_used = nullptr);

// Fills mu_eps, x_eps, bound_ratio and the resolution fields of a report.
void blowup_diagnostics(SolveReport& report, const DomainGrid& grid, const ConstantSet& k,
                        double min_cells = 6);
// Rescaling exponent in b_eps(x) = mu^{-1} u(mu^{-e} x + x_eps).
double rescale_exponent(const SolveReport& report, int n);
// b_eps at rescaled points, by multilinear interpolation.
std::vector<double> rescaled_profile(const SolveReport& report, const DomainGrid& grid,
                                     const std::vector<Point>& ys);

// Multilinear interpolation of a grid function with zero Dirichlet data outside.
double interpolate(const DomainGrid& g, const Vec& u, const Point& x);

// Strict local maxima above rel * max(u).
std::vector<std::size_t> local_maxima(const DomainGrid& g, const Vec& u, double rel = 0.05);

}  // namespace fraclap
