#pragma once

#include <vector>

#include "fraclap/constants.hpp"
#include "fraclap/greens.hpp"
#include "fraclap/report.hpp"

namespace fraclap {

struct ReducedConfig {
  int k = 1;
  std::vector<double> lambdas;
  std::vector<Point> sigmas;
  double delta0 = 0.1;
  double alpha0 = 1.0;
};

// 1/(n-4s) for the critical problem, 1/(n-2s) for the subcritical one.
double default_alpha0(int n, double s, ProblemKind kind);
// 0.1 * diameter
double default_delta0(const DomainGrid& g);

// Euclidean distance from x to the complement of the domain (lattice exterior for masks).
double distance_to_boundary(const DomainGrid& g, const Point& x);
// Empty string when admissible, otherwise the violated condition.
std::string admissibility_violation(const DomainGrid& g, const ReducedConfig& c);

// Robin function and its gradient at an arbitrary point by C^1 Catmull-Rom interpolation of
// the node values (equals tau and its central difference at nodes).
double robin_at(const GreenCache& cache, const Point& x, Eigen::VectorXd* grad = nullptr);
// G(x, y) for well separated points: exact singular part minus interpolated regular part.
double green_at(const GreenCache& cache, const Point& x, const Point& y, Eigen::VectorXd* grad_x = nullptr);

double upsilon(const GreenCache& cache, const ConstantSet& k, const ReducedConfig& c, ProblemKind kind);
// Ordering: lambda_1..lambda_k, then sigma_1 (n components), ..., sigma_k.
Eigen::VectorXd upsilon_grad(const GreenCache& cache, const ConstantSet& k, const ReducedConfig& c,
                             ProblemKind kind);
// Natural magnitude of Upsilon used to make gradient tolerances relative.
double upsilon_scale(const GreenCache& cache, const ConstantSet& k, const ReducedConfig& c, ProblemKind kind);

std::vector<double> pack(const ReducedConfig& c, int n);
ReducedConfig unpack(const ReducedConfig& like, const std::vector<double>& x, int n);

struct CriticalResult {
  ReducedConfig config;
  double value = 0;
  double grad_norm = 0;
  double scale = 0;
  int iterations = 0;
  Eigen::MatrixXd hessian;
  Eigen::VectorXd hessian_eigenvalues;
};

struct FinderOptions {
  double grad_tol = 1e-8;  // relative to upsilon_scale
  int max_iterations = 100;
};

CriticalResult find_critical_config(const GreenCache& cache, const ConstantSet& k, const ReducedConfig& start,
                                    ProblemKind kind, const FinderOptions& opts = {});

// Closed-form stationary scale of Upsilon_1 at a point with Robin value tau.
double lambda_star(const ConstantSet& k, double tau);

// k square lobes of side `lobe` in a row, joined by necks of width `neck` and length `lobe`.
Mask dumbbell_mask(int k, double lobe, double neck, double h);

}  // namespace fraclap
