#pragma once

#include <vector>

#include "fraclap/basis.hpp"
#include "fraclap/bubbles.hpp"
#include "fraclap/report.hpp"

namespace fraclap {

// K_s(r) = int_0^inf e^{-r cosh t} cosh(s t) dt by the trapezoid rule in t.
double bessel_k(double s, double r);

// rho_s(r) = 2^{1-s} Gamma(s)^{-1} r^s K_s(r), the extension profile with rho(0) = 1.
double rho_profile(double s, double r);
// rho_s'(r) = -2^{1-s} Gamma(s)^{-1} r^s K_{1-s}(r)
double rho_derivative(double s, double r);

// Tabulated rho on a log grid for large mode sums.
class RhoTable {
 public:
  explicit RhoTable(double s);
  double operator()(double r) const;

 private:
  double s_, A_;
  double x0_, dx_;
  std::vector<double> v_;
};

// U(x, t) = sum_k a_k phi_k(x) rho(sqrt(lambda_k) t).
class CylinderExtension {
 public:
  CylinderExtension(const SpectralBasis& basis, const Vec& u, double s);
  double at(std::size_t node, double t) const;
  Vec slice(double t) const;
  const Vec& coefficients() const { return a_; }  // transform order

 private:
  SpectralBasis basis_;
  double s_;
  Vec a_;
  double unorm_;
};

CylinderExtension extend_cylinder(const SpectralBasis& basis, const Vec& u, double s);

struct FluxResidual {
  double analytic = 0;
  double numerical = 0;
};

// -C_s^{-1} lim t^{1-2s} dU/dt against A_s u, relative max-norm residuals.
FluxResidual flux_residual(const SpectralBasis& basis, const Vec& u, double s);

// int_0^inf r^{1-2s} (rho^2 + rho'^2) dr; equals C_s.
double mode_energy_integral(double s);

// Extension of w_{lambda,xi} to the half space by the normalized Poisson kernel.
double extend_halfspace_bubble(const BubbleParams& b, int n, double s, const Point& x, double t);

struct PohozaevResult {
  double lhs = 0;
  double rhs = 0;
  double gap = 0;
};

// eps s C_s int u^2 against (1/2) int over the lateral boundary of t^{1-2s} |grad U|^2 <z, nu>.
// One-dimensional boxes only.
PohozaevResult pohozaev_residual(const SpectralBasis& basis, const Vec& u, double eps, double s);
PohozaevResult pohozaev_residual(const SpectralBasis& basis, const SolveReport& report);

}  // namespace fraclap
