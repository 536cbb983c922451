#pragma once

#include <optional>
#include <string>

namespace fraclap {

// Closed-form constants for given (n, s). Fields that need n > 4s are empty otherwise.
struct ConstantSet {
  int n = 0;
  double s = 0;
  double p = 0;
  double S = 0;   // sharp Sobolev constant
  double Cs = 0;  // extension flux constant
  double a = 0;   // Green function singular coefficient
  double c = 0;   // bubble amplitude
  double b = 0;   // mass of c * w^p
  double c0 = 0;  // int w^{p+1}
  double c1 = 0;  // int w^p
  std::optional<double> c2;          // int w^2 (pi^{n/2} form)
  std::optional<double> c2_literal;  // same with pi^{n/s}
  double D = 0;
  double E = 0;
  // rate constant for eps |u|^{2(n-4s)/(n-2s)}: printed, pi^{n/2}, and pi^{n/2} with c^{-2}
  std::optional<double> d_literal;
  std::optional<double> d_corrected;
  std::optional<double> d_amplitude;
  // rate constant for eps |u|^2; there is no pi^{n/s} factor, so both variants agree
  double g_literal = 0;
  double g_corrected = 0;
  std::string note;
};

ConstantSet closed_form_constants(int n, double s);
// C_s = 2^{1-2s} Gamma(1-s) / Gamma(s), defined for every s in (0, 1).
double extension_constant(double s);

double sphere_area(int n);  // |S^{n-1}|

// int_{R^n} (1 + |x|^2)^{-alpha} dx, closed form pi^{n/2} Gamma(alpha - n/2) / Gamma(alpha).
double bubble_integral_closed(int n, double alpha);
// Same integral by radial tanh-sinh quadrature on (0, R] plus an analytic tail series.
double bubble_integral_oracle(int n, double s, double alpha);

}  // namespace fraclap
