#include "fraclap/constants.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "fraclap/error.hpp"

namespace fraclap {

namespace {
constexpr double pi = std::numbers::pi;
}

double sphere_area(int n) { return 2.0 * std::pow(pi, n / 2.0) / std::tgamma(n / 2.0); }

double bubble_integral_closed(int n, double alpha) {
  if (!(2 * alpha > n)) throw ConfigError("bubble integral diverges: need 2 alpha > n");
  return std::pow(pi, n / 2.0) * std::tgamma(alpha - n / 2.0) / std::tgamma(alpha);
}

double bubble_integral_oracle(int n, double /*s*/, double alpha) {
  if (!(2 * alpha > n)) throw ConfigError("bubble integral diverges: need 2 alpha > n");
  const double R = 4.0;
  boost::math::quadrature::tanh_sinh<double> ts;
  auto f = [&](double r) { return std::pow(r, n - 1) * std::pow(1 + r * r, -alpha); };
  double inner = ts.integrate(f, 0.0, R);
  // (1 + r^2)^{-alpha} = r^{-2 alpha} sum_j binom(-alpha, j) r^{-2j}
  double tail = 0, binom = 1;
  for (int j = 0; j < 200; ++j) {
    double e = 2 * alpha + 2 * j - n;
    double term = binom * std::pow(R, -e) / e;
    tail += term;
    if (std::abs(term) < 1e-18 * std::abs(tail)) break;
    binom *= (-alpha - j) / (j + 1);
  }
  return sphere_area(n) * (inner + tail);
}

double extension_constant(double s) {
  if (!(s > 0 && s < 1)) throw ConfigError("constants: s must lie in (0, 1)");
  return std::pow(2.0, 1 - 2 * s) * std::tgamma(1 - s) / std::tgamma(s);
}

ConstantSet closed_form_constants(int n, double s) {
  if (n < 1 || n > 3) throw ConfigError("constants: n must be 1, 2 or 3");
  if (!(s > 0 && s < 1)) throw ConfigError("constants: s must lie in (0, 1)");
  if (!(n > 2 * s)) throw ConfigError("constants: need n > 2s");
  const double nn = n;
  ConstantSet k;
  k.n = n;
  k.s = s;
  k.p = (nn + 2 * s) / (nn - 2 * s);
  const double G = std::tgamma(nn / 2);
  k.S = std::pow(2.0, -s) * std::pow(pi, -s / 2) *
        std::sqrt(std::tgamma((nn - 2 * s) / 2) / std::tgamma((nn + 2 * s) / 2)) *
        std::pow(std::tgamma(nn) / G, s / nn);
  k.Cs = extension_constant(s);
  const double area = sphere_area(n);
  k.a = std::pow(2.0, 1 - 2 * s) * std::tgamma((nn - 2 * s) / 2) / (G * std::tgamma(s)) / area;
  k.c = std::pow(2.0, (nn - 2 * s) / 2) *
        std::pow(std::tgamma((nn + 2 * s) / 2) / std::tgamma((nn - 2 * s) / 2), (nn - 2 * s) / (4 * s));
  k.b = area / 2 * std::tgamma(s) * G / std::tgamma((nn + 2 * s) / 2) * std::pow(k.c, k.p + 1);
  k.c0 = std::pow(k.c, k.p + 1) * bubble_integral_closed(n, nn);
  k.c1 = std::pow(k.c, k.p) * bubble_integral_closed(n, (nn + 2 * s) / 2);
  k.D = area / 2 * boost::math::beta(1 - s, nn / 2);
  k.E = area / (2 * nn) * boost::math::beta(1 - s, (nn + 2) / 2);

  const double common = k.D * k.a * k.b * k.b;
  k.g_literal = 4 * nn / (2 * k.Cs) * std::pow(k.S, nn / s) * common;
  k.g_corrected = k.g_literal;

  if (nn > 4 * s) {
    const double gam = std::tgamma(nn / 2 - 2 * s) / std::tgamma(nn - 2 * s);
    k.c2 = k.c * k.c * std::pow(pi, nn / 2) * gam;
    k.c2_literal = k.c * k.c * std::pow(pi, nn / s) * gam;
    const double tail = (nn - 2 * s) * (nn - 2 * s) / (2 * s * k.Cs) * common *
                        std::pow(k.c, -4 * s / (nn - 2 * s));
    k.d_literal = tail / (std::pow(pi, nn / s) * gam);
    k.d_corrected = tail / (std::pow(pi, nn / 2) * gam);
    k.d_amplitude = *k.d_corrected / (k.c * k.c);
  } else {
    k.note = "n <= 4s: c2 and d are undefined (int w^2 diverges)";
  }
  return k;
}

}  // namespace fraclap
