#include "fraclap/fractional.hpp"

#include <cmath>

#include "fraclap/error.hpp"

namespace fraclap {

double critical_exponent(int n, double s) {
  if (!(n > 2 * s)) throw ConfigError("critical exponent needs n > 2s");
  return (n + 2 * s) / (n - 2 * s);
}

Vec apply_power(const SpectralBasis& basis, const Vec& u, double sigma) {
  if (std::abs(sigma) > 2) throw ConfigError("apply_power: |sigma| must be <= 2");
  return basis.apply_multiplier(u, basis.multiplier(sigma));
}

double energy_form(const SpectralBasis& basis, const Vec& u, double s) {
  Vec a = basis.analyze_raw(u);
  return (a.array().square() * basis.raw_eigenvalues().array().pow(s)).sum();
}

double sobolev_quotient(const SpectralBasis& basis, const Vec& u, double s) {
  if (u.cwiseAbs().maxCoeff() == 0.0) throw ConfigError("sobolev_quotient: zero function");
  const double p = critical_exponent(basis.grid().dim(), s);
  const double num = energy_form(basis, u, s);
  const double den = std::pow(lp_norm(basis.grid(), u, p + 1), 2.0);
  return num / den;
}

}  // namespace fraclap
