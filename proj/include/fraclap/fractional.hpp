#pragma once

#include "fraclap/basis.hpp"

namespace fraclap {

// Critical exponent (n + 2s) / (n - 2s).
double critical_exponent(int n, double s);

// A^sigma u via the eigenbasis; sigma = s gives A_s, -s its inverse.
Vec apply_power(const SpectralBasis& basis, const Vec& u, double sigma);

// |A_s^{1/2} u|^2 / |u|_{p+1}^2. The continuum optimum is S_{n,s}^{-2}.
double sobolev_quotient(const SpectralBasis& basis, const Vec& u, double s);

// <A_s u, u> in the weighted inner product, computed from coefficients.
double energy_form(const SpectralBasis& basis, const Vec& u, double s);

}  // namespace fraclap
