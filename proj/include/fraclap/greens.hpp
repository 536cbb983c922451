#pragma once

#include <array>
#include <cstddef>
#include <vector>
#include <string>

#include "fraclap/basis.hpp"

namespace fraclap {

// How tau(y) = H(y, y) is recovered from the discrete Green function.
//  lattice:     h^{2s-n} g_n(0) - G_h(y, y), with g_n the free-lattice Green function.
//  extrapolate: fit tau + K j^{2s-n-2} to symmetric averages at offsets j = 1, 2.
enum class RobinMethod { lattice, extrapolate };

struct GreenOptions {
  RobinMethod method = RobinMethod::lattice;
  std::size_t full_cap = 4096;
  int robin_margin = 3;
};

// s-power free-lattice Green function of Z^n at an integer offset (unit spacing).
double lattice_green(int n, double s, std::array<int, 3> offset);
double lattice_green_origin(int n, double s);

class GreenCache {
 public:
  GreenCache(const SpectralBasis& basis, double s, GreenOptions opts = {});

  const SpectralBasis& basis() const { return basis_; }
  const DomainGrid& grid() const { return basis_.grid(); }
  double s() const { return s_; }
  double a() const { return a_; }  // singular coefficient a_{n,s}
  bool full() const { return full_; }
  const GreenOptions& options() const { return opts_; }
  std::string method_name() const;

  Vec column(std::size_t j) const;
  // Singular kernel a |x - y|^{2s-n}; nearby node pairs (all pairs in 1D) use the free-lattice
  // kernel instead, which keeps the regular part smooth down to the grid scale.
  double singular(std::size_t x, std::size_t y) const;
  double G(std::size_t i, std::size_t j) const;
  const Eigen::MatrixXd& matrix() const { return G_; }

  // Per-node Robin values and gradients; NaN where the margin is too small.
  // Only populated for full caches.
  const Vec& tau() const { return tau_; }
  const Eigen::MatrixXd& grad_tau() const { return grad_; }

 private:
  SpectralBasis basis_;
  double s_;
  double a_;
  double lattice_ = 0;
  GreenOptions opts_;
  bool full_ = false;
  Vec minus_s_;
  std::vector<double> near_;
  Eigen::MatrixXd G_;
  Vec tau_;
  Eigen::MatrixXd grad_;

  friend double robin_function(const GreenCache&, std::size_t);
  double robin_uncached(std::size_t y) const;
};

// Column A_s^{-1}(e_y / w) of the discrete Green matrix.
Vec green_column(const SpectralBasis& basis, std::size_t y, double s);

// H(x, y) = singular(x, y) - G(x, y) for x != y.
double regular_part(const GreenCache& cache, std::size_t x, std::size_t y);
double robin_function(const GreenCache& cache, std::size_t y);
// Robin value estimated along a single axis by extrapolation.
double robin_extrapolated(const GreenCache& cache, std::size_t y, int axis);
Eigen::VectorXd robin_gradient(const GreenCache& cache, std::size_t y);

}  // namespace fraclap
