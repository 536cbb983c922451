#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "fraclap/grid.hpp"
#include "fraclap/kernels.hpp"

namespace fraclap {

// fast: FFTW for boxes, OpenMP dense products for masks.
// serial_reference / parallel_reference: direct O(M * extent) sine sums or dense products.
enum class Backend { fast, serial_reference, parallel_reference };

struct BasisOptions {
  Backend backend = Backend::fast;
  std::size_t dense_cap = 6000;
};

// Eigenpairs of the finite-difference Dirichlet Laplacian on a grid, orthonormal
// in the weighted inner product. Immutable after construction.
class SpectralBasis {
 public:
  const DomainGrid& grid() const;
  std::size_t size() const;
  Backend backend() const;

  const Vec& eigenvalues() const;      // ascending
  const Vec& raw_eigenvalues() const;  // in transform order
  // ascending position -> transform-order index
  const std::vector<std::size_t>& order() const;

  // Coefficients in ascending eigenvalue order.
  Vec analyze(const Vec& u) const;
  Vec synthesize(const Vec& a) const;
  Vec eigenvector(std::size_t k) const;
  // phi_k(x_i) for every mode k, in transform order.
  Vec node_values(std::size_t i) const;

  // Coefficients in transform order (no permutation).
  Vec analyze_raw(const Vec& u) const;
  Vec synthesize_raw(const Vec& a) const;

  // lambda^sigma in transform order, for reuse with apply_multiplier.
  Vec multiplier(double sigma) const;
  Vec apply_multiplier(const Vec& u, const Vec& m) const;

  struct Impl;

 private:
  friend SpectralBasis build_box_basis(const std::vector<Interval>&, double, const BasisOptions&);
  friend SpectralBasis build_masked_basis(const Mask&, const BasisOptions&);
  std::shared_ptr<const Impl> impl_;
};

SpectralBasis build_box_basis(const std::vector<Interval>& bounds, double h,
                              const BasisOptions& opts = {});
SpectralBasis build_masked_basis(const Mask& mask, const BasisOptions& opts = {});

// Five-point (2n+1 point) Dirichlet stencil -Delta_h u.
Vec apply_stencil(const DomainGrid& g, const Vec& u);

enum class Direction { analyze, synthesize };
Vec spectral_transform(const SpectralBasis& b, const Vec& v, Direction dir);

}  // namespace fraclap
