#include "fraclap/basis.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fftw3.h>

#include "fraclap/error.hpp"

namespace fraclap {

namespace {
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct SpectralBasis::Impl {
  DomainGrid grid;
  Backend backend = Backend::fast;
  Vec raw;
  Vec sorted;
  std::vector<std::size_t> order;

  // box
  fftw_plan plan = nullptr;
  std::vector<std::vector<double>> tables;
  double analyze_scale = 1, synth_scale = 1;       // for FFTW
  double analyze_direct = 1, synth_direct = 1;     // for direct sums

  // mask
  Eigen::MatrixXd vectors;

  ~Impl() {
    if (plan) {
      std::lock_guard<std::mutex> lock(fftw_mutex());
      fftw_destroy_plan(plan);
    }
  }

  void box_transform(const double* in, double* out, bool analyze) const {
    const std::size_t m = grid.size();
    if (backend == Backend::fast) {
      double* a = fftw_alloc_real(m);
      double* b = fftw_alloc_real(m);
      std::copy(in, in + m, a);
      fftw_execute_r2r(plan, a, b);
      const double sc = analyze ? analyze_scale : synth_scale;
      for (std::size_t i = 0; i < m; ++i) out[i] = sc * b[i];
      fftw_free(a);
      fftw_free(b);
      return;
    }
    auto exec = backend == Backend::serial_reference ? kernels::Exec::serial : kernels::Exec::parallel;
    std::array<int, 3> ext{grid.extent(0), grid.dim() > 1 ? grid.extent(1) : 1,
                           grid.dim() > 2 ? grid.extent(2) : 1};
    std::vector<double> a(in, in + m), b(m);
    for (int d = 0; d < grid.dim(); ++d) {
      kernels::sine_axis(a.data(), b.data(), ext, grid.dim(), d, tables[d], exec);
      a.swap(b);
    }
    const double sc = analyze ? analyze_direct : synth_direct;
    for (std::size_t i = 0; i < m; ++i) out[i] = sc * a[i];
  }

  void mask_transform(const double* in, double* out, bool analyze) const {
    auto exec = backend == Backend::serial_reference ? kernels::Exec::serial : kernels::Exec::parallel;
    const double h = grid.h(0);
    kernels::gemv(vectors, in, out, analyze, exec);
    const double sc = analyze ? h : 1.0 / h;
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] *= sc;
  }

  Vec transform(const Vec& v, bool analyze) const {
    if (std::size_t(v.size()) != grid.size())
      throw ConfigError("spectral transform: vector length does not match basis");
    Vec out(v.size());
    if (grid.kind() == DomainGrid::Kind::box)
      box_transform(v.data(), out.data(), analyze);
    else
      mask_transform(v.data(), out.data(), analyze);
    return out;
  }

  void sort_eigenvalues() {
    order.resize(raw.size());
    std::iota(order.begin(), order.end(), std::size_t(0));
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
    sorted.resize(raw.size());
    for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = raw[order[i]];
  }
};

const DomainGrid& SpectralBasis::grid() const { return impl_->grid; }
std::size_t SpectralBasis::size() const { return impl_->grid.size(); }
Backend SpectralBasis::backend() const { return impl_->backend; }
const Vec& SpectralBasis::eigenvalues() const { return impl_->sorted; }
const Vec& SpectralBasis::raw_eigenvalues() const { return impl_->raw; }
const std::vector<std::size_t>& SpectralBasis::order() const { return impl_->order; }

Vec SpectralBasis::analyze_raw(const Vec& u) const { return impl_->transform(u, true); }
Vec SpectralBasis::synthesize_raw(const Vec& a) const { return impl_->transform(a, false); }

Vec SpectralBasis::analyze(const Vec& u) const {
  Vec raw = analyze_raw(u);
  Vec a(raw.size());
  for (std::size_t i = 0; i < impl_->order.size(); ++i) a[i] = raw[impl_->order[i]];
  return a;
}

Vec SpectralBasis::synthesize(const Vec& a) const {
  if (std::size_t(a.size()) != size())
    throw ConfigError("spectral transform: coefficient length does not match basis");
  Vec raw(a.size());
  for (std::size_t i = 0; i < impl_->order.size(); ++i) raw[impl_->order[i]] = a[i];
  return synthesize_raw(raw);
}

Vec SpectralBasis::eigenvector(std::size_t k) const {
  if (k >= size()) throw ConfigError("eigenvector index out of range");
  Vec e = Vec::Zero(size());
  e[impl_->order[k]] = 1.0;
  return synthesize_raw(e);
}

Vec SpectralBasis::node_values(std::size_t i) const {
  const DomainGrid& g = impl_->grid;
  if (i >= g.size()) throw ConfigError("node index out of range");
  if (g.kind() == DomainGrid::Kind::mask2d) return impl_->vectors.row(i).transpose() / g.h(0);
  Vec out(g.size());
  std::vector<Vec> axis(g.dim());
  for (int d = 0; d < g.dim(); ++d) {
    const int n = g.extent(d);
    const double norm = std::sqrt(2.0 / ((n + 1) * g.h(d)));
    axis[d].resize(n);
    const long j = g.lattice(i)[d] + 1;
    for (int k = 1; k <= n; ++k)
      axis[d][k - 1] = norm * std::sin(std::numbers::pi * double(j * k % (2L * (n + 1))) / (n + 1));
  }
  for (std::size_t m = 0; m < g.size(); ++m) {
    double v = 1;
    for (int d = 0; d < g.dim(); ++d) v *= axis[d][g.lattice(m)[d]];
    out[m] = v;
  }
  return out;
}

Vec SpectralBasis::multiplier(double sigma) const {
  return impl_->raw.array().pow(sigma).matrix();
}

Vec SpectralBasis::apply_multiplier(const Vec& u, const Vec& m) const {
  Vec a = analyze_raw(u);
  if (m.size() != a.size()) throw ConfigError("multiplier length does not match basis");
  a.array() *= m.array();
  return synthesize_raw(a);
}

SpectralBasis build_box_basis(const std::vector<Interval>& bounds, double h, const BasisOptions& opts) {
  auto impl = std::make_shared<SpectralBasis::Impl>();
  impl->grid = DomainGrid::box(bounds, h);
  impl->backend = opts.backend;
  const DomainGrid& g = impl->grid;
  const int dim = g.dim();
  const std::size_t m = g.size();

  std::vector<Vec> axis_eigs(dim);
  for (int d = 0; d < dim; ++d) {
    const int n = g.extent(d);
    const double len = (n + 1) * g.h(d);
    axis_eigs[d].resize(n);
    for (int k = 1; k <= n; ++k)
      axis_eigs[d][k - 1] = 2.0 / (g.h(d) * g.h(d)) * (1.0 - std::cos(k * std::numbers::pi / (n + 1)));
    const double norm = std::sqrt(2.0 / len);
    impl->analyze_scale *= g.h(d) * norm / 2.0;
    impl->synth_scale *= norm / 2.0;
    impl->analyze_direct *= g.h(d) * norm;
    impl->synth_direct *= norm;
  }
  impl->raw.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    double lam = 0;
    for (int d = 0; d < dim; ++d) lam += axis_eigs[d][g.lattice(i)[d]];
    impl->raw[i] = lam;
  }
  impl->sort_eigenvalues();

  if (impl->backend == Backend::fast) {
    int n[3];
    fftw_r2r_kind kinds[3];
    for (int d = 0; d < dim; ++d) {
      n[d] = g.extent(d);
      kinds[d] = FFTW_RODFT00;
    }
    std::lock_guard<std::mutex> lock(fftw_mutex());
    double* a = fftw_alloc_real(m);
    double* b = fftw_alloc_real(m);
    // ESTIMATE keeps plans, and therefore results, reproducible run to run
    impl->plan = fftw_plan_r2r(dim, n, a, b, kinds, FFTW_ESTIMATE);
    fftw_free(a);
    fftw_free(b);
    if (!impl->plan) throw NumericalError("FFTW planning failed");
  } else {
    for (int d = 0; d < dim; ++d) impl->tables.push_back(kernels::sine_table(g.extent(d)));
  }
  SpectralBasis basis;
  basis.impl_ = impl;
  return basis;
}

SpectralBasis build_masked_basis(const Mask& mask, const BasisOptions& opts) {
  auto impl = std::make_shared<SpectralBasis::Impl>();
  impl->grid = DomainGrid::masked(mask);
  impl->backend = opts.backend;
  const DomainGrid& g = impl->grid;
  const std::size_t m = g.size();
  if (m > opts.dense_cap)
    throw ConfigError("masked basis: " + std::to_string(m) + " nodes exceeds dense cap " +
                      std::to_string(opts.dense_cap) + "; use a coarser grid");
  const double ih2 = 1.0 / (g.h(0) * g.h(0));
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    A(i, i) = 4.0 * ih2;
    auto ij = g.lattice(i);
    for (int d = 0; d < 2; ++d)
      for (int sgn : {-1, 1}) {
        auto nb = ij;
        nb[d] += sgn;
        long j = g.node_at(nb);
        if (j >= 0) A(i, j) = -ih2;
      }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw NumericalError("masked basis: eigensolver failed");
  impl->raw = es.eigenvalues();
  impl->vectors = es.eigenvectors();
  impl->sort_eigenvalues();
  SpectralBasis basis;
  basis.impl_ = impl;
  return basis;
}

Vec apply_stencil(const DomainGrid& g, const Vec& u) {
  if (std::size_t(u.size()) != g.size()) throw ConfigError("stencil: length does not match grid");
  Vec out(u.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto ij = g.lattice(i);
    double acc = 0;
    for (int d = 0; d < g.dim(); ++d) {
      double nb = 0;
      for (int sgn : {-1, 1}) {
        auto k = ij;
        k[d] += sgn;
        long j = g.node_at(k);
        if (j >= 0) nb += u[j];
      }
      acc += (2.0 * u[i] - nb) / (g.h(d) * g.h(d));
    }
    out[i] = acc;
  }
  return out;
}

Vec spectral_transform(const SpectralBasis& b, const Vec& v, Direction dir) {
  return dir == Direction::analyze ? b.analyze(v) : b.synthesize(v);
}

}  // namespace fraclap
