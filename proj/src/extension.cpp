#include "fraclap/extension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fraclap/constants.hpp"
#include "fraclap/error.hpp"
#include "fraclap/fractional.hpp"

namespace fraclap {

namespace {
constexpr double kRhoCut = 740.0;  // rho underflows past this

double small_r_rho(double s, double r) {
  const double A = std::tgamma(1 - s) / std::tgamma(1 + s) * std::pow(2.0, -2 * s);
  return 1 - A * std::pow(r, 2 * s) + r * r / (4 * (1 - s));
}
}  // namespace

double bessel_k(double s, double r) {
  if (!(r > 0)) throw ConfigError("bessel_k: argument must be positive");
  // K_s(r) = e^{-r} * int exp(-r (cosh t - 1)) cosh(s t) dt
  const double step = 1.0 / 32;
  double sum = 0.5;
  for (int i = 1;; ++i) {
    const double t = i * step;
    const double base = -r * (std::cosh(t) - 1);
    const double hi = base + s * t;
    if (hi < -45) break;
    sum += 0.5 * (std::exp(hi) + std::exp(base - s * t));
  }
  return std::exp(-r) * sum * step;
}

double rho_profile(double s, double r) {
  if (r <= 0) return 1.0;
  if (r < 1e-8) return small_r_rho(s, r);
  if (r > kRhoCut) return 0.0;
  return std::pow(2.0, 1 - s) / std::tgamma(s) * std::pow(r, s) * bessel_k(s, r);
}

double rho_derivative(double s, double r) {
  if (!(r > 0)) throw ConfigError("rho_derivative: argument must be positive");
  if (r > kRhoCut) return 0.0;
  return -std::pow(2.0, 1 - s) / std::tgamma(s) * std::pow(r, s) * bessel_k(1 - s, r);
}

RhoTable::RhoTable(double s) : s_(s) {
  A_ = std::tgamma(1 - s) / std::tgamma(1 + s) * std::pow(2.0, -2 * s);
  x0_ = std::log(1e-8);
  dx_ = 1.0 / 128;
  const int n = int((std::log(kRhoCut) - x0_) / dx_) + 4;
  v_.resize(n);
  for (int i = 0; i < n; ++i) v_[i] = rho_profile(s, std::exp(x0_ + i * dx_));
}

double RhoTable::operator()(double r) const {
  if (r <= 0) return 1.0;
  if (r < 1e-8) return 1 - A_ * std::pow(r, 2 * s_) + r * r / (4 * (1 - s_));
  if (r >= kRhoCut) return 0.0;
  const double x = (std::log(r) - x0_) / dx_;
  int i = std::clamp(int(x) - 1, 0, int(v_.size()) - 4);
  const double u = x - i;  // in [1, 2) away from the ends
  // cubic Lagrange through nodes i..i+3 at local abscissae 0..3
  const double l0 = -(u - 1) * (u - 2) * (u - 3) / 6;
  const double l1 = u * (u - 2) * (u - 3) / 2;
  const double l2 = -u * (u - 1) * (u - 3) / 2;
  const double l3 = u * (u - 1) * (u - 2) / 6;
  return l0 * v_[i] + l1 * v_[i + 1] + l2 * v_[i + 2] + l3 * v_[i + 3];
}

CylinderExtension::CylinderExtension(const SpectralBasis& basis, const Vec& u, double s)
    : basis_(basis), s_(s), a_(basis.analyze_raw(u)), unorm_(u.cwiseAbs().maxCoeff()) {}

double CylinderExtension::at(std::size_t node, double t) const {
  if (t < 0) throw ConfigError("extension: t must be nonnegative");
  const Vec phi = basis_.node_values(node);
  const Vec& lam = basis_.raw_eigenvalues();
  const double amax = a_.cwiseAbs().maxCoeff();
  double sum = 0;
  for (std::size_t k : basis_.order()) {
    const double r = rho_profile(s_, std::sqrt(lam[k]) * t);
    if (amax * r < 1e-14 * unorm_) break;  // profiles decrease with lambda
    sum += a_[k] * phi[k] * r;
  }
  return sum;
}

Vec CylinderExtension::slice(double t) const {
  const Vec& lam = basis_.raw_eigenvalues();
  Vec b(a_.size());
  if (a_.size() <= 50000) {
    for (Eigen::Index k = 0; k < a_.size(); ++k) b[k] = a_[k] * rho_profile(s_, std::sqrt(lam[k]) * t);
  } else {
    RhoTable rho(s_);
    for (Eigen::Index k = 0; k < a_.size(); ++k) b[k] = a_[k] * rho(std::sqrt(lam[k]) * t);
  }
  return basis_.synthesize_raw(b);
}

CylinderExtension extend_cylinder(const SpectralBasis& basis, const Vec& u, double s) {
  return CylinderExtension(basis, u, s);
}

FluxResidual flux_residual(const SpectralBasis& basis, const Vec& u, double s) {
  if (u.cwiseAbs().maxCoeff() == 0.0) throw ConfigError("flux_residual: zero field");
  const double Cs = extension_constant(s);
  const Vec As = apply_power(basis, u, s);
  const double scale = As.cwiseAbs().maxCoeff();
  FluxResidual out;

  // rho(r) = 1 - A r^{2s} + O(r^2), so -t^{1-2s} d/dt rho(sqrt(lambda) t) -> 2 s A lambda^s
  const double A = std::tgamma(1 - s) / std::tgamma(1 + s) * std::pow(2.0, -2 * s);
  Vec a = basis.analyze_raw(u);
  Vec flux = (2 * s * A / Cs) * a.cwiseProduct(basis.multiplier(s));
  out.analytic = (basis.synthesize_raw(flux) - As).cwiseAbs().maxCoeff() / scale;

  CylinderExtension ext(basis, u, s);
  // small enough that sqrt(lambda_max) t stays below ~0.1
  double hmin = basis.grid().h(0);
  for (int d = 1; d < basis.grid().dim(); ++d) hmin = std::min(hmin, basis.grid().h(d));
  const double t1 = 0.05 * hmin / std::sqrt(double(basis.grid().dim())), t2 = t1 / 2, q = 2 - 2 * s;
  auto secant = [&](double t) -> Vec { return (2 * s / Cs) * (u - ext.slice(t)) / std::pow(t, 2 * s); };
  const Vec f1 = secant(t1), f2 = secant(t2);
  const Vec lim = (f2 * std::pow(t1, q) - f1 * std::pow(t2, q)) / (std::pow(t1, q) - std::pow(t2, q));
  out.numerical = (lim - As).cwiseAbs().maxCoeff() / scale;
  return out;
}

double mode_energy_integral(double s) {
  auto f = [&](double r) {
    const double rho = rho_profile(s, r), d = rho_derivative(s, r);
    return std::pow(r, 1 - 2 * s) * (rho * rho + d * d);
  };
  // below delta, rho' ~ -2 s A r^{2s-1} and rho ~ 1 integrate in closed form
  const double delta = 1e-6;
  const double A = std::tgamma(1 - s) / std::tgamma(1 + s) * std::pow(2.0, -2 * s);
  const double head = std::pow(delta, 2 - 2 * s) / (2 - 2 * s) + 2 * s * A * A * std::pow(delta, 2 * s);
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  return head + ts.integrate(f, delta, 1.0) + es.integrate(f, 1.0, std::numeric_limits<double>::infinity());
}

double extend_halfspace_bubble(const BubbleParams& b, int n, double s, const Point& x, double t) {
  if (t < 0) throw ConfigError("extension: t must be nonnegative");
  if (t == 0) return bubble_value(b, x, n, s);
  const ConstantSet k = closed_form_constants(n, s);
  const double beta = (n - 2 * s) / 2;
  auto w = [&](double r2) { return k.c * std::pow(b.lambda / (b.lambda * b.lambda + r2), beta); };
  double z2 = 0;
  for (int d = 0; d < n; ++d) z2 += (x[d] - b.xi[d]) * (x[d] - b.xi[d]);
  const double z = std::sqrt(z2);
  // mean of w over the sphere of radius rho around x
  auto sphere_mean = [&](double rho) {
    if (n == 1) return 0.5 * (w((z - rho) * (z - rho)) + w((z + rho) * (z + rho)));
    auto at = [&](double psi) { return w(z2 + rho * rho - 2 * z * rho * std::cos(psi)); };
    if (n == 2)
      return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(at, 0.0, std::numbers::pi, 8, 1e-12) /
             std::numbers::pi;
    return 0.5 * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                     [&](double psi) { return std::sin(psi) * at(psi); }, 0.0, std::numbers::pi, 8, 1e-12);
  };
  // y = x + t cot(psi) theta turns the Poisson kernel into sin^{2s-1} cos^{n-1} on (0, pi/2)
  const double kappa = std::tgamma((n + 2 * s) / 2) / (std::pow(std::numbers::pi, n / 2.0) * std::tgamma(s));
  auto f = [&](double psi) {
    const double sn = std::sin(psi), cs = std::cos(psi);
    return std::pow(sn, 2 * s - 1) * std::pow(cs, n - 1) * sphere_mean(t * cs / sn);
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  return kappa * sphere_area(n) * ts.integrate(f, 0.0, std::numbers::pi / 2, 1e-12);
}

PohozaevResult pohozaev_residual(const SpectralBasis& basis, const Vec& u, double eps, double s) {
  const DomainGrid& g = basis.grid();
  if (g.dim() != 1 || g.kind() != DomainGrid::Kind::box)
    throw ConfigError("pohozaev_residual: only one-dimensional boxes are supported");
  if (std::size_t(u.size()) != g.size()) throw ConfigError("pohozaev_residual: length mismatch");
  const std::size_t N = g.size();
  if (N < 4) throw ConfigError("pohozaev_residual: grid too coarse");
  PohozaevResult out;
  if (u.cwiseAbs().maxCoeff() == 0.0) return out;
  const double Cs = closed_form_constants(1, s).Cs;
  const double h = g.h(0);
  out.lhs = eps * s * Cs * g.weight() * u.squaredNorm();

  const Vec a = basis.analyze_raw(u);
  const Vec sq = basis.raw_eigenvalues().cwiseSqrt();  // ascending in 1D
  const std::size_t nodes[4] = {0, 1, N - 2, N - 1};
  Eigen::MatrixXd c(N, 4);
  for (int j = 0; j < 4; ++j) c.col(j) = a.cwiseProduct(basis.node_values(nodes[j]));
  const double zl = -g.bounds(0).lo, zr = g.bounds(0).hi;  // <z, nu> at the two ends
  RhoTable rho(s);

  auto integrand = [&](double t) {
    const std::size_t kmax = std::upper_bound(sq.data(), sq.data() + N, kRhoCut / t) - sq.data();
    double U[4] = {0, 0, 0, 0};
    for (std::size_t k = 0; k < kmax; ++k) {
      const double r = rho(sq[k] * t);
      for (int j = 0; j < 4; ++j) U[j] += c(k, j) * r;
    }
    // one-sided second-order derivative with U = 0 on the boundary
    const double dl = (4 * U[0] - U[1]) / (2 * h);
    const double dr = (4 * U[3] - U[2]) / (2 * h);
    return std::pow(t, 1 - 2 * s) * (dl * dl * zl + dr * dr * zr);
  };

  const double tmin = 1e-4 * h;
  const double T = 80.0 / sq[0];
  const int per_decade = 48;
  int m = int(std::ceil(std::log10(T / tmin) * per_decade));
  if (m % 2) ++m;
  const double dl = std::log(T / tmin) / m;
  std::vector<double> f(m + 1);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i <= m; ++i) {
    const double t = tmin * std::exp(i * dl);
    f[i] = integrand(t) * t;  // dt = t d(log t)
  }
  double simpson = f[0] + f[m];
  for (int i = 1; i < m; ++i) simpson += (i % 2 ? 4 : 2) * f[i];
  simpson *= dl / 3;
  // on (0, tmin) the derivatives are frozen at their t = tmin values
  const double head = f[0] / (2 - 2 * s);
  out.rhs = 0.5 * (simpson + head);
  out.gap = std::abs(out.lhs - out.rhs) / std::max(out.lhs, out.rhs);
  return out;
}

PohozaevResult pohozaev_residual(const SpectralBasis& basis, const SolveReport& report) {
  if (report.kind != ProblemKind::critical)
    throw ConfigError("pohozaev_residual: only the critical problem has this identity");
  return pohozaev_residual(basis, report.u, report.epsilon, report.s);
}

}  // namespace fraclap
