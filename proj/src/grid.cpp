#include "fraclap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>

#include "fraclap/error.hpp"

namespace fraclap {

Mask read_mask(std::istream& in) {
  Mask m;
  std::string header;
  if (!std::getline(in, header)) throw ConfigError("mask: missing header");
  std::istringstream hs(header);
  if (!(hs >> m.rows >> m.cols >> m.h) || m.rows <= 0 || m.cols <= 0 || !(m.h > 0))
    throw ConfigError("mask: header must be 'rows cols h'");
  m.on.assign(std::size_t(m.rows) * m.cols, 0);
  int r = 0;
  std::string line;
  while (r < m.rows && std::getline(in, line)) {
    int c = 0;
    for (char ch : line) {
      if (ch == '0' || ch == '1') {
        if (c >= m.cols) throw ConfigError("mask: row " + std::to_string(r) + " too long");
        m.on[std::size_t(r) * m.cols + c++] = ch == '1';
      }
    }
    if (c == 0) continue;  // blank line
    if (c != m.cols) throw ConfigError("mask: row " + std::to_string(r) + " too short");
    ++r;
  }
  if (r != m.rows) throw ConfigError("mask: expected " + std::to_string(m.rows) + " rows");
  return m;
}

Mask read_mask_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mask file " + path);
  return read_mask(in);
}

void write_mask(std::ostream& out, const Mask& m) {
  out << m.rows << ' ' << m.cols << ' ' << m.h << '\n';
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) out << (m.at(r, c) ? '1' : '0');
    out << '\n';
  }
}

bool mask_connected(const Mask& m) {
  long total = std::count(m.on.begin(), m.on.end(), 1);
  if (total == 0) return false;
  std::vector<unsigned char> seen(m.on.size(), 0);
  std::queue<std::pair<int, int>> q;
  for (int r = 0; r < m.rows && q.empty(); ++r)
    for (int c = 0; c < m.cols; ++c)
      if (m.at(r, c)) {
        q.push({r, c});
        seen[std::size_t(r) * m.cols + c] = 1;
        break;
      }
  long reached = 0;
  const int dr[4] = {1, -1, 0, 0}, dc[4] = {0, 0, 1, -1};
  while (!q.empty()) {
    auto [r, c] = q.front();
    q.pop();
    ++reached;
    for (int d = 0; d < 4; ++d) {
      int rr = r + dr[d], cc = c + dc[d];
      if (m.at(rr, cc) && !seen[std::size_t(rr) * m.cols + cc]) {
        seen[std::size_t(rr) * m.cols + cc] = 1;
        q.push({rr, cc});
      }
    }
  }
  return reached == total;
}

DomainGrid DomainGrid::box(const std::vector<Interval>& bounds, double h) {
  if (bounds.empty() || bounds.size() > 3) throw ConfigError("box: dimension must be 1, 2 or 3");
  if (!(h > 0)) throw ConfigError("box: spacing must be positive");
  DomainGrid g;
  g.kind_ = Kind::box;
  g.dim_ = int(bounds.size());
  g.bounds_ = bounds;
  g.h_.assign(g.dim_, h);
  for (int d = 0; d < g.dim_; ++d) {
    double len = bounds[d].hi - bounds[d].lo;
    if (!(len > 0)) throw ConfigError("box: empty interval on axis " + std::to_string(d));
    double cells = len / h;
    long nc = std::lround(cells);
    if (std::abs(cells - double(nc)) > 1e-9 * std::max(1.0, cells))
      throw ConfigError("box: spacing does not divide axis " + std::to_string(d));
    if (nc < 2) throw ConfigError("box: no interior node on axis " + std::to_string(d));
    g.extent_[d] = int(nc - 1);
    g.weight_ *= h;
  }
  std::size_t total = 1;
  for (int d = 0; d < g.dim_; ++d) total *= g.extent_[d];
  g.nodes_.resize(total);
  g.lookup_.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rest = i;
    std::array<int, 3> ij{0, 0, 0};
    for (int d = g.dim_ - 1; d >= 0; --d) {
      ij[d] = int(rest % g.extent_[d]);
      rest /= g.extent_[d];
    }
    g.nodes_[i] = ij;
    g.lookup_[i] = long(i);
  }
  return g;
}

DomainGrid DomainGrid::masked(const Mask& m) {
  if (!(m.h > 0)) throw ConfigError("mask: spacing must be positive");
  if (!mask_connected(m)) throw ConfigError("mask: node set is empty or not edge-connected");
  DomainGrid g;
  g.kind_ = Kind::mask2d;
  g.dim_ = 2;
  g.mask_ = m;
  g.bounds_ = {{0.0, (m.cols + 1) * m.h}, {0.0, (m.rows + 1) * m.h}};
  g.h_ = {m.h, m.h};
  g.extent_ = {m.cols, m.rows, 1};
  g.weight_ = m.h * m.h;
  g.lookup_.assign(std::size_t(m.cols) * m.rows, -1);
  // same ordering as a box grid: x index slowest
  for (int c = 0; c < m.cols; ++c)
    for (int r = 0; r < m.rows; ++r)
      if (m.at(r, c)) {
        g.lookup_[std::size_t(c) * m.rows + r] = long(g.nodes_.size());
        g.nodes_.push_back({c, r, 0});
      }
  return g;
}

Point DomainGrid::coord(std::size_t i) const {
  Point x{0, 0, 0};
  for (int d = 0; d < dim_; ++d) x[d] = bounds_[d].lo + (nodes_[i][d] + 1) * h_[d];
  return x;
}

long DomainGrid::node_at(std::array<int, 3> ij) const {
  std::size_t flat = 0;
  for (int d = 0; d < dim_; ++d) {
    if (ij[d] < 0 || ij[d] >= extent_[d]) return -1;
    flat = flat * extent_[d] + ij[d];
  }
  return lookup_[flat];
}

long DomainGrid::nearest_node(const Point& x) const {
  std::array<int, 3> ij{0, 0, 0};
  for (int d = 0; d < dim_; ++d) ij[d] = int(std::lround((x[d] - bounds_[d].lo) / h_[d])) - 1;
  return node_at(ij);
}

bool DomainGrid::contains(const Point& x) const {
  for (int d = 0; d < dim_; ++d)
    if (!(x[d] > bounds_[d].lo && x[d] < bounds_[d].hi)) return false;
  if (kind_ == Kind::box) return true;
  // inside the union of node cells
  std::array<int, 3> ij{0, 0, 0};
  for (int d = 0; d < dim_; ++d) ij[d] = int(std::floor((x[d] - bounds_[d].lo) / h_[d])) - 1;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      if (node_at({ij[0] + a, ij[1] + b, 0}) < 0) return false;
  return true;
}

int DomainGrid::boundary_distance(std::size_t i) const {
  int best = std::numeric_limits<int>::max();
  for (int d = 0; d < dim_; ++d)
    for (int sgn : {-1, 1}) {
      auto ij = nodes_[i];
      int steps = 0;
      while (node_at(ij) >= 0) {
        ij[d] += sgn;
        ++steps;
      }
      best = std::min(best, steps);
    }
  return best;
}

double DomainGrid::diameter() const {
  double s = 0;
  for (int d = 0; d < dim_; ++d) s += std::pow(bounds_[d].hi - bounds_[d].lo, 2);
  return std::sqrt(s);
}

double dot(const DomainGrid& g, const Vec& u, const Vec& v) {
  if (std::size_t(u.size()) != g.size() || std::size_t(v.size()) != g.size())
    throw ConfigError("dot: length does not match grid");
  return g.weight() * u.dot(v);
}

double lp_norm(const DomainGrid& g, const Vec& u, double q) {
  if (std::size_t(u.size()) != g.size()) throw ConfigError("lp_norm: length does not match grid");
  if (std::isinf(q) && q > 0) return u.cwiseAbs().maxCoeff();
  if (!(q >= 1)) throw ConfigError("lp_norm: exponent must be >= 1");
  double s = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) s += std::pow(std::abs(u[i]), q);
  return std::pow(g.weight() * s, 1.0 / q);
}

double distance(const Point& a, const Point& b, int dim) {
  double s = 0;
  for (int d = 0; d < dim; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

}  // namespace fraclap
