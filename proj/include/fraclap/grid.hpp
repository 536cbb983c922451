#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fraclap {

using Vec = Eigen::VectorXd;
using Point = std::array<double, 3>;

struct Interval {
  double lo;
  double hi;
};

// Raster of node flags; cell (r, c) sits at ((c + 1) h, (r + 1) h).
struct Mask {
  int rows = 0;
  int cols = 0;
  double h = 0.0;
  std::vector<unsigned char> on;  // row-major

  bool at(int r, int c) const {
    return r >= 0 && c >= 0 && r < rows && c < cols && on[std::size_t(r) * cols + c];
  }
};

Mask read_mask(std::istream& in);
Mask read_mask_file(const std::string& path);
void write_mask(std::ostream& out, const Mask& m);
bool mask_connected(const Mask& m);

class DomainGrid {
 public:
  enum class Kind { box, mask2d };

  static DomainGrid box(const std::vector<Interval>& bounds, double h);
  static DomainGrid masked(const Mask& m);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  std::size_t size() const { return nodes_.size(); }
  double h(int axis) const { return h_[axis]; }
  double weight() const { return weight_; }
  const Interval& bounds(int axis) const { return bounds_[axis]; }
  // Interior lattice extent along an axis (box: node count, mask: raster size).
  int extent(int axis) const { return extent_[axis]; }

  Point coord(std::size_t i) const;
  const std::array<int, 3>& lattice(std::size_t i) const { return nodes_[i]; }
  // Node index at a lattice position, or -1 for Dirichlet exterior.
  long node_at(std::array<int, 3> ij) const;
  long nearest_node(const Point& x) const;
  bool contains(const Point& x) const;
  // Lattice steps from node i to the nearest exterior node along any axis.
  int boundary_distance(std::size_t i) const;
  double diameter() const;

  const Mask* mask() const { return kind_ == Kind::mask2d ? &mask_ : nullptr; }

 private:
  Kind kind_ = Kind::box;
  int dim_ = 1;
  std::vector<Interval> bounds_;
  std::vector<double> h_;
  std::array<int, 3> extent_{1, 1, 1};
  double weight_ = 1.0;
  std::vector<std::array<int, 3>> nodes_;
  std::vector<long> lookup_;
  Mask mask_;
};

double dot(const DomainGrid& g, const Vec& u, const Vec& v);
// (sum w |u|^q)^(1/q); q = infinity gives the max norm.
double lp_norm(const DomainGrid& g, const Vec& u, double q);
double distance(const Point& a, const Point& b, int dim);

}  // namespace fraclap
