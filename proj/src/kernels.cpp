#include "fraclap/kernels.hpp"

#include <cmath>
#include <numbers>

#include <omp.h>

namespace fraclap::kernels {

void gemv(const Eigen::MatrixXd& A, const double* x, double* y, bool transpose, Exec exec) {
  const Eigen::Index rows = A.rows(), cols = A.cols();
  const double* a = A.data();  // column major
  if (transpose) {
    // y_j = column j . x, columns are contiguous
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double* col = a + j * rows;
      double s = 0;
      for (Eigen::Index i = 0; i < rows; ++i) s += col[i] * x[i];
      y[j] = s;
    }
    return;
  }
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (Eigen::Index i = 0; i < rows; ++i) {
    double s = 0;
    for (Eigen::Index j = 0; j < cols; ++j) s += a[j * rows + i] * x[j];
    y[i] = s;
  }
}

std::vector<double> sine_table(int n) {
  std::vector<double> t(std::size_t(n) * n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      // reduce the integer argument first so large n keeps full accuracy
      long m = long(j + 1) * (k + 1) % (2L * (n + 1));
      t[std::size_t(k) * n + j] = std::sin(std::numbers::pi * double(m) / (n + 1));
    }
  return t;
}

void sine_axis(const double* in, double* out, const std::array<int, 3>& extent, int dim, int axis,
               const std::vector<double>& table, Exec exec) {
  std::size_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= extent[d];
  for (int d = axis + 1; d < dim; ++d) inner *= extent[d];
  const int n = extent[axis];
  const std::size_t lines = outer * inner;
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (std::size_t line = 0; line < lines; ++line) {
    std::size_t o = line / inner, i = line % inner;
    const double* src = in + o * n * inner + i;
    double* dst = out + o * n * inner + i;
    for (int k = 0; k < n; ++k) {
      const double* row = table.data() + std::size_t(k) * n;
      double s = 0;
      for (int j = 0; j < n; ++j) s += row[j] * src[std::size_t(j) * inner];
      dst[std::size_t(k) * inner] = s;
    }
  }
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace fraclap::kernels
