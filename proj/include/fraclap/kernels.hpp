#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace fraclap::kernels {

// serial is the reference path kept for testing; parallel uses OpenMP.
enum class Exec { serial, parallel };

// y = A x or y = A^T x
void gemv(const Eigen::MatrixXd& A, const double* x, double* y, bool transpose, Exec exec);

// Table S[k * n + j] = sin(pi (j+1)(k+1) / (n+1)).
std::vector<double> sine_table(int n);

// Unnormalized type-I sine sum along one axis of a row-major tensor:
// out[.., k, ..] = sum_j in[.., j, ..] * S[k, j].
void sine_axis(const double* in, double* out, const std::array<int, 3>& extent, int dim, int axis,
               const std::vector<double>& table, Exec exec);

int max_threads();

}  // namespace fraclap::kernels
