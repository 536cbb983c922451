#pragma once

#include <string>

#include "fraclap/grid.hpp"

namespace fraclap {

enum class ProblemKind { critical, subcritical };

inline const char* to_string(ProblemKind k) { return k == ProblemKind::critical ? "critical" : "subcritical"; }
ProblemKind parse_kind(const std::string& s);

struct SolveReport {
  ProblemKind kind = ProblemKind::critical;
  double epsilon = 0;
  double s = 0;
  Vec u;
  double energy = 0;
  double residual = 0;      // |A_s u - f(u)|_inf
  double mu_eps = 0;        // |u|_inf / c_{n,s}
  Point x_eps{0, 0, 0};
  long x_node = -1;
  double bound_ratio = 0;   // max b_eps / w_1 over rescaled nodes
  double core_width = 0;    // mu^{-2/(n-2s)} (critical) or its subcritical analogue
  double cells_per_core = 0;
  bool resolved = true;
  int stage1_iterations = 0;
  int newton_iterations = 0;
  int krylov_iterations = 0;
};

}  // namespace fraclap
