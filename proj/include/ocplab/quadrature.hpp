#pragma once

#include <array>
#include <span>
#include <vector>

#include "ocplab/geometry.hpp"

namespace ocplab {

// Quadrature rule on the reference simplex in barycentric form. Weights sum
// to one, so an integral over a simplex T is |T| * sum_q w_q f(x_q). All
// nodes are strictly interior.
struct QuadRule {
  int dim = 2;
  int degree = 1;  // polynomial exactness
  std::vector<std::array<double, 4>> bary;
  std::vector<double> weights;

  Point map(std::span<const Point> verts, int q) const {
    Point x{0.0, 0.0, 0.0};
    for (int i = 0; i <= dim; ++i) x = x + bary[q][i] * verts[i];
    return x;
  }
};

// Grundmann-Moller rule of the smallest index with exactness >= degree.
const QuadRule& simplex_rule(int dim, int degree);

}  // namespace ocplab
