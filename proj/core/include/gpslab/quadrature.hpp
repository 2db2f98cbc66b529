#pragma once

#include <vector>

namespace gpslab {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Nodes and weights on [-1, 1].
QuadratureRule gauss_legendre(int n);
// Rule for integrals of f(x) exp(-x^2) over the real line.
QuadratureRule gauss_hermite(int n);

// Legendre rule mapped to [a, b] and split into panels no wider than max_width.
QuadratureRule composite_legendre(double a, double b, int nodes_per_panel, double max_width);

}  // namespace gpslab
