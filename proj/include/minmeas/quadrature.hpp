#pragma once

#include <vector>

namespace minmeas::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree
/// 2n-1. Nodes ascending.
Rule gauss_legendre(int n);

/// Same rule mapped affinely onto [a, b].
Rule gauss_legendre(int n, double a, double b);

}  // namespace minmeas::quad
