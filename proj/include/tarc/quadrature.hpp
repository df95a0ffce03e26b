#pragma once

#include <vector>

namespace tarc {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss–Legendre rule mapped to [0, 1]. Rules are cached per n.
const QuadratureRule& gauss_legendre_unit(int n);

}  // namespace tarc
