#pragma once

#include <vector>

namespace qsp {

struct GaussLegendre {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

// Nodes and weights computed once per order via Newton iteration on the
// Legendre recurrence, then cached.  Thread safe.
const GaussLegendre& gauss_legendre(int n);

}  // namespace qsp
