#ifndef QG_QUADRATURE_HPP
#define QG_QUADRATURE_HPP

#include <vector>

namespace qg {

/// Gauss-Legendre nodes and weights on [a, b].
struct Quadrature {
  std::vector<double> x, w;
};

Quadrature gauss_legendre(int n, double a, double b);

}  // namespace qg

#endif  // QG_QUADRATURE_HPP
