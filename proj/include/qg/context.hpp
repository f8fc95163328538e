#ifndef QG_CONTEXT_HPP
#define QG_CONTEXT_HPP

#include <complex>
#include <stdexcept>
#include <string>

namespace qg {

using Complex = std::complex<double>;

/// Thrown when an argument lies outside the mathematical domain of an
/// operation (off-grid spectral point, inadmissible parameters, ...).
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when an evaluation hits a pole (vanishing q-Pochhammer factor in a
/// denominator, q-gamma at a non-positive integer, ...).
struct PoleError : std::runtime_error {
  explicit PoleError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when an exponent q^z leaves the representable range.
struct OverflowError : std::runtime_error {
  explicit OverflowError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a lattice operator pushes coefficients outside the active
/// truncation window.
struct BoundaryError : std::runtime_error {
  explicit BoundaryError(const std::string& what) : std::runtime_error(what) {}
};

/// Deformation parameter and the tolerances that govern every series and
/// identity check.  q is restricted to (0,1); default tolerances are tuned
/// for q <= 0.95 (products converge slowly as q -> 1).
struct QContext {
  double q;
  double tol_series = 1e-15;  // relative truncation tolerance for series/products
  double tol_check = 1e-10;   // absolute tolerance for identity verification

  explicit QContext(double q_, double tol_series_ = 1e-15,
                    double tol_check_ = 1e-10)
      : q(q_), tol_series(tol_series_), tol_check(tol_check_) {
    if (!(q > 0.0 && q < 1.0))
      throw DomainError("QContext: q must lie in (0,1), got " +
                        std::to_string(q_));
    if (!(tol_series > 0.0) || !(tol_check > 0.0))
      throw DomainError("QContext: tolerances must be positive");
  }

  /// q^k for integer k (exact repeated squaring via std::pow).
  double qpow(double e) const;
};

}  // namespace qg

#endif  // QG_CONTEXT_HPP
