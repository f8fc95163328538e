#ifndef QG_SPECTRAL_HPP
#define QG_SPECTRAL_HPP

#include <Eigen/Dense>

#include <functional>
#include <variant>
#include <vector>

#include "qg/qfuncs.hpp"

namespace qg {

// ---------------------------------------------------------------------------
// Jacobi-operator abstraction over half-line and doubly-infinite index sets,
// finite truncations, an independent dense eigen-oracle, spectral measures
// (band + atoms) and the associated generalized Fourier transforms.
// ---------------------------------------------------------------------------

enum class Family { lqj, asc_q, asc_q_inverse, asc2, ckk };

using FamilyParams =
    std::variant<LittleQJacobiParams, ASCParams, ASCIIParams, CKKParams>;

/// Symmetric Jacobi operator J e_k = a_k e_{k+1} + b_k e_k + a_{k-1} e_{k-1}
/// on l2 of the half line (k >= 0) or of Z, with the family it came from.
struct JacobiOperatorSpec {
  bool half_line = true;
  Family family = Family::lqj;
  std::function<double(long)> a;  // off-diagonal; a_k > 0 on the window
  std::function<double(long)> b;  // diagonal
};

/// Builds the operator for the family, validating the parameter hypotheses
/// under which the implemented self-adjoint extension exists:
///   lqj:            0 < c < 1, d != 0, r != 0 (doubly infinite)
///   asc_q:          ab < 1 (half line, bounded)
///   asc_q_inverse:  a, b > 0, ab > 1, a/b > q (half line)
///   asc2:           0 < a < 1/q, eps = +-1 (half line)
///   ckk:            c > 0, |t| > sqrt(q) (doubly infinite)
/// Throws DomainError on violation or on a family/params mismatch.
JacobiOperatorSpec make_operator(Family f, const FamilyParams& p,
                                 const QContext& ctx);

/// Dense symmetric tridiagonal restriction to indices [k_min, k_max].
/// Throws DomainError if the window leaves the index set or if some a_k <= 0.
Eigen::MatrixXd truncate(const JacobiOperatorSpec& spec, long k_min,
                         long k_max);

struct EigenSystem {
  std::vector<double> values;  // ascending
  Eigen::MatrixXd vectors;     // column i is the eigenvector of values[i]
};

/// Dense symmetric eigensolver used as the independent brute-force oracle.
/// Postconditions (checked, throw std::runtime_error on failure):
/// ||M v - lambda v|| < 1e-10 ||M|| per pair and eigenvector orthonormality
/// to 1e-10.  Note the residual bound is relative to ||M||: for strongly
/// graded matrices the *relative* accuracy of the small eigenvalues is not
/// guaranteed -- use the Sturm bisection below for those.
EigenSystem eigen_oracle(const Eigen::MatrixXd& M);

// Sturm-sequence bisection on a symmetric tridiagonal (diag b_i, off a_i):
// machine-precision relative accuracy independent of grading.
/// Number of eigenvalues strictly below x (count of negative pivots of the
/// shifted LDL^T factorization).
long tridiag_count_below(const std::vector<double>& diag,
                         const std::vector<double>& off, double x);
/// i-th eigenvalue in ascending order, 0-based.
double tridiag_eigenvalue(const std::vector<double>& diag,
                          const std::vector<double>& off, long i);
/// Eigenvalue closest to x.
double tridiag_nearest_eigenvalue(const std::vector<double>& diag,
                                  const std::vector<double>& off, double x);
/// diag/off arrays of truncate(spec, k_min, k_max).
void tridiag_of(const JacobiOperatorSpec& spec, long k_min, long k_max,
                std::vector<double>& diag, std::vector<double>& off);

/// One point of the discrete spectrum, tagged by its index-arithmetic origin.
struct SpectralAtom {
  double value = 0.0;  // spectral point: mu(y) for lqj/asc_*, x for asc2/ckk
  int branch = 0;      // family-specific branch id (1-based)
  long index = 0;      // exponent on the branch grid
  double y = 0.0;      // branch representative (|y| < 1 for lqj/asc_q)
};

struct SpectralMeasure {
  bool has_band = false;  // band interval is [-1, 1] when present
  std::vector<SpectralAtom> atoms;
  /// Band weight w.r.t. dx at x in (-1, 1); only set when has_band.
  std::function<double(double)> band_density;
};

/// Assembles the spectral measure by exact index arithmetic on the family's
/// atom grids.  Infinite branches are listed up to max_per_branch entries
/// (ordered outward from the band / origin of the grid).
SpectralMeasure spectral_atoms(Family f, const FamilyParams& p,
                               const QContext& ctx, long max_per_branch = 40);

/// Finitely supported real coefficient vector: u_{k_min + i} = u[i].
struct Coeffs {
  long k_min = 0;
  std::vector<double> u;

  double at(long k) const {
    const long i = k - k_min;
    if (i < 0 || i >= static_cast<long>(u.size())) return 0.0;
    return u[static_cast<size_t>(i)];
  }
  long k_max() const { return k_min + static_cast<long>(u.size()) - 1; }
};

/// (F u)(atom) = sum_k u_k f_k(atom) with f the orthonormalized family.
double transform_at_atom(const Coeffs& u, Family f, const FamilyParams& p,
                         const SpectralAtom& atom, const QContext& ctx);

/// (F u)(cos theta) on the band, against plain dx on (-1, 1).
double transform_band(const Coeffs& u, Family f, const FamilyParams& p,
                      double theta, const QContext& ctx);

/// <u, v> through the spectral measure: band integral (adaptive Gauss panels
/// in theta) plus adaptively enumerated atom sums.  Equals the l2 inner
/// product by Parseval.
double spectral_inner_product(const Coeffs& u, const Coeffs& v, Family f,
                              const FamilyParams& p, const QContext& ctx);

/// Adaptive Gauss quadrature of f on [a, b]: panels are bisected until the
/// embedded error estimate is below tol per panel.
double adaptive_gauss(const std::function<double(double)>& f, double a,
                      double b, double tol);

}  // namespace qg

#endif  // QG_SPECTRAL_HPP
