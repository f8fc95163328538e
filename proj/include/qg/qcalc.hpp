#ifndef QG_QCALC_HPP
#define QG_QCALC_HPP

#include <vector>

#include "qg/context.hpp"

namespace qg {

/// A spectral point mu = (y + 1/y)/2 together with its branch representative.
/// Atoms carry a real |y| <= 1; band points carry y = exp(i theta) with
/// mu = cos(theta) in [-1,1].
struct MuPoint {
  enum class Kind { atom, band };
  Complex mu;
  Complex y;  // |y| <= 1 (atom, real) or unit modulus (band)
  Kind kind;
};

/// q-number [z]_q = (q^z - q^{-z})/(q - q^{-1}).
Complex q_number(Complex z, const QContext& ctx);

/// Finite q-Pochhammer (z;q)_n, n >= 0: product of n factors (1 - z q^k).
/// Negative n uses (z;q)_{-n} = 1/(z q^{-n}; q)_n and throws PoleError when a
/// denominator factor vanishes.
Complex q_pochhammer(Complex z, long n, const QContext& ctx);

/// Infinite product (z;q)_inf, truncated once |z| q^K drops two decades below
/// tol_series, with a first-order log-tail correction exp(z q^K/(1-q)) ~ ...
Complex q_pochhammer_inf(Complex z, const QContext& ctx);

/// Principal-branch logarithm of (z;q)_inf; avoids underflow for q close
/// to 1 where the product itself is sub-denormal.
Complex log_q_pochhammer_inf(Complex z, const QContext& ctx);

/// Product over several arguments: (z1,...,zr; q)_inf.
Complex q_pochhammer_inf(const std::vector<Complex>& zs, const QContext& ctx);

/// q-gamma function (1-q)^{1-z} (q;q)_inf / (q^z;q)_inf.
Complex q_gamma(Complex z, const QContext& ctx);

/// Basic hypergeometric series r_phi_s(a; b; q, z) with the
/// ((-1)^n q^{n(n-1)/2})^{1+s-r} convention.  Terminates exactly when a
/// numerator factor (1 - a_i q^n) vanishes to machine precision; otherwise
/// stops after three consecutive sub-tolerance terms.  Throws DomainError in
/// the divergent regime (r > s+1, or r == s+1 with |z| >= 1 and no
/// terminating parameter) and PoleError when a denominator Pochhammer factor
/// vanishes before termination.
Complex basic_hypergeometric(const std::vector<Complex>& a,
                             const std::vector<Complex>& b, Complex z,
                             const QContext& ctx);

/// mu-map and its branch-resolved inverse.
MuPoint mu_point(Complex y);
/// Inverse branch: kind=atom requires |x| >= 1 and returns real |y| <= 1;
/// kind=band requires x in [-1,1] and returns y = exp(i theta), theta in
/// [0,pi].
MuPoint mu_inverse(double x, MuPoint::Kind kind);

inline double mu_of(double y) { return 0.5 * (y + 1.0 / y); }

}  // namespace qg

#endif  // QG_QCALC_HPP
