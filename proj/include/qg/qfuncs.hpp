#ifndef QG_QFUNCS_HPP
#define QG_QFUNCS_HPP

#include <string>
#include <vector>

#include "qg/qcalc.hpp"

namespace qg {

// ---------------------------------------------------------------------------
// Parameter sets for the special-function families.  Each family is the
// eigenfunction family of a symmetric (half-line or doubly-infinite) Jacobi
// operator; see the recurrence coefficient accessors below.
// ---------------------------------------------------------------------------

/// Little q-Jacobi functions j_k(x; c,d; q,r), k in Z (doubly infinite).
struct LittleQJacobiParams {
  double c, d, r;
};

enum class ASCDirection { base_q, base_q_inverse };

/// Al-Salam-Chihara functions h_k(x; a,b; q) on the half line.  base_q
/// requires ab < 1; base_q_inverse requires ab > 1 and (after the a<->b
/// symmetry normalization) a/b > q.
struct ASCParams {
  double a, b;
  ASCDirection direction = ASCDirection::base_q;
};

/// Al-Salam-Carlitz II functions p^a_k on the half line, spectrum
/// {eps q^{-n}/sqrt(a) : n >= 0}; requires 0 < a < 1/q.
struct ASCIIParams {
  double a;
  int eps = +1;
};

/// Ciccoli-Koelink-Koornwinder functions V~_k^t(z), k in Z; c > 0, t != 0,
/// |t| > q^{1/2} for the implemented self-adjoint extension.
struct CKKParams {
  double c, t;
};

// Recurrence coefficients (a_k off-diagonal, b_k diagonal).
double lqj_coeff_a(long k, const LittleQJacobiParams& p, const QContext& ctx);
double lqj_coeff_b(long k, const LittleQJacobiParams& p, const QContext& ctx);
double asc_coeff_a(long k, const ASCParams& p, const QContext& ctx);
double asc_coeff_b(long k, const ASCParams& p, const QContext& ctx);
double asc2_coeff_a(long k, const ASCIIParams& p, const QContext& ctx);
double asc2_coeff_b(long k, const ASCIIParams& p, const QContext& ctx);
double ckk_coeff_a(long k, const CKKParams& p, const QContext& ctx);
double ckk_coeff_b(long k, const CKKParams& p, const QContext& ctx);

// ---------------------------------------------------------------------------
// Normalized atom eigenvectors.  The l2-normalized eigenvector of the family
// Jacobi operator at a discrete spectral point, over an adaptive index
// window.  Signs follow the defining-series conventions (component 0
// positive for the half-line families; series-matched for the
// doubly-infinite ones).
// ---------------------------------------------------------------------------
struct AtomVector {
  long k_min = 0;                 // index of v[0]
  std::vector<double> v;          // normalized components
  double eigenvalue = 0.0;        // mu(y) (LQJ/ASC) or z/x (ASCII/CKK)
  double boundary_residual = 0.0; // recurrence residual at the match point

  double at(long k) const {
    const long i = k - k_min;
    if (i < 0 || i >= static_cast<long>(v.size())) return 0.0;
    return v[static_cast<size_t>(i)];
  }
  long k_max() const { return k_min + static_cast<long>(v.size()) - 1; }
};

/// y is the branch representative of the atom, |y| < 1 for LQJ/ASC;
/// membership in the family atom grid is validated (DomainError otherwise).
AtomVector lqj_atom_vector(double y, const LittleQJacobiParams& p,
                           const QContext& ctx);
AtomVector asc_atom_vector(double y, const ASCParams& p, const QContext& ctx);
/// x = eps q^{-n}/sqrt(a), n >= 0.
AtomVector asc2_atom_vector(long n, const ASCIIParams& p, const QContext& ctx);
/// z in {-sqrt(c)/t q^k, k>=0} u {t/sqrt(c) q^k, k in Z}.
AtomVector ckk_atom_vector(double z, const CKKParams& p, const QContext& ctx);

// Pointwise accessors per the module operation signatures.
double little_q_jacobi(long k, const MuPoint& pt, const LittleQJacobiParams& p,
                       const QContext& ctx);
double al_salam_chihara(long k, const MuPoint& pt, const ASCParams& p,
                        const QContext& ctx);
double asc2(long k, double x, const ASCIIParams& p, const QContext& ctx);
double ckk(long k, double z, const CKKParams& p, const QContext& ctx);

/// Continuous q-Hermite polynomial H_k(x; base) via
/// 2 x H_k = H_{k+1} + (1 - base^k) H_{k-1}.
double q_hermite(long k, double x, double base);

// ---------------------------------------------------------------------------
// Band (continuous-spectrum) kernels.  For x = cos(theta) in (-1,1) the
// orthonormalized transform kernel g_k(x) = j_k(x) sqrt(W(x)) such that
// sum_k g_k(x) g_k(x') integrates against plain dx on [-1,1].  The density
// is recovered from the exact free asymptotics of the recurrence at the
// bounded end (the q-lattice coefficients reach their limits
// superexponentially fast, so the amplitude extraction is machine-exact).
// ---------------------------------------------------------------------------
std::vector<double> lqj_band_kernel(long k_min, long k_max, double theta,
                                    const LittleQJacobiParams& p,
                                    const QContext& ctx);
std::vector<double> asc_band_kernel(long k_max, double theta,
                                    const ASCParams& p, const QContext& ctx);

/// Band weight W(cos theta) with respect to dx on (-1,1); strictly positive
/// on theta in (0, pi).
double lqj_band_weight(double theta, const LittleQJacobiParams& p,
                       const QContext& ctx);
double asc_band_weight(double theta, const ASCParams& p, const QContext& ctx);

// Atom grids (exact index arithmetic): see spectral.hpp for the measure
// assembly; these helpers validate a candidate branch representative.
struct AtomLabel {
  int branch = 0;   // family-specific branch id
  long index = 0;   // exponent on the branch grid
  double y = 0.0;   // representative (|y|<1 for LQJ/ASC; spectral value else)
};
/// Recover (branch, index) of y on the family grid by log-domain index
/// matching; throws DomainError if y is off-grid.
AtomLabel lqj_atom_label(double y, const LittleQJacobiParams& p,
                         const QContext& ctx);
AtomLabel asc_atom_label(double y, const ASCParams& p, const QContext& ctx);
AtomLabel ckk_atom_label(double z, const CKKParams& p, const QContext& ctx);

// ---------------------------------------------------------------------------
// q-difference / contiguous lemma verification.  Both sides are evaluated
// independently at the given sample; returns |LHS - RHS|.
// ---------------------------------------------------------------------------
enum class LemmaId {
  J_REL,
  J_QD1,
  J_QD1C,
  J_QD2,
  ASC_REL,
  ASC_QD1,
  ASC_QD2,
  ASC_QD3,
  ASCII_QD,
  CKK_C1,
  CKK_C2,
  CKK_QD,
};

const char* lemma_name(LemmaId id);
LemmaId lemma_from_name(const std::string& name);

/// One concrete verification instance: a family parameter set, a spectral
/// point (branch representative), and a sequence index k.
struct LemmaCase {
  LemmaId id;
  double c = 0, d = 0, r = 0;  // LQJ
  double a = 0, b = 0;         // ASC / ASCII (a)
  double ckk_c = 0, ckk_t = 0; // CKK
  int eps = +1;                // ASCII
  double y = 0;                // branch representative / spectral value
  long k = 0;                  // sequence index
};

/// Enumerate at least `min_count` admissible cases (all evaluation points on
/// the respective atom grids).
std::vector<LemmaCase> sample_lemma_cases(LemmaId id, const QContext& ctx,
                                          int min_count);

/// |LHS - RHS| of the lemma identity at the case.
double lemma_residual(const LemmaCase& lc, const QContext& ctx);

}  // namespace qg

#endif  // QG_QFUNCS_HPP
