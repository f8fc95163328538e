#ifndef QG_QGROUP_HPP
#define QG_QGROUP_HPP

#include <map>
#include <vector>

#include "qg/qfuncs.hpp"

namespace qg {

// ---------------------------------------------------------------------------
// Truncated-lattice realization of the quantum group SU_q(1,1) extended by
// its normalizer: the Cartan basis of the L2 space with the coordinate and
// enveloping-algebra actions, the twisted primitive and spherical elements,
// the Iwasawa and Gauss eigenbases obtained by chained special-function
// transforms, the Casimir actions, the exact atom grids of the associated
// spectra, and the extended quantum Poincare disk.
//
// All lattice bookkeeping is exact integer arithmetic on exponents; floating
// point enters only when coefficients are evaluated.
// ---------------------------------------------------------------------------

// ---- Cartan basis -------------------------------------------------------

/// Basis label delta^{eps}_{n, x, m} with x = sign * q^{2k}.  The grid of x
/// is I_{q^2} = {-q^{-2j} : j > 0} u {q^{2j} : j in Z}: the negative branch
/// is encoded by sign = -1 with k < 0.
struct CartanIndex {
  int eps = +1;   // superscript, +1 or -1
  long n = 0;
  int sign = +1;  // sign of x
  long k = 0;     // x = sign * q^{2k}; sign = -1 requires k < 0
  long m = 0;

  auto operator<=>(const CartanIndex&) const = default;
};

/// n == m (mod 2); x on the grid; eps * q^{n+m} * x in I_{q^2}.
bool cartan_valid(const CartanIndex& idx);
void check_cartan(const CartanIndex& idx);  // throws DomainError if invalid
double cartan_x(const CartanIndex& idx, const QContext& ctx);

/// Active truncation bounds: |n| <= n_half, |m| <= m_half, |k| <= k_half.
/// "Interior" shrinks every bound by margin; operator identities are only
/// asserted on interior indices.
struct Window {
  long n_half = 64;
  long m_half = 64;
  long k_half = 64;
  long margin = 6;
  /// An operator application that drops an out-of-window term with relative
  /// weight above this bound raises BoundaryError; smaller spill is added to
  /// escaped_mass.  Expansion-heavy computations with slowly decaying tails
  /// may loosen it.
  double boundary_tol = 1e-8;

  bool contains(const CartanIndex& idx) const;
  bool interior(const CartanIndex& idx) const;
};

/// Finitely supported real vector over the Cartan lattice.  Coefficient mass
/// that an operator or expansion pushes outside the window is accumulated in
/// escaped_mass (squared l2 mass) so truncation error stays auditable.
/// Expansions labeled by a band (continuous-spectrum) point are only
/// delta-normalized; they carry generalized = true and are excluded from
/// orthonormality statements.
struct TruncatedState {
  std::map<CartanIndex, double> terms;
  Window window;
  double escaped_mass = 0.0;
  bool generalized = false;

  /// Adds coeff at idx, dropping (and accounting) out-of-window terms.
  void add(const CartanIndex& idx, double coeff);
  double at(const CartanIndex& idx) const;
  double norm() const;
};

TruncatedState basis_state(const CartanIndex& idx, const Window& w = {});
double inner(const TruncatedState& u, const TruncatedState& v);
TruncatedState scale(double a, const TruncatedState& u);
/// a*x + y (windows must agree on bounds).
TruncatedState axpy(double a, const TruncatedState& x,
                    const TruncatedState& y);

// ---- Coordinate algebra on the Cartan basis ------------------------------

enum class CoordGen { alpha, gamma, alpha_star, gamma_star, e };

/// alpha . delta = sqrt(sign x + |x|) delta_{n+1, q^{-2}x, m+1}
/// gamma . delta = sign(x) sqrt|x|    delta_{n-1, x, m+1}
/// e     . delta = sign(x)            delta
/// and the conjugate-transpose rules for the starred generators.  A term
/// pushed over the window edge with relative weight above 1e-8 raises
/// BoundaryError naming the offending index; smaller spill is accumulated.
TruncatedState coord_action_cartan(CoordGen g, const TruncatedState& s,
                                   const QContext& ctx);

// ---- Enveloping algebra --------------------------------------------------

enum class UEAGen { K, Kinv, E, F };
enum class Side { left, right };

/// Left action: K.delta = q^{m/2} delta and the two-term E/F shifts in m
/// (with the 1/(q - q^{-1}) prefactors).  Right action: delta.K =
/// q^{-n/2} delta and the two-term shifts in n, each multiplied by e.
TruncatedState uea_action(UEAGen g, Side side, const TruncatedState& s,
                          const QContext& ctx);

// ---- Dynamical parameters ------------------------------------------------

/// Both |s| and |t| must exceed q.  The quantum Gauss specialization lives
/// on the grids s in -q^{-Z>=0}, t in q^{-Z>=0}.
struct DynamicalParams {
  double s = -1.0;
  double t = 1.0;
};
void check_dynamical(const DynamicalParams& p, const QContext& ctx);

// ---- Twisted primitive and spherical elements ----------------------------

enum class TwistedWhich { Yt_left, Ys_right };

/// Symmetrized twisted primitives
///   Yt_left  = (1/2)[(q-q^{-1}) K^{-1} Y_t + (t + t^{-1})]  (left action)
///   Ys_right = (1/2)[(q-q^{-1}) Y_s K - (s + s^{-1})]       (right action)
/// with Y_s = q^{1/2}E - q^{-1/2}F - (s+s^{-1})(K-K^{-1})/(q-q^{-1}).
/// The closed tridiagonal-in-m / tridiagonal-in-n forms.
TruncatedState twisted_primitive(TwistedWhich which, const DynamicalParams& p,
                                 const TruncatedState& s, const QContext& ctx);
/// Same element assembled from uea_action primitives (independent oracle).
TruncatedState twisted_primitive_composed(TwistedWhich which,
                                          const DynamicalParams& p,
                                          const TruncatedState& s,
                                          const QContext& ctx);

/// Dynamical coordinate elements at parameters (s, t):
///   alpha_st = alpha + q t^{-1} e gamma* - s^{-1} gamma - s^{-1}t^{-1} e alpha*
///   gamma_st = -s^{-1} alpha - q s^{-1}t^{-1} e gamma* + gamma + t^{-1} e alpha*
/// plus their adjoints, applied at the Cartan level.
TruncatedState coord_alpha_st(const DynamicalParams& p, const TruncatedState& s,
                              const QContext& ctx);
TruncatedState coord_gamma_st(const DynamicalParams& p, const TruncatedState& s,
                              const QContext& ctx);
TruncatedState coord_alpha_st_star(const DynamicalParams& p,
                                   const TruncatedState& s, const QContext& ctx);
TruncatedState coord_gamma_st_star(const DynamicalParams& p,
                                   const TruncatedState& s, const QContext& ctx);

enum class SphericalWhich { rho_inf_t, rho_st, rho_st_tilde };

/// rho_inf_t: closed tridiagonal action
///   t rho_{inf,t} . delta = q^{-1} x sqrt(1+x^{-1}) delta_{n,q^{-2}x,m+2}
///     + (t+t^{-1}) x delta + q x sqrt(1+q^{-2}x^{-1}) delta_{n,q^2x,m-2}.
/// rho_st: e gamma*_{s,qt} gamma_{s,qt} - s^{-2} - q^{-2}t^{-2} composed from
/// the coordinate generators.  rho_st_tilde = -(1/2) q s t rho_st.
TruncatedState spherical_action(SphericalWhich which, const DynamicalParams& p,
                                const TruncatedState& s, const QContext& ctx);

// ---- Iwasawa / Gauss labels ---------------------------------------------

/// Point of sigma(rho_{inf,t}) = {-q^{-2j} : j>0} u {-t^{-2}q^{2j} : j>=0}
///                             u {q^{2j} : j in Z}.
enum class XBranch { neg_q, neg_t, pos };
struct XPoint {
  XBranch branch = XBranch::pos;
  long k = 0;  // neg_q: x = -q^{-2k}, k > 0;  neg_t: x = -t^{-2} q^{2k},
               // k >= 0;  pos: x = q^{2k}, k in Z
};
int e_of(const XPoint& x);  // e(x): -1 on neg_q, +1 otherwise
double x_value(const XPoint& x, double t, const QContext& ctx);

/// Spectral label for a twisted-primitive eigenvalue mu(xi), where
/// xi = sgn * p^{ppow} * q^m for the dynamical parameter p (t on the left,
/// s on the right), or a band point xi = e^{i theta} with eigenvalue
/// cos(theta).
struct SpectralLabel {
  bool band = false;
  double theta = 0.0;
  int sgn = +1;
  int ppow = -1;
  long m = 0;

  auto operator<=>(const SpectralLabel&) const = default;
};
double label_y(const SpectralLabel& l, double p, const QContext& ctx);
double label_mu(const SpectralLabel& l, double p, const QContext& ctx);

/// Eigenvector label of the Iwasawa decomposition: joint eigenvector of
/// rho_{inf,t} (eigenvalue x), the left twisted primitive (eigenvalue
/// mu(xi)) and the right K action (eigenvalue q^{-n/2}).
struct IwasawaIndex {
  int eps = +1;
  long n = 0;
  XPoint x;
  SpectralLabel xi;
  DynamicalParams st;  // only t participates at this stage
};

/// Atom of sigma(rho~_st) with its subspace tags.  Branch grids:
///   U:     y =  q^{1+2k} s^{-1} t^{-1},  k >= 0            e = -1, kappa = +1
///   V:     y =  q^{-1-2k} s^{-1} t,      k >= 0, |y| < 1   e = +1, kappa = -1
///   W_pos: y =  q^{-1-2k} s t^{-1},      k >= 0, |y| < 1   e = +1, kappa = +1
///   W_neg: y = -q^{1+2k} s^{-1} t^{-1},  k in Z, |y| < 1   e = +1, kappa = +1
/// Band points carry kappa as an opaque multiplicity tag.
enum class YBranch { U, V, W_pos, W_neg };
struct YLabel {
  bool band = false;
  double theta = 0.0;
  int band_kappa = +1;
  YBranch branch = YBranch::W_pos;
  long k = 0;

  auto operator<=>(const YLabel&) const = default;
};
int e_of(const YLabel& y);
int kappa_of(const YLabel& y);
double y_value(const YLabel& y, const DynamicalParams& p, const QContext& ctx);
double y_mu(const YLabel& y, const DynamicalParams& p, const QContext& ctx);

/// Joint eigenvector label of the Gauss decomposition: eta, y, xi label the
/// eigenvalues of the right twisted primitive, rho~_st and the left twisted
/// primitive.
struct GaussIndex {
  int eps = +1;
  SpectralLabel eta;  // uses parameter s
  YLabel y;
  SpectralLabel xi;   // uses parameter t
  DynamicalParams st;
};

// ---- Expansions into the Cartan basis ------------------------------------

/// Eigenvector g^{eps,t}_{n,x,m} of rho_{inf,t} (Al-Salam-Carlitz II chain
/// for e(x) = -1, two-sided CKK chain for e(x) = +1).
TruncatedState pre_iwasawa_g(int eps, long n, const XPoint& x, long m,
                             const DynamicalParams& p, const QContext& ctx,
                             const Window& w = {});
/// Full Iwasawa eigenvector (joint with the left twisted primitive); band
/// xi yields a generalized (delta-normalized) state.
TruncatedState iwasawa_expand(const IwasawaIndex& idx, const QContext& ctx,
                              const Window& w = {});
/// Eigenvector h^{eps,(st)}_{n,y,xi} of rho~_st over Iwasawa labels,
/// flattened to the Cartan basis.
TruncatedState pre_gauss_h(int eps, long n, const YLabel& y,
                           const SpectralLabel& xi, const DynamicalParams& p,
                           const QContext& ctx, const Window& w = {});
/// Full Gauss eigenvector; the index must satisfy the non-vanishing
/// constraints (DomainError otherwise, naming the violated case).
TruncatedState gauss_expand(const GaussIndex& idx, const QContext& ctx,
                            const Window& w = {});

// ---- Decomposed coordinate actions (single-term closed forms) ------------

struct IwasawaAction {
  double coeff = 0.0;
  IwasawaIndex image;  // carries the shifted dynamical parameters
};
/// alpha_{inf,qt} . delta^{(inf,t)}_{n,x,xi}
///   = -e(x) sqrt(e(x)(1+x)) delta^{(inf,qt)}_{n+1, q^{-2}x, xi}
IwasawaAction coord_alpha_iwasawa(const IwasawaIndex& idx, const QContext& ctx);
/// gamma_{inf,qt} . delta^{(inf,t)}_{n,x,xi}
///   = e(x) sqrt(e(x)(q^{-2}t^{-2}+x)) delta^{(inf,qt)}_{n-1, x, xi}
IwasawaAction coord_gamma_iwasawa(const IwasawaIndex& idx, const QContext& ctx);

struct GaussAction {
  double coeff = 0.0;
  GaussIndex image;
};
/// alpha_{s,qt} . delta^{(st)} = sqrt(e(y)(1 + q^{-2}s^{-2}t^{-2}
///   - 2 q^{-1}s^{-1}t^{-1} mu(y))) delta^{(qs,qt)}
GaussAction coord_alpha_gauss(const GaussIndex& idx, const QContext& ctx);
/// gamma_{s,qt} . delta^{(st)} = e(y) sqrt(e(y)(s^{-2} + q^{-2}t^{-2}
///   - 2 q^{-1}s^{-1}t^{-1} mu(y))) delta^{(q^{-1}s,qt)}
GaussAction coord_gamma_gauss(const GaussIndex& idx, const QContext& ctx);

// ---- Spectra and non-vanishing constraints -------------------------------

/// Discrete part of the total twisted-primitive spectrum for parameter p:
/// labels with xi = p^{-1} q^m (eigenvalue mu(xi)) and xi = -p q^m
/// (eigenvalue -mu(p q^m)), both filtered to |xi| < 1, |m| bounded by cap.
std::vector<SpectralLabel> twisted_total_atoms(double p, const QContext& ctx,
                                               long cap = 40);

/// Conditional atoms of the left twisted primitive on the chain through
/// (n, x) with superscript eps; rel = eps * e(x) selects the case.
std::vector<SpectralLabel> yt_conditional_atoms(int eps, long n,
                                                const XPoint& x,
                                                const DynamicalParams& p,
                                                const QContext& ctx,
                                                long cap = 40);

/// Discrete spectrum of rho~_st (atom labels on the U/V/W grids).
std::vector<YLabel> rho_st_atoms(const DynamicalParams& p, const QContext& ctx,
                                 long cap = 40);

/// Conditional atoms of the right twisted primitive at fixed (y, xi) and
/// superscript eps, following the three printed case splits.
std::vector<SpectralLabel> ys_conditional_atoms(int eps, const YLabel& y,
                                                const SpectralLabel& xi,
                                                const DynamicalParams& p,
                                                const QContext& ctx,
                                                long cap = 40);

/// Non-vanishing of the intermediate basis h^{eps,(st)}_{n,y,xi} for atom xi.
bool h_nonzero(int eps, long n, const YLabel& y, const SpectralLabel& xi,
               const DynamicalParams& p, const QContext& ctx);
/// Non-vanishing of the Gauss eigenvector delta^{eps,(st)}_{eta,y,xi}.
bool gauss_nonzero(const GaussIndex& idx, const QContext& ctx);

// ---- Casimir -------------------------------------------------------------

/// Symmetrized Casimir Omega~ = (1/2)(q-q^{-1})^2 Omega + 1 in the Cartan
/// basis (closed three-term form in the x exponent).
TruncatedState casimir_cartan(const TruncatedState& s, const QContext& ctx);
/// The same element assembled from enveloping-algebra primitives,
/// Omega = (q^{-1}K^{-2} + q K^2 - 2)/(q-q^{-1})^2 + FE.
TruncatedState casimir_composed(Side side, const TruncatedState& s,
                                const QContext& ctx);

/// Three-term coefficients of Omega~ on a Gauss eigenvector:
///   Omega~ . delta_{eta,y,xi} = A(y) delta_{eta, q^{-2}y, xi}
///     + B(y) delta + A(y^{-1}) delta_{eta, q^2 y, xi}.
struct CasimirGaussCoeffs {
  double A_down = 0.0;  // multiplies the q^{-2} y neighbor
  double B = 0.0;
  double A_up = 0.0;    // multiplies the q^2 y neighbor
};
/// Requires mu(y) discrete with both neighbors q^{+-2} y on the spectrum;
/// throws DomainError at boundary spectral points where the three-term form
/// degenerates.
CasimirGaussCoeffs casimir_gauss(const GaussIndex& idx, const QContext& ctx);
/// Neighbor label with y -> q^{2*dir} y (dir = +1 or -1); DomainError if the
/// shifted point leaves the discrete spectrum.
GaussIndex gauss_shift_y(const GaussIndex& idx, int dir, const QContext& ctx);

/// Askey-Wilson coefficient psi(y) of the rescaled Casimir q-difference form
///   -q s eps eta (q-q^{-1})^2 Omega
///     = psi(y)(T_{q^2} - 1) + psi(y^{-1})(T_{q^{-2}} - 1) + (1+q s eps eta)^2
double askey_wilson_psi(double yv, const GaussIndex& idx, const QContext& ctx);
/// Rescaling weight of the non-normalized Askey-Wilson eigenbasis at y.
double gauss_rescale_weight(double yv, const GaussIndex& idx,
                            const QContext& ctx);

// ---- Quantum Poincare disk ----------------------------------------------

/// z(x, theta) = e^{i theta} (1 + x^{-1})^{-1/2} for x in I_{q^2}; the
/// positive branch fills the inner disk |z| < 1, the negative branch the
/// outer annulus |z| > 1 down to the maximal ring at x = -q^{-2}.
struct DiskPoint {
  double re = 0.0;
  double im = 0.0;
  double x = 0.0;
  bool inner = true;
};
std::vector<DiskPoint> poincare_disk_points(long theta_count, long k_min,
                                            long k_max, const QContext& ctx);

}  // namespace qg

#endif  // QG_QGROUP_HPP
