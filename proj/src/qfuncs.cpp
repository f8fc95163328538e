#include "qg/qfuncs.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace qg {

namespace {

constexpr double kRescaleLimit = 1e250;

// value = sign * exp(log_abs); sign in {-1,0,+1}
struct SignedLog {
  double log_abs;
  int sign;
};

SignedLog signed_log_poch_inf(double z, const QContext& ctx) {
  SignedLog out{0.0, 1};
  double zqk = z;
  const double cutoff = ctx.tol_series * 1e-2;
  int guard = 0;
  for (int k = 0; k < 1000000; ++k) {
    if (std::abs(zqk) < cutoff && ++guard >= 3) break;
    const double f = 1.0 - zqk;
    if (f == 0.0) return {0.0, 0};
    out.log_abs += std::log(std::abs(f));
    if (f < 0.0) out.sign = -out.sign;
    zqk *= ctx.q;
  }
  out.log_abs += -zqk / (1.0 - ctx.q);
  return out;
}

double checked_sqrt(double x, const char* what) {
  if (x < -1e-12 * (1.0 + std::abs(x)))
    throw DomainError(std::string("negative radicand in ") + what);
  return std::sqrt(std::max(x, 0.0));
}

// ---------------------------------------------------------------------------
// Recurrence sweeps.  a(k) is the off-diagonal linking k and k+1, b(k) the
// diagonal.  All sweeps rescale in place when entries threaten overflow.
// ---------------------------------------------------------------------------
using CoeffFn = std::function<double(long)>;

void rescale_all(std::vector<double>& v, double s) {
  for (double& x : v) x *= s;
}

// Backward (decaying at the top end) sweep from k_top down to k_bottom.
// Returns components indexed v[k - k_bottom].
std::vector<double> sweep_down(const CoeffFn& a, const CoeffFn& b, double x,
                               long k_bottom, long k_top) {
  const size_t n = static_cast<size_t>(k_top - k_bottom + 1);
  std::vector<double> v(n, 0.0);
  v[n - 1] = 1e-280;  // seed; absolute scale is irrelevant
  double above = 0.0; // v_{k_top+1}
  for (long k = k_top; k > k_bottom; --k) {
    const size_t i = static_cast<size_t>(k - k_bottom);
    const double vk = v[i];
    const double next = ((x - b(k)) * vk - a(k) * above) / a(k - 1);
    if (std::abs(next) > kRescaleLimit) {
      rescale_all(v, 1.0 / kRescaleLimit);
      v[i - 1] = next / kRescaleLimit;
      above = vk / kRescaleLimit;
    } else {
      v[i - 1] = next;
      above = vk;
    }
  }
  return v;
}

// Forward (decaying at the bottom end) sweep from k_bottom up to k_top.
std::vector<double> sweep_up(const CoeffFn& a, const CoeffFn& b, double x,
                             long k_bottom, long k_top) {
  const size_t n = static_cast<size_t>(k_top - k_bottom + 1);
  std::vector<double> v(n, 0.0);
  v[0] = 1e-280;
  double below = 0.0;  // v_{k_bottom-1}
  for (long k = k_bottom; k < k_top; ++k) {
    const size_t i = static_cast<size_t>(k - k_bottom);
    const double vk = v[i];
    const double next = ((x - b(k)) * vk - a(k - 1) * below) / a(k);
    if (std::abs(next) > kRescaleLimit) {
      rescale_all(v, 1.0 / kRescaleLimit);
      v[i + 1] = next / kRescaleLimit;
      below = vk / kRescaleLimit;
    } else {
      v[i + 1] = next;
      below = vk;
    }
  }
  return v;
}

void l2_normalize(std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (m == 0.0) throw DomainError("eigenvector collapsed to zero");
  // pre-scale by the max component so the squares cannot underflow
  double s = 0.0;
  for (double& x : v) {
    x /= m;
    s += x * x;
  }
  s = std::sqrt(s);
  for (double& x : v) x /= s;
}

// Half-line atom eigenvector.  The forward sweep from k = 0 encodes the
// boundary row exactly (v_{-1} = 0) and is stable below the turning point
// k_star, where the true solution grows; the backward Miller sweep is stable
// above it.  The two are matched near k_star, and the residual of the
// recurrence rows at the junction is reported.  Sign: component 0 positive
// (it is positive in the forward sweep by construction).
AtomVector half_line_atom(const CoeffFn& a, const CoeffFn& b, double x,
                          long k_top, long k_star) {
  constexpr long kOverlap = 16;
  const long up_top = std::min(k_top, std::max<long>(2, k_star + kOverlap));
  const long down_bottom =
      std::max<long>(0, std::min(k_top - 2, k_star - kOverlap));
  std::vector<double> up = sweep_up(a, b, x, 0, up_top);
  std::vector<double> down = sweep_down(a, b, x, down_bottom, k_top);
  l2_normalize(up);
  l2_normalize(down);
  auto up_at = [&](long k) -> double {
    return k <= up_top ? up[static_cast<size_t>(k)] : 0.0;
  };
  auto down_at = [&](long k) -> double {
    return k >= down_bottom ? down[static_cast<size_t>(k - down_bottom)] : 0.0;
  };
  long best = -1;
  double best_mag = -1.0;
  for (long k = down_bottom; k <= up_top; ++k) {
    const double m = std::abs(up_at(k) * down_at(k));
    if (m > best_mag) {
      best_mag = m;
      best = k;
    }
  }
  if (best_mag <= 0.0)
    throw DomainError("half-line eigenvector: no overlap between sweeps");
  const double lam = up_at(best) / down_at(best);
  std::vector<double> v(static_cast<size_t>(k_top) + 1);
  for (long k = 0; k <= k_top; ++k)
    v[static_cast<size_t>(k)] = (k <= best) ? up_at(k) : lam * down_at(k);
  double res = 0.0;
  for (long k = std::max<long>(1, best); k <= best + 1 && k < k_top; ++k) {
    const size_t i = static_cast<size_t>(k);
    const double row =
        a(k) * v[i + 1] + b(k) * v[i] + a(k - 1) * v[i - 1] - x * v[i];
    const double scale = (std::abs(a(k)) + std::abs(b(k)) + std::abs(x)) *
                         std::max({std::abs(v[i - 1]), std::abs(v[i]),
                                   std::abs(v[i + 1]), 1e-300});
    res = std::max(res, std::abs(row) / scale);
  }
  l2_normalize(v);
  size_t lead = 0;
  while (lead < v.size() && v[lead] == 0.0) ++lead;
  if (lead < v.size() && v[lead] < 0.0) rescale_all(v, -1.0);
  AtomVector out;
  out.k_min = 0;
  out.v = std::move(v);
  out.eigenvalue = x;
  out.boundary_residual = res;
  return out;
}

// Forward-only atom eigenvector.  Valid when the solution fixed by the
// lower boundary (decay at -infinity, or the v_{-1} = 0 row for half-line
// families) is the *dominant* one of the two square-summable asymptotic
// solutions at +infinity: the recurrence is then stable upward everywhere
// and no backward Miller sweep is needed.  This is the situation for the
// families whose recurrence is in the limit-circle regime at +infinity with
// the labeled eigenfunction decaying at the slower of the two geometric
// rates; a backward sweep would instead lock onto the faster-decaying
// solution, which belongs to a different self-adjoint extension.
AtomVector forward_only_atom(const CoeffFn& a, const CoeffFn& b, double x,
                             long k_low, long k_high) {
  std::vector<double> v = sweep_up(a, b, x, k_low, k_high);
  l2_normalize(v);
  size_t lead = 0;
  while (lead < v.size() && v[lead] == 0.0) ++lead;
  if (lead < v.size() && v[lead] < 0.0) rescale_all(v, -1.0);
  AtomVector out;
  out.k_min = k_low;
  out.v = std::move(v);
  out.eigenvalue = x;
  out.boundary_residual = 0.0;
  return out;
}

// Doubly-infinite atom eigenvector: two Miller sweeps matched where the
// product of magnitudes peaks; the cross-match recurrence row is the
// reported residual.  Each sweep only runs a little past the turning point
// k_star: carrying it further through the opposite decay region lets its
// rounding noise grow until the overflow rescales wipe out the valid part.
AtomVector doubly_infinite_atom(const CoeffFn& a, const CoeffFn& b, double x,
                                long k_low, long k_high, long k_star) {
  constexpr long kOverlap = 16;
  const long up_top = std::min(k_high, std::max(k_low + 2, k_star + kOverlap));
  const long down_bottom =
      std::max(k_low, std::min(k_high - 2, k_star - kOverlap));
  std::vector<double> up = sweep_up(a, b, x, k_low, up_top);
  std::vector<double> down = sweep_down(a, b, x, down_bottom, k_high);
  l2_normalize(up);
  l2_normalize(down);
  const size_t n = static_cast<size_t>(k_high - k_low + 1);
  auto up_at = [&](long k) -> double {
    return k <= up_top ? up[static_cast<size_t>(k - k_low)] : 0.0;
  };
  auto down_at = [&](long k) -> double {
    return k >= down_bottom ? down[static_cast<size_t>(k - down_bottom)] : 0.0;
  };
  long best = 0;
  double best_mag = -1.0;
  for (long k = std::max(k_low + 1, down_bottom); k < std::min(k_high, up_top);
       ++k) {
    const double m = std::abs(up_at(k) * down_at(k));
    if (m > best_mag) {
      best_mag = m;
      best = k;
    }
  }
  if (best_mag <= 0.0)
    throw DomainError("doubly-infinite eigenvector: no overlap between sweeps");
  const double lam = up_at(best) / down_at(best);
  std::vector<double> v(n);
  for (long k = k_low; k <= k_high; ++k)
    v[static_cast<size_t>(k - k_low)] =
        (k <= best) ? up_at(k) : lam * down_at(k);
  // Residual of the recurrence row at the junction, relative to local scale.
  const long km = best;
  double res = 0.0;
  for (long k = km; k <= km + 1 && k - 1 > k_low && k + 1 < k_high; ++k) {
    const size_t i = static_cast<size_t>(k - k_low);
    const double row =
        a(k) * v[i + 1] + b(k) * v[i] + a(k - 1) * v[i - 1] - x * v[i];
    const double scale = (std::abs(a(k)) + std::abs(b(k)) + std::abs(x)) *
                         std::max({std::abs(v[i - 1]), std::abs(v[i]),
                                   std::abs(v[i + 1]), 1e-300});
    res = std::max(res, std::abs(row) / scale);
  }
  l2_normalize(v);
  AtomVector out;
  out.k_min = k_low;
  out.v = std::move(v);
  out.eigenvalue = x;
  out.boundary_residual = res;
  return out;
}

// Number of indices after which the seed contamination of a backward Miller
// sweep has decayed by ~1e-16, given the per-step ratio of the minimal to
// the dominant solution in the forbidden region.
long miller_margin(double ratio) {
  ratio = std::min(std::abs(ratio), 0.95);
  return static_cast<long>(std::ceil(37.0 / -std::log(ratio))) + 8;
}

long integer_exponent(double value, double base_q, const char* what) {
  // value = base_q^j: recover the integer j or fail.
  const double j = std::log(value) / std::log(base_q);
  const double jr = std::round(j);
  if (std::abs(j - jr) > 1e-6)
    throw DomainError(std::string(what) + ": point off the atom grid");
  return static_cast<long>(jr);
}

}  // namespace

// ---------------------------------------------------------------------------
// Recurrence coefficients
// ---------------------------------------------------------------------------
double lqj_coeff_a(long k, const LittleQJacobiParams& p, const QContext& ctx) {
  const double qk = std::pow(ctx.q, static_cast<double>(-k));
  const double rad = (1.0 - qk / p.r) * (1.0 - p.c * qk / (p.d * p.d * p.r));
  return 0.5 * checked_sqrt(rad, "little q-Jacobi a_k");
}
double lqj_coeff_b(long k, const LittleQJacobiParams& p, const QContext& ctx) {
  return std::pow(ctx.q, static_cast<double>(-k)) * (p.c + ctx.q) /
         (2.0 * p.d * p.r);
}

double asc_coeff_a(long k, const ASCParams& p, const QContext& ctx) {
  const double base =
      p.direction == ASCDirection::base_q ? ctx.q : 1.0 / ctx.q;
  const double rad = (1.0 - std::pow(base, static_cast<double>(k + 1))) *
                     (1.0 - p.a * p.b * std::pow(base, static_cast<double>(k)));
  return 0.5 * checked_sqrt(rad, "Al-Salam-Chihara a_k");
}
double asc_coeff_b(long k, const ASCParams& p, const QContext& ctx) {
  const double base =
      p.direction == ASCDirection::base_q ? ctx.q : 1.0 / ctx.q;
  return 0.5 * std::pow(base, static_cast<double>(k)) * (p.a + p.b);
}

double asc2_coeff_a(long k, const ASCIIParams& p, const QContext& ctx) {
  return std::pow(ctx.q, -static_cast<double>(k) - 0.5) *
         checked_sqrt(1.0 - std::pow(ctx.q, static_cast<double>(k + 1)),
                      "Al-Salam-Carlitz II a_k");
}
double asc2_coeff_b(long k, const ASCIIParams& p, const QContext& ctx) {
  return p.eps * (std::sqrt(p.a) + 1.0 / std::sqrt(p.a)) *
         std::pow(ctx.q, static_cast<double>(-k));
}

double ckk_coeff_a(long k, const CKKParams& p, const QContext& ctx) {
  return std::pow(ctx.q, -0.5 * static_cast<double>(k + 1)) *
         checked_sqrt(1.0 + std::pow(ctx.q, static_cast<double>(-k)) / p.c,
                      "CKK a_k");
}
double ckk_coeff_b(long k, const CKKParams& p, const QContext& ctx) {
  return std::sqrt(1.0 / p.c) * (p.t + 1.0 / p.t) *
         std::pow(ctx.q, static_cast<double>(-k));
}

// ---------------------------------------------------------------------------
// Atom grid labels
// ---------------------------------------------------------------------------
AtomLabel lqj_atom_label(double y, const LittleQJacobiParams& p,
                         const QContext& ctx) {
  if (!(std::abs(y) < 1.0))
    throw DomainError("lqj_atom_label: |y| must be < 1");
  // branch 1: y = d^{-1} q^{-j}, j >= 0
  if (y * p.d > 0.0) {
    const double j = -std::log(y * p.d) / std::log(ctx.q);
    if (std::abs(j - std::round(j)) < 1e-6 && std::round(j) >= -0.5)
      return {1, static_cast<long>(std::round(j)), y};
  }
  // branch 2: y = (d/c) q^{-j}, j >= 0
  if (p.c != 0.0 && y * p.d / p.c > 0.0) {
    const double j = -std::log(y * p.c / p.d) / std::log(ctx.q);
    if (std::abs(j - std::round(j)) < 1e-6 && std::round(j) >= -0.5)
      return {2, static_cast<long>(std::round(j)), y};
  }
  // branch 3: y = r d q^{j}, j in Z
  if (y * p.r * p.d > 0.0) {
    const double j = std::log(y / (p.r * p.d)) / std::log(ctx.q);
    if (std::abs(j - std::round(j)) < 1e-6)
      return {3, static_cast<long>(std::round(j)), y};
  }
  throw DomainError("lqj_atom_label: point off the atom grid");
}

AtomLabel asc_atom_label(double y, const ASCParams& p, const QContext& ctx) {
  if (!(std::abs(y) < 1.0))
    throw DomainError("asc_atom_label: |y| must be < 1");
  if (p.direction == ASCDirection::base_q) {
    if (y * p.a > 0.0) {
      const double j = -std::log(y * p.a) / std::log(ctx.q);
      if (std::abs(j - std::round(j)) < 1e-6 && std::round(j) >= -0.5)
        return {1, static_cast<long>(std::round(j)), y};
    }
    if (y * p.b > 0.0) {
      const double j = -std::log(y * p.b) / std::log(ctx.q);
      if (std::abs(j - std::round(j)) < 1e-6 && std::round(j) >= -0.5)
        return {2, static_cast<long>(std::round(j)), y};
    }
    throw DomainError("asc_atom_label: point off the atom grid");
  }
  // base q^{-1}: spectrum {mu(a^{-1} q^k) : k >= 0}
  if (y * p.a > 0.0) {
    const double j = std::log(y * p.a) / std::log(ctx.q);
    if (std::abs(j - std::round(j)) < 1e-6 && std::round(j) >= -0.5)
      return {1, static_cast<long>(std::round(j)), y};
  }
  throw DomainError("asc_atom_label: point off the q^{-1} atom grid");
}

AtomLabel ckk_atom_label(double z, const CKKParams& p, const QContext& ctx) {
  const double neg = -std::sqrt(p.c) / p.t;  // branch 1 base, j >= 0
  const double pos = p.t / std::sqrt(p.c);   // branch 2 base, j in Z
  if (z * neg > 0.0) {
    const double j = std::log(z / neg) / std::log(ctx.q);
    if (std::abs(j - std::round(j)) < 1e-6 && std::round(j) >= -0.5)
      return {1, static_cast<long>(std::round(j)), z};
  }
  if (z * pos > 0.0) {
    const double j = std::log(z / pos) / std::log(ctx.q);
    if (std::abs(j - std::round(j)) < 1e-6)
      return {2, static_cast<long>(std::round(j)), z};
  }
  throw DomainError("ckk_atom_label: point off the atom grid");
}

// ---------------------------------------------------------------------------
// Series evaluations used only to pin the overall sign of the
// doubly-infinite eigenvectors to the defining-series convention.
// ---------------------------------------------------------------------------
namespace {

// Little q-Jacobi f_k in signed-log form at indices where |r q^k| < 1.
SignedLog lqj_f_signed_log(long k, double y, const LittleQJacobiParams& p,
                           const QContext& ctx) {
  const double q1k = std::pow(ctx.q, 1.0 - static_cast<double>(k));
  const SignedLog num =
      signed_log_poch_inf(p.c * q1k / (p.d * p.d * p.r), ctx);
  const SignedLog den = signed_log_poch_inf(q1k / p.r, ctx);
  if (num.sign * den.sign <= 0)
    throw DomainError("little q-Jacobi: negative prefactor radicand");
  const Complex phi = basic_hypergeometric(
      {Complex(p.d * y), Complex(p.d / y)}, {Complex(p.c)},
      p.r * std::pow(ctx.q, static_cast<double>(k)), ctx);
  SignedLog out;
  out.log_abs = static_cast<double>(k) * std::log(std::abs(p.d)) +
                0.5 * (num.log_abs - den.log_abs) + std::log(std::abs(phi));
  const int sd = (p.d < 0 && (k % 2 != 0)) ? -1 : 1;
  out.sign = sd * (phi.real() < 0 ? -1 : (phi.real() > 0 ? 1 : 0));
  return out;
}

// CKK V_k in signed-log form at indices where |c q^k| < 1.
SignedLog ckk_v_signed_log(long k, double z, const CKKParams& p,
                           const QContext& ctx) {
  const double qk = std::pow(ctx.q, static_cast<double>(k));
  const SignedLog pref = signed_log_poch_inf(-p.c * qk, ctx);
  const Complex phi = basic_hypergeometric(
      {Complex(-ctx.q * z / (std::sqrt(p.c) * p.t)), Complex(0.0)},
      {Complex(ctx.q / (p.t * p.t))}, -p.c * qk, ctx);
  SignedLog out;
  out.log_abs = 0.5 * static_cast<double>(k) * std::log(ctx.q) -
                static_cast<double>(k) * std::log(std::abs(p.t)) +
                0.5 * pref.log_abs + std::log(std::abs(phi));
  const int st = (-p.t < 0 && (k % 2 != 0)) ? -1 : 1;
  out.sign = st * (phi.real() < 0 ? -1 : (phi.real() > 0 ? 1 : 0));
  return out;
}

// Match the overall sign of a normalized doubly-infinite vector to the sign
// of the defining series at three consecutive reference indices.
void fix_sign_by_series(AtomVector& av, long k_ref,
                        const std::function<SignedLog(long)>& series) {
  double best_log = -1e300;
  SignedLog sl[3];
  for (int i = 0; i < 3; ++i) {
    sl[i] = series(k_ref + i);
    best_log = std::max(best_log, sl[i].log_abs);
  }
  double dot = 0.0;
  for (int i = 0; i < 3; ++i)
    dot += sl[i].sign * std::exp(sl[i].log_abs - best_log) *
           av.at(k_ref + i);
  if (dot == 0.0) {
    // The eigenvector underflows to zero on the series-convergent index
    // range (very distant atoms).  Fall back to a deterministic convention:
    // largest-magnitude component positive.  Orthonormality and Parseval
    // are insensitive to this choice.
    size_t peak = 0;
    for (size_t i = 1; i < av.v.size(); ++i)
      if (std::abs(av.v[i]) > std::abs(av.v[peak])) peak = i;
    if (av.v[peak] < 0.0) rescale_all(av.v, -1.0);
    return;
  }
  if (dot < 0.0) rescale_all(av.v, -1.0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Atom eigenvectors
// ---------------------------------------------------------------------------
AtomVector lqj_atom_vector(double y, const LittleQJacobiParams& p,
                           const QContext& ctx) {
  lqj_atom_label(y, p, ctx);  // grid validation
  const double mu = mu_of(y);
  const double lq = std::log(ctx.q);
  // Turning point: components peak where |b_k| ~ |mu|.
  const double kb = std::log(std::abs(p.c + ctx.q) /
                             (2.0 * std::abs(p.d * p.r) * std::abs(mu))) / lq;
  const long k_star = static_cast<long>(std::ceil(std::max(kb, 0.0)));
  // Above the turning point the minimal/dominant ratio per step is c/q.
  const long k_high = k_star + miller_margin(p.c / ctx.q);
  // Below it the components decay like |y| per step.  Keep the window bottom
  // tight: extending it further only amplifies rounding noise in the
  // down-sweep (which grows like 1/|y| per step there).
  const long decay =
      static_cast<long>(std::ceil(55.0 * std::log(10.0) / -std::log(std::abs(y))));
  const long k_low = std::min<long>(0, k_star) - decay - 20;
  auto a = [&](long k) { return lqj_coeff_a(k, p, ctx); };
  auto b = [&](long k) { return lqj_coeff_b(k, p, ctx); };
  AtomVector av = doubly_infinite_atom(a, b, mu, k_low, k_high, k_star);
  // Reference index for the series sign: |r q^k| <= 0.5, deflated further by
  // the series parameters d*y, d/y when they exceed 1 so the leading term
  // dominates and the computed sign is reliable for distant atoms.
  const double infl = std::max(std::abs(p.d * y), 1.0) *
                      std::max(std::abs(p.d / y), 1.0);
  const long k_ref = static_cast<long>(
      std::ceil(std::log(0.5 / (std::abs(p.r) * infl)) / lq)) + 1;
  fix_sign_by_series(av, std::max(k_ref, k_low + 2), [&](long k) {
    return lqj_f_signed_log(k, y, p, ctx);
  });
  return av;
}

AtomVector asc_atom_vector(double y, const ASCParams& p, const QContext& ctx) {
  const AtomLabel lbl = asc_atom_label(y, p, ctx);
  const double mu = mu_of(y);
  long k_top;
  if (p.direction == ASCDirection::base_q) {
    if (!(p.a * p.b < 1.0))
      throw DomainError("asc_atom_vector: base-q requires ab < 1");
    k_top = std::max<long>(
        80, static_cast<long>(std::ceil(55.0 * std::log(10.0) /
                                        -std::log(std::abs(y)))));
  } else {
    if (!(p.a * p.b > 1.0))
      throw DomainError("asc_atom_vector: base-q^{-1} requires ab > 1");
    // beyond the turning point the minimal/dominant ratio is min(a/b, b/a)
    k_top = lbl.index +
            miller_margin(std::min(std::abs(p.a / p.b), std::abs(p.b / p.a)));
  }
  auto a = [&](long k) { return asc_coeff_a(k, p, ctx); };
  auto b = [&](long k) { return asc_coeff_b(k, p, ctx); };
  return half_line_atom(
      a, b, mu, k_top,
      p.direction == ASCDirection::base_q ? 0 : lbl.index);
}

AtomVector asc2_atom_vector(long n, const ASCIIParams& p, const QContext& ctx) {
  if (n < 0) throw DomainError("asc2_atom_vector: n must be >= 0");
  if (!(p.a > 0.0 && p.a < 1.0 / ctx.q))
    throw DomainError("asc2_atom_vector: require 0 < a < 1/q");
  const double x =
      p.eps * std::pow(ctx.q, static_cast<double>(-n)) / std::sqrt(p.a);
  auto a = [&](long k) { return asc2_coeff_a(k, p, ctx); };
  auto b = [&](long k) { return asc2_coeff_b(k, p, ctx); };
  if (p.a >= 1.0) {
    // Limit-circle regime at +infinity: the boundary-row solution decays at
    // the slower geometric rate sqrt(q a) and dominates the backward-sweep
    // solution (rate sqrt(q/a)), so the forward recurrence is stable and
    // exact; a Miller match would pick the wrong solution.
    const double rate = std::sqrt(ctx.q * p.a);  // < 1 since a < 1/q
    const long tail = static_cast<long>(
        std::ceil(40.0 * std::log(10.0) / -std::log(rate))) + 8;
    return forward_only_atom(a, b, x, 0, n + tail);
  }
  // beyond the turning point the minimal/dominant ratio is min(a, 1/a)
  return half_line_atom(a, b, x,
                        n + miller_margin(std::min(p.a, 1.0 / p.a)), n);
}

AtomVector ckk_atom_vector(double z, const CKKParams& p, const QContext& ctx) {
  if (!(p.c > 0.0) || p.t == 0.0 ||
      !(std::abs(p.t) > std::sqrt(ctx.q) - 1e-12))
    throw DomainError("ckk_atom_vector: require c > 0 and |t| > q^{1/2}");
  ckk_atom_label(z, p, ctx);
  const double lq = std::log(ctx.q);
  const double kb =
      std::log(std::sqrt(1.0 / p.c) * std::abs(p.t + 1.0 / p.t) /
               std::abs(z)) / lq;
  // above the turning point the minimal/dominant ratio is min(t^2, 1/t^2)
  const long k_high =
      static_cast<long>(std::ceil(std::max(kb, 0.0))) +
      miller_margin(std::min(p.t * p.t, 1.0 / (p.t * p.t)));
  // Below the support the decay accelerates (the off-diagonal terms vanish
  // like q^{|k|/2}), so the amplitude drops by ~q^{m^2/4} after m extra
  // steps; a buffer of 2*sqrt(55 ln10 / -ln q) steps reaches ~1e-55.  Going
  // further only amplifies down-sweep rounding noise until the rescales
  // underflow the valid region.
  const long buffer = static_cast<long>(
      std::ceil(2.0 * std::sqrt(55.0 * std::log(10.0) / -lq))) + 6;
  const long k_low =
      -static_cast<long>(std::ceil(std::max(0.0, 1.0 + 2.0 * std::log(std::abs(z)) / lq))) - buffer;
  auto a = [&](long k) { return ckk_coeff_a(k, p, ctx); };
  auto b = [&](long k) { return ckk_coeff_b(k, p, ctx); };
  const long k_star = static_cast<long>(std::ceil(std::max(kb, 0.0)));
  AtomVector av;
  if (std::abs(p.t) < 1.0) {
    // Limit-circle regime at +infinity: both asymptotic solutions decay
    // geometrically (rates sqrt(q)|t| and sqrt(q)/|t|), and the labeled
    // eigenfunction is the slower-decaying one, which a backward Miller
    // sweep cannot isolate.  The forward sweep is stable here.
    const double rate = std::sqrt(ctx.q) / std::abs(p.t);  // in (sqrt q, 1)
    const long tail = static_cast<long>(
        std::ceil(40.0 * std::log(10.0) / -std::log(rate))) + 8;
    av = forward_only_atom(a, b, z, k_low, k_star + tail);
  } else {
    av = doubly_infinite_atom(a, b, z, k_low, k_high, k_star);
  }
  // Reference index for the series sign: the argument |c q^k| must be small,
  // and so must its product with the (possibly huge, for distant atoms) series
  // parameter q|z|/(sqrt(c)|t|), otherwise the partial sums cancel
  // catastrophically and the computed sign is unreliable.
  const long k_ref0 = static_cast<long>(
      std::ceil(std::log(0.5 / p.c) / lq)) + 1;
  const long k_ref1 = static_cast<long>(std::ceil(
      std::log(0.5 * std::abs(p.t) /
               (std::sqrt(p.c) * ctx.q * std::abs(z))) / lq)) + 1;
  fix_sign_by_series(av, std::max({k_ref0, k_ref1, k_low + 2}), [&](long k) {
    return ckk_v_signed_log(k, z, p, ctx);
  });
  return av;
}

double little_q_jacobi(long k, const MuPoint& pt, const LittleQJacobiParams& p,
                       const QContext& ctx) {
  if (pt.kind != MuPoint::Kind::atom)
    throw DomainError("little_q_jacobi: pointwise API expects an atom point");
  return lqj_atom_vector(pt.y.real(), p, ctx).at(k);
}

double al_salam_chihara(long k, const MuPoint& pt, const ASCParams& p,
                        const QContext& ctx) {
  if (pt.kind != MuPoint::Kind::atom)
    throw DomainError("al_salam_chihara: pointwise API expects an atom point");
  return asc_atom_vector(pt.y.real(), p, ctx).at(k);
}

double asc2(long k, double x, const ASCIIParams& p, const QContext& ctx) {
  const double n =
      -std::log(std::abs(x) * std::sqrt(p.a)) / std::log(ctx.q);
  if (std::abs(n - std::round(n)) > 1e-6 || std::round(n) < -0.5 ||
      x * p.eps < 0.0)
    throw DomainError("asc2: x off the atom grid eps q^{-n}/sqrt(a)");
  return asc2_atom_vector(static_cast<long>(std::round(n)), p, ctx).at(k);
}

double ckk(long k, double z, const CKKParams& p, const QContext& ctx) {
  return ckk_atom_vector(z, p, ctx).at(k);
}

double q_hermite(long k, double x, double base) {
  if (k < 0) return 0.0;
  double hm = 0.0, h = 1.0;  // H_{-1}, H_0
  double bk = 1.0;           // base^j
  for (long j = 0; j < k; ++j) {
    const double hp = 2.0 * x * h - (1.0 - bk) * hm;
    hm = h;
    h = hp;
    bk *= base;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Band kernels
// ---------------------------------------------------------------------------
namespace {

// Extract (alpha, beta) of v_k ~ alpha cos(k theta) + beta sin(k theta) from
// two consecutive values, and return the squared amplitude.
double free_amplitude_sq(double vk, double vk1, long k, double theta) {
  const double c0 = std::cos(k * theta), s0 = std::sin(k * theta);
  const double c1 = std::cos((k + 1) * theta), s1 = std::sin((k + 1) * theta);
  const double det = c0 * s1 - s0 * c1;  // = sin(theta)
  const double alpha = (vk * s1 - vk1 * s0) / det;
  const double beta = (vk1 * c0 - vk * c1) / det;
  return alpha * alpha + beta * beta;
}

}  // namespace

std::vector<double> asc_band_kernel(long k_max, double theta,
                                    const ASCParams& p, const QContext& ctx) {
  if (p.direction != ASCDirection::base_q)
    throw DomainError("asc_band_kernel: band exists only in base q");
  if (!(theta > 0.0 && theta < M_PI))
    throw DomainError("asc_band_kernel: theta in (0, pi) required");
  const double x = std::cos(theta);
  // forward recurrence far enough for the coefficients to reach their free
  // limits (a_k -> 1/2, b_k -> 0) to machine precision
  const double M = std::max({1.0 + std::abs(p.a * p.b),
                             0.5 * std::abs(p.a + p.b), 1.0});
  const long k_asym = std::max<long>(
      k_max + 2,
      static_cast<long>(std::ceil((41.5 + std::log(M)) / -std::log(ctx.q))) + 2);
  std::vector<double> v(static_cast<size_t>(k_asym) + 2, 0.0);
  v[0] = 1.0;
  double below = 0.0;
  for (long k = 0; k <= k_asym; ++k) {
    const double next =
        ((x - asc_coeff_b(k, p, ctx)) * v[static_cast<size_t>(k)] -
         (k > 0 ? asc_coeff_a(k - 1, p, ctx) * below : 0.0)) /
        asc_coeff_a(k, p, ctx);
    below = v[static_cast<size_t>(k)];
    v[static_cast<size_t>(k) + 1] = next;
  }
  const double C2 = free_amplitude_sq(v[static_cast<size_t>(k_asym)],
                                      v[static_cast<size_t>(k_asym) + 1],
                                      k_asym, theta);
  const double W = 2.0 / (M_PI * C2 * std::sin(theta));
  std::vector<double> out(static_cast<size_t>(k_max) + 1);
  const double sw = std::sqrt(W);
  for (long k = 0; k <= k_max; ++k) out[static_cast<size_t>(k)] =
      v[static_cast<size_t>(k)] * sw;
  return out;
}

namespace {

// Shared LQJ band sweep: returns the recurrence solution on [k_low, k_high]
// together with the window base and the band weight W(cos theta).
std::vector<double> lqj_band_sweep(long k_min, double theta,
                                   const LittleQJacobiParams& p,
                                   const QContext& ctx, long& k_low_out,
                                   double& weight_out) {
  if (!(theta > 0.0 && theta < M_PI))
    throw DomainError("lqj_band_kernel: theta in (0, pi) required");
  const double x = std::cos(theta);
  const double lq = std::log(ctx.q);
  // top of the window: beyond the classical turning point
  const double kb = std::log(std::abs(p.c + ctx.q) /
                             (2.0 * std::abs(p.d * p.r) *
                              std::max(std::abs(x), 0.05))) / lq;
  const long k_high = static_cast<long>(std::ceil(std::max(kb, 0.0))) +
                      miller_margin(p.c / ctx.q);
  // bottom: into the free regime where the coefficient deviations from
  // (a_k, b_k) = (1/2, 0) are below 1e-18
  const double M =
      std::max({1.0 / std::abs(p.r), std::abs(p.c / (p.d * p.d * p.r)),
                std::abs((p.c + ctx.q) / (2.0 * p.d * p.r)), 1.0});
  const long k_asym =
      static_cast<long>(std::floor((-41.5 - std::log(M)) / -lq)) - 2;
  const long k_low = std::min(k_min - 1, k_asym - 2);
  auto a = [&](long k) { return lqj_coeff_a(k, p, ctx); };
  auto b = [&](long k) { return lqj_coeff_b(k, p, ctx); };
  std::vector<double> v = sweep_down(a, b, x, k_low, k_high);
  // The kernel is invariant under rescaling the sweep; normalize so the
  // squared amplitude below cannot underflow (the sweep sits near its seed).
  l2_normalize(v);
  const double C2 = free_amplitude_sq(v[static_cast<size_t>(k_asym - k_low)],
                                      v[static_cast<size_t>(k_asym + 1 - k_low)],
                                      k_asym, theta);
  k_low_out = k_low;
  weight_out = 2.0 / (M_PI * C2 * std::sin(theta));
  return v;
}

}  // namespace

std::vector<double> lqj_band_kernel(long k_min, long k_max, double theta,
                                    const LittleQJacobiParams& p,
                                    const QContext& ctx) {
  long k_low = 0;
  double W = 0.0;
  const std::vector<double> v = lqj_band_sweep(k_min, theta, p, ctx, k_low, W);
  const double sw = std::sqrt(W);
  std::vector<double> out(static_cast<size_t>(k_max - k_min) + 1);
  for (long k = k_min; k <= k_max; ++k) {
    // Past the top of the sweep window the kernel has decayed below machine
    // precision (the decay beyond the turning point is superexponential).
    const size_t i = static_cast<size_t>(k - k_low);
    out[static_cast<size_t>(k - k_min)] = i < v.size() ? v[i] * sw : 0.0;
  }
  return out;
}

double lqj_band_weight(double theta, const LittleQJacobiParams& p,
                       const QContext& ctx) {
  long k_low = 0;
  double W = 0.0;
  lqj_band_sweep(0, theta, p, ctx, k_low, W);
  return W;
}

double asc_band_weight(double theta, const ASCParams& p, const QContext& ctx) {
  // p_0 = 1, so the orthonormal kernel at k = 0 is sqrt(W) directly.
  const double g0 = asc_band_kernel(0, theta, p, ctx)[0];
  return g0 * g0;
}

// ---------------------------------------------------------------------------
// Lemma verification
// ---------------------------------------------------------------------------
const char* lemma_name(LemmaId id) {
  switch (id) {
    case LemmaId::J_REL: return "J-REL";
    case LemmaId::J_QD1: return "J-QD1";
    case LemmaId::J_QD1C: return "J-QD1C";
    case LemmaId::J_QD2: return "J-QD2";
    case LemmaId::ASC_REL: return "ASC-REL";
    case LemmaId::ASC_QD1: return "ASC-QD1";
    case LemmaId::ASC_QD2: return "ASC-QD2";
    case LemmaId::ASC_QD3: return "ASC-QD3";
    case LemmaId::ASCII_QD: return "ASCII-QD";
    case LemmaId::CKK_C1: return "CKK-C1";
    case LemmaId::CKK_C2: return "CKK-C2";
    case LemmaId::CKK_QD: return "CKK-QD";
  }
  return "?";
}

LemmaId lemma_from_name(const std::string& name) {
  for (LemmaId id :
       {LemmaId::J_REL, LemmaId::J_QD1, LemmaId::J_QD1C, LemmaId::J_QD2,
        LemmaId::ASC_REL, LemmaId::ASC_QD1, LemmaId::ASC_QD2, LemmaId::ASC_QD3,
        LemmaId::ASCII_QD, LemmaId::CKK_C1, LemmaId::CKK_C2, LemmaId::CKK_QD})
    if (name == lemma_name(id)) return id;
  throw DomainError("unknown lemma id: " + name);
}

namespace {

double jfun(long k, double y, double c, double d, double r,
            const QContext& ctx) {
  LittleQJacobiParams p{c, d, r};
  const double yy = std::abs(y) < 1.0 ? y : 1.0 / y;
  return lqj_atom_vector(yy, p, ctx).at(k);
}

double hfun(long k, double y, double a, double b, const QContext& ctx) {
  ASCParams p{a, b, ASCDirection::base_q};
  const double yy = std::abs(y) < 1.0 ? y : 1.0 / y;
  return asc_atom_vector(yy, p, ctx).at(k);
}

double vfun(long k, double z, double c, double t, const QContext& ctx) {
  CKKParams p{c, t};
  return ckk_atom_vector(z, p, ctx).at(k);
}

double pafun(long k, double x, double a, int eps, const QContext& ctx) {
  ASCIIParams p{a, eps};
  return asc2(k, x, p, ctx);
}

double sgn(double x) { return x < 0.0 ? -1.0 : 1.0; }

}  // namespace

double lemma_residual(const LemmaCase& lc, const QContext& ctx) {
  const double q = ctx.q, sq = std::sqrt(ctx.q);
  switch (lc.id) {
    case LemmaId::J_REL: {
      const double x = mu_of(lc.y);
      const double qk = std::pow(q, static_cast<double>(-lc.k));
      const double lhs =
          checked_sqrt(1.0 - qk / lc.r, "J-REL") *
              jfun(lc.k + 1, lc.y, lc.c, lc.d, lc.r, ctx) -
          lc.d * checked_sqrt(1.0 - lc.c * qk / (lc.d * lc.d * lc.r), "J-REL") *
              jfun(lc.k, lc.y, lc.c, lc.d, lc.r, ctx);
      const double rhs = (lc.d < 0 ? -1.0 : 1.0) *
                         checked_sqrt(1.0 - 2.0 * x * lc.d + lc.d * lc.d,
                                      "J-REL rhs") *
                         jfun(lc.k, lc.y, q * lc.c, q * lc.d, lc.r, ctx);
      return std::abs(lhs - rhs);
    }
    case LemmaId::J_QD1: {
      const double qk = std::pow(q, static_cast<double>(-lc.k));
      // Coefficient = (unnormalized-identity bracket) x (positive norm
      // ratio); the square root alone loses the bracket's sign.
      auto A = [&](double y) {
        return sgn((1.0 - lc.d * y) / (1.0 - y * y)) *
               checked_sqrt(-(lc.c / (lc.d * lc.d * lc.r)) * (1.0 - lc.d * y) *
                                (1.0 - q * lc.d * y / lc.c) /
                                ((1.0 - y * y) * (1.0 - q * y * y)),
                            "J-QD1 A");
      };
      const double lhs =
          std::pow(q, 0.5 * lc.k) *
          checked_sqrt(1.0 - lc.c * qk / (lc.d * lc.d * lc.r), "J-QD1") *
          jfun(lc.k, lc.y, lc.c, lc.d, lc.r, ctx);
      const double rhs =
          A(lc.y) * jfun(lc.k, sq * lc.y, lc.c, sq * lc.d, lc.r, ctx) +
          A(1.0 / lc.y) * jfun(lc.k, lc.y / sq, lc.c, sq * lc.d, lc.r, ctx);
      return std::abs(lhs - rhs);
    }
    case LemmaId::J_QD1C: {
      const double qk = std::pow(q, static_cast<double>(-lc.k));
      auto A = [&](double y) {
        return sgn(lc.d) * sgn((1.0 - lc.c * y / lc.d) / (1.0 - y * y)) *
               checked_sqrt(-(1.0 / lc.r) * (1.0 - lc.c * y / lc.d) *
                                (1.0 - q * y / lc.d) /
                                ((1.0 - y * y) * (1.0 - q * y * y)),
                            "J-QD1C A");
      };
      const double lhs = std::pow(q, 0.5 * lc.k) *
                         checked_sqrt(1.0 - qk / lc.r, "J-QD1C") *
                         jfun(lc.k, lc.y, lc.c, lc.d, lc.r, ctx);
      const double rhs =
          A(lc.y) * jfun(lc.k + 1, sq * lc.y, lc.c, lc.d / sq, lc.r, ctx) +
          A(1.0 / lc.y) *
              jfun(lc.k + 1, lc.y / sq, lc.c, lc.d / sq, lc.r, ctx);
      return std::abs(lhs - rhs);
    }
    case LemmaId::J_QD2: {
      auto A = [&](double y) {
        return sgn((1.0 - lc.d * y) * (1.0 - lc.c * y / lc.d) / (1.0 - y * y)) *
               checked_sqrt((q * y / (lc.d * lc.r)) * (1.0 - lc.d * y) *
                                (1.0 - lc.c * y / lc.d) /
                                ((1.0 - y * y) * (1.0 - q * y * y)),
                            "J-QD2 A");
      };
      const double lhs = std::pow(q, 0.5 * lc.k) *
                         jfun(lc.k, lc.y, lc.c, lc.d, lc.r, ctx);
      const double rhs =
          A(lc.y) * jfun(lc.k, sq * lc.y, q * lc.c, sq * lc.d, lc.r, ctx) +
          A(1.0 / lc.y) *
              jfun(lc.k, lc.y / sq, q * lc.c, sq * lc.d, lc.r, ctx);
      return std::abs(lhs - rhs);
    }
    case LemmaId::ASC_REL: {
      const double x = mu_of(lc.y);
      const double qk = std::pow(q, static_cast<double>(lc.k));
      const double lhs =
          checked_sqrt(1.0 - lc.a * lc.b * qk, "ASC-REL") *
              hfun(lc.k, lc.y, lc.a, q * lc.b, ctx) -
          lc.b * checked_sqrt(1.0 - qk, "ASC-REL") *
              hfun(lc.k - 1, lc.y, lc.a, q * lc.b, ctx);
      const double rhs =
          checked_sqrt(1.0 - 2.0 * lc.b * x + lc.b * lc.b, "ASC-REL rhs") *
          hfun(lc.k, lc.y, lc.a, lc.b, ctx);
      return std::abs(lhs - rhs);
    }
    case LemmaId::ASC_QD1: {
      const double qk = std::pow(q, static_cast<double>(lc.k));
      auto A = [&](double y) {
        return sgn((1.0 - lc.a * y) * (1.0 - lc.b * y) / (1.0 - y * y)) *
               checked_sqrt(-q * y * y * (1.0 - lc.a * y) * (1.0 - lc.b * y) /
                                ((1.0 - y * y) * (1.0 - q * y * y)),
                            "ASC-QD1 A");
      };
      const double lhs = std::pow(q, -0.5 * lc.k) *
                         checked_sqrt(1.0 - lc.a * lc.b * qk, "ASC-QD1") *
                         hfun(lc.k, lc.y, lc.a, lc.b, ctx);
      const double rhs =
          A(lc.y) * hfun(lc.k, sq * lc.y, sq * lc.a, sq * lc.b, ctx) +
          A(1.0 / lc.y) * hfun(lc.k, lc.y / sq, sq * lc.a, sq * lc.b, ctx);
      return std::abs(lhs - rhs);
    }
    case LemmaId::ASC_QD2: {
      const double qk = std::pow(q, static_cast<double>(lc.k));
      auto A = [&](double y) {
        return sgn(y / (1.0 - y * y)) *
               checked_sqrt(-(lc.a * lc.b / q) * y * y *
                                (1.0 - q * y / lc.a) * (1.0 - q * y / lc.b) /
                                ((1.0 - y * y) * (1.0 - q * y * y)),
                            "ASC-QD2 A");
      };
      const double lhs = std::pow(q, -0.5 * lc.k) *
                         checked_sqrt(1.0 - qk, "ASC-QD2") *
                         hfun(lc.k - 1, lc.y, lc.a, lc.b, ctx);
      const double rhs =
          A(lc.y) * hfun(lc.k, sq * lc.y, lc.a / sq, lc.b / sq, ctx) +
          A(1.0 / lc.y) * hfun(lc.k, lc.y / sq, lc.a / sq, lc.b / sq, ctx);
      return std::abs(lhs - rhs);
    }
    case LemmaId::ASC_QD3: {
      auto A = [&](double y) {
        return sgn((1.0 - lc.a * y) / (1.0 - y * y)) *
               checked_sqrt(lc.b * y * (1.0 - lc.a * y) * (1.0 - q * y / lc.b) /
                                ((1.0 - y * y) * (1.0 - q * y * y)),
                            "ASC-QD3 A");
      };
      const double lhs =
          std::pow(q, -0.5 * lc.k) * hfun(lc.k, lc.y, lc.a, lc.b, ctx);
      const double rhs =
          A(lc.y) * hfun(lc.k, sq * lc.y, sq * lc.a, lc.b / sq, ctx) +
          A(1.0 / lc.y) * hfun(lc.k, lc.y / sq, sq * lc.a, lc.b / sq, ctx);
      return std::abs(lhs - rhs);
    }
    case LemmaId::ASCII_QD: {
      const double x = lc.y;  // spectral value eps q^{-n}/sqrt(a)
      const double ax = std::abs(x);
      const double lhs =
          std::pow(q, 0.5 * lc.k) * pafun(lc.k, x, lc.a, lc.eps, ctx);
      // Second-term prefactor is |x|^{-1} (not q^{-1/2}|x|^{-1}): verified
      // against the closed-form polynomials, which satisfy the identity
      // exactly with this normalization.
      const double rhs =
          sq / ax * checked_sqrt(ax / (q * std::sqrt(lc.a)) - 1.0, "ASCII-QD") *
              pafun(lc.k, x / sq, q * lc.a, lc.eps, ctx) +
          1.0 / ax * checked_sqrt(ax * std::sqrt(lc.a) - 1.0, "ASCII-QD") *
              pafun(lc.k, sq * x, q * lc.a, lc.eps, ctx);
      return std::abs(lhs - rhs);
    }
    case LemmaId::CKK_C1: {
      const double x = lc.y, c = lc.ckk_c, t = lc.ckk_t;
      const double lhs =
          checked_sqrt(1.0 + std::pow(q, 1.0 - lc.k) / c, "CKK-C1") *
              vfun(lc.k - 1, x, c, t, ctx) +
          std::sqrt(1.0 / c) * t * std::pow(q, -0.5 * lc.k) *
              vfun(lc.k, x, c, t, ctx);
      // The bracket (sqrt(c)/t + x) over the positive norm ratio reduces to
      // sign(t) sqrt(1 + xt/sqrt(c)); the bare square root assumes t > 0.
      const double rhs =
          sgn(t) * checked_sqrt(1.0 + x * t / std::sqrt(c), "CKK-C1 rhs") *
          vfun(lc.k, x / sq, c, t / sq, ctx);
      return std::abs(lhs - rhs);
    }
    case LemmaId::CKK_C2: {
      const double x = lc.y, c = lc.ckk_c, t = lc.ckk_t;
      const double lhs =
          std::sqrt(c) *
              checked_sqrt(1.0 + std::pow(q, -static_cast<double>(lc.k)) / c,
                           "CKK-C2") *
              vfun(lc.k + 1, x, c, t, ctx) +
          std::pow(q, 0.5 - 0.5 * lc.k) / t * vfun(lc.k, x, c, t, ctx);
      const double rhs =
          -sgn(t) * std::sqrt(c) *
          checked_sqrt(1.0 + q * x / (std::sqrt(c) * t), "CKK-C2 rhs") *
          vfun(lc.k, sq * x, c, t / sq, ctx);
      return std::abs(lhs - rhs);
    }
    case LemmaId::CKK_QD: {
      const double x = lc.y, c = lc.ckk_c, t = lc.ckk_t;
      const double lhs = std::pow(q, 0.5 * lc.k) * vfun(lc.k, x, c, t, ctx);
      const double rhs =
          sgn(t) * (1.0 / x) *
              checked_sqrt(1.0 + t * x / std::sqrt(c), "CKK-QD") *
              vfun(lc.k, x / sq, c, t / sq, ctx) -
          sgn(t) * (1.0 / x) *
              checked_sqrt(1.0 / q + x / (std::sqrt(c) * t), "CKK-QD") *
              vfun(lc.k, sq * x, c, t / sq, ctx);
      return std::abs(lhs - rhs);
    }
  }
  throw DomainError("lemma_residual: unknown id");
}

std::vector<LemmaCase> sample_lemma_cases(LemmaId id, const QContext& ctx,
                                          int min_count) {
  std::vector<LemmaCase> out;
  const double q = ctx.q;
  auto push_if_valid = [&](LemmaCase lc) {
    lc.id = id;
    try {
      (void)lemma_residual(lc, ctx);
      out.push_back(lc);
    } catch (const DomainError&) {
      // off-grid / inadmissible instance: skip
    }
  };

  switch (id) {
    case LemmaId::J_REL:
    case LemmaId::J_QD1:
    case LemmaId::J_QD1C:
    case LemmaId::J_QD2: {
      // r < 0 and c > 0 keep a_k real for every k; c < q^2 keeps the
      // operator essentially self-adjoint at the top end.
      const double dmag = std::pow(q, -4.0) * 1.3;
      const LittleQJacobiParams sets[] = {
          {0.5 * q * q, dmag, -0.8},
          {0.3 * q * q, -dmag, -0.6},
          {0.8 * q * q, 0.9, -1.3},
      };
      for (const auto& p : sets) {
        // branch 1 and branch 3 atoms
        std::vector<double> ys;
        for (long j = 0; j <= 6; ++j) {
          const double y = (1.0 / p.d) * std::pow(q, static_cast<double>(-j));
          if (std::abs(y) < 1.0) ys.push_back(y);
        }
        for (long j = -2; j <= 4; ++j) {
          const double y = p.r * p.d * std::pow(q, static_cast<double>(j));
          if (std::abs(y) < 1.0) ys.push_back(y);
        }
        if (p.c != 0.0)
          for (long j = 0; j <= 5; ++j) {
            const double y = (p.d / p.c) * std::pow(q, static_cast<double>(-j));
            if (std::abs(y) < 1.0) ys.push_back(y);
          }
        for (double y : ys)
          for (long k : {-3L, -1L, 0L, 1L, 2L, 4L}) {
            LemmaCase lc;
            lc.c = p.c;
            lc.d = p.d;
            lc.r = p.r;
            lc.y = y;
            lc.k = k;
            push_if_valid(lc);
            if (static_cast<int>(out.size()) >= 3 * min_count) return out;
          }
      }
      break;
    }
    case LemmaId::ASC_REL:
    case LemmaId::ASC_QD1:
    case LemmaId::ASC_QD2:
    case LemmaId::ASC_QD3: {
      const double amag = std::pow(q, -5.0) * 1.2;
      const ASCParams sets[] = {
          {amag, 0.25 * std::pow(q, 5.0), ASCDirection::base_q},
          {-amag, -0.2 * std::pow(q, 5.0), ASCDirection::base_q},
          {amag, -0.3 * std::pow(q, 5.0), ASCDirection::base_q},
      };
      for (const auto& p : sets) {
        for (long j = 0; j <= 6; ++j) {
          const double y = (1.0 / p.a) * std::pow(q, static_cast<double>(-j));
          if (!(std::abs(y) < 1.0)) continue;
          for (long k : {0L, 1L, 2L, 3L, 5L}) {
            LemmaCase lc;
            lc.a = p.a;
            lc.b = p.b;
            lc.y = y;
            lc.k = k;
            push_if_valid(lc);
            if (static_cast<int>(out.size()) >= 3 * min_count) return out;
          }
        }
      }
      break;
    }
    case LemmaId::ASCII_QD: {
      for (double a : {0.7, 0.3, std::min(1.2, 0.8 / q)})
        for (int eps : {+1, -1})
          for (long n = 1; n <= 5; ++n)
            for (long k : {0L, 1L, 2L, 4L}) {
              LemmaCase lc;
              lc.a = a;
              lc.eps = eps;
              lc.y = eps * std::pow(q, static_cast<double>(-n)) / std::sqrt(a);
              lc.k = k;
              push_if_valid(lc);
              if (static_cast<int>(out.size()) >= 3 * min_count) return out;
            }
      break;
    }
    case LemmaId::CKK_C1:
    case LemmaId::CKK_C2:
    case LemmaId::CKK_QD: {
      const CKKParams sets[] = {{1.0, 2.0}, {0.5, -3.0}, {2.0, 2.5}};
      for (const auto& p : sets) {
        std::vector<double> zs;
        for (long j = 1; j <= 4; ++j)
          zs.push_back(-std::sqrt(p.c) / p.t * std::pow(q, static_cast<double>(j)));
        for (long j = -2; j <= 3; ++j)
          zs.push_back(p.t / std::sqrt(p.c) * std::pow(q, static_cast<double>(j)));
        for (double z : zs)
          for (long k : {-2L, 0L, 1L, 3L}) {
            LemmaCase lc;
            lc.ckk_c = p.c;
            lc.ckk_t = p.t;
            lc.y = z;
            lc.k = k;
            push_if_valid(lc);
            if (static_cast<int>(out.size()) >= 3 * min_count) return out;
          }
      }
      break;
    }
  }
  if (static_cast<int>(out.size()) < min_count)
    throw DomainError(std::string("sample_lemma_cases: only ") +
                      std::to_string(out.size()) + " admissible cases for " +
                      lemma_name(id));
  return out;
}

}  // namespace qg
