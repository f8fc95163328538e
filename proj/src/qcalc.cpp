#include "qg/qcalc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qg {

double QContext::qpow(double e) const { return std::pow(q, e); }

Complex q_number(Complex z, const QContext& ctx) {
  const double lq = std::log(ctx.q);
  if (std::abs(z.real()) * std::abs(lq) > 700.0)
    throw OverflowError("q_number: exponent out of range");
  return std::sinh(z * lq) / std::sinh(lq);
}

Complex q_pochhammer(Complex z, long n, const QContext& ctx) {
  if (n >= 0) {
    Complex prod = 1.0;
    double qk = 1.0;
    for (long k = 0; k < n; ++k) {
      prod *= (1.0 - z * qk);
      qk *= ctx.q;
    }
    return prod;
  }
  // (z;q)_{-m} = 1/(z q^{-m}; q)_m
  const long m = -n;
  Complex prod = 1.0;
  double qk = std::pow(ctx.q, static_cast<double>(-m));
  for (long k = 0; k < m; ++k) {
    const Complex f = 1.0 - z * qk;
    if (std::abs(f) < 1e-14)
      throw PoleError("q_pochhammer: vanishing factor at negative index");
    prod *= f;
    qk *= ctx.q;
  }
  return 1.0 / prod;
}

Complex q_pochhammer_inf(Complex z, const QContext& ctx) {
  // Truncate when |z| q^K < tol_series * 1e-2; geometric tail correction
  // log prod_{k>=K} (1 - z q^k) ~= -z q^K/(1-q).
  Complex prod = 1.0;
  Complex zqk = z;
  const double cutoff = ctx.tol_series * 1e-2;
  int guard = 0;
  for (int k = 0; k < 100000; ++k) {
    if (std::abs(zqk) < cutoff && ++guard >= 3) break;
    prod *= (1.0 - zqk);
    zqk *= ctx.q;
  }
  prod *= std::exp(-zqk / (1.0 - ctx.q));
  return prod;
}

Complex log_q_pochhammer_inf(Complex z, const QContext& ctx) {
  Complex lsum = 0.0;
  Complex zqk = z;
  const double cutoff = ctx.tol_series * 1e-2;
  int guard = 0;
  for (int k = 0; k < 10000000; ++k) {
    if (std::abs(zqk) < cutoff && ++guard >= 3) break;
    const Complex f = 1.0 - zqk;
    if (std::abs(f) < 1e-300)
      throw PoleError("log_q_pochhammer_inf: vanishing factor");
    lsum += std::log(f);
    zqk *= ctx.q;
  }
  lsum += -zqk / (1.0 - ctx.q);  // geometric tail of sum log(1 - z q^k)
  return lsum;
}

Complex q_pochhammer_inf(const std::vector<Complex>& zs, const QContext& ctx) {
  Complex prod = 1.0;
  for (const Complex& z : zs) prod *= q_pochhammer_inf(z, ctx);
  return prod;
}

Complex q_gamma(Complex z, const QContext& ctx) {
  // Poles at z = 0, -1, -2, ...
  if (std::abs(z.imag()) < 1e-13) {
    const double zr = z.real();
    if (zr <= 1e-12 && std::abs(zr - std::round(zr)) < 1e-12)
      throw PoleError("q_gamma: pole at non-positive integer");
  }
  const Complex qz = std::exp(z * std::log(ctx.q));
  return std::exp((1.0 - z) * std::log(1.0 - ctx.q) +
                  log_q_pochhammer_inf(Complex(ctx.q), ctx) -
                  log_q_pochhammer_inf(qz, ctx));
}

Complex basic_hypergeometric(const std::vector<Complex>& a,
                             const std::vector<Complex>& b, Complex z,
                             const QContext& ctx) {
  const int r = static_cast<int>(a.size());
  const int s = static_cast<int>(b.size());
  const int extra = 1 + s - r;  // exponent of the ((-1)^n q^(n(n-1)/2)) factor

  // Detect a terminating numerator parameter a_i = q^{-N}.
  bool terminating = false;
  for (const Complex& ai : a) {
    if (std::abs(ai.imag()) < 1e-12 && ai.real() > 1.0 - 1e-12) {
      const double N = std::log(std::max(ai.real(), 1.0)) / -std::log(ctx.q);
      if (std::abs(N - std::round(N)) < 1e-9) terminating = true;
    }
    if (std::abs(ai - Complex(1.0)) < 1e-14) return 1.0;  // (1;q)_n = 0, n>=1
  }
  if (!terminating) {
    if (r > s + 1)
      throw DomainError("basic_hypergeometric: divergent (r > s+1)");
    if (r == s + 1 && std::abs(z) >= 1.0)
      throw DomainError("basic_hypergeometric: |z| >= 1 with r = s+1");
  }

  // Kahan-compensated summation with the term ratio
  //   t_{n+1}/t_n = prod(1-a_i q^n)/prod(1-b_j q^n) * ((-1) q^n)^extra
  //                 * z / (1 - q^{n+1}).
  Complex sum = 1.0, comp = 0.0, term = 1.0;
  double qn = 1.0;  // q^n
  int below = 0;
  for (int n = 0; n < 100000; ++n) {
    Complex ratio = z;
    bool terminated = false;
    for (const Complex& ai : a) {
      const Complex f = 1.0 - ai * qn;
      // Snap to exact termination: a_i = q^{-n} up to rounding.
      if (std::abs(f) < 1e-10 * std::max(1.0, std::abs(ai * qn)))
        terminated = true;
      ratio *= f;
    }
    if (terminated) break;
    Complex den = 1.0 - std::pow(ctx.q, n + 1);
    for (const Complex& bj : b) {
      const Complex f = 1.0 - bj * qn;
      if (std::abs(f) < 1e-14)
        throw PoleError("basic_hypergeometric: denominator pole");
      den *= f;
    }
    for (int e = 0; e < extra; ++e) ratio *= -qn;
    if (extra < 0)
      for (int e = 0; e < -extra; ++e) ratio /= -qn;
    term *= ratio / den;
    qn *= ctx.q;
    if (std::abs(term) == 0.0) break;  // exact termination
    const Complex yk = term - comp;
    const Complex t = sum + yk;
    comp = (t - sum) - yk;
    sum = t;
    if (std::abs(term) < ctx.tol_series * std::max(1.0, std::abs(sum))) {
      if (++below >= 3) break;
    } else {
      below = 0;
    }
  }
  return sum;
}

MuPoint mu_point(Complex y) {
  if (std::abs(y) == 0.0) throw DomainError("mu_point: y = 0");
  MuPoint p;
  p.y = y;
  p.mu = 0.5 * (y + 1.0 / y);
  const bool on_circle = std::abs(std::abs(y) - 1.0) < 1e-12;
  p.kind = on_circle ? MuPoint::Kind::band : MuPoint::Kind::atom;
  if (!on_circle && std::abs(y) > 1.0) p.y = 1.0 / y;  // canonical |y| <= 1
  return p;
}

MuPoint mu_inverse(double x, MuPoint::Kind kind) {
  MuPoint p;
  p.kind = kind;
  if (kind == MuPoint::Kind::band) {
    if (x < -1.0 - 1e-12 || x > 1.0 + 1e-12)
      throw DomainError("mu_inverse: band point requires x in [-1,1]");
    const double th = std::acos(std::clamp(x, -1.0, 1.0));
    p.y = std::polar(1.0, th);
    p.mu = x;
    return p;
  }
  if (std::abs(x) < 1.0)
    throw DomainError("mu_inverse: atom requires |x| >= 1");
  // y + 1/y = 2x with |y| <= 1: y = x - sign(x) sqrt(x^2-1).
  const double s = x >= 0 ? 1.0 : -1.0;
  const double y = x - s * std::sqrt(x * x - 1.0);
  p.y = y;
  p.mu = x;
  return p;
}

}  // namespace qg
