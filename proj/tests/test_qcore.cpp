#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "qg/qcalc.hpp"

using namespace qg;
using std::abs;

TEST_CASE("q-number basics") {
  QContext ctx(0.5);
  CHECK(abs(q_number(0.0, ctx)) < 1e-15);
  CHECK(abs(q_number(1.0, ctx) - 1.0) < 1e-15);
  CHECK(abs(q_number(2.0, ctx) - 2.5) < 1e-14);  // (0.25-4)/(0.5-2)
  // antisymmetry
  CHECK(abs(q_number(1.7, ctx) + q_number(-1.7, ctx)) < 1e-14);
  CHECK_THROWS_AS(q_number(Complex(1e6, 0.0), ctx), OverflowError);
}

TEST_CASE("q-number converges to z as q->1") {
  const double z = 2.3;
  double prev = 1e9;
  double delta = 0.0;
  for (int j = 3; j <= 12; ++j) {
    QContext ctx(1.0 - std::pow(2.0, -j));
    delta = abs(q_number(z, ctx).real() - z);
    CHECK(delta < prev);  // monotone approach
    prev = delta;
  }
  CHECK(delta < 1e-3);
}

TEST_CASE("q-Pochhammer finite, negative, recurrence") {
  QContext ctx(0.5);
  CHECK(abs(q_pochhammer(0.3, 0, ctx) - 1.0) < 1e-15);
  CHECK(abs(q_pochhammer(0.5, 2, ctx) - 0.375) < 1e-15);

  // (z;q)_{-n} (z q^{-n}; q)_n = 1
  for (long n = 1; n <= 8; ++n) {
    const Complex z = 0.37;
    const Complex lhs = q_pochhammer(z, -n, ctx) *
                        q_pochhammer(z * std::pow(ctx.q, -double(n)), n, ctx);
    CHECK(abs(lhs - 1.0) < 1e-12);
  }

  // (z;q)_{n+1} = (z;q)_n (1 - z q^n) over n in [-20, 20]
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    const Complex z(u(rng), u(rng) * 0.3);
    for (long n = -20; n <= 20; ++n) {
      const Complex lhs = q_pochhammer(z, n + 1, ctx);
      const Complex rhs =
          q_pochhammer(z, n, ctx) * (1.0 - z * std::pow(ctx.q, double(n)));
      CHECK(abs(lhs - rhs) < 1e-12 * std::max(1.0, abs(rhs)));
    }
  }
}

TEST_CASE("infinite q-Pochhammer vs long partial product") {
  for (double q : {0.1, 0.5, 0.9}) {
    QContext ctx(q);
    for (Complex z : {Complex(0.7), Complex(-1.3, 0.4), Complex(2.5, -1.0)}) {
      // oracle: brute-force long-double partial product, 4000 factors
      std::complex<long double> prod = 1.0L;
      std::complex<long double> zl(z.real(), z.imag());
      long double qk = 1.0L;
      for (int k = 0; k < 4000; ++k) {
        prod *= (1.0L - zl * qk);
        qk *= q;
      }
      const Complex oracle(static_cast<double>(prod.real()),
                           static_cast<double>(prod.imag()));
      CHECK(abs(q_pochhammer_inf(z, ctx) - oracle) < 1e-12 * abs(oracle) + 1e-14);
    }
  }
}

TEST_CASE("q-gamma values and functional equation") {
  QContext ctx(0.5);
  CHECK(abs(q_gamma(1.0, ctx) - 1.0) < 1e-12);
  CHECK(abs(q_gamma(2.0, ctx) - 1.0) < 1e-12);
  CHECK_THROWS_AS(q_gamma(0.0, ctx), PoleError);
  CHECK_THROWS_AS(q_gamma(-3.0, ctx), PoleError);

  // Gamma_q(z+1) = (1-q^z)/(1-q) Gamma_q(z)
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.1, 4.0);
  for (int i = 0; i < 20; ++i) {
    const Complex z(u(rng), 0.2 * (u(rng) - 2.0));
    const Complex lhs = q_gamma(z + 1.0, ctx);
    const Complex rhs =
        (1.0 - std::exp(z * std::log(ctx.q))) / (1.0 - ctx.q) * q_gamma(z, ctx);
    CHECK(abs(lhs - rhs) < 1e-10 * std::max(1.0, abs(rhs)));
  }
}

TEST_CASE("q-gamma -> gamma as q->1") {
  const double z = 2.5;
  const double target = std::tgamma(z);  // 1.3293403881791372...
  double prev = 1e9;
  for (int j = 3; j <= 10; ++j) {
    QContext ctx(1.0 - std::pow(2.0, -j));
    const double d = abs(q_gamma(z, ctx).real() - target);
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("basic hypergeometric: trivial and terminating") {
  QContext ctx(0.5);
  // a1 = 1 -> series is 1
  CHECK(abs(basic_hypergeometric({Complex(1.0), Complex(0.3)}, {Complex(0.2)},
                                 0.4, ctx) -
            1.0) < 1e-15);

  // a1 = q^{-2}: 2phi1 equals its exact 3-term sum
  const Complex a1 = std::pow(ctx.q, -2.0), a2 = 0.3, b1 = 0.7, z = 0.9;
  Complex exact = 0.0;
  for (int n = 0; n <= 2; ++n) {
    const Complex num = q_pochhammer(a1, n, ctx) * q_pochhammer(a2, n, ctx);
    const Complex den = q_pochhammer(b1, n, ctx) * q_pochhammer(Complex(ctx.q), n, ctx);
    exact += num / den * std::pow(z, n);
  }
  CHECK(abs(basic_hypergeometric({a1, a2}, {b1}, z, ctx) - exact) <
        1e-13 * abs(exact));
}

TEST_CASE("2phi1 vs extended-precision brute-force partial sum") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (double q : {0.3, 0.6}) {
    QContext ctx(q);
    for (int trial = 0; trial < 10; ++trial) {
      const double a = u(rng), b = u(rng), c = 0.5 + 0.4 * u(rng),
                   z = 0.8 * u(rng);
      // 200-term long-double sum
      long double sum = 0.0L, term = 1.0L;
      for (int n = 0; n < 200; ++n) {
        sum += term;
        const long double qn = std::pow((long double)q, n);
        term *= (1.0L - a * qn) * (1.0L - b * qn) * z /
                ((1.0L - c * qn) * (1.0L - std::pow((long double)q, n + 1)));
      }
      const Complex got =
          basic_hypergeometric({Complex(a), Complex(b)}, {Complex(c)}, z, ctx);
      CHECK(abs(got - Complex((double)sum)) < 1e-12 * std::max(1.0, std::abs((double)sum)));
    }
  }
}

TEST_CASE("divergence and pole signalling") {
  QContext ctx(0.5);
  CHECK_THROWS_AS(
      basic_hypergeometric({Complex(0.3), Complex(0.4)}, {Complex(0.5)}, 1.5,
                           ctx),
      DomainError);
  CHECK_THROWS_AS(
      basic_hypergeometric({Complex(0.3)}, {Complex(std::pow(0.5, -1.0))}, 0.5,
                           ctx),
      PoleError);
}

TEST_CASE("mu map and branch inverse") {
  CHECK(abs(mu_point(1.0).mu - 1.0) < 1e-15);
  CHECK(abs(mu_point(0.5).mu - 1.25) < 1e-15);
  CHECK_THROWS_AS(mu_point(0.0), DomainError);
  CHECK_THROWS_AS(mu_inverse(0.5, MuPoint::Kind::atom), DomainError);
  CHECK_THROWS_AS(mu_inverse(1.5, MuPoint::Kind::band), DomainError);

  // roundtrip on atoms with |y| < 1
  for (double y : {0.3, -0.8, 0.05, -0.4}) {
    const MuPoint p = mu_inverse(mu_of(y), MuPoint::Kind::atom);
    CHECK(abs(p.y - y) < 1e-12);
    CHECK(abs(p.mu.real() - mu_of(y)) < 1e-12);
  }
  // band branch
  const MuPoint b = mu_inverse(0.3, MuPoint::Kind::band);
  CHECK(abs(abs(b.y) - 1.0) < 1e-14);
  CHECK(b.y.imag() >= 0.0);
  CHECK(abs(0.5 * (b.y + 1.0 / b.y) - 0.3) < 1e-14);
}
