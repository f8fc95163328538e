#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "qg/qfuncs.hpp"
#include "qg/quadrature.hpp"

using namespace qg;

namespace {

// Worst interior recurrence-row residual of an eigenvector, relative to the
// local row scale.
double row_residual(const AtomVector& av, const std::function<double(long)>& a,
                    const std::function<double(long)>& b) {
  double worst = 0.0;
  for (long k = av.k_min + 1; k < av.k_max(); ++k) {
    const double row = a(k) * av.at(k + 1) + b(k) * av.at(k) +
                       a(k - 1) * av.at(k - 1) - av.eigenvalue * av.at(k);
    const double scale =
        (std::abs(a(k)) + std::abs(b(k)) + std::abs(av.eigenvalue)) *
            std::max({std::abs(av.at(k - 1)), std::abs(av.at(k)),
                      std::abs(av.at(k + 1))}) +
        1e-30;
    worst = std::max(worst, std::abs(row) / scale);
  }
  return worst;
}

double l2_norm(const AtomVector& av) {
  double s = 0.0;
  for (double x : av.v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("atom eigenvectors satisfy the three-term recurrence") {
  const QContext ctx(0.6);
  const double q = ctx.q;

  SUBCASE("little q-Jacobi") {
    const LittleQJacobiParams p{0.5 * q * q, 1.3 / (q * q), -0.8};
    for (double y : {1.0 / p.d, 1.0 / (p.d * q), p.r * p.d * std::pow(q, 3.0),
                     p.r * p.d * std::pow(q, 7.0)}) {
      REQUIRE(std::abs(y) < 1.0);
      const AtomVector av = lqj_atom_vector(y, p, ctx);
      CHECK(av.boundary_residual < 1e-10);
      CHECK(l2_norm(av) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(row_residual(av, [&](long k) { return lqj_coeff_a(k, p, ctx); },
                         [&](long k) { return lqj_coeff_b(k, p, ctx); }) <
            1e-11);
    }
  }

  SUBCASE("Al-Salam-Chihara, base q") {
    const ASCParams p{2.5, 0.3, ASCDirection::base_q};
    for (double y : {1.0 / p.a, 1.0 / (p.a * q)}) {
      const AtomVector av = asc_atom_vector(y, p, ctx);
      CHECK(av.boundary_residual < 1e-10);
      CHECK(av.at(0) > 0.0);
      CHECK(row_residual(av, [&](long k) { return asc_coeff_a(k, p, ctx); },
                         [&](long k) { return asc_coeff_b(k, p, ctx); }) <
            1e-11);
    }
  }

  SUBCASE("Al-Salam-Chihara, base q^{-1}") {
    const ASCParams p{3.0, 0.5, ASCDirection::base_q_inverse};
    for (long n : {0L, 1L, 4L, 9L}) {
      const double y = std::pow(q, static_cast<double>(n)) / p.a;
      const AtomVector av = asc_atom_vector(y, p, ctx);
      CHECK(av.boundary_residual < 1e-10);
      CHECK(av.at(0) > 0.0);
      CHECK(row_residual(av, [&](long k) { return asc_coeff_a(k, p, ctx); },
                         [&](long k) { return asc_coeff_b(k, p, ctx); }) <
            1e-11);
    }
  }

  SUBCASE("Al-Salam-Carlitz II") {
    const ASCIIParams p{0.7, -1};
    for (long n : {0L, 2L, 6L}) {
      const AtomVector av = asc2_atom_vector(n, p, ctx);
      CHECK(av.boundary_residual < 1e-10);
      CHECK(av.at(0) > 0.0);
      CHECK(row_residual(av, [&](long k) { return asc2_coeff_a(k, p, ctx); },
                         [&](long k) { return asc2_coeff_b(k, p, ctx); }) <
            1e-11);
    }
  }

  SUBCASE("CKK") {
    const CKKParams p{1.0, 2.0};
    for (double z : {-std::sqrt(p.c) / p.t * q, p.t / std::sqrt(p.c) * q,
                     p.t / std::sqrt(p.c) * std::pow(q, -2.0)}) {
      const AtomVector av = ckk_atom_vector(z, p, ctx);
      CHECK(av.boundary_residual < 1e-10);
      CHECK(row_residual(av, [&](long k) { return ckk_coeff_a(k, p, ctx); },
                         [&](long k) { return ckk_coeff_b(k, p, ctx); }) <
            1e-11);
    }
  }
}

TEST_CASE("Al-Salam-Carlitz II eigenvectors match the closed form") {
  const QContext ctx(0.55);
  const double q = ctx.q;
  for (int eps : {+1, -1}) {
    const ASCIIParams p{0.7, eps};
    const double sa = std::sqrt(p.a);
    for (long n : {0L, 1L, 3L}) {
      const AtomVector av = asc2_atom_vector(n, p, ctx);
      for (long k : {0L, 1L, 2L, 4L}) {
        // p^a_k(eps q^{-n}/sqrt(a)) =
        //   sqrt(q^{n^2+k^2} a^{n-k} (aq;q)_inf /
        //        ((q;q)_n (q;q)_k (aq;q)_n)) eps^k P^{(a)}_k(q^{-n}; q)
        // with P^{(a)}_k(x;q) = (-a)^k q^{-k(k-1)/2}
        //                       2phi0(q^{-k}, x; -; q, q^k/a).
        const double pref = std::sqrt(
            std::pow(q, static_cast<double>(n * n + k * k)) *
            std::pow(p.a, static_cast<double>(n - k)) *
            q_pochhammer_inf(Complex(p.a * q), ctx).real() /
            (q_pochhammer(Complex(q), n, ctx).real() *
             q_pochhammer(Complex(q), k, ctx).real() *
             q_pochhammer(Complex(p.a * q), n, ctx).real()));
        const double Pk =
            std::pow(-p.a, static_cast<double>(k)) *
            std::pow(q, -0.5 * static_cast<double>(k * (k - 1))) *
            basic_hypergeometric(
                {Complex(std::pow(q, static_cast<double>(-k))),
                 Complex(std::pow(q, static_cast<double>(-n)))},
                {}, std::pow(q, static_cast<double>(k)) / p.a, ctx)
                .real();
        const double closed =
            pref * std::pow(static_cast<double>(eps), static_cast<double>(k)) *
            Pk;
        CHECK(av.at(k) ==
              doctest::Approx(closed).epsilon(1e-10).scale(1e-300));
        (void)sa;
      }
    }
  }
}

TEST_CASE("Al-Salam-Chihara base q^{-1}: component 0 matches the weight") {
  const QContext ctx(0.6);
  const double q = ctx.q;
  const double a = 3.0, b = 0.5;
  const ASCParams p{a, b, ASCDirection::base_q_inverse};
  const double tail = q_pochhammer_inf(Complex(b * q / a), ctx).real() /
                      q_pochhammer_inf(Complex(q / (a * a)), ctx).real();
  for (long n : {0L, 1L, 2L, 5L}) {
    const double y = std::pow(q, static_cast<double>(n)) / a;
    const AtomVector av = asc_atom_vector(y, p, ctx);
    const double wn =
        std::pow(b / a, static_cast<double>(n)) *
        std::pow(q, static_cast<double>(n * n)) *
        (1.0 - std::pow(q, 2.0 * n) / (a * a)) / (1.0 - 1.0 / (a * a)) *
        (q_pochhammer(Complex(1.0 / (a * a)), n, ctx).real() *
         q_pochhammer(Complex(1.0 / (a * b)), n, ctx).real()) /
        (q_pochhammer(Complex(q), n, ctx).real() *
         q_pochhammer(Complex(b * q / a), n, ctx).real()) *
        tail;
    CHECK(av.at(0) == doctest::Approx(std::sqrt(wn)).epsilon(1e-10));
  }
}

TEST_CASE("Al-Salam-Chihara base q: ratio to the 3phi2 closed form is "
          "k-independent") {
  const QContext ctx(0.6);
  const double q = ctx.q;
  const ASCParams p{2.5, 0.3, ASCDirection::base_q};
  for (double y : {1.0 / p.a, 1.0 / (p.a * q)}) {
    const AtomVector av = asc_atom_vector(y, p, ctx);
    double ratio0 = 0.0;
    for (long k : {0L, 1L, 2L, 3L, 5L, 8L}) {
      // P_k(mu(y); a,b) = a^{-k} (ab;q)_k
      //                   3phi2(q^{-k}, a y, a/y; ab, 0; q, q)
      const double Pk =
          std::pow(p.a, static_cast<double>(-k)) *
          q_pochhammer(Complex(p.a * p.b), k, ctx).real() *
          basic_hypergeometric(
              {Complex(std::pow(q, static_cast<double>(-k))),
               Complex(p.a * y), Complex(p.a / y)},
              {Complex(p.a * p.b), Complex(0.0)}, Complex(q), ctx)
              .real();
      const double pk =
          Pk / std::sqrt(q_pochhammer(Complex(q), k, ctx).real() *
                         q_pochhammer(Complex(p.a * p.b), k, ctx).real());
      const double ratio = pk / av.at(k);
      if (k == 0)
        ratio0 = ratio;
      else
        CHECK(ratio == doctest::Approx(ratio0).epsilon(1e-10));
      CHECK(ratio0 > 0.0);  // sign convention agrees with the series
    }
  }
}

TEST_CASE("little q-Jacobi: ratio to the defining series is k-independent") {
  const QContext ctx(0.6);
  const double q = ctx.q;
  const LittleQJacobiParams p{0.5 * q * q, 1.3 / (q * q), -0.8};
  for (double y : {1.0 / p.d, p.r * p.d * std::pow(q, 3.0)}) {
    const AtomVector av = lqj_atom_vector(y, p, ctx);
    double ratio0 = 0.0;
    bool first = true;
    for (long k = 2; k <= 7; ++k) {
      // f_k = d^k sqrt((c q^{1-k}/(d^2 r); q)_inf / (q^{1-k}/r; q)_inf)
      //       2phi1(d y, d/y; c; q, r q^k), valid here since |r q^k| < 1.
      const double q1k = std::pow(q, 1.0 - static_cast<double>(k));
      const double num =
          q_pochhammer_inf(Complex(p.c * q1k / (p.d * p.d * p.r)), ctx).real();
      const double den = q_pochhammer_inf(Complex(q1k / p.r), ctx).real();
      REQUIRE(num / den > 0.0);
      const double fk =
          std::pow(p.d, static_cast<double>(k)) * std::sqrt(num / den) *
          basic_hypergeometric({Complex(p.d * y), Complex(p.d / y)},
                               {Complex(p.c)},
                               p.r * std::pow(q, static_cast<double>(k)), ctx)
              .real();
      const double ratio = fk / av.at(k);
      if (first) {
        ratio0 = ratio;
        first = false;
      } else {
        CHECK(ratio == doctest::Approx(ratio0).epsilon(1e-9));
      }
      CHECK(ratio0 > 0.0);
    }
  }
}

TEST_CASE("CKK: the two series representations agree and match the "
          "eigenvector") {
  const QContext ctx(0.6);
  const double q = ctx.q;
  const CKKParams p{1.0, 2.0};
  const double sc = std::sqrt(p.c);
  const double z = p.t / sc * q;  // positive-branch atom
  const AtomVector av = ckk_atom_vector(z, p, ctx);
  double ratio0 = 0.0;
  bool first = true;
  for (long k = 2; k <= 6; ++k) {
    const double qk = std::pow(q, static_cast<double>(k));
    REQUIRE(p.c * qk < 1.0);
    const double pref = std::sqrt(qk) * std::pow(-p.t, static_cast<double>(-k));
    const double pochk = q_pochhammer_inf(Complex(-p.c * qk), ctx).real();
    const double rep1 =
        pref * std::sqrt(pochk) *
        basic_hypergeometric({Complex(-q * z / (sc * p.t)), Complex(0.0)},
                             {Complex(q / (p.t * p.t))}, -p.c * qk, ctx)
            .real();
    const double rep2 =
        q_pochhammer_inf(Complex(-q * z / (sc * p.t)), ctx).real() /
        q_pochhammer_inf(Complex(q / (p.t * p.t)), ctx).real() * pref /
        std::sqrt(pochk) *
        basic_hypergeometric({Complex(-sc / (p.t * z)), Complex(-p.c * qk)},
                             {Complex(0.0)}, -q * z / (sc * p.t), ctx)
            .real();
    CHECK(rep1 == doctest::Approx(rep2).epsilon(1e-11));
    const double ratio = rep1 / av.at(k);
    if (first) {
      ratio0 = ratio;
      first = false;
    } else {
      CHECK(ratio == doctest::Approx(ratio0).epsilon(1e-9));
    }
    CHECK(ratio0 > 0.0);
  }
}

TEST_CASE("q-Hermite band kernel matches the closed-form density") {
  const QContext ctx(0.6);
  const double q = ctx.q;
  const ASCParams p{0.0, 0.0, ASCDirection::base_q};
  const double qinf = q_pochhammer_inf(Complex(q), ctx).real();
  for (double theta : {0.4, 1.1, 2.0, 2.9}) {
    const std::vector<double> g = asc_band_kernel(6, theta, p, ctx);
    const Complex e2 = std::polar(1.0, 2.0 * theta);
    const double w2 = std::norm(q_pochhammer_inf(e2, ctx));
    const double W = qinf * w2 / (2.0 * M_PI * std::sin(theta));
    for (long k = 0; k <= 6; ++k) {
      const double hk =
          q_hermite(k, std::cos(theta), q) /
          std::sqrt(q_pochhammer(Complex(q), k, ctx).real());
      CHECK(g[static_cast<size_t>(k)] ==
            doctest::Approx(hk * std::sqrt(W)).epsilon(1e-11));
    }
  }
}

TEST_CASE("pure-point families resolve the identity") {
  const QContext ctx(0.6);
  const double q = ctx.q;

  SUBCASE("Al-Salam-Chihara base q^{-1}") {
    const ASCParams p{3.0, 0.5, ASCDirection::base_q_inverse};
    std::vector<AtomVector> avs;
    for (long n = 0; n <= 50; ++n)
      avs.push_back(
          asc_atom_vector(std::pow(q, static_cast<double>(n)) / p.a, p, ctx));
    for (long k = 0; k <= 3; ++k)
      for (long l = k; l <= 3; ++l) {
        double s = 0.0;
        for (const auto& av : avs) s += av.at(k) * av.at(l);
        CHECK(s == doctest::Approx(k == l ? 1.0 : 0.0).epsilon(1e-9).scale(1.0));
      }
  }

  SUBCASE("Al-Salam-Carlitz II") {
    const ASCIIParams p{0.7, +1};
    std::vector<AtomVector> avs;
    for (long n = 0; n <= 50; ++n) avs.push_back(asc2_atom_vector(n, p, ctx));
    for (long k = 0; k <= 3; ++k)
      for (long l = k; l <= 3; ++l) {
        double s = 0.0;
        for (const auto& av : avs) s += av.at(k) * av.at(l);
        CHECK(s == doctest::Approx(k == l ? 1.0 : 0.0).epsilon(1e-9).scale(1.0));
      }
  }

  SUBCASE("CKK") {
    const CKKParams p{1.0, 2.0};
    std::vector<AtomVector> avs;
    for (long j = 0; j <= 40; ++j)
      avs.push_back(ckk_atom_vector(
          -std::sqrt(p.c) / p.t * std::pow(q, static_cast<double>(j)), p, ctx));
    for (long j = -10; j <= 40; ++j)
      avs.push_back(ckk_atom_vector(
          p.t / std::sqrt(p.c) * std::pow(q, static_cast<double>(j)), p, ctx));
    for (long k = -2; k <= 2; ++k)
      for (long l = k; l <= 2; ++l) {
        double s = 0.0;
        for (const auto& av : avs) s += av.at(k) * av.at(l);
        CHECK(s == doctest::Approx(k == l ? 1.0 : 0.0).epsilon(1e-8).scale(1.0));
      }
  }
}

TEST_CASE("band + atoms resolve the identity (Parseval)") {
  const QContext ctx(0.6);
  const double q = ctx.q;

  SUBCASE("Al-Salam-Chihara base q") {
    const ASCParams p{2.5, 0.3, ASCDirection::base_q};
    std::vector<AtomVector> avs;
    for (long j = 0;; ++j) {
      const double y = std::pow(q, static_cast<double>(-j)) / p.a;
      if (!(std::abs(y) < 1.0)) break;
      avs.push_back(asc_atom_vector(y, p, ctx));
    }
    REQUIRE(avs.size() == 2);
    const Quadrature quad = gauss_legendre(400, 1e-9, M_PI - 1e-9);
    std::vector<std::vector<double>> band;
    band.reserve(quad.x.size());
    for (double th : quad.x) band.push_back(asc_band_kernel(5, th, p, ctx));
    for (long k = 0; k <= 5; ++k)
      for (long l = k; l <= 5; ++l) {
        double s = 0.0;
        for (const auto& av : avs) s += av.at(k) * av.at(l);
        for (size_t i = 0; i < quad.x.size(); ++i)
          s += quad.w[i] * std::sin(quad.x[i]) *
               band[i][static_cast<size_t>(k)] *
               band[i][static_cast<size_t>(l)];
        CHECK(s == doctest::Approx(k == l ? 1.0 : 0.0).epsilon(1e-8).scale(1.0));
      }
  }

  SUBCASE("little q-Jacobi") {
    const LittleQJacobiParams p{0.5 * q * q, 1.3 / (q * q), -0.8};
    std::vector<AtomVector> avs;
    for (long j = 0; j <= 10; ++j) {
      const double y = std::pow(q, static_cast<double>(-j)) / p.d;
      if (std::abs(y) < 1.0) avs.push_back(lqj_atom_vector(y, p, ctx));
    }
    for (long j = -5; j <= 45; ++j) {
      const double y = p.r * p.d * std::pow(q, static_cast<double>(j));
      if (std::abs(y) < 1.0) avs.push_back(lqj_atom_vector(y, p, ctx));
    }
    const long kmin = -2, kmax = 3;
    const Quadrature quad = gauss_legendre(400, 1e-9, M_PI - 1e-9);
    std::vector<std::vector<double>> band;
    band.reserve(quad.x.size());
    for (double th : quad.x)
      band.push_back(lqj_band_kernel(kmin, kmax, th, p, ctx));
    for (long k = kmin; k <= kmax; ++k)
      for (long l = k; l <= kmax; ++l) {
        double s = 0.0;
        for (const auto& av : avs) s += av.at(k) * av.at(l);
        for (size_t i = 0; i < quad.x.size(); ++i)
          s += quad.w[i] * std::sin(quad.x[i]) *
               band[i][static_cast<size_t>(k - kmin)] *
               band[i][static_cast<size_t>(l - kmin)];
        CHECK(s == doctest::Approx(k == l ? 1.0 : 0.0).epsilon(1e-8).scale(1.0));
      }
  }
}

TEST_CASE("little q-Jacobi parameter symmetry and lattice shift") {
  const QContext ctx(0.6);
  const double q = ctx.q;
  const LittleQJacobiParams p{0.5 * q * q, 1.3 / (q * q), -0.8};

  SUBCASE("(c,d,r) -> (c, c/d, r d^2/c)") {
    const LittleQJacobiParams ps{p.c, p.c / p.d, p.r * p.d * p.d / p.c};
    for (double y : {p.r * p.d * std::pow(q, 3.0), p.r * p.d * std::pow(q, 5.0)}) {
      const AtomVector a1 = lqj_atom_vector(y, p, ctx);
      const AtomVector a2 = lqj_atom_vector(y, ps, ctx);
      for (long k = -3; k <= 5; ++k)
        CHECK(a1.at(k) == doctest::Approx(a2.at(k)).epsilon(1e-9).scale(1e-12));
    }
  }

  SUBCASE("r -> q^p r shifts k by p (times sign(d)^p)") {
    for (int pp : {1, 2}) {
      const LittleQJacobiParams ps{p.c, p.d,
                                   p.r * std::pow(q, static_cast<double>(pp))};
      for (double y : {p.r * p.d * std::pow(q, 4.0), 1.0 / p.d}) {
        const AtomVector a1 = lqj_atom_vector(y, p, ctx);
        const AtomVector a2 = lqj_atom_vector(y, ps, ctx);
        const double sg = p.d < 0 && (pp % 2) ? -1.0 : 1.0;
        for (long k = -3; k <= 5; ++k)
          CHECK(a2.at(k) ==
                doctest::Approx(sg * a1.at(k + pp)).epsilon(1e-9).scale(1e-12));
      }
    }
  }
}

TEST_CASE("q-difference and contiguous lemmas hold on sampled atom grids") {
  for (double qv : {0.6, 0.35}) {
    CAPTURE(qv);
    const QContext ctx(qv);
    for (LemmaId id :
         {LemmaId::J_REL, LemmaId::J_QD1, LemmaId::J_QD1C, LemmaId::J_QD2,
          LemmaId::ASC_REL, LemmaId::ASC_QD1, LemmaId::ASC_QD2,
          LemmaId::ASC_QD3, LemmaId::ASCII_QD, LemmaId::CKK_C1,
          LemmaId::CKK_C2, LemmaId::CKK_QD}) {
      CAPTURE(lemma_name(id));
      const std::vector<LemmaCase> cases = sample_lemma_cases(id, ctx, 20);
      REQUIRE(cases.size() >= 20);
      for (const LemmaCase& lc : cases) {
        CAPTURE(lc.y);
        CAPTURE(lc.k);
        CHECK(lemma_residual(lc, ctx) < 1e-9);
      }
    }
  }
}

TEST_CASE("atom labels round-trip and reject off-grid points") {
  const QContext ctx(0.6);
  const double q = ctx.q;
  const LittleQJacobiParams p{0.5 * q * q, 1.3 / (q * q), -0.8};
  const AtomLabel l1 = lqj_atom_label(1.0 / (p.d * q), p, ctx);
  CHECK(l1.branch == 1);
  CHECK(l1.index == 1);
  const AtomLabel l3 = lqj_atom_label(p.r * p.d * std::pow(q, 4.0), p, ctx);
  CHECK(l3.branch == 3);
  CHECK(l3.index == 4);
  CHECK_THROWS_AS(lqj_atom_label(0.123456789, p, ctx), DomainError);

  const CKKParams cp{1.0, 2.0};
  const AtomLabel c1 = ckk_atom_label(-std::sqrt(cp.c) / cp.t * q * q, cp, ctx);
  CHECK(c1.branch == 1);
  CHECK(c1.index == 2);
  const AtomLabel c2 =
      ckk_atom_label(cp.t / std::sqrt(cp.c) / q, cp, ctx);
  CHECK(c2.branch == 2);
  CHECK(c2.index == -1);
  CHECK_THROWS_AS(ckk_atom_label(0.777, cp, ctx), DomainError);
}
