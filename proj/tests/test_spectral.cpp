#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "qg/spectral.hpp"

using namespace qg;
using std::abs;

namespace {

double mu(double y) { return 0.5 * (y + 1.0 / y); }

Coeffs random_coeffs(std::mt19937& rng, long k_min, int len) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Coeffs c;
  c.k_min = k_min;
  c.u.resize(static_cast<size_t>(len));
  for (double& x : c.u) x = dist(rng);
  return c;
}

double l2_dot(const Coeffs& u, const Coeffs& v) {
  double s = 0.0;
  const long lo = std::min(u.k_min, v.k_min);
  const long hi = std::max(u.k_max(), v.k_max());
  for (long k = lo; k <= hi; ++k) s += u.at(k) * v.at(k);
  return s;
}

void check_parseval(Family f, const FamilyParams& p, const QContext& ctx,
                    long k_min, int len) {
  std::mt19937 rng(20260824u + static_cast<unsigned>(f));
  for (int trial = 0; trial < 50; ++trial) {
    const Coeffs u = random_coeffs(rng, k_min, len);
    const Coeffs v = random_coeffs(rng, k_min, len);
    const double direct = l2_dot(u, v);
    const double via_measure = spectral_inner_product(u, v, f, p, ctx);
    CHECK(abs(via_measure - direct) < 1e-6);
  }
}

}  // namespace

TEST_CASE("truncate: windows, closed forms, symmetry") {
  QContext ctx(0.5);
  const ASCIIParams ap{0.7, +1};
  const auto spec = make_operator(Family::asc2, FamilyParams{ap}, ctx);

  // size-1 window is just the diagonal entry
  const Eigen::MatrixXd m1 = truncate(spec, 3, 3);
  REQUIRE(m1.rows() == 1);
  CHECK(m1(0, 0) == doctest::Approx(asc2_coeff_b(3, ap, ctx)).epsilon(1e-15));

  // window [0,1] against the closed-form coefficients
  const double sa = std::sqrt(ap.a);
  const Eigen::MatrixXd m2 = truncate(spec, 0, 1);
  REQUIRE(m2.rows() == 2);
  CHECK(m2(0, 0) == doctest::Approx(sa + 1.0 / sa).epsilon(1e-14));
  CHECK(m2(1, 1) == doctest::Approx((sa + 1.0 / sa) / ctx.q).epsilon(1e-14));
  CHECK(m2(0, 1) ==
        doctest::Approx(std::sqrt(1.0 - ctx.q) / std::sqrt(ctx.q))
            .epsilon(1e-14));
  CHECK(m2(1, 0) == m2(0, 1));

  // symmetry on a doubly-infinite window
  const LittleQJacobiParams lp{0.18, 1.3 / 0.36, -0.8};
  QContext ctx6(0.6);
  const auto lspec = make_operator(Family::lqj, FamilyParams{lp}, ctx6);
  const Eigen::MatrixXd M = truncate(lspec, -7, 9);
  CHECK((M - M.transpose()).cwiseAbs().maxCoeff() == 0.0);

  // half-line windows must not cross the boundary
  CHECK_THROWS_AS(truncate(spec, -1, 3), DomainError);
}

TEST_CASE("make_operator rejects inadmissible parameters") {
  QContext ctx(0.5);
  CHECK_THROWS_AS(make_operator(Family::lqj,
                                FamilyParams{LittleQJacobiParams{1.5, 2.0, -1.0}},
                                ctx),
                  DomainError);
  CHECK_THROWS_AS(
      make_operator(Family::asc_q,
                    FamilyParams{ASCParams{3.0, 0.5, ASCDirection::base_q}},
                    ctx),
      DomainError);  // ab > 1
  CHECK_THROWS_AS(
      make_operator(
          Family::asc_q_inverse,
          FamilyParams{ASCParams{0.9, 0.9, ASCDirection::base_q_inverse}},
          ctx),
      DomainError);  // ab < 1
  CHECK_THROWS_AS(make_operator(Family::asc2,
                                FamilyParams{ASCIIParams{2.5, +1}}, ctx),
                  DomainError);  // a >= 1/q
  CHECK_THROWS_AS(make_operator(Family::ckk, FamilyParams{CKKParams{1.0, 0.6}},
                                ctx),
                  DomainError);  // |t| <= sqrt(q)
  CHECK_THROWS_AS(make_operator(Family::ckk,
                                FamilyParams{ASCIIParams{0.7, +1}}, ctx),
                  DomainError);  // params/family mismatch
}

TEST_CASE("eigen_oracle: closed forms and postconditions") {
  QContext ctx(0.5);
  const ASCIIParams ap{0.7, +1};
  const auto spec = make_operator(Family::asc2, FamilyParams{ap}, ctx);

  const EigenSystem e1 = eigen_oracle(truncate(spec, 0, 0));
  CHECK(e1.values[0] ==
        doctest::Approx(asc2_coeff_b(0, ap, ctx)).epsilon(1e-15));

  const Eigen::MatrixXd m2 = truncate(spec, 0, 1);
  const EigenSystem e2 = eigen_oracle(m2);
  const double half_sum = 0.5 * (m2(0, 0) + m2(1, 1));
  const double disc =
      std::sqrt(0.25 * (m2(0, 0) - m2(1, 1)) * (m2(0, 0) - m2(1, 1)) +
                m2(0, 1) * m2(0, 1));
  CHECK(e2.values[0] == doctest::Approx(half_sum - disc).epsilon(1e-14));
  CHECK(e2.values[1] == doctest::Approx(half_sum + disc).epsilon(1e-14));

  // values come back ascending on a generic window
  const EigenSystem e3 = eigen_oracle(truncate(spec, 0, 30));
  CHECK(std::is_sorted(e3.values.begin(), e3.values.end()));

  // non-symmetric input is rejected
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(eigen_oracle(bad), DomainError);
}

TEST_CASE("eigen_oracle: truncated q^{-n} grid operator, largest eigenvalues "
          "approach the exact grid") {
  QContext ctx(0.5);
  const ASCIIParams ap{0.7, +1};
  const auto spec = make_operator(Family::asc2, FamilyParams{ap}, ctx);
  const EigenSystem es = eigen_oracle(truncate(spec, 0, 199));
  REQUIRE(es.values.size() == 200);
  // relative error against the exact spectrum, by depth below the top rank
  auto rel = [&](int rank) {
    const double grid =
        std::pow(ctx.q, -static_cast<double>(199 - rank)) / std::sqrt(ap.a);
    return abs(es.values[static_cast<size_t>(199 - rank)] - grid) / grid;
  };
  double prev = 1e9;
  for (int rank : {0, 10, 20, 30, 40}) {
    const double r = rel(rank);
    CHECK(r < prev);  // truncation error decays with depth below the cut
    prev = r;
  }
  CHECK(rel(40) < 1e-6);
  CHECK(rel(60) < 1e-9);
}

TEST_CASE("spectral_atoms: exact index arithmetic per family") {
  SUBCASE("growing branch grids are emptied by the |y| < 1 filter") {
    // |1/d| >= 1 and |d/c| >= 1: both outward-growing candidate grids are
    // fully excluded, so every remaining atom comes from the accumulating
    // r*d*q^k grid (which always enters (-1,1) eventually).
    QContext ctx(0.5);
    const LittleQJacobiParams p{0.2, 0.5, -3.0};
    const SpectralMeasure m =
        spectral_atoms(Family::lqj, FamilyParams{p}, ctx, 10);
    CHECK(m.has_band);
    REQUIRE(!m.atoms.empty());
    for (auto& a : m.atoms) CHECK(a.branch == 3);
    // oracle cross-check that the surviving grid is genuine spectrum
    const auto spec = make_operator(Family::lqj, FamilyParams{p}, ctx);
    std::vector<double> d, o;
    tridiag_of(spec, -220, 220, d, o);
    for (size_t i = 0; i < 3; ++i)
      CHECK(abs(tridiag_nearest_eigenvalue(d, o, m.atoms[i].value) -
                m.atoms[i].value) < 1e-9);
  }
  SUBCASE("bounded half-line operator: finite atom list above the band") {
    QContext ctx(0.5);
    const ASCParams p{2.0, 0.1, ASCDirection::base_q};
    const SpectralMeasure m =
        spectral_atoms(Family::asc_q, FamilyParams{p}, ctx);
    CHECK(m.has_band);
    // candidates q^{-k}/a = 1/2, 1, 2, ... and q^{-k}/b = 10, ...: only
    // y = 1/2 survives the |y| < 1 filter
    REQUIRE(m.atoms.size() == 1);
    CHECK(m.atoms[0].y == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(m.atoms[0].value == doctest::Approx(mu(0.5)).epsilon(1e-15));
    // cross-check against the truncation oracle: the only eigenvalues
    // outside [-1,1] cluster at the single atom
    const auto spec = make_operator(Family::asc_q, FamilyParams{p}, ctx);
    const EigenSystem es = eigen_oracle(truncate(spec, 0, 399));
    int outside = 0;
    for (double lam : es.values)
      if (abs(lam) > 1.0 + 1e-8) {
        ++outside;
        CHECK(lam == doctest::Approx(mu(0.5)).epsilon(1e-10));
      }
    CHECK(outside == 1);
  }
  SUBCASE("two-sided unbounded grid") {
    QContext ctx(0.5);
    const CKKParams p{1.0, 2.0};
    const SpectralMeasure m =
        spectral_atoms(Family::ckk, FamilyParams{p}, ctx, 10);
    CHECK(!m.has_band);
    auto has = [&](double z) {
      return std::any_of(m.atoms.begin(), m.atoms.end(), [&](auto& a) {
        return abs(a.value - z) < 1e-12 * std::max(1.0, abs(z));
      });
    };
    for (int k = 0; k <= 5; ++k) CHECK(has(-0.5 * std::pow(0.5, k)));
    for (int k = -5; k <= 5; ++k) CHECK(has(2.0 * std::pow(0.5, k)));
    // negative branch on one side only
    for (auto& a : m.atoms)
      CHECK(((a.branch == 1 && a.value < 0.0) ||
             (a.branch == 2 && a.value > 0.0)));
  }
  SUBCASE("pure-point half-line grids") {
    QContext ctx(0.5);
    const SpectralMeasure mi = spectral_atoms(
        Family::asc_q_inverse,
        FamilyParams{ASCParams{3.0, 0.5, ASCDirection::base_q_inverse}}, ctx,
        10);
    CHECK(!mi.has_band);
    for (long k = 0; k <= 10; ++k)
      CHECK(mi.atoms[static_cast<size_t>(k)].value ==
            doctest::Approx(mu(std::pow(0.5, k) / 3.0)).epsilon(1e-14));
    const SpectralMeasure ma =
        spectral_atoms(Family::asc2, FamilyParams{ASCIIParams{0.7, -1}}, ctx,
                       10);
    CHECK(!ma.has_band);
    for (long n = 0; n <= 10; ++n)
      CHECK(ma.atoms[static_cast<size_t>(n)].value ==
            doctest::Approx(-std::pow(0.5, -n) / std::sqrt(0.7))
                .epsilon(1e-14));
  }
  SUBCASE("atoms lie strictly outside (-1,1) for the band families") {
    QContext ctx(0.6);
    const LittleQJacobiParams p{0.18, 1.3 / 0.36, -0.8};
    const SpectralMeasure m =
        spectral_atoms(Family::lqj, FamilyParams{p}, ctx, 30);
    CHECK(m.atoms.size() >= 5);
    for (auto& a : m.atoms) {
      CHECK(abs(a.value) > 1.0);
      CHECK(abs(a.y) < 1.0);
    }
  }
}

TEST_CASE("band density: positive wherever evaluated") {
  QContext ctx(0.6);
  const LittleQJacobiParams lp{0.18, 1.3 / 0.36, -0.8};
  const SpectralMeasure ml = spectral_atoms(Family::lqj, FamilyParams{lp}, ctx);
  const ASCParams ap{2.5, 0.3, ASCDirection::base_q};
  const SpectralMeasure ma =
      spectral_atoms(Family::asc_q, FamilyParams{ap}, ctx);
  REQUIRE(ml.has_band);
  REQUIRE(ma.has_band);
  for (double x = -0.95; x < 1.0; x += 0.1) {
    CHECK(ml.band_density(x) > 0.0);
    CHECK(ma.band_density(x) > 0.0);
  }
}

TEST_CASE("atom convergence: truncation eigenvalues against the exact grids") {
  SUBCASE("graded half-line grids at machine precision (Sturm bisection)") {
    QContext ctx(0.5);
    std::vector<double> d, o;
    // q^{-n} grid family
    const auto s2 =
        make_operator(Family::asc2, FamilyParams{ASCIIParams{0.7, +1}}, ctx);
    tridiag_of(s2, 0, 399, d, o);
    for (long n = 0; n < 5; ++n) {
      const double grid = std::pow(ctx.q, -static_cast<double>(n)) /
                          std::sqrt(0.7);
      CHECK(abs(tridiag_nearest_eigenvalue(d, o, grid) - grid) <
            1e-6 * abs(grid));
    }
    // unbounded mu grid family
    const auto si = make_operator(
        Family::asc_q_inverse,
        FamilyParams{ASCParams{3.0, 0.5, ASCDirection::base_q_inverse}}, ctx);
    tridiag_of(si, 0, 399, d, o);
    for (long k = 0; k < 5; ++k) {
      const double grid = mu(std::pow(ctx.q, static_cast<double>(k)) / 3.0);
      CHECK(abs(tridiag_nearest_eigenvalue(d, o, grid) - grid) <
            1e-6 * abs(grid));
    }
  }
  SUBCASE("doubly-infinite families on centered windows") {
    // eigenpairs are compared only when the eigenvector carries < 1e-8 mass
    // within the outer 20-index boundary margin of the window
    QContext ctx6(0.6);
    const LittleQJacobiParams lp{0.18, 1.3 / 0.36, -0.8};
    const auto ls = make_operator(Family::lqj, FamilyParams{lp}, ctx6);
    std::vector<double> d, o;
    tridiag_of(ls, -200, 200, d, o);
    SpectralMeasure m = spectral_atoms(Family::lqj, FamilyParams{lp}, ctx6, 30);
    std::sort(m.atoms.begin(), m.atoms.end(),
              [](auto& a, auto& b) { return abs(a.value) < abs(b.value); });
    int used = 0;
    for (const SpectralAtom& a : m.atoms) {
      if (used >= 5) break;
      const AtomVector av = lqj_atom_vector(a.y, lp, ctx6);
      double margin_mass = 0.0;
      for (long k = 181; k <= 200; ++k)
        margin_mass += av.at(k) * av.at(k) + av.at(-k) * av.at(-k);
      if (margin_mass >= 1e-8) continue;
      ++used;
      CHECK(abs(tridiag_nearest_eigenvalue(d, o, a.value) - a.value) < 1e-4);
    }
    CHECK(used == 5);

    QContext ctx5(0.5);
    const CKKParams cp{1.0, 2.0};
    const auto cs = make_operator(Family::ckk, FamilyParams{cp}, ctx5);
    tridiag_of(cs, -200, 200, d, o);
    used = 0;
    for (const SpectralAtom& a :
         spectral_atoms(Family::ckk, FamilyParams{cp}, ctx5, 8).atoms) {
      if (abs(a.value) < 0.05 || abs(a.value) > 20.0) continue;
      const AtomVector av = ckk_atom_vector(a.y, cp, ctx5);
      double margin_mass = 0.0;
      for (long k = 181; k <= 200; ++k)
        margin_mass += av.at(k) * av.at(k) + av.at(-k) * av.at(-k);
      if (margin_mass >= 1e-8) continue;
      ++used;
      CHECK(abs(tridiag_nearest_eigenvalue(d, o, a.value) - a.value) < 1e-4);
    }
    CHECK(used >= 5);
  }
}

TEST_CASE("transform: e_0 maps to the zeroth orthonormal eigenfunction") {
  QContext ctx(0.6);
  const LittleQJacobiParams lp{0.18, 1.3 / 0.36, -0.8};
  const Coeffs e0{0, {1.0}};
  const SpectralMeasure m =
      spectral_atoms(Family::lqj, FamilyParams{lp}, ctx, 10);
  for (size_t i = 0; i < std::min<size_t>(m.atoms.size(), 4); ++i) {
    const double f0 = lqj_atom_vector(m.atoms[i].y, lp, ctx).at(0);
    CHECK(transform_at_atom(e0, Family::lqj, FamilyParams{lp}, m.atoms[i],
                            ctx) == doctest::Approx(f0).epsilon(1e-14));
  }
  for (double th : {0.4, 1.3, 2.8}) {
    const double g0 = lqj_band_kernel(0, 0, th, lp, ctx)[0];
    CHECK(transform_band(e0, Family::lqj, FamilyParams{lp}, th, ctx) ==
          doctest::Approx(g0).epsilon(1e-14));
  }
  // families without a band reject band evaluation
  CHECK_THROWS_AS(transform_band(e0, Family::ckk,
                                 FamilyParams{CKKParams{1.0, 2.0}}, 1.0,
                                 QContext(0.5)),
                  DomainError);
}

TEST_CASE("transform at atoms matches truncation-oracle eigenvectors") {
  // bounded half-line operator: the dense oracle resolves the atom
  // eigenpair, and the transform of e_j at the atom is the j-th entry of
  // the corresponding eigenvector
  QContext ctx(0.6);
  const ASCParams p{2.5, 0.3, ASCDirection::base_q};
  const auto spec = make_operator(Family::asc_q, FamilyParams{p}, ctx);
  const EigenSystem es = eigen_oracle(truncate(spec, 0, 399));
  const SpectralMeasure m = spectral_atoms(Family::asc_q, FamilyParams{p}, ctx);
  REQUIRE(m.atoms.size() == 2);
  for (const SpectralAtom& a : m.atoms) {
    // locate the truncation eigenpair at the atom
    size_t best = 0;
    for (size_t i = 1; i < es.values.size(); ++i)
      if (abs(es.values[i] - a.value) < abs(es.values[best] - a.value))
        best = i;
    CHECK(abs(es.values[best] - a.value) < 1e-10);
    Eigen::VectorXd vec = es.vectors.col(static_cast<long>(best));
    // align the sign convention (component 0 positive)
    if (vec(0) < 0.0) vec = -vec;
    for (long j = 0; j < 8; ++j) {
      const Coeffs ej{j, {1.0}};
      CHECK(abs(transform_at_atom(ej, Family::asc_q, FamilyParams{p}, a, ctx) -
                vec(j)) < 1e-6);
    }
  }
}

TEST_CASE("Parseval: 50 random finitely supported pairs per family") {
  SUBCASE("band plus atoms, doubly infinite") {
    check_parseval(Family::lqj,
                   FamilyParams{LittleQJacobiParams{0.18, 1.3 / 0.36, -0.8}},
                   QContext(0.6), -3, 7);
  }
  SUBCASE("band plus atoms, half line") {
    check_parseval(Family::asc_q,
                   FamilyParams{ASCParams{2.5, 0.3, ASCDirection::base_q}},
                   QContext(0.6), 0, 6);
  }
  SUBCASE("pure point, half line") {
    check_parseval(
        Family::asc_q_inverse,
        FamilyParams{ASCParams{3.0, 0.5, ASCDirection::base_q_inverse}},
        QContext(0.5), 0, 6);
    check_parseval(Family::asc2, FamilyParams{ASCIIParams{0.7, +1}},
                   QContext(0.5), 0, 6);
  }
  SUBCASE("pure point, doubly infinite") {
    check_parseval(Family::ckk, FamilyParams{CKKParams{1.0, 2.0}},
                   QContext(0.5), -3, 7);
  }
}
