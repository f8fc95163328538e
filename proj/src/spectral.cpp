#include "qg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qg/quadrature.hpp"

namespace qg {

namespace {

template <typename T>
const T& params_as(const FamilyParams& p, const char* what) {
  const T* pp = std::get_if<T>(&p);
  if (!pp) throw DomainError(std::string("family/params mismatch: expected ") +
                             what);
  return *pp;
}

}  // namespace

JacobiOperatorSpec make_operator(Family f, const FamilyParams& p,
                                 const QContext& ctx) {
  JacobiOperatorSpec spec;
  spec.family = f;
  const QContext c = ctx;
  switch (f) {
    case Family::lqj: {
      const auto& pr = params_as<LittleQJacobiParams>(p, "LittleQJacobiParams");
      if (!(pr.c > 0.0 && pr.c < 1.0) || pr.d == 0.0 || pr.r == 0.0)
        throw DomainError("make_operator: lqj requires 0 < c < 1, d != 0, "
                          "r != 0");
      spec.half_line = false;
      spec.a = [pr, c](long k) { return lqj_coeff_a(k, pr, c); };
      spec.b = [pr, c](long k) { return lqj_coeff_b(k, pr, c); };
      break;
    }
    case Family::asc_q: {
      const auto& pr = params_as<ASCParams>(p, "ASCParams");
      if (pr.direction != ASCDirection::base_q)
        throw DomainError("make_operator: asc_q requires base_q direction");
      if (!(pr.a * pr.b < 1.0))
        throw DomainError("make_operator: asc_q requires ab < 1");
      spec.half_line = true;
      spec.a = [pr, c](long k) { return asc_coeff_a(k, pr, c); };
      spec.b = [pr, c](long k) { return asc_coeff_b(k, pr, c); };
      break;
    }
    case Family::asc_q_inverse: {
      const auto& pr = params_as<ASCParams>(p, "ASCParams");
      if (pr.direction != ASCDirection::base_q_inverse)
        throw DomainError(
            "make_operator: asc_q_inverse requires base_q_inverse direction");
      if (!(pr.a > 0.0 && pr.b > 0.0 && pr.a * pr.b > 1.0 &&
            pr.a / pr.b > ctx.q))
        throw DomainError(
            "make_operator: asc_q_inverse requires a, b > 0, ab > 1, a/b > q");
      spec.half_line = true;
      spec.a = [pr, c](long k) { return asc_coeff_a(k, pr, c); };
      spec.b = [pr, c](long k) { return asc_coeff_b(k, pr, c); };
      break;
    }
    case Family::asc2: {
      const auto& pr = params_as<ASCIIParams>(p, "ASCIIParams");
      if (!(pr.a > 0.0 && pr.a < 1.0 / ctx.q) ||
          (pr.eps != 1 && pr.eps != -1))
        throw DomainError(
            "make_operator: asc2 requires 0 < a < 1/q and eps = +-1");
      spec.half_line = true;
      spec.a = [pr, c](long k) { return asc2_coeff_a(k, pr, c); };
      spec.b = [pr, c](long k) { return asc2_coeff_b(k, pr, c); };
      break;
    }
    case Family::ckk: {
      const auto& pr = params_as<CKKParams>(p, "CKKParams");
      if (!(pr.c > 0.0 && std::abs(pr.t) > std::sqrt(ctx.q)))
        throw DomainError(
            "make_operator: ckk requires c > 0 and |t| > sqrt(q)");
      spec.half_line = false;
      spec.a = [pr, c](long k) { return ckk_coeff_a(k, pr, c); };
      spec.b = [pr, c](long k) { return ckk_coeff_b(k, pr, c); };
      break;
    }
  }
  return spec;
}

Eigen::MatrixXd truncate(const JacobiOperatorSpec& spec, long k_min,
                         long k_max) {
  if (!spec.a || !spec.b)
    throw DomainError("truncate: operator has no coefficient maps");
  if (k_min > k_max) throw DomainError("truncate: empty window");
  if (spec.half_line && k_min < 0)
    throw DomainError("truncate: half-line window must start at k >= 0");
  const long n = k_max - k_min + 1;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (long i = 0; i < n; ++i) M(i, i) = spec.b(k_min + i);
  for (long i = 0; i + 1 < n; ++i) {
    const double a = spec.a(k_min + i);
    if (!(a > 0.0))
      throw DomainError("truncate: off-diagonal coefficient not positive");
    M(i, i + 1) = a;
    M(i + 1, i) = a;
  }
  return M;
}

EigenSystem eigen_oracle(const Eigen::MatrixXd& M) {
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw DomainError("eigen_oracle: matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigen_oracle: eigensolver failed to converge");
  const Eigen::MatrixXd& V = es.eigenvectors();
  const Eigen::VectorXd& lam = es.eigenvalues();
  const long n = M.rows();
  const double normM = M.norm();
  const Eigen::MatrixXd R = M * V - V * lam.asDiagonal();
  for (long i = 0; i < n; ++i)
    if (!(R.col(i).norm() < 1e-10 * std::max(normM, 1e-300)))
      throw std::runtime_error("eigen_oracle: residual postcondition failed");
  const Eigen::MatrixXd G =
      V.transpose() * V - Eigen::MatrixXd::Identity(n, n);
  if (!(G.cwiseAbs().maxCoeff() < 1e-10))
    throw std::runtime_error(
        "eigen_oracle: orthonormality postcondition failed");
  EigenSystem out;
  out.values.assign(lam.data(), lam.data() + n);
  out.vectors = V;
  return out;
}

long tridiag_count_below(const std::vector<double>& diag,
                         const std::vector<double>& off, double x) {
  if (!diag.empty() && off.size() + 1 != diag.size())
    throw DomainError("tridiag_count_below: need off.size() == diag.size()-1");
  long count = 0;
  double d = 1.0;
  for (size_t i = 0; i < diag.size(); ++i) {
    double t = (diag[i] - x) - (i ? off[i - 1] * off[i - 1] / d : 0.0);
    if (t == 0.0) t = 1e-300;  // pivot breakdown guard
    if (t < 0.0) ++count;
    d = t;
  }
  return count;
}

double tridiag_eigenvalue(const std::vector<double>& diag,
                          const std::vector<double>& off, long i) {
  const long n = static_cast<long>(diag.size());
  if (i < 0 || i >= n) throw DomainError("tridiag_eigenvalue: index range");
  double lo = diag[0], hi = diag[0];
  for (long j = 0; j < n; ++j) {
    const double radius = (j > 0 ? std::abs(off[j - 1]) : 0.0) +
                          (j + 1 < n ? std::abs(off[j]) : 0.0);
    lo = std::min(lo, diag[j] - radius);
    hi = std::max(hi, diag[j] + radius);
  }
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid == lo || mid == hi) break;
    if (tridiag_count_below(diag, off, mid) > i)
      hi = mid;
    else
      lo = mid;
  }
  return lo + 0.5 * (hi - lo);
}

double tridiag_nearest_eigenvalue(const std::vector<double>& diag,
                                  const std::vector<double>& off, double x) {
  const long n = static_cast<long>(diag.size());
  const long c = tridiag_count_below(diag, off, x);
  double best = 0.0;
  bool have = false;
  for (long i : {c - 1, c}) {
    if (i < 0 || i >= n) continue;
    const double lam = tridiag_eigenvalue(diag, off, i);
    if (!have || std::abs(lam - x) < std::abs(best - x)) {
      best = lam;
      have = true;
    }
  }
  if (!have) throw DomainError("tridiag_nearest_eigenvalue: empty matrix");
  return best;
}

void tridiag_of(const JacobiOperatorSpec& spec, long k_min, long k_max,
                std::vector<double>& diag, std::vector<double>& off) {
  if (k_min > k_max) throw DomainError("tridiag_of: empty window");
  if (spec.half_line && k_min < 0)
    throw DomainError("tridiag_of: half-line window must start at k >= 0");
  const long n = k_max - k_min + 1;
  diag.resize(static_cast<size_t>(n));
  off.resize(static_cast<size_t>(n - 1));
  for (long i = 0; i < n; ++i) diag[static_cast<size_t>(i)] = spec.b(k_min + i);
  for (long i = 0; i + 1 < n; ++i) {
    const double a = spec.a(k_min + i);
    if (!(a > 0.0))
      throw DomainError("tridiag_of: off-diagonal coefficient not positive");
    off[static_cast<size_t>(i)] = a;
  }
}

// ---------------------------------------------------------------------------
// Spectral measures
// ---------------------------------------------------------------------------
namespace {

double mu_value(double y) { return 0.5 * (y + 1.0 / y); }

/// Smallest integer k with g * q^k < 1 (g > 0, 0 < q < 1).
long first_index_inside(double g, double q) {
  long k = static_cast<long>(std::floor(-std::log(g) / std::log(q))) + 1;
  while (g * std::pow(q, static_cast<double>(k)) >= 1.0) ++k;
  while (g * std::pow(q, static_cast<double>(k - 1)) < 1.0) --k;
  return k;
}

void push_atom(std::vector<SpectralAtom>& atoms, double value, int branch,
               long index, double y) {
  for (const SpectralAtom& a : atoms)
    if (std::abs(a.value - value) <= 1e-12 * std::max(1.0, std::abs(value)))
      return;  // branch grids may overlap; keep one representative
  atoms.push_back(SpectralAtom{value, branch, index, y});
}

}  // namespace

SpectralMeasure spectral_atoms(Family f, const FamilyParams& p,
                               const QContext& ctx, long max_per_branch) {
  make_operator(f, p, ctx);  // hypothesis validation
  SpectralMeasure m;
  const double q = ctx.q;
  switch (f) {
    case Family::lqj: {
      const auto& pr = std::get<LittleQJacobiParams>(p);
      m.has_band = true;
      m.band_density = [pr, ctx](double x) {
        return lqj_band_weight(std::acos(x), pr, ctx);
      };
      for (long k = 0; k <= max_per_branch; ++k) {
        const double y = std::pow(q, -static_cast<double>(k)) / pr.d;
        if (std::abs(y) >= 1.0) break;
        push_atom(m.atoms, mu_value(y), 1, k, y);
      }
      for (long k = 0; k <= max_per_branch; ++k) {
        const double y = (pr.d / pr.c) * std::pow(q, -static_cast<double>(k));
        if (std::abs(y) >= 1.0) break;
        push_atom(m.atoms, mu_value(y), 2, k, y);
      }
      const long k0 = first_index_inside(std::abs(pr.r * pr.d), q);
      for (long j = 0; j < max_per_branch; ++j) {
        const double y = pr.r * pr.d * std::pow(q, static_cast<double>(k0 + j));
        push_atom(m.atoms, mu_value(y), 3, k0 + j, y);
      }
      break;
    }
    case Family::asc_q: {
      const auto& pr = std::get<ASCParams>(p);
      m.has_band = true;
      m.band_density = [pr, ctx](double x) {
        return asc_band_weight(std::acos(x), pr, ctx);
      };
      const double ab[2] = {pr.a, pr.b};
      for (int br = 0; br < 2; ++br) {
        if (ab[br] == 0.0) continue;
        for (long k = 0; k <= max_per_branch; ++k) {
          const double y = std::pow(q, -static_cast<double>(k)) / ab[br];
          if (std::abs(y) >= 1.0) break;
          push_atom(m.atoms, mu_value(y), br + 1, k, y);
        }
      }
      break;
    }
    case Family::asc_q_inverse: {
      const auto& pr = std::get<ASCParams>(p);
      for (long k = 0; k <= max_per_branch; ++k) {
        const double y = std::pow(q, static_cast<double>(k)) / pr.a;
        push_atom(m.atoms, mu_value(y), 1, k, y);
      }
      break;
    }
    case Family::asc2: {
      const auto& pr = std::get<ASCIIParams>(p);
      for (long n = 0; n <= max_per_branch; ++n) {
        const double x =
            pr.eps * std::pow(q, -static_cast<double>(n)) / std::sqrt(pr.a);
        push_atom(m.atoms, x, 1, n, x);
      }
      break;
    }
    case Family::ckk: {
      const auto& pr = std::get<CKKParams>(p);
      const double sc = std::sqrt(pr.c);
      for (long k = 0; k <= max_per_branch; ++k) {
        const double z = -(sc / pr.t) * std::pow(q, static_cast<double>(k));
        push_atom(m.atoms, z, 1, k, z);
      }
      for (long k = -max_per_branch; k <= max_per_branch; ++k) {
        const double z = (pr.t / sc) * std::pow(q, static_cast<double>(k));
        if (!std::isfinite(z) || std::abs(z) > 1e100) continue;
        push_atom(m.atoms, z, 2, k, z);
      }
      break;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------
namespace {

double dot_with(const Coeffs& u, const AtomVector& av) {
  double s = 0.0;
  for (size_t i = 0; i < u.u.size(); ++i)
    s += u.u[i] * av.at(u.k_min + static_cast<long>(i));
  return s;
}

AtomVector family_atom_vector(Family f, const FamilyParams& p,
                              const SpectralAtom& atom, const QContext& ctx) {
  switch (f) {
    case Family::lqj:
      return lqj_atom_vector(atom.y, std::get<LittleQJacobiParams>(p), ctx);
    case Family::asc_q:
    case Family::asc_q_inverse:
      return asc_atom_vector(atom.y, std::get<ASCParams>(p), ctx);
    case Family::asc2:
      return asc2_atom_vector(atom.index, std::get<ASCIIParams>(p), ctx);
    case Family::ckk:
      return ckk_atom_vector(atom.y, std::get<CKKParams>(p), ctx);
  }
  throw DomainError("family_atom_vector: unknown family");
}

}  // namespace

double transform_at_atom(const Coeffs& u, Family f, const FamilyParams& p,
                         const SpectralAtom& atom, const QContext& ctx) {
  return dot_with(u, family_atom_vector(f, p, atom, ctx));
}

double transform_band(const Coeffs& u, Family f, const FamilyParams& p,
                      double theta, const QContext& ctx) {
  if (f == Family::lqj) {
    const auto& pr = std::get<LittleQJacobiParams>(p);
    const std::vector<double> g =
        lqj_band_kernel(u.k_min, u.k_max(), theta, pr, ctx);
    double s = 0.0;
    for (size_t i = 0; i < u.u.size(); ++i) s += u.u[i] * g[i];
    return s;
  }
  if (f == Family::asc_q) {
    const auto& pr = std::get<ASCParams>(p);
    const long hi = std::max<long>(u.k_max(), 0);
    const std::vector<double> g = asc_band_kernel(hi, theta, pr, ctx);
    double s = 0.0;
    for (long k = std::max<long>(u.k_min, 0); k <= u.k_max(); ++k)
      s += u.at(k) * g[static_cast<size_t>(k)];
    return s;
  }
  throw DomainError("transform_band: family has no continuous spectrum");
}

double adaptive_gauss(const std::function<double(double)>& f, double a,
                      double b, double tol) {
  const Quadrature coarse = gauss_legendre(10, a, b);
  const Quadrature fine = gauss_legendre(21, a, b);
  double i_coarse = 0.0, i_fine = 0.0;
  for (int i = 0; i < 10; ++i) i_coarse += coarse.w[i] * f(coarse.x[i]);
  for (int i = 0; i < 21; ++i) i_fine += fine.w[i] * f(fine.x[i]);
  if (std::abs(i_fine - i_coarse) <= tol || (b - a) < 1e-13)
    return i_fine;
  const double mid = 0.5 * (a + b);
  return adaptive_gauss(f, a, mid, 0.5 * tol) +
         adaptive_gauss(f, mid, b, 0.5 * tol);
}

namespace {

/// Sums contribution(j) over j = j0, j0 + step, ... until the terms have been
/// negligible for 8 consecutive atoms (the transforms of finitely supported
/// vectors decay superexponentially along each grid branch).
template <typename Term>
double sum_branch(Term&& contribution, long j0, long step, double& total) {
  int quiet = 0;
  double acc = 0.0;
  for (long j = j0, n = 0; n < 600 && quiet < 8; j += step, ++n) {
    const double t = contribution(j);
    acc += t;
    total += t;
    quiet = (std::abs(t) <= 1e-20 * (1.0 + std::abs(total))) ? quiet + 1 : 0;
  }
  return acc;
}

}  // namespace

double spectral_inner_product(const Coeffs& u, const Coeffs& v, Family f,
                              const FamilyParams& p, const QContext& ctx) {
  make_operator(f, p, ctx);  // hypothesis validation
  const double q = ctx.q;
  double total = 0.0;
  auto pair_term = [&](const AtomVector& av) {
    return dot_with(u, av) * dot_with(v, av);
  };
  switch (f) {
    case Family::lqj: {
      const auto& pr = std::get<LittleQJacobiParams>(p);
      for (long k = 0;; ++k) {
        const double y = std::pow(q, -static_cast<double>(k)) / pr.d;
        if (std::abs(y) >= 1.0) break;
        total += pair_term(lqj_atom_vector(y, pr, ctx));
      }
      for (long k = 0;; ++k) {
        const double y = (pr.d / pr.c) * std::pow(q, -static_cast<double>(k));
        if (std::abs(y) >= 1.0) break;
        total += pair_term(lqj_atom_vector(y, pr, ctx));
      }
      const long k0 = first_index_inside(std::abs(pr.r * pr.d), q);
      sum_branch(
          [&](long k) {
            const double y = pr.r * pr.d * std::pow(q, static_cast<double>(k));
            return pair_term(lqj_atom_vector(y, pr, ctx));
          },
          k0, +1, total);
      const long lo = std::min(u.k_min, v.k_min);
      const long hi = std::max(u.k_max(), v.k_max());
      total += adaptive_gauss(
          [&](double th) {
            const std::vector<double> g =
                lqj_band_kernel(lo, hi, th, pr, ctx);
            double su = 0.0, sv = 0.0;
            for (long k = lo; k <= hi; ++k) {
              su += u.at(k) * g[static_cast<size_t>(k - lo)];
              sv += v.at(k) * g[static_cast<size_t>(k - lo)];
            }
            return su * sv * std::sin(th);
          },
          0.0, M_PI, 1e-11);
      break;
    }
    case Family::asc_q: {
      const auto& pr = std::get<ASCParams>(p);
      const double ab[2] = {pr.a, pr.b};
      for (double g : ab) {
        if (g == 0.0) continue;
        for (long k = 0;; ++k) {
          const double y = std::pow(q, -static_cast<double>(k)) / g;
          if (std::abs(y) >= 1.0) break;
          total += pair_term(asc_atom_vector(y, pr, ctx));
        }
      }
      const long hi = std::max<long>(std::max(u.k_max(), v.k_max()), 0);
      total += adaptive_gauss(
          [&](double th) {
            const std::vector<double> g = asc_band_kernel(hi, th, pr, ctx);
            double su = 0.0, sv = 0.0;
            for (long k = 0; k <= hi; ++k) {
              su += u.at(k) * g[static_cast<size_t>(k)];
              sv += v.at(k) * g[static_cast<size_t>(k)];
            }
            return su * sv * std::sin(th);
          },
          0.0, M_PI, 1e-11);
      break;
    }
    case Family::asc_q_inverse: {
      const auto& pr = std::get<ASCParams>(p);
      sum_branch(
          [&](long k) {
            const double y = std::pow(q, static_cast<double>(k)) / pr.a;
            return pair_term(asc_atom_vector(y, pr, ctx));
          },
          0, +1, total);
      break;
    }
    case Family::asc2: {
      const auto& pr = std::get<ASCIIParams>(p);
      sum_branch(
          [&](long n) {
            return pair_term(asc2_atom_vector(n, pr, ctx));
          },
          0, +1, total);
      break;
    }
    case Family::ckk: {
      const auto& pr = std::get<CKKParams>(p);
      const double sc = std::sqrt(pr.c);
      sum_branch(
          [&](long k) {
            const double z = -(sc / pr.t) * std::pow(q, static_cast<double>(k));
            return pair_term(ckk_atom_vector(z, pr, ctx));
          },
          0, +1, total);
      sum_branch(
          [&](long k) {
            const double z = (pr.t / sc) * std::pow(q, static_cast<double>(k));
            return pair_term(ckk_atom_vector(z, pr, ctx));
          },
          0, +1, total);
      sum_branch(
          [&](long k) {
            const double z = (pr.t / sc) * std::pow(q, static_cast<double>(k));
            return pair_term(ckk_atom_vector(z, pr, ctx));
          },
          -1, -1, total);
      break;
    }
  }
  return total;
}

}  // namespace qg
