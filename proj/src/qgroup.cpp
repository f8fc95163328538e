#include "qg/qgroup.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qg/qcalc.hpp"

namespace qg {

namespace {

double qp(const QContext& ctx, double e) { return std::pow(ctx.q, e); }

QContext squared(const QContext& ctx) {
  return QContext(ctx.q * ctx.q, ctx.tol_series, ctx.tol_check);
}

std::string cartan_str(const CartanIndex& i) {
  std::ostringstream os;
  os << "delta^" << (i.eps > 0 ? "+" : "-") << "_{n=" << i.n << ", x="
     << (i.sign > 0 ? "+" : "-") << "q^" << 2 * i.k << ", m=" << i.m << "}";
  return os.str();
}

// Result accumulator enforcing the window policy: out-of-window terms with
// relative weight above boundary_tol raise BoundaryError, smaller spill is
// added to escaped_mass.
class Accum {
 public:
  explicit Accum(const TruncatedState& in) : tol_(in.window.boundary_tol) {
    out_.window = in.window;
    out_.escaped_mass = in.escaped_mass;
    out_.generalized = in.generalized;
    for (const auto& [idx, c] : in.terms)
      scale_ = std::max(scale_, std::abs(c));
  }

  void add(const CartanIndex& idx, double c) {
    if (c == 0.0) return;
    if (!out_.window.contains(idx)) {
      if (std::abs(c) > tol_ * scale_)
        throw BoundaryError("window overflow at " + cartan_str(idx));
      out_.escaped_mass += c * c;
      return;
    }
    out_.terms[idx] += c;
  }

  TruncatedState take() {
    for (auto it = out_.terms.begin(); it != out_.terms.end();)
      it = it->second == 0.0 ? out_.terms.erase(it) : std::next(it);
    return std::move(out_);
  }

 private:
  double tol_;
  double scale_ = 0.0;
  TruncatedState out_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Cartan lattice
// ---------------------------------------------------------------------------

bool cartan_valid(const CartanIndex& idx) {
  if (idx.eps != 1 && idx.eps != -1) return false;
  if (idx.sign != 1 && idx.sign != -1) return false;
  if ((idx.n - idx.m) % 2 != 0) return false;
  if (idx.sign == -1 && idx.k >= 0) return false;
  // eps * q^{n+m} x = eps*sign * q^{n+m+2k} must lie in I_{q^2}.
  if (idx.eps * idx.sign == -1 && idx.n + idx.m + 2 * idx.k > -2) return false;
  return true;
}

void check_cartan(const CartanIndex& idx) {
  if (!cartan_valid(idx))
    throw DomainError("invalid Cartan index " + cartan_str(idx));
}

double cartan_x(const CartanIndex& idx, const QContext& ctx) {
  return idx.sign * qp(ctx, 2.0 * static_cast<double>(idx.k));
}

bool Window::contains(const CartanIndex& idx) const {
  return std::abs(idx.n) <= n_half && std::abs(idx.m) <= m_half &&
         std::abs(idx.k) <= k_half;
}

bool Window::interior(const CartanIndex& idx) const {
  return std::abs(idx.n) <= n_half - margin &&
         std::abs(idx.m) <= m_half - margin &&
         std::abs(idx.k) <= k_half - margin;
}

void TruncatedState::add(const CartanIndex& idx, double coeff) {
  if (coeff == 0.0) return;
  if (!window.contains(idx)) {
    escaped_mass += coeff * coeff;
    return;
  }
  terms[idx] += coeff;
}

double TruncatedState::at(const CartanIndex& idx) const {
  auto it = terms.find(idx);
  return it == terms.end() ? 0.0 : it->second;
}

double TruncatedState::norm() const {
  double s = 0.0;
  for (const auto& [idx, c] : terms) s += c * c;
  return std::sqrt(s);
}

TruncatedState basis_state(const CartanIndex& idx, const Window& w) {
  check_cartan(idx);
  TruncatedState s;
  s.window = w;
  if (!w.contains(idx))
    throw BoundaryError("basis index outside window: " + cartan_str(idx));
  s.terms[idx] = 1.0;
  return s;
}

double inner(const TruncatedState& u, const TruncatedState& v) {
  // iterate over the smaller support
  const TruncatedState& a = u.terms.size() <= v.terms.size() ? u : v;
  const TruncatedState& b = u.terms.size() <= v.terms.size() ? v : u;
  double s = 0.0;
  for (const auto& [idx, c] : a.terms) s += c * b.at(idx);
  return s;
}

TruncatedState scale(double a, const TruncatedState& u) {
  TruncatedState out = u;
  for (auto& [idx, c] : out.terms) c *= a;
  out.escaped_mass *= a * a;
  return out;
}

TruncatedState axpy(double a, const TruncatedState& x,
                    const TruncatedState& y) {
  TruncatedState out = y;
  out.generalized = x.generalized || y.generalized;
  out.escaped_mass += a * a * x.escaped_mass;
  for (const auto& [idx, c] : x.terms) {
    out.terms[idx] += a * c;
    if (out.terms[idx] == 0.0) out.terms.erase(idx);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Coordinate algebra on the Cartan basis
// ---------------------------------------------------------------------------

TruncatedState coord_action_cartan(CoordGen g, const TruncatedState& s,
                                   const QContext& ctx) {
  Accum acc(s);
  for (const auto& [i, c] : s.terms) {
    const double k = static_cast<double>(i.k);
    switch (g) {
      case CoordGen::alpha: {
        // sqrt(sign x + |x|), image (n+1, q^{-2}x, m+1)
        const double rad = i.sign + qp(ctx, 2.0 * k);
        if (rad > 0.0)
          acc.add({i.eps, i.n + 1, i.sign, i.k - 1, i.m + 1},
                  c * std::sqrt(rad));
        break;
      }
      case CoordGen::alpha_star: {
        const double rad = i.sign + qp(ctx, 2.0 * (k + 1));
        if (rad > 0.0)
          acc.add({i.eps, i.n - 1, i.sign, i.k + 1, i.m - 1},
                  c * std::sqrt(rad));
        break;
      }
      case CoordGen::gamma:
        acc.add({i.eps, i.n - 1, i.sign, i.k, i.m + 1},
                c * i.sign * qp(ctx, k));
        break;
      case CoordGen::gamma_star:
        acc.add({i.eps, i.n + 1, i.sign, i.k, i.m - 1},
                c * i.sign * qp(ctx, k));
        break;
      case CoordGen::e:
        acc.add(i, c * i.sign);
        break;
    }
  }
  return acc.take();
}

// ---------------------------------------------------------------------------
// Enveloping algebra
// ---------------------------------------------------------------------------

TruncatedState uea_action(UEAGen g, Side side, const TruncatedState& s,
                          const QContext& ctx) {
  const double dq = ctx.q - 1.0 / ctx.q;  // q - q^{-1} (negative for q < 1)
  Accum acc(s);
  for (const auto& [i, c] : s.terms) {
    const double n = static_cast<double>(i.n);
    const double m = static_cast<double>(i.m);
    // exponent of q in eps * x^{-1} * q^{-n-m-2}: es * q^{-(n+m+2k+2)}
    const int es = i.eps * i.sign;
    const double e_up = -static_cast<double>(i.n + i.m + 2 * i.k + 2);
    const double e_dn = -static_cast<double>(i.n + i.m + 2 * i.k);
    const double rad_up = 1.0 + es * qp(ctx, e_up);    // 1 + eps q^{-n-m-2}/x
    const double rad_dn = 1.0 + es * qp(ctx, e_dn);    // 1 + eps q^{-n-m}/x
    const double rad_x = 1.0 + i.sign * qp(ctx, -2.0 * i.k);        // 1+1/x
    const double rad_xq =
        1.0 + i.sign * qp(ctx, -2.0 * (i.k + 1));  // 1 + q^{-2}/x

    if (side == Side::left) {
      switch (g) {
        case UEAGen::K:
          acc.add(i, c * qp(ctx, 0.5 * m));
          break;
        case UEAGen::Kinv:
          acc.add(i, c * qp(ctx, -0.5 * m));
          break;
        case UEAGen::E:
          if (rad_up > 0.0)
            acc.add({i.eps, i.n, i.sign, i.k, i.m + 2},
                    c * -qp(ctx, 0.5 * (m + 1)) * std::sqrt(rad_up) / dq);
          if (rad_x > 0.0)
            acc.add({i.eps, i.n, i.sign, i.k - 1, i.m + 2},
                    c * qp(ctx, -0.5 * (m + 1)) * std::sqrt(rad_x) / dq);
          break;
        case UEAGen::F:
          if (rad_dn > 0.0)
            acc.add({i.eps, i.n, i.sign, i.k, i.m - 2},
                    c * qp(ctx, 0.5 * (m - 1)) * std::sqrt(rad_dn) / dq);
          if (rad_xq > 0.0)
            acc.add({i.eps, i.n, i.sign, i.k + 1, i.m - 2},
                    c * -qp(ctx, -0.5 * (m - 1)) * std::sqrt(rad_xq) / dq);
          break;
      }
    } else {
      switch (g) {
        case UEAGen::K:
          acc.add(i, c * qp(ctx, -0.5 * n));
          break;
        case UEAGen::Kinv:
          acc.add(i, c * qp(ctx, 0.5 * n));
          break;
        case UEAGen::E:
          // both image terms are multiplied by e (factor sign(x))
          if (rad_up > 0.0)
            acc.add({i.eps, i.n + 2, i.sign, i.k, i.m},
                    c * -i.eps * i.sign * qp(ctx, 0.5 * (n + 1)) *
                        std::sqrt(rad_up) / dq);
          if (rad_x > 0.0)
            acc.add({i.eps, i.n + 2, i.sign, i.k - 1, i.m},
                    c * i.sign * qp(ctx, -0.5 * (n + 1)) * std::sqrt(rad_x) /
                        dq);
          break;
        case UEAGen::F:
          if (rad_dn > 0.0)
            acc.add({i.eps, i.n - 2, i.sign, i.k, i.m},
                    c * i.eps * i.sign * qp(ctx, 0.5 * (n - 1)) *
                        std::sqrt(rad_dn) / dq);
          if (rad_xq > 0.0)
            acc.add({i.eps, i.n - 2, i.sign, i.k + 1, i.m},
                    c * -i.sign * qp(ctx, -0.5 * (n - 1)) * std::sqrt(rad_xq) /
                        dq);
          break;
      }
    }
  }
  return acc.take();
}

void check_dynamical(const DynamicalParams& p, const QContext& ctx) {
  if (!(std::abs(p.s) > ctx.q) || !(std::abs(p.t) > ctx.q))
    throw DomainError("dynamical parameters require |s|, |t| > q");
}

// ---------------------------------------------------------------------------
// Twisted primitive elements
// ---------------------------------------------------------------------------

TruncatedState twisted_primitive(TwistedWhich which, const DynamicalParams& p,
                                 const TruncatedState& s, const QContext& ctx) {
  check_dynamical(p, ctx);
  Accum acc(s);
  for (const auto& [i, c] : s.terms) {
    const double m = static_cast<double>(i.m);
    const double n = static_cast<double>(i.n);
    const double k = static_cast<double>(i.k);
    const int es = i.eps * i.sign;
    const double rad_up = 1.0 + es * qp(ctx, -(n + m + 2.0 * k + 2.0));
    const double rad_dn = 1.0 + es * qp(ctx, -(n + m + 2.0 * k));
    // sqrt(sign + q^{2k}) and sqrt(sign + q^{2k+2})
    const double rx = i.sign + qp(ctx, 2.0 * k);
    const double rxq = i.sign + qp(ctx, 2.0 * k + 2.0);
    if (which == TwistedWhich::Yt_left) {
      const double t = p.t;
      // A^eps(n,x,m) delta_{m+2} with A = -1/2 sqrt(rad_up)
      if (rad_up > 0.0)
        acc.add({i.eps, i.n, i.sign, i.k, i.m + 2},
                c * -0.5 * std::sqrt(rad_up));
      // middle: (1/2) q^{-m} x^{-1} (t rho_{inf,t}).delta
      //   q^{-1} x sqrt(1+x^{-1}) = sign q^{k-1} sqrt(sign + q^{2k})
      // sqrt(1+x^{-1}) = q^{-k} sqrt(sign+q^{2k}) and
      // sqrt(1+q^{-2}x^{-1}) = q^{-k-1} sqrt(sign+q^{2k+2})
      if (rx > 0.0)
        acc.add({i.eps, i.n, i.sign, i.k - 1, i.m + 2},
                c * 0.5 * qp(ctx, -m - 1.0 - k) * std::sqrt(rx));
      acc.add(i, c * 0.5 * qp(ctx, -m) * (t + 1.0 / t));
      if (rxq > 0.0)
        acc.add({i.eps, i.n, i.sign, i.k + 1, i.m - 2},
                c * 0.5 * qp(ctx, -m - k) * std::sqrt(rxq));
      // A^eps(n,x,m-2) delta_{m-2}
      if (rad_dn > 0.0)
        acc.add({i.eps, i.n, i.sign, i.k, i.m - 2},
                c * -0.5 * std::sqrt(rad_dn));
    } else {
      const double sp = p.s;
      // eps * A^eps(n,x,m) e.delta_{n+2} with the extra e factor sign(x)
      if (rad_up > 0.0)
        acc.add({i.eps, i.n + 2, i.sign, i.k, i.m},
                c * i.eps * i.sign * -0.5 * std::sqrt(rad_up));
      // middle: -(1/2) q^{-n} x^{-1} (s rho_{s,inf}).delta with
      // (s rho_{s,inf}).delta = -q^k sqrt(sign+q^{2k+2}) delta_{n-2,k+1,m}
      //   - q^{k-1} sqrt(sign+q^{2k}) delta_{n+2,k-1,m}
      //   + (s+s^{-1}) sign q^{2k} delta
      if (rxq > 0.0)
        acc.add({i.eps, i.n - 2, i.sign, i.k + 1, i.m},
                c * 0.5 * i.sign * qp(ctx, -n - k) * std::sqrt(rxq));
      if (rx > 0.0)
        acc.add({i.eps, i.n + 2, i.sign, i.k - 1, i.m},
                c * 0.5 * i.sign * qp(ctx, -n - k - 1.0) * std::sqrt(rx));
      acc.add(i, c * -0.5 * qp(ctx, -n) * (sp + 1.0 / sp));
      if (rad_dn > 0.0)
        acc.add({i.eps, i.n - 2, i.sign, i.k, i.m},
                c * i.eps * i.sign * -0.5 * std::sqrt(rad_dn));
    }
  }
  return acc.take();
}

TruncatedState twisted_primitive_composed(TwistedWhich which,
                                          const DynamicalParams& p,
                                          const TruncatedState& s,
                                          const QContext& ctx) {
  check_dynamical(p, ctx);
  const double dq = ctx.q - 1.0 / ctx.q;
  const double sq = std::sqrt(ctx.q);
  if (which == TwistedWhich::Yt_left) {
    const double tt = p.t + 1.0 / p.t;
    // Y_t.v = q^{1/2} E.v - q^{-1/2} F.v - tt (K - K^{-1}).v / dq
    TruncatedState yt = axpy(
        sq, uea_action(UEAGen::E, Side::left, s, ctx),
        axpy(-1.0 / sq, uea_action(UEAGen::F, Side::left, s, ctx),
             axpy(-tt / dq, uea_action(UEAGen::K, Side::left, s, ctx),
                  scale(tt / dq, uea_action(UEAGen::Kinv, Side::left, s,
                                            ctx)))));
    // (1/2)[dq K^{-1}.(Y_t.v) + tt v]
    return axpy(0.5 * dq, uea_action(UEAGen::Kinv, Side::left, yt, ctx),
                scale(0.5 * tt, s));
  }
  const double ss = p.s + 1.0 / p.s;
  // v.Y_s = q^{1/2} v.E - q^{-1/2} v.F - ss (v.K - v.K^{-1}) / dq
  TruncatedState ys = axpy(
      sq, uea_action(UEAGen::E, Side::right, s, ctx),
      axpy(-1.0 / sq, uea_action(UEAGen::F, Side::right, s, ctx),
           axpy(-ss / dq, uea_action(UEAGen::K, Side::right, s, ctx),
                scale(ss / dq,
                      uea_action(UEAGen::Kinv, Side::right, s, ctx)))));
  // (1/2)[dq (v.Y_s).K - ss v]
  return axpy(0.5 * dq, uea_action(UEAGen::K, Side::right, ys, ctx),
              scale(-0.5 * ss, s));
}

// ---------------------------------------------------------------------------
// Dynamical coordinate elements and spherical elements
// ---------------------------------------------------------------------------

TruncatedState coord_alpha_st(const DynamicalParams& p, const TruncatedState& s,
                              const QContext& ctx) {
  // alpha + q t^{-1} e gamma* - s^{-1} gamma - s^{-1} t^{-1} e alpha*
  auto eg = [&](CoordGen g, const TruncatedState& v) {
    return coord_action_cartan(CoordGen::e, coord_action_cartan(g, v, ctx),
                               ctx);
  };
  TruncatedState out = coord_action_cartan(CoordGen::alpha, s, ctx);
  out = axpy(ctx.q / p.t, eg(CoordGen::gamma_star, s), out);
  out = axpy(-1.0 / p.s, coord_action_cartan(CoordGen::gamma, s, ctx), out);
  out = axpy(-1.0 / (p.s * p.t), eg(CoordGen::alpha_star, s), out);
  return out;
}

TruncatedState coord_gamma_st(const DynamicalParams& p, const TruncatedState& s,
                              const QContext& ctx) {
  // -s^{-1} alpha - q s^{-1} t^{-1} e gamma* + gamma + t^{-1} e alpha*
  auto eg = [&](CoordGen g, const TruncatedState& v) {
    return coord_action_cartan(CoordGen::e, coord_action_cartan(g, v, ctx),
                               ctx);
  };
  TruncatedState out = scale(-1.0 / p.s,
                             coord_action_cartan(CoordGen::alpha, s, ctx));
  out = axpy(-ctx.q / (p.s * p.t), eg(CoordGen::gamma_star, s), out);
  out = axpy(1.0, coord_action_cartan(CoordGen::gamma, s, ctx), out);
  out = axpy(1.0 / p.t, eg(CoordGen::alpha_star, s), out);
  return out;
}

TruncatedState coord_alpha_st_star(const DynamicalParams& p,
                                   const TruncatedState& s,
                                   const QContext& ctx) {
  // alpha* + q t^{-1} e gamma - s^{-1} gamma* - s^{-1} t^{-1} e alpha
  auto eg = [&](CoordGen g, const TruncatedState& v) {
    return coord_action_cartan(CoordGen::e, coord_action_cartan(g, v, ctx),
                               ctx);
  };
  TruncatedState out = coord_action_cartan(CoordGen::alpha_star, s, ctx);
  out = axpy(ctx.q / p.t, eg(CoordGen::gamma, s), out);
  out = axpy(-1.0 / p.s, coord_action_cartan(CoordGen::gamma_star, s, ctx),
             out);
  out = axpy(-1.0 / (p.s * p.t), eg(CoordGen::alpha, s), out);
  return out;
}

TruncatedState coord_gamma_st_star(const DynamicalParams& p,
                                   const TruncatedState& s,
                                   const QContext& ctx) {
  // -s^{-1} alpha* - q s^{-1} t^{-1} e gamma + gamma* + t^{-1} e alpha
  auto eg = [&](CoordGen g, const TruncatedState& v) {
    return coord_action_cartan(CoordGen::e, coord_action_cartan(g, v, ctx),
                               ctx);
  };
  TruncatedState out = scale(
      -1.0 / p.s, coord_action_cartan(CoordGen::alpha_star, s, ctx));
  out = axpy(-ctx.q / (p.s * p.t), eg(CoordGen::gamma, s), out);
  out = axpy(1.0, coord_action_cartan(CoordGen::gamma_star, s, ctx), out);
  out = axpy(1.0 / p.t, eg(CoordGen::alpha, s), out);
  return out;
}

TruncatedState spherical_action(SphericalWhich which, const DynamicalParams& p,
                                const TruncatedState& s, const QContext& ctx) {
  check_dynamical(p, ctx);
  if (which == SphericalWhich::rho_inf_t) {
    Accum acc(s);
    for (const auto& [i, c] : s.terms) {
      const double k = static_cast<double>(i.k);
      const double rx = i.sign + qp(ctx, 2.0 * k);
      const double rxq = i.sign + qp(ctx, 2.0 * k + 2.0);
      // t^{-1} [ sign q^{k-1} sqrt(sign+q^{2k}) delta_{k-1, m+2}
      //        + (t+t^{-1}) sign q^{2k} delta
      //        + sign q^{k} sqrt(sign+q^{2k+2}) delta_{k+1, m-2} ]
      if (rx > 0.0)
        acc.add({i.eps, i.n, i.sign, i.k - 1, i.m + 2},
                c * i.sign * qp(ctx, k - 1.0) * std::sqrt(rx) / p.t);
      acc.add(i, c * (p.t + 1.0 / p.t) * i.sign * qp(ctx, 2.0 * k) / p.t);
      if (rxq > 0.0)
        acc.add({i.eps, i.n, i.sign, i.k + 1, i.m - 2},
                c * i.sign * qp(ctx, k) * std::sqrt(rxq) / p.t);
    }
    return acc.take();
  }
  // rho_st = e gamma*_{s,qt} gamma_{s,qt} - s^{-2} - q^{-2} t^{-2}
  const DynamicalParams pq{p.s, ctx.q * p.t};
  TruncatedState g1 = coord_gamma_st(pq, s, ctx);
  TruncatedState g2 = coord_gamma_st_star(pq, g1, ctx);
  TruncatedState rho = axpy(
      -(1.0 / (p.s * p.s) + 1.0 / (ctx.q * ctx.q * p.t * p.t)), s,
      coord_action_cartan(CoordGen::e, g2, ctx));
  if (which == SphericalWhich::rho_st) return rho;
  return scale(-0.5 * ctx.q * p.s * p.t, rho);  // rho_st_tilde
}

// ---------------------------------------------------------------------------
// Iwasawa / Gauss labels
// ---------------------------------------------------------------------------

int e_of(const XPoint& x) { return x.branch == XBranch::neg_q ? -1 : +1; }

double x_value(const XPoint& x, double t, const QContext& ctx) {
  switch (x.branch) {
    case XBranch::neg_q:
      if (x.k <= 0) throw DomainError("XPoint neg_q requires k > 0");
      return -qp(ctx, -2.0 * static_cast<double>(x.k));
    case XBranch::neg_t:
      if (x.k < 0) throw DomainError("XPoint neg_t requires k >= 0");
      return -qp(ctx, 2.0 * static_cast<double>(x.k)) / (t * t);
    case XBranch::pos:
      return qp(ctx, 2.0 * static_cast<double>(x.k));
  }
  throw DomainError("XPoint: bad branch");
}

double label_y(const SpectralLabel& l, double p, const QContext& ctx) {
  if (l.band) throw DomainError("label_y: band label has no representative");
  return l.sgn * std::pow(p, static_cast<double>(l.ppow)) *
         qp(ctx, static_cast<double>(l.m));
}

double label_mu(const SpectralLabel& l, double p, const QContext& ctx) {
  if (l.band) return std::cos(l.theta);
  return mu_of(label_y(l, p, ctx));
}

int e_of(const YLabel& y) { return y.branch == YBranch::U && !y.band ? -1 : +1; }

int kappa_of(const YLabel& y) {
  if (y.band) return y.band_kappa;
  return y.branch == YBranch::V ? -1 : +1;
}

double y_value(const YLabel& y, const DynamicalParams& p, const QContext& ctx) {
  if (y.band) throw DomainError("y_value: band label has no representative");
  const double k = static_cast<double>(y.k);
  switch (y.branch) {
    case YBranch::U:
      if (y.k < 0) throw DomainError("YLabel U requires k >= 0");
      return qp(ctx, 1.0 + 2.0 * k) / (p.s * p.t);
    case YBranch::V:
      if (y.k < 0) throw DomainError("YLabel V requires k >= 0");
      return qp(ctx, -1.0 - 2.0 * k) * p.t / p.s;
    case YBranch::W_pos:
      if (y.k < 0) throw DomainError("YLabel W_pos requires k >= 0");
      return qp(ctx, -1.0 - 2.0 * k) * p.s / p.t;
    case YBranch::W_neg:
      return -qp(ctx, 1.0 + 2.0 * k) / (p.s * p.t);
  }
  throw DomainError("YLabel: bad branch");
}

double y_mu(const YLabel& y, const DynamicalParams& p, const QContext& ctx) {
  if (y.band) return std::cos(y.theta);
  return mu_of(y_value(y, p, ctx));
}

// (sgn, q-exponent, s-power, t-power) decomposition of an atom y label.
namespace {
struct YDecomp {
  int sgn;
  long qe;
  int se;
  int te;
};
YDecomp y_decomp(const YLabel& y) {
  switch (y.branch) {
    case YBranch::U:
      return {+1, 1 + 2 * y.k, -1, -1};
    case YBranch::V:
      return {+1, -1 - 2 * y.k, -1, +1};
    case YBranch::W_pos:
      return {+1, -1 - 2 * y.k, +1, -1};
    case YBranch::W_neg:
      return {-1, 1 + 2 * y.k, -1, -1};
  }
  throw DomainError("YLabel: bad branch");
}

struct XDecomp {
  int sgn;
  long qe;
  int te;
};
XDecomp x_decomp(const XPoint& x) {
  switch (x.branch) {
    case XBranch::neg_q:
      return {-1, -2 * x.k, 0};
    case XBranch::neg_t:
      return {-1, 2 * x.k, -2};
    case XBranch::pos:
      return {+1, 2 * x.k, 0};
  }
  throw DomainError("XPoint: bad branch");
}
}  // namespace

// ---------------------------------------------------------------------------
// Spectra
// ---------------------------------------------------------------------------

std::vector<SpectralLabel> twisted_total_atoms(double p, const QContext& ctx,
                                               long cap) {
  std::vector<SpectralLabel> out;
  for (long m = -cap; m <= cap; ++m) {
    // xi = p^{-1} q^m, eigenvalue mu(xi)
    SpectralLabel a{false, 0.0, +1, -1, m};
    if (std::abs(label_y(a, p, ctx)) < 1.0) out.push_back(a);
    // xi = -p q^m, eigenvalue -mu(p q^m)
    SpectralLabel b{false, 0.0, -1, +1, m};
    if (std::abs(label_y(b, p, ctx)) < 1.0) out.push_back(b);
  }
  return out;
}

std::vector<SpectralLabel> yt_conditional_atoms(int eps, long n,
                                                const XPoint& x,
                                                const DynamicalParams& p,
                                                const QContext& ctx,
                                                long cap) {
  check_dynamical(p, ctx);
  const XDecomp xd = x_decomp(x);
  const int e = e_of(x);
  std::vector<SpectralLabel> out;
  auto push = [&](int sgn, int ppow, long m) {
    SpectralLabel l{false, 0.0, sgn, ppow, m};
    if (std::abs(label_y(l, p.t, ctx)) < 1.0) out.push_back(l);
  };
  if (eps == -e) {
    // xi = e(x) q^{-n} (tx)^{-1} q^{-2j}, j > 0
    for (long j = 1; j <= cap; ++j)
      push(e * xd.sgn, -1 - xd.te, -n - xd.qe - 2 * j);
  } else {
    // xi = -e(x) q^{n} t x q^{-2j}, j >= 0
    for (long j = 0; j <= cap; ++j)
      push(-e * xd.sgn, 1 + xd.te, n + xd.qe - 2 * j);
    // xi = e(x) q^{-n} (tx)^{-1} q^{-2j}, j in Z
    for (long j = -cap; j <= cap; ++j)
      push(e * xd.sgn, -1 - xd.te, -n - xd.qe - 2 * j);
  }
  return out;
}

std::vector<YLabel> rho_st_atoms(const DynamicalParams& p, const QContext& ctx,
                                 long cap) {
  check_dynamical(p, ctx);
  std::vector<YLabel> out;
  auto push = [&](YBranch b, long k) {
    YLabel l{false, 0.0, +1, b, k};
    if (b == YBranch::U || std::abs(y_value(l, p, ctx)) < 1.0)
      out.push_back(l);
  };
  for (long k = 0; k <= cap; ++k) {
    push(YBranch::U, k);
    push(YBranch::V, k);
    push(YBranch::W_pos, k);
  }
  for (long k = -cap; k <= cap; ++k) push(YBranch::W_neg, k);
  return out;
}

std::vector<SpectralLabel> ys_conditional_atoms(int eps, const YLabel& y,
                                                const SpectralLabel& xi,
                                                const DynamicalParams& p,
                                                const QContext& ctx,
                                                long cap) {
  check_dynamical(p, ctx);
  if (y.band || xi.band)
    throw DomainError(
        "ys_conditional_atoms: band conditioning labels not enumerable");
  const int e = e_of(y);
  const int kap = kappa_of(y);
  const YDecomp yd = y_decomp(y);
  std::vector<SpectralLabel> out;
  auto push = [&](int sgn, int ppow, long m, bool filter) {
    SpectralLabel l{false, 0.0, sgn, ppow, m};
    if (!filter || std::abs(label_y(l, p.s, ctx)) < 1.0) out.push_back(l);
  };
  if (xi.sgn == kap && xi.ppow == -kap) {
    // case 1: xi = kappa(y) t^{-kappa} q^m
    if (eps == -e) {
      // eta = e q^{-1} xi^{-1} y q^{-2j}, j >= 0
      for (long j = 0; j <= cap; ++j)
        push(e * xi.sgn * yd.sgn, yd.se, -1 - xi.m + yd.qe - 2 * j, true);
    } else if (eps == e) {
      // eta = -e q^{-1} xi y^{-1} q^{-2j}, j >= 0
      for (long j = 0; j <= cap; ++j)
        push(-e * xi.sgn * yd.sgn, -yd.se, -1 + xi.m - yd.qe - 2 * j, true);
      // eta = e q^{-1} xi^{-1} y q^{-2j}, j in Z
      for (long j = -cap; j <= cap; ++j)
        push(e * xi.sgn * yd.sgn, yd.se, -1 - xi.m + yd.qe - 2 * j, true);
    }
    return out;
  }
  if (xi.sgn == -kap && xi.ppow == kap) {
    // case 2: xi = -kappa(y) t^{kappa} q^m; requires mu(y) discrete
    if (eps == -e) return out;  // empty spectrum
    // eta = e q xi y q^{2j}, j >= 0 (all |eta| < 1 automatically)
    for (long j = 0; j <= cap; ++j)
      push(e * xi.sgn * yd.sgn, yd.se, 1 + xi.m + yd.qe + 2 * j, false);
    return out;
  }
  throw DomainError("ys_conditional_atoms: xi label matches neither case");
}

bool h_nonzero(int eps, long n, const YLabel& y, const SpectralLabel& xi,
               const DynamicalParams& p, const QContext& ctx) {
  if (xi.band) return true;
  if (y.band)
    throw DomainError("h_nonzero: band y not supported");
  if ((n - xi.m) % 2 != 0) return false;
  // Scan the printed chain of Iwasawa components and test whether any of
  // them admits mu(xi) in its conditional spectrum (by exact label match).
  const long cap = 400;
  auto xi_in = [&](int ceps, long cn, const XPoint& cx) {
    const XDecomp xd = x_decomp(cx);
    const int e = e_of(cx);
    if (ceps == -e) {
      // xi = e xd.sgn t^{-1-xd.te} q^{-cn-xd.qe-2j}, j > 0
      if (xi.sgn != e * xd.sgn || xi.ppow != -1 - xd.te) return false;
      const long twoj = -cn - xd.qe - xi.m;
      return twoj > 0 && twoj % 2 == 0 &&
             std::abs(label_y(xi, p.t, ctx)) < 1.0;
    }
    // grid B: xi = -e xd.sgn t^{1+xd.te} q^{cn+xd.qe-2j}, j >= 0
    if (xi.sgn == -e * xd.sgn && xi.ppow == 1 + xd.te) {
      const long twoj = cn + xd.qe - xi.m;
      if (twoj >= 0 && twoj % 2 == 0 && std::abs(label_y(xi, p.t, ctx)) < 1.0)
        return true;
    }
    // grid C: xi = e xd.sgn t^{-1-xd.te} q^{-cn-xd.qe-2j}, j in Z
    if (xi.sgn == e * xd.sgn && xi.ppow == -1 - xd.te) {
      const long twoj = -cn - xd.qe - xi.m;
      if (twoj % 2 == 0 && std::abs(label_y(xi, p.t, ctx)) < 1.0) return true;
    }
    return false;
  };
  for (long k = 0; k <= cap; ++k) {
    XPoint cx;
    long cn;
    switch (y.branch) {
      case YBranch::U:
        cx = {XBranch::neg_q, k + 1};
        cn = n + 2 * k + 2;
        break;
      case YBranch::V:
        cx = {XBranch::neg_t, k};
        cn = n - 2 * k;
        break;
      default:  // W: chain over k in Z, fold k -> +-k
        cx = {XBranch::pos, -k};
        cn = n + 2 * k;
        if (k > 0 && xi_in(eps, n - 2 * k, {XBranch::pos, k})) return true;
        break;
    }
    if (xi_in(eps, cn, cx)) return true;
  }
  return false;
}

bool gauss_nonzero(const GaussIndex& idx, const QContext& ctx) {
  const DynamicalParams& p = idx.st;
  check_dynamical(p, ctx);
  if (idx.y.band && !idx.xi.band && !idx.eta.band) {
    // mu(y) in [-1,1], mu(xi) discrete: eta unrestricted on the total grid
    return std::abs(label_y(idx.eta, p.s, ctx)) < 1.0;
  }
  if (idx.xi.band && !idx.y.band) {
    if (idx.eta.band) return true;
    // eta discrete requires sign(eta) = e(y) kappa(y) sign(t y)
    const double yv = y_value(idx.y, p, ctx);
    const int se = e_of(idx.y) * kappa_of(idx.y) *
                   (p.t * yv > 0.0 ? +1 : -1);
    return idx.eta.sgn * (p.s < 0.0 && idx.eta.ppow % 2 != 0 ? -1 : 1) ==
               se &&
           std::abs(label_y(idx.eta, p.s, ctx)) < 1.0;
  }
  if (idx.xi.band && idx.y.band) return idx.eta.band;
  if (idx.eta.band) return true;  // band eta always admitted
  // all labels discrete: membership in the printed conditional grids
  const auto grid = ys_conditional_atoms(idx.eps, idx.y, idx.xi, p, ctx, 400);
  return std::find(grid.begin(), grid.end(), idx.eta) != grid.end();
}

// ---------------------------------------------------------------------------
// Expansions
// ---------------------------------------------------------------------------

TruncatedState pre_iwasawa_g(int eps, long n, const XPoint& x, long m,
                             const DynamicalParams& p, const QContext& ctx,
                             const Window& w) {
  check_dynamical(p, ctx);
  if ((n - m) % 2 != 0)
    throw DomainError("pre_iwasawa_g: n and m must have equal parity");
  const int e = e_of(x);
  if (eps * e == -1 && n + m > -2)
    throw DomainError("pre_iwasawa_g: zero vector (need eps e(x) q^{-n-m} > -1)");
  const QContext ctx2 = squared(ctx);
  TruncatedState out;
  out.window = w;
  if (x.branch == XBranch::neg_q) {
    // sum_{j>0} (-1)^j p^{t^{-2}}_{j-1}(t q^2 x; q^2) delta_{n,-q^{-2j},m+2j}
    const ASCIIParams ap{1.0 / (p.t * p.t), p.t > 0.0 ? -1 : +1};
    const AtomVector v = asc2_atom_vector(x.k - 1, ap, ctx2);
    for (long j = 1; j <= v.k_max() + 1; ++j) {
      const double c = (j % 2 == 0 ? 1.0 : -1.0) * v.at(j - 1);
      out.add({eps, n, -1, -j, m + 2 * j}, c);
    }
    return out;
  }
  // e(x) = +1: CKK chain in z = t x with parameters (c = 1, t)
  const double z = p.t * x_value(x, p.t, ctx);
  const CKKParams cp{1.0, p.t};
  const AtomVector v = ckk_atom_vector(z, cp, ctx2);
  for (long j = v.k_min; j <= v.k_max(); ++j)
    out.add({eps, n, +1, -j, m + 2 * j}, v.at(j));
  return out;
}

namespace {

// Coefficient sequences evaluated at a spectral label, with a global parity
// factor handling the (a,b) -> (-a,-b) reflection of the Al-Salam-Chihara
// family and the d -> -d reflection of the little q-Jacobi family.
struct SignedCoeffs {
  AtomVector v;
  int parity = +1;  // coefficient_k = parity^k * v.at(k)
  double at(long k) const {
    const double f = (parity < 0 && (k % 2 != 0)) ? -1.0 : 1.0;
    return f * v.at(k);
  }
  long k_min() const { return v.k_min; }
  long k_max() const { return v.k_max(); }
};

SignedCoeffs asc_signed(double y, ASCParams pr, const QContext& ctx2) {
  try {
    return {asc_atom_vector(y, pr, ctx2), +1};
  } catch (const DomainError&) {
    pr.a = -pr.a;
    pr.b = -pr.b;
    return {asc_atom_vector(-y, pr, ctx2), -1};
  }
}

SignedCoeffs lqj_signed(double y, LittleQJacobiParams pr,
                        const QContext& ctx2) {
  try {
    return {lqj_atom_vector(y, pr, ctx2), +1};
  } catch (const DomainError&) {
    pr.d = -pr.d;
    return {lqj_atom_vector(-y, pr, ctx2), -1};
  }
}

SignedCoeffs band_coeffs_asc(double theta, const ASCParams& pr, long k_max,
                             const QContext& ctx2) {
  SignedCoeffs sc;
  sc.v.k_min = 0;
  sc.v.v = asc_band_kernel(k_max, theta, pr, ctx2);
  return sc;
}

SignedCoeffs band_coeffs_lqj(double theta, const LittleQJacobiParams& pr,
                             long half, const QContext& ctx2) {
  SignedCoeffs sc;
  sc.v.k_min = -half;
  sc.v.v = lqj_band_kernel(-half, half, theta, pr, ctx2);
  return sc;
}

}  // namespace

TruncatedState iwasawa_expand(const IwasawaIndex& idx, const QContext& ctx,
                              const Window& w) {
  const DynamicalParams& p = idx.st;
  check_dynamical(p, ctx);
  const QContext ctx2 = squared(ctx);
  const int e = e_of(idx.x);
  const double xv = x_value(idx.x, p.t, ctx);
  TruncatedState out;
  out.window = w;
  const double relcut = 1e-14;
  if (idx.eps == -e) {
    // sum_{k>=0} (-1)^k h_k(mu(xi); e q^{2+n} t x, 0; q^2) g_{n,x,-n-2-2k}
    const ASCParams pr{e * qp(ctx, 2.0 + idx.n) * p.t * xv, 0.0,
                       ASCDirection::base_q};
    SignedCoeffs sc;
    if (idx.xi.band) {
      sc = band_coeffs_asc(idx.xi.theta, pr,
                           (w.m_half + std::labs(idx.n)) / 2 + 3, ctx2);
      out.generalized = true;
    } else {
      sc = asc_signed(label_y(idx.xi, p.t, ctx), pr, ctx2);
    }
    double mx = 0.0;
    for (long k = 0; k <= sc.k_max(); ++k)
      mx = std::max(mx, std::abs(sc.at(k)));
    for (long k = 0; k <= sc.k_max(); ++k) {
      const double c = (k % 2 == 0 ? 1.0 : -1.0) * sc.at(k);
      if (std::abs(c) < relcut * mx) continue;
      const TruncatedState g =
          pre_iwasawa_g(idx.eps, idx.n, idx.x, -idx.n - 2 - 2 * k, p, ctx, w);
      for (const auto& [ci, gc] : g.terms) out.add(ci, c * gc);
      out.escaped_mass += c * c * g.escaped_mass;
    }
    return out;
  }
  if (idx.eps != e) throw DomainError("iwasawa_expand: eps must be +-e(x)");
  // sum_{k in Z} (-1)^k j_k(mu(xi); 0, -e q^{-n} (tx)^{-1}; q^2, -1)
  //   g_{n,x,-n-2+2k}
  const LittleQJacobiParams pr{0.0, -e * qp(ctx, -idx.n) / (p.t * xv), -1.0};
  SignedCoeffs sc;
  if (idx.xi.band) {
    sc = band_coeffs_lqj(idx.xi.theta, pr,
                         (w.m_half + std::labs(idx.n)) / 2 + 3, ctx2);
    out.generalized = true;
  } else {
    sc = lqj_signed(label_y(idx.xi, p.t, ctx), pr, ctx2);
  }
  double mx = 0.0;
  for (long k = sc.k_min(); k <= sc.k_max(); ++k)
    mx = std::max(mx, std::abs(sc.at(k)));
  for (long k = sc.k_min(); k <= sc.k_max(); ++k) {
    const double c = (k % 2 == 0 ? 1.0 : -1.0) * sc.at(k);
    if (std::abs(c) < relcut * mx) continue;
    const long m = -idx.n - 2 + 2 * k;
    if (idx.eps * e == -1 && idx.n + m > -2) continue;  // zero g
    const TruncatedState g = pre_iwasawa_g(idx.eps, idx.n, idx.x, m, p, ctx, w);
    for (const auto& [ci, gc] : g.terms) out.add(ci, c * gc);
    out.escaped_mass += c * c * g.escaped_mass;
  }
  return out;
}

TruncatedState pre_gauss_h(int eps, long n, const YLabel& y,
                           const SpectralLabel& xi, const DynamicalParams& p,
                           const QContext& ctx, const Window& w) {
  check_dynamical(p, ctx);
  const QContext ctx2 = squared(ctx);
  TruncatedState out;
  out.window = w;
  const double relcut = 1e-13;
  auto accumulate = [&](const SignedCoeffs& sc, auto&& index_of) {
    double mx = 0.0;
    for (long k = sc.k_min(); k <= sc.k_max(); ++k)
      mx = std::max(mx, std::abs(sc.at(k)));
    for (long k = sc.k_min(); k <= sc.k_max(); ++k) {
      const double c = sc.at(k);
      if (std::abs(c) < relcut * mx) continue;
      const IwasawaIndex ii = index_of(k);
      TruncatedState d;
      try {
        d = iwasawa_expand(ii, ctx, w);
      } catch (const DomainError&) {
        continue;  // component with mu(xi) off its conditional spectrum
      }
      out.generalized = out.generalized || d.generalized;
      for (const auto& [ci, dc] : d.terms) out.add(ci, c * dc);
      out.escaped_mass += c * c * d.escaped_mass;
    }
  };
  switch (y.branch) {
    case YBranch::U: {
      if (y.band) throw DomainError("pre_gauss_h: U branch has no band");
      const ASCParams pr{p.s * p.t / ctx.q, p.t / (ctx.q * p.s),
                         ASCDirection::base_q_inverse};
      const SignedCoeffs sc = asc_signed(y_value(y, p, ctx), pr, ctx2);
      accumulate(sc, [&](long k) {
        return IwasawaIndex{eps, n + 2 * k + 2, {XBranch::neg_q, k + 1}, xi, p};
      });
      break;
    }
    case YBranch::V: {
      const ASCParams pr{-ctx.q / (p.s * p.t), -ctx.q * p.s / p.t,
                         ASCDirection::base_q};
      SignedCoeffs sc;
      if (y.band) {
        sc = band_coeffs_asc(M_PI - y.theta, pr,
                             (w.n_half + std::labs(n)) / 2 + 3, ctx2);
        out.generalized = true;
      } else {
        sc = asc_signed(-y_value(y, p, ctx), pr, ctx2);
      }
      accumulate(sc, [&](long k) {
        return IwasawaIndex{eps, n - 2 * k, {XBranch::neg_t, k}, xi, p};
      });
      break;
    }
    default: {  // W branches share one doubly-infinite chain
      const LittleQJacobiParams pr{ctx.q * ctx.q / (p.s * p.s),
                                   -ctx.q / (p.s * p.t), -1.0};
      SignedCoeffs sc;
      if (y.band) {
        sc = band_coeffs_lqj(M_PI - y.theta, pr,
                             (w.n_half + std::labs(n)) / 2 + 3, ctx2);
        out.generalized = true;
      } else {
        sc = lqj_signed(-y_value(y, p, ctx), pr, ctx2);
      }
      accumulate(sc, [&](long k) {
        return IwasawaIndex{eps, n + 2 * k, {XBranch::pos, -k}, xi, p};
      });
      break;
    }
  }
  return out;
}

TruncatedState gauss_expand(const GaussIndex& idx, const QContext& ctx,
                            const Window& w) {
  const DynamicalParams& p = idx.st;
  check_dynamical(p, ctx);
  if (idx.xi.band)
    throw DomainError("gauss_expand: band xi expansions are not supported");
  if (idx.y.band)
    throw DomainError("gauss_expand: band y expansions are not supported");
  if (!gauss_nonzero(idx, ctx))
    throw DomainError(
        "gauss_expand: index violates the non-vanishing constraints");
  const QContext ctx2 = squared(ctx);
  const int e = e_of(idx.y);
  const int kap = kappa_of(idx.y);
  const double yv = y_value(idx.y, p, ctx);
  const double xiv = label_y(idx.xi, p.t, ctx);
  const long m = idx.xi.m;  // q-exponent of the xi label
  TruncatedState out;
  out.window = w;
  const double relcut = 1e-13;
  auto accumulate = [&](const SignedCoeffs& sc, int step_sign,
                        auto&& n_of) {
    double mx = 0.0;
    for (long k = sc.k_min(); k <= sc.k_max(); ++k)
      mx = std::max(mx, std::abs(sc.at(k)));
    for (long k = sc.k_min(); k <= sc.k_max(); ++k) {
      double c = sc.at(k);
      if (step_sign < 0 && (k % 2 != 0)) c = -c;
      if (std::abs(c) < relcut * mx) continue;
      const long n = n_of(k);
      if (!h_nonzero(idx.eps, n, idx.y, idx.xi, p, ctx)) continue;
      const TruncatedState h =
          pre_gauss_h(idx.eps, n, idx.y, idx.xi, p, ctx, w);
      out.generalized = out.generalized || h.generalized;
      for (const auto& [ci, hc] : h.terms) out.add(ci, c * hc);
      out.escaped_mass += c * c * h.escaped_mass;
    }
  };
  if (idx.xi.sgn == kap && idx.xi.ppow == -kap) {
    // case 1
    if (idx.eps == -e) {
      const ASCParams pr{e * ctx.q * xiv * yv, e * ctx.q * xiv / yv,
                         ASCDirection::base_q};
      SignedCoeffs sc;
      if (idx.eta.band) {
        sc = band_coeffs_asc(idx.eta.theta, pr,
                             (w.n_half + std::labs(m)) / 2 + 3, ctx2);
        out.generalized = true;
      } else {
        sc = asc_signed(label_y(idx.eta, p.s, ctx), pr, ctx2);
      }
      // coefficients kappa^k h_k; components h_{-m-2-2k}
      accumulate(sc, kap, [&](long k) { return -m - 2 - 2 * k; });
      return out;
    }
    const LittleQJacobiParams pr{ctx.q * ctx.q * yv * yv,
                                 -e * ctx.q * yv / xiv, -1.0};
    SignedCoeffs sc;
    if (idx.eta.band) {
      sc = band_coeffs_lqj(idx.eta.theta, pr,
                           (w.n_half + std::labs(m)) / 2 + 3, ctx2);
      out.generalized = true;
    } else {
      sc = lqj_signed(label_y(idx.eta, p.s, ctx), pr, ctx2);
    }
    // coefficients (-kappa)^k j_k; components h_{-m-2+2k}
    accumulate(sc, -kap, [&](long k) { return -m - 2 + 2 * k; });
    return out;
  }
  // case 2: xi = -kappa t^{kappa} q^m
  if (idx.eps == -e)
    throw DomainError("gauss_expand: empty spectrum for this superscript");
  const ASCParams pr{-e / (ctx.q * xiv * yv), -e * yv / (ctx.q * xiv),
                     ASCDirection::base_q_inverse};
  const SignedCoeffs sc = asc_signed(label_y(idx.eta, p.s, ctx), pr, ctx2);
  // coefficients (-kappa)^k h_k; components h_{m+2k}
  accumulate(sc, -kap, [&](long k) { return m + 2 * k; });
  return out;
}

// ---------------------------------------------------------------------------
// Decomposed coordinate actions
// ---------------------------------------------------------------------------

IwasawaAction coord_alpha_iwasawa(const IwasawaIndex& idx,
                                  const QContext& ctx) {
  const double t = idx.st.t;
  const int e = e_of(idx.x);
  const double xv = x_value(idx.x, t, ctx);
  IwasawaAction a;
  a.coeff = -e * std::sqrt(e * (1.0 + xv));
  a.image = idx;
  a.image.n += 1;
  a.image.st.t = ctx.q * t;
  switch (idx.x.branch) {  // x -> q^{-2} x under the new parameter qt
    case XBranch::neg_q:
      a.image.x.k += 1;
      break;
    case XBranch::pos:
      a.image.x.k -= 1;
      break;
    case XBranch::neg_t:
      break;  // -t^{-2} q^{2k-2} = -(qt)^{-2} q^{2k}
  }
  if (!idx.xi.band) a.image.xi.m -= idx.xi.ppow;  // same value, t -> qt
  return a;
}

IwasawaAction coord_gamma_iwasawa(const IwasawaIndex& idx,
                                  const QContext& ctx) {
  const double t = idx.st.t;
  const int e = e_of(idx.x);
  const double xv = x_value(idx.x, t, ctx);
  IwasawaAction a;
  a.coeff = e * std::sqrt(e * (1.0 / (ctx.q * ctx.q * t * t) + xv));
  a.image = idx;
  a.image.n -= 1;
  a.image.st.t = ctx.q * t;
  if (idx.x.branch == XBranch::neg_t) a.image.x.k += 1;  // same x value
  if (!idx.xi.band) a.image.xi.m -= idx.xi.ppow;
  return a;
}

namespace {
// Relabel an atom y under (s,t) -> (s', t') with s = q^{ds} s', t = q^{dt} t'
// (the value of y is unchanged; only the stored exponent moves).
YLabel y_relabel(const YLabel& y, int ds, int dt) {
  if (y.band) return y;
  const YDecomp d = y_decomp(y);
  const long shift = d.se * ds + d.te * dt;  // q-exponent gained by s^se t^te
  YLabel out = y;
  // qe_new = d.qe + shift must remain on the branch grid
  switch (y.branch) {
    case YBranch::U:
    case YBranch::W_neg:
      out.k = y.k + shift / 2;
      break;
    case YBranch::V:
    case YBranch::W_pos:
      out.k = y.k - shift / 2;
      break;
  }
  return out;
}
}  // namespace

GaussAction coord_alpha_gauss(const GaussIndex& idx, const QContext& ctx) {
  const DynamicalParams& p = idx.st;
  const int e = e_of(idx.y);
  const double mu_y = y_mu(idx.y, p, ctx);
  GaussAction a;
  a.coeff = std::sqrt(e * (1.0 + 1.0 / (ctx.q * ctx.q * p.s * p.s * p.t * p.t) -
                           2.0 * mu_y / (ctx.q * p.s * p.t)));
  a.image = idx;
  a.image.st = {ctx.q * p.s, ctx.q * p.t};
  // s = q^{-1} s', t = q^{-1} t'
  a.image.y = y_relabel(idx.y, -1, -1);
  if (!idx.eta.band) a.image.eta.m -= idx.eta.ppow;
  if (!idx.xi.band) a.image.xi.m -= idx.xi.ppow;
  return a;
}

GaussAction coord_gamma_gauss(const GaussIndex& idx, const QContext& ctx) {
  const DynamicalParams& p = idx.st;
  const int e = e_of(idx.y);
  const double mu_y = y_mu(idx.y, p, ctx);
  GaussAction a;
  a.coeff = e * std::sqrt(e * (1.0 / (p.s * p.s) +
                               1.0 / (ctx.q * ctx.q * p.t * p.t) -
                               2.0 * mu_y / (ctx.q * p.s * p.t)));
  a.image = idx;
  a.image.st = {p.s / ctx.q, ctx.q * p.t};
  // s = q s', t = q^{-1} t'
  a.image.y = y_relabel(idx.y, +1, -1);
  if (!idx.eta.band) a.image.eta.m += idx.eta.ppow;
  if (!idx.xi.band) a.image.xi.m -= idx.xi.ppow;
  return a;
}

// ---------------------------------------------------------------------------
// Casimir
// ---------------------------------------------------------------------------

TruncatedState casimir_cartan(const TruncatedState& s, const QContext& ctx) {
  Accum acc(s);
  for (const auto& [i, c] : s.terms) {
    const double k = static_cast<double>(i.k);
    const int es = i.eps * i.sign;
    const double nm2k = static_cast<double>(i.n + i.m + 2 * i.k);
    // A(x) = 1/2 sqrt((1+x^{-1})(1+eps q^{-n-m} x^{-1})), image k -> k-1
    const double rA =
        (1.0 + i.sign * qp(ctx, -2.0 * k)) * (1.0 + es * qp(ctx, -nm2k));
    if (rA > 0.0)
      acc.add({i.eps, i.n, i.sign, i.k - 1, i.m}, c * 0.5 * std::sqrt(rA));
    // B(x) = -1/2 (q^{-m} + eps q^{-n}) q^{-1} x^{-1}
    acc.add(i, c * -0.5 *
                   (qp(ctx, -static_cast<double>(i.m)) +
                    i.eps * qp(ctx, -static_cast<double>(i.n))) *
                   i.sign * qp(ctx, -2.0 * k - 1.0));
    // A(q^2 x), image k -> k+1
    const double rAu = (1.0 + i.sign * qp(ctx, -2.0 * k - 2.0)) *
                       (1.0 + es * qp(ctx, -nm2k - 2.0));
    if (rAu > 0.0)
      acc.add({i.eps, i.n, i.sign, i.k + 1, i.m}, c * 0.5 * std::sqrt(rAu));
  }
  return acc.take();
}

TruncatedState casimir_composed(Side side, const TruncatedState& s,
                                const QContext& ctx) {
  const double dq = ctx.q - 1.0 / ctx.q;
  auto U = [&](UEAGen g, const TruncatedState& v) {
    return uea_action(g, side, v, ctx);
  };
  // Omega = (q^{-1} K^{-2} + q K^2 - 2) / dq^2 + FE
  TruncatedState k2 = U(UEAGen::K, U(UEAGen::K, s));
  TruncatedState ki2 = U(UEAGen::Kinv, U(UEAGen::Kinv, s));
  TruncatedState fe =
      side == Side::left ? U(UEAGen::F, U(UEAGen::E, s))
                         : U(UEAGen::E, U(UEAGen::F, s));  // v.(FE) = (v.F).E
  TruncatedState omega =
      axpy(1.0 / (ctx.q * dq * dq), ki2,
           axpy(ctx.q / (dq * dq), k2, axpy(-2.0 / (dq * dq), s, fe)));
  // Omega~ = (1/2) dq^2 Omega + 1
  return axpy(0.5 * dq * dq, omega, s);
}

GaussIndex gauss_shift_y(const GaussIndex& idx, int dir, const QContext& ctx) {
  if (idx.y.band)
    throw DomainError("gauss_shift_y: band y has no lattice neighbor");
  GaussIndex out = idx;
  // y -> q^{2 dir} y: U/W_neg store y ~ q^{1+2k} (k grows with exponent),
  // V/W_pos store y ~ q^{-1-2k} (k shrinks with exponent).
  switch (idx.y.branch) {
    case YBranch::U:
    case YBranch::W_neg:
      out.y.k += dir;
      break;
    case YBranch::V:
    case YBranch::W_pos:
      out.y.k -= dir;
      break;
  }
  const bool half_line = idx.y.branch != YBranch::W_neg;
  if (half_line && out.y.k < 0)
    throw DomainError("gauss_shift_y: shifted point leaves the spectrum");
  if (idx.y.branch != YBranch::U &&
      !(std::abs(y_value(out.y, idx.st, ctx)) < 1.0))
    throw DomainError("gauss_shift_y: shifted point leaves the spectrum");
  return out;
}

CasimirGaussCoeffs casimir_gauss(const GaussIndex& idx, const QContext& ctx) {
  const DynamicalParams& p = idx.st;
  check_dynamical(p, ctx);
  if (idx.y.band)
    throw DomainError("casimir_gauss: requires mu(y) outside the band");
  const double q = ctx.q;
  const double yv = y_value(idx.y, p, ctx);
  const double ee = idx.eps * label_y(idx.eta, p.s, ctx);  // eps * eta
  const double xiv = label_y(idx.xi, p.t, ctx);
  auto stprod = [&](double y) {
    return (1.0 - p.s * p.t * y / q) * (1.0 - p.t * y / (q * p.s)) *
           (1.0 - p.s * y / (q * p.t)) * (1.0 - y / (q * p.s * p.t));
  };
  auto exprod = [&](double y) {
    return (1.0 + ee * xiv * y / q) * (1.0 + xiv * y / (q * ee)) *
           (1.0 + ee * y / (q * xiv)) * (1.0 + y / (q * ee * xiv));
  };
  auto Aof = [&](double y) {
    const double y2 = y * y;
    const double den = (1.0 - y2) * (1.0 - y2 / (q * q)) *
                       (1.0 - y2 / (q * q)) * (1.0 - y2 / (q * q * q * q));
    const double rad = stprod(y) * exprod(y) / den;
    if (!(rad >= 0.0))
      throw DomainError("casimir_gauss: negative radicand at a boundary point");
    return 0.5 * std::sqrt(rad);
  };
  const double mu_q = mu_of(q);
  const double mu_y = mu_of(yv);
  const double mu_s = mu_of(p.s);
  const double mu_t = mu_of(p.t);
  const double mu_xi = mu_of(xiv);
  const double mu_ee = mu_of(ee);
  CasimirGaussCoeffs out;
  out.A_down = Aof(yv);
  out.A_up = Aof(1.0 / yv);
  out.B = ((mu_s * mu_y - mu_q * mu_t) * mu_xi -
           (mu_t * mu_y - mu_q * mu_s) * mu_ee) /
          ((mu_y + mu_q) * (mu_y - mu_q));
  return out;
}

double askey_wilson_psi(double yv, const GaussIndex& idx, const QContext& ctx) {
  const double q = ctx.q;
  const DynamicalParams& p = idx.st;
  const double ee = idx.eps * label_y(idx.eta, p.s, ctx);
  const double xiv = label_y(idx.xi, p.t, ctx);
  return (1.0 - q * p.s * yv / p.t) * (1.0 - q * p.s * p.t * yv) *
         (1.0 + q * ee * yv / xiv) * (1.0 + q * ee * xiv * yv) /
         ((1.0 - yv * yv) * (1.0 - q * q * yv * yv));
}

double gauss_rescale_weight(double yv, const GaussIndex& idx,
                            const QContext& ctx) {
  const QContext ctx2 = squared(ctx);
  const double q = ctx.q;
  const DynamicalParams& p = idx.st;
  const double ee = idx.eps * label_y(idx.eta, p.s, ctx);
  const double xiv = label_y(idx.xi, p.t, ctx);
  const Complex num = q_pochhammer_inf(
      {Complex(q * p.s * p.t * yv), Complex(q * p.s * p.t / yv),
       Complex(-q * ee * xiv * yv), Complex(-q * ee * xiv / yv)},
      ctx2);
  const Complex den = q_pochhammer_inf(
      {Complex(q * p.t * yv / p.s), Complex(q * p.t / (p.s * yv)),
       Complex(-q * xiv * yv / ee), Complex(-q * xiv / (ee * yv))},
      ctx2);
  const double rad =
      num.real() / (std::abs(1.0 / yv - yv) * den.real());
  if (!(rad > 0.0))
    throw DomainError("gauss_rescale_weight: non-positive weight");
  return std::sqrt(rad);
}

// ---------------------------------------------------------------------------
// Quantum Poincare disk
// ---------------------------------------------------------------------------

std::vector<DiskPoint> poincare_disk_points(long theta_count, long k_min,
                                            long k_max, const QContext& ctx) {
  if (theta_count < 1) throw DomainError("poincare_disk_points: need thetas");
  std::vector<DiskPoint> out;
  auto ring = [&](double x) {
    const double r = 1.0 / std::sqrt(1.0 + 1.0 / x);
    for (long i = 0; i < theta_count; ++i) {
      const double th = 2.0 * M_PI * static_cast<double>(i) /
                        static_cast<double>(theta_count);
      out.push_back({r * std::cos(th), r * std::sin(th), x, r < 1.0});
    }
  };
  for (long k = k_min; k <= k_max; ++k)
    ring(qp(ctx, 2.0 * static_cast<double>(k)));  // x = q^{2k} (inner disk)
  for (long j = 1; j <= std::max<long>(1, k_max); ++j)
    ring(-qp(ctx, -2.0 * static_cast<double>(j)));  // x = -q^{-2j} (outer)
  return out;
}

}  // namespace qg
