#pragma once

#include <Eigen/Dense>

#include "trigal/curve.hpp"

namespace trigal {

// Unordered tuple of points on the curve; canonical order is lexicographic
// on (Re x, Im x, Re y, Im y).
struct DivisorTuple {
  std::vector<SurfacePoint> points;

  DivisorTuple() = default;
  explicit DivisorTuple(std::vector<SurfacePoint> pts) : points(std::move(pts)) {}

  int degree() const { return static_cast<int>(points.size()); }

  DivisorTuple canonical() const {
    DivisorTuple d = *this;
    std::sort(d.points.begin(), d.points.end(), lex_less);
    return d;
  }
};

// Which determinants of the inverse-map constructions vanish for a given
// configuration.  Recomputed on demand, never cached.
struct GenericityReport {
  bool x_collision = false;       // |1 x_i| Vandermonde factor vanishes
  bool y_collision = false;       // |1 y_i| factor vanishes
  bool xy_determinant = false;    // |x_i y_j| factor vanishes
  bool base_denominator = false;  // mu_n denominator vanishes

  bool generic() const {
    return !(x_collision || y_collision || xy_determinant || base_denominator);
  }
};

namespace detail {

inline cplx det_phi(const std::vector<SurfacePoint>& pts, const std::vector<int>& cols) {
  const int n = static_cast<int>(pts.size());
  Eigen::MatrixXcd m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      m(r, c) = phi_monomial(cols[c], pts[r]);
  return m.determinant();
}

inline double row_scale(const std::vector<SurfacePoint>& pts, const std::vector<int>& cols) {
  double s = 1.0;
  for (const SurfacePoint& p : pts) {
    double r = 0.0;
    for (int c : cols) r = std::max(r, std::abs(phi_monomial(c, p)));
    s *= std::max(r, 1.0);
  }
  return s;
}

inline std::vector<int> iota_cols(int n) {
  std::vector<int> c(n);
  for (int k = 0; k < n; ++k) c[k] = k;
  return c;
}

}  // namespace detail

// Determinant of the n x n matrix [phi_0 .. phi_{n-1}] over the points (the
// first factor of Delta_n, also the denominator of mu_n).
inline cplx phi_gram_det(const std::vector<SurfacePoint>& pts) {
  return detail::det_phi(pts, detail::iota_cols(static_cast<int>(pts.size())));
}

// Delta_n: product of the phi determinant and the x-Vandermonde determinant.
inline cplx delta_n(const DivisorTuple& d) {
  const int n = d.degree();
  if (n < 1 || n > 4) throw InputError("delta_n: degree must be 1..4");
  if (n == 1) return cplx(1.0);
  Eigen::MatrixXcd v(n, n);
  for (int r = 0; r < n; ++r) {
    cplx acc(1.0);
    for (int c = 0; c < n; ++c) {
      v(r, c) = acc;
      acc *= d.points[r].x;
    }
  }
  return phi_gram_det(d.points) * v.determinant();
}

// mu_n(P; base): ratio of the bordered (n+1)x(n+1) phi determinant to the
// n x n determinant over the base points.  Monic in phi_n, simple zero at
// each base point, pole of order N(n) at infinity.
inline cplx mu_n(const SurfacePoint& p, const DivisorTuple& base) {
  const int n = base.degree();
  if (n < 1) throw InputError("mu_n: empty base");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(base.points[i].x - base.points[j].x) +
              std::abs(base.points[i].y - base.points[j].y) ==
          0.0)
        throw DegenerateBase("mu_n: coincident base points");
  cplx den = phi_gram_det(base.points);
  double scale = detail::row_scale(base.points, detail::iota_cols(n));
  if (std::abs(den) < 1e-13 * scale)
    throw DegenerateBase("mu_n: base configuration is special (denominator vanishes)");
  std::vector<SurfacePoint> rows = base.points;
  rows.push_back(p);
  return detail::det_phi(rows, detail::iota_cols(n + 1)) / den;
}

// ---------------------------------------------------------------------------
// Inverse maps [-1]_n.

// [-1]_1(P): the two other sheets over x(P).
inline DivisorTuple minus_one_1(const CurveSpec&, const SurfacePoint& p) {
  if (std::abs(p.y) < 1e-10 * (1.0 + std::abs(p.x)))
    throw BranchPointInput("minus_one_1: branch point input");
  DivisorTuple out;
  out.points.push_back({p.x, zeta3 * p.y});
  out.points.push_back({p.x, zeta3 * zeta3 * p.y});
  return out.canonical();
}

namespace detail {

// Check that q(x')^3 = f(x') is consistent after deflation; polish roots on
// the full polynomial first.
inline void polish_and_check(const Poly& full, std::vector<cplx>& roots) {
  Poly d = full.derivative();
  double cmax = 0.0;
  for (const cplx& c : full.coeffs()) cmax = std::max(cmax, std::abs(c));
  for (cplx& r : roots) {
    for (int it = 0; it < 3; ++it) {
      cplx dp = d.eval(r);
      if (std::abs(dp) == 0.0) break;
      r -= full.eval(r) / dp;
    }
    double sc = cmax * std::pow(1.0 + std::abs(r), double(full.degree()));
    if (std::abs(full.eval(r)) > 1e-6 * sc)
      throw RootDeflationFailure("inverse map: deflated root fails residual check");
  }
}

}  // namespace detail

// [-1]_2(P1,P2): solve the collinearity relation y = alpha + beta x, then the
// remaining two roots of (alpha+beta x)^3 - f(x) after removing x1, x2.
inline DivisorTuple minus_one_2(const CurveSpec& curve, const SurfacePoint& p1,
                                const SurfacePoint& p2) {
  cplx dx = p2.x - p1.x;
  double sc = std::abs(p1.x) + std::abs(p2.x) + 1.0;
  if (std::abs(dx) < 1e-12 * sc)
    throw VerticalLine(
        "minus_one_2: x1 = x2 (vertical fiber; reduce via minus_one_1 instead)");
  cplx beta = (p2.y - p1.y) / dx;
  cplx alpha = p1.y - beta * p1.x;
  // (alpha + beta x)^3 - f(x), degree 4 with leading coefficient -1
  Poly line({alpha, beta});
  Poly cube = line * line * line;
  Poly full = cube - curve.cover().f();
  Poly defl = full.deflate(p1.x).deflate(p2.x);
  std::vector<cplx> roots = defl.roots();
  if (roots.size() != 2) throw RootDeflationFailure("minus_one_2: quadratic solve failed");
  detail::polish_and_check(full, roots);
  DivisorTuple out;
  for (cplx r : roots) {
    cplx y = nearest_root(curve.f_eval(r), 3, alpha + beta * r);
    out.points.push_back({r, y});
  }
  return out.canonical();
}

// [-1]_3(P1,P2,P3): solve the 4x4 relation for y = q(x) quadratic, then the
// remaining cubic of q(x)^3 - f(x) after removing x1, x2, x3.
inline DivisorTuple minus_one_3(const CurveSpec& curve, const DivisorTuple& base) {
  if (base.degree() != 3) throw InputError("minus_one_3: need 3 points");
  const auto& P = base.points;
  Eigen::Matrix3cd m1, m2, m3, m4;  // minors of columns (1, x, y, x^2)
  for (int r = 0; r < 3; ++r) {
    cplx x = P[r].x, y = P[r].y;
    m1.row(r) << x, y, x * x;
    m2.row(r) << cplx(1.0), y, x * x;
    m3.row(r) << cplx(1.0), x, x * x;
    m4.row(r) << cplx(1.0), x, y;
  }
  cplx c1 = m1.determinant(), c2 = m2.determinant(), c3 = m3.determinant(),
       c4 = m4.determinant();
  double sc = 0.0;
  for (int r = 0; r < 3; ++r) sc = std::max(sc, std::norm(P[r].x) + 1.0);
  if (std::abs(c3) < 1e-12 * sc * std::sqrt(sc))
    throw DegenerateConfiguration("minus_one_3: x-Vandermonde minor vanishes");
  // det = C1 - x C2 + y C3 - x^2 C4 = 0  =>  y = (-C1 + C2 x + C4 x^2)/C3
  cplx q0 = -c1 / c3, q1 = c2 / c3, q2 = c4 / c3;
  Poly q({q0, q1, q2});
  Poly full = q * q * q - curve.cover().f();  // degree 6
  Poly defl = full.deflate(P[0].x).deflate(P[1].x).deflate(P[2].x);
  std::vector<cplx> roots = defl.roots();
  if (roots.size() != 3) throw RootDeflationFailure("minus_one_3: cubic solve failed");
  detail::polish_and_check(full, roots);
  DivisorTuple out;
  for (cplx r : roots) {
    cplx y = nearest_root(curve.f_eval(r), 3, q.eval(r));
    out.points.push_back({r, y});
  }
  return out.canonical();
}

inline GenericityReport genericity(const DivisorTuple& d) {
  GenericityReport g;
  const auto& P = d.points;
  const int n = d.degree();
  double xs = 1.0, ys = 1.0;
  for (const auto& p : P) {
    xs = std::max(xs, std::abs(p.x));
    ys = std::max(ys, std::abs(p.y));
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(P[i].x - P[j].x) < 1e-9 * xs) g.x_collision = true;
      if (std::abs(P[i].y - P[j].y) < 1e-9 * ys) g.y_collision = true;
      if (std::abs(P[i].x * P[j].y - P[j].x * P[i].y) < 1e-9 * xs * ys)
        g.xy_determinant = true;
    }
  if (n >= 2) {
    cplx den = phi_gram_det(P);
    if (std::abs(den) < 1e-9 * detail::row_scale(P, detail::iota_cols(n)))
      g.base_denominator = true;
  }
  return g;
}

// ---------------------------------------------------------------------------
// A_a and F_a.

// A_a(D) = mu_3 evaluated at the branch point B_a = (b_a, 0).
inline cplx A_func(const CurveSpec& curve, int a, const DivisorTuple& d) {
  if (d.degree() != 3) throw InputError("A_func: need 3 points");
  return mu_n({curve.branch_point(a), cplx(0.0)}, d);
}

// F_a(D) = (b_a - x1)(b_a - x2)(b_a - x3).
inline cplx F_func(const CurveSpec& curve, int a, const DivisorTuple& d) {
  if (d.degree() != 3) throw InputError("F_func: need 3 points");
  cplx acc(1.0);
  for (const auto& p : d.points) acc *= curve.branch_point(a) - p.x;
  return acc;
}

}  // namespace trigal
