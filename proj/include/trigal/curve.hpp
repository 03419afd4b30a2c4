#pragma once

#include <array>
#include <vector>

#include "trigal/poly.hpp"

namespace trigal {

struct SurfacePoint {
  cplx x;
  cplx y;
};

inline bool lex_less(const SurfacePoint& a, const SurfacePoint& b) {
  if (a.x.real() != b.x.real()) return a.x.real() < b.x.real();
  if (a.x.imag() != b.x.imag()) return a.x.imag() < b.x.imag();
  if (a.y.real() != b.y.real()) return a.y.real() < b.y.real();
  return a.y.imag() < b.y.imag();
}

// Cyclic cover y^N = f(x) with f monic, simple roots, and gcd(N, deg f) = 1
// so that infinity is a single total ramification point.
class CyclicCover {
 public:
  CyclicCover(int sheet_count, std::vector<cplx> branch_points)
      : n_(sheet_count), b_(std::move(branch_points)), f_(Poly::from_roots(b_)) {
    fp_ = f_.derivative();
    double bmax = 0.0;
    centroid_ = cplx(0.0);
    for (cplx v : b_) centroid_ += v;
    centroid_ /= double(b_.size());
    for (cplx v : b_) bmax = std::max(bmax, std::abs(v));
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < b_.size(); ++i)
      for (std::size_t j = i + 1; j < b_.size(); ++j)
        dmin = std::min(dmin, std::abs(b_[i] - b_[j]));
    if (!(dmin > 1e-8 * std::max(1.0, bmax)))
      throw InputError("branch points not distinct");
    min_gap_ = dmin;
    spread_ = 0.0;
    for (cplx v : b_) spread_ = std::max(spread_, std::abs(v - centroid_));
    if (spread_ == 0.0) spread_ = 1.0;
  }

  int sheets() const { return n_; }
  const std::vector<cplx>& branch_points() const { return b_; }
  const Poly& f() const { return f_; }
  const Poly& f_derivative() const { return fp_; }
  cplx f_eval(cplx x) const { return f_.eval(x); }
  cplx centroid() const { return centroid_; }
  double min_gap() const { return min_gap_; }
  double spread() const { return spread_; }

  double dist_to_branch(cplx x) const {
    double d = std::numeric_limits<double>::infinity();
    for (cplx v : b_) d = std::min(d, std::abs(x - v));
    return d;
  }

  bool near_branch_value(cplx x) const {
    double fx = std::abs(f_eval(x));
    double xs = std::pow(std::abs(x) + 1.0, double(f_.degree()));
    return fx < 1e-12 * (1.0 + xs);
  }

  // The N points over x, sorted by arg(y) for determinism.
  std::vector<SurfacePoint> sheets_above(cplx x) const {
    if (near_branch_value(x))
      throw BranchPointInput("sheets_above: x is (numerically) a branch point");
    std::vector<cplx> ys = all_roots(f_eval(x), n_);
    std::sort(ys.begin(), ys.end(),
              [](cplx a, cplx b) { return std::arg(a) < std::arg(b); });
    std::vector<SurfacePoint> out;
    out.reserve(n_);
    for (cplx y : ys) out.push_back({x, y});
    return out;
  }

  SurfacePoint point_above(cplx x, int sheet) const {
    auto s = sheets_above(x);
    return s[((sheet % n_) + n_) % n_];
  }

  bool on_curve(const SurfacePoint& p, double tol = 1e-9) const {
    cplx yn(1.0);
    for (int k = 0; k < n_; ++k) yn *= p.y;
    cplx fx = f_eval(p.x);
    return std::abs(yn - fx) <= tol * (1.0 + std::abs(fx));
  }

 private:
  int n_;
  std::vector<cplx> b_;
  Poly f_;
  Poly fp_;
  cplx centroid_;
  double min_gap_ = 0.0;
  double spread_ = 1.0;
};

// ---------------------------------------------------------------------------
// The trigonal curve y^3 = f(x) = (x-b1)(x-b2)(x-b3)(x-b4) of genus 3.

class CurveSpec {
 public:
  explicit CurveSpec(std::array<cplx, 4> branch)
      : cover_(3, {branch[0], branch[1], branch[2], branch[3]}), b_(branch) {
    const Poly& f = cover_.f();
    for (int k = 0; k < 5; ++k) lambda_[k] = f[k];
    for (int a = 0; a < 4; ++a) {
      cplx prod(1.0);
      for (int i = 0; i < 4; ++i)
        if (i != a) prod *= b_[a] - b_[i];
      fprime_at_b_[a] = prod;
      cplx pd = cover_.f_derivative().eval(b_[a]);
      if (std::abs(pd - prod) > 1e-12 * std::abs(prod))
        throw NumericError("curve setup: f'(b_a) mismatch");
      C_[a] = principal_cbrt(prod);
    }
  }

  const CyclicCover& cover() const { return cover_; }
  const std::array<cplx, 4>& branch_points() const { return b_; }
  cplx branch_point(int a) const { return b_[a]; }
  cplx lambda(int k) const { return lambda_[k]; }
  cplx fprime_at(int a) const { return fprime_at_b_[a]; }
  cplx C(int a) const { return C_[a]; }
  cplx f_eval(cplx x) const { return cover_.f_eval(x); }
  double spread() const { return cover_.spread(); }
  cplx centroid() const { return cover_.centroid(); }

  std::vector<SurfacePoint> sheets_above(cplx x) const { return cover_.sheets_above(x); }
  SurfacePoint point_above(cplx x, int sheet) const { return cover_.point_above(x, sheet); }

  // Densities of the first-kind basis (nu1, nu2, nu3) relative to dx:
  // (1/3y^2, x/3y^2, 1/3y).
  std::array<cplx, 3> holo_forms(const SurfacePoint& p) const {
    if (p.y == cplx(0.0)) throw BranchPointInput("holo_forms: y = 0");
    cplx y2 = p.y * p.y;
    return {1.0 / (3.0 * y2), p.x / (3.0 * y2), 1.0 / (3.0 * p.y)};
  }

  // Densities of the second-kind basis relative to dx:
  // (x^2/3y^2, 2xy/3y^2, (5x^2+3*l3*x+l2) y/3y^2).
  std::array<cplx, 3> second_kind_forms(const SurfacePoint& p) const {
    if (p.y == cplx(0.0)) throw BranchPointInput("second_kind_forms: y = 0");
    cplx y2 = p.y * p.y;
    cplx q = 5.0 * p.x * p.x + 3.0 * lambda_[3] * p.x + lambda_[2];
    return {p.x * p.x / (3.0 * y2), 2.0 * p.x / (3.0 * p.y), q / (3.0 * p.y)};
  }

 private:
  CyclicCover cover_;
  std::array<cplx, 4> b_;
  std::array<cplx, 5> lambda_;
  std::array<cplx, 4> fprime_at_b_;
  std::array<cplx, 4> C_;
};

// ---------------------------------------------------------------------------
// Monomial ladder phi_i: the monomials x^a y^b (b < 3) ordered by increasing
// pole order 3a+4b at infinity: 1, x, y, x^2, xy, y^2, x^3, ...

struct PhiMonomial {
  int xpow;
  int ypow;
  int pole_order;
};

inline const PhiMonomial& phi_exponents(int i) {
  static std::vector<PhiMonomial> tab = [] {
    std::vector<PhiMonomial> v;
    for (int a = 0; a <= 40; ++a)
      for (int b = 0; b < 3; ++b)
        v.push_back({a, b, 3 * a + 4 * b});
    std::sort(v.begin(), v.end(),
              [](const PhiMonomial& p, const PhiMonomial& q) {
                return p.pole_order < q.pole_order;
              });
    return v;
  }();
  if (i < 0 || i >= static_cast<int>(tab.size()))
    throw InputError("phi_monomial index out of range");
  return tab[i];
}

inline cplx phi_monomial(int i, const SurfacePoint& p) {
  const PhiMonomial& m = phi_exponents(i);
  cplx v(1.0);
  for (int k = 0; k < m.xpow; ++k) v *= p.x;
  for (int k = 0; k < m.ypow; ++k) v *= p.y;
  return v;
}

inline int phi_pole_order(int i) { return phi_exponents(i).pole_order; }

}  // namespace trigal
