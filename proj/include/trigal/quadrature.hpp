#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>

#include "trigal/path.hpp"

namespace trigal {

// Gauss-Legendre nodes/weights on [-1,1], computed once per order by Newton
// iteration on the Legendre recurrence.
inline const std::pair<std::vector<double>, std::vector<double>>&
gauss_legendre(int n) {
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    double xi = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = xi;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
      double dx = p1 / dp;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = xi;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
    x[i] = xi;
    w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
  }
  auto res = cache.emplace(n, std::make_pair(std::move(x), std::move(w)));
  return res.first->second;
}

// A parametrized curve on [0,1] with an optional multiplicative guide for the
// y-tracking between consecutive nodes (used by the local-chart legs where y
// vanishes or blows up at an endpoint).  Charts that lose precision in the
// defining equation may supply y_eval to produce y directly from s.
struct ParamCurve {
  std::function<cplx(double)> x;
  std::function<cplx(double)> dx;
  std::function<cplx(double, double)> guide;    // factor y_prev -> guess at s_cur
  std::function<cplx(double, cplx)> y_eval;     // (s, guess) -> y on the curve

  static ParamCurve of_primitive(const PathPrimitive& p) {
    ParamCurve pc;
    pc.x = [p](double s) { return prim_at(p, s); };
    pc.dx = [p](double s) { return prim_deriv(p, s); };
    return pc;
  }
};

using DensityFn = std::function<Eigen::VectorXcd(cplx x, cplx y)>;

namespace detail {

struct PanelResult {
  Eigen::VectorXcd value;
  cplx y_end;
  bool ok;
};

inline PanelResult quad_walk(const CyclicCover& cov, const ParamCurve& pc, cplx y0,
                             const DensityFn& density, int dim, int panels, int order) {
  const auto& [gx, gw] = gauss_legendre(order);
  const int N = cov.sheets();
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(dim);
  cplx y_prev = y0;
  double s_prev = 0.0;
  for (int p = 0; p < panels; ++p) {
    double a = double(p) / panels, b = double(p + 1) / panels;
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int k = 0; k < order; ++k) {
      double s = mid + half * gx[k];
      cplx xv = pc.x(s);
      cplx guess = y_prev;
      if (pc.guide) guess *= pc.guide(s_prev, s);
      cplx yv = pc.y_eval ? pc.y_eval(s, guess) : nearest_root(cov.f_eval(xv), N, guess);
      if (std::abs(yv - guess) > 0.6 * std::max(std::abs(guess), 1e-300))
        return {acc, y_prev, false};
      acc += (gw[k] * half) * density(xv, yv) * pc.dx(s);
      y_prev = yv;
      s_prev = s;
    }
  }
  // land exactly on s=1 for the continuation hand-off; charts may end on a
  // singular point, so the guide is used only when it stays finite
  cplx x1 = pc.x(1.0);
  cplx guess = y_prev;
  if (pc.guide) {
    cplx g = pc.guide(s_prev, 1.0);
    if (std::isfinite(std::abs(g))) guess *= g;
  }
  cplx y1 = pc.y_eval ? pc.y_eval(1.0, guess) : nearest_root(cov.f_eval(x1), N, guess);
  return {acc, y1, true};
}

}  // namespace detail

// Integrate density(x,y) dx along the parametrized curve with y continued from
// y0 at s=0.  Panels double until the result moves by less than tol.
inline Eigen::VectorXcd integrate_continued(const CyclicCover& cov, const ParamCurve& pc,
                                            cplx y0, const DensityFn& density, int dim,
                                            double tol, cplx* y_end = nullptr,
                                            int panels0 = 4) {
  const int order = 12;
  int panels = std::max(1, panels0);
  detail::PanelResult prev{Eigen::VectorXcd::Zero(dim), y0, false};
  bool have_prev = false;
  for (int round = 0; round < 13; ++round) {
    detail::PanelResult cur = detail::quad_walk(cov, pc, y0, density, dim, panels, order);
    if (cur.ok && have_prev) {
      double diff = (cur.value - prev.value).cwiseAbs().maxCoeff();
      double scale = std::max(1.0, cur.value.cwiseAbs().maxCoeff());
      if (diff <= tol * scale) {
        if (y_end) *y_end = cur.y_end;
        return cur.value;
      }
    }
    if (cur.ok) {
      prev = cur;
      have_prev = true;
    }
    panels *= 2;
  }
  throw QuadratureStall("quadrature: panel doubling failed to converge");
}

// The final approach to a branch point, parametrized in the local chart
// t^N = x - b_a as x(s) = b_a + ((1-s) delta)^N.  y is produced through the
// local factorization y = t * (prod_{c != a}(x - b_c))^(1/N), which stays
// fully accurate as t -> 0.
inline ParamCurve branch_chart_leg(const CyclicCover& cov, int a, cplx x_near) {
  const int N = cov.sheets();
  cplx ba = cov.branch_points()[a];
  cplx delta = principal_root(x_near - ba, N);
  auto tpow = [N](cplx t) {
    cplx v(1.0);
    for (int k = 0; k < N; ++k) v *= t;
    return v;
  };
  ParamCurve leg;
  leg.x = [ba, delta, tpow](double s) { return ba + tpow((1.0 - s) * delta); };
  leg.dx = [delta, tpow, N](double s) {
    double S = 1.0 - s;
    return -double(N) * tpow(delta) * std::pow(S, N - 1);
  };
  leg.guide = [](double sp, double sc) { return cplx((1.0 - sc) / (1.0 - sp)); };
  leg.y_eval = [bp = cov.branch_points(), a, ba, delta, tpow, N](double s, cplx guess) {
    cplx t = (1.0 - s) * delta;
    if (std::abs(t) == 0.0) return cplx(0.0);
    cplx x = ba + tpow(t);
    cplx g(1.0);
    for (int c = 0; c < static_cast<int>(bp.size()); ++c)
      if (c != a) g *= x - bp[c];
    return t * nearest_root(g, N, guess / t);
  };
  return leg;
}

// Integrate along a PathPlan with y continued across primitives.
inline Eigen::VectorXcd integrate_over_plan(const CyclicCover& cov, const PathPlan& plan,
                                            cplx y0, const DensityFn& density, int dim,
                                            double tol, cplx* y_end = nullptr) {
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(dim);
  cplx y = y0;
  for (const PathPrimitive& prim : plan.prims) {
    double ext = prim_extent(prim);
    int p0 = 2;
    if (const ArcSeg* arc = std::get_if<ArcSeg>(&prim))
      p0 = std::max(2, int(std::ceil(std::abs(arc->th1 - arc->th0) / 0.7)));
    else
      p0 = std::max(2, int(std::ceil(2.0 * ext / std::max(cov.min_gap(), 1e-12))));
    p0 = std::min(p0, 64);
    cplx y_next;
    acc += integrate_continued(cov, ParamCurve::of_primitive(prim), y, density, dim, tol,
                               &y_next, p0);
    y = y_next;
  }
  if (y_end) *y_end = y;
  return acc;
}

}  // namespace trigal
