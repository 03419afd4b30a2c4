#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "trigal/curve.hpp"

namespace trigal {

// ---------------------------------------------------------------------------
// Path plans: piecewise-linear segments plus circular arcs in the x-plane.

struct LineSeg {
  cplx a, b;
  cplx at(double t) const { return a + t * (b - a); }
  cplx deriv(double) const { return b - a; }
  double extent() const { return std::abs(b - a); }
};

struct ArcSeg {
  cplx center;
  double radius;
  double th0, th1;  // th1 > th0 is counterclockwise
  cplx at(double t) const {
    return center + std::polar(radius, th0 + t * (th1 - th0));
  }
  cplx deriv(double t) const {
    return std::polar(radius, th0 + t * (th1 - th0)) * I * (th1 - th0);
  }
  double extent() const { return radius * std::abs(th1 - th0); }
};

using PathPrimitive = std::variant<LineSeg, ArcSeg>;

inline cplx prim_at(const PathPrimitive& p, double t) {
  return std::visit([t](const auto& s) { return s.at(t); }, p);
}
inline cplx prim_deriv(const PathPrimitive& p, double t) {
  return std::visit([t](const auto& s) { return s.deriv(t); }, p);
}
inline double prim_extent(const PathPrimitive& p) {
  return std::visit([](const auto& s) { return s.extent(); }, p);
}

struct PathPlan {
  std::vector<PathPrimitive> prims;

  cplx start() const { return prim_at(prims.front(), 0.0); }
  cplx end() const { return prim_at(prims.back(), 1.0); }

  PathPlan& append(const PathPlan& o) {
    prims.insert(prims.end(), o.prims.begin(), o.prims.end());
    return *this;
  }

  PathPlan reversed() const {
    PathPlan r;
    for (auto it = prims.rbegin(); it != prims.rend(); ++it) {
      if (const LineSeg* l = std::get_if<LineSeg>(&*it))
        r.prims.push_back(LineSeg{l->b, l->a});
      else {
        const ArcSeg& a = std::get<ArcSeg>(*it);
        r.prims.push_back(ArcSeg{a.center, a.radius, a.th1, a.th0});
      }
    }
    return r;
  }

  static PathPlan line(cplx a, cplx b) { return PathPlan{{LineSeg{a, b}}}; }

  // turns > 0: counterclockwise loops starting at angle th0.
  static PathPlan loop(cplx center, double radius, double th0, int turns) {
    PathPlan p;
    int n = std::abs(turns);
    double dir = turns >= 0 ? 1.0 : -1.0;
    for (int k = 0; k < n; ++k) {
      double u0 = th0 + dir * 2.0 * pi * k;
      // split each turn in two arcs to keep primitives short
      p.prims.push_back(ArcSeg{center, radius, u0, u0 + dir * pi});
      p.prims.push_back(ArcSeg{center, radius, u0 + dir * pi, u0 + dir * 2.0 * pi});
    }
    return p;
  }
};

// Straight path from `from` to `to` with arc detours around any obstacle
// closer than `clearance` to the segment.  Obstacles within clearance of an
// endpoint are skipped (endpoints sit on rings around branch points).
inline void build_avoiding(cplx from, cplx to, const std::vector<cplx>& obstacles,
                           double clearance, PathPlan& out, int depth = 0) {
  if (depth > 16) throw ContinuationFailure("avoiding_path: detour recursion too deep");
  cplx d = to - from;
  double len = std::abs(d);
  if (len < 1e-15) return;
  cplx u = d / len;
  // nearest interfering obstacle along the segment
  int best = -1;
  double best_s = 0.0, best_perp = 0.0;
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    cplx o = obstacles[i];
    if (std::abs(o - from) < clearance * 1.0001 || std::abs(o - to) < clearance * 1.0001)
      continue;
    double s = ((o - from) / u).real();
    if (s <= 0.0 || s >= len) continue;
    double perp = std::abs(o - (from + s * u));
    if (perp < clearance * 0.999) {
      if (best < 0 || s < best_s) { best = int(i); best_s = s; best_perp = perp; }
    }
  }
  if (best < 0) {
    out.prims.push_back(LineSeg{from, to});
    return;
  }
  cplx o = obstacles[best];
  double half = std::sqrt(std::max(clearance * clearance - best_perp * best_perp, 0.0));
  cplx e1 = from + (best_s - half) * u;
  cplx e2 = from + (best_s + half) * u;
  double th1 = std::arg(e1 - o);
  double th2 = std::arg(e2 - o);
  double dth = wrap_angle(th2 - th1);
  if (dth == 0.0) dth = pi;  // segment through the center: detour ccw
  build_avoiding(from, e1, obstacles, clearance, out, depth + 1);
  out.prims.push_back(ArcSeg{o, clearance, th1, th1 + dth});
  build_avoiding(e2, to, obstacles, clearance, out, depth + 1);
}

inline PathPlan avoiding_path(cplx from, cplx to, const std::vector<cplx>& obstacles,
                              double clearance) {
  PathPlan p;
  build_avoiding(from, to, obstacles, clearance, p);
  if (p.prims.empty()) p.prims.push_back(LineSeg{from, to});
  return p;
}

// Leave a ring around `center` by the shorter arc until facing `target`,
// so the departure never cuts across the ringed point.
inline PathPlan ring_exit(cplx center, double radius, cplx from_on_ring, cplx target,
                          cplx* exit_point) {
  double th0 = std::arg(from_on_ring - center);
  double th1 = th0 + wrap_angle(std::arg(target - center) - th0);
  PathPlan p;
  if (th1 != th0) p.prims.push_back(ArcSeg{center, radius, th0, th1});
  *exit_point = center + std::polar(radius, th1);
  return p;
}

// ---------------------------------------------------------------------------
// Analytic continuation of y (and of every branch root t_a) along a plan.

struct TracedPath {
  std::vector<cplx> xs;
  std::vector<cplx> ys;
  std::vector<std::vector<cplx>> t_branch;  // t_branch[a][k]: continued (x-b_a)^(1/N)
  std::vector<double> arg_branch;           // accumulated arg(x - b_a)
  double arg_center = 0.0;                  // accumulated arg(x - centroid)

  cplx y_start() const { return ys.front(); }
  cplx y_end() const { return ys.back(); }
  cplx t_end(int a) const { return t_branch[a].back(); }

  // Counter semantics: nearest multiple of 2*pi of the accumulated argument.
  // Exact closed loops land on the integer, and appending one loop always
  // advances the counter by one, also on open paths.
  static int turns(double accum) { return int(std::lround(accum / (2.0 * pi))); }
  int winding(int a) const { return turns(arg_branch[a]); }
  int winding_infinity() const { return -turns(arg_center); }
};

namespace detail {

struct ContState {
  cplx x;
  cplx y;
  std::vector<cplx> t;
  std::vector<double> arg;
  double argc;
};

inline void cont_step(const CyclicCover& cov, ContState& s, cplx x_new, int depth) {
  if (depth > 40) throw ContinuationFailure("continuation: refinement depth exceeded");
  const auto& b = cov.branch_points();
  const int N = cov.sheets();
  bool ok = true;
  // ratio guards: every branch-centred ratio must stay in the safe wedge
  std::vector<cplx> ratio(b.size());
  for (std::size_t a = 0; a < b.size(); ++a) {
    cplx den = s.x - b[a];
    if (std::abs(den) == 0.0) throw ContinuationFailure("continuation: on a branch point");
    ratio[a] = (x_new - b[a]) / den;
    if (!(ratio[a].real() > 0.0) || std::abs(ratio[a]) < 0.25 || std::abs(ratio[a]) > 4.0)
      ok = false;
  }
  cplx y_new(0.0);
  if (ok) {
    y_new = nearest_root(cov.f_eval(x_new), N, s.y);
    double ymag = std::abs(s.y);
    if (std::abs(y_new - s.y) > 0.5 * std::max(ymag, 1e-300)) ok = false;
    // spec step control: bisect until the relative jump is below 0.1
    if (ok && std::abs(y_new - s.y) > 0.1 * std::max(ymag, 1e-12 * cov.spread())) ok = false;
  }
  if (!ok) {
    cplx xm = 0.5 * (s.x + x_new);
    cont_step(cov, s, xm, depth + 1);
    cont_step(cov, s, x_new, depth + 1);
    return;
  }
  for (std::size_t a = 0; a < b.size(); ++a) {
    s.arg[a] += std::arg(ratio[a]);
    s.t[a] = nearest_root(x_new - b[a], N, s.t[a]);
  }
  s.argc += std::arg((x_new - cov.centroid()) / (s.x - cov.centroid()));
  s.x = x_new;
  s.y = y_new;
}

}  // namespace detail

// Continue y and all t_a along the plan, starting from y0 over plan.start().
// y0 must satisfy the curve equation at the start point; t_a start principal.
inline TracedPath continue_along(const CyclicCover& cov, const PathPlan& plan, cplx y0,
                                 std::optional<std::vector<cplx>> t0 = std::nullopt) {
  const auto& b = cov.branch_points();
  const int N = cov.sheets();
  detail::ContState s;
  s.x = plan.start();
  s.y = y0;
  s.arg.assign(b.size(), 0.0);
  s.argc = 0.0;
  if (t0) {
    s.t = *t0;
  } else {
    s.t.resize(b.size());
    for (std::size_t a = 0; a < b.size(); ++a) s.t[a] = principal_root(s.x - b[a], N);
  }
  {
    cplx yN(1.0);
    for (int k = 0; k < N; ++k) yN *= y0;
    cplx fx = cov.f_eval(s.x);
    if (std::abs(yN - fx) > 1e-8 * (1.0 + std::abs(fx)))
      throw InputError("continue_along: start point not on the curve");
  }

  TracedPath tp;
  tp.t_branch.resize(b.size());
  auto record = [&] {
    tp.xs.push_back(s.x);
    tp.ys.push_back(s.y);
    for (std::size_t a = 0; a < b.size(); ++a) tp.t_branch[a].push_back(s.t[a]);
  };
  record();
  for (const PathPrimitive& prim : plan.prims) {
    double ext = prim_extent(prim);
    double ref = std::max(cov.min_gap(), 1e-6 * cov.spread());
    int steps = std::max(4, static_cast<int>(std::ceil(4.0 * ext / ref)));
    steps = std::min(steps, 4096);
    for (int k = 1; k <= steps; ++k) {
      detail::cont_step(cov, s, prim_at(prim, double(k) / steps), 0);
      record();
    }
  }
  tp.arg_branch = s.arg;
  tp.arg_center = s.argc;
  return tp;
}

}  // namespace trigal
