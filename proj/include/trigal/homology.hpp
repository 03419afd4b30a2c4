#pragma once

#include <cstdint>

#include "trigal/quadrature.hpp"

namespace trigal {

// A candidate cycle: travel from a ring point of one branch point to a ring
// point of another on a fixed start sheet, loop the far branch point once
// counterclockwise, travel back on the shifted sheet, and close with a
// clockwise loop around the near branch point.
struct CycleCandidate {
  int near_idx = 0;
  int far_idx = 0;
  int sheet = 0;
  PathPlan plan;
  TracedPath traced;
};

namespace detail {

inline double jitter(int idx, double lo, double hi) {
  double f = idx * 0.6180339887498949;
  f -= std::floor(f);
  return lo + (hi - lo) * f;
}

}  // namespace detail

inline CycleCandidate make_cycle_candidate(const CyclicCover& cov, int a, int b,
                                           int sheet, int idx) {
  const auto& bp = cov.branch_points();
  double gap_a = std::numeric_limits<double>::infinity();
  double gap_b = gap_a;
  for (std::size_t k = 0; k < bp.size(); ++k) {
    if (int(k) != a) gap_a = std::min(gap_a, std::abs(bp[a] - bp[k]));
    if (int(k) != b) gap_b = std::min(gap_b, std::abs(bp[b] - bp[k]));
  }
  double ra = gap_a * detail::jitter(3 * idx + 1, 0.13, 0.21);
  double rb = gap_b * detail::jitter(5 * idx + 2, 0.13, 0.21);
  cplx u = (bp[b] - bp[a]) / std::abs(bp[b] - bp[a]);
  cplx p = bp[a] + ra * u;
  cplx q = bp[b] - rb * u;

  std::vector<cplx> obstacles = bp;
  double clear = 0.32 * cov.min_gap();
  // deterministic lateral waypoint so that no two candidates overlap exactly
  cplx mid = 0.5 * (p + q);
  double off = cov.min_gap() * (0.04 + 0.05 * detail::jitter(7 * idx + 3, 0.0, 1.0));
  if (idx % 2) off = -off;
  cplx w = mid + off * u * I;

  PathPlan connector = avoiding_path(p, w, obstacles, clear);
  connector.append(avoiding_path(w, q, obstacles, clear));

  CycleCandidate cand;
  cand.near_idx = a;
  cand.far_idx = b;
  cand.sheet = sheet;
  cand.plan = connector;
  cand.plan.append(PathPlan::loop(bp[b], rb, std::arg(q - bp[b]), 1));
  cand.plan.append(connector.reversed());
  cand.plan.append(PathPlan::loop(bp[a], ra, std::arg(p - bp[a]), -1));

  cplx y0 = cov.sheets_above(p)[sheet].y;
  cand.traced = continue_along(cov, cand.plan, y0);
  if (std::abs(cand.traced.y_end() - y0) > 1e-8 * std::max(1.0, std::abs(y0)))
    throw BasisConstructionFailure("cycle candidate does not close on the surface");
  return cand;
}

inline std::vector<CycleCandidate> make_cycle_candidates(const CyclicCover& cov) {
  std::vector<CycleCandidate> out;
  const int nb = static_cast<int>(cov.branch_points().size());
  int idx = 0;
  for (int a = 0; a < nb; ++a)
    for (int b = a + 1; b < nb; ++b)
      for (int s = 0; s + 1 < cov.sheets(); ++s)
        out.push_back(make_cycle_candidate(cov, a, b, s, idx++));
  return out;
}

// ---------------------------------------------------------------------------
// Intersection numbers by oriented crossing counts of the traced polylines,
// with sheet agreement decided by snapping interpolated y to the fiber.

namespace detail {

struct Seg {
  cplx a, b;
  cplx ya, yb;
};

inline std::vector<Seg> to_segments(const TracedPath& tp) {
  std::vector<Seg> s;
  s.reserve(tp.xs.size());
  for (std::size_t k = 0; k + 1 < tp.xs.size(); ++k) {
    if (std::abs(tp.xs[k + 1] - tp.xs[k]) == 0.0) continue;
    s.push_back({tp.xs[k], tp.xs[k + 1], tp.ys[k], tp.ys[k + 1]});
  }
  return s;
}

inline double cross2(cplx u, cplx v) { return u.real() * v.imag() - u.imag() * v.real(); }

}  // namespace detail

inline int intersection_number(const CyclicCover& cov, const CycleCandidate& c1,
                               const CycleCandidate& c2) {
  auto s1 = detail::to_segments(c1.traced);
  auto s2 = detail::to_segments(c2.traced);

  // spatial hash over segment bounding boxes
  double cell = std::max(0.25 * cov.min_gap(), 1e-9);
  auto key = [cell](double x, double y) {
    return std::pair<long, long>(long(std::floor(x / cell)), long(std::floor(y / cell)));
  };
  std::map<std::pair<long, long>, std::vector<int>> grid;
  for (int i = 0; i < int(s2.size()); ++i) {
    double x0 = std::min(s2[i].a.real(), s2[i].b.real());
    double x1 = std::max(s2[i].a.real(), s2[i].b.real());
    double y0 = std::min(s2[i].a.imag(), s2[i].b.imag());
    double y1 = std::max(s2[i].a.imag(), s2[i].b.imag());
    auto k0 = key(x0, y0), k1 = key(x1, y1);
    for (long kx = k0.first; kx <= k1.first; ++kx)
      for (long ky = k0.second; ky <= k1.second; ++ky)
        grid[{kx, ky}].push_back(i);
  }

  int total = 0;
  std::vector<char> seen(s2.size(), 0);
  for (const auto& u : s1) {
    double x0 = std::min(u.a.real(), u.b.real());
    double x1 = std::max(u.a.real(), u.b.real());
    double y0 = std::min(u.a.imag(), u.b.imag());
    double y1 = std::max(u.a.imag(), u.b.imag());
    auto k0 = key(x0, y0), k1 = key(x1, y1);
    std::vector<int> touched;
    for (long kx = k0.first; kx <= k1.first; ++kx)
      for (long ky = k0.second; ky <= k1.second; ++ky) {
        auto it = grid.find({kx, ky});
        if (it == grid.end()) continue;
        for (int j : it->second) {
          if (seen[j]) continue;
          seen[j] = 1;
          touched.push_back(j);
        }
      }
    cplx du = u.b - u.a;
    for (int j : touched) {
      const auto& v = s2[j];
      cplx dv = v.b - v.a;
      double den = detail::cross2(du, dv);
      cplx w = v.a - u.a;
      double t = detail::cross2(w, dv);
      double s = detail::cross2(w, du);
      if (den == 0.0) continue;
      t /= den;
      s /= den;
      // half-open on both segments so shared vertices are not double counted
      if (t < 0.0 || t >= 1.0 || s < 0.0 || s >= 1.0) continue;
      cplx xstar = u.a + t * du;
      if (cov.near_branch_value(xstar))
        throw BasisConstructionFailure("cycle crossing too close to a branch point");
      cplx y1v = nearest_root(cov.f_eval(xstar), cov.sheets(), u.ya + t * (u.yb - u.ya));
      cplx y2v = nearest_root(cov.f_eval(xstar), cov.sheets(), v.ya + s * (v.yb - v.ya));
      if (std::abs(y1v - y2v) > 1e-6 * (std::abs(y1v) + std::abs(y2v))) continue;
      total += den > 0.0 ? 1 : -1;
    }
    for (int j : touched) seen[j] = 0;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Exact integer symplectic reduction of a skew form.  Returns the change of
// basis U (rows are integer combinations of candidates) and the multipliers.

struct SymplecticBasis {
  std::vector<std::vector<std::int64_t>> rows;  // 2g rows in candidate coords
  std::vector<std::int64_t> multipliers;        // d_1 | d_2 | ... (expect all 1)
};

inline SymplecticBasis symplectic_reduce(std::vector<std::vector<std::int64_t>> S,
                                         int genus) {
  const int k = static_cast<int>(S.size());
  std::vector<std::vector<std::int64_t>> U(k, std::vector<std::int64_t>(k, 0));
  for (int i = 0; i < k; ++i) U[i][i] = 1;

  auto swap_rows = [&](int i, int j) {
    if (i == j) return;
    std::swap(U[i], U[j]);
    std::swap(S[i], S[j]);
    for (int r = 0; r < k; ++r) std::swap(S[r][i], S[r][j]);
  };
  auto add_row = [&](int i, int j, std::int64_t c) {
    // u_i <- u_i + c u_j
    if (c == 0) return;
    for (int r = 0; r < k; ++r) U[i][r] += c * U[j][r];
    for (int r = 0; r < k; ++r) S[i][r] += c * S[j][r];
    for (int r = 0; r < k; ++r) S[r][i] += c * S[r][j];
  };
  auto negate_row = [&](int i) {
    for (int r = 0; r < k; ++r) U[i][r] = -U[i][r];
    for (int r = 0; r < k; ++r) S[i][r] = -S[i][r];
    for (int r = 0; r < k; ++r) S[r][i] = -S[r][i];
  };

  std::vector<std::int64_t> ds;
  int t = 0;
  while (t + 1 < k) {
    // pivot: minimal nonzero |S[p][q]| in the remaining block
    int bp = -1, bq = -1;
    std::int64_t bv = 0;
    for (int p = t; p < k; ++p)
      for (int q = t; q < k; ++q) {
        std::int64_t v = std::abs(S[p][q]);
        if (v != 0 && (bp < 0 || v < bv)) { bp = p; bq = q; bv = v; }
      }
    if (bp < 0) break;  // remaining block is zero
    swap_rows(bp, t);
    swap_rows(bq == t ? bp : bq, t + 1);
    if (S[t][t + 1] < 0) negate_row(t + 1);

    for (int guard = 0; guard < 256; ++guard) {
      std::int64_t d = S[t][t + 1];
      bool clean = true;
      for (int r = t + 2; r < k; ++r) {
        // kill <u_t, u_r> with u_{t+1}:  <u_t, u_r + c u_{t+1}> = S[t][r] + c d
        std::int64_t c = -std::llround(double(S[t][r]) / double(d));
        add_row(r, t + 1, c);
        // kill <u_{t+1}, u_r> with u_t:  <u_{t+1}, u_r + c u_t> = S[t+1][r] - c d
        c = std::llround(double(S[t + 1][r]) / double(d));
        add_row(r, t, c);
        if (S[t][r] != 0 || S[t + 1][r] != 0) clean = false;
      }
      if (clean) break;
      // a nonzero remainder smaller than d exists; re-pivot inside the block
      int pp = -1, qq = -1;
      std::int64_t vv = 0;
      for (int p = t; p < k; ++p)
        for (int q = t; q < k; ++q) {
          std::int64_t v = std::abs(S[p][q]);
          if (v != 0 && (pp < 0 || v < vv)) { pp = p; qq = q; vv = v; }
        }
      swap_rows(pp, t);
      swap_rows(qq == t ? pp : qq, t + 1);
      if (S[t][t + 1] < 0) negate_row(t + 1);
      if (guard == 255)
        throw BasisConstructionFailure("symplectic reduction did not terminate");
    }
    ds.push_back(S[t][t + 1]);
    t += 2;
  }

  if (static_cast<int>(ds.size()) < genus)
    throw BasisConstructionFailure("candidate cycles span rank < 2g");
  for (int i = 0; i < genus; ++i)
    if (ds[i] != 1)
      throw BasisConstructionFailure(
          "candidate cycles generate a proper sublattice of H_1 (multiplier != 1)");

  SymplecticBasis out;
  out.multipliers.assign(ds.begin(), ds.begin() + genus);
  for (int i = 0; i < 2 * genus; ++i) out.rows.push_back(U[i]);
  return out;
}

}  // namespace trigal
