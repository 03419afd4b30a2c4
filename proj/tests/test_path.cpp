#include <catch2/catch_amalgamated.hpp>

#include "trigal/path.hpp"

using namespace trigal;

static CurveSpec demo_curve() {
  return CurveSpec({cplx(0.0), cplx(1.0), cplx(2.0), cplx(3.0)});
}

TEST_CASE("closed loop around a regular point is trivial") {
  CurveSpec c = demo_curve();
  cplx x0(0.5, 1.0);
  cplx y0 = c.sheets_above(x0)[0].y;
  PathPlan loop = PathPlan::loop(x0 + cplx(0.05), 0.05, 0.0, 1);
  cplx ystart = c.sheets_above(loop.start())[0].y;
  TracedPath tp = continue_along(c.cover(), loop, ystart);
  CHECK(std::abs(tp.y_end() - tp.y_start()) < 1e-9 * std::abs(tp.y_start()));
  for (int a = 0; a < 4; ++a) CHECK(tp.winding(a) == 0);
  (void)y0;
}

TEST_CASE("monodromy around one branch point") {
  CurveSpec c = demo_curve();
  int a = 1;  // b = 1
  cplx center = c.branch_point(a);
  PathPlan loop = PathPlan::loop(center, 0.1, 0.0, 1);
  cplx ystart = c.sheets_above(loop.start())[0].y;
  TracedPath tp = continue_along(c.cover(), loop, ystart);
  CHECK(std::abs(tp.y_end() - zeta3 * ystart) < 1e-9 * std::abs(ystart));
  CHECK(tp.winding(a) == 1);
  // t_a phase multiplied by zeta3
  cplx t0 = tp.t_branch[a].front();
  CHECK(std::abs(tp.t_end(a) - zeta3 * t0) < 1e-9 * std::abs(t0));
  // other branch roots unchanged
  for (int b = 0; b < 4; ++b) {
    if (b == a) continue;
    CHECK(tp.winding(b) == 0);
    CHECK(std::abs(tp.t_end(b) - tp.t_branch[b].front()) <
          1e-9 * std::abs(tp.t_branch[b].front()));
  }
}

TEST_CASE("triple traversal restores the sheet") {
  CurveSpec c = demo_curve();
  PathPlan loop = PathPlan::loop(c.branch_point(2), 0.15, pi / 3.0, 3);
  cplx ystart = c.sheets_above(loop.start())[1].y;
  TracedPath tp = continue_along(c.cover(), loop, ystart);
  CHECK(std::abs(tp.y_end() - ystart) < 1e-8 * std::abs(ystart));
  CHECK(tp.winding(2) == 3);
}

TEST_CASE("large circle around all branch points acts like one turn") {
  CurveSpec c = demo_curve();
  // winding around every finite branch point once multiplies y by zeta3^4 = zeta3
  PathPlan loop = PathPlan::loop(c.centroid(), 12.0, 0.0, 1);
  cplx ystart = c.sheets_above(loop.start())[0].y;
  TracedPath tp = continue_along(c.cover(), loop, ystart);
  CHECK(std::abs(tp.y_end() - zeta3 * ystart) < 1e-8 * std::abs(ystart));
  for (int a = 0; a < 4; ++a) CHECK(tp.winding(a) == 1);
  CHECK(tp.winding_infinity() == -1);
}

TEST_CASE("every traced sample stays on the curve") {
  CurveSpec c = demo_curve();
  PathPlan plan = avoiding_path(cplx(-2.0, 0.3), cplx(4.0, -0.2),
                                {cplx(0.0), cplx(1.0), cplx(2.0), cplx(3.0)}, 0.3);
  cplx ystart = c.sheets_above(plan.start())[2].y;
  TracedPath tp = continue_along(c.cover(), plan, ystart);
  for (std::size_t k = 0; k < tp.xs.size(); ++k) {
    cplx y = tp.ys[k];
    cplx fx = c.f_eval(tp.xs[k]);
    CHECK(std::abs(y * y * y - fx) <= 1e-9 * (1.0 + std::abs(fx)));
    for (int a = 0; a < 4; ++a) {
      cplx t = tp.t_branch[a][k];
      cplx target = tp.xs[k] - c.branch_point(a);
      CHECK(std::abs(t * t * t - target) <= 1e-9 * (1.0 + std::abs(target)));
    }
  }
}

TEST_CASE("avoiding path respects clearance") {
  std::vector<cplx> obstacles{cplx(0.0), cplx(1.0), cplx(2.0), cplx(3.0)};
  // straight line through all four obstacles
  PathPlan plan = avoiding_path(cplx(-1.0, 0.0), cplx(4.0, 0.0), obstacles, 0.25);
  for (const auto& prim : plan.prims) {
    for (int k = 0; k <= 50; ++k) {
      cplx x = prim_at(prim, k / 50.0);
      for (cplx o : obstacles) CHECK(std::abs(x - o) > 0.24);
    }
  }
  CHECK(std::abs(plan.start() - cplx(-1.0)) < 1e-12);
  CHECK(std::abs(plan.end() - cplx(4.0)) < 1e-12);
}

TEST_CASE("continuation fails cleanly on a branch point") {
  CurveSpec c = demo_curve();
  // path starting exactly at a branch point must throw
  PathPlan plan = PathPlan::line(cplx(1.0, 0.0), cplx(1.0, 0.5));
  CHECK_THROWS_AS(continue_along(c.cover(), plan, c.sheets_above(plan.start())[0].y),
                  Error);
}
