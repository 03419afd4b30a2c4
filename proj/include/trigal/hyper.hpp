#pragma once

#include <memory>

#include "trigal/homology.hpp"
#include "trigal/theta.hpp"

namespace trigal {

// Hyperelliptic calibration curves y^2 = prod_{i=0}^{2g} (x - b_i), genus 1
// or 2, with the factor split P(x) = prod over odd indices and Q = f / P.
class HyperCurveSpec {
 public:
  HyperCurveSpec(int genus, std::vector<cplx> branch)
      : g_(genus), cover_(2, std::move(branch)) {
    if (g_ < 1 || g_ > 2) throw InputError("hyper: genus must be 1 or 2");
    if (static_cast<int>(cover_.branch_points().size()) != 2 * g_ + 1)
      throw InputError("hyper: need 2g+1 branch points");
    std::vector<cplx> podd, peven;
    for (int i = 0; i < 2 * g_ + 1; ++i)
      (i % 2 ? podd : peven).push_back(cover_.branch_points()[i]);
    P_ = Poly::from_roots(podd);
    Q_ = Poly::from_roots(peven);
    // coefficient-wise consistency of the factor split
    Poly prod = P_ * Q_;
    for (int k = 0; k <= 2 * g_ + 1; ++k)
      if (std::abs(prod[k] - cover_.f()[k]) > 1e-12 * (1.0 + std::abs(cover_.f()[k])))
        throw NumericError("hyper: P*Q does not reproduce f");
  }

  int genus() const { return g_; }
  const CyclicCover& cover() const { return cover_; }
  const std::vector<cplx>& branch_points() const { return cover_.branch_points(); }
  cplx branch_point(int r) const { return cover_.branch_points()[r]; }
  const Poly& P() const { return P_; }
  const Poly& Q() const { return Q_; }
  cplx lambda(int k) const { return cover_.f()[k]; }

  // first kind: nu_i = x^{i-1} dx / 2y, i = 1..g
  Eigen::VectorXcd first_kind(cplx x, cplx y) const {
    Eigen::VectorXcd v(g_);
    cplx p(1.0);
    for (int i = 0; i < g_; ++i) {
      v(i) = p / (2.0 * y);
      p *= x;
    }
    return v;
  }

  // second kind: nu^II_j = (1/2y) sum_{k=j}^{2g-j} (k+1-j) lambda_{k+1+j} x^k dx
  Eigen::VectorXcd second_kind(cplx x, cplx y) const {
    Eigen::VectorXcd v(g_);
    for (int j = 1; j <= g_; ++j) {
      cplx acc(0.0);
      for (int k = j; k <= 2 * g_ - j; ++k)
        acc += double(k + 1 - j) * lambda(k + 1 + j) * std::pow(x, k);
      v(j - 1) = acc / (2.0 * y);
    }
    return v;
  }

 private:
  int g_;
  CyclicCover cover_;
  Poly P_, Q_;
};

struct HyperPeriodData {
  explicit HyperPeriodData(HyperCurveSpec c) : curve(std::move(c)) {}

  HyperCurveSpec curve;
  double tol = 1e-11;
  cplx anchor;
  Eigen::VectorXcd tail;

  std::vector<CycleCandidate> candidates;
  std::vector<std::vector<std::int64_t>> intersections;
  SymplecticBasis basis;

  Eigen::MatrixXcd omega1, omega2, eta1, eta2, tau;
  double legendre_residual = 0.0;
  bool eta_reversed = false;

  std::vector<Eigen::VectorXcd> omega_branch;      // r = 0..2g
  std::vector<Eigen::VectorXi> half_m, half_n;     // omega_r = w' m + w'' n
  std::vector<Eigen::VectorXcd> phi;               // phi_r

  int g() const { return curve.genus(); }
};

namespace detail {

inline Eigen::VectorXd hyper_realify(const Eigen::VectorXcd& u) {
  int g = static_cast<int>(u.size());
  Eigen::VectorXd v(2 * g);
  for (int r = 0; r < g; ++r) {
    v(r) = u(r).real();
    v(g + r) = u(r).imag();
  }
  return v;
}

}  // namespace detail

struct HyperLatticeCoords {
  bool member = false;
  Eigen::VectorXd coords;
  Eigen::VectorXi rounded;
  double max_dev = 0.0;
};

// coordinates of u in the basis (k1_b w'_b, k2_b w''_b)
inline HyperLatticeCoords hyper_lattice_coords(const HyperPeriodData& pd,
                                               const Eigen::VectorXcd& u,
                                               const Eigen::VectorXd& k1,
                                               const Eigen::VectorXd& k2) {
  const int g = pd.g();
  Eigen::MatrixXd m(2 * g, 2 * g);
  for (int b = 0; b < g; ++b) {
    m.col(b) = detail::hyper_realify(k1(b) * pd.omega1.col(b));
    m.col(g + b) = detail::hyper_realify(k2(b) * pd.omega2.col(b));
  }
  Eigen::VectorXd c = m.partialPivLu().solve(detail::hyper_realify(u));
  HyperLatticeCoords out;
  out.coords = c;
  out.rounded.resize(2 * g);
  for (int i = 0; i < 2 * g; ++i) {
    out.rounded(i) = int(std::lround(c(i)));
    out.max_dev = std::max(out.max_dev, std::abs(c(i) - double(out.rounded(i))));
  }
  out.member = out.max_dev < 1e-6;
  return out;
}

inline HyperLatticeCoords hyper_lattice_membership(const HyperPeriodData& pd,
                                                   const Eigen::VectorXcd& u) {
  const int g = pd.g();
  return hyper_lattice_coords(pd, u, Eigen::VectorXd::Constant(g, 2.0),
                              Eigen::VectorXd::Constant(g, 2.0));
}

inline HyperPeriodData build_hyper_period_data(const HyperCurveSpec& curve,
                                               double tol = 1e-11) {
  HyperPeriodData pd(curve);
  pd.tol = tol;
  const CyclicCover& cov = curve.cover();
  const int g = curve.genus();
  pd.anchor = cov.centroid() + 10.0 * cov.spread();

  // tail from infinity along the radial chart x(s) = c + d/(1-s)^2
  {
    cplx c0 = cov.centroid();
    cplx d = pd.anchor - c0;
    ParamCurve pc;
    pc.x = [c0, d](double s) { double S = 1.0 - s; return c0 + d / (S * S); };
    pc.dx = [d](double s) { double S = 1.0 - s; return 2.0 * d / (S * S * S); };
    int deg = 2 * g + 1;
    pc.guide = [deg](double sp, double sc) {
      return cplx(std::pow((1.0 - sp) / (1.0 - sc), deg));
    };
    cplx y0 = principal_sqrt(cov.f_eval(pd.anchor));
    DensityFn first = [&curve](cplx x, cplx y) { return curve.first_kind(x, y); };
    pd.tail = -integrate_continued(cov, pc, y0, first, g, tol, nullptr, 8);
  }

  pd.candidates = make_cycle_candidates(cov);
  const int k = static_cast<int>(pd.candidates.size());
  pd.intersections.assign(k, std::vector<std::int64_t>(k, 0));
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      int v = intersection_number(cov, pd.candidates[i], pd.candidates[j]);
      pd.intersections[i][j] = v;
      pd.intersections[j][i] = -v;
    }
  pd.basis = symplectic_reduce(pd.intersections, g);

  std::vector<Eigen::VectorXcd> cf(k), cs(k);
  DensityFn stacked = [&curve, g](cplx x, cplx y) {
    Eigen::VectorXcd v(2 * g);
    v.head(g) = curve.first_kind(x, y);
    v.tail(g) = curve.second_kind(x, y);
    return v;
  };
  for (int i = 0; i < k; ++i) {
    const auto& cand = pd.candidates[i];
    cplx y0 = cov.sheets_above(cand.plan.start())[cand.sheet].y;
    Eigen::VectorXcd v = integrate_over_plan(cov, cand.plan, y0, stacked, 2 * g, tol);
    cf[i] = v.head(g);
    cs[i] = v.tail(g);
  }

  pd.omega1.resize(g, g);
  pd.omega2.resize(g, g);
  pd.eta1.resize(g, g);
  pd.eta2.resize(g, g);
  auto assemble = [&]() {
    for (int a = 0; a < g; ++a) {
      Eigen::VectorXcd w1 = Eigen::VectorXcd::Zero(g), w2 = w1, e1 = w1, e2 = w1;
      for (int j = 0; j < k; ++j) {
        double ca = double(pd.basis.rows[2 * a][j]);
        double cb = double(pd.basis.rows[2 * a + 1][j]);
        w1 += ca * cf[j];
        e1 += ca * cs[j];
        w2 += cb * cf[j];
        e2 += cb * cs[j];
      }
      pd.omega1.col(a) = 0.5 * w1;
      pd.omega2.col(a) = 0.5 * w2;
      pd.eta1.col(a) = 0.5 * e1;
      pd.eta2.col(a) = 0.5 * e2;
    }
    pd.tau = pd.omega1.partialPivLu().solve(pd.omega2);
  };
  assemble();
  {
    Eigen::MatrixXd imtau = pd.tau.imag();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (imtau + imtau.transpose()));
    if (es.eigenvalues()(0) < 0.0) {
      for (int a = 0; a < g; ++a) {
        std::swap(pd.basis.rows[2 * a], pd.basis.rows[2 * a + 1]);
        for (auto& v : pd.basis.rows[2 * a + 1]) v = -v;
      }
      assemble();
    }
  }

  // Legendre residual; reverse the eta row order if the listed second-kind
  // basis pairs anti-diagonally (as in the trigonal case).
  auto legendre = [&]() {
    Eigen::MatrixXcd M(2 * g, 2 * g), J = Eigen::MatrixXcd::Zero(2 * g, 2 * g);
    M.block(0, 0, g, g) = 2.0 * pd.omega1;
    M.block(0, g, g, g) = 2.0 * pd.omega2;
    M.block(g, 0, g, g) = 2.0 * pd.eta1;
    M.block(g, g, g, g) = 2.0 * pd.eta2;
    for (int i = 0; i < g; ++i) {
      J(i, g + i) = cplx(-1.0);
      J(g + i, i) = cplx(1.0);
    }
    return Eigen::MatrixXcd(M * J * M.transpose() - 2.0 * pi * I * J);
  };
  pd.legendre_residual = legendre().cwiseAbs().maxCoeff();
  if (g > 1 && pd.legendre_residual > 1e-6) {
    pd.eta1.colwise().reverseInPlace();
    pd.eta2.colwise().reverseInPlace();
    pd.eta_reversed = true;
    double r2 = legendre().cwiseAbs().maxCoeff();
    if (r2 < pd.legendre_residual) pd.legendre_residual = r2;
  }

  // branch vectors and their half-period decompositions
  pd.omega_branch.resize(2 * g + 1);
  pd.half_m.resize(2 * g + 1);
  pd.half_n.resize(2 * g + 1);
  pd.phi.resize(2 * g + 1);
  for (int r = 0; r < 2 * g + 1; ++r) {
    cplx br = curve.branch_point(r);
    double gap = std::numeric_limits<double>::infinity();
    for (int b = 0; b < 2 * g + 1; ++b)
      if (b != r) gap = std::min(gap, std::abs(br - curve.branch_point(b)));
    cplx dir = (pd.anchor - br) / std::abs(pd.anchor - br);
    cplx x_near = br + 0.25 * gap * dir;
    std::vector<cplx> obstacles(curve.branch_points().begin(),
                                curve.branch_points().end());
    PathPlan main_leg = avoiding_path(pd.anchor, x_near, obstacles, 0.32 * cov.min_gap());
    cplx y_anchor = principal_sqrt(curve.cover().f_eval(pd.anchor));
    DensityFn first = [&curve](cplx x, cplx y) { return curve.first_kind(x, y); };
    cplx y_near;
    Eigen::VectorXcd main_val =
        integrate_over_plan(cov, main_leg, y_anchor, first, g, tol, &y_near);
    ParamCurve leg = branch_chart_leg(cov, r, x_near);
    Eigen::VectorXcd leg_val = integrate_continued(cov, leg, y_near, first, g, tol,
                                                   nullptr, 8);
    pd.omega_branch[r] = pd.tail + main_val + leg_val;

    // omega_r is a half period: omega_r = w' m + w'' n with integer m, n
    HyperLatticeCoords hc = hyper_lattice_coords(
        pd, pd.omega_branch[r], Eigen::VectorXd::Constant(g, 1.0),
        Eigen::VectorXd::Constant(g, 1.0));
    if (hc.max_dev > 1e-4)
      throw NonIntegralSolution("hyper: branch vector is not a half period");
    pd.half_m[r] = hc.rounded.head(g);
    pd.half_n[r] = hc.rounded.tail(g);
    // centered representative mod 2 (the class is 2-torsion)
    auto centered = [](int v) {
      int q = ((v % 2) + 2) % 2;
      return q;  // in {0, 1}
    };
    Eigen::VectorXcd w = Eigen::VectorXcd::Zero(g);
    for (int b = 0; b < g; ++b) {
      pd.half_m[r](b) = centered(pd.half_m[r](b));
      pd.half_n[r](b) = centered(pd.half_n[r](b));
      w += double(pd.half_m[r](b)) * pd.omega1.col(b) +
           double(pd.half_n[r](b)) * pd.omega2.col(b);
    }
    pd.omega_branch[r] = w;
    // phi_r, with the sign tied to the eta orientation as in the trigonal case
    Eigen::VectorXcd p = Eigen::VectorXcd::Zero(g);
    for (int b = 0; b < g; ++b)
      p -= double(pd.half_m[r](b)) * pd.eta1.col(b) +
           double(pd.half_n[r](b)) * pd.eta2.col(b);
    pd.phi[r] = p;
  }
  return pd;
}

// ---------------------------------------------------------------------------
// Traced points and the Abel map.

struct HyperTracedPoint {
  SurfacePoint p;
  PathPlan plan;
  TracedPath traced;
  Eigen::VectorXcd abel;
};

struct HyperTracedDivisor {
  std::vector<HyperTracedPoint> pts;
  Eigen::VectorXcd abel() const {
    Eigen::VectorXcd u = pts.front().abel;
    for (std::size_t k = 1; k < pts.size(); ++k) u += pts[k].abel;
    return u;
  }
};

inline HyperTracedPoint hyper_trace_point(const HyperPeriodData& pd, cplx x, int sheet) {
  const HyperCurveSpec& curve = pd.curve;
  const CyclicCover& cov = curve.cover();
  std::vector<cplx> obstacles(curve.branch_points().begin(), curve.branch_points().end());
  double clear = 0.3 * cov.min_gap();
  cplx y_target = cov.sheets_above(x)[sheet].y;
  cplx y_anchor = principal_sqrt(cov.f_eval(pd.anchor));

  PathPlan direct = avoiding_path(pd.anchor, x, obstacles, clear);
  TracedPath tp = continue_along(cov, direct, y_anchor);
  PathPlan plan = direct;
  if (std::abs(tp.y_end() - y_target) > 1e-6 * std::abs(y_target)) {
    cplx b0 = curve.branch_point(0);
    double gap = std::numeric_limits<double>::infinity();
    for (int b = 1; b < 2 * curve.genus() + 1; ++b)
      gap = std::min(gap, std::abs(b0 - curve.branch_point(b)));
    double r = 0.22 * gap;
    cplx rp = b0 + r * (pd.anchor - b0) / std::abs(pd.anchor - b0);
    plan = avoiding_path(pd.anchor, rp, obstacles, clear);
    plan.append(PathPlan::loop(b0, r, std::arg(rp - b0), 1));
    cplx exit;
    plan.append(ring_exit(b0, r, rp, x, &exit));
    plan.append(avoiding_path(exit, x, obstacles, clear));
  }
  HyperTracedPoint out;
  out.plan = plan;
  out.traced = continue_along(cov, plan, y_anchor);
  if (std::abs(out.traced.y_end() - y_target) > 1e-6 * std::max(1.0, std::abs(y_target)))
    throw ContinuationFailure("hyper_trace_point: sheet correction failed");
  out.p = SurfacePoint{x, out.traced.y_end()};
  DensityFn first = [&curve](cplx xx, cplx yy) { return curve.first_kind(xx, yy); };
  Eigen::VectorXcd v = integrate_over_plan(cov, plan, y_anchor, first,
                                           curve.genus(), pd.tol);
  out.abel = pd.tail + v;
  return out;
}

inline HyperTracedDivisor hyper_random_divisor(const HyperPeriodData& pd, Rng& rng) {
  const HyperCurveSpec& c = pd.curve;
  const int g = c.genus();
  for (int tries = 0; tries < 100; ++tries) {
    HyperTracedDivisor d;
    for (int k = 0; k < g; ++k) {
      cplx x;
      for (int t = 0; t < 100; ++t) {
        x = rng.in_annulus(c.cover().centroid(), 0.35 * c.cover().spread(),
                           1.9 * c.cover().spread());
        if (c.cover().dist_to_branch(x) > 0.3 * c.cover().min_gap()) break;
      }
      d.pts.push_back(hyper_trace_point(pd, x, rng.below(2)));
    }
    bool ok = true;
    for (std::size_t i = 0; i < d.pts.size() && ok; ++i)
      for (std::size_t j = i + 1; j < d.pts.size() && ok; ++j)
        if (std::abs(d.pts[i].p.x - d.pts[j].p.x) < 0.05 * c.cover().spread()) ok = false;
    if (ok) return d;
  }
  throw NumericError("hyper_random_divisor failed");
}

// ---------------------------------------------------------------------------
// Hyperelliptic sigma.

class HyperSigmaContext {
 public:
  HyperSigmaContext(std::shared_ptr<const HyperPeriodData> pd, Eigen::VectorXd a,
                    Eigen::VectorXd b, ThetaSum theta, cplx c_norm)
      : pd_(std::move(pd)), a_(std::move(a)), b_(std::move(b)),
        theta_(std::move(theta)), c_(c_norm) {
    W_ = 0.5 * pd_->omega1.inverse();
    S_ = pd_->eta1 * pd_->omega1.inverse();
    Ssym_ = S_ + S_.transpose();
  }

  const HyperPeriodData& periods() const { return *pd_; }
  cplx c_norm() const { return c_; }
  void set_c_norm(cplx c) { c_ = c; }
  const Eigen::VectorXd& char_top() const { return a_; }
  const Eigen::VectorXd& char_bottom() const { return b_; }
  double sigma_scale() const { return sigma_scale_; }
  void set_sigma_scale(double s) { sigma_scale_ = s; }

  struct Jet {
    cplx s{0.0};
    double scale = 0.0;
    Eigen::VectorXcd grad;
  };

  Jet jet(const Eigen::VectorXcd& u, int order = 0) const {
    Eigen::VectorXcd z = W_ * u;
    ThetaSum::Result th = theta_.eval(z, order);
    cplx q = -0.5 * (u.transpose() * (S_ * u))(0);
    cplx eq = c_ * std::exp(q);
    Jet out;
    out.s = eq * th.val;
    out.scale = std::abs(eq) * th.envelope;
    if (order >= 1) {
      Eigen::VectorXcd dq = -0.5 * (Ssym_ * u);
      Eigen::VectorXcd tz = W_.transpose() * th.grad;
      out.grad = out.s * dq + eq * tz;
    }
    return out;
  }

  cplx sigma(const Eigen::VectorXcd& u) const { return jet(u).s; }
  cplx sigma1(const Eigen::VectorXcd& u) const { return jet(u, 1).grad(0); }

  cplx L(const Eigen::VectorXcd& u, const Eigen::VectorXd& v1,
         const Eigen::VectorXd& v2) const {
    Eigen::VectorXcd w = pd_->eta1 * v1.cast<cplx>() + pd_->eta2 * v2.cast<cplx>();
    return 2.0 * (u.transpose() * w)(0);
  }
  cplx chi(const Eigen::VectorXd& l1, const Eigen::VectorXd& l2) const {
    double e = 2.0 * (l1.dot(a_) - l2.dot(b_)) + l1.dot(l2);
    long n = std::lround(e);
    return (n % 2) ? cplx(-1.0) : cplx(1.0);
  }
  Eigen::VectorXcd lattice_point(const Eigen::VectorXd& l1,
                                 const Eigen::VectorXd& l2) const {
    return 2.0 * (pd_->omega1 * l1.cast<cplx>()) + 2.0 * (pd_->omega2 * l2.cast<cplx>());
  }
  cplx quasi_factor(const Eigen::VectorXcd& u, const Eigen::VectorXd& l1,
                    const Eigen::VectorXd& l2) const {
    Eigen::VectorXcd l = lattice_point(l1, l2);
    return std::exp(-L(u + 0.5 * l, l1, l2)) * chi(l1, l2);
  }

 private:
  std::shared_ptr<const HyperPeriodData> pd_;
  Eigen::VectorXd a_, b_;  // theta characteristic: top (delta''), bottom (delta')
  ThetaSum theta_;
  cplx c_{1.0};
  Eigen::MatrixXcd W_, S_, Ssym_;
  double sigma_scale_ = 1.0;
};

// Characteristic scan: the winner vanishes on Abel images of degree (g-1)
// divisors.  For g = 1 that is sigma(0) = 0 (the odd characteristic).
inline HyperSigmaContext build_hyper_sigma_context(
    std::shared_ptr<const HyperPeriodData> pd, int radius = 12,
    std::uint64_t seed = 20240902) {
  const int g = pd->g();
  Rng rng(seed);
  ThetaSum theta0 = ThetaSum::build_auto(pd->tau, Eigen::VectorXd::Zero(g),
                                         Eigen::VectorXd::Zero(g), radius);
  Eigen::MatrixXcd W = 0.5 * pd->omega1.inverse();

  std::vector<Eigen::VectorXcd> zvan, zref;
  if (g == 1) {
    zvan.push_back(Eigen::VectorXcd::Zero(1));
  } else {
    for (int k = 0; k < 6; ++k) {
      HyperTracedPoint p = hyper_trace_point(
          *pd,
          rng.in_annulus(pd->curve.cover().centroid(), 0.4 * pd->curve.cover().spread(),
                         1.6 * pd->curve.cover().spread()),
          rng.below(2));
      zvan.push_back(W * p.abel);
    }
  }
  for (int k = 0; k < 6; ++k) {
    HyperTracedDivisor d = hyper_random_divisor(*pd, rng);
    zref.push_back(W * d.abel());
  }

  int best = -1;
  for (int idx = 0; idx < (1 << (2 * g)); ++idx) {
    Eigen::VectorXd a(g), b(g);
    for (int i = 0; i < g; ++i) {
      a(i) = (idx >> i & 1) ? 0.5 : 0.0;
      b(i) = (idx >> (g + i) & 1) ? 0.5 : 0.0;
    }
    Eigen::VectorXcd shift = pd->tau * a.cast<cplx>() + b.cast<cplx>();
    cplx aa = (a.cast<cplx>().transpose() * (pd->tau * a.cast<cplx>()))(0);
    auto value = [&](const Eigen::VectorXcd& z) {
      cplx pre = std::exp(pi * I * aa +
                          2.0 * pi * I * (a.cast<cplx>().dot(z + b.cast<cplx>())));
      return std::abs(pre) * std::abs(theta0.value(z + shift));
    };
    std::vector<double> ref;
    for (const auto& z : zref) ref.push_back(value(z));
    std::sort(ref.begin(), ref.end());
    double med = ref[ref.size() / 2];
    double worst = 0.0;
    for (const auto& z : zvan) worst = std::max(worst, value(z));
    if (worst < 1e-6 * med) {
      if (best >= 0) throw CharacteristicAmbiguous("hyper: two characteristics vanish");
      best = idx;
    }
  }
  if (best < 0) throw CharacteristicAmbiguous("hyper: no vanishing characteristic");
  Eigen::VectorXd a(g), b(g);
  for (int i = 0; i < g; ++i) {
    a(i) = (best >> i & 1) ? 0.5 : 0.0;
    b(i) = (best >> (g + i) & 1) ? 0.5 : 0.0;
  }
  ThetaSum theta = ThetaSum::build_auto(pd->tau, a, b, radius);
  HyperSigmaContext ctx(pd, a, b, std::move(theta), cplx(1.0));
  cplx d1 = ctx.sigma1(Eigen::VectorXcd::Zero(g));
  if (std::abs(d1) < 1e-10)
    throw DegenerateNormalization("hyper sigma: leading derivative vanishes");
  ctx.set_c_norm(1.0 / d1);
  std::vector<double> mags;
  for (int k = 0; k < 12; ++k) {
    Eigen::VectorXd s1(g), s2(g);
    for (int i = 0; i < g; ++i) {
      s1(i) = rng.uniform();
      s2(i) = rng.uniform();
    }
    mags.push_back(std::abs(ctx.sigma(ctx.lattice_point(s1, s2))));
  }
  std::sort(mags.begin(), mags.end());
  ctx.set_sigma_scale(mags[mags.size() / 2]);
  return ctx;
}

// ---------------------------------------------------------------------------
// The hyperelliptic al function.

// Algebraic route: al_r = kappa_g * prod_i t_r^{(i)} with t the tracked square
// roots; kappa_g in {1, i} makes al^2 = F(b_r) = prod (b_r - x_i).
inline cplx hyper_al(const HyperPeriodData& pd, int r, const HyperTracedDivisor& d) {
  const int g = pd.g();
  cplx F(1.0);
  for (const auto& tp : d.pts) F *= pd.curve.branch_point(r) - tp.p.x;
  if (std::abs(F) < 1e-10 * std::pow(pd.curve.cover().spread(), g))
    throw BranchDegeneracy("hyper_al: F vanishes");
  cplx prod(1.0);
  for (const auto& tp : d.pts) prod *= tp.traced.t_end(r);
  cplx kappa = (g % 2) ? I : cplx(1.0);
  return kappa * prod;
}

// Sigma route: al_r(u) = gamma_r e^{-u.phi_r} sigma(u + w_r) / sigma(u); the
// constant gamma_r is calibrated once per curve at a generic divisor.
inline cplx hyper_al_sigma_raw(const HyperSigmaContext& ctx, int r,
                               const Eigen::VectorXcd& u) {
  const HyperPeriodData& pd = ctx.periods();
  HyperSigmaContext::Jet j = ctx.jet(u);
  if (std::abs(j.s) < 1e-8 * j.scale)
    throw OnThetaDivisor("hyper_al_sigma: u on the theta divisor");
  cplx expo = -(u.transpose() * pd.phi[r])(0);
  return std::exp(expo) * ctx.sigma(u + pd.omega_branch[r]) / j.s;
}

struct HyperAlCalibration {
  std::vector<cplx> gamma;  // per branch index
};

inline HyperAlCalibration calibrate_hyper_al(const HyperSigmaContext& ctx, Rng& rng) {
  const HyperPeriodData& pd = ctx.periods();
  HyperAlCalibration cal;
  cal.gamma.resize(2 * pd.g() + 1);
  HyperTracedDivisor d;
  for (int t = 0; t < 20; ++t) {
    d = hyper_random_divisor(pd, rng);
    if (std::abs(ctx.sigma(d.abel())) > 0.05 * ctx.sigma_scale()) break;
  }
  for (int r = 0; r < 2 * pd.g() + 1; ++r)
    cal.gamma[r] = hyper_al(pd, r, d) / hyper_al_sigma_raw(ctx, r, d.abel());
  return cal;
}

inline cplx hyper_al_sigma(const HyperSigmaContext& ctx, const HyperAlCalibration& cal,
                           int r, const Eigen::VectorXcd& u) {
  return cal.gamma[r] * hyper_al_sigma_raw(ctx, r, u);
}

// Lagrange-type identity: sum over r in {odd indices} union {a} of
// al_r^2 / A'_a(b_r) = 1, with A_a(x) = P(x)(x - b_a) and a even.
inline cplx ellipsoidal_sum(const HyperPeriodData& pd, int a,
                            const HyperTracedDivisor& d) {
  const HyperCurveSpec& c = pd.curve;
  if (a % 2 != 0 || a == 0)
    throw InputError("ellipsoidal_sum: a must be one of the even indices 2..2g");
  Poly Pd = c.P().derivative();
  cplx acc(0.0);
  for (int r = 1; r < 2 * c.genus() + 1; r += 2) {
    cplx al = hyper_al(pd, r, d);
    cplx Ap = Pd.eval(c.branch_point(r)) * (c.branch_point(r) - c.branch_point(a));
    acc += al * al / Ap;
  }
  {
    cplx al = hyper_al(pd, a, d);
    cplx Ap = c.P().eval(c.branch_point(a));
    acc += al * al / Ap;
  }
  return acc;
}

}  // namespace trigal
