#pragma once

#include <memory>

#include "trigal/periods.hpp"
#include "trigal/theta.hpp"

namespace trigal {

struct Characteristic {
  Eigen::Vector3d delta2 = Eigen::Vector3d::Zero();  // top block (theta 'a')
  Eigen::Vector3d delta1 = Eigen::Vector3d::Zero();  // bottom block (theta 'b')
  int index = -1;                                    // 0..63 scan label

  // parity of the half-characteristic: odd iff 4 delta1.delta2 is odd
  bool odd() const {
    long s = std::lround(4.0 * delta1.dot(delta2));
    return (s % 2 + 2) % 2 == 1;
  }
};

// Kleinian sigma for the trigonal curve:
//   sigma(u) = c exp(-1/2 u^T S u) theta[delta](W u; tau),
// with S = eta' omega'^{-1}, W = 1/2 omega'^{-1}, tau = omega'^{-1} omega'',
// delta found by the vanishing scan, and c normalized so that
// d sigma / d u_1 (0) = 1.
class SigmaContext {
 public:
  struct Jet {
    cplx s{0.0};
    double scale = 0.0;  // local magnitude envelope of the sigma evaluation
    Eigen::Vector3cd grad = Eigen::Vector3cd::Zero();
    Eigen::Matrix3cd hess = Eigen::Matrix3cd::Zero();
  };

  SigmaContext(std::shared_ptr<const PeriodData> pd, Characteristic delta,
               ThetaSum theta, cplx c_norm)
      : pd_(std::move(pd)), delta_(delta), theta_(std::move(theta)), c_(c_norm) {
    W_ = 0.5 * pd_->omega1.inverse();
    S_ = pd_->eta1 * pd_->omega1.inverse();
    Ssym_ = S_ + S_.transpose();
  }

  const PeriodData& periods() const { return *pd_; }
  std::shared_ptr<const PeriodData> periods_ptr() const { return pd_; }
  const Characteristic& delta() const { return delta_; }
  const ThetaSum& theta() const { return theta_; }
  cplx c_norm() const { return c_; }
  void set_c_norm(cplx c) { c_ = c; }
  double sigma_scale() const { return sigma_scale_; }
  void set_sigma_scale(double s) { sigma_scale_ = s; }

  Jet jet(const Eigen::Vector3cd& u, int order = 0) const {
    Eigen::VectorXcd z = W_ * u;
    ThetaSum::Result th = theta_.eval(z, order);
    cplx q = -0.5 * (u.transpose() * (S_ * u))(0);
    cplx eq = c_ * std::exp(q);
    Jet out;
    out.s = eq * th.val;
    out.scale = std::abs(eq) * th.envelope;
    if (order >= 1) {
      Eigen::Vector3cd dq = -0.5 * (Ssym_ * u);
      Eigen::Vector3cd tz = W_.transpose() * th.grad;  // d theta / d u_i
      out.grad = out.s * dq + eq * tz;
      if (order >= 2) {
        Eigen::Matrix3cd tzz = W_.transpose() * th.hess * W_;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            out.hess(i, j) = out.s * (dq(i) * dq(j) - 0.5 * Ssym_(i, j)) +
                             eq * (dq(i) * tz(j) + dq(j) * tz(i)) + eq * tzz(i, j);
      }
    }
    return out;
  }

  cplx sigma(const Eigen::Vector3cd& u) const { return jet(u, 0).s; }
  cplx sigma1(const Eigen::Vector3cd& u) const { return jet(u, 1).grad(0); }
  cplx sigma3(const Eigen::Vector3cd& u) const { return jet(u, 1).grad(2); }
  cplx sigma33(const Eigen::Vector3cd& u) const { return jet(u, 2).hess(2, 2); }

  // Finite-difference derivatives (central, one Richardson step); these are
  // the independent cross-check of the term-wise differentiated series.
  cplx sigma_fd_first(const Eigen::Vector3cd& u, int axis, double h) const {
    auto D = [&](double step) {
      Eigen::Vector3cd e = Eigen::Vector3cd::Zero();
      e(axis) = cplx(step);
      return (sigma(u + e) - sigma(u - e)) / (2.0 * step);
    };
    return (4.0 * D(h / 2.0) - D(h)) / 3.0;
  }
  cplx sigma_fd_second(const Eigen::Vector3cd& u, int axis, double h) const {
    auto D = [&](double step) {
      Eigen::Vector3cd e = Eigen::Vector3cd::Zero();
      e(axis) = cplx(step);
      return (sigma(u + e) - 2.0 * sigma(u) + sigma(u - e)) / (step * step);
    };
    return (4.0 * D(h / 2.0) - D(h)) / 3.0;
  }

  // L(u, v) = 2 u^T (eta' v' + eta'' v'') for v = 2 omega' v' + 2 omega'' v''.
  cplx L(const Eigen::Vector3cd& u, const Eigen::Vector3d& v1,
         const Eigen::Vector3d& v2) const {
    Eigen::Vector3cd w = pd_->eta1 * v1.cast<cplx>() + pd_->eta2 * v2.cast<cplx>();
    return 2.0 * (u.transpose() * w)(0);
  }

  // chi(l) = exp[pi i (2(l'^T d'' - l''^T d') + l'^T l'')], a sign.
  cplx chi(const Eigen::Vector3d& l1, const Eigen::Vector3d& l2) const {
    double e = 2.0 * (l1.dot(delta_.delta2) - l2.dot(delta_.delta1)) + l1.dot(l2);
    long n = std::lround(e);
    return (n % 2) ? cplx(-1.0) : cplx(1.0);
  }

  Eigen::Vector3cd lattice_point(const Eigen::Vector3d& l1,
                                 const Eigen::Vector3d& l2) const {
    return 2.0 * (pd_->omega1 * l1.cast<cplx>()) + 2.0 * (pd_->omega2 * l2.cast<cplx>());
  }

  // The sigma cocycle: sigma(u+l) = sigma(u) * quasi_factor(u, l).  With the
  // eta orientation fixed by the Legendre relation M J M^T = +2 pi i J, the
  // exponent enters with a minus: exp(-L(u + l/2, l)) chi(l).  (The opposite
  // eta sign would restore +L but flip the Legendre scalar to -2 pi i.)
  cplx quasi_factor(const Eigen::Vector3cd& u, const Eigen::Vector3d& l1,
                    const Eigen::Vector3d& l2) const {
    Eigen::Vector3cd l = lattice_point(l1, l2);
    return std::exp(-L(u + 0.5 * l, l1, l2)) * chi(l1, l2);
  }

  // Twisted variant: sigma(u + zeta l) = sigma(u) * twisted_factor(u, l).
  cplx twisted_quasi_factor(const Eigen::Vector3cd& u, const Eigen::Vector3d& l1,
                            const Eigen::Vector3d& l2) const {
    Eigen::Vector3cd l = lattice_point(l1, l2);
    return std::exp(-L(zeta_action(u, 2) + 0.5 * l, l1, l2)) * chi(l1, l2);
  }

  // sigma(0,0,eps) through the u3-directional Taylor series of the theta sum.
  // Direct summation loses the eps^5 leading behavior to cancellation for
  // small eps; summing the series coefficients (compensated) does not.
  cplx sigma_u3_taylor(double eps, int order = 9) const {
    Eigen::VectorXcd wz = W_.col(2);
    std::vector<cplx> th(order + 1, cplx(0.0)), comp(order + 1, cplx(0.0));
    std::vector<double> mag(order + 1, 0.0);
    theta_.for_each_term([&](const Eigen::VectorXd& na, cplx qn) {
      cplx phase(0.0);
      for (int i = 0; i < 3; ++i) phase += na(i) * delta_.delta1(i);
      cplx tv = qn * std::exp(2.0 * pi * I * phase);
      cplx dir(0.0);
      for (int i = 0; i < 3; ++i) dir += na(i) * wz(i);
      dir *= 2.0 * pi * I;
      cplx p(1.0);
      for (int k = 0; k <= order; ++k) {
        cplx y = tv * p - comp[k];
        cplx t = th[k] + y;
        comp[k] = (t - th[k]) - y;
        th[k] = t;
        mag[k] += std::abs(tv * p);
        p *= dir;
      }
    });
    // flush coefficients whose cancellation sits below the summation noise
    // floor; they are numerically indistinguishable from zero and would
    // otherwise be amplified by the small-eps division
    for (int k = 0; k <= order; ++k)
      if (std::abs(th[k]) < 1e-13 * mag[k]) th[k] = cplx(0.0);
    // divide by k! to get theta Taylor coefficients along the ray
    double fact = 1.0;
    for (int k = 0; k <= order; ++k) {
      if (k > 0) fact *= k;
      th[k] /= fact;
    }
    // exponential prefactor exp(q2 eps^2), q2 = -S(2,2)/2
    cplx q2 = -0.5 * S_(2, 2);
    std::vector<cplx> eq(order + 1, cplx(0.0));
    eq[0] = cplx(1.0);
    for (int m = 1; 2 * m <= order; ++m) {
      cplx v(1.0);
      for (int i = 1; i <= m; ++i) v *= q2 / double(i);
      eq[2 * m] = v;
    }
    cplx acc(0.0);
    for (int k = 0; k <= order; ++k) {
      cplx coeff(0.0);
      for (int j = 0; j <= k; ++j) coeff += th[j] * eq[k - j];
      acc += c_ * coeff * std::pow(eps, k);
    }
    return acc;
  }

  cplx sigma33_twisted(int a, int c) const { return sigma33_tw_[a][c]; }
  void cache_sigma33() {
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 3; ++c)
        sigma33_tw_[a][c] = sigma33(zeta_action(pd_->omega_branch[a], c));
  }

 private:
  std::shared_ptr<const PeriodData> pd_;
  Characteristic delta_;
  ThetaSum theta_;
  cplx c_{1.0};
  Eigen::Matrix3cd W_, S_, Ssym_;
  double sigma_scale_ = 1.0;
  std::array<std::array<cplx, 3>, 4> sigma33_tw_{};
};

// ---------------------------------------------------------------------------
// Characteristic search and context construction.

namespace detail {

inline Characteristic char_from_index(int idx) {
  Characteristic ch;
  for (int i = 0; i < 3; ++i) {
    ch.delta2(i) = (idx >> i & 1) ? 0.5 : 0.0;
    ch.delta1(i) = (idx >> (3 + i) & 1) ? 0.5 : 0.0;
  }
  ch.index = idx;
  return ch;
}

}  // namespace detail

struct CharacteristicScan {
  Characteristic winner;
  std::vector<double> scores;  // max |theta| on W2 / median |theta| on W3, per index
};

// Scan all 64 half-characteristics against Abel images of degree-2 divisors
// (must vanish) and degree-3 divisors (must not), using the shift identity
// theta[a,b](z) = e^{pi i a.tau.a + 2 pi i a.(z+b)} theta(z + tau a + b).
inline CharacteristicScan find_riemann_characteristic(const PeriodData& pd, Rng& rng,
                                                      int radius) {
  Eigen::MatrixXcd tau = pd.tau;
  Eigen::Matrix3cd W = 0.5 * pd.omega1.inverse();
  ThetaSum theta0 = ThetaSum::build_auto(tau, Eigen::Vector3d::Zero(),
                                         Eigen::Vector3d::Zero(), radius);

  std::vector<Eigen::VectorXcd> z2, z3;
  for (int k = 0; k < 8; ++k) {
    TracedDivisor d2 = random_traced_divisor(pd, rng, 2);
    z2.push_back(W * d2.abel());
    TracedDivisor d3 = random_traced_divisor(pd, rng, 3);
    z3.push_back(W * d3.abel());
  }

  CharacteristicScan out;
  out.scores.assign(64, 0.0);
  int best = -1;
  for (int idx = 0; idx < 64; ++idx) {
    Characteristic ch = detail::char_from_index(idx);
    Eigen::VectorXcd shift = tau * ch.delta2.cast<cplx>() + ch.delta1.cast<cplx>();
    cplx aa = (ch.delta2.cast<cplx>().transpose() * (tau * ch.delta2.cast<cplx>()))(0);
    auto value = [&](const Eigen::VectorXcd& z) {
      cplx pre = std::exp(pi * I * aa +
                          2.0 * pi * I *
                              (ch.delta2.cast<cplx>().dot((z + ch.delta1.cast<cplx>()))));
      return std::abs(pre) * std::abs(theta0.value(z + shift));
    };
    std::vector<double> v3;
    for (const auto& z : z3) v3.push_back(value(z));
    std::vector<double> sorted = v3;
    std::sort(sorted.begin(), sorted.end());
    double med3 = sorted[sorted.size() / 2];
    double worst2 = 0.0;
    for (const auto& z : z2) worst2 = std::max(worst2, value(z));
    double min3 = sorted.front();
    out.scores[idx] = worst2 / std::max(med3, 1e-300);
    bool vanishes = out.scores[idx] < 1e-6;
    // only reject candidates that vanish on W3 as well (degenerate data);
    // a healthy candidate may still dip when a random sample nears the divisor
    bool alive_on_w3 = min3 > 1e-8 * med3;
    if (vanishes && alive_on_w3) {
      if (best >= 0)
        throw CharacteristicAmbiguous("two characteristics vanish on the W2 samples");
      best = idx;
    }
  }
  if (best < 0)
    throw CharacteristicAmbiguous("no characteristic vanishes on the W2 samples");
  out.winner = detail::char_from_index(best);
  return out;
}

inline SigmaContext build_sigma_context(std::shared_ptr<const PeriodData> pd,
                                        int radius = 12, std::uint64_t seed = 20240901) {
  Rng rng(seed);
  CharacteristicScan scan = find_riemann_characteristic(*pd, rng, radius);
  ThetaSum theta = ThetaSum::build_auto(pd->tau, scan.winner.delta2, scan.winner.delta1,
                                        radius);
  SigmaContext ctx(pd, scan.winner, std::move(theta), cplx(1.0));
  cplx d1 = ctx.sigma1(Eigen::Vector3cd::Zero());
  if (std::abs(d1) < 1e-10)
    throw DegenerateNormalization("sigma normalization: d sigma/d u1 (0) vanishes");
  ctx.set_c_norm(1.0 / d1);
  // reference magnitude for vanishing floors: median |sigma| at random points
  std::vector<double> mags;
  for (int k = 0; k < 16; ++k) {
    Eigen::Vector3d s1, s2;
    for (int i = 0; i < 3; ++i) {
      s1(i) = rng.uniform();
      s2(i) = rng.uniform();
    }
    Eigen::Vector3cd u = 2.0 * (pd->omega1 * s1.cast<cplx>()) +
                         2.0 * (pd->omega2 * s2.cast<cplx>());
    mags.push_back(std::abs(ctx.sigma(u)));
  }
  std::sort(mags.begin(), mags.end());
  ctx.set_sigma_scale(mags[mags.size() / 2]);
  ctx.cache_sigma33();
  return ctx;
}

}  // namespace trigal
