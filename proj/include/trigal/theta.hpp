#pragma once

#include <Eigen/Dense>

#include "trigal/numeric.hpp"

namespace trigal {

// Riemann theta with characteristics,
//   theta[a,b](z; tau) = sum_n exp[ pi i (n+a)^T tau (n+a) + 2 pi i (n+a)^T (z+b) ],
// summed over the max-norm ball |n|_inf <= radius in deterministic order
// (shell by shell, lexicographic within a shell).  Arguments are reduced by
// quasi-periodicity z -> z - tau m - k before summing, so the truncation
// bound certified at build time holds for every evaluation.
class ThetaSum {
 public:
  struct Result {
    cplx val{0.0};
    double envelope = 0.0;   // |prefactor| * sum |terms|: local magnitude scale
    Eigen::VectorXcd grad;   // d/dz_i
    Eigen::MatrixXcd hess;   // d^2/dz_i dz_j
  };

  ThetaSum(Eigen::MatrixXcd tau, Eigen::VectorXd a, Eigen::VectorXd b, int radius)
      : g_(static_cast<int>(tau.rows())),
        tau_(std::move(tau)),
        a_(std::move(a)),
        b_(std::move(b)),
        radius_(radius) {
    Eigen::MatrixXd im = tau_.imag();
    im = 0.5 * (im + im.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(im);
    if (es.eigenvalues()(0) <= 0.0)
      throw InputError("theta: Im(tau) is not positive definite");
    im_tau_inv_ = im.inverse();
    // after reduction the fractional tau-coordinate is at most 1/2 + roundoff
    im_z_bound_ = 0.55 * im.cwiseAbs().rowwise().sum().maxCoeff();
    build_terms();
  }

  int genus() const { return g_; }
  int radius() const { return radius_; }
  const Eigen::MatrixXcd& tau() const { return tau_; }
  const Eigen::VectorXd& char_top() const { return a_; }
  const Eigen::VectorXd& char_bottom() const { return b_; }

  // Certified relative weight of the outermost shell; callers escalate the
  // radius until this is small enough.
  double tail_ratio() const { return tail_ratio_; }
  bool truncation_ok(double rel = 1e-12) const { return tail_ratio_ < rel; }

  Result eval(const Eigen::VectorXcd& z, int deriv_order = 0) const {
    // reduce: z = z0 + tau m + k with m, k integer vectors
    Eigen::VectorXd p = im_tau_inv_ * z.imag();
    Eigen::VectorXcd m(g_), k(g_);
    Eigen::VectorXd mr(g_);
    for (int i = 0; i < g_; ++i) {
      mr(i) = std::round(p(i));
      m(i) = cplx(mr(i));
    }
    Eigen::VectorXcd z1 = z - tau_ * m;
    for (int i = 0; i < g_; ++i) k(i) = cplx(std::round(z1(i).real()));
    Eigen::VectorXcd z0 = z1 - k;

    // theta(z) = exp(E) theta(z0) with
    // E = -pi i m^T tau m - 2 pi i m^T (z0+b) + 2 pi i a^T k
    cplx mtm = (m.transpose() * (tau_ * m))(0);
    cplx mzb = (m.transpose() * (z0 + b_.cast<cplx>()))(0);
    cplx ak = (a_.cast<cplx>().transpose() * k)(0);
    cplx pref = std::exp(-pi * I * mtm - 2.0 * pi * I * mzb + 2.0 * pi * I * ak);

    // base sums at z0
    cplx t0(0.0);
    double env = 0.0;
    Eigen::VectorXcd t1 = Eigen::VectorXcd::Zero(g_);
    Eigen::MatrixXcd t2 = Eigen::MatrixXcd::Zero(g_, g_);
    Eigen::VectorXcd zb = z0 + b_.cast<cplx>();
    for (const Term& tm : terms_) {
      cplx phase(0.0);
      for (int i = 0; i < g_; ++i) phase += tm.na(i) * zb(i);
      cplx term = tm.qn * std::exp(2.0 * pi * I * phase);
      t0 += term;
      env += std::abs(term);
      if (deriv_order >= 1)
        for (int i = 0; i < g_; ++i) t1(i) += term * (2.0 * pi * I * tm.na(i));
      if (deriv_order >= 2)
        for (int i = 0; i < g_; ++i)
          for (int j = i; j < g_; ++j)
            t2(i, j) += term * (2.0 * pi * I * tm.na(i)) * (2.0 * pi * I * tm.na(j));
    }
    if (deriv_order >= 2)
      for (int i = 0; i < g_; ++i)
        for (int j = 0; j < i; ++j) t2(i, j) = t2(j, i);

    Result r;
    r.val = pref * t0;
    r.envelope = std::abs(pref) * env;
    if (deriv_order >= 1) {
      r.grad = Eigen::VectorXcd(g_);
      for (int i = 0; i < g_; ++i)
        r.grad(i) = pref * (t1(i) - 2.0 * pi * I * m(i) * t0);
    }
    if (deriv_order >= 2) {
      r.hess = Eigen::MatrixXcd(g_, g_);
      for (int i = 0; i < g_; ++i)
        for (int j = 0; j < g_; ++j)
          r.hess(i, j) = pref * (t2(i, j) - 2.0 * pi * I * (m(i) * t1(j) + m(j) * t1(i)) +
                                 (2.0 * pi * I) * (2.0 * pi * I) * m(i) * m(j) * t0);
    }
    return r;
  }

  cplx value(const Eigen::VectorXcd& z) const { return eval(z, 0).val; }

  // Deterministic iteration over the retained terms (n+a, q_n).
  template <class F>
  void for_each_term(F&& f) const {
    for (const Term& t : terms_) f(t.na, t.qn);
  }

  // Build with automatic radius escalation until the shell bound passes.
  static ThetaSum build_auto(const Eigen::MatrixXcd& tau, const Eigen::VectorXd& a,
                             const Eigen::VectorXd& b, int radius0, double rel = 1e-12) {
    for (int r = radius0; r <= radius0 + 20; r += 2) {
      ThetaSum t(tau, a, b, r);
      if (t.truncation_ok(rel)) return t;
    }
    throw TruncationInsufficient("theta: radius escalation failed to certify truncation");
  }

 private:
  struct Term {
    Eigen::VectorXd na;  // n + a
    cplx qn;             // exp(pi i (n+a)^T tau (n+a))
    double weight;       // |qn| e^{2 pi |n+a|_1 im_z_bound}
  };

  void build_terms() {
    terms_.clear();
    std::vector<int> n(g_, -radius_);
    double total = 0.0, outer = 0.0;
    const double drop = 1e-40;
    while (true) {
      int shell = 0;
      for (int i = 0; i < g_; ++i) shell = std::max(shell, std::abs(n[i]));
      Eigen::VectorXd na(g_);
      for (int i = 0; i < g_; ++i) na(i) = n[i] + a_(i);
      cplx quad(0.0);
      for (int i = 0; i < g_; ++i)
        for (int j = 0; j < g_; ++j) quad += na(i) * tau_(i, j) * na(j);
      cplx qn = std::exp(pi * I * quad);
      double w = std::abs(qn) * std::exp(2.0 * pi * na.lpNorm<1>() * im_z_bound_);
      total += w;
      if (shell == radius_) outer += w;
      if (w > drop) terms_.push_back({na, qn, w});
      // advance odometer
      int i = g_ - 1;
      while (i >= 0) {
        if (++n[i] <= radius_) break;
        n[i] = -radius_;
        --i;
      }
      if (i < 0) break;
    }
    // deterministic order: by shell, then lexicographic in n
    std::stable_sort(terms_.begin(), terms_.end(), [this](const Term& x, const Term& y) {
      double sx = 0, sy = 0;
      for (int i = 0; i < g_; ++i) {
        sx = std::max(sx, std::abs(x.na(i) - a_(i)));
        sy = std::max(sy, std::abs(y.na(i) - a_(i)));
      }
      if (sx != sy) return sx < sy;
      for (int i = 0; i < g_; ++i) {
        if (x.na(i) != y.na(i)) return x.na(i) < y.na(i);
      }
      return false;
    });
    tail_ratio_ = outer / std::max(total, 1e-300);
  }

  int g_;
  Eigen::MatrixXcd tau_;
  Eigen::VectorXd a_, b_;
  int radius_;
  Eigen::MatrixXd im_tau_inv_;
  double im_z_bound_ = 0.0;
  double tail_ratio_ = 0.0;
  std::vector<Term> terms_;
};

}  // namespace trigal
