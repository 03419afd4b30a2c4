#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <vector>

#include "trigal/numeric.hpp"

namespace trigal {

// Dense polynomial with coefficients in ascending order: c[0] + c[1] x + ...
class Poly {
 public:
  Poly() : c_{cplx(0.0)} {}
  explicit Poly(std::vector<cplx> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) c_.push_back(cplx(0.0));
  }

  static Poly from_roots(const std::vector<cplx>& roots) {
    std::vector<cplx> c{cplx(1.0)};
    for (cplx r : roots) {
      c.push_back(cplx(0.0));
      for (std::size_t k = c.size() - 1; k >= 1; --k)
        c[k] = c[k - 1] - r * c[k];
      c[0] = -r * c[0];
    }
    return Poly(std::move(c));
  }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<cplx>& coeffs() const { return c_; }
  cplx operator[](int k) const {
    return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[k] : cplx(0.0);
  }

  cplx eval(cplx x) const {
    cplx acc(0.0);
    for (std::size_t k = c_.size(); k-- > 0;) acc = acc * x + c_[k];
    return acc;
  }

  Poly derivative() const {
    if (c_.size() <= 1) return Poly();
    std::vector<cplx> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = double(k) * c_[k];
    return Poly(std::move(d));
  }

  Poly operator*(const Poly& o) const {
    std::vector<cplx> p(c_.size() + o.c_.size() - 1, cplx(0.0));
    for (std::size_t i = 0; i < c_.size(); ++i)
      for (std::size_t j = 0; j < o.c_.size(); ++j)
        p[i + j] += c_[i] * o.c_[j];
    return Poly(std::move(p));
  }

  Poly operator-(const Poly& o) const {
    std::vector<cplx> p(std::max(c_.size(), o.c_.size()), cplx(0.0));
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = (*this)[int(k)] - o[int(k)];
    return Poly(std::move(p));
  }

  // Synthetic division by (x - r).  Returns the quotient; the remainder
  // (= eval(r)) is discarded, so callers should validate it beforehand.
  Poly deflate(cplx r) const {
    int n = degree();
    if (n < 1) return Poly();
    std::vector<cplx> q(n);
    cplx acc = c_[n];
    for (int k = n - 1; k >= 0; --k) {
      q[k] = acc;
      acc = c_[k] + r * acc;
    }
    return Poly(std::move(q));
  }

  // Roots via companion-matrix eigenvalues of the monicized polynomial,
  // each polished by one Newton step on this polynomial.
  std::vector<cplx> roots() const {
    int n = degree();
    while (n > 0 && std::abs(c_[n]) == 0.0) --n;
    if (n < 1) return {};
    if (n == 1) return {-c_[0] / c_[1]};
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
    for (int k = 0; k < n; ++k) C(k, n - 1) = -c_[k] / c_[n];
    for (int k = 1; k < n; ++k) C(k, k - 1) = cplx(1.0);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
    Poly d = derivative();
    std::vector<cplx> out(n);
    for (int k = 0; k < n; ++k) {
      cplx r = es.eigenvalues()(k);
      cplx dp = d.eval(r);
      if (std::abs(dp) > 0.0) r -= eval(r) / dp;
      out[k] = r;
    }
    std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
      if (a.real() != b.real()) return a.real() < b.real();
      return a.imag() < b.imag();
    });
    return out;
  }

 private:
  std::vector<cplx> c_;
};

}  // namespace trigal
