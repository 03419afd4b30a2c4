#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace trigal {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline const cplx I{0.0, 1.0};

// zeta3 = exp(2*pi*i/3), the fixed primitive cube root of unity.
inline const cplx zeta3{-0.5, 0.8660254037844386467637231707529362};

inline cplx zeta3_pow(long k) {
  long r = ((k % 3) + 3) % 3;
  if (r == 0) return cplx(1.0, 0.0);
  if (r == 1) return zeta3;
  return std::conj(zeta3);
}

// Principal n-th root: argument of the result lies in (-pi/n, pi/n].
inline cplx principal_root(cplx z, int n) {
  if (z == cplx(0.0, 0.0)) return z;
  double r = std::pow(std::abs(z), 1.0 / n);
  double th = std::arg(z) / n;
  return std::polar(r, th);
}

inline cplx principal_cbrt(cplx z) { return principal_root(z, 3); }
inline cplx principal_sqrt(cplx z) { return principal_root(z, 2); }

// All n-th roots of z, the k-th being principal_root(z,n)*exp(2*pi*i*k/n).
inline std::vector<cplx> all_roots(cplx z, int n) {
  std::vector<cplx> out(n);
  cplx p = principal_root(z, n);
  for (int k = 0; k < n; ++k)
    out[k] = p * std::polar(1.0, 2.0 * pi * k / n);
  return out;
}

inline cplx nearest_root(cplx z, int n, cplx guide) {
  cplx base = principal_root(z, n);
  cplx best = base;
  double d = std::abs(base - guide);
  for (int k = 1; k < n; ++k) {
    cplx cand = base * std::polar(1.0, 2.0 * pi * k / n);
    double dk = std::abs(cand - guide);
    if (dk < d) { d = dk; best = cand; }
  }
  return best;
}

// Wrap an angle increment into (-pi, pi].
inline double wrap_angle(double a) {
  while (a > pi) a -= 2.0 * pi;
  while (a <= -pi) a += 2.0 * pi;
  return a;
}

// ---------------------------------------------------------------------------
// Error taxonomy.  Exit-code classes: 2 = input, 3 = numeric non-convergence.

struct Error : std::runtime_error {
  int exit_code;
  Error(const std::string& msg, int code) : std::runtime_error(msg), exit_code(code) {}
};

struct InputError : Error {
  explicit InputError(const std::string& m) : Error(m, 2) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error(m, 3) {}
};

struct BranchPointInput : InputError { using InputError::InputError; };
struct VerticalLine : InputError { using InputError::InputError; };
struct DegenerateBase : InputError { using InputError::InputError; };
struct DegenerateConfiguration : InputError { using InputError::InputError; };
struct BranchDegeneracy : InputError { using InputError::InputError; };
struct OnThetaDivisor : InputError { using InputError::InputError; };
struct ContourTooClose : InputError { using InputError::InputError; };

struct ContinuationFailure : NumericError { using NumericError::NumericError; };
struct RootDeflationFailure : NumericError { using NumericError::NumericError; };
struct BasisConstructionFailure : NumericError { using NumericError::NumericError; };
struct QuadratureStall : NumericError { using NumericError::NumericError; };
struct NonIntegralSolution : NumericError { using NumericError::NumericError; };
struct TruncationInsufficient : NumericError { using NumericError::NumericError; };
struct CharacteristicAmbiguous : NumericError { using NumericError::NumericError; };
struct DegenerateNormalization : NumericError { using NumericError::NumericError; };

// ---------------------------------------------------------------------------
// Deterministic RNG.  std::uniform_real_distribution is not guaranteed to be
// bit-identical across standard libraries, so we draw doubles ourselves.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    // xorshift* variant; fixed algorithm, platform independent.
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545f4914f6cdd1dull;
  }

  // Uniform in [0,1) with 53-bit resolution.
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  cplx in_disc(cplx center, double radius) {
    double r = radius * std::sqrt(uniform());
    double th = uniform(0.0, 2.0 * pi);
    return center + std::polar(r, th);
  }

  cplx in_annulus(cplx center, double r0, double r1) {
    double r = std::sqrt(uniform(r0 * r0, r1 * r1));
    double th = uniform(0.0, 2.0 * pi);
    return center + std::polar(r, th);
  }

  int below(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

 private:
  std::uint64_t state_;
};

}  // namespace trigal
