#pragma once

// Scalar plumbing shared by every module: signed log-magnitudes, compensated
// summation, log-gamma on the complex plane and the error types.

#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace glsemi {

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct NoRootInUnitInterval : std::runtime_error {
  NoRootInUnitInterval(const std::string& what, double psi_half)
      : std::runtime_error(what), psi_at_half(psi_half) {}
  double psi_at_half;
};
struct ConvergenceFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SlowDecay : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IllConditioned : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NegativeNormResidual : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IdentityViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ClockOverrun : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <std::floating_point Real>
constexpr Real pi_v = std::numbers::pi_v<Real>;

/// A real number stored as sign and log|x|. Products and quotients are exact
/// in the log domain; sums go through value() and are the caller's business.
template <std::floating_point Real>
struct SignedLog {
  int sign = 0;
  Real log_abs = -std::numeric_limits<Real>::infinity();

  static SignedLog from_value(Real x) {
    if (x == Real(0)) return {};
    return {x > 0 ? 1 : -1, std::log(std::abs(x))};
  }
  static SignedLog from_log(Real log_abs, int sign = 1) { return {sign, log_abs}; }

  Real value() const { return sign == 0 ? Real(0) : Real(sign) * std::exp(log_abs); }
  bool is_zero() const { return sign == 0; }

  SignedLog operator-() const { return {-sign, log_abs}; }
  friend SignedLog operator*(SignedLog a, SignedLog b) {
    if (a.sign == 0 || b.sign == 0) return {};
    return {a.sign * b.sign, a.log_abs + b.log_abs};
  }
  friend SignedLog operator/(SignedLog a, SignedLog b) {
    if (b.sign == 0) throw DomainError("SignedLog: division by zero");
    if (a.sign == 0) return {};
    return {a.sign * b.sign, a.log_abs - b.log_abs};
  }
};

/// Neumaier compensated accumulator.
template <typename T>
class CompensatedSum {
 public:
  void add(T x) {
    const T t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
    abs_ += std::abs(x);
  }
  T value() const { return sum_ + comp_; }
  /// Sum of |terms|; the natural scale for cancellation checks.
  auto magnitude() const { return abs_; }

 private:
  T sum_{};
  T comp_{};
  decltype(std::abs(T{})) abs_{};
};

template <std::floating_point Real>
Real log_factorial(int n) {
  return std::lgamma(Real(n) + Real(1));
}

template <std::floating_point Real>
Real log_binomial(int n, int k) {
  if (k < 0 || k > n) return -std::numeric_limits<Real>::infinity();
  return log_factorial<Real>(n) - log_factorial<Real>(k) - log_factorial<Real>(n - k);
}

/// Binomial coefficient as a floating value (exact for the small arguments used here).
template <std::floating_point Real>
Real binomial(int n, int k) {
  if (k < 0 || k > n) return Real(0);
  Real r = 1;
  for (int i = 1; i <= k; ++i) r = r * Real(n - k + i) / Real(i);
  return r;
}

/// log Gamma(z) on the complex plane (Re z > 0 after shifting; arbitrary branch
/// of the imaginary part, which is irrelevant after exponentiation).
template <std::floating_point Real>
std::complex<Real> lgamma_complex(std::complex<Real> z) {
  using C = std::complex<Real>;
  if (z.real() <= Real(0) && z.imag() == Real(0) && z.real() == std::round(z.real()))
    throw DomainError("lgamma_complex: pole at non-positive integer");
  if (z.real() < Real(0.5)) {
    // Reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z).
    const C s = std::sin(pi_v<Real> * z);
    return std::log(pi_v<Real>) - std::log(s) - lgamma_complex(C(1) - z);
  }
  C shift(0);
  constexpr Real threshold = 16;
  while (z.real() < threshold) {
    shift += std::log(z);
    z += Real(1);
  }
  static constexpr std::array<long double, 10> bern = {
      1.0L / 6,        -1.0L / 30,         1.0L / 42,     -1.0L / 30,       5.0L / 66,
      -691.0L / 2730,  7.0L / 6,           -3617.0L / 510, 43867.0L / 798, -174611.0L / 330};
  const C inv = C(1) / z;
  const C inv2 = inv * inv;
  C series(0);
  C pow = inv;
  for (std::size_t k = 1; k <= bern.size(); ++k) {
    series += Real(bern[k - 1]) / Real((2 * k) * (2 * k - 1)) * pow;
    pow *= inv2;
  }
  const C stirling = (z - Real(0.5)) * std::log(z) - z +
                     Real(0.5) * std::log(Real(2) * pi_v<Real>) + series;
  return stirling - shift;
}

/// log Gamma(q + a) - log Gamma(q) for q > 0, free of the cancellation that
/// the plain difference suffers for large q.
template <std::floating_point Real>
Real log_gamma_ratio(Real q, Real a) {
  if (q < Real(20) || q + a < Real(20)) return std::lgamma(q + a) - std::lgamma(q);
  auto series = [](Real z) {
    static constexpr std::array<long double, 6> bern = {1.0L / 6,  -1.0L / 30, 1.0L / 42,
                                                        -1.0L / 30, 5.0L / 66,  -691.0L / 2730};
    const Real inv = Real(1) / z, inv2 = inv * inv;
    Real s = 0, pow = inv;
    for (std::size_t k = 1; k <= bern.size(); ++k) {
      s += Real(bern[k - 1]) / Real((2 * k) * (2 * k - 1)) * pow;
      pow *= inv2;
    }
    return s;
  };
  return (q + a - Real(0.5)) * std::log1p(a / q) + a * std::log(q) - a + series(q + a) - series(q);
}

/// Relative difference with an absolute floor.
template <std::floating_point Real>
Real rel_diff(Real a, Real b, Real floor = std::numeric_limits<Real>::min()) {
  const Real scale = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / scale;
}

}  // namespace glsemi
