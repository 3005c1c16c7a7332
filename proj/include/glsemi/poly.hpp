#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <initializer_list>
#include <vector>

#include "numeric.hpp"

namespace glsemi {

/// Sum of signed log-magnitudes, accumulated relative to the largest term.
template <std::floating_point Real>
SignedLog<Real> signed_log_sum(const std::vector<SignedLog<Real>>& terms) {
  Real top = -std::numeric_limits<Real>::infinity();
  for (const auto& t : terms)
    if (!t.is_zero()) top = std::max(top, t.log_abs);
  if (!std::isfinite(top)) return {};
  CompensatedSum<Real> s;
  for (const auto& t : terms)
    if (!t.is_zero()) s.add(Real(t.sign) * std::exp(t.log_abs - top));
  const Real v = s.value();
  if (v == Real(0)) return {};
  return SignedLog<Real>::from_log(std::log(std::abs(v)) + top, v > 0 ? 1 : -1);
}

/// Polynomial in the monomial basis with signed log-magnitude coefficients.
template <std::floating_point Real>
class Poly {
 public:
  using Coef = SignedLog<Real>;

  Poly() = default;
  explicit Poly(std::vector<Coef> coefs) : c_(std::move(coefs)) { trim(); }

  static Poly from_values(const std::vector<Real>& a) {
    std::vector<Coef> c;
    c.reserve(a.size());
    for (Real v : a) c.push_back(Coef::from_value(v));
    return Poly(std::move(c));
  }
  static Poly from_values(std::initializer_list<Real> a) {
    return from_values(std::vector<Real>(a));
  }
  /// x^k
  static Poly monomial(int k) {
    std::vector<Coef> c(static_cast<std::size_t>(k) + 1);
    c.back() = Coef::from_value(1);
    return Poly(std::move(c));
  }

  /// Degree; -1 for the zero polynomial.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  Coef coef(int k) const {
    return (k < 0 || k > degree()) ? Coef{} : c_[static_cast<std::size_t>(k)];
  }
  Real value_of(int k) const { return coef(k).value(); }
  const std::vector<Coef>& coefs() const { return c_; }

  std::vector<Real> values() const {
    std::vector<Real> v;
    v.reserve(c_.size());
    for (const auto& c : c_) v.push_back(c.value());
    return v;
  }

  Real operator()(Real x) const {
    Real r = 0;
    for (int k = degree(); k >= 0; --k) r = r * x + c_[static_cast<std::size_t>(k)].value();
    return r;
  }

  friend Poly operator+(const Poly& a, const Poly& b) {
    const int n = std::max(a.degree(), b.degree());
    std::vector<Coef> c;
    for (int k = 0; k <= n; ++k) c.push_back(signed_log_sum<Real>({a.coef(k), b.coef(k)}));
    return Poly(std::move(c));
  }
  friend Poly operator-(const Poly& a) {
    std::vector<Coef> c;
    for (const auto& x : a.c_) c.push_back(-x);
    return Poly(std::move(c));
  }
  friend Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }
  friend Poly operator*(Coef s, const Poly& p) {
    std::vector<Coef> c;
    for (const auto& x : p.c_) c.push_back(s * x);
    return Poly(std::move(c));
  }
  friend Poly operator*(Real s, const Poly& p) { return Coef::from_value(s) * p; }

 private:
  void trim() {
    while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
  }
  std::vector<Coef> c_;
};

/// x^theta q(x).
template <std::floating_point Real>
struct ThetaShiftedPoly {
  Poly<Real> q;
  Real theta = 0;

  Real operator()(Real x) const { return std::pow(x, theta) * q(x); }
};

/// Largest relative coefficient difference, scaled by the largest coefficient of either side.
template <std::floating_point Real>
Real max_coef_deviation(const Poly<Real>& a, const Poly<Real>& b) {
  const int n = std::max(a.degree(), b.degree());
  Real dev = 0;
  for (int k = 0; k <= n; ++k) {
    const Real x = a.value_of(k), y = b.value_of(k);
    const Real scale = std::max(std::abs(x), std::abs(y));
    if (scale > 0) dev = std::max(dev, std::abs(x - y) / scale);
  }
  return dev;
}

}  // namespace glsemi
