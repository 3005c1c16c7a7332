#pragma once

#include <cmath>
#include <concepts>
#include <utility>
#include <vector>

#include "numeric.hpp"

namespace glsemi {

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
template <std::floating_point Real>
std::pair<std::vector<Real>, std::vector<Real>> gauss_legendre(int n) {
  std::vector<Real> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Real z = std::cos(pi_v<Real> * (Real(i) + Real(0.75)) / (Real(n) + Real(0.5)));
    Real dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      Real p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const Real p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      const Real dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 4 * std::numeric_limits<Real>::epsilon()) break;
    }
    x[static_cast<std::size_t>(i)] = z;
    w[static_cast<std::size_t>(i)] = 2 / ((1 - z * z) * dp * dp);
  }
  return {x, w};
}

/// Composite Gauss-Legendre over [a, b] with `panels` equal panels.
template <std::floating_point Real, typename F>
Real integrate_gl(F&& f, Real a, Real b, int panels, int order = 10) {
  static thread_local int cached_order = -1;
  static thread_local std::pair<std::vector<Real>, std::vector<Real>> rule;
  if (cached_order != order) {
    rule = gauss_legendre<Real>(order);
    cached_order = order;
  }
  const Real h = (b - a) / panels;
  CompensatedSum<Real> s;
  for (int p = 0; p < panels; ++p) {
    const Real mid = a + (Real(p) + Real(0.5)) * h;
    for (std::size_t i = 0; i < rule.first.size(); ++i)
      s.add(rule.second[i] * f(mid + rule.first[i] * h / 2) * h / 2);
  }
  return s.value();
}

}  // namespace glsemi
