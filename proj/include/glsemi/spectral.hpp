#pragma once

// Polynomial spectral calculus for the generalized Laguerre semigroups P, P^dag
// and their classical counterparts Q, Q^dag. A semigroup of this family acts on
// polynomials through the integer values psi(1), psi(2), ... of its exponent,
// so one engine type serves all four.

#include <cmath>
#include <concepts>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bernstein.hpp"
#include "numeric.hpp"
#include "poly.hpp"

namespace glsemi {

/// c_n(u) = Gamma(1+u) n! / Gamma(n+1+u), u > -1.
template <std::floating_point Real>
Real frakc(int n, Real u) {
  if (!(u > -1)) throw DomainError("c_n(u) requires u > -1");
  return std::exp(std::lgamma(1 + u) + std::lgamma(Real(n) + 1) - std::lgamma(Real(n) + 1 + u));
}

/// Semigroup with eigenpolynomials P_n^psi, invariant law with moments
/// M(k+1) = prod_{i<=k} psi(i)/i, and co-eigen pairings
/// <p_k, m_n> = (-1)^n C(k,n) M(k+1).
template <std::floating_point Real>
class PolyEngine {
 public:
  using Coef = SignedLog<Real>;

  PolyEngine(const std::function<Real(Real)>& psi, int depth) {
    log_m_.push_back(0);
    CompensatedSum<Real> s;
    for (int k = 1; k <= 2 * depth + 1; ++k) {
      const Real v = psi(Real(k));
      if (!(v > 0)) throw DomainError("polynomial engine: psi(k) must be positive");
      s.add(std::log(v / Real(k)));
      log_m_.push_back(s.value());
    }
    depth_ = depth;
  }

  int depth() const { return depth_; }

  /// M(k+1), k <= 2 depth + 1.
  Coef moment(int k) const {
    check(k, 2 * depth_ + 1);
    return Coef::from_log(log_m_[static_cast<std::size_t>(k)]);
  }

  Poly<Real> eigenpoly(int n) const {
    check(n, depth_);
    std::vector<Coef> c;
    for (int k = 0; k <= n; ++k)
      c.push_back(Coef::from_log(log_binomial<Real>(n, k) - log_m_[static_cast<std::size_t>(k)],
                                 k % 2 ? -1 : 1));
    return Poly<Real>(std::move(c));
  }

  Coef pairing(int k, int n) const {
    check(k, depth_);
    if (n < 0 || n > k) return {};
    return Coef::from_log(log_binomial<Real>(k, n) + log_m_[static_cast<std::size_t>(k)],
                          n % 2 ? -1 : 1);
  }

  /// Coefficients of f in the eigenbasis by back-substitution.
  std::vector<Coef> to_eigenbasis_triangular(const Poly<Real>& f) const {
    const int d = f.degree();
    check(d, depth_);
    std::vector<Coef> c(static_cast<std::size_t>(std::max(d + 1, 0)));
    for (int n = d; n >= 0; --n) {
      std::vector<Coef> terms{f.coef(n)};
      for (int m = n + 1; m <= d; ++m)
        terms.push_back(-(c[static_cast<std::size_t>(m)] * eigen_coef(m, n)));
      c[static_cast<std::size_t>(n)] = signed_log_sum(terms) / eigen_coef(n, n);
    }
    return c;
  }

  /// Coefficients of f in the eigenbasis through the co-eigen pairings.
  std::vector<Coef> to_eigenbasis_pairing(const Poly<Real>& f) const {
    const int d = f.degree();
    check(d, depth_);
    std::vector<Coef> c;
    for (int n = 0; n <= d; ++n) {
      std::vector<Coef> terms;
      for (int k = n; k <= d; ++k) terms.push_back(f.coef(k) * pairing(k, n));
      c.push_back(signed_log_sum(terms));
    }
    return c;
  }

  /// sum_n e^{-n t} c_n P_n
  Poly<Real> from_eigenbasis(const std::vector<Coef>& c, Real t = 0) const {
    const int d = static_cast<int>(c.size()) - 1;
    std::vector<Coef> out;
    for (int j = 0; j <= d; ++j) {
      std::vector<Coef> terms;
      for (int n = j; n <= d; ++n)
        terms.push_back(c[static_cast<std::size_t>(n)] * eigen_coef(n, j) *
                        Coef::from_log(-Real(n) * t));
      out.push_back(signed_log_sum(terms));
    }
    return Poly<Real>(std::move(out));
  }

  /// sum_n e^{-nt} <f, m_n> P_n with the finite mode sum done in closed form:
  /// sum_n (-1)^{n+j} C(k,n) C(n,j) e^{-nt} = C(k,j) e^{-jt} (1 - e^{-t})^{k-j},
  /// so P_t p_k = sum_j C(k,j) e^{-jt} (1 - e^{-t})^{k-j} M(k+1)/M(j+1) p_j
  /// and no alternating sums remain.
  Poly<Real> apply(const Poly<Real>& f, Real t) const {
    if (t < 0) throw DomainError("semigroup time must be >= 0");
    if (f.is_zero() || t == 0) return f;
    const int d = f.degree();
    check(d, depth_);
    const Real log_gap = std::log(-std::expm1(-t));
    std::vector<Coef> out;
    for (int j = 0; j <= d; ++j) {
      std::vector<Coef> terms;
      for (int k = j; k <= d; ++k)
        terms.push_back(f.coef(k) *
                        Coef::from_log(log_binomial<Real>(k, j) - Real(j) * t +
                                       Real(k - j) * log_gap + log_m_[static_cast<std::size_t>(k)] -
                                       log_m_[static_cast<std::size_t>(j)]));
      out.push_back(signed_log_sum(terms));
    }
    return Poly<Real>(std::move(out));
  }

  /// The same semigroup through explicit eigen-coordinates (ill-conditioned
  /// for small t and high degree; kept as a cross-check).
  Poly<Real> apply_modal(const Poly<Real>& f, Real t) const {
    if (t < 0) throw DomainError("semigroup time must be >= 0");
    if (f.is_zero()) return f;
    return from_eigenbasis(to_eigenbasis_triangular(f), t);
  }

  /// Integral of f against the invariant law.
  Coef mean(const Poly<Real>& f) const {
    std::vector<Coef> terms;
    for (int k = 0; k <= f.degree(); ++k) terms.push_back(f.coef(k) * moment(k));
    return signed_log_sum(terms);
  }

  /// <f, g> in L^2 of the invariant law, with the sum of |terms| for scale.
  std::pair<Real, Real> inner(const Poly<Real>& f, const Poly<Real>& g) const {
    std::vector<Coef> terms;
    Real magnitude = 0;
    for (int j = 0; j <= f.degree(); ++j)
      for (int k = 0; k <= g.degree(); ++k) {
        const Coef t = f.coef(j) * g.coef(k) * moment(j + k);
        terms.push_back(t);
        if (!t.is_zero()) magnitude += std::exp(t.log_abs);
      }
    return {signed_log_sum(terms).value(), magnitude};
  }

 private:
  Coef eigen_coef(int n, int k) const {
    return Coef::from_log(log_binomial<Real>(n, k) - log_m_[static_cast<std::size_t>(k)],
                          k % 2 ? -1 : 1);
  }
  void check(int k, int cap) const {
    if (k > cap)
      throw DomainError("polynomial degree " + std::to_string(k) + " beyond engine depth " +
                        std::to_string(cap));
  }

  int depth_ = 0;
  std::vector<Real> log_m_;
};

enum class SemigroupKind { P, P_dag, Q, Q_dag };
enum class PairingKind { m, m_dag };
enum class BesselKind { eigen, coeigen };
enum class EigenRoute { triangular, pairing };

template <std::floating_point Real>
struct ConvergenceReport {
  Real lhs = 0;
  Real rhs = 0;
  Real constant = 0;
  bool violated = false;
};

/// Classical Laguerre polynomial L_n for index -theta.
template <std::floating_point Real>
Poly<Real> laguerre(Real theta, int n) {
  std::vector<SignedLog<Real>> c;
  for (int k = 0; k <= n; ++k)
    c.push_back(SignedLog<Real>::from_log(std::lgamma(Real(n) + 1 - theta) -
                                              std::lgamma(Real(k) + 1 - theta) -
                                              log_factorial<Real>(n - k) - log_factorial<Real>(k),
                                          k % 2 ? -1 : 1));
  return Poly<Real>(std::move(c));
}

/// L^dag_n = x^theta sum_k (-1)^k Gamma(n+1+theta)/(Gamma(k+1+theta)(n-k)! k!) x^k.
template <std::floating_point Real>
ThetaShiftedPoly<Real> laguerre_dag(Real theta, int n) {
  std::vector<SignedLog<Real>> c;
  for (int k = 0; k <= n; ++k)
    c.push_back(SignedLog<Real>::from_log(std::lgamma(Real(n) + 1 + theta) -
                                              std::lgamma(Real(k) + 1 + theta) -
                                              log_factorial<Real>(n - k) - log_factorial<Real>(k),
                                          k % 2 ? -1 : 1));
  return {Poly<Real>(std::move(c)), theta};
}

/// Spectral data of one model: the engines for P (psi), P^up (psi(. + theta)),
/// Q (u(u - theta)) and Q^up (u(u + theta)). Immutable after construction.
template <std::floating_point Real>
class SpectralModel {
 public:
  using Coef = SignedLog<Real>;
  static constexpr int kDefaultDepth = 40;

  explicit SpectralModel(const PsiModel<Real>& model, int depth = kDefaultDepth)
      : model_(model),
        classical_(classical_quadruplet(static_cast<double>(model.theta()))),
        p_([&](Real u) { return model_.psi(u); }, depth),
        p_up_([&](Real u) { return model_.psi(u + model_.theta()); }, depth),
        q_([&](Real u) { return classical_psi(u); }, depth),
        q_up_([&](Real u) { return classical_psi(u + model_.theta()); }, depth) {}

  SpectralModel(const SpectralModel&) = delete;
  SpectralModel& operator=(const SpectralModel&) = delete;

  const PsiModel<Real>& model() const { return model_; }
  Real theta() const { return model_.theta(); }
  const PolyEngine<Real>& engine(SemigroupKind k) const {
    switch (k) {
      case SemigroupKind::P: return p_;
      case SemigroupKind::P_dag: return p_up_;
      case SemigroupKind::Q: return q_;
      case SemigroupKind::Q_dag: return q_up_;
    }
    throw DomainError("unknown semigroup");
  }

  Poly<Real> laguerre(int n) const { return glsemi::laguerre<Real>(theta(), n); }
  ThetaShiftedPoly<Real> laguerre_dag(int n) const { return glsemi::laguerre_dag<Real>(theta(), n); }

  Poly<Real> eigenpoly(int n) const { return p_.eigenpoly(n); }
  ThetaShiftedPoly<Real> eigenpoly_dag(int n) const { return {p_up_.eigenpoly(n), theta()}; }

  /// <p_k, m_n>_m (variant m) or <x^theta p_k, m^dag_n>_m (variant m_dag).
  Real pairing(int k, int n, PairingKind v) const {
    return (v == PairingKind::m ? p_ : p_up_).pairing(k, n).value();
  }

  std::vector<Real> to_eigenbasis(const Poly<Real>& f, PairingKind v,
                                  EigenRoute route = EigenRoute::triangular) const {
    const auto& e = v == PairingKind::m ? p_ : p_up_;
    const auto c =
        route == EigenRoute::triangular ? e.to_eigenbasis_triangular(f) : e.to_eigenbasis_pairing(f);
    std::vector<Real> out;
    for (const auto& x : c) out.push_back(x.value());
    return out;
  }

  Poly<Real> apply(const Poly<Real>& f, Real t, SemigroupKind which) const {
    if (which == SemigroupKind::P_dag || which == SemigroupKind::Q_dag)
      throw DomainError("P_dag/Q_dag act on theta-shifted polynomials");
    return engine(which).apply(f, t);
  }

  /// P^dag_t (x^theta q) = e^{-theta t} x^theta P^up_t q, likewise for Q^dag.
  ThetaShiftedPoly<Real> apply(const ThetaShiftedPoly<Real>& f, Real t, SemigroupKind which) const {
    if (which == SemigroupKind::P || which == SemigroupKind::Q)
      throw DomainError("P/Q act on plain polynomials");
    const Poly<Real> inner = engine(which).apply(f.q, t);
    return {Coef::from_log(-theta() * t) * inner, theta()};
  }

  Real stationary_mean(const Poly<Real>& f) const { return p_.mean(f).value(); }

  /// <f, g> in L^2(m); NegativeNormResidual when a square comes out negative
  /// beyond rounding of its own terms.
  Real inner_m(const Poly<Real>& f, const Poly<Real>& g) const { return p_.inner(f, g).first; }

  Real norm_m_squared(const Poly<Real>& f) const {
    const auto [v, magnitude] = p_.inner(f, f);
    if (v < 0) {
      if (v < -Real(1e-12) * std::max(Real(1), magnitude))
        throw NegativeNormResidual("norm_m: negative squared norm " +
                                   std::to_string(static_cast<double>(v)));
      return 0;
    }
    return v;
  }
  Real norm_m(const Poly<Real>& f) const { return std::sqrt(norm_m_squared(f)); }

  /// Partial sums of the two Bessel series up to index N.
  Real bessel_partial(const Poly<Real>& f, int N, BesselKind which) const {
    CompensatedSum<Real> s;
    if (which == BesselKind::eigen) {
      for (int n = 0; n <= N; ++n) {
        const Real ip = inner_m(f, eigenpoly(n));
        s.add(ip * ip / frakc<Real>(n, -theta()));
      }
      return s.value();
    }
    const auto b = model_.frakb();
    if (!b) throw DomainError("coeigen Bessel sum requires the constant b (sigma^2 > 0, finite double tail)");
    const auto c = p_.to_eigenbasis_pairing(f);
    for (int n = 0; n <= N && n < static_cast<int>(c.size()); ++n) {
      const Real v = c[static_cast<std::size_t>(n)].value();
      s.add(frakc<Real>(n, *b) * v * v);
    }
    return s.value();
  }

  /// sqrt((b + 1)/(1 - theta))
  Real convergence_constant() const {
    const auto b = model_.frakb();
    if (!b) throw DomainError("convergence bound requires the constant b");
    return std::sqrt((*b + 1) / (1 - theta()));
  }

  /// Only asserted for b >= 0; DomainError otherwise.
  ConvergenceReport<Real> convergence_check(const Poly<Real>& f, Real t) const {
    ConvergenceReport<Real> r;
    if (const auto b = model_.frakb(); b && *b < 0)
      throw DomainError("convergence bound is only asserted for b >= 0");
    r.constant = convergence_constant();
    const Poly<Real> mean = Poly<Real>::from_values({stationary_mean(f)});
    r.lhs = norm_m(apply(f, t, SemigroupKind::P) - mean);
    r.rhs = r.constant * std::exp(-t) * norm_m(f - mean);
    r.violated = r.lhs > r.rhs * (1 + Real(1e-10));
    return r;
  }

 private:
  Real classical_psi(Real u) const { return laplace_exponent<Real>(classical_, u); }

  PsiModel<Real> model_;
  LevyQuadruplet classical_;
  PolyEngine<Real> p_, p_up_, q_, q_up_;
};

}  // namespace glsemi
