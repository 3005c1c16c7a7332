#pragma once

// The Markov multiplier Lambda_phi f(x) = E[f(x I_phi)] on polynomials and
// theta-shifted polynomials, and exact checks of the intertwining identities.

#include <cmath>
#include <concepts>
#include <functional>
#include <vector>

#include "bernstein.hpp"
#include "distributions.hpp"
#include "spectral.hpp"

namespace glsemi {

template <std::floating_point Real>
class Intertwiner {
 public:
  using Coef = SignedLog<Real>;

  explicit Intertwiner(const SpectralModel<Real>& spec, int depth = SpectralModel<Real>::kDefaultDepth)
      : spec_(&spec) {
    const auto& model = spec.model();
    const Real theta = model.theta();
    WphiEvaluator<Real> w(model);
    log_w1t_ = w.log_w(std::complex<Real>(1 + theta, 0)).first.real();
    CompensatedSum<Real> plain, shifted;
    log_mult_.push_back(0);
    log_mult_dag_.push_back(std::lgamma(1 + theta) - log_w1t_);
    for (int k = 1; k <= depth; ++k) {
      plain.add(std::log(Real(k) / model.phi(Real(k))));
      shifted.add(std::log((Real(k) + theta) / model.phi(Real(k) + theta)));
      log_mult_.push_back(plain.value());
      log_mult_dag_.push_back(log_mult_dag_[0] + shifted.value());
    }
  }

  /// M_{I_phi}(k+1) = k!/W_phi(k+1)
  Coef multiplier(int k) const { return Coef::from_log(log_mult_.at(static_cast<std::size_t>(k))); }
  /// M_{I_phi}(k+1+theta) = Gamma(k+1+theta)/W_phi(k+1+theta)
  Coef multiplier_dag(int k) const {
    return Coef::from_log(log_mult_dag_.at(static_cast<std::size_t>(k)));
  }
  Real log_wphi_one_plus_theta() const { return log_w1t_; }

  Poly<Real> apply(const Poly<Real>& f) const {
    std::vector<Coef> c;
    for (int k = 0; k <= f.degree(); ++k) c.push_back(f.coef(k) * multiplier(k));
    return Poly<Real>(std::move(c));
  }

  ThetaShiftedPoly<Real> apply(const ThetaShiftedPoly<Real>& f) const {
    std::vector<Coef> c;
    for (int k = 0; k <= f.q.degree(); ++k) c.push_back(f.q.coef(k) * multiplier_dag(k));
    return {Poly<Real>(std::move(c)), f.theta};
  }

  /// Lambda L_n, checked against P_n / c_n(-theta).
  Poly<Real> lambda_of_laguerre(int n) const {
    const Poly<Real> lhs = apply(spec_->laguerre(n));
    const Poly<Real> rhs = Real(1) / frakc<Real>(n, -spec_->theta()) * spec_->eigenpoly(n);
    const Real dev = max_coef_deviation(lhs, rhs);
    if (dev > Real(1e-10))
      throw IdentityViolation("Lambda L_n differs from P_n / c_n(-theta) by " +
                              std::to_string(static_cast<double>(dev)));
    return lhs;
  }

  /// Lambda L^dag_n, checked against P^dag_n Gamma(1+theta) / (W_phi(1+theta) c_n(theta)).
  ThetaShiftedPoly<Real> lambda_of_laguerre_dag(int n) const {
    const auto lhs = apply(spec_->laguerre_dag(n));
    const Real theta = spec_->theta();
    const Real scale =
        std::exp(std::lgamma(1 + theta) - log_w1t_) / frakc<Real>(n, theta);
    const Poly<Real> rhs = scale * spec_->eigenpoly_dag(n).q;
    const Real dev = max_coef_deviation(lhs.q, rhs);
    if (dev > Real(1e-10))
      throw IdentityViolation("Lambda L^dag_n differs from the scaled P^dag_n by " +
                              std::to_string(static_cast<double>(dev)));
    return lhs;
  }

  /// max relative coefficient deviation between P_t Lambda f and Lambda Q_t f.
  Real verify(const Poly<Real>& f, Real t) const {
    const Poly<Real> lhs = spec_->apply(apply(f), t, SemigroupKind::P);
    const Poly<Real> rhs = apply(spec_->apply(f, t, SemigroupKind::Q));
    return max_coef_deviation(lhs, rhs);
  }

  /// Killed variant: P^dag_t Lambda f against Lambda Q^dag_t f.
  Real verify(const ThetaShiftedPoly<Real>& f, Real t) const {
    const auto lhs = spec_->apply(apply(f), t, SemigroupKind::P_dag);
    const auto rhs = apply(spec_->apply(f, t, SemigroupKind::Q_dag));
    return max_coef_deviation(lhs.q, rhs.q);
  }

  /// <Lambda g, m_n>_m and <g, L_n>_{Gamma(1-theta)}; equal by duality.
  std::pair<Real, Real> adjoint_pair(const Poly<Real>& g, int n) const {
    const auto& p = spec_->engine(SemigroupKind::P);
    const auto& q = spec_->engine(SemigroupKind::Q);
    const Poly<Real> lg = apply(g);
    std::vector<Coef> left, right;
    for (int k = 0; k <= lg.degree(); ++k) left.push_back(lg.coef(k) * p.pairing(k, n));
    const Poly<Real> ln = spec_->laguerre(n);
    for (int j = 0; j <= g.degree(); ++j)
      for (int k = 0; k <= ln.degree(); ++k)
        right.push_back(g.coef(j) * ln.coef(k) * q.moment(j + k));
    return {signed_log_sum(left).value(), signed_log_sum(right).value()};
  }

 private:
  const SpectralModel<Real>* spec_;
  Real log_w1t_ = 0;
  std::vector<Real> log_mult_;
  std::vector<Real> log_mult_dag_;
};

/// sum_j w_j f(x node_j), the Gauss approximation of E[f(x I_phi)].
template <std::floating_point Real, typename F>
Real lambda_fn(const GaussRule<Real>& rule, F&& f, Real x) {
  return rule.apply([&](Real node) { return f(x * node); });
}

}  // namespace glsemi
