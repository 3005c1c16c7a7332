#pragma once

// Integer moments and Mellin transforms of V_psi, I_phi, V_{T1 psi}, m_up and
// the Gamma(1 - theta) law; the invariant density by Mellin-Barnes inversion;
// Gauss rules for the law of I_phi.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <mutex>
#include <string>
#include <vector>

#include "bernstein.hpp"
#include "numeric.hpp"
#include "quadrature.hpp"

namespace glsemi {

enum class MomentKind { V_psi, I_phi, V_t1psi, m_up, gamma };

inline std::string to_string(MomentKind k) {
  switch (k) {
    case MomentKind::V_psi: return "V_psi";
    case MomentKind::I_phi: return "I_phi";
    case MomentKind::V_t1psi: return "V_t1psi";
    case MomentKind::m_up: return "m_up";
    case MomentKind::gamma: return "Gamma";
  }
  return "?";
}

inline MomentKind moment_kind_from_string(const std::string& s) {
  for (auto k : {MomentKind::V_psi, MomentKind::I_phi, MomentKind::V_t1psi, MomentKind::m_up,
                 MomentKind::gamma})
    if (s == to_string(k)) return k;
  throw DomainError("unknown moment kind '" + s + "'");
}

/// Ratio M(k+1)/M(k) for each kind; every moment sequence is a running product.
template <std::floating_point Real>
Real moment_step(const PsiModel<Real>& model, MomentKind kind, int k) {
  const Real kk = Real(k);
  switch (kind) {
    case MomentKind::V_psi: return model.psi(kk) / kk;
    case MomentKind::I_phi: return kk / model.phi(kk);
    case MomentKind::V_t1psi: return model.psi(kk + 1) / (kk + 1);
    case MomentKind::m_up: return model.psi(kk + model.theta()) / kk;
    case MomentKind::gamma: return kk - model.theta();
  }
  throw DomainError("unknown moment kind");
}

/// Lazily extended table of log M(n+1), n = 0, 1, ...
template <std::floating_point Real>
class MomentTable {
 public:
  MomentTable(const PsiModel<Real>& model, MomentKind kind) : model_(&model), kind_(kind) {
    logs_.push_back(0);
  }

  MomentKind kind() const { return kind_; }

  SignedLog<Real> at(int n) const {
    if (n < 0) throw DomainError("moment index must be >= 0");
    std::lock_guard lock(mutex_);
    while (static_cast<int>(logs_.size()) <= n) {
      const int k = static_cast<int>(logs_.size());
      const Real step = moment_step(*model_, kind_, k);
      if (!(step > 0)) throw DomainError("nonpositive moment ratio in " + to_string(kind_));
      sum_.add(std::log(step));
      logs_.push_back(sum_.value());
    }
    return SignedLog<Real>::from_log(logs_[static_cast<std::size_t>(n)]);
  }

  Real value(int n) const { return at(n).value(); }

 private:
  const PsiModel<Real>* model_;
  MomentKind kind_;
  mutable std::mutex mutex_;
  mutable std::vector<Real> logs_;
  mutable CompensatedSum<Real> sum_;
};

/// M(n+1) for the given kind (uncached).
template <std::floating_point Real>
SignedLog<Real> moments(const PsiModel<Real>& model, MomentKind kind, int n) {
  return MomentTable<Real>(model, kind).at(n);
}

/// Mellin transform of V_psi: Gamma(z-theta) W_phi(z) / (Gamma(1-theta) Gamma(z)).
template <std::floating_point Real>
class MellinV {
 public:
  using Complex = std::complex<Real>;

  explicit MellinV(const PsiModel<Real>& model) : model_(&model), w_(model) {
    log_norm_ = std::lgamma(1 - model.theta());
  }

  /// `tol` is the relative accuracy asked of W_phi (0 selects the default).
  Complex log_value(Complex z, Real tol = 0) {
    const Real theta = model_->theta();
    if (!(z.real() > theta)) throw DomainError("mellin_V: requires Re z > theta");
    return lgamma_complex(z - theta) + w_.log_w(z, 0, 1'000'000, tol).first - log_norm_ -
           lgamma_complex(z);
  }

  Complex operator()(Complex z, Real tol = 0) { return std::exp(log_value(z, tol)); }

  WphiEvaluator<Real>& wphi() { return w_; }

 private:
  const PsiModel<Real>* model_;
  WphiEvaluator<Real> w_;
  Real log_norm_ = 0;
};

template <std::floating_point Real>
std::complex<Real> mellin_V(const PsiModel<Real>& model, std::complex<Real> z) {
  MellinV<Real> m(model);
  return m(z);
}

template <std::floating_point Real>
struct DensityValue {
  Real value = 0;
  Real err = 0;
};

/// Invariant density by trapezoidal Mellin-Barnes inversion on Re z = c.
/// Contour samples are computed once and reused for every x.
template <std::floating_point Real>
class DensityInverter {
 public:
  using Complex = std::complex<Real>;

  struct Options {
    Real c_offset = Real(0.5);  // c = theta + c_offset
    Real h = Real(1) / 64;
    Real b_max = 200;
    Real cutoff = Real(1e-17);  // relative magnitude at which the contour is truncated
    Real slow_decay = Real(1e-8);
  };

  explicit DensityInverter(const PsiModel<Real>& model) : DensityInverter(model, Options{}) {}

  DensityInverter(const PsiModel<Real>& model, Options opt) : model_(&model), opt_(opt) {
    if (!model.flags().n_check) throw DomainError("density_m: model outside the recurrent class");
    c_ = model.theta() + opt.c_offset;
    MellinV<Real> mellin(model);
    const Real scale = std::abs(mellin(Complex(c_, 0)));
    const int per_unit = static_cast<int>(std::lround(1 / opt.h));
    Real window_max = 0;
    Real last = 1;
    for (int j = 0;; ++j) {
      const Real b = Real(j) * opt.h;
      // Samples far below the peak only need matching absolute accuracy.
      const Real tol = std::clamp(Real(1e-16) / last, WphiEvaluator<Real>::default_tol(), Real(1e-3));
      const Complex v = mellin(Complex(c_, b), tol);
      last = std::abs(v) / scale;
      values_.push_back(v);
      window_max = std::max(window_max, std::abs(v) / scale);
      if (j > 0 && j % per_unit == 0) {
        tail_ = window_max;
        if (window_max < opt.cutoff) break;
        window_max = 0;
      }
      if (b >= opt.b_max) {
        if (tail_ > opt.slow_decay)
          throw SlowDecay("density_m: Mellin transform decays too slowly on the contour (tail " +
                          std::to_string(static_cast<double>(tail_)) + ")");
        break;
      }
    }
    scale_ = scale;
    // Leading small-x behaviour m(x) ~ r0 x^{-theta}: residue of the Gamma(z - theta) pole.
    const Real theta = model.theta();
    const Real log_w1t = mellin.wphi().log_w(Complex(1 + theta, 0)).first.real();
    r0_ = std::exp(log_w1t - std::log(model.phi(theta)) - std::lgamma(1 - theta) -
                   std::lgamma(theta));
  }

  Real contour_abscissa() const { return c_; }
  Real truncation() const { return Real(values_.size() - 1) * opt_.h; }
  std::size_t samples() const { return values_.size(); }
  Real small_x_coefficient() const { return r0_; }

  DensityValue<Real> operator()(Real x) const {
    if (!(x > 0)) throw DomainError("density_m: requires x > 0");
    const Real lx = std::log(x);
    CompensatedSum<Real> full, coarse;
    for (std::size_t j = 0; j < values_.size(); ++j) {
      const Real b = Real(j) * opt_.h;
      const Real w = j == 0 ? Real(0.5) : Real(1);
      const Real term = w * (std::polar(Real(1), -b * lx) * values_[j]).real();
      full.add(term);
      if (j % 2 == 0) coarse.add(term);
    }
    const Real pref = std::exp(-c_ * lx) / pi_v<Real>;
    const Real v = pref * opt_.h * full.value();
    const Real v2 = pref * 2 * opt_.h * coarse.value();
    const Real tail = pref * tail_ * scale_;
    const Real rounding = pref * opt_.h * full.magnitude() * std::numeric_limits<Real>::epsilon();
    return {std::max(v, Real(0)), std::abs(v - v2) + tail + rounding};
  }

  /// int_0^inf x^p m(x) dx: analytic head on (0, x_lo], Gauss-Legendre in log x
  /// beyond, advancing until the panel contributions are negligible.
  Real integrate_power(Real p, Real x_lo = Real(1e-5)) const {
    const Real theta = model_->theta();
    const Real head = r0_ * std::pow(x_lo, p + 1 - theta) / (p + 1 - theta);
    const Real panel = Real(0.25);
    CompensatedSum<Real> total;
    total.add(head);
    Real s = std::log(x_lo);
    int quiet = 0;
    for (int i = 0; i < 4000 && quiet < 8; ++i) {
      const Real piece = integrate_gl<Real>(
          [&](Real u) {
            const Real x = std::exp(u);
            return (*this)(x).value * std::pow(x, p + 1);
          },
          s, s + panel, 1, 12);
      total.add(piece);
      s += panel;
      quiet = (std::abs(piece) < Real(1e-17) * std::abs(total.value()) && s > 0) ? quiet + 1 : 0;
    }
    return total.value();
  }

 private:
  const PsiModel<Real>* model_;
  Options opt_;
  Real c_ = 0;
  Real scale_ = 1;
  Real tail_ = 0;
  Real r0_ = 0;
  std::vector<Complex> values_;
};

template <std::floating_point Real>
DensityValue<Real> density_m(const PsiModel<Real>& model, Real x) {
  return DensityInverter<Real>(model)(x);
}

template <std::floating_point Real>
struct GaussRule {
  std::vector<Real> nodes;
  std::vector<Real> weights;

  template <typename F>
  Real apply(F&& f) const {
    CompensatedSum<Real> s;
    for (std::size_t i = 0; i < nodes.size(); ++i) s.add(weights[i] * f(nodes[i]));
    return s.value();
  }
};

/// Gauss rule for a positive measure from its raw moments mu_0..mu_{2k-1}
/// (Chebyshev algorithm in long double, Golub-Welsch on the Jacobi matrix).
/// A vanishing recurrence coefficient means the measure has fewer support
/// points than k; the rule is truncated there.
inline GaussRule<long double> gauss_rule_from_moments(const std::vector<long double>& mu, int k) {
  using L = long double;
  if (k < 1 || static_cast<int>(mu.size()) < 2 * k)
    throw DomainError("gauss rule: need 2k moments");
  std::vector<L> alpha, beta;
  std::vector<L> sig_prev(2 * k, 0), sig(mu.begin(), mu.begin() + 2 * k);
  alpha.push_back(mu[1] / mu[0]);
  beta.push_back(mu[0]);
  const L tiny = 1e-14L;
  for (int j = 1; j < k; ++j) {
    std::vector<L> next(2 * k, 0);
    for (int l = j; l < 2 * k - j; ++l)
      next[l] = sig[l + 1] - alpha[j - 1] * sig[l] - beta[j - 1] * sig_prev[l];
    const L bj = next[j] / sig[j - 1];
    const L scale = std::max(L(1), alpha[j - 1] * alpha[j - 1]);
    if (bj <= tiny * scale) {
      if (bj < -tiny * scale)
        throw IllConditioned("gauss rule: negative recurrence coefficient at order " +
                             std::to_string(j));
      break;
    }
    alpha.push_back(next[j + 1] / next[j] - sig[j] / sig[j - 1]);
    beta.push_back(bj);
    sig_prev = std::move(sig);
    sig = std::move(next);
  }
  const int n = static_cast<int>(alpha.size());
  using Vec = Eigen::Matrix<L, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<L, Eigen::Dynamic, Eigen::Dynamic>;
  Vec diag(n), sub(std::max(n - 1, 0));
  for (int i = 0; i < n; ++i) diag(i) = alpha[i];
  for (int i = 0; i + 1 < n; ++i) sub(i) = std::sqrt(beta[i + 1]);
  GaussRule<L> rule;
  if (n == 1) {
    rule.nodes = {diag(0)};
    rule.weights = {mu[0]};
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw IllConditioned("gauss rule: eigen solver failed");
  for (int i = 0; i < n; ++i) {
    const L v0 = es.eigenvectors()(0, i);
    rule.nodes.push_back(es.eigenvalues()(i));
    rule.weights.push_back(mu[0] * v0 * v0);
  }
  for (int i = 0; i < n; ++i) {
    if (!(rule.weights[i] > 0)) throw IllConditioned("gauss rule: nonpositive weight");
    if (i > 0 && !(rule.nodes[i] > rule.nodes[i - 1]))
      throw IllConditioned("gauss rule: nodes not strictly increasing");
  }
  return rule;
}

/// k-point Gauss rule for the law of I_phi (k <= 8), checked against the
/// moments it is supposed to reproduce.
template <std::floating_point Real>
GaussRule<Real> gauss_rule_iphi(const PsiModel<Real>& model, int k) {
  if (k < 1 || k > 8) throw DomainError("gauss_rule_iphi: order must be in [1, 8]");
  MomentTable<Real> table(model, MomentKind::I_phi);
  std::vector<long double> mu;
  for (int j = 0; j < 2 * k; ++j) mu.push_back(static_cast<long double>(table.value(j)));
  const auto rule = gauss_rule_from_moments(mu, k);
  const int used = static_cast<int>(rule.nodes.size());
  for (int j = 0; j < 2 * used; ++j) {
    long double s = 0;
    for (int i = 0; i < used; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], j);
    if (std::abs(s - mu[j]) > 1e-8L * mu[j])
      throw IllConditioned("gauss rule: moment " + std::to_string(j) + " not reproduced");
  }
  GaussRule<Real> out;
  for (int i = 0; i < used; ++i) {
    if (!(rule.nodes[i] > 0)) throw IllConditioned("gauss rule: nonpositive node");
    out.nodes.push_back(static_cast<Real>(rule.nodes[i]));
    out.weights.push_back(static_cast<Real>(rule.weights[i]));
  }
  return out;
}

}  // namespace glsemi
