#pragma once

// Laplace exponents of inverse local times at 0, Revuz normalizations,
// Levy-Khintchine parts, Krein atoms of the Laguerre exponent and the
// excursion-length formulas.

#include <cmath>
#include <complex>
#include <concepts>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bernstein.hpp"
#include "numeric.hpp"

namespace glsemi {

enum class SubordinatorTag { X_laguerre, Xbar_selfsimilar, tilde_X, tilde_Y, synthetic };

inline std::string to_string(SubordinatorTag t) {
  switch (t) {
    case SubordinatorTag::X_laguerre: return "X_laguerre";
    case SubordinatorTag::Xbar_selfsimilar: return "Xbar_selfsimilar";
    case SubordinatorTag::tilde_X: return "tilde_X";
    case SubordinatorTag::tilde_Y: return "tilde_Y";
    case SubordinatorTag::synthetic: return "synthetic";
  }
  return "?";
}

inline SubordinatorTag subordinator_tag_from_string(const std::string& s) {
  for (auto t : {SubordinatorTag::X_laguerre, SubordinatorTag::Xbar_selfsimilar,
                 SubordinatorTag::tilde_X, SubordinatorTag::tilde_Y})
    if (s == to_string(t)) return t;
  if (s == "Xbar") return SubordinatorTag::Xbar_selfsimilar;
  throw DomainError("unknown subordinator tag '" + s + "'");
}

/// A Laplace exponent q -> Phi(q), real and (where available) complex.
template <std::floating_point Real>
class SubordinatorExponent {
 public:
  using Complex = std::complex<Real>;

  SubordinatorExponent(SubordinatorTag tag, Real theta, std::function<Complex(Complex)> f,
                       std::function<Real(Real)> real_f = {})
      : tag_(tag), theta_(theta), f_(std::move(f)), real_f_(std::move(real_f)) {}

  /// Exponents whose only input is theta (X_laguerre, Xbar, tilde_Y).
  static SubordinatorExponent make(SubordinatorTag tag, Real theta,
                                   std::optional<Real> log_w1t = std::nullopt) {
    if (!(theta > 0 && theta < 1)) throw DomainError("theta must lie in (0, 1)");
    const Real lg1pt = std::lgamma(1 + theta), lg1mt = std::lgamma(1 - theta);
    switch (tag) {
      case SubordinatorTag::X_laguerre:
        return {tag, theta,
                [=](Complex q) {
                  return theta * std::exp(lgamma_complex(q + theta) - lgamma_complex(q) - lg1pt);
                },
                [=](Real q) { return theta * std::exp(log_gamma_ratio(q, theta) - lg1pt); }};
      case SubordinatorTag::Xbar_selfsimilar: {
        const Real c = std::exp(lg1mt - std::lgamma(theta)) * std::pow(Real(2), 1 - theta);
        return {tag, theta, [=](Complex q) { return c * std::pow(q, theta); },
                [=](Real q) { return c * std::pow(q, theta); }};
      }
      case SubordinatorTag::tilde_Y:
        return {tag, theta,
                [=](Complex q) {
                  return std::exp(lg1mt - lg1pt + lgamma_complex(q + theta) - lgamma_complex(q));
                },
                [=](Real q) { return std::exp(lg1mt - lg1pt + log_gamma_ratio(q, theta)); }};
      case SubordinatorTag::tilde_X: {
        if (!log_w1t) throw DomainError("tilde_X needs W_phi(1 + theta)");
        const Real lw = *log_w1t;
        return {tag, theta,
                [=](Complex q) {
                  return std::exp(lg1mt - lw + lgamma_complex(q + theta) - lgamma_complex(q));
                },
                [=](Real q) { return std::exp(lg1mt - lw + log_gamma_ratio(q, theta)); }};
      }
      case SubordinatorTag::synthetic: break;
    }
    throw DomainError("use the explicit constructor for synthetic exponents");
  }

  /// Exponent for a model; tilde_X picks up W_phi(1 + theta).
  static SubordinatorExponent for_model(SubordinatorTag tag, const PsiModel<Real>& model) {
    std::optional<Real> lw;
    if (tag == SubordinatorTag::tilde_X) lw = log_wphi<Real>(model, 1 + model.theta());
    return make(tag, model.theta(), lw);
  }

  SubordinatorTag tag() const { return tag_; }
  Real theta() const { return theta_; }

  Real operator()(Real q) const {
    if (!(q > 0)) throw DomainError("Laplace exponent argument must be > 0");
    return real_f_ ? real_f_(q) : f_(Complex(q, 0)).real();
  }
  Complex operator()(Complex q) const { return f_(q); }

 private:
  SubordinatorTag tag_;
  Real theta_;
  std::function<Complex(Complex)> f_;
  std::function<Real(Real)> real_f_;
};

template <std::floating_point Real>
Real phi_subordinator(SubordinatorTag tag, const PsiModel<Real>& model, Real q) {
  return SubordinatorExponent<Real>::for_model(tag, model)(q);
}

template <std::floating_point Real>
struct RevuzConstants {
  Real c_frak_m = 0;  // total Revuz mass for X under the semimartingale normalization
  Real c_m = 0;       // same for the classical Laguerre process Y
  Real max_deviation = 0;  // worst relative gap in Phi = c * tilde_Phi on the check grid
};

/// Revuz masses of the semimartingale local times, with the check
/// Phi_X = c(m_frak) tilde_Phi_X and Phi_Y = c(m) tilde_Phi_Y on a q-grid.
template <std::floating_point Real>
RevuzConstants<Real> revuz_constants(const PsiModel<Real>& model,
                                     const std::vector<Real>& grid = {Real(0.1), Real(1), Real(10)}) {
  using E = SubordinatorExponent<Real>;
  const Real theta = model.theta();
  const Real lw = log_wphi<Real>(model, 1 + theta);
  RevuzConstants<Real> r;
  r.c_frak_m = theta * std::exp(lw - std::lgamma(1 - theta) - std::lgamma(1 + theta));
  r.c_m = theta / std::tgamma(1 - theta);
  const E phi_x = E::make(SubordinatorTag::X_laguerre, theta);
  const E tx = E::make(SubordinatorTag::tilde_X, theta, lw);
  const E ty = E::make(SubordinatorTag::tilde_Y, theta);
  for (Real q : grid) {
    r.max_deviation = std::max(r.max_deviation, rel_diff(phi_x(q), r.c_frak_m * tx(q)));
    r.max_deviation = std::max(r.max_deviation, rel_diff(phi_x(q), r.c_m * ty(q)));
  }
  return r;
}

template <std::floating_point Real>
struct LkParts {
  Real delta = 0;  // killing
  Real gamma = 0;  // elasticity
};

namespace detail {
// Limit of a geometrically sampled sequence whose error is a sum of powers of
// the sampling variable: repeated Aitken delta-squared passes.
template <std::floating_point Real>
Real aitken_limit(std::vector<Real> s, int passes = 1) {
  for (int p = 0; p < passes && s.size() >= 3; ++p) {
    std::vector<Real> next;
    for (std::size_t i = 0; i + 2 < s.size(); ++i) {
      const Real a = s[i], b = s[i + 1], c = s[i + 2];
      const Real den = a + c - 2 * b;
      const Real v = c - (c - b) * (c - b) / den;
      next.push_back(den != Real(0) && std::isfinite(v) ? v : c);
    }
    s = std::move(next);
  }
  return s.back();
}
}  // namespace detail

/// delta = lim_{q -> 0} Phi(q), gamma = lim_{q -> inf} Phi(q)/q.
template <std::floating_point Real, typename F>
LkParts<Real> lk_parts(F&& phi) {
  std::vector<Real> lo, hi;
  for (int j = 0; j < 16; ++j) {
    const Real q = Real(1e-3) * std::pow(Real(0.25), Real(j));
    lo.push_back(phi(q));
    const Real Q = Real(1e3) * std::pow(Real(4), Real(j));
    hi.push_back(phi(Q) / Q);
  }
  LkParts<Real> r{detail::aitken_limit(lo), detail::aitken_limit(hi)};
  const Real snap = Real(1e-12);
  if (std::abs(r.delta) < snap) r.delta = 0;
  if (std::abs(r.gamma) < snap) r.gamma = 0;
  return r;
}

template <std::floating_point Real>
struct KreinAtom {
  Real location = 0;  // n + theta
  Real weight = 0;    // w_n
};

/// Weights of Phi_X(q)/q = sum_n w_n / ((n+theta)(q+n+theta)), i.e. Levy density
/// sum_n w_n e^{-(n+theta) r}.
template <std::floating_point Real>
std::vector<KreinAtom<Real>> krein_atoms(Real theta, int N) {
  if (!(theta > 0 && theta < 1)) throw DomainError("theta must lie in (0, 1)");
  std::vector<KreinAtom<Real>> out;
  const Real base = std::log(theta * std::sin(pi_v<Real> * theta) / pi_v<Real>) - std::lgamma(1 + theta);
  for (int n = 0; n <= N; ++n) {
    const Real a = Real(n) + theta;
    out.push_back({a, a * std::exp(base + std::lgamma(a) - log_factorial<Real>(n))});
  }
  return out;
}

/// q sum_{n<=N} w_n/(a_n(q+a_n)) plus the integral estimate of the remainder,
/// whose terms behave like C n^{theta-2} with C = theta sin(pi theta)/(pi Gamma(1+theta)).
template <std::floating_point Real>
Real krein_reconstruction(const std::vector<KreinAtom<Real>>& atoms, Real q) {
  CompensatedSum<Real> s;
  for (const auto& a : atoms) s.add(a.weight / (a.location * (q + a.location)));
  const Real theta = atoms.front().location;
  const Real N = Real(atoms.size() - 1);
  const Real C = theta * std::sin(pi_v<Real> * theta) / (pi_v<Real> * std::tgamma(1 + theta));
  const Real tail = C * std::pow(N + Real(0.5), theta - 1) / (1 - theta);
  return q * (s.value() + tail);
}

/// mu_bar(b) / mu_bar(a) for the excursion-length tail of Xbar or X.
template <std::floating_point Real>
Real excursion_survival(SubordinatorTag tag, Real theta, Real a, Real b) {
  if (!(a > 0)) throw DomainError("excursion_survival: requires a > 0");
  if (b < a) throw DomainError("excursion_survival: requires b >= a");
  if (b == a) return 1;
  if (tag == SubordinatorTag::Xbar_selfsimilar) return std::pow(a / b, theta);
  if (tag != SubordinatorTag::X_laguerre)
    throw DomainError("excursion_survival: tag without a Levy density here");
  // mu_bar(c) = sum_n (w_n/a_n) e^{-a_n c}; w_n/a_n is nonincreasing, so the
  // remainder after N is at most (w_{N+1}/a_{N+1}) e^{-a_{N+1} c}/(1 - e^{-c}).
  auto mu_bar = [&](Real c) {
    CompensatedSum<Real> s;
    const Real base = std::log(theta * std::sin(pi_v<Real> * theta) / pi_v<Real>) - std::lgamma(1 + theta);
    for (int n = 0;; ++n) {
      const Real an = Real(n) + theta;
      const Real log_r = base + std::lgamma(an) - log_factorial<Real>(n);  // w_n / a_n
      s.add(std::exp(log_r - an * c));
      const Real an1 = an + 1;
      const Real log_r1 = base + std::lgamma(an1) - log_factorial<Real>(n + 1);
      const Real bound = std::exp(log_r1 - an1 * c) / (-std::expm1(-c));
      if (bound < Real(1e-12) * s.value() || n > 1'000'000) break;
    }
    return s.value();
  };
  return mu_bar(b) / mu_bar(a);
}

/// E[e^{-q zeta}] = delta / Phi(q).
template <std::floating_point Real, typename F>
Real last_exit_laplace(F&& phi, Real q) {
  const auto parts = lk_parts<Real>(phi);
  return parts.delta / phi(q);
}

template <std::floating_point Real>
struct PickReport {
  bool pick_ok = true;
  bool bernstein_ok = true;
  Real min_imag = std::numeric_limits<Real>::infinity();
  int failures = 0;
};

/// Im Phi(z) >= -1e-10 on an upper half-plane grid and alternating signs of
/// the first four derivatives on a log-spaced real grid.
template <std::floating_point Real>
PickReport<Real> pick_bernstein_check(const SubordinatorExponent<Real>& phi,
                                      const std::vector<std::complex<Real>>& grid) {
  PickReport<Real> r;
  for (const auto& z : grid) {
    if (!(z.imag() > 0)) continue;
    const Real im = phi(z).imag();
    r.min_imag = std::min(r.min_imag, im);
    if (im < Real(-1e-10)) {
      r.pick_ok = false;
      ++r.failures;
    }
  }
  if (!(phi(Real(1)) > 0)) {
    r.bernstein_ok = false;
    ++r.failures;
  }
  for (int i = 0; i <= 40; ++i) {
    const Real u = std::pow(Real(10), Real(-1) + Real(i) * Real(0.05));
    const Real h = u * Real(0.05);
    Real fd[5];
    for (int k = 0; k <= 4; ++k) fd[k] = phi(u + Real(k) * h);
    // forward differences of orders 1..4, scaled to derivatives
    Real d[4];
    Real work[5];
    std::copy(fd, fd + 5, work);
    for (int order = 1; order <= 4; ++order) {
      for (int k = 0; k + order <= 4; ++k) work[k] = work[k + 1] - work[k];
      d[order - 1] = work[0] / std::pow(h, Real(order));
    }
    Real fmax = 0;
    for (Real v : fd) fmax = std::max(fmax, std::abs(v));
    for (int order = 1; order <= 4; ++order) {
      const Real expect = order % 2 ? Real(1) : Real(-1);
      const Real rounding = Real(8) * std::ldexp(std::numeric_limits<Real>::epsilon(), order) *
                            fmax / std::pow(h, Real(order));
      const Real tol = rounding + Real(1e-8) * std::abs(d[order - 1]);
      if (expect * d[order - 1] < -tol) {
        r.bernstein_ok = false;
        ++r.failures;
      }
    }
  }
  return r;
}

/// Upper half-plane sample grid used by default.
template <std::floating_point Real>
std::vector<std::complex<Real>> default_pick_grid() {
  std::vector<std::complex<Real>> g;
  for (int i = -10; i <= 10; ++i)
    for (int j = 1; j <= 10; ++j) g.emplace_back(Real(i) * Real(0.7), Real(j) * Real(0.5));
  return g;
}

}  // namespace glsemi
