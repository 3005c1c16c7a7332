#pragma once

// Levy model of a spectrally negative process, its Laplace exponent psi, the
// Bernstein functions derived from it and the generalized Weierstrass
// product W_phi.

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "numeric.hpp"

namespace glsemi {

/// Point mass `w` at jump size `y`.
struct Atom {
  double y = 0;
  double w = 0;
  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Jump density c * exp(-lambda * y) on (0, inf).
struct ExpDensity {
  double c = 0;
  double lambda = 0;
  friend bool operator==(const ExpDensity&, const ExpDensity&) = default;
};

using JumpComponent = std::variant<Atom, ExpDensity>;

/// Finite-activity Levy measure of the (negative) jumps. Empty means no jumps.
struct JumpMeasureSpec {
  std::vector<JumpComponent> components;

  void validate() const {
    for (const auto& c : components) {
      std::visit(
          [](const auto& j) {
            using T = std::decay_t<decltype(j)>;
            if constexpr (std::is_same_v<T, Atom>) {
              if (!(j.y > 0) || !(j.w > 0))
                throw DomainError("atom location and mass must be positive");
            } else {
              if (!(j.c > 0) || !(j.lambda > 0))
                throw DomainError("exponential density parameters must be positive");
            }
          },
          c);
    }
  }

  /// Total jump intensity Pi((0, inf)).
  double total_rate() const {
    double r = 0;
    for (const auto& c : components)
      std::visit(
          [&](const auto& j) {
            if constexpr (std::is_same_v<std::decay_t<decltype(j)>, Atom>)
              r += j.w;
            else
              r += j.c / j.lambda;
          },
          c);
    return r;
  }

  /// int_0^1 y Pi(dy): the compensator mass of small jumps.
  double small_jump_mean() const {
    double r = 0;
    for (const auto& c : components)
      std::visit(
          [&](const auto& j) {
            if constexpr (std::is_same_v<std::decay_t<decltype(j)>, Atom>) {
              if (j.y < 1) r += j.w * j.y;
            } else {
              r += j.c * (-std::expm1(-j.lambda) - j.lambda * std::exp(-j.lambda)) /
                   (j.lambda * j.lambda);
            }
          },
          c);
    return r;
  }

  friend bool operator==(const JumpMeasureSpec&, const JumpMeasureSpec&) = default;
};

/// (beta, sigma^2, Pi, kappa). The Laplace exponent is
///   psi(z) = beta z + sigma2/2 z^2 + int (e^{-zy} - 1 + z y 1_{y<1}) Pi(dy) - kappa,
/// which is convex on [0, inf).
struct LevyQuadruplet {
  double beta = 0;
  double sigma2 = 0;
  JumpMeasureSpec jumps;
  double kappa = 0;

  void validate() const {
    if (!(sigma2 >= 0)) throw DomainError("sigma2 must be >= 0");
    if (!(kappa >= 0)) throw DomainError("kappa must be >= 0");
    if (!std::isfinite(beta)) throw DomainError("beta must be finite");
    jumps.validate();
  }

  friend bool operator==(const LevyQuadruplet&, const LevyQuadruplet&) = default;
};

/// The classical Laguerre exponent psi(u) = u (u - theta).
inline LevyQuadruplet classical_quadruplet(double theta) {
  return LevyQuadruplet{-theta, 2.0, {}, 0.0};
}

namespace detail {

// K(lambda) = int_0^1 y e^{-lambda y} dy.
template <std::floating_point Real>
Real exp_small_jump_moment(Real lambda) {
  return (-std::expm1(-lambda) - lambda * std::exp(-lambda)) / (lambda * lambda);
}

}  // namespace detail

/// psi on the real half-line.
template <std::floating_point Real>
Real laplace_exponent(const LevyQuadruplet& q, Real u) {
  if (u < 0) throw DomainError("psi: argument must have nonnegative real part");
  Real r = Real(q.beta) * u + Real(q.sigma2) / 2 * u * u - Real(q.kappa);
  for (const auto& c : q.jumps.components) {
    if (const auto* a = std::get_if<Atom>(&c)) {
      const Real y = a->y;
      r += Real(a->w) * (std::expm1(-u * y) + (y < 1 ? u * y : Real(0)));
    } else {
      const auto& e = std::get<ExpDensity>(c);
      const Real lam = e.lambda;
      r += Real(e.c) * u * (detail::exp_small_jump_moment(lam) - Real(1) / (lam * (u + lam)));
    }
  }
  return r;
}

/// psi on the closed right half-plane.
template <std::floating_point Real>
std::complex<Real> laplace_exponent(const LevyQuadruplet& q, std::complex<Real> z) {
  using C = std::complex<Real>;
  if (z.real() < 0) throw DomainError("psi: argument must have nonnegative real part");
  C r = Real(q.beta) * z + Real(q.sigma2) / 2 * z * z - Real(q.kappa);
  for (const auto& c : q.jumps.components) {
    if (const auto* a = std::get_if<Atom>(&c)) {
      const Real y = a->y;
      r += Real(a->w) * (std::exp(-z * y) - Real(1) + (y < 1 ? z * y : C(0)));
    } else {
      const auto& e = std::get<ExpDensity>(c);
      const Real lam = e.lambda;
      r += Real(e.c) * z * (detail::exp_small_jump_moment(lam) - Real(1) / (lam * (z + lam)));
    }
  }
  return r;
}

template <std::floating_point Real>
Real laplace_exponent_d1(const LevyQuadruplet& q, Real u) {
  Real r = Real(q.beta) + Real(q.sigma2) * u;
  for (const auto& c : q.jumps.components) {
    if (const auto* a = std::get_if<Atom>(&c)) {
      const Real y = a->y;
      r += Real(a->w) * y * ((y < 1 ? Real(1) : Real(0)) - std::exp(-u * y));
    } else {
      const auto& e = std::get<ExpDensity>(c);
      const Real lam = e.lambda;
      r += Real(e.c) * (detail::exp_small_jump_moment(lam) - Real(1) / ((u + lam) * (u + lam)));
    }
  }
  return r;
}

template <std::floating_point Real>
Real laplace_exponent_d2(const LevyQuadruplet& q, Real u) {
  Real r = Real(q.sigma2);
  for (const auto& c : q.jumps.components) {
    if (const auto* a = std::get_if<Atom>(&c)) {
      const Real y = a->y;
      r += Real(a->w) * y * y * std::exp(-u * y);
    } else {
      const auto& e = std::get<ExpDensity>(c);
      const Real s = Real(e.lambda) + u;
      r += Real(2) * Real(e.c) / (s * s * s);
    }
  }
  return r;
}

/// Double tail int_y^inf Pi((r, inf)) dr, closed form per component.
template <std::floating_point Real>
Real double_tail(const JumpMeasureSpec& jumps, Real y) {
  Real r = 0;
  for (const auto& c : jumps.components) {
    if (const auto* a = std::get_if<Atom>(&c))
      r += Real(a->w) * std::max(Real(a->y) - y, Real(0));
    else {
      const auto& e = std::get<ExpDensity>(c);
      r += Real(e.c) / (Real(e.lambda) * Real(e.lambda)) * std::exp(-Real(e.lambda) * y);
    }
  }
  return r;
}

struct ModelFlags {
  bool n_up = false;      // beta >= 0, kappa = 0
  bool n_check = false;   // root theta in (0,1) and int_{x>1} x e^{theta x} Pi(dx) < inf
  bool n_p = false;       // sigma^2 > 0
  bool nbar_inf = false;  // N_P, or sigma^2 = 0 with infinite double tail at 0+
};

template <std::floating_point Real>
struct Classification {
  ModelFlags flags;
  Real double_tail_at_zero = 0;
  std::optional<Real> frakb;  // (beta + double tail(0+)) / sigma^2
};

enum class DerivedKind { phi, psi_up, t1psi, phi1, phi_up };

/// Root theta of psi in (0,1): bisection on [1e-10, 1 - 1e-10] then Newton.
template <std::floating_point Real>
Real find_theta(const LevyQuadruplet& q) {
  if (q.kappa != 0) throw DomainError("find_theta: requires kappa = 0");
  const auto psi = [&](Real u) { return laplace_exponent<Real>(q, u); };
  Real lo = Real(1e-10), hi = Real(1) - Real(1e-10);
  const Real flo = psi(lo), fhi = psi(hi);
  if (!(flo < 0 && fhi > 0)) {
    throw NoRootInUnitInterval("psi has no sign change on (0,1); psi(1/2) = " +
                                   std::to_string(static_cast<double>(psi(Real(0.5)))),
                               static_cast<double>(psi(Real(0.5))));
  }
  for (int i = 0; i < 200 && hi - lo > Real(1e-9); ++i) {
    const Real mid = (lo + hi) / 2;
    (psi(mid) < 0 ? lo : hi) = mid;
  }
  Real x = (lo + hi) / 2;
  for (int i = 0; i < 50; ++i) {
    const Real step = psi(x) / laplace_exponent_d1<Real>(q, x);
    x -= step;
    if (std::abs(step) <= std::numeric_limits<Real>::epsilon() * 4 * x) break;
  }
  return x;
}

/// A Levy model with its root theta and set memberships cached. Immutable.
template <std::floating_point Real>
class PsiModel {
 public:
  using Complex = std::complex<Real>;

  explicit PsiModel(LevyQuadruplet quad) : quad_(std::move(quad)) {
    quad_.validate();
    theta_ = find_theta<Real>(quad_);
    classify();
  }

  const LevyQuadruplet& quadruplet() const { return quad_; }
  Real theta() const { return theta_; }
  const Classification<Real>& classification() const { return class_; }
  const ModelFlags& flags() const { return class_.flags; }
  std::optional<Real> frakb() const { return class_.frakb; }

  Real psi(Real u) const { return laplace_exponent<Real>(quad_, u); }
  Complex psi(Complex z) const { return laplace_exponent<Real>(quad_, z); }
  Real psi_d1(Real u) const { return laplace_exponent_d1<Real>(quad_, u); }

  /// phi(u) = psi(u) / (u - theta), the removable singularity filled analytically.
  Real phi(Real u) const {
    if (u < 0) throw DomainError("phi: argument must be >= 0");
    const Real d = u - theta_;
    if (std::abs(d) < Real(1e-6) * std::max(Real(1), theta_)) {
      return psi_d1(theta_) + laplace_exponent_d2<Real>(quad_, theta_) * d / 2;
    }
    return psi(u) / d;
  }

  Complex phi(Complex z) const {
    const Complex d = z - theta_;
    if (std::abs(d) < Real(1e-6) * std::max(Real(1), theta_)) {
      return psi_d1(theta_) + laplace_exponent_d2<Real>(quad_, theta_) * d / Real(2);
    }
    return psi(z) / d;
  }

  Real derived(DerivedKind kind, Real u) const {
    if (u < 0) throw DomainError("derived exponent: argument must be >= 0");
    switch (kind) {
      case DerivedKind::phi: return phi(u);
      case DerivedKind::psi_up: return psi(u + theta_);
      case DerivedKind::t1psi: return u * psi(u + 1) / (u + 1);
      case DerivedKind::phi1: return psi(u + 1) / (u + 1);
      case DerivedKind::phi_up: return phi(u + theta_);
    }
    throw DomainError("unknown derived exponent");
  }

 private:
  void classify() {
    auto& f = class_.flags;
    f.n_up = quad_.beta >= 0 && quad_.kappa == 0;
    f.n_p = quad_.sigma2 > 0;
    class_.double_tail_at_zero = double_tail<Real>(quad_.jumps, Real(0));
    // Every supported jump family has a finite double tail at 0+.
    f.nbar_inf = f.n_p || !std::isfinite(class_.double_tail_at_zero);
    bool moment_ok = true;
    for (const auto& c : quad_.jumps.components)
      if (const auto* e = std::get_if<ExpDensity>(&c))
        moment_ok = moment_ok && (Real(e->lambda) > theta_);
    f.n_check = moment_ok;
    if (f.n_p && std::isfinite(class_.double_tail_at_zero))
      class_.frakb = (Real(quad_.beta) + class_.double_tail_at_zero) / Real(quad_.sigma2);
  }

  LevyQuadruplet quad_;
  Real theta_ = 0;
  Classification<Real> class_;
};

/// log W_phi(n+1) = sum_{k=1}^n log phi(k).
template <std::floating_point Real>
Real log_wphi_integer(const PsiModel<Real>& model, int n) {
  CompensatedSum<Real> s;
  for (int k = 1; k <= n; ++k) s.add(std::log(model.phi(Real(k))));
  return s.value();
}

template <std::floating_point Real>
struct WphiValue {
  std::complex<Real> log_value;  // log W_phi(z), imaginary part modulo 2 pi
  Real residual = 0;             // |W(z+1) - phi(z) W(z)| / |W(z+1)|
  long terms = 0;                // truncation level N actually used

  std::complex<Real> value() const { return std::exp(log_value); }
};

/// Evaluates W_phi through the Euler-type limit
///   W(z) = lim_N phi(N)^z prod_{k=1}^{N-1} phi(k) / prod_{k=0}^{N-1} phi(z+k),
/// accelerated by Richardson extrapolation over a doubling sequence of N.
/// When sigma^2 > 0, phi(u) = a (u + b) + O(1/u) with a = sigma^2/2 and
/// b = (drift + a theta)/a; the affine part is split off exactly through
/// Gamma(z + b) and only the ratio phi(u) / (a (u + b)) = 1 + O(u^-2) goes
/// through the limit. Holds lazily grown tables; make one per thread.
template <std::floating_point Real>
class WphiEvaluator {
 public:
  using Complex = std::complex<Real>;

  explicit WphiEvaluator(const PsiModel<Real>& model, bool affine_split = true,
                         Real tol = default_tol())
      : model_(&model), tol_(tol) {
    const auto& q = model.quadruplet();
    if (affine_split && q.sigma2 > 0) {
      ref_a_ = Real(q.sigma2) / 2;
      ref_b_ = (Real(q.beta) + Real(q.jumps.small_jump_mean()) + ref_a_ * model.theta()) / ref_a_;
      use_ref_ = ref_b_ >= 0;
    }
    phi_prefix_.push_back(0);
    ratio_prefix_.push_back(0);
  }

  static Real default_tol() {
    return std::max(Real(1e-13), Real(256) * std::numeric_limits<Real>::epsilon());
  }

  /// log W(z) and the truncation level used; N starts at `n0` and doubles
  /// until successive extrapolants agree to `tol` (0 selects the default).
  std::pair<Complex, long> log_w(Complex z, long n0 = 0, long n_max = 1'000'000, Real tol = 0) {
    if (tol <= 0) tol = tol_;
    if (z.real() <= 0) throw DomainError("W_phi: requires Re z > 0");
    if (z.imag() == Real(0) && z.real() == std::round(z.real()) && z.real() <= Real(1e6)) {
      const long n = std::lround(z.real());
      return {Complex(phi_prefix(n - 1)), n};
    }
    if (n0 <= 0) n0 = 16 + 4 * static_cast<long>(std::ceil(std::abs(z)));
    constexpr int kLevels = 12;
    std::vector<std::vector<Complex>> table;
    CompensatedSum<Complex> shifted;  // sum_{k=0}^{N-1} log g(z+k)
    long done = 0;
    Complex best{};
    Real best_err = std::numeric_limits<Real>::infinity();
    long n = n0;
    for (int level = 0; level < kLevels && n <= n_max; ++level, n *= 2) {
      for (long k = done; k < n; ++k) shifted.add(std::log(factor(z + Real(k))));
      done = n;
      const Complex estimate =
          z * std::log(factor(Complex(Real(n)))) + prefix(n - 1) - shifted.value();
      std::vector<Complex> row{estimate};
      for (std::size_t m = 1; m <= table.size(); ++m) {
        const Real f = std::ldexp(Real(1), static_cast<int>(m)) - Real(1);
        row.push_back(row[m - 1] + (row[m - 1] - table.back()[m - 1]) / f);
      }
      if (!table.empty()) {
        const Real err = std::abs(row.back() - table.back().back());
        if (err < best_err) {
          best_err = err;
          best = row.back();
        }
        if (err < tol) return {reference(z) + row.back(), n};
      }
      table.push_back(std::move(row));
    }
    if (best_err < std::max(tol, Real(1e-10))) return {reference(z) + best, n / 2};
    throw ConvergenceFailure("W_phi Euler limit did not converge at z = (" +
                             std::to_string(static_cast<double>(z.real())) + ", " +
                             std::to_string(static_cast<double>(z.imag())) + ")");
  }

  /// W(z) together with the functional-equation residual; the starting
  /// truncation grows until the residual is below 1e-8.
  WphiValue<Real> operator()(Complex z) {
    long n0 = 0;
    for (;;) {
      const auto [lw, used] = log_w(z, n0);
      const auto [lw1, used1] = log_w(z + Real(1), n0);
      const Complex ratio = std::exp(lw1 - lw - std::log(model_->phi(z)));
      const Real residual = std::abs(Real(1) - Real(1) / ratio);
      if (residual < Real(1e-8)) return {lw, residual, std::max(used, used1)};
      n0 = 4 * std::max(used, used1);
      if (n0 > 1'000'000)
        throw ConvergenceFailure("W_phi functional-equation residual above 1e-8");
    }
  }

  /// sum_{k=1}^{n} log phi(k), cached.
  Real phi_prefix(long n) {
    while (static_cast<long>(phi_prefix_.size()) <= n) {
      phi_sum_.add(std::log(model_->phi(Real(phi_prefix_.size()))));
      phi_prefix_.push_back(phi_sum_.value());
    }
    return phi_prefix_[static_cast<std::size_t>(n)];
  }

  bool uses_reference() const { return use_ref_; }

 private:
  // The function whose Weierstrass product goes through the Euler limit.
  Complex factor(Complex z) const {
    const Complex p = model_->phi(z);
    return use_ref_ ? p / (ref_a_ * (z + ref_b_)) : p;
  }

  // log of the closed-form product for a (u + b): a^{z-1} Gamma(z+b) / Gamma(1+b).
  Complex reference(Complex z) const {
    if (!use_ref_) return Complex(0);
    return (z - Real(1)) * std::log(ref_a_) + lgamma_complex(z + ref_b_) -
           lgamma_complex(Complex(Real(1) + ref_b_));
  }

  Real prefix(long n) {
    if (!use_ref_) return phi_prefix(n);
    while (static_cast<long>(ratio_prefix_.size()) <= n) {
      const Real k = Real(ratio_prefix_.size());
      ratio_sum_.add(std::log(model_->phi(k) / (ref_a_ * (k + ref_b_))));
      ratio_prefix_.push_back(ratio_sum_.value());
    }
    return ratio_prefix_[static_cast<std::size_t>(n)];
  }

  const PsiModel<Real>* model_;
  Real tol_;
  bool use_ref_ = false;
  Real ref_a_ = 1;
  Real ref_b_ = 0;
  std::vector<Real> phi_prefix_;
  std::vector<Real> ratio_prefix_;
  CompensatedSum<Real> phi_sum_;
  CompensatedSum<Real> ratio_sum_;
};

/// W_phi(z) with its residual (convenience wrapper).
template <std::floating_point Real>
WphiValue<Real> wphi(const PsiModel<Real>& model, std::complex<Real> z) {
  WphiEvaluator<Real> ev(model);
  return ev(z);
}

/// Real log W_phi(x) for x > 0.
template <std::floating_point Real>
Real log_wphi(const PsiModel<Real>& model, Real x) {
  WphiEvaluator<Real> ev(model);
  return ev.log_w(std::complex<Real>(x, 0)).first.real();
}

}  // namespace glsemi
