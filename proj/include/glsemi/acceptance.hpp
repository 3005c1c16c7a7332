#pragma once

// The acceptance suite: one pass/fail verdict per criterion with pinned
// tolerances and time budgets. Shared by the CLI and the test binary.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bernstein.hpp"
#include "distributions.hpp"
#include "intertwining.hpp"
#include "localtime_krein.hpp"
#include "montecarlo.hpp"
#include "numeric.hpp"
#include "poly.hpp"
#include "spectral.hpp"

namespace glsemi {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0;
  double budget_seconds = 0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20261016;
  int threads = 0;
  long mc_replicas = 100000;
  long ks_replicas = 10000;
  /// Criteria to run; empty means all.
  std::vector<int> only;
};

namespace acceptance {

// Tolerances, one per criterion.
inline constexpr double kClassicalReduction = 1e-10;
inline constexpr double kGammaFactorization = 1e-10;
inline constexpr double kWphiResidual = 1e-8;
inline constexpr double kWphiGamma = 1e-9;
inline constexpr double kBiorthogonality = 1e-8;
inline constexpr double kIntertwining = 1e-10;
inline constexpr double kSemigroupLaws = 1e-10;
inline constexpr double kBesselSlack = 1e-8;
inline constexpr double kConvergenceConstant = 1.444225;
inline constexpr double kConvergenceConstantTol = 1e-6;
inline constexpr double kPhiIdentities = 1e-12;
inline constexpr double kRevuzConsistency = 1e-8;
inline constexpr double kKrein = 1e-3;
inline constexpr double kDensitySup = 1e-6;
inline constexpr double kDensityMass = 1e-6;
inline constexpr double kKolmogorovSmirnov = 0.02;
inline constexpr double kMcStandardErrors = 3.0;
inline constexpr double kStationaryRelative = 0.05;

// Monte Carlo settings.
inline constexpr double kMcDt = 1e-3;
inline constexpr double kMcEps = 1e-10;
inline constexpr double kStationaryEps = 1e-3;
inline constexpr double kStationaryHorizon = 50;
inline constexpr long kStationaryReplicas = 1000;
inline constexpr long kEmReplicasPerNode = 2000;

inline LevyQuadruplet model_c() { return classical_quadruplet(0.5); }
inline LevyQuadruplet model_j() {
  return LevyQuadruplet{1.5 - std::sqrt(2.0) - std::log(2.0), 2.0,
                        JumpMeasureSpec{{Atom{std::log(2.0), 1.0}}}, 0.0};
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

template <std::floating_point Real>
std::vector<Poly<Real>> random_polys(int count, int degree, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Poly<Real>> out;
  for (int i = 0; i < count; ++i) {
    std::vector<Real> c;
    for (int k = 0; k <= degree; ++k) c.push_back(static_cast<Real>(u(gen)));
    out.push_back(Poly<Real>::from_values(c));
  }
  return out;
}

/// Per-coefficient deviation relative to max(|expected_j|, |operand_j|).
template <std::floating_point Real>
Real eigen_deviation(const Poly<Real>& got, const Poly<Real>& expected, const Poly<Real>& operand) {
  const int n = std::max({got.degree(), expected.degree(), operand.degree()});
  Real dev = 0;
  for (int j = 0; j <= n; ++j) {
    const Real scale = std::max(std::abs(expected.value_of(j)), std::abs(operand.value_of(j)));
    if (scale > 0) dev = std::max(dev, std::abs(got.value_of(j) - expected.value_of(j)) / scale);
  }
  return dev;
}

template <std::floating_point Real>
bool c1(std::string& d) {
  Real worst = 0;
  for (double theta : {0.25, 0.5, 0.75}) {
    const PsiModel<Real> m(classical_quadruplet(theta));
    const SpectralModel<Real> s(m, 12);
    for (int n = 0; n <= 10; ++n) {
      const Poly<Real> rhs = frakc<Real>(n, -m.theta()) * laguerre<Real>(m.theta(), n);
      worst = std::max(worst, max_coef_deviation(s.eigenpoly(n), rhs));
    }
  }
  d = "max rel dev " + fmt(static_cast<double>(worst)) + " (tol " + fmt(kClassicalReduction) + ")";
  return worst <= kClassicalReduction;
}

template <std::floating_point Real>
bool c2(std::string& d) {
  Real worst = 0;
  for (const auto& q : {model_c(), model_j()}) {
    const PsiModel<Real> m(q);
    MomentTable<Real> v(m, MomentKind::V_psi), i(m, MomentKind::I_phi);
    const Real theta = m.theta();
    for (int n = 0; n <= 40; ++n) {
      const Real lhs = v.at(n).log_abs + i.at(n).log_abs;
      const Real rhs = std::lgamma(Real(n) + 1 - theta) - std::lgamma(1 - theta);
      worst = std::max(worst, std::abs(std::expm1(lhs - rhs)));
    }
  }
  d = "max rel dev " + fmt(static_cast<double>(worst)) + " (tol " + fmt(kGammaFactorization) + ")";
  return worst <= kGammaFactorization;
}

template <std::floating_point Real>
bool c3(std::string& d) {
  using C = std::complex<Real>;
  Real residual = 0;
  for (const auto& q : {model_c(), model_j()}) {
    const PsiModel<Real> m(q);
    WphiEvaluator<Real> w(m);
    for (C z : {C(0.25), C(0.75), C(1.5), C(2.5), C(0.5, 5)})
      residual = std::max(residual, w(z).residual);
  }
  const PsiModel<Real> mc(model_c());
  WphiEvaluator<Real> w(mc);
  Real gamma_dev = 0;
  for (int k = 0; k < 20; ++k) {
    const C z = k < 10 ? C(Real(0.3) + Real(0.8) * Real(k)) : C(Real(0.5) + Real(0.5) * Real(k - 10), Real(1 + k % 3));
    const C lw = w.log_w(z).first;
    gamma_dev = std::max(gamma_dev, std::abs(std::exp(lw - lgamma_complex(z)) - Real(1)));
  }
  d = "residual " + fmt(static_cast<double>(residual)) + " (tol " + fmt(kWphiResidual) +
      "), |W/Gamma - 1| " + fmt(static_cast<double>(gamma_dev)) + " (tol " + fmt(kWphiGamma) + ")";
  return residual < kWphiResidual && gamma_dev < kWphiGamma;
}

template <std::floating_point Real>
bool c4(std::string& d) {
  Real worst = 0;
  for (const auto& q : {model_c(), model_j()}) {
    const PsiModel<Real> m(q);
    const SpectralModel<Real> s(m, 20);
    for (const PairingKind v : {PairingKind::m, PairingKind::m_dag}) {
      for (int a = 0; a <= 15; ++a) {
        const Poly<Real> p = v == PairingKind::m ? s.eigenpoly(a) : s.eigenpoly_dag(a).q;
        for (int n = 0; n <= 15; ++n) {
          std::vector<SignedLog<Real>> terms;
          for (int k = 0; k <= p.degree(); ++k)
            terms.push_back(p.coef(k) * SignedLog<Real>::from_value(s.pairing(k, n, v)));
          const Real ip = signed_log_sum(terms).value();
          worst = std::max(worst, std::abs(ip - (a == n ? Real(1) : Real(0))));
        }
      }
    }
  }
  d = "max |<P_m, m_n> - delta| " + fmt(static_cast<double>(worst)) + " (tol " +
      fmt(kBiorthogonality) + ")";
  return worst <= kBiorthogonality;
}

template <std::floating_point Real>
bool c5(std::string& d, std::uint64_t seed) {
  const PsiModel<Real> m(model_j());
  const SpectralModel<Real> s(m);
  const Intertwiner<Real> lam(s);
  Real worst = 0;
  for (const auto& f : random_polys<Real>(50, 10, seed))
    for (Real t : {Real(0.1), Real(1), Real(5)}) {
      worst = std::max(worst, lam.verify(f, t));
      worst = std::max(worst, lam.verify(ThetaShiftedPoly<Real>{f, m.theta()}, t));
    }
  d = "max coef dev " + fmt(static_cast<double>(worst)) + " (tol " + fmt(kIntertwining) + ")";
  return worst <= kIntertwining;
}

template <std::floating_point Real>
bool c6(std::string& d, std::uint64_t seed) {
  Real eig = 0, comp = 0, mass = 0, inv = 0;
  const auto polys = random_polys<Real>(20, 10, seed + 6);
  for (const auto& q : {model_c(), model_j()}) {
    const PsiModel<Real> m(q);
    const SpectralModel<Real> s(m);
    const Real theta = m.theta();
    for (int n = 0; n <= 15; ++n)
      for (Real t : {Real(0.1), Real(1), Real(3)}) {
        const Poly<Real> p = s.eigenpoly(n);
        eig = std::max(eig, eigen_deviation(s.apply(p, t, SemigroupKind::P),
                                            std::exp(-Real(n) * t) * p, p));
        const auto pd = s.eigenpoly_dag(n);
        eig = std::max(eig, eigen_deviation(s.apply(pd, t, SemigroupKind::P_dag).q,
                                            std::exp(-(Real(n) + theta) * t) * pd.q, pd.q));
      }
    const Poly<Real> one = Poly<Real>::from_values({Real(1)});
    for (Real t : {Real(0.1), Real(1), Real(5)})
      mass = std::max(mass, max_coef_deviation(s.apply(one, t, SemigroupKind::P), one));
    for (const auto& f : polys)
      for (auto [t, u] : {std::pair<Real, Real>{0.1, 0.4}, {1, 2}, {0.5, 3}}) {
        const auto a = s.apply(s.apply(f, u, SemigroupKind::P), t, SemigroupKind::P);
        comp = std::max(comp, max_coef_deviation(a, s.apply(f, t + u, SemigroupKind::P)));
        const Real m0 = s.stationary_mean(f), m1 = s.stationary_mean(s.apply(f, t, SemigroupKind::P));
        inv = std::max(inv, std::abs(m1 - m0) / std::max(Real(1), std::abs(m0)));
      }
  }
  const Real worst = std::max({eig, comp, mass, inv});
  d = "eigen " + fmt(static_cast<double>(eig)) + ", composition " + fmt(static_cast<double>(comp)) +
      ", mass " + fmt(static_cast<double>(mass)) + ", invariance " + fmt(static_cast<double>(inv)) +
      " (tol " + fmt(kSemigroupLaws) + ")";
  return worst <= kSemigroupLaws;
}

template <std::floating_point Real>
bool c7(std::string& d, std::uint64_t seed) {
  const PsiModel<Real> m(model_j());
  const SpectralModel<Real> s(m);
  Real excess = -std::numeric_limits<Real>::infinity(), ratio = 0;
  for (const auto& f : random_polys<Real>(50, 8, seed + 7)) {
    const Real norm2 = s.norm_m_squared(f);
    for (const BesselKind k : {BesselKind::eigen, BesselKind::coeigen}) {
      const Real partial = s.bessel_partial(f, 8, k);
      excess = std::max(excess, partial - norm2);
      ratio = std::max(ratio, partial / norm2);
    }
  }
  d = "max partial sum / |f|^2 " + fmt(static_cast<double>(ratio)) + ", max excess " +
      fmt(static_cast<double>(excess)) + " (slack " + fmt(kBesselSlack) + ")";
  return excess <= kBesselSlack;
}

template <std::floating_point Real>
bool c8(std::string& d, std::uint64_t seed) {
  const PsiModel<Real> m(model_j());
  const SpectralModel<Real> s(m);
  const Real constant = s.convergence_constant();
  int violations = 0;
  Real worst_ratio = 0;
  for (const auto& f : random_polys<Real>(50, 8, seed + 8))
    for (Real t : {Real(0.25), Real(1), Real(4)}) {
      const auto r = s.convergence_check(f, t);
      violations += r.violated;
      if (r.rhs > 0) worst_ratio = std::max(worst_ratio, r.lhs / r.rhs);
    }
  const bool constant_ok =
      std::abs(static_cast<double>(constant) - kConvergenceConstant) <= kConvergenceConstantTol;
  d = "C = " + std::to_string(static_cast<double>(constant)) + ", violations " +
      std::to_string(violations) + ", max lhs/rhs " + fmt(static_cast<double>(worst_ratio));
  return violations == 0 && constant_ok;
}

template <std::floating_point Real>
bool c9(std::string& d) {
  const PsiModel<Real> mc(model_c()), mj(model_j());
  const auto px = SubordinatorExponent<Real>::for_model(SubordinatorTag::X_laguerre, mj);
  const auto pc = SubordinatorExponent<Real>::for_model(SubordinatorTag::X_laguerre, mc);
  const Real theta = mj.theta();
  Real ident = std::abs(px(Real(1)) - theta) / theta, across = 0;
  for (int i = 0; i < 100; ++i) {
    const Real q = Real(0.01) * std::pow(Real(1e4), Real(i) / 99);
    ident = std::max(ident, rel_diff(px(q + 1) / px(q), (q + theta) / q));
    across = std::max(across, rel_diff(px(q), pc(q)));
  }
  const Real revuz =
      std::max(revuz_constants(mj).max_deviation, revuz_constants(mc).max_deviation);
  d = "identities " + fmt(static_cast<double>(ident)) + ", across models " +
      fmt(static_cast<double>(across)) + " (tol " + fmt(kPhiIdentities) + "), revuz " +
      fmt(static_cast<double>(revuz)) + " (tol " + fmt(kRevuzConsistency) + ")";
  return ident <= kPhiIdentities && across <= kPhiIdentities && revuz <= kRevuzConsistency;
}

template <std::floating_point Real>
bool c10(std::string& d) {
  const Real theta = Real(0.5);
  const auto atoms = krein_atoms<Real>(theta, 10000);
  const auto px = SubordinatorExponent<Real>::make(SubordinatorTag::X_laguerre, theta);
  Real worst = 0;
  for (int i = 0; i < 100; ++i) {
    const Real q = Real(0.1) * std::pow(Real(100), Real(i) / 99);
    worst = std::max(worst, rel_diff(krein_reconstruction(atoms, q), px(q)));
  }
  bool support = true;
  for (std::size_t n = 0; n < atoms.size(); ++n)
    support = support && atoms[n].location == Real(n) + theta && atoms[n].weight > 0;
  d = "max rel err " + fmt(static_cast<double>(worst)) + " (tol " + fmt(kKrein) +
      "), support = {n + theta}: " + (support ? "yes" : "no");
  return worst <= kKrein && support;
}

template <std::floating_point Real>
bool c11(std::string& d) {
  const PsiModel<Real> mc(model_c()), mj(model_j());
  const DensityInverter<Real> dc(mc);
  Real sup = 0;
  for (int i = 0; i < 60; ++i) {
    const Real x = Real(0.1) * std::pow(Real(100), Real(i) / 59);
    const Real exact = std::exp(-x) / std::sqrt(pi_v<Real> * x);
    sup = std::max(sup, std::abs(dc(x).value - exact));
  }
  const DensityInverter<Real> dj(mj);
  const Real mass = dj.integrate_power(0);
  d = "sup err " + fmt(static_cast<double>(sup)) + " (tol " + fmt(kDensitySup) +
      "), MODEL-J mass - 1 = " + fmt(static_cast<double>(mass - 1)) + " (tol " +
      fmt(kDensityMass) + ")";
  return sup < kDensitySup && std::abs(mass - 1) <= kDensityMass;
}

inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / static_cast<double>(a.size()) -
                             static_cast<double>(j) / static_cast<double>(b.size())));
  }
  return d;
}

/// X_t from x0 by the Lamperti pipeline and by Euler-Maruyama, minimal process on both sides.
inline std::pair<std::vector<double>, std::vector<double>> classical_samples(
    double theta, double x0, double t, long n, std::uint64_t seed, int threads) {
  const LevyQuadruplet q = classical_quadruplet(theta);
  auto a = run_replicas(n, threads, [&](long i) {
    RandomStream rng(seed, static_cast<std::uint64_t>(i), 7);
    LaguerreWalker w(q, kMcDt);
    const LaguerreRun r = w.run(x0, t, kMcEps, rng);
    return r.absorbed ? 0.0 : r.state;
  });
  auto b = run_replicas(n, threads, [&](long i) {
    RandomStream rng(seed, static_cast<std::uint64_t>(i), 8);
    PathConfig cfg;
    cfg.dt = kMcDt;
    cfg.horizon = t;
    return simulate_classical(theta, cfg, x0, rng, true).states.back();
  });
  return {std::move(a), std::move(b)};
}

/// Raw numbers of criterion 12, compared bitwise by criterion 13.
struct McNumbers {
  std::vector<double> values;
};

inline bool c12(std::string& d, const AcceptanceOptions& o, McNumbers* out) {
  std::ostringstream os;
  bool ok = true;
  const PsiModel<double> mj(model_j());
  // (a)
  const auto [a, b] = classical_samples(0.5, 1.0, 1.0, o.ks_replicas, o.seed, o.threads);
  const double ks = ks_distance(a, b);
  ok = ok && ks < kKolmogorovSmirnov;
  os << "(a) KS " << fmt(ks) << (ks < kKolmogorovSmirnov ? " ok" : " FAIL");
  // (b)
  PathConfig cfg;
  cfg.dt = kMcDt;
  cfg.eps_absorb = kMcEps;
  cfg.seed = o.seed;
  cfg.replicas = o.mc_replicas;
  cfg.threads = o.threads;
  const ThetaShiftedPoly<double> p_theta{Poly<double>::from_values({1.0}), mj.theta()};
  const Estimate kill = estimate(mj, KilledSemigroup{p_theta, 1.0, 1.0}, cfg);
  const double exact = std::exp(-mj.theta());
  const double zb = (kill.value - exact) / kill.stderr_;
  ok = ok && std::abs(zb) <= kMcStandardErrors;
  os << "; (b) " << kill.value << " +- " << fmt(kill.stderr_) << " vs " << exact << " ("
     << fmt(zb) << " SE)";
  // (c)
  PathConfig cs = cfg;
  cs.eps_absorb = kStationaryEps;
  cs.horizon = kStationaryHorizon;
  cs.replicas = kStationaryReplicas;
  const Estimate m2 = estimate(mj, StationaryMoment{2}, cs, 2);
  const double target = MomentTable<double>(mj, MomentKind::V_psi).value(2);
  const double rel = std::abs(m2.value / target - 1);
  ok = ok && rel <= kStationaryRelative;
  os << "; (c) " << m2.value << " +- " << fmt(m2.stderr_) << " vs " << target << " (" << fmt(100 * rel)
     << "%)";
  // (d)
  PathConfig cem = cfg;
  cem.replicas = out ? 0 : kEmReplicasPerNode;
  const auto th = intertwined_hitting_check(mj, 1.0, 1.0, cfg, cem);
  ok = ok && std::abs(th.z_exact) <= kMcStandardErrors;
  os << "; (d) " << th.lhs.value << " +- " << fmt(th.lhs.stderr_) << " vs " << th.rhs_exact << " ("
     << fmt(th.z_exact) << " SE)";
  if (cem.replicas > 0)
    os << " [EM right side " << th.rhs_em << " +- " << fmt(th.rhs_em_stderr) << ", "
       << fmt(th.z_em) << " joint SE, not gated]";
  if (out) {
    out->values = {ks, kill.value, kill.stderr_, m2.value, m2.stderr_, th.lhs.value, th.lhs.stderr_};
    out->values.insert(out->values.end(), a.begin(), a.end());
    out->values.insert(out->values.end(), b.begin(), b.end());
  }
  d = os.str();
  return ok;
}

inline bool c13(std::string& d, const AcceptanceOptions& o) {
  AcceptanceOptions one = o, many = o;
  one.threads = 1;
  many.threads = std::max(3, static_cast<int>(std::thread::hardware_concurrency()));
  McNumbers x, y;
  std::string ignored;
  c12(ignored, one, &x);
  c12(ignored, many, &y);
  const bool same = x.values.size() == y.values.size() &&
                    std::memcmp(x.values.data(), y.values.data(), x.values.size() * sizeof(double)) == 0;
  d = "threads 1 vs " + std::to_string(many.threads) + ": " + std::to_string(x.values.size()) +
      " numbers " + (same ? "bit-identical" : "DIFFER");
  return same;
}

}  // namespace acceptance

template <std::floating_point Real>
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& o,
                                            const std::function<void(const CriterionResult&)>& on_result = {}) {
  using namespace acceptance;
  struct Entry {
    int id;
    const char* title;
    double budget;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Entry> entries = {
      {1, "classical reduction P_n = c_n(-theta) L_n", 1, [](auto& d) { return c1<Real>(d); }},
      {2, "gamma factorization of moments", 1, [](auto& d) { return c2<Real>(d); }},
      {3, "W_phi functional equation and W = Gamma", 5, [](auto& d) { return c3<Real>(d); }},
      {4, "biorthogonality", 5, [](auto& d) { return c4<Real>(d); }},
      {5, "intertwining P_t Lambda = Lambda Q_t", 10, [&](auto& d) { return c5<Real>(d, o.seed); }},
      {6, "eigen and semigroup laws", 5, [&](auto& d) { return c6<Real>(d, o.seed); }},
      {7, "Bessel partial sums", 5, [&](auto& d) { return c7<Real>(d, o.seed); }},
      {8, "convergence bound", 5, [&](auto& d) { return c8<Real>(d, o.seed); }},
      {9, "Phi identities and Revuz constants", 1, [](auto& d) { return c9<Real>(d); }},
      {10, "Krein reconstruction", 10, [](auto& d) { return c10<Real>(d); }},
      {11, "Mellin-inversion density", 30, [](auto& d) { return c11<Real>(d); }},
      {12, "Monte Carlo cross-validation", 300, [&](auto& d) { return c12(d, o, nullptr); }},
      {13, "Monte Carlo determinism across thread counts", 600, [&](auto& d) { return c13(d, o); }},
  };
  std::vector<CriterionResult> out;
  for (const auto& e : entries) {
    if (!o.only.empty() && std::find(o.only.begin(), o.only.end(), e.id) == o.only.end()) continue;
    CriterionResult r;
    r.id = e.id;
    r.title = e.title;
    r.budget_seconds = e.budget;
    const auto start = std::chrono::steady_clock::now();
    try {
      r.passed = e.run(r.detail);
    } catch (const std::exception& ex) {
      r.passed = false;
      r.detail = std::string("exception: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.seconds > r.budget_seconds) {
      r.passed = false;
      r.detail += "; over time budget";
    }
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed ? "PASS" : "FAIL") << "  [" << r.id << "] " << r.title << ": " << r.detail << " ("
     << acceptance::fmt(r.seconds) << " s, budget " << r.budget_seconds << " s)";
  return os.str();
}

}  // namespace glsemi
