#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include <glsemi/acceptance.hpp>
#include <glsemi/montecarlo.hpp>

using namespace glsemi;

namespace {

LevyQuadruplet model_j() {
  return LevyQuadruplet{1.5 - std::sqrt(2.0) - std::log(2.0), 2.0, JumpMeasureSpec{{Atom{std::log(2.0), 1.0}}},
                        0.0};
}

PathConfig config(double dt, long replicas, std::uint64_t seed, int threads = 0) {
  PathConfig c;
  c.dt = dt;
  c.replicas = replicas;
  c.seed = seed;
  c.threads = threads;
  c.eps_absorb = 1e-10;
  return c;
}

ThetaShiftedPoly<double> x_theta(double theta) { return {Poly<double>::from_values({1.0}), theta}; }

PathSample manual_levy(double drift, double horizon, double h) {
  PathSample p;
  for (int k = 0; k * h <= horizon + 1e-12; ++k) {
    p.times.push_back(k * h);
    p.states.push_back(drift * k * h);
  }
  return p;
}

}  // namespace

TEST(Philox, KnownAnswerVectors) {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  EXPECT_EQ(philox4x32(A4{0, 0, 0, 0}, A2{0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, A2{0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RandomStream, ReproducibleAndSeparated) {
  RandomStream a(7, 3), b(7, 3), c(7, 4), d(7, 3, 1), e(8, 3);
  const double va = a.uniform();
  EXPECT_EQ(va, b.uniform());
  EXPECT_NE(va, c.uniform());
  EXPECT_NE(va, d.uniform());
  EXPECT_NE(va, e.uniform());
}

TEST(RandomStream, MomentsOfVariates) {
  RandomStream r(42, 0);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0, se = 0, sp = 0, umin = 1, umax = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
    se += r.exponential();
    sp += r.poisson(0.7);
  }
  EXPECT_GT(umin, 0.0);
  EXPECT_LT(umax, 1.0);
  EXPECT_NEAR(su / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sn / n, 0.0, 4 / std::sqrt(n));
  EXPECT_NEAR(sn2 / n, 1.0, 4 * std::sqrt(2.0 / n));
  EXPECT_NEAR(se / n, 1.0, 4 / std::sqrt(n));
  EXPECT_NEAR(sp / n, 0.7, 4 * std::sqrt(0.7 / n));
}

TEST(SimulateLevy, MeanAndVarianceOfIncrements) {
  // E xi_1 = beta (the atom lies below 1), Var xi_1 = sigma^2 + w y^2
  const auto q = model_j();
  PathConfig cfg = config(0.1, 1, 1);
  cfg.horizon = 1;
  const auto finals = run_replicas(40000, 0, [&](long i) {
    RandomStream rng(5, static_cast<std::uint64_t>(i));
    return simulate_levy(q, cfg, rng).states.back();
  });
  const auto e = summarize(finals);
  const double var = 2 + std::log(2.0) * std::log(2.0);
  EXPECT_NEAR(e.value, q.beta, 4 * std::sqrt(var / 40000));
  double ss = 0;
  for (double v : finals) ss += (v - e.value) * (v - e.value);
  EXPECT_NEAR(ss / 40000, var, 0.05 * var);
}

TEST(SimulateLevy, ExponentialMomentMatchesLaplaceExponent) {
  // E[e^{z xi_t}] = e^{t psi(z)}
  const auto q = model_j();
  const double z = 0.8;
  const auto v = run_replicas(40000, 0, [&](long i) {
    RandomStream rng(6, static_cast<std::uint64_t>(i));
    LevySampler lev(q);
    return std::exp(z * lev.sample(rng, 1.0));
  });
  const auto e = summarize(v);
  EXPECT_NEAR(e.value, std::exp(laplace_exponent<double>(q, z)), 4 * e.stderr_);
}

TEST(SimulateLevy, ZeroHorizonGivesEmptyPath) {
  PathConfig cfg = config(0.1, 1, 1);
  cfg.horizon = 0;
  RandomStream rng(1, 0);
  EXPECT_TRUE(simulate_levy(model_j(), cfg, rng).times.empty());
}

TEST(LampertiPath, ConstantLevyPathGivesConstantProcess) {
  const auto p = lamperti_path(manual_levy(0, 2, 0.1), 3.0);
  for (std::size_t k = 0; k < p.times.size(); ++k) {
    EXPECT_DOUBLE_EQ(p.states[k], 3.0);
    EXPECT_NEAR(p.times[k], 3.0 * 0.1 * k, 1e-12);
  }
}

TEST(LampertiPath, UnitDriftGivesLinearGrowth) {
  // xi_s = s gives Xbar_t = x0 + t
  const auto p = lamperti_path(manual_levy(1, 3, 1e-4), 2.0);
  for (double t : {0.5, 5.0, 20.0}) EXPECT_NEAR(path_value(p, t), 2.0 + t, 1e-6 * (2 + t));
}

TEST(LampertiPath, SelfSimilarScaling) {
  // same Levy path from c x0: times and states scale by c
  PathConfig cfg = config(0.01, 1, 1);
  cfg.horizon = 2;
  RandomStream rng(9, 0);
  const auto levy = simulate_levy(model_j(), cfg, rng);
  const auto a = lamperti_path(levy, 1.0), b = lamperti_path(levy, 2.5);
  ASSERT_EQ(a.times.size(), b.times.size());
  for (std::size_t k = 0; k < a.times.size(); ++k) {
    EXPECT_NEAR(b.times[k], 2.5 * a.times[k], 1e-12 * b.times[k] + 1e-300);
    EXPECT_NEAR(b.states[k], 2.5 * a.states[k], 1e-12 * b.states[k]);
  }
}

TEST(LampertiPath, AbsorptionAndClockOverrun) {
  const auto p = lamperti_path(manual_levy(-1, 10, 0.01), 1.0, 0.01);
  ASSERT_TRUE(p.absorbed);
  EXPECT_NEAR(p.absorption_time, 0.99, 1e-3);  // xi_s = -s: Xbar_t = 1 - t
  EXPECT_EQ(path_value(p, 5.0), 0.0);
  const auto q = lamperti_path(manual_levy(0, 1, 0.1), 1.0);
  EXPECT_THROW(path_value(q, 2.0), ClockOverrun);
  EXPECT_THROW(lamperti_path(manual_levy(0, 1, 0.1), -1.0), DomainError);
}

TEST(LaguerrePath, TimeChangeOfLinearPath) {
  // Xbar_t = x0 + t gives X_t = e^{-t}(x0 + e^t - 1)
  const auto ssmp = lamperti_path(manual_levy(1, 4, 1e-4), 2.0);
  const auto p = laguerre_path(ssmp, 2.0, 0.5);
  ASSERT_EQ(p.times.size(), 5u);
  for (std::size_t k = 0; k < p.times.size(); ++k) {
    const double t = p.times[k];
    EXPECT_NEAR(p.states[k], std::exp(-t) * (2 + std::expm1(t)), 1e-6);
  }
}

TEST(KilledSemigroup, ModelJAgainstEigenvalue) {
  // x^theta is an eigenfunction of the killed semigroup with rate theta
  const PsiModel<double> m(model_j());
  PathConfig cfg = config(1e-2, 20000, 2024);
  const auto e = estimate(m, KilledSemigroup{x_theta(0.5), 1.0, 1.0}, cfg);
  EXPECT_NEAR(e.value, std::exp(-0.5), 3 * e.stderr_);
}

TEST(KilledSemigroup, ClassicalFromOtherStart) {
  const PsiModel<double> m(classical_quadruplet(0.5));
  PathConfig cfg = config(1e-2, 20000, 77);
  const auto e = estimate(m, KilledSemigroup{x_theta(0.5), 2.0, 0.5}, cfg);
  EXPECT_NEAR(e.value, std::sqrt(2.0) * std::exp(-0.25), 3 * e.stderr_);
}

TEST(ClassicalHitting, ClosedFormAtHalf) {
  // E[(G/(G+1))] with G ~ Gamma(1/2) equals 1 - sqrt(pi) e erfc(1)
  const double exact = 1 - std::sqrt(std::numbers::pi) * std::exp(1.0) * std::erfc(1.0);
  EXPECT_NEAR(classical_hitting_laplace(0.5, 1.0, 1.0), exact, 1e-10);
  EXPECT_NEAR(exact, 0.242128, 1e-6);
  EXPECT_DOUBLE_EQ(classical_hitting_laplace(0.5, 1.0, 0.0), 1.0);
}

TEST(ClassicalHitting, MonotoneInStartAndRate) {
  double prev = 1;
  for (double x : {0.1, 0.5, 1.0, 3.0}) {
    const double v = classical_hitting_laplace(0.5, 1.0, x);
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_GT(classical_hitting_laplace(0.5, 0.5, 1.0), classical_hitting_laplace(0.5, 2.0, 1.0));
}

TEST(HittingLaplace, ClassicalPipelineMatchesExactLaw) {
  const PsiModel<double> m(classical_quadruplet(0.5));
  const auto e = estimate(m, HittingLaplace{1.0, 1.0}, config(1e-2, 20000, 31));
  EXPECT_NEAR(e.value, classical_hitting_laplace(0.5, 1.0, 1.0), 3 * e.stderr_);
}

TEST(HittingLaplace, MonotoneInStartingPoint) {
  // common random numbers: larger starts hit later
  const PsiModel<double> m(model_j());
  const PathConfig cfg = config(1e-2, 4000, 8);
  const double a = estimate(m, HittingLaplace{1.0, 0.5}, cfg).value;
  const double b = estimate(m, HittingLaplace{1.0, 1.0}, cfg).value;
  const double c = estimate(m, HittingLaplace{1.0, 2.0}, cfg).value;
  EXPECT_GT(a, b);
  EXPECT_GT(b, c);
}

TEST(HittingLaplace, EpsilonSensitivityIsSmall) {
  const PsiModel<double> m(model_j());
  PathConfig coarse = config(1e-2, 10000, 12), fine = coarse;
  coarse.eps_absorb = 1e-6;
  fine.eps_absorb = 1e-10;
  const auto a = estimate(m, HittingLaplace{1.0, 1.0}, coarse);
  const auto b = estimate(m, HittingLaplace{1.0, 1.0}, fine);
  EXPECT_NEAR(a.value, b.value, 3 * std::hypot(a.stderr_, b.stderr_) + 2e-3);
}

TEST(IntertwinedHitting, ClassicalModelHasTrivialKernel) {
  const PsiModel<double> m(classical_quadruplet(0.5));
  EXPECT_NEAR(intertwined_hitting_exact(m, 1.0, 1.0), classical_hitting_laplace(0.5, 1.0, 1.0), 1e-12);
}

TEST(IntertwinedHitting, ModelJLeftSideMatchesKernelOfClassicalLaw) {
  const PsiModel<double> m(model_j());
  PathConfig cem = config(1e-2, 0, 1);
  const auto r = intertwined_hitting_check(m, 1.0, 1.0, config(1e-2, 20000, 55), cem);
  EXPECT_NEAR(r.rhs_exact, 0.267082761796, 1e-9);
  EXPECT_LE(std::abs(r.z_exact), 3.0);
}

TEST(ClassicalEm, MeanFollowsLinearOde) {
  const double theta = 0.5, x0 = 2.0;
  PathConfig cfg = config(1e-2, 1, 1);
  const auto v = run_replicas(20000, 0, [&](long i) {
    RandomStream rng(13, static_cast<std::uint64_t>(i));
    return simulate_classical(theta, cfg, x0, rng, false, ClassicalStepRule{0.01, 1e-2}).states.back();
  });
  const auto e = summarize(v);
  EXPECT_NEAR(e.value, std::exp(-1.0) * x0 + (1 - std::exp(-1.0)) * (1 - theta), 4 * e.stderr_);
  for (double s : v) EXPECT_GE(s, 0.0);
}

TEST(ClassicalEm, PipelineAgreesInDistribution) {
  const auto [a, b] = acceptance::classical_samples(0.5, 1.0, 0.5, 4000, 3, 0);
  // two-sample KS critical value at the 0.1% level is 1.95 sqrt(2/n)
  EXPECT_LT(acceptance::ks_distance(a, b), 1.95 * std::sqrt(2.0 / 4000));
  const auto absorbed = [](const std::vector<double>& v) { return std::count(v.begin(), v.end(), 0.0); };
  EXPECT_NEAR(double(absorbed(a)), double(absorbed(b)), 4 * std::sqrt(double(absorbed(a)) + 1));
}

TEST(KsDistance, KnownValues) {
  EXPECT_DOUBLE_EQ(acceptance::ks_distance({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(acceptance::ks_distance({1, 2}, {3, 4}), 1.0);
  EXPECT_DOUBLE_EQ(acceptance::ks_distance({1, 3}, {2, 4}), 0.5);
}

TEST(Recurrent, StationaryFirstMoment) {
  const PsiModel<double> m(model_j());
  PathConfig cfg = config(1e-2, 400, 17);
  cfg.eps_absorb = 1e-3;
  cfg.horizon = 30;
  const auto e = estimate(m, StationaryMoment{1, 5, 1.0}, cfg);
  const double target = 2 - std::sqrt(2.0);
  EXPECT_NEAR(e.value, target, std::max(0.05 * target, 3 * e.stderr_));
}

TEST(Recurrent, PathStaysPositiveAndLeavesZero) {
  PathConfig cfg = config(1e-2, 1, 1);
  cfg.eps_absorb = 1e-3;
  cfg.horizon = 20;
  RandomStream rng(4, 0);
  const auto p = simulate_recurrent_laguerre(classical_quadruplet(0.5), cfg, 1.0, 0.1, rng);
  ASSERT_EQ(p.times.size(), 201u);
  for (double s : p.states) EXPECT_GT(s, 0.0);
  EXPECT_FALSE(p.absorbed);
}

TEST(Determinism, IdenticalAcrossThreadCounts) {
  const PsiModel<double> m(model_j());
  const auto a = sample_observable(model_j(), KilledSemigroup{x_theta(0.5), 1.0, 1.0}, config(1e-2, 3000, 99, 1));
  const auto b = sample_observable(model_j(), KilledSemigroup{x_theta(0.5), 1.0, 1.0}, config(1e-2, 3000, 99, 4));
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)), 0);
  const auto ea = summarize(a), eb = summarize(b);
  EXPECT_EQ(std::memcmp(&ea.value, &eb.value, sizeof(double)), 0);
}

TEST(RunReplicas, PropagatesExceptions) {
  EXPECT_THROW(run_replicas(1000, 3,
                            [](long i) -> double {
                              if (i == 517) throw std::runtime_error("boom");
                              return 0;
                            }),
               std::runtime_error);
}

TEST(Summarize, MeanAndStandardError) {
  const auto e = summarize({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(e.value, 2.5);
  EXPECT_NEAR(e.stderr_, std::sqrt(5.0 / 3 / 4), 1e-15);
  EXPECT_EQ(e.replicas, 4);
}

TEST(Walkers, RejectBadArguments) {
  EXPECT_THROW(LaguerreWalker(model_j(), 0.0), DomainError);
  RandomStream rng(1, 0);
  LaguerreWalker w(model_j(), 1e-2);
  EXPECT_THROW(w.run(-1.0, 1.0, 1e-10, rng), DomainError);
  EXPECT_THROW(simulate_classical(1.5, config(1e-2, 1, 1), 1.0, rng), DomainError);
}
