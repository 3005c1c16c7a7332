#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <thread>
#include <vector>

#include <glsemi/distributions.hpp>

using namespace glsemi;

namespace {

LevyQuadruplet model_j() {
  return LevyQuadruplet{1.5 - std::sqrt(2.0) - std::log(2.0), 2.0, JumpMeasureSpec{{Atom{std::log(2.0), 1.0}}},
                        0.0};
}

const PsiModel<double>& mj() {
  static const PsiModel<double> m(model_j());
  return m;
}

const DensityInverter<double>& density_j() {
  static const DensityInverter<double> d(mj());
  return d;
}

}  // namespace

TEST(Moments, ModelJLowOrder) {
  MomentTable<double> v(mj(), MomentKind::V_psi);
  EXPECT_DOUBLE_EQ(v.value(0), 1.0);
  EXPECT_NEAR(v.value(1), 2 - std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(v.value(1), 0.585786, 5e-7);
  // psi(2) = 25/4 - 2 sqrt 2
  EXPECT_NEAR(v.value(2), (2 - std::sqrt(2.0)) * (6.25 - 2 * std::sqrt(2.0)) / 2, 1e-13);
}

TEST(Moments, ClassicalModelIsGammaLaw) {
  for (double theta : {0.25, 0.5, 0.75}) {
    const PsiModel<double> m(classical_quadruplet(theta));
    MomentTable<double> v(m, MomentKind::V_psi), i(m, MomentKind::I_phi);
    for (int n = 0; n <= 40; ++n) {
      const double expect = std::lgamma(n + 1 - theta) - std::lgamma(1 - theta);
      EXPECT_NEAR(v.at(n).log_abs, expect, 1e-12 * std::max(1.0, expect));
      EXPECT_NEAR(i.at(n).log_abs, 0.0, 1e-13);
    }
  }
}

TEST(Moments, GammaFactorizationProperty) {
  const PsiModel<double> m(model_j());
  MomentTable<double> v(m, MomentKind::V_psi), i(m, MomentKind::I_phi), g(m, MomentKind::gamma);
  for (int n = 0; n <= 50; ++n) {
    const double lhs = v.at(n).log_abs + i.at(n).log_abs;
    EXPECT_NEAR(lhs, g.at(n).log_abs, 1e-11 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(Moments, RatioTestForDeterminacy) {
  // psi(n+1) / (n+1)^2 tends to sigma^2 / 2
  const double n = 1000;
  EXPECT_NEAR(mj().psi(n + 1) / ((n + 1) * (n + 1)), 1.0, 0.05);
}

TEST(Moments, LargeIndicesStayFinite) {
  MomentTable<double> v(mj(), MomentKind::V_psi);
  EXPECT_TRUE(std::isfinite(v.at(200).log_abs));
  EXPECT_GT(v.at(200).log_abs, 700.0);
  EXPECT_THROW(v.at(-1), DomainError);
}

TEST(Moments, ConcurrentExtensionIsConsistent) {
  MomentTable<double> shared(mj(), MomentKind::V_psi);
  std::vector<std::thread> pool;
  std::vector<double> got(8);
  for (int t = 0; t < 8; ++t)
    pool.emplace_back([&, t] { got[t] = shared.at(30 + t).log_abs - shared.at(30).log_abs; });
  for (auto& th : pool) th.join();
  MomentTable<double> fresh(mj(), MomentKind::V_psi);
  for (int t = 0; t < 8; ++t) EXPECT_DOUBLE_EQ(got[t], fresh.at(30 + t).log_abs - fresh.at(30).log_abs);
}

TEST(MellinV, ReproducesIntegerMoments) {
  MellinV<double> mellin(mj());
  MomentTable<double> v(mj(), MomentKind::V_psi);
  for (int n = 0; n <= 6; ++n)
    EXPECT_NEAR(mellin(std::complex<double>(n + 1, 0)).real() / v.value(n), 1.0, 1e-11);
  EXPECT_THROW(mellin(std::complex<double>(0.4, 0)), DomainError);
}

TEST(Density, ClassicalClosedForm) {
  const PsiModel<double> m(classical_quadruplet(0.5));
  const DensityInverter<double> d(m);
  for (double x : {0.1, 0.5, 1.0, 3.0, 10.0}) {
    const double exact = std::exp(-x) / std::sqrt(std::numbers::pi * x);
    const auto v = d(x);
    EXPECT_NEAR(v.value, exact, 1e-10);
    EXPECT_LT(v.err, 1e-8);
  }
}

TEST(Density, ClassicalQuarterTheta) {
  // Gamma(3/4) law
  const PsiModel<double> m(classical_quadruplet(0.25));
  const DensityInverter<double> d(m);
  for (double x : {0.2, 1.0, 4.0})
    EXPECT_NEAR(d(x).value, std::pow(x, -0.25) * std::exp(-x) / std::tgamma(0.75), 1e-9);
}

TEST(Density, ModelJMassAndMoments) {
  const auto& d = density_j();
  EXPECT_NEAR(d.integrate_power(0), 1.0, 1e-6);
  EXPECT_NEAR(d.integrate_power(1), 2 - std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(d.integrate_power(2), (2 - std::sqrt(2.0)) * (6.25 - 2 * std::sqrt(2.0)) / 2, 1e-6);
}

TEST(Density, ModelJIsNonnegativeWithSmallErrorEstimates) {
  const auto& d = density_j();
  for (int i = 0; i <= 40; ++i) {
    const double x = 0.01 * std::pow(1e4, i / 40.0);
    const auto v = d(x);
    EXPECT_GE(v.value, 0.0);
    EXPECT_LT(v.err, 1e-6 * std::max(1.0, v.value));
  }
}

TEST(Density, SmallXBehaviour) {
  const auto& d = density_j();
  const double x = 1e-4;
  EXPECT_NEAR(d(x).value / (d.small_x_coefficient() * std::pow(x, -0.5)), 1.0, 1e-2);
  EXPECT_THROW(d(0.0), DomainError);
}

TEST(GaussRule, ModelJReproducesMoments) {
  const auto rule = gauss_rule_iphi(mj(), 8);
  ASSERT_EQ(rule.nodes.size(), 8u);
  MomentTable<double> i(mj(), MomentKind::I_phi);
  for (int j = 0; j < 16; ++j)
    EXPECT_NEAR(rule.apply([&](double x) { return std::pow(x, j); }) / i.value(j), 1.0, 1e-9);
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    EXPECT_GT(rule.nodes[k], 0.0);
    EXPECT_GT(rule.weights[k], 0.0);
  }
}

TEST(GaussRule, ClassicalModelCollapsesToPointMass) {
  const PsiModel<double> m(classical_quadruplet(0.5));
  const auto rule = gauss_rule_iphi(m, 5);
  ASSERT_EQ(rule.nodes.size(), 1u);
  EXPECT_NEAR(rule.nodes[0], 1.0, 1e-12);
  EXPECT_NEAR(rule.weights[0], 1.0, 1e-12);
}

TEST(GaussRule, OrderCap) {
  EXPECT_THROW(gauss_rule_iphi(mj(), 9), DomainError);
  EXPECT_THROW(gauss_rule_iphi(mj(), 0), DomainError);
}

TEST(GaussRuleFromMoments, ExponentialLaw) {
  // moments k! of Exp(1); the 3-point rule has the Laguerre nodes
  std::vector<long double> mu;
  long double f = 1;
  for (int k = 0; k < 6; ++k) {
    mu.push_back(f);
    f *= k + 1;
  }
  const auto r = gauss_rule_from_moments(mu, 3);
  const double nodes[] = {0.41577455678347908, 2.2942803602790417, 6.2899450829374792};
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(static_cast<double>(r.nodes[k]), nodes[k], 1e-12);
}
