#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <glsemi/localtime_krein.hpp>
#include <glsemi/quadrature.hpp>

using namespace glsemi;

namespace {

LevyQuadruplet model_j() {
  return LevyQuadruplet{1.5 - std::sqrt(2.0) - std::log(2.0), 2.0, JumpMeasureSpec{{Atom{std::log(2.0), 1.0}}},
                        0.0};
}

// theta Gamma(q + theta) / (Gamma(q) Gamma(1 + theta)) straight from tgamma
double phi_x_direct(double theta, double q) {
  return theta * std::tgamma(q + theta) / (std::tgamma(q) * std::tgamma(1 + theta));
}

}  // namespace

TEST(PhiX, ClosedFormAndNormalization) {
  for (double theta : {0.25, 0.5, 0.75}) {
    const auto phi = SubordinatorExponent<double>::make(SubordinatorTag::X_laguerre, theta);
    EXPECT_NEAR(phi(1.0), theta, 1e-15);
    for (double q : {0.1, 0.7, 3.0, 20.0}) EXPECT_NEAR(phi(q) / phi_x_direct(theta, q), 1.0, 1e-13);
  }
}

TEST(PhiX, RatioIdentityAndLargeArguments) {
  const auto phi = SubordinatorExponent<double>::make(SubordinatorTag::X_laguerre, 0.5);
  for (int i = 0; i < 100; ++i) {
    const double q = 0.01 * std::pow(1e6, i / 99.0);
    EXPECT_NEAR(phi(q + 1) / phi(q), (q + 0.5) / q, 1e-12 * (q + 0.5) / q);
  }
  // Phi_X(q) ~ theta q^theta / Gamma(1+theta)
  EXPECT_NEAR(phi(1e8) / (0.5 * 1e4 / std::tgamma(1.5)), 1.0, 1e-8);
}

TEST(PhiX, DependsOnlyOnTheta) {
  const PsiModel<double> mj(model_j()), mc(classical_quadruplet(0.5));
  for (double q : {0.2, 1.0, 9.0})
    EXPECT_DOUBLE_EQ(phi_subordinator(SubordinatorTag::X_laguerre, mj, q),
                     phi_subordinator(SubordinatorTag::X_laguerre, mc, q));
}

TEST(PhiXbar, SelfSimilarScaling) {
  const auto phi = SubordinatorExponent<double>::make(SubordinatorTag::Xbar_selfsimilar, 0.3);
  for (double q : {0.5, 2.0})
    for (double c : {0.1, 7.0}) EXPECT_NEAR(phi(c * q), std::pow(c, 0.3) * phi(q), 1e-13 * phi(c * q));
}

TEST(PhiExponents, AreBernsteinAndPick) {
  for (auto tag : {SubordinatorTag::X_laguerre, SubordinatorTag::Xbar_selfsimilar, SubordinatorTag::tilde_Y}) {
    const auto phi = SubordinatorExponent<double>::make(tag, 0.5);
    const auto r = pick_bernstein_check(phi, default_pick_grid<double>());
    EXPECT_TRUE(r.pick_ok) << to_string(tag);
    EXPECT_TRUE(r.bernstein_ok) << to_string(tag);
  }
}

TEST(PhiExponents, SyntheticNonBernsteinIsFlagged) {
  const SubordinatorExponent<double> bad(
      SubordinatorTag::synthetic, 0.5, [](std::complex<double> q) { return q * q; }, [](double q) { return q * q; });
  EXPECT_FALSE(pick_bernstein_check(bad, default_pick_grid<double>()).bernstein_ok);
}

TEST(Revuz, MultiplicativeConsistency) {
  for (const auto& q : {model_j(), classical_quadruplet(0.5)}) {
    const PsiModel<double> m(q);
    const auto r = revuz_constants(m);
    EXPECT_LT(r.max_deviation, 1e-12);
    EXPECT_NEAR(r.c_m, 0.5 / std::sqrt(std::numbers::pi), 1e-15);
  }
}

TEST(Revuz, ClassicalConstantsCoincide) {
  const PsiModel<double> m(classical_quadruplet(0.5));
  const auto r = revuz_constants(m);
  EXPECT_NEAR(r.c_frak_m, r.c_m, 1e-12);
}

TEST(LevyKhintchine, KillingAndDrift) {
  const auto phi = SubordinatorExponent<double>::make(SubordinatorTag::X_laguerre, 0.5);
  const auto parts = lk_parts<double>([&](double q) { return phi(q); });
  EXPECT_EQ(parts.delta, 0.0);
  EXPECT_EQ(parts.gamma, 0.0);
  const auto parts2 = lk_parts<double>([](double q) { return 0.3 + 2 * q + std::sqrt(q); });
  EXPECT_NEAR(parts2.delta, 0.3, 1e-6);
  EXPECT_NEAR(parts2.gamma, 2.0, 1e-6);
  EXPECT_NEAR(last_exit_laplace<double>([](double q) { return 0.3 + q; }, 1.0), 0.3 / 1.3, 1e-8);
}

TEST(Krein, AtomsSitOnKilledSpectrum) {
  const auto atoms = krein_atoms<double>(0.5, 100);
  ASSERT_EQ(atoms.size(), 101u);
  for (std::size_t n = 0; n < atoms.size(); ++n) {
    EXPECT_EQ(atoms[n].location, n + 0.5);
    EXPECT_GT(atoms[n].weight, 0.0);
  }
}

TEST(Krein, ReconstructsPhiX) {
  for (double theta : {0.25, 0.5, 0.75}) {
    const auto atoms = krein_atoms<double>(theta, 10000);
    const auto phi = SubordinatorExponent<double>::make(SubordinatorTag::X_laguerre, theta);
    for (double q : {0.1, 0.5, 1.0, 3.0, 10.0}) EXPECT_NEAR(krein_reconstruction(atoms, q) / phi(q), 1.0, 1e-3);
  }
}

TEST(Krein, ReconstructionByDirectQuadratureOfLevyDensity) {
  // Phi(q) = int_0^inf (1 - e^{-q r}) sum_n w_n e^{-a_n r} dr, integrated numerically
  const double theta = 0.5, q = 2.0;
  const auto atoms = krein_atoms<double>(theta, 4000);
  auto density = [&](double r) {
    double s = 0;
    for (const auto& a : atoms) s += a.weight * std::exp(-a.location * r);
    return s;
  };
  const double cut = 1e-2;
  double total = 0;
  for (double lo = cut; lo < 60; lo *= 1.5)
    total += integrate_gl<double>([&](double r) { return -std::expm1(-q * r) * density(r); }, lo, lo * 1.5, 1, 10);
  // near 0 the density is ~ C r^{-1-theta}, so the omitted piece is ~ q C cut^{1-theta} / (1-theta)
  const double C = theta * std::sin(std::numbers::pi * theta) / std::numbers::pi;
  total += q * C * std::pow(cut, 1 - theta) / (1 - theta);
  EXPECT_NEAR(total / phi_x_direct(theta, q), 1.0, 5e-3);
}

TEST(ExcursionSurvival, SelfSimilarIsPowerLaw) {
  EXPECT_NEAR(excursion_survival<double>(SubordinatorTag::Xbar_selfsimilar, 0.5, 1.0, 4.0), 0.5, 1e-15);
  const double s1 = excursion_survival<double>(SubordinatorTag::X_laguerre, 0.5, 1.0, 2.0);
  const double s2 = excursion_survival<double>(SubordinatorTag::X_laguerre, 0.5, 2.0, 3.0);
  const double s12 = excursion_survival<double>(SubordinatorTag::X_laguerre, 0.5, 1.0, 3.0);
  EXPECT_GT(s1, 0.0);
  EXPECT_LT(s1, 1.0);
  EXPECT_NEAR(s1 * s2, s12, 1e-10);
  EXPECT_THROW(excursion_survival<double>(SubordinatorTag::X_laguerre, 0.5, 2.0, 1.0), DomainError);
}

TEST(Subordinators, TagParsing) {
  EXPECT_EQ(subordinator_tag_from_string("X_laguerre"), SubordinatorTag::X_laguerre);
  EXPECT_EQ(subordinator_tag_from_string("Xbar"), SubordinatorTag::Xbar_selfsimilar);
  EXPECT_THROW(subordinator_tag_from_string("nope"), DomainError);
  EXPECT_THROW(SubordinatorExponent<double>::make(SubordinatorTag::X_laguerre, 1.2), DomainError);
}
