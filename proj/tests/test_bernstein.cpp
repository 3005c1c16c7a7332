#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include <glsemi/bernstein.hpp>

using namespace glsemi;

namespace {

LevyQuadruplet model_j() {
  return LevyQuadruplet{1.5 - std::sqrt(2.0) - std::log(2.0), 2.0, JumpMeasureSpec{{Atom{std::log(2.0), 1.0}}},
                        0.0};
}

// Brownian part with an exponential jump density, theta set by beta.
LevyQuadruplet model_exp() {
  return LevyQuadruplet{-0.3, 1.0, JumpMeasureSpec{{ExpDensity{0.7, 3.0}}}, 0.0};
}

}  // namespace

TEST(LaplaceExponent, ClassicalClosedForm) {
  for (double theta : {0.25, 0.5, 0.75}) {
    const auto q = classical_quadruplet(theta);
    for (double u : {0.0, 0.3, 1.0, 4.0}) EXPECT_NEAR(laplace_exponent<double>(q, u), u * (u - theta), 1e-15);
  }
}

TEST(LaplaceExponent, AtomModelByDirectFormula) {
  const auto q = model_j();
  for (double u : {0.1, 0.5, 2.0, 10.0}) {
    const double y = std::log(2.0);
    const double direct = q.beta * u + u * u + std::exp(-u * y) - 1 + u * y;
    EXPECT_NEAR(laplace_exponent<double>(q, u), direct, 1e-13 * std::max(1.0, u * u));
  }
}

TEST(LaplaceExponent, ExponentialDensityByQuadrature) {
  const auto q = model_exp();
  const auto& e = std::get<ExpDensity>(q.jumps.components[0]);
  for (double u : {0.2, 1.0, 5.0}) {
    // int_0^inf (e^{-uy} - 1 + u y 1{y<1}) c e^{-lambda y} dy by Simpson, split at the jump y = 1
    auto simpson = [&](double lo, double hi, bool small) {
      const int n = 100000;
      const double h = (hi - lo) / n;
      double s = 0;
      for (int i = 0; i <= n; ++i) {
        const double y = lo + i * h;
        const double f = (std::exp(-u * y) - 1 + (small ? u * y : 0)) * e.c * std::exp(-e.lambda * y);
        s += f * (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2));
      }
      return s * h / 3;
    };
    const double s = simpson(0, 1, true) + simpson(1, 40, false);
    const double expect = q.beta * u + q.sigma2 / 2 * u * u + s;
    EXPECT_NEAR(laplace_exponent<double>(q, u), expect, 1e-10 * std::max(1.0, std::abs(expect)));
  }
}

TEST(LaplaceExponent, ComplexAgreesOnRealAxisAndDerivativesMatchDifferences) {
  for (const auto& q : {model_j(), model_exp()}) {
    for (double u : {0.2, 1.0, 3.0}) {
      EXPECT_NEAR(laplace_exponent<double>(q, std::complex<double>(u, 0)).real(), laplace_exponent<double>(q, u),
                  1e-13);
      const double h = 1e-5;
      const double d1 = (laplace_exponent<double>(q, u + h) - laplace_exponent<double>(q, u - h)) / (2 * h);
      EXPECT_NEAR(laplace_exponent_d1<double>(q, u), d1, 1e-8);
      const double d2 = (laplace_exponent_d1<double>(q, u + h) - laplace_exponent_d1<double>(q, u - h)) / (2 * h);
      EXPECT_NEAR(laplace_exponent_d2<double>(q, u), d2, 1e-8);
    }
  }
}

TEST(FindTheta, RecoversConstructedRoots) {
  EXPECT_NEAR(find_theta<double>(model_j()), 0.5, 1e-14);
  for (double theta : {0.1, 0.25, 0.5, 0.9}) EXPECT_NEAR(find_theta<double>(classical_quadruplet(theta)), theta, 1e-14);
  const double t = find_theta<double>(model_exp());
  EXPECT_NEAR(laplace_exponent<double>(model_exp(), t), 0.0, 1e-14);
}

TEST(FindTheta, RejectsModelsWithoutRoot) {
  EXPECT_THROW(find_theta<double>(LevyQuadruplet{0.3, 2.0, {}, 0.0}), NoRootInUnitInterval);
  EXPECT_THROW(find_theta<double>(LevyQuadruplet{-0.5, 2.0, {}, 0.1}), DomainError);
}

TEST(Validate, RejectsBadParameters) {
  EXPECT_THROW((PsiModel<double>(LevyQuadruplet{-0.5, -1.0, {}, 0.0})), DomainError);
  EXPECT_THROW((PsiModel<double>(LevyQuadruplet{-0.5, 2.0, JumpMeasureSpec{{Atom{-1.0, 1.0}}}, 0.0})), DomainError);
  EXPECT_THROW((PsiModel<double>(LevyQuadruplet{-0.5, 2.0, JumpMeasureSpec{{ExpDensity{1.0, -2.0}}}, 0.0})),
               DomainError);
}

TEST(Classify, ModelJ) {
  const PsiModel<double> m(model_j());
  EXPECT_TRUE(m.flags().n_check);
  EXPECT_TRUE(m.flags().n_p);
  EXPECT_TRUE(m.flags().nbar_inf);
  EXPECT_FALSE(m.flags().n_up);
  ASSERT_TRUE(m.frakb().has_value());
  // double tail of a unit atom at y is y, so b = (beta + ln 2) / 2 = (3/2 - sqrt 2) / 2
  EXPECT_NEAR(*m.frakb(), (1.5 - std::sqrt(2.0)) / 2, 1e-15);
  EXPECT_NEAR(*m.frakb(), 0.042893, 5e-7);
}

TEST(Classify, ModelC) {
  const PsiModel<double> m(classical_quadruplet(0.5));
  ASSERT_TRUE(m.frakb().has_value());
  EXPECT_NEAR(*m.frakb(), -0.25, 1e-15);
}

TEST(Phi, IsPsiOverShiftAndContinuousAtTheta) {
  const PsiModel<double> m(model_j());
  for (double u : {0.0, 0.2, 1.0, 7.0}) EXPECT_NEAR(m.phi(u), m.psi(u) / (u - 0.5), 1e-13);
  EXPECT_NEAR(m.phi(0.5), m.psi_d1(0.5), 1e-14);
  // the quotient and the Taylor branch meet at |u - theta| = 1e-6
  EXPECT_NEAR(m.phi(0.5 + 1.0001e-6), m.phi(0.5 + 0.9999e-6), 1e-9);
  EXPECT_NEAR(m.phi(0.5 - 1.0001e-6), m.phi(0.5 - 0.9999e-6), 1e-9);
}

TEST(Phi, IsBernsteinOnAGrid) {
  // positive, nondecreasing, concave
  for (const auto& q : {model_j(), model_exp(), classical_quadruplet(0.3)}) {
    const PsiModel<double> m(q);
    double prev = m.phi(0.0), prev_slope = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 200; ++i) {
      const double u = 0.05 * i;
      const double v = m.phi(u);
      const double slope = (v - prev) / 0.05;
      EXPECT_GT(v, 0.0);
      EXPECT_GE(slope, -1e-9);
      EXPECT_LE(slope, prev_slope + 1e-7);
      prev = v;
      prev_slope = slope;
    }
  }
}

TEST(DerivedExponents, Definitions) {
  const PsiModel<double> m(model_j());
  for (double u : {0.5, 1.0, 3.0}) {
    EXPECT_NEAR(m.derived(DerivedKind::psi_up, u), m.psi(u + 0.5), 1e-14);
    EXPECT_NEAR(m.derived(DerivedKind::phi1, u), m.psi(u + 1) / (u + 1), 1e-14);
    EXPECT_NEAR(m.derived(DerivedKind::t1psi, u), u * m.psi(u + 1) / (u + 1), 1e-14);
    EXPECT_NEAR(m.derived(DerivedKind::phi_up, u), m.phi(u + 0.5), 1e-14);
  }
}

TEST(Wphi, ClassicalModelIsGamma) {
  const PsiModel<double> m(classical_quadruplet(0.5));
  WphiEvaluator<double> w(m);
  for (double x : {0.2, 0.9, 1.7, 4.5, 11.0})
    EXPECT_NEAR(w.log_w(std::complex<double>(x, 0)).first.real(), std::lgamma(x), 1e-12);
  for (auto z : {std::complex<double>(0.5, 3), std::complex<double>(2.0, -1.5)}) {
    const auto d = std::exp(w.log_w(z).first - lgamma_complex(z));
    EXPECT_NEAR(std::abs(d - 1.0), 0.0, 1e-11);
  }
}

TEST(Wphi, IntegerValuesAreProductsOfPhi) {
  const PsiModel<double> m(model_j());
  WphiEvaluator<double> w(m);
  double log_prod = 0;
  for (int n = 1; n <= 15; ++n) {
    log_prod += std::log(m.phi(n));
    EXPECT_NEAR(w.log_w(std::complex<double>(n + 1, 0)).first.real(), log_prod, 1e-12);
    EXPECT_NEAR(log_wphi_integer(m, n), log_prod, 1e-12);
  }
}

TEST(Wphi, FunctionalEquationResidual) {
  for (const auto& q : {model_j(), model_exp()}) {
    const PsiModel<double> m(q);
    WphiEvaluator<double> w(m);
    for (auto z : {std::complex<double>(0.25), std::complex<double>(1.5), std::complex<double>(0.5, 5)}) {
      EXPECT_LT(w(z).residual, 1e-8);
      const auto lhs = w.log_w(z + 1.0).first;
      const auto rhs = std::log(m.phi(z)) + w.log_w(z).first;
      EXPECT_NEAR(std::abs(std::exp(lhs - rhs) - 1.0), 0.0, 1e-10);
    }
  }
}

TEST(Wphi, AffineSplitAgreesWithPlainLimit) {
  const PsiModel<double> m(model_j());
  WphiEvaluator<double> split(m, true), plain(m, false);
  EXPECT_TRUE(split.uses_reference());
  EXPECT_FALSE(plain.uses_reference());
  for (double x : {0.3, 1.25, 3.7})
    EXPECT_NEAR(split.log_w(std::complex<double>(x, 0)).first.real(),
                plain.log_w(std::complex<double>(x, 0)).first.real(), 1e-9);
}

TEST(Wphi, LogConvexOnTheIntegers) {
  const PsiModel<double> m(model_j());
  for (int n = 1; n < 30; ++n) {
    const double a = log_wphi<double>(m, n), b = log_wphi<double>(m, n + 1), c = log_wphi<double>(m, n + 2);
    EXPECT_GE(a + c - 2 * b, -1e-12);
  }
}

TEST(Wphi, RejectsLeftHalfPlane) {
  const PsiModel<double> m(model_j());
  WphiEvaluator<double> w(m);
  EXPECT_THROW(w.log_w(std::complex<double>(-0.5, 1)), DomainError);
}

TEST(Wphi, ExtendedPrecisionAgrees) {
  const PsiModel<long double> ml(model_j());
  const PsiModel<double> md(model_j());
  for (double x : {0.7, 2.3})
    EXPECT_NEAR(static_cast<double>(log_wphi<long double>(ml, x)), log_wphi<double>(md, x), 1e-12);
}
