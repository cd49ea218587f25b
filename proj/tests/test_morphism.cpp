#include <gtest/gtest.h>

#include <cmath>

#include "hmcheck/gallery.hpp"
#include "hmcheck/morphism.hpp"
#include "hmcheck/tensor.hpp"

using namespace hmc;

namespace {

SubmersionSpec map_of(const std::string& name) { return *builtin(name).map; }

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

// Curvature of e^{2f} delta on flat space, for f = log 2 + log |x|:
// R~(X,Y,X,Y) = -e^{2f} [A(X,X)|Y|^2 + A(Y,Y)|X|^2 - 2 A(X,Y) <X,Y>],
// A = Hess f - df df + |df|^2 delta / 2.
double conformal_hopf_oracle(const Eigen::VectorXd& p, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double r2 = p.squaredNorm();
  const Eigen::VectorXd df = p / r2;
  const Eigen::MatrixXd hess = Eigen::MatrixXd::Identity(4, 4) / r2 - 2.0 * p * p.transpose() / (r2 * r2);
  const Eigen::MatrixXd a = hess - df * df.transpose() + 0.5 * df.squaredNorm() * Eigen::MatrixXd::Identity(4, 4);
  const double e2f = 4.0 * r2;
  return -e2f * (x.dot(a * x) * y.squaredNorm() + y.dot(a * y) * x.squaredNorm() - 2.0 * x.dot(a * y) * x.dot(y));
}

}  // namespace

TEST(Differential, HopfAtBasePoint) {
  const SubmersionSpec hopf = map_of("hopf");
  const Eigen::MatrixXd d = values(differential(hopf, vec({1, 0, 0, 0})));
  Eigen::MatrixXd want(3, 4);
  want << 2, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, -2;
  EXPECT_LE((d - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Differential, ProjectionIsZeroThenIdentity) {
  const SubmersionSpec pr = map_of("product_projection(3)");
  const Eigen::MatrixXd d = values(differential(pr, vec({0.1, 0.2, -0.3, 0.4})));
  Eigen::MatrixXd want = Eigen::MatrixXd::Zero(3, 4);
  want.rightCols(3).setIdentity();
  EXPECT_EQ(d, want);
}

TEST(VerticalKernel, ProjectionAndHopf) {
  const Eigen::VectorXd kp = values(vertical_kernel(map_of("product_projection(3)"), vec({0.1, 0.2, -0.3, 0.4})));
  EXPECT_EQ(kp, vec({1, 0, 0, 0}));
  const Eigen::VectorXd kh = values(vertical_kernel(map_of("hopf"), vec({1, 0, 0, 0})));
  EXPECT_DOUBLE_EQ(std::abs(kh[1]), kh.norm());
  EXPECT_GT(kh.norm(), 0.0);
}

TEST(VerticalKernel, HopfOriginIsCritical) {
  const SubmersionSpec hopf = map_of("hopf");
  try {
    vertical_kernel(hopf, Eigen::VectorXd::Zero(4));
    FAIL() << "expected CriticalPoint";
  } catch (const CriticalPoint& e) {
    EXPECT_EQ(e.point(), Eigen::VectorXd::Zero(4));
  }
  EXPECT_THROW(dilation(hopf, Eigen::VectorXd::Zero(4)), CriticalPoint);
}

TEST(Dilation, RiemannianSubmersion) {
  const Dilation d = dilation(map_of("product_projection(3)"), vec({0.3, -0.1, 0.2, 0.5}));
  EXPECT_DOUBLE_EQ(d.lambda2.value(), 1.0);
  EXPECT_DOUBLE_EQ(d.sigma.value(), 0.0);
  EXPECT_EQ(d.hconf_residual, 0.0);
}

TEST(Dilation, HopfIsFourRSquared) {
  const SubmersionSpec hopf = map_of("hopf");
  for (int s = 0; s < 20; ++s) {
    const Eigen::VectorXd p = sample_point(hopf.domain, 3, s);
    const Dilation d = dilation(hopf, p);
    const double want = 4.0 * p.squaredNorm();
    EXPECT_NEAR(d.lambda2.value(), want, 1e-12 * want);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(d.lambda2.grad(i), 8.0 * p[i], 1e-11);
    EXPECT_LE(d.hconf_residual, 1e-10);
  }
}

TEST(Dilation, WarpedExampleMatchesClosedForm) {
  for (int n : {3, 4, 5}) {
    const SubmersionSpec ex = map_of("example32(" + std::to_string(n) + ")");
    for (int s = 0; s < 10; ++s) {
      const Eigen::VectorXd p = sample_point(ex.domain, 5, s);
      const double t = p[0];
      const double x2 = p.tail(n).squaredNorm();
      const double want = std::pow(1.0 - t * t * x2, 2.0 / (n - 1));
      const Dilation d = dilation(ex, p);
      EXPECT_NEAR(d.lambda2.value(), want, 1e-12);
      EXPECT_NEAR(d.sigma.value(), 0.5 * std::log(want), 1e-12);
      EXPECT_LE(d.hconf_residual, 1e-10);
      // d lambda^2 / dt = (2/(n-1)) (1 - t^2|x|^2)^(2/(n-1) - 1) (-2 t |x|^2)
      const double dt = 2.0 / (n - 1) * std::pow(1.0 - t * t * x2, 2.0 / (n - 1) - 1.0) * (-2.0 * t * x2);
      EXPECT_NEAR(d.lambda2.grad(0), dt, 1e-11);
    }
  }
}

TEST(Tension, HarmonicMaps) {
  for (const char* name : {"hopf", "example32(3)", "example32(4)", "flat_projection(6,4)", "product_projection(3)"}) {
    const SubmersionSpec s = map_of(name);
    for (int k = 0; k < 10; ++k) {
      const Tension t = tension(s, sample_point(s.domain, 11, k));
      EXPECT_LE(t.harmonic_residual, 1e-8) << name;
    }
  }
}

TEST(Tension, WarpedFibreIsNotHarmonic) {
  const SubmersionSpec s = map_of("nonharmonic_warp(3)");
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) worst = std::max(worst, tension(s, sample_point(s.domain, 11, k)).harmonic_residual);
  EXPECT_GT(worst, 1e-2);
}

TEST(FiberData, ProductProjection) {
  const FiberData f = fundamental_data(map_of("product_projection(3)"), vec({0.2, 0.1, -0.4, 0.3}));
  EXPECT_EQ(values(f.V), vec({1, 0, 0, 0}));
  EXPECT_EQ(values(f.theta), vec({1, 0, 0, 0}));
  EXPECT_EQ(f.omega.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(f.v_sigma, 0.0);
}

TEST(FiberData, HopfIsKillingWithCurvedHorizontal) {
  const SubmersionSpec hopf = map_of("hopf");
  for (int s = 0; s < 10; ++s) {
    const FiberData f = fundamental_data(hopf, sample_point(hopf.domain, 2, s));
    EXPECT_LE(std::abs(f.v_sigma), 1e-10);
    EXPECT_GT(f.omega.norm(), 1e-2);
    EXPECT_EQ(f.omega, -f.omega.transpose());
  }
}

TEST(FiberData, WarpedExampleAtReferencePoint) {
  const FiberData f = fundamental_data(map_of("example32(3)"), vec({0.5, 0.6, 0, 0}));
  EXPECT_LE(f.omega.cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_GT(std::abs(f.v_sigma), 1e-3);
}

TEST(FiberData, InvariantsOnEveryOneFibreMap) {
  for (const char* name : {"hopf", "example32(3)", "example32(4)", "example32(5)", "product_projection(3)"}) {
    const SubmersionSpec s = map_of(name);
    for (int k = 0; k < 30; ++k) {
      LocalMorphism lm(s, sample_point(s.domain, 42, k));
      const FiberInvariants r = fiber_invariants(lm);
      EXPECT_LE(r.kernel, 1e-10) << name;
      EXPECT_LE(r.v_norm, 1e-10) << name;
      EXPECT_LE(r.theta_v, 1e-10) << name;
      EXPECT_LE(r.theta_h, 1e-10) << name;
      EXPECT_LE(r.lift_system, 1e-11) << name;
      EXPECT_LE(r.omega_vertical, 1e-9) << name;
      EXPECT_LE(r.omega_lie, 1e-8) << name;
      EXPECT_LE(r.lift_bracket, 1e-9) << name;
      EXPECT_LE(r.reconstruction, 1e-9) << name;
    }
  }
}

TEST(FiberData, CommutatorTracksHarmonicity) {
  const SubmersionSpec s = map_of("nonharmonic_warp(3)");
  double bracket = 0.0, harmonic = 0.0;
  for (int k = 0; k < 10; ++k) {
    LocalMorphism lm(s, sample_point(s.domain, 8, k));
    bracket = std::max(bracket, fiber_invariants(lm).lift_bracket);
    harmonic = std::max(harmonic, lm.tension().harmonic_residual);
  }
  EXPECT_GT(harmonic, 1e-2);
  EXPECT_GT(bracket, 1e-2);
}

TEST(FiberData, KillingCriterion) {
  // V(sigma) = 0 exactly when V is Killing on the horizontal frame.
  for (const char* name : {"hopf", "example32(3)"}) {
    const SubmersionSpec s = map_of(name);
    for (int k = 0; k < 10; ++k) {
      LocalMorphism lm(s, sample_point(s.domain, 9, k));
      const bool killing_sigma = std::abs(lm.v_sigma()) <= 1e-9;
      const bool killing_lie = fiber_invariants(lm).killing_h <= 1e-9;
      EXPECT_EQ(killing_sigma, killing_lie) << name << " sample " << k;
    }
  }
}

TEST(BasicLift, ProjectionLiftsAreCoordinateFields) {
  const SubmersionSpec pr = map_of("product_projection(3)");
  for (int a = 0; a < 3; ++a) EXPECT_EQ(values(basic_lift(pr, vec({0.1, 0.2, 0.3, 0.4}), a)), Eigen::VectorXd::Unit(4, a + 1));
  EXPECT_THROW(basic_lift(pr, vec({0.1, 0.2, 0.3, 0.4}), 3), std::out_of_range);
}

TEST(BasicLift, HopfCommutesWithV) {
  const SubmersionSpec hopf = map_of("hopf");
  for (int k = 0; k < 20; ++k) {
    LocalMorphism lm(hopf, sample_point(hopf.domain, 4, k));
    for (int a = 0; a < 3; ++a) {
      const Eigen::VectorXd br = values(bracket(lm.V(), lm.lift(a)));
      EXPECT_LE(br.norm(), 1e-9);
    }
  }
}

TEST(Integrability, ProjectionAndWarpedExampleVanish) {
  for (const char* name : {"product_projection(3)", "example32(3)", "example32(4)"}) {
    const SubmersionSpec s = map_of(name);
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd p = sample_point(s.domain, 6, k);
      for (int a = 0; a < s.n(); ++a)
        for (int b = a + 1; b < s.n(); ++b) EXPECT_LE(integrability_tensor(s, p, a, b).norm(), 1e-9) << name;
    }
  }
  EXPECT_THROW(integrability_tensor(map_of("hopf"), vec({1, 0, 0, 0}), 1, 1), std::invalid_argument);
}

TEST(Integrability, HopfIsNonintegrable) {
  const SubmersionSpec hopf = map_of("hopf");
  const Eigen::VectorXd i = integrability_tensor(hopf, vec({1, 0, 0, 0}), 1, 2);
  // Lifts e3/2 and -e4/2 bracket to a multiple of the fibre direction e2.
  EXPECT_GT(i.norm(), 0.1);
  EXPECT_NEAR(std::abs(i[1]), i.norm(), 1e-12);
}

TEST(Oneill, HopfCalibration) {
  const SubmersionSpec hopf = map_of("hopf");
  const Eigen::VectorXd p = vec({1, 0, 0, 0});
  LocalMorphism lm(hopf, p);
  const Eigen::VectorXd x = Eigen::VectorXd::Unit(4, 2) / 2.0;
  const Eigen::VectorXd y = Eigen::VectorXd::Unit(4, 3) / 2.0;
  const OneillTerms t = oneill_terms(lm, x, y);
  EXPECT_NEAR(t.lhs, conformal_hopf_oracle(p, x, y), 1e-9);
  EXPECT_NEAR(t.lhs, -0.75, 1e-9);
  EXPECT_NEAR(t.codomain, 0.0, 1e-12);
  EXPECT_NEAR(t.bracket, 0.75, 1e-9);
  EXPECT_LE(t.residual, 1e-8);
  // Adding the round S^3 level-set curvature +1 and scaling by the
  // codomain factor 4 gives the classical 1 = 4 - 3 relation.
  EXPECT_NEAR(4.0 * (t.lhs + 1.0), 1.0, 1e-9);
  EXPECT_NEAR(4.0 - 4.0 * t.bracket, 1.0, 1e-9);
}

TEST(Oneill, HopfMatchesConformalOracleEverywhere) {
  const SubmersionSpec hopf = map_of("hopf");
  for (int k = 0; k < 10; ++k) {
    const Eigen::VectorXd p = sample_point(hopf.domain, 12, k);
    LocalMorphism lm(hopf, p);
    const Eigen::MatrixXd y = values(lm.lifts());
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b) {
        const OneillTerms t = oneill_terms(lm, y.col(a), y.col(b));
        EXPECT_NEAR(t.lhs, conformal_hopf_oracle(p, y.col(a), y.col(b)), 1e-8 * std::max(1.0, std::abs(t.lhs)));
        EXPECT_LE(t.residual, 1e-8);
      }
  }
}

TEST(Oneill, WarpedExampleAndProjection) {
  for (const char* name : {"example32(3)", "example32(4)", "product_projection(3)", "flat_projection(6,4)"}) {
    const SubmersionSpec s = map_of(name);
    for (int k = 0; k < 20; ++k) {
      const Eigen::VectorXd p = sample_point(s.domain, 13, k);
      for (int a = 0; a < s.n(); ++a)
        for (int b = a + 1; b < s.n(); ++b) EXPECT_LE(oneill_residual(s, p, a, b), 1e-8) << name;
    }
  }
}

TEST(Prop23, VacuousAndFlatProjection) {
  const Prop23Report h = prop23_residual(map_of("hopf"), 5, 1);
  EXPECT_TRUE(h.vacuous);
  EXPECT_EQ(h.sup, 0.0);
  const Prop23Report f = prop23_residual(map_of("flat_projection(6,4)"), 5, 1);
  EXPECT_FALSE(f.vacuous);
  EXPECT_TRUE(f.domain_conformally_flat);
  EXPECT_TRUE(f.codomain_conformally_flat);
  EXPECT_EQ(f.sup, 0.0);
}

TEST(SubmersionSpec, Validation) {
  const SubmersionSpec hopf = map_of("hopf");
  EXPECT_THROW(SubmersionSpec::from_strings("bad", hopf.domain, hopf.codomain, {"x1", "x2"}), std::invalid_argument);
  EXPECT_THROW(SubmersionSpec::from_strings("bad", hopf.codomain, hopf.domain, {"x1", "x2", "x3", "x1"}),
               std::invalid_argument);
  EXPECT_THROW(SubmersionSpec::from_strings("bad", hopf.domain, hopf.codomain, {"x1", "x2", "y"}), ExprError);
  EXPECT_THROW(SubmersionSpec::from_strings("bad", hopf.domain, hopf.codomain, {"x1", "x2", "x3"}, 7),
               std::invalid_argument);
}
