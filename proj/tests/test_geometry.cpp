#include <cmath>
#include <random>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "hmcheck/geometry.hpp"

namespace {

using hmc::Interval;
using hmc::MetricChart;

std::vector<std::string> coords(int m) {
  std::vector<std::string> c;
  for (int i = 1; i <= m; ++i) c.push_back("x" + std::to_string(i));
  return c;
}

std::vector<Interval> cube(int m, double r) { return std::vector<Interval>(static_cast<std::size_t>(m), {-r, r}); }

std::string norm2(int m) {
  std::string s;
  for (int i = 1; i <= m; ++i) s += (i > 1 ? "+" : "") + std::string("x") + std::to_string(i) + "^2";
  return "(" + s + ")";
}

MetricChart sphere(int m) {
  return MetricChart::conformal("sphere", coords(m), "4*(1+" + norm2(m) + ")^-2", cube(m, 2.0));
}

MetricChart hyperbolic(int m) {
  return MetricChart::conformal("hyperbolic", coords(m), "4*(1-" + norm2(m) + ")^-2", cube(m, 0.9),
                                "0.81-" + norm2(m));
}

// A generic analytic 4-metric: delta plus a small symmetric perturbation.
MetricChart control4() {
  const int m = 4;
  std::vector<std::string> upper;
  for (int i = 1; i <= m; ++i)
    for (int j = i; j <= m; ++j) {
      const std::string arg = "x" + std::to_string(i) + "*x" + std::to_string(j) + "+" + std::to_string(i + 2 * j);
      upper.push_back(i == j ? "1+0.1*sin(" + arg + ")" : "0.05*sin(" + arg + ")");
    }
  return MetricChart::from_strings("control", coords(m), upper, cube(m, 1.0));
}

TEST(Christoffel, EuclideanVanishes) {
  const MetricChart e = MetricChart::conformal("flat", coords(3), "1", cube(3, 1.0));
  const auto g = hmc::values(hmc::christoffel(e, Eigen::Vector3d(0.1, 0.2, 0.3)));
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) EXPECT_EQ(g(k, i, j), 0.0);
}

// Gamma^k_ij for e^{2f} delta: delta_ik f_j + delta_jk f_i - delta_ij f_k.
void expect_conformal_gamma(const hmc::Tensor3<double>& gamma, const Eigen::VectorXd& df, double tol) {
  const int m = static_cast<int>(df.size());
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const double want = (i == k) * df[j] + (j == k) * df[i] - (i == j) * df[k];
        EXPECT_NEAR(gamma(k, i, j), want, tol) << k << i << j;
      }
}

TEST(Christoffel, ConformalOracle) {
  // f = 0.3 sin(x1) + 0.2 x2 x3: df = (0.3 cos x1, 0.2 x3, 0.2 x2).
  const MetricChart g = MetricChart::conformal("conf", coords(3), "exp(2*(0.3*sin(x1)+0.2*x2*x3))", cube(3, 1.0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int s = 0; s < 20; ++s) {
    const Eigen::Vector3d p(u(rng), u(rng), u(rng));
    const Eigen::Vector3d df(0.3 * std::cos(p[0]), 0.2 * p[2], 0.2 * p[1]);
    expect_conformal_gamma(hmc::values(hmc::christoffel(g, p)), df, 1e-10);
  }
}

TEST(Christoffel, HyperbolicBallMatchesConformalOracle) {
  // f = log 2 - log(1 - |x|^2): df = 2x / (1 - |x|^2).
  const Eigen::Vector3d p(0.3, 0.0, 0.0);
  expect_conformal_gamma(hmc::values(hmc::christoffel(hyperbolic(3), p)), 2 * p / (1 - p.squaredNorm()), 1e-10);
}

TEST(Riemann, FlatIsZero) {
  const MetricChart e = MetricChart::conformal("flat", coords(4), "1", cube(4, 1.0));
  const auto b = hmc::riemann(e, Eigen::Vector4d(0.1, 0.2, 0.3, 0.4));
  EXPECT_EQ(b.riemann.max_abs(), 0.0);
  EXPECT_EQ(b.scalar, 0.0);
}

void expect_constant_sectional(const MetricChart& chart, double c, double tol) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int s = 0; s < 20; ++s) {
    const Eigen::VectorXd p = hmc::sample_point(chart, 17, s);
    const auto b = hmc::riemann(chart, p);
    Eigen::VectorXd x(chart.dim()), y(chart.dim());
    for (int k = 0; k < chart.dim(); ++k) {
      x[k] = nd(rng);
      y[k] = nd(rng);
    }
    EXPECT_NEAR(hmc::sectional_curvature(b.riemann, b.g, x, y), c, tol);
  }
}

TEST(Riemann, SphereHasSectionalCurvaturePlusOne) { expect_constant_sectional(sphere(3), 1.0, 1e-9); }
TEST(Riemann, HyperbolicBallHasSectionalCurvatureMinusOne) {
  expect_constant_sectional(hyperbolic(3), -1.0, 1e-9);
}

TEST(Riemann, RicciAndScalarOnSphere) {
  const MetricChart s = sphere(4);
  const Eigen::Vector4d p(0.2, -0.1, 0.4, 0.3);
  const auto b = hmc::riemann(s, p);
  EXPECT_NEAR(b.scalar, 12.0, 1e-9);  // m(m-1) for the unit sphere
  EXPECT_NEAR((b.ricci - 3.0 * b.g).cwiseAbs().maxCoeff(), 0.0, 1e-9);
}

TEST(Kulkarni, UnitExample) {
  const Eigen::Matrix2d d = Eigen::Matrix2d::Identity();
  EXPECT_EQ(hmc::kulkarni(d, d)(0, 1, 0, 1), 2.0);
  EXPECT_THROW(hmc::kulkarni(d, Eigen::Matrix3d::Identity()), std::invalid_argument);
}

TEST(Kulkarni, SymmetricAndConstantCurvatureForm) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 10; ++t) {
    Eigen::MatrixXd h = Eigen::MatrixXd::NullaryExpr(4, 4, [&] { return nd(rng); });
    Eigen::MatrixXd k = Eigen::MatrixXd::NullaryExpr(4, 4, [&] { return nd(rng); });
    h = (h + h.transpose()).eval();
    k = (k + k.transpose()).eval();
    EXPECT_LE((hmc::kulkarni(h, k) - hmc::kulkarni(k, h)).max_abs(), 1e-12 * hmc::kulkarni(h, k).max_abs());
    const Eigen::MatrixXd g = h * h.transpose() + Eigen::MatrixXd::Identity(4, 4);
    const double c = nd(rng);
    const hmc::Tensor4 r = hmc::kulkarni(g, 0.5 * c * g);
    const Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(4, [&] { return nd(rng); });
    const Eigen::VectorXd y = Eigen::VectorXd::NullaryExpr(4, [&] { return nd(rng); });
    const double want = c * (x.dot(g * x) * y.dot(g * y) - std::pow(x.dot(g * y), 2));
    EXPECT_NEAR(r.contract(x, y, x, y), want, 1e-10 * (1 + std::abs(want)));
  }
}

TEST(SchoutenWeyl, ConstantCurvature) {
  auto b = hmc::riemann(sphere(4), Eigen::Vector4d(0.5, 0.1, -0.3, 0.2));
  hmc::schouten_weyl(b);
  EXPECT_LE(hmc::tensor_norm(b.weyl, b.g), 1e-9);
  EXPECT_LE((b.schouten - 0.5 * b.g).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(SchoutenWeyl, FlatAndLowDimension) {
  const MetricChart e = MetricChart::conformal("flat", coords(4), "1", cube(4, 1.0));
  auto b = hmc::riemann(e, Eigen::Vector4d(0.1, 0.2, 0.3, 0.4));
  hmc::schouten_weyl(b);
  EXPECT_EQ(b.schouten.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(b.weyl.max_abs(), 0.0);
  auto b2 = hmc::riemann(sphere(2), Eigen::Vector2d(0.1, 0.2));
  EXPECT_THROW(hmc::schouten_weyl(b2), hmc::GeometryError);
}

TEST(SchoutenWeyl, ControlMetricHasTraceFreeNonzeroWeyl) {
  const MetricChart c = control4();
  for (int s = 0; s < 10; ++s) {
    auto b = hmc::riemann(c, hmc::sample_point(c, 42, s));
    hmc::schouten_weyl(b);
    const auto id = hmc::curvature_identities(b);
    EXPECT_LE(id.weyl_trace, 1e-9);
    EXPECT_LE(id.decomposition, 1e-10);
    EXPECT_LE(id.antisymmetry, 1e-9);
    EXPECT_LE(id.pair_symmetry, 1e-9);
    EXPECT_LE(id.bianchi, 1e-9);
    EXPECT_GE(hmc::tensor_norm(b.weyl, b.g), 1e-3);
  }
}

TEST(Frames, OrthonormalAndIsotropic) {
  const MetricChart c = control4();
  const auto g = hmc::metric_values(c, Eigen::Vector4d(0.3, -0.2, 0.5, 0.1));
  const Eigen::MatrixXd e = hmc::orthonormal_frame(g);
  EXPECT_LE((e.transpose() * g * e - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  const auto pairs = hmc::isotropic_planes(g, hmc::FrameMode::kFull);
  EXPECT_EQ(pairs.size(), 48u);
  const Eigen::MatrixXcd gc = g.cast<std::complex<double>>();
  for (const auto& p : pairs) {
    EXPECT_LE(std::abs((p.x.transpose() * gc * p.x).value()), 1e-12);
    EXPECT_LE(std::abs((p.x.transpose() * gc * p.y).value()), 1e-12);
    EXPECT_LE(std::abs((p.y.transpose() * gc * p.y).value()), 1e-12);
    Eigen::MatrixXcd span(4, 2);
    span << p.x, p.y;
    EXPECT_EQ(Eigen::FullPivLU<Eigen::MatrixXcd>(span).rank(), 2);
  }
  EXPECT_EQ(hmc::isotropic_planes(Eigen::MatrixXd::Identity(5, 5), hmc::FrameMode::kFull).size(), 240u);
  EXPECT_THROW(hmc::isotropic_planes(Eigen::Matrix3d::Identity(), hmc::FrameMode::kFull), hmc::GeometryError);
}

TEST(Frames, MixedModePairsAreIsotropic) {
  const Eigen::Matrix4d g = Eigen::Matrix4d::Identity();
  const auto pairs = hmc::isotropic_planes(g, hmc::FrameMode::kMixed, Eigen::Vector4d(1, 1, 0, 0));
  EXPECT_EQ(pairs.size(), 12u);
  for (const auto& p : pairs) {
    EXPECT_LE(std::abs((p.x.transpose() * p.x).value()), 1e-12);
    EXPECT_LE(std::abs((p.x.transpose() * p.y).value()), 1e-12);
    EXPECT_LE(std::abs((p.y.transpose() * p.y).value()), 1e-12);
  }
}

TEST(ConformalFlatness, FlatSphereAndControl) {
  const MetricChart e = MetricChart::conformal("flat", coords(4), "1", cube(4, 1.0));
  const auto flat = hmc::conformal_flatness_report(e, 10, 42);
  EXPECT_EQ(flat.weyl_sup, 0.0);
  EXPECT_EQ(flat.isotropic_sup, 0.0);
  EXPECT_TRUE(flat.conformally_flat);
  const auto s = hmc::conformal_flatness_report(sphere(4), 20, 42);
  EXPECT_TRUE(s.conformally_flat);
  const auto c = hmc::conformal_flatness_report(control4(), 20, 42);
  EXPECT_GE(c.weyl_sup, 1e-3);
  EXPECT_GE(c.isotropic_sup, 1e-3);
  EXPECT_FALSE(c.weyl_flat);
  EXPECT_FALSE(c.isotropic_flat);
  EXPECT_FALSE(hmc::conformal_flatness_report(sphere(3), 5, 42).supported);
}

TEST(ConformalRescale, WeylScalesWithFactor) {
  const MetricChart c = control4();
  const std::vector<std::string> factors{"exp(2*x1)", "1+0.5*x2^2", "2+sin(x3*x4)"};
  for (const auto& f : factors) {
    const MetricChart r = hmc::conformal_rescale(c, hmc::parse(f, c.coords()));
    for (int s = 0; s < 5; ++s) {
      const Eigen::VectorXd p = hmc::sample_point(c, 8, s);
      auto b0 = hmc::riemann(c, p);
      auto b1 = hmc::riemann(r, p);
      hmc::schouten_weyl(b0);
      hmc::schouten_weyl(b1);
      const double factor = hmc::eval<double>(hmc::parse(f, c.coords()), std::vector<double>(p.data(), p.data() + 4));
      EXPECT_LE((b1.weyl - factor * b0.weyl).max_abs(), 1e-8 * b1.weyl.max_abs()) << f;
    }
  }
  const MetricChart flat = MetricChart::conformal("flat", coords(4), "1", cube(4, 1.0));
  const auto rf = hmc::conformal_flatness_report(hmc::conformal_rescale(flat, hmc::parse("exp(2*x1)", flat.coords())), 10, 1);
  EXPECT_LE(rf.weyl_sup, 1e-12);
  EXPECT_THROW(hmc::conformal_rescale(flat, hmc::parse("x1", flat.coords())), hmc::GeometryError);
}

TEST(ConstantCurvature, RoundSphereBallAndControl) {
  const auto s2 = hmc::constant_curvature_check(sphere(2), 20, 42, 1e-9);
  EXPECT_TRUE(s2.is_constant);
  EXPECT_NEAR(s2.c_estimate, 1.0, 1e-9);
  const MetricChart ball = MetricChart::conformal("ball", coords(3), "(1-" + norm2(3) + ")^-2", cube(3, 0.9),
                                                  "0.81-" + norm2(3));
  const auto b = hmc::constant_curvature_check(ball, 20, 42, 1e-8);
  EXPECT_TRUE(b.is_constant);
  EXPECT_NEAR(b.c_estimate, -4.0, 1e-8);
  EXPECT_FALSE(hmc::constant_curvature_check(control4(), 20, 42).is_constant);
}

TEST(Sampling, DeterministicAndAdmissible) {
  const MetricChart h = hyperbolic(3);
  const auto a = hmc::sample_points(h, 30, 99);
  const auto b = hmc::sample_points(h, 30, 99);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    EXPECT_TRUE(h.admits(a[i]));
    EXPECT_LT(a[i].squaredNorm(), 0.81);
  }
  EXPECT_NE(hmc::sample_point(h, 99, 0), hmc::sample_point(h, 100, 0));
  const auto pinned = hmc::sample_point(h, 1, 3, std::make_pair(0, 0.5));
  EXPECT_EQ(pinned[0], 0.5);
}

TEST(Sampling, NonPositiveMetricReportsPoint) {
  const MetricChart bad = MetricChart::conformal("bad", coords(2), "x1", cube(2, 1.0));
  try {
    for (int s = 0; s < 50; ++s) hmc::riemann(bad, hmc::sample_point(bad, 1, s));
    FAIL();
  } catch (const hmc::SamplingError& e) {
    EXPECT_LE(e.point()[0], 0.0);
  }
}

}  // namespace
