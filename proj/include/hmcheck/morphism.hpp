#pragma once

// A smooth map phi: (M^m, g) -> (N^n, h) between charts and the apparatus
// of harmonic morphisms with one-dimensional fibres built on it: dilation,
// tension, the fundamental vertical field V with its dual form theta and
// Omega = d theta, basic lifts and the integrability tensor.
//
// Jet orders: phi, g, h o phi carry order 3; d phi, lambda^2, sigma, V,
// theta and the basic lifts order 2; Omega order 1.

#include <optional>
#include <string>
#include <vector>

#include "hmcheck/geometry.hpp"

namespace hmc {

class CriticalPoint : public GeometryError {
 public:
  CriticalPoint(const std::string& message, Eigen::VectorXd point)
      : GeometryError(message), point_(std::move(point)) {}
  const Eigen::VectorXd& point() const { return point_; }

 private:
  Eigen::VectorXd point_;
};

struct SubmersionSpec {
  std::string name;
  MetricChart domain;
  MetricChart codomain;
  std::vector<ExprAst> components;  // parsed against domain.coords()
  std::optional<int> leaf_coordinate;

  int m() const { return domain.dim(); }
  int n() const { return codomain.dim(); }

  static SubmersionSpec from_strings(std::string name, MetricChart domain, MetricChart codomain,
                                     const std::vector<std::string>& components,
                                     std::optional<int> leaf_coordinate = std::nullopt);
  /// Throws std::invalid_argument unless n <= m and every component was
  /// parsed against the domain coordinates.
  void validate() const;
};

struct Tension {
  Eigen::VectorXd tau;
  double harmonic_residual = 0.0;
};

struct FiberData {
  Eigen::VectorXd point;
  Jet lambda2;
  Jet sigma;
  JetVec V;
  JetVec theta;
  Eigen::MatrixXd omega;
  double v_sigma = 0.0;
};

/// All first-principles quantities of the map at one point, computed on
/// demand and cached. Not safe to share between threads.
class LocalMorphism {
 public:
  LocalMorphism(const SubmersionSpec& spec, const Eigen::VectorXd& point);

  const SubmersionSpec& spec() const { return spec_; }
  int m() const { return spec_.m(); }
  int n() const { return spec_.n(); }
  const Eigen::VectorXd& point() const { return point_; }
  const Eigen::VectorXd& image() const { return image_; }

  const JetVec& phi() const { return phi_; }
  const JetMat& dphi() const { return dphi_; }
  const JetMat& g() const { return g_; }
  const JetMat& g_inv() const;
  const Eigen::MatrixXd& g_values() const { return g_values_; }
  /// h o phi as jets on M (order 3).
  const JetMat& h() const;
  const Eigen::MatrixXd& h_values() const;
  /// phi^* h (order 2).
  const JetMat& pullback() const;

  const Jet& lambda2() const;
  const Jet& sigma() const;
  double hconf_residual() const;

  /// g-orthonormal frame of the horizontal space (m x n, values).
  const Eigen::MatrixXd& horizontal_frame() const;

  /// Signed-minor vector spanning ker d phi (m = n + 1 only).
  const JetVec& kernel() const;
  const JetVec& V() const;
  const JetVec& theta() const;
  const JetMat& Omega() const;
  double v_sigma() const;

  /// Column a is the horizontal lift of d/dy^a (m x n, order 2).
  const JetMat& lifts() const;
  JetVec lift(int a) const { return lifts().col(a); }

  /// Domain Christoffel symbols as jets (order 2).
  const Tensor3<Jet>& domain_christoffel() const;
  /// Curvature stack of (N, h) at phi(point), in codomain coordinates.
  const CurvatureBundle& codomain_curvature() const;

  Tension tension() const;

  /// Vertical part of a vector at the point: Z - sum_a (d phi Z)^a Y_a.
  Eigen::VectorXd vertical_part(const Eigen::VectorXd& z) const;

 private:
  const SubmersionSpec& spec_;
  Eigen::VectorXd point_;
  Eigen::VectorXd image_;
  JetVec phi_;
  JetMat dphi_;
  JetMat g_;
  Eigen::MatrixXd g_values_;

  mutable std::optional<JetMat> g_inv_;
  mutable std::optional<JetMat> h_;
  mutable std::optional<Eigen::MatrixXd> h_values_;
  mutable std::optional<JetMat> pullback_;
  mutable std::optional<Jet> lambda2_;
  mutable std::optional<Jet> sigma_;
  mutable std::optional<Eigen::MatrixXd> hframe_;
  mutable std::optional<JetVec> kernel_;
  mutable std::optional<JetVec> V_;
  mutable std::optional<JetVec> theta_;
  mutable std::optional<JetMat> Omega_;
  mutable std::optional<JetMat> lifts_;
  mutable std::optional<Tensor3<Jet>> gamma_;
  mutable std::optional<CurvatureBundle> codomain_;
};

/// Lie bracket [X, Y] of jet vector fields, as jets one order lower.
JetVec bracket(const JetVec& x, const JetVec& y);

Eigen::VectorXd values_of(const JetVec& v);

// -- spec-level operations (each builds a LocalMorphism) --------------------

JetMat differential(const SubmersionSpec& spec, const Eigen::VectorXd& p);
JetVec vertical_kernel(const SubmersionSpec& spec, const Eigen::VectorXd& p);

struct Dilation {
  Jet lambda2;
  Jet sigma;
  double hconf_residual = 0.0;
};
Dilation dilation(const SubmersionSpec& spec, const Eigen::VectorXd& p);
Tension tension(const SubmersionSpec& spec, const Eigen::VectorXd& p);
FiberData fundamental_data(const SubmersionSpec& spec, const Eigen::VectorXd& p);
JetVec basic_lift(const SubmersionSpec& spec, const Eigen::VectorXd& p, int a);

/// -V[Y_a, Y_b] at the point.
Eigen::VectorXd integrability_tensor(const LocalMorphism& lm, int a, int b);
Eigen::VectorXd integrability_tensor(const SubmersionSpec& spec, const Eigen::VectorXd& p, int a, int b);

/// Terms of R~(X,Y,X,Y) = R^N(dX,dY,dX,dY) - 3/4 g~(V[X,Y], V[X,Y]) for the
/// conformally rescaled domain metric g~ = lambda^2 g.
struct OneillTerms {
  double lhs = 0.0;
  double codomain = 0.0;
  double bracket = 0.0;  // 3/4 g~(V[X,Y], V[X,Y])
  double residual = 0.0;
};

/// For horizontal vectors x, y at the point (projected horizontally first).
OneillTerms oneill_terms(const LocalMorphism& lm, const Eigen::VectorXd& x, const Eigen::VectorXd& y);
double oneill_residual(const SubmersionSpec& spec, const Eigen::VectorXd& p, int a, int b);

struct Prop23Report {
  double sup = 0.0;
  bool vacuous = false;
  bool domain_conformally_flat = false;
  bool codomain_conformally_flat = false;
  int samples = 0;
};

/// sup |g(I(X,Y), I(X,Y))| over horizontal isotropic pairs.
Prop23Report prop23_residual(const SubmersionSpec& spec, int samples, std::uint64_t seed, double flat_tol = 1e-8);

/// Pointwise self-checks of the fundamental data (all relative).
struct FiberInvariants {
  double kernel = 0.0;         // |d phi(V)|
  double v_norm = 0.0;         // |g(V,V) - lambda^(2n-4)|
  double theta_v = 0.0;        // |theta(V) - 1|
  double theta_h = 0.0;        // max |theta(Y_a)|
  double lift_system = 0.0;    // max |d phi(Y_a) - e_a|
  double omega_vertical = 0.0; // |i_V Omega|
  double omega_lie = 0.0;      // |L_V Omega|
  double lift_bracket = 0.0;   // max |[V, Y_a]|_g
  double reconstruction = 0.0; // |lambda^-2 phi^*h + lambda^(2n-4) theta^2 - g|
  double killing_h = 0.0;      // |L_V g| on the horizontal frame
};

FiberInvariants fiber_invariants(const LocalMorphism& lm);

}  // namespace hmc
