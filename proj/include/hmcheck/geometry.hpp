#pragma once

// Pointwise Riemannian curvature stack on a coordinate chart.
//
// Sign convention (the only place it is fixed): R04(a,b,c,d) = -g(R(e_a,e_b)e_c, e_d)
// with R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y], so that the round sphere has
// R(X,Y,X,Y) = |X|^2|Y|^2 - g(X,Y)^2. Ricci is the trace X -> R(X,Y)Z, which is
// positive on spheres; the Schouten-type tensor r solves R = g (kn) r + W with
// W totally trace-free.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hmcheck/expr.hpp"
#include "hmcheck/tensor.hpp"

namespace hmc {

/// +1 pins the sphere to positive sectional curvature; flipping it flips
/// every R04 component (used only by the calibration tests).
inline constexpr double kCurvatureSign = 1.0;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a sampled point fails the positivity check; carries it.
class SamplingError : public GeometryError {
 public:
  SamplingError(const std::string& message, Eigen::VectorXd point)
      : GeometryError(message), point_(std::move(point)) {}
  const Eigen::VectorXd& point() const { return point_; }

 private:
  Eigen::VectorXd point_;
};

class MetricChart {
 public:
  MetricChart() = default;

  /// `components` holds the upper triangle row by row (m(m+1)/2 entries).
  MetricChart(std::string name, std::vector<std::string> coords, std::vector<ExprAst> upper,
              std::vector<Interval> box, std::optional<ExprAst> constraint = std::nullopt);

  /// Parses expressions against `coords`. Accepts either the upper triangle
  /// or the full m x m matrix (which must then be symmetric as text).
  static MetricChart from_strings(std::string name, std::vector<std::string> coords,
                                  const std::vector<std::string>& components, std::vector<Interval> box,
                                  const std::string& constraint = "");

  /// c * delta on R^m with the given coordinate names.
  static MetricChart conformal(std::string name, std::vector<std::string> coords, const std::string& factor,
                               std::vector<Interval> box, const std::string& constraint = "");

  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }
  int dim() const { return static_cast<int>(coords_.size()); }
  const std::vector<std::string>& coords() const { return coords_; }
  const ExprAst& component(int i, int j) const;
  const std::vector<ExprAst>& upper() const { return upper_; }
  const std::vector<Interval>& box() const { return box_; }
  const std::optional<ExprAst>& constraint() const { return constraint_; }

  /// Inside the box shrunk by `margin` of each side and the constraint
  /// expression (if any) strictly positive.
  bool admits(const Eigen::VectorXd& p, double margin = 0.05) const;

 private:
  std::string name_;
  std::vector<std::string> coords_;
  std::vector<ExprAst> upper_;
  std::vector<Interval> box_;
  std::optional<ExprAst> constraint_;
};

/// Metric components as jets at `p` (order 3).
JetMat metric_jets(const MetricChart& chart, const Eigen::VectorXd& p);
Eigen::MatrixXd metric_values(const MetricChart& chart, const Eigen::VectorXd& p);

/// Throws SamplingError unless every eigenvalue of g is >= 1e-10.
void require_positive_definite(const Eigen::MatrixXd& g, const Eigen::VectorXd& p);

/// Gamma^k_ij as jets (index order k, i, j), one order below `g`.
Tensor3<Jet> christoffel(const JetMat& g);
Tensor3<Jet> christoffel(const MetricChart& chart, const Eigen::VectorXd& p);
Tensor3<double> values(const Tensor3<Jet>& t);

struct CurvatureBundle {
  Eigen::VectorXd point;
  Eigen::MatrixXd g;
  Eigen::MatrixXd g_inv;
  Tensor3<double> gamma;
  Tensor4 riemann;
  Eigen::MatrixXd ricci;
  double scalar = 0.0;
  bool has_weyl = false;
  Eigen::MatrixXd schouten;
  Tensor4 weyl;
};

/// Curvature of a metric given by jets of order >= 2.
CurvatureBundle riemann(const JetMat& g);
CurvatureBundle riemann(const MetricChart& chart, const Eigen::VectorXd& p);

/// (h kn k)(T,X,Y,Z) = h(T,Y)k(X,Z) + h(X,Z)k(T,Y) - h(T,Z)k(X,Y) - h(X,Y)k(T,Z).
Tensor4 kulkarni(const Eigen::MatrixXd& h, const Eigen::MatrixXd& k);

/// Fills r and W. Throws GeometryError for m < 3.
void schouten_weyl(CurvatureBundle& bundle);

/// Frobenius norm of a (0,4) tensor measured in a g-orthonormal frame.
double tensor_norm(const Tensor4& t, const Eigen::MatrixXd& g);

/// Gram-Schmidt in coordinate order; the columns are g-orthonormal. A pivot
/// below 1e-8 restarts with the next rotation of the order.
Eigen::MatrixXd orthonormal_frame(const Eigen::MatrixXd& g);

/// Orthonormalises `candidates` (columns) against g, after first
/// projecting out the columns of `against`. Near-dependent candidates are
/// skipped; at most `count` vectors are returned.
Eigen::MatrixXd gram_schmidt(const Eigen::MatrixXd& g, const Eigen::MatrixXd& candidates, int count,
                             const Eigen::MatrixXd& against = Eigen::MatrixXd());

double sectional_curvature(const Tensor4& r, const Eigen::MatrixXd& g, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y);

struct IsotropicPair {
  Eigen::VectorXcd x;
  Eigen::VectorXcd y;
};

enum class FrameMode { kFull, kMixed };

/// Full mode: (X_i +- i X_j, X_k + i X_l), i,j,k,l distinct, from the
/// coordinate Gram-Schmidt frame. Mixed mode: (U +- i X_j, X_k + i X_l)
/// with X a frame of the g-orthogonal complement of the unit vector U.
std::vector<IsotropicPair> isotropic_planes(const Eigen::MatrixXd& g, FrameMode mode,
                                            const Eigen::VectorXd& u = Eigen::VectorXd());

/// max |R(X,Y,X,Y)| / (max(1, |R|) |X|^2 |Y|^2) over the pairs, with
/// Euclidean norms of the complex components.
double isotropic_residual(const Tensor4& r, const Eigen::MatrixXd& g, const std::vector<IsotropicPair>& pairs);

// -- sampling -------------------------------------------------------------

/// Point i of the seeded stream over a chart's box: uniform, rejecting
/// points outside the 5% inner box or violating the constraint. Each index
/// owns its own generator, so points do not depend on evaluation order.
/// `pinned` fixes one coordinate to a value before the admissibility test.
Eigen::VectorXd sample_point(const MetricChart& chart, std::uint64_t seed, int index,
                             std::optional<std::pair<int, double>> pinned = std::nullopt);
std::vector<Eigen::VectorXd> sample_points(const MetricChart& chart, int count, std::uint64_t seed,
                                           std::optional<std::pair<int, double>> pinned = std::nullopt);

// -- reports --------------------------------------------------------------

struct ConformalFlatnessReport {
  bool supported = true;  // false for m < 4
  double weyl_sup = 0.0;
  double isotropic_sup = 0.0;
  bool weyl_flat = false;
  bool isotropic_flat = false;
  bool conformally_flat = false;
  Eigen::VectorXd worst_point;
  int samples = 0;
};

ConformalFlatnessReport conformal_flatness_report(const MetricChart& chart, int samples, std::uint64_t seed,
                                                  double tol = 1e-8);

/// Components multiplied by `factor`; throws GeometryError when the factor
/// is not positive at one of the spot-check samples.
MetricChart conformal_rescale(const MetricChart& chart, const ExprAst& factor, int spot_checks = 20,
                              std::uint64_t seed = 1);

struct ConstantCurvatureReport {
  bool is_constant = false;
  double c_estimate = 0.0;
  double spread = 0.0;
  int planes = 0;
};

ConstantCurvatureReport constant_curvature_check(const MetricChart& chart, int samples, std::uint64_t seed,
                                                 double tol = 1e-8);

/// Residuals of the algebraic curvature identities at one point, each
/// relative to max(1, |R|).
struct CurvatureIdentityResiduals {
  double antisymmetry = 0.0;
  double pair_symmetry = 0.0;
  double bianchi = 0.0;
  double weyl_trace = 0.0;
  double decomposition = 0.0;
  double max() const;
};

CurvatureIdentityResiduals curvature_identities(const CurvatureBundle& bundle);

}  // namespace hmc
