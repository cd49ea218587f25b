#pragma once

// Identity checks for harmonic morphisms with one-dimensional fibres: the
// three curvature relations between (M, g) and (N, h), the dichotomy
// classifier with its leaf-curvature test, and the descended-form test on
// three-dimensional codomains.
//
// The curvature side of every relation is taken from riemann() on the raw
// jets of g; the right-hand sides are assembled from phi, h, sigma, V,
// theta and Omega only.

#include <array>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmcheck/morphism.hpp"

namespace hmc {

class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class NotHarmonic : public VerificationError {
 public:
  using VerificationError::VerificationError;
};
class NotIntegrable : public VerificationError {
 public:
  using VerificationError::VerificationError;
};
class NotKilling : public VerificationError {
 public:
  using VerificationError::VerificationError;
};
class WrongDimension : public VerificationError {
 public:
  using VerificationError::VerificationError;
};
class OmegaNotBasic : public VerificationError {
 public:
  using VerificationError::VerificationError;
};

/// Pinned tolerances.
inline constexpr double kHarmonicTol = 1e-8;
inline constexpr double kIdentityTol = 1e-6;
inline constexpr double kInvariantTol = 1e-9;

/// Every symbol of the three relations for one frame X = Y_a, Y = Y_b,
/// Z = Y_c, H = Y_d of basic lifts. G = H(grad_h sigma).
struct Lemma15Terms {
  std::array<int, 4> frame{};
  double lie_term = 0.0;      // (L_G h)(X, Y)
  double n_xs_ys = 0.0;       // n X(sigma) Y(sigma)
  double grad_sq = 0.0;       // |G|_h^2
  double vvs = 0.0;           // V(V(sigma))
  double vs_sq = 0.0;         // V(sigma)^2
  double h_iomega = 0.0;      // h(i_X Omega, i_Y Omega)
  double nabla_omega = 0.0;   // (h-nabla_Z Omega)(X, Y)
  double omega_grad_x = 0.0;  // Omega(X, grad_h sigma)
  double omega_grad_y = 0.0;  // Omega(Y, grad_h sigma)
  /// h(nabla_Y G, H), h(nabla_X G, H), h(nabla_X G, Z), h(nabla_Y G, Z)
  std::array<double, 4> hess{};
  double pulled_rn = 0.0;     // R^N(dX, dY, dZ, dH)
  std::array<double, 3> lhs{};  // R^M(X,V,Y,V), R^M(X,Y,Z,V), R^M(X,Y,Z,H)
  std::array<double, 3> rhs{};
};

struct Lemma15Result {
  double r11 = 0.0;
  double r12 = 0.0;
  double r13 = 0.0;
  Lemma15Terms terms;
};

/// Evaluator bound to one point; precomputes everything frame-independent.
class Lemma15Evaluator {
 public:
  /// Throws NotHarmonic when the harmonic residual exceeds `harmonic_tol`,
  /// WrongDimension unless m = n + 1 and n >= 3.
  Lemma15Evaluator(const SubmersionSpec& spec, const Eigen::VectorXd& point, double harmonic_tol = kHarmonicTol);
  ~Lemma15Evaluator();
  Lemma15Evaluator(const Lemma15Evaluator&) = delete;
  Lemma15Evaluator& operator=(const Lemma15Evaluator&) = delete;

  Lemma15Result evaluate(const std::array<int, 4>& frame) const;
  int n() const;

 private:
  struct State;
  std::unique_ptr<State> s_;
};

Lemma15Result lemma15_residuals(const SubmersionSpec& spec, const Eigen::VectorXd& point,
                                const std::array<int, 4>& frame, double harmonic_tol = kHarmonicTol);

struct Lemma15Sweep {
  double r11 = 0.0;
  double r12 = 0.0;
  double r13 = 0.0;
  int samples = 0;
  long frames = 0;  // frame evaluations per equation, summed
  int worst_sample = -1;
  std::array<int, 4> worst_frame{};
  Eigen::VectorXd worst_point;
  double max() const { return std::max({r11, r12, r13}); }
};

/// Ordered pairs, triples and 4-tuples of lift indices at every sample.
Lemma15Sweep lemma15_sweep(const SubmersionSpec& spec, int samples, std::uint64_t seed,
                           double harmonic_tol = kHarmonicTol);

// -- dichotomy ---------------------------------------------------------------

struct LeafSample {
  double leaf = 0.0;      // value of the leaf coordinate
  double value = 0.0;     // mean sectional curvature
  double spread = 0.0;    // max - min over planes and points of the leaf
  int planes = 0;
};

struct LeafCurvatureReport {
  bool constant_per_leaf = false;
  double spread = 0.0;  // worst relative spread over leaves
  std::vector<LeafSample> leaves;
};

/// Curvature of the horizontal leaves for lambda^(-2n+4) g, through the
/// Gauss equation. Points of one leaf share the spec's leaf coordinate.
LeafCurvatureReport leaf_curvature_check(const SubmersionSpec& spec, const std::vector<double>& leaves,
                                         int samples_per_leaf, std::uint64_t seed, double tol = kIdentityTol);

enum class Verdict { kKillingType, kIntegrableHorizontal, kBoth, kNeither };
std::string to_string(Verdict v);

struct ClassificationVerdict {
  double killing_sup = 0.0;  // sup |V(sigma)| / max(1, |V|_g)
  double omega_sup = 0.0;    // sup |Omega|_g / max(1, |theta|_g)
  double harmonic_sup = 0.0;
  bool domain_conformally_flat = false;
  bool flatness_supported = true;
  bool hypotheses_met = false;
  Verdict verdict = Verdict::kNeither;
  std::optional<LeafCurvatureReport> leaf_curvature;
  int samples = 0;
};

/// Leaf curvature is attached on the integrable branch when the spec names
/// a leaf coordinate; `leaves` defaults to {0, 0.3, 0.5, 0.7}.
ClassificationVerdict classify_thm31(const SubmersionSpec& spec, int samples, std::uint64_t seed,
                                     double tol = kInvariantTol, std::vector<double> leaves = {});

// -- descended form on N^3 --------------------------------------------------

enum class CodomainMetric { kRescaled, kOriginal };

struct Cor34Data {
  bool degenerate = false;        // Omega vanishes: alpha = 0
  double closed_residual = 0.0;   // |d alpha| / |alpha|
  double parallel_residual = 0.0; // |nabla alpha| / |alpha|
  double leafcurv_residual = 0.0; // |sec(ker alpha) - |alpha|^2| / max of the two
  double alpha_norm_sq = 0.0;     // at the last sample
  std::vector<Eigen::VectorXd> alpha;  // alpha at each sample, codomain coordinates
  std::vector<Eigen::VectorXd> images;
  int samples = 0;
  int worst_sample = -1;
  double max() const { return std::max({closed_residual, parallel_residual, leafcurv_residual}); }
};

/// alpha = *Omega-hat on (N^3, lambda^-4 h), or on (N^3, h) for the
/// negative control.
Cor34Data cor34_iia_check(const SubmersionSpec& spec, int samples, std::uint64_t seed,
                          CodomainMetric metric = CodomainMetric::kRescaled, double tol = kInvariantTol);

}  // namespace hmc
