#include "hmcheck/verify.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include <Eigen/LU>

#include "hmcheck/parallel.hpp"

namespace hmc {

namespace {

std::string point_text(const Eigen::VectorXd& p) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (Eigen::Index i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ")";
  return os.str();
}

double gnorm(const Eigen::MatrixXd& g, const Eigen::VectorXd& v) { return std::sqrt(std::max(0.0, v.dot(g * v))); }

// |F|^2 = sum F_ij F_kl g^ik g^jl, scaled by `half` for 2-forms.
double form_norm(const Eigen::MatrixXd& f, const Eigen::MatrixXd& g_inv, double half) {
  return std::sqrt(std::max(0.0, half * (g_inv * f * g_inv * f.transpose()).trace()));
}

double omega_norm(const LocalMorphism& lm) {
  const Eigen::MatrixXd gi = lm.g_values().inverse();
  const double th = std::sqrt(std::max(0.0, values(lm.theta()).dot(gi * values(lm.theta()))));
  return form_norm(values(lm.Omega()), gi, 0.5) / std::max(1.0, th);
}

double killing_measure(const LocalMorphism& lm) {
  return std::abs(lm.v_sigma()) / std::max(1.0, gnorm(lm.g_values(), values(lm.V())));
}

void require_one_fibre(const SubmersionSpec& spec, const char* what, int min_n) {
  if (spec.m() != spec.n() + 1 || spec.n() < min_n)
    throw WrongDimension(std::string(what) + " needs m = n + 1 and n >= " + std::to_string(min_n) + "; map '" +
                         spec.name + "' has m = " + std::to_string(spec.m()) + ", n = " + std::to_string(spec.n()));
}

std::mt19937_64 plane_rng(std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), 0x6c6561u};
  return std::mt19937_64(seq);
}

}  // namespace

// -- the three curvature relations ---------------------------------------------

struct Lemma15Evaluator::State {
  const SubmersionSpec& spec;
  LocalMorphism lm;
  int m, n;
  double l2;
  Eigen::MatrixXd Y;      // lifts, m x n
  Eigen::VectorXd V;
  Eigen::MatrixXd H, Hi;  // h at the image and its inverse
  Eigen::MatrixXd P;      // phi^* h at the point
  Eigen::VectorXd ys;     // Y_a(sigma)
  double vs = 0.0, vvs = 0.0, grad_sq = 0.0;
  Eigen::VectorXd xvs;    // Y_a(V(sigma))
  Eigen::MatrixXd O;      // Omega(Y_a, Y_b)
  std::vector<double> dO; // Y_a(Omega(Y_b, Y_c)), flat (a*n+b)*n+c
  Eigen::VectorXd og;     // Omega(Y_a, G)
  Eigen::MatrixXd lie;    // (L_G phi^*h)(Y_a, Y_b)
  Eigen::MatrixXd hnG;    // h(nabla_{Y_b} G, Y_d), (b, d)
  Tensor3<double> gn;     // codomain Christoffels at the image
  Tensor4 rn;             // codomain curvature at the image
  Tensor4 rm;             // domain curvature at the point

  State(const SubmersionSpec& s, const Eigen::VectorXd& p) : spec(s), lm(s, p) {}

  double lam(double k) const { return std::pow(l2, 0.5 * k); }
  // (nabla_{Y_c} Omega)(Y_a, Y_b): the differentiating slot is the last.
  double nabla_omega(int a, int b, int c) const {
    double acc = dO[static_cast<std::size_t>((c * n + a) * n + b)];
    for (int d = 0; d < n; ++d) acc -= gn(d, c, a) * O(d, b) + gn(d, c, b) * O(a, d);
    return acc;
  }
};

Lemma15Evaluator::Lemma15Evaluator(const SubmersionSpec& spec, const Eigen::VectorXd& point, double harmonic_tol)
    : s_(std::make_unique<State>(spec, point)) {
  require_one_fibre(spec, "curvature relations", 3);
  State& s = *s_;
  const LocalMorphism& lm = s.lm;
  const double hres = lm.tension().harmonic_residual;
  if (hres > harmonic_tol)
    throw NotHarmonic("map '" + spec.name + "' is not harmonic at " + point_text(point) + " (residual " +
                      std::to_string(hres) + ")");
  s.m = lm.m();
  s.n = lm.n();
  const int m = s.m, n = s.n;
  s.l2 = lm.lambda2().value();

  const JetMat& Yj = lm.lifts();
  const JetVec& Vj = lm.V();
  const Jet& sigma = lm.sigma();
  s.Y = values(Yj);
  s.V = values(Vj);
  s.H = lm.h_values();
  s.Hi = s.H.inverse();
  s.P = values(lm.pullback());

  std::vector<Jet> ys(static_cast<std::size_t>(n));
  s.ys.resize(n);
  for (int a = 0; a < n; ++a) {
    ys[static_cast<std::size_t>(a)] = directional(JetVec(Yj.col(a)), sigma);
    s.ys[a] = ys[static_cast<std::size_t>(a)].value();
  }
  const Jet vs = directional(Vj, sigma);
  s.vs = vs.value();
  s.vvs = directional(Vj, vs).value();
  s.xvs.resize(n);
  for (int a = 0; a < n; ++a) s.xvs[a] = directional(JetVec(Yj.col(a)), vs).value();

  // G = sum_a G^a Y_a with G^a = h^ab Y_b(sigma), all on M.
  const JetMat Hij = inverse(lm.h());
  std::vector<Jet> Ga(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    Jet acc(0.0);
    for (int b = 0; b < n; ++b) acc += Hij(a, b) * ys[static_cast<std::size_t>(b)];
    Ga[static_cast<std::size_t>(a)] = acc;
  }
  JetVec G(m);
  for (int i = 0; i < m; ++i) {
    Jet acc(0.0);
    for (int a = 0; a < n; ++a) acc += Ga[static_cast<std::size_t>(a)] * Yj(i, a);
    G[i] = acc;
  }
  const Eigen::VectorXd Gv = values(G);
  s.grad_sq = s.ys.dot(s.Hi * s.ys);

  // Omega on lifts, as functions on M.
  const JetMat& Oj = lm.Omega();
  const Eigen::MatrixXd om = values(Oj);
  std::vector<Jet> Ol(static_cast<std::size_t>(n * n));
  s.O.resize(n, n);
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < n; ++c) {
      Jet acc(0.0);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) acc += Oj(i, j) * Yj(i, b) * Yj(j, c);
      Ol[static_cast<std::size_t>(b * n + c)] = acc;
      s.O(b, c) = acc.value();
    }
  s.dO.assign(static_cast<std::size_t>(n * n * n), 0.0);
  for (int a = 0; a < n; ++a) {
    const JetVec ya = Yj.col(a);
    for (int bc = 0; bc < n * n; ++bc)
      s.dO[static_cast<std::size_t>(a * n * n + bc)] = directional(ya, Ol[static_cast<std::size_t>(bc)]).value();
  }
  s.og.resize(n);
  for (int a = 0; a < n; ++a) s.og[a] = s.Y.col(a).dot(om * Gv);

  // (L_G h)(Y_a, Y_b) = G(h(Y_a, Y_b)) - h([G, Y_a], Y_b) - h(Y_a, [G, Y_b]).
  const JetMat& hj = lm.h();
  std::vector<Eigen::VectorXd> gy(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) gy[static_cast<std::size_t>(a)] = values(bracket(G, JetVec(Yj.col(a))));
  s.lie.resize(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      s.lie(a, b) = directional(G, hj(a, b)).value() - gy[static_cast<std::size_t>(a)].dot(s.P * s.Y.col(b)) -
                    s.Y.col(a).dot(s.P * gy[static_cast<std::size_t>(b)]);

  const CurvatureBundle& cn = lm.codomain_curvature();
  s.gn = cn.gamma;
  s.rn = cn.riemann;

  // h(nabla_{Y_b} G, Y_d) with nabla acting on codomain components.
  s.hnG.resize(n, n);
  for (int b = 0; b < n; ++b) {
    Eigen::VectorXd comp(n);
    for (int d = 0; d < n; ++d) {
      double acc = directional(JetVec(Yj.col(b)), Ga[static_cast<std::size_t>(d)]).value();
      for (int a = 0; a < n; ++a) acc += s.gn(d, b, a) * Ga[static_cast<std::size_t>(a)].value();
      comp[d] = acc;
    }
    for (int d = 0; d < n; ++d) s.hnG(b, d) = s.H.row(d).dot(comp);
  }

  s.rm = riemann(lm.g()).riemann;
}

Lemma15Evaluator::~Lemma15Evaluator() = default;

int Lemma15Evaluator::n() const { return s_->n; }

Lemma15Result Lemma15Evaluator::evaluate(const std::array<int, 4>& frame) const {
  const State& s = *s_;
  const int n = s.n;
  for (int f : frame)
    if (f < 0 || f >= n) throw std::out_of_range("lemma15 frame index out of range");
  const int a = frame[0], b = frame[1], c = frame[2], d = frame[3];
  const Eigen::MatrixXd& H = s.H;
  const Eigen::MatrixXd& O = s.O;
  const Eigen::VectorXd& ys = s.ys;
  const Eigen::VectorXd X = s.Y.col(a), Y = s.Y.col(b), Z = s.Y.col(c), Hv = s.Y.col(d);

  Lemma15Result r;
  Lemma15Terms& t = r.terms;
  t.frame = frame;
  t.lie_term = s.lie(a, b);
  t.n_xs_ys = n * ys[a] * ys[b];
  t.grad_sq = s.grad_sq;
  t.vvs = s.vvs;
  t.vs_sq = s.vs * s.vs;
  t.h_iomega = O.row(a).dot(s.Hi * O.row(b).transpose());
  t.nabla_omega = s.nabla_omega(a, b, c);
  t.omega_grad_x = s.og[a];
  t.omega_grad_y = s.og[b];
  t.hess = {s.hnG(b, d), s.hnG(a, d), s.hnG(a, c), s.hnG(b, c)};
  t.pulled_rn = s.rn(a, b, c, d);
  t.lhs = {s.rm.contract(X, s.V, Y, s.V), s.rm.contract(X, Y, Z, s.V), s.rm.contract(X, Y, Z, Hv)};

  const double e2n4 = s.lam(2 * n - 4), em2 = s.lam(-2);
  // Each relation is a sum of terms; the residual scale is their l1 size.
  auto finish = [](double lhs, std::initializer_list<double> terms, double& rhs) {
    double sum = 0.0, size = std::abs(lhs);
    for (double x : terms) {
      sum += x;
      size += std::abs(x);
    }
    rhs = sum;
    return std::abs(lhs - sum) / std::max(1.0, size);
  };

  r.r11 = finish(t.lhs[0],
                 {-0.5 * (n - 2) * e2n4 * t.lie_term, -(n - 2) * e2n4 * (t.n_xs_ys - t.grad_sq * H(a, b)),
                  em2 * (t.vvs - (n - 1) * t.vs_sq) * H(a, b), 0.25 * s.lam(4 * n - 6) * t.h_iomega},
                 t.rhs[0]);

  r.r12 = finish(t.lhs[1],
                 {-0.5 * e2n4 * t.nabla_omega,
                  0.5 * (n - 1) * e2n4 * (ys[a] * O(b, c) + ys[b] * O(c, a) - 2.0 * ys[c] * O(a, b)),
                  -em2 * (s.xvs[a] - (n - 2) * ys[a] * s.vs) * H(b, c),
                  em2 * (s.xvs[b] - (n - 2) * ys[b] * s.vs) * H(a, c),
                  0.5 * e2n4 * (t.omega_grad_x * H(b, c) - t.omega_grad_y * H(a, c))},
                 t.rhs[1]);

  r.r13 = finish(t.lhs[2],
                 {em2 * t.pulled_rn,
                  -0.25 * e2n4 * (O(d, a) * O(b, c) + O(d, b) * O(c, a) - 2.0 * O(d, c) * O(a, b)),
                  -0.5 * em2 * s.vs * (-O(b, d) * H(a, c) + O(a, d) * H(b, c) - O(a, c) * H(b, d) + O(b, c) * H(a, d)),
                  -em2 * (ys[a] * ys[d] * H(b, c) - ys[a] * ys[c] * H(b, d) - ys[b] * ys[d] * H(a, c) +
                          ys[b] * ys[c] * H(a, d)),
                  em2 * (H(a, c) * t.hess[0] - H(b, c) * t.hess[1] + H(b, d) * t.hess[2] - H(a, d) * t.hess[3]),
                  -em2 * (H(a, c) * H(b, d) - H(a, d) * H(b, c)) * (s.lam(-2 * n + 2) * t.vs_sq + t.grad_sq)},
                 t.rhs[2]);
  return r;
}

Lemma15Result lemma15_residuals(const SubmersionSpec& spec, const Eigen::VectorXd& point,
                                const std::array<int, 4>& frame, double harmonic_tol) {
  return Lemma15Evaluator(spec, point, harmonic_tol).evaluate(frame);
}

Lemma15Sweep lemma15_sweep(const SubmersionSpec& spec, int samples, std::uint64_t seed, double harmonic_tol) {
  struct PointSup {
    double r11 = 0.0, r12 = 0.0, r13 = 0.0, worst = -1.0;
    std::array<int, 4> frame{};
    long frames = 0;
  };
  const auto per_point = parallel_map<PointSup>(samples, [&](int k) {
    const Eigen::VectorXd p = sample_point(spec.domain, seed, k);
    Lemma15Evaluator ev(spec, p, harmonic_tol);
    const int n = ev.n();
    PointSup s;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) {
            const Lemma15Result r = ev.evaluate({a, b, c, d});
            s.r11 = std::max(s.r11, r.r11);
            s.r12 = std::max(s.r12, r.r12);
            s.r13 = std::max(s.r13, r.r13);
            const double w = std::max({r.r11, r.r12, r.r13});
            if (w > s.worst) {
              s.worst = w;
              s.frame = {a, b, c, d};
            }
            ++s.frames;
          }
    return s;
  });
  Lemma15Sweep out;
  out.samples = samples;
  double worst = -1.0;
  for (int k = 0; k < samples; ++k) {
    const PointSup& s = per_point[static_cast<std::size_t>(k)];
    out.r11 = std::max(out.r11, s.r11);
    out.r12 = std::max(out.r12, s.r12);
    out.r13 = std::max(out.r13, s.r13);
    out.frames += s.frames;
    const double w = std::max({s.r11, s.r12, s.r13});
    if (w > worst) {
      worst = w;
      out.worst_sample = k;
      out.worst_frame = s.frame;
      out.worst_point = sample_point(spec.domain, seed, k);
    }
  }
  return out;
}

// -- leaves of an integrable horizontal distribution --------------------------

namespace {

struct LeafPoint {
  std::vector<double> secs;
};

LeafPoint leaf_sectional(const SubmersionSpec& spec, const Eigen::VectorXd& p, std::uint64_t seed, int index,
                         double tol) {
  LocalMorphism lm(spec, p);
  const int m = lm.m(), n = lm.n();
  if (omega_norm(lm) > tol)
    throw NotIntegrable("horizontal distribution of '" + spec.name + "' is not integrable at " + point_text(p));

  // g~ = lambda^(-2n+4) g
  const Jet w = pow_const(lm.lambda2(), -(n - 2.0));
  JetMat gt(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) gt(i, j) = w * lm.g()(i, j);
  const CurvatureBundle bt = riemann(gt);

  const JetMat& Yj = lm.lifts();
  const Eigen::MatrixXd Y = values(Yj);
  const Eigen::VectorXd V = values(lm.V());
  const double vv = V.dot(bt.g * V);

  // II(Y_a, Y_b): vertical part of nabla~_{Y_a} Y_b.
  std::vector<Eigen::VectorXd> II(static_cast<std::size_t>(n * n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Eigen::VectorXd nab(m);
      for (int k = 0; k < m; ++k) {
        double acc = directional(JetVec(Yj.col(a)), Yj(k, b)).value();
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) acc += bt.gamma(k, i, j) * Y(i, a) * Y(j, b);
        nab[k] = acc;
      }
      II[static_cast<std::size_t>(a * n + b)] = (nab.dot(bt.g * V) / vv) * V;
    }
  auto second = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) acc += x[a] * y[b] * II[static_cast<std::size_t>(a * n + b)];
    return acc;
  };
  auto sec = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const Eigen::VectorXd X = Y * x, Yv = Y * y;
    const double area = X.dot(bt.g * X) * Yv.dot(bt.g * Yv) - std::pow(X.dot(bt.g * Yv), 2);
    const Eigen::VectorXd xx = second(x, x), yy = second(y, y), xy = second(x, y);
    return (bt.riemann.contract(X, Yv, X, Yv) + xx.dot(bt.g * yy) - xy.dot(bt.g * xy)) / area;
  };

  LeafPoint out;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) out.secs.push_back(sec(Eigen::VectorXd::Unit(n, a), Eigen::VectorXd::Unit(n, b)));
  auto rng = plane_rng(seed, index);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 2; ++k) {
    Eigen::VectorXd x(n), y(n);
    for (int a = 0; a < n; ++a) x[a] = normal(rng);
    for (int a = 0; a < n; ++a) y[a] = normal(rng);
    out.secs.push_back(sec(x, y));
  }
  return out;
}

}  // namespace

LeafCurvatureReport leaf_curvature_check(const SubmersionSpec& spec, const std::vector<double>& leaves,
                                         int samples_per_leaf, std::uint64_t seed, double tol) {
  if (!spec.leaf_coordinate)
    throw std::invalid_argument("leaf curvature of '" + spec.name + "' needs a leaf coordinate");
  require_one_fibre(spec, "leaf curvature", 2);
  const int leaf = *spec.leaf_coordinate;
  LeafCurvatureReport rep;
  rep.constant_per_leaf = true;
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    const double t = leaves[li];
    const auto pts = parallel_map<LeafPoint>(samples_per_leaf, [&](int k) {
      const Eigen::VectorXd p = sample_point(spec.domain, seed, k, std::make_pair(leaf, t));
      return leaf_sectional(spec, p, seed, static_cast<int>(li) * samples_per_leaf + k, 1e-6);
    });
    LeafSample s;
    s.leaf = t;
    double lo = INFINITY, hi = -INFINITY, sum = 0.0;
    for (const auto& lp : pts)
      for (double v : lp.secs) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
        ++s.planes;
      }
    s.value = s.planes ? sum / s.planes : 0.0;
    s.spread = s.planes ? hi - lo : 0.0;
    const double rel = s.spread / std::max(1.0, std::abs(s.value));
    rep.spread = std::max(rep.spread, rel);
    if (rel > tol) rep.constant_per_leaf = false;
    rep.leaves.push_back(s);
  }
  return rep;
}

// -- dichotomy ----------------------------------------------------------------

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kKillingType:
      return "killing_type";
    case Verdict::kIntegrableHorizontal:
      return "integrable_horizontal";
    case Verdict::kBoth:
      return "both";
    case Verdict::kNeither:
      return "neither";
  }
  return "neither";
}

ClassificationVerdict classify_thm31(const SubmersionSpec& spec, int samples, std::uint64_t seed, double tol,
                                     std::vector<double> leaves) {
  require_one_fibre(spec, "classification", 2);
  struct PointData {
    double killing, omega, harmonic;
  };
  const auto data = parallel_map<PointData>(samples, [&](int k) {
    LocalMorphism lm(spec, sample_point(spec.domain, seed, k));
    return PointData{killing_measure(lm), omega_norm(lm), lm.tension().harmonic_residual};
  });
  ClassificationVerdict v;
  v.samples = samples;
  for (const auto& d : data) {
    v.killing_sup = std::max(v.killing_sup, d.killing);
    v.omega_sup = std::max(v.omega_sup, d.omega);
    v.harmonic_sup = std::max(v.harmonic_sup, d.harmonic);
  }
  const ConformalFlatnessReport flat = conformal_flatness_report(spec.domain, samples, seed);
  v.flatness_supported = flat.supported;
  v.domain_conformally_flat = flat.supported && flat.conformally_flat;
  v.hypotheses_met = v.harmonic_sup <= kHarmonicTol && v.domain_conformally_flat;

  const bool killing = v.killing_sup <= tol;
  const bool integrable = v.omega_sup <= tol;
  v.verdict = killing && integrable ? Verdict::kBoth
              : killing             ? Verdict::kKillingType
              : integrable          ? Verdict::kIntegrableHorizontal
                                    : Verdict::kNeither;
  if (integrable && spec.leaf_coordinate) {
    if (leaves.empty()) leaves = {0.0, 0.3, 0.5, 0.7};
    v.leaf_curvature = leaf_curvature_check(spec, leaves, std::max(1, std::min(samples, 10)), seed);
  }
  return v;
}

// -- descended form on a three-dimensional codomain ----------------------------

namespace {

struct Cor34Point {
  bool degenerate = false;
  double closed = 0.0, parallel = 0.0, leafcurv = 0.0, alpha_sq = 0.0;
  Eigen::VectorXd alpha;
  Eigen::VectorXd image;
};

// Jet on N (dim n, order `order`) of a basic function f on M, from its
// derivatives along the basic lifts.
Jet descend(const Jet& f, const JetMat& lifts, int order) {
  const int n = static_cast<int>(lifts.cols());
  std::vector<double> grad(static_cast<std::size_t>(n)), hess(static_cast<std::size_t>(n * n));
  std::vector<Jet> first(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    first[static_cast<std::size_t>(a)] = directional(JetVec(lifts.col(a)), f);
    grad[static_cast<std::size_t>(a)] = first[static_cast<std::size_t>(a)].value();
  }
  if (order >= 2)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        hess[static_cast<std::size_t>(a * n + b)] =
            0.5 * (directional(JetVec(lifts.col(a)), first[static_cast<std::size_t>(b)]).value() +
                   directional(JetVec(lifts.col(b)), first[static_cast<std::size_t>(a)]).value());
  return Jet::from_derivatives(n, order, f.value(), grad, hess, {});
}

Cor34Point cor34_point(const SubmersionSpec& spec, const Eigen::VectorXd& p, CodomainMetric metric, double tol) {
  LocalMorphism lm(spec, p);
  const int n = lm.n();
  Cor34Point out;
  out.image = lm.image();
  if (killing_measure(lm) > tol)
    throw NotKilling("map '" + spec.name + "' is not of Killing type at " + point_text(p));
  const FiberInvariants inv = fiber_invariants(lm);
  if (inv.omega_vertical > tol || inv.omega_lie > 10.0 * tol)
    throw OmegaNotBasic("Omega of '" + spec.name + "' is not basic at " + point_text(p));
  if (omega_norm(lm) <= 1e-12) {
    out.degenerate = true;
    out.alpha = Eigen::VectorXd::Zero(n);
    return out;
  }

  const JetMat& Yj = lm.lifts();
  const JetMat hN = metric_jets(spec.codomain, lm.image());
  JetMat hh = hN;
  if (metric == CodomainMetric::kRescaled) {
    const Jet c = descend(pow_const(lm.lambda2(), -2.0), Yj, 2);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) hh(a, b) = c * hN(a, b);
  }
  const JetMat hi = inverse(hh);
  const Jet vol = sqrt(determinant(hh));

  // Omega-hat on N from Omega on the lifts; order 1.
  JetMat Oh(n, n);
  const JetMat& Oj = lm.Omega();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Jet acc(0.0);
      for (int i = 0; i < lm.m(); ++i)
        for (int j = 0; j < lm.m(); ++j) acc += Oj(i, j) * Yj(i, a) * Yj(j, b);
      Oh(a, b) = descend(acc, Yj, 1);
    }

  // alpha_c = 1/2 sqrt(det h) h^ai h^bj Omega_ij eps_abc
  JetMat up = hi * Oh * hi;
  JetVec alpha(n);
  alpha[0] = vol * up(1, 2);
  alpha[1] = vol * up(2, 0);
  alpha[2] = vol * up(0, 1);
  const Eigen::VectorXd av = values(alpha);
  const CurvatureBundle bh = riemann(hh);
  const double asq = av.dot(bh.g_inv * av);
  const double anorm = std::sqrt(asq);

  Eigen::MatrixXd da(n, n), na(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      da(a, b) = alpha[b].grad(a) - alpha[a].grad(b);
      double acc = alpha[b].grad(a);
      for (int c = 0; c < n; ++c) acc -= bh.gamma(c, a, b) * av[c];
      na(a, b) = acc;
    }
  out.closed = form_norm(da, bh.g_inv, 0.5) / anorm;
  out.parallel = form_norm(na, bh.g_inv, 1.0) / anorm;

  const Eigen::VectorXd sharp = bh.g_inv * av;
  const Eigen::MatrixXd plane = gram_schmidt(bh.g, Eigen::MatrixXd::Identity(n, n), 2, sharp);
  const double sec = bh.riemann.contract(Eigen::VectorXd(plane.col(0)), Eigen::VectorXd(plane.col(1)),
                                         Eigen::VectorXd(plane.col(0)), Eigen::VectorXd(plane.col(1)));
  out.leafcurv = std::abs(sec - asq) / std::max({std::abs(sec), asq, 1e-300});
  out.alpha_sq = asq;
  out.alpha = av;
  return out;
}

}  // namespace

Cor34Data cor34_iia_check(const SubmersionSpec& spec, int samples, std::uint64_t seed, CodomainMetric metric,
                          double tol) {
  if (spec.n() != 3 || spec.m() != 4)
    throw WrongDimension("descended-form check needs a map R^4 -> N^3; '" + spec.name + "' has m = " +
                         std::to_string(spec.m()) + ", n = " + std::to_string(spec.n()));
  const auto pts = parallel_map<Cor34Point>(
      samples, [&](int k) { return cor34_point(spec, sample_point(spec.domain, seed, k), metric, tol); });
  Cor34Data d;
  d.samples = samples;
  d.degenerate = !pts.empty();
  double worst = -1.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Cor34Point& p = pts[k];
    const double w = std::max({p.closed, p.parallel, p.leafcurv});
    if (w > worst) {
      worst = w;
      d.worst_sample = static_cast<int>(k);
    }
    d.degenerate = d.degenerate && p.degenerate;
    d.closed_residual = std::max(d.closed_residual, p.closed);
    d.parallel_residual = std::max(d.parallel_residual, p.parallel);
    d.leafcurv_residual = std::max(d.leafcurv_residual, p.leafcurv);
    d.alpha_norm_sq = p.alpha_sq;
    d.alpha.push_back(p.alpha);
    d.images.push_back(p.image);
  }
  return d;
}

}  // namespace hmc
