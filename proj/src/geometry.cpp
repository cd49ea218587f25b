#include "hmcheck/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "hmcheck/parallel.hpp"

namespace hmc {

namespace {

int upper_index(int m, int i, int j) {
  if (i > j) std::swap(i, j);
  return i * m - i * (i - 1) / 2 + (j - i);
}

std::string point_text(const Eigen::VectorXd& p) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (Eigen::Index i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ")";
  return os.str();
}

std::complex<double> hermitian(const Eigen::MatrixXd& g, const Eigen::VectorXcd& x) {
  return x.adjoint() * g.cast<std::complex<double>>() * x;
}

bool within_margin(const MetricChart& chart, const Eigen::VectorXd& p, double margin, int skip) {
  for (int i = 0; i < chart.dim(); ++i) {
    if (i == skip) continue;
    const Interval& iv = chart.box()[static_cast<std::size_t>(i)];
    const double w = iv.hi - iv.lo;
    if (p[i] < iv.lo + margin * w || p[i] > iv.hi - margin * w) return false;
  }
  return true;
}

bool constraint_holds(const MetricChart& chart, const Eigen::VectorXd& p) {
  if (!chart.constraint()) return true;
  try {
    std::vector<double> env(p.data(), p.data() + p.size());
    return eval<double>(*chart.constraint(), env) > 0.0;
  } catch (const DomainError&) {
    return false;
  }
}

}  // namespace

// -- MetricChart -----------------------------------------------------------

MetricChart::MetricChart(std::string name, std::vector<std::string> coords, std::vector<ExprAst> upper,
                         std::vector<Interval> box, std::optional<ExprAst> constraint)
    : name_(std::move(name)),
      coords_(std::move(coords)),
      upper_(std::move(upper)),
      box_(std::move(box)),
      constraint_(std::move(constraint)) {
  const int m = dim();
  if (m < 2 || m > kJetMaxDim)
    throw std::invalid_argument("metric '" + name_ + "': dimension must lie in [2, " +
                                std::to_string(kJetMaxDim) + "]");
  if (static_cast<int>(upper_.size()) != m * (m + 1) / 2)
    throw std::invalid_argument("metric '" + name_ + "': expected " + std::to_string(m * (m + 1) / 2) +
                                " upper-triangle components");
  if (static_cast<int>(box_.size()) != m)
    throw std::invalid_argument("metric '" + name_ + "': box needs one interval per coordinate");
  for (const auto& iv : box_)
    if (!(iv.lo < iv.hi)) throw std::invalid_argument("metric '" + name_ + "': empty box interval");
  for (const auto& c : upper_)
    if (c.empty() || c.variables() != coords_)
      throw std::invalid_argument("metric '" + name_ + "': component not parsed against the chart coordinates");
  if (constraint_ && constraint_->variables() != coords_)
    throw std::invalid_argument("metric '" + name_ + "': constraint not parsed against the chart coordinates");
}

MetricChart MetricChart::from_strings(std::string name, std::vector<std::string> coords,
                                      const std::vector<std::string>& components, std::vector<Interval> box,
                                      const std::string& constraint) {
  const int m = static_cast<int>(coords.size());
  std::vector<ExprAst> upper;
  if (static_cast<int>(components.size()) == m * (m + 1) / 2) {
    for (const auto& c : components) upper.push_back(parse(c, coords));
  } else if (static_cast<int>(components.size()) == m * m) {
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        ExprAst a = parse(components[static_cast<std::size_t>(i * m + j)], coords);
        const ExprAst b = parse(components[static_cast<std::size_t>(j * m + i)], coords);
        if (!structurally_equal(a, b))
          throw std::invalid_argument("metric '" + name + "': component (" + std::to_string(i) + "," +
                                      std::to_string(j) + ") differs from its transpose");
        upper.push_back(std::move(a));
      }
  } else {
    throw std::invalid_argument("metric '" + name + "': expected " + std::to_string(m * (m + 1) / 2) +
                                " or " + std::to_string(m * m) + " components, got " +
                                std::to_string(components.size()));
  }
  std::optional<ExprAst> c;
  if (!constraint.empty()) c = parse(constraint, coords);
  return MetricChart(std::move(name), std::move(coords), std::move(upper), std::move(box), std::move(c));
}

MetricChart MetricChart::conformal(std::string name, std::vector<std::string> coords, const std::string& factor,
                                   std::vector<Interval> box, const std::string& constraint) {
  const int m = static_cast<int>(coords.size());
  std::vector<std::string> upper;
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) upper.push_back(i == j ? factor : "0");
  return from_strings(std::move(name), std::move(coords), upper, std::move(box), constraint);
}

const ExprAst& MetricChart::component(int i, int j) const {
  return upper_[static_cast<std::size_t>(upper_index(dim(), i, j))];
}

bool MetricChart::admits(const Eigen::VectorXd& p, double margin) const {
  return p.size() == dim() && within_margin(*this, p, margin, -1) && constraint_holds(*this, p);
}

// -- jets ------------------------------------------------------------------

JetMat metric_jets(const MetricChart& chart, const Eigen::VectorXd& p) {
  const int m = chart.dim();
  std::vector<Jet> coords;
  coords.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) coords.push_back(Jet::coordinate(p, i));
  JetMat g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      const ExprAst& c = chart.component(i, j);
      try {
        g(i, j) = eval<Jet>(c, coords);
      } catch (const DomainError& e) {
        throw GeometryError("metric '" + chart.name() + "' component (" + std::to_string(i) + "," +
                            std::to_string(j) + ") at " + point_text(p) + ": " + describe(e, c));
      }
      if (g(i, j).is_constant()) g(i, j) = Jet::constant(m, g(i, j).value());
      g(j, i) = g(i, j);
    }
  require_positive_definite(values(g), p);
  return g;
}

Eigen::MatrixXd metric_values(const MetricChart& chart, const Eigen::VectorXd& p) {
  const int m = chart.dim();
  std::vector<double> env(p.data(), p.data() + p.size());
  Eigen::MatrixXd g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) g(i, j) = g(j, i) = eval<double>(chart.component(i, j), env);
  return g;
}

void require_positive_definite(const Eigen::MatrixXd& g, const Eigen::VectorXd& p) {
  if (!g.allFinite()) throw SamplingError("metric is not finite at " + point_text(p), p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < 1e-10)
    throw SamplingError("metric is not positive definite at " + point_text(p), p);
}

Tensor3<Jet> christoffel(const JetMat& g) {
  const int m = static_cast<int>(g.rows());
  JetMat g_inv;
  try {
    g_inv = inverse(g);
  } catch (const std::domain_error&) {
    throw GeometryError("christoffel: metric is singular at the point");
  }
  // First kind: Gamma_{l i j} = (d_i g_jl + d_j g_il - d_l g_ij) / 2.
  std::vector<JetMat> dg(static_cast<std::size_t>(m), JetMat(m, m));
  for (int l = 0; l < m; ++l)
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) dg[static_cast<std::size_t>(l)](i, j) = dg[static_cast<std::size_t>(l)](j, i) =
                                      g(i, j).partial(l);
  Tensor3<Jet> first(m);
  for (int l = 0; l < m; ++l)
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        first(l, i, j) = 0.5 * (dg[static_cast<std::size_t>(i)](j, l) + dg[static_cast<std::size_t>(j)](i, l) -
                                dg[static_cast<std::size_t>(l)](i, j));
        first(l, j, i) = first(l, i, j);
      }
  Tensor3<Jet> gamma(m);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        Jet acc(0.0);
        for (int l = 0; l < m; ++l) acc += g_inv(k, l) * first(l, i, j);
        gamma(k, i, j) = acc;
        gamma(k, j, i) = acc;
      }
  return gamma;
}

Tensor3<Jet> christoffel(const MetricChart& chart, const Eigen::VectorXd& p) {
  return christoffel(metric_jets(chart, p));
}

Tensor3<double> values(const Tensor3<Jet>& t) {
  const int m = t.dim();
  Tensor3<double> out(m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) out(a, b, c) = t(a, b, c).value();
  return out;
}

// -- curvature -------------------------------------------------------------

CurvatureBundle riemann(const JetMat& g) {
  const int m = static_cast<int>(g.rows());
  if (m == 0 || g(0, 0).order() < 2) throw std::logic_error("riemann: metric jets need order >= 2");
  const Tensor3<Jet> gj = christoffel(g);
  CurvatureBundle b;
  b.g = values(g);
  b.g_inv = b.g.inverse();
  b.gamma = values(gj);
  const Tensor3<double>& G = b.gamma;
  b.riemann = Tensor4(m);
  // R^l_{cab} = d_a G^l_bc - d_b G^l_ac + G^l_ap G^p_bc - G^l_bp G^p_ac
  std::vector<double> rl(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a)
    for (int b2 = 0; b2 < m; ++b2) {
      if (a == b2) continue;
      for (int c = 0; c < m; ++c) {
        for (int l = 0; l < m; ++l) {
          double v = gj(l, b2, c).grad(a) - gj(l, a, c).grad(b2);
          for (int p = 0; p < m; ++p) v += G(l, a, p) * G(p, b2, c) - G(l, b2, p) * G(p, a, c);
          rl[static_cast<std::size_t>(l)] = v;
        }
        for (int d = 0; d < m; ++d) {
          double v = 0.0;
          for (int l = 0; l < m; ++l) v += b.g(d, l) * rl[static_cast<std::size_t>(l)];
          b.riemann(a, b2, c, d) = -kCurvatureSign * v;
        }
      }
    }
  b.ricci = Eigen::MatrixXd::Zero(m, m);
  for (int y = 0; y < m; ++y)
    for (int z = 0; z < m; ++z) {
      double v = 0.0;
      for (int a = 0; a < m; ++a)
        for (int c = 0; c < m; ++c) v += b.g_inv(a, c) * b.riemann(a, y, c, z);
      b.ricci(y, z) = v;
    }
  b.scalar = (b.g_inv.cwiseProduct(b.ricci)).sum();
  return b;
}

CurvatureBundle riemann(const MetricChart& chart, const Eigen::VectorXd& p) {
  CurvatureBundle b = riemann(metric_jets(chart, p));
  b.point = p;
  return b;
}

Tensor4 kulkarni(const Eigen::MatrixXd& h, const Eigen::MatrixXd& k) {
  if (h.rows() != k.rows() || h.cols() != k.cols() || h.rows() != h.cols())
    throw std::invalid_argument("kulkarni: dimension mismatch");
  const int m = static_cast<int>(h.rows());
  Tensor4 r(m);
  for (int t = 0; t < m; ++t)
    for (int x = 0; x < m; ++x)
      for (int y = 0; y < m; ++y)
        for (int z = 0; z < m; ++z)
          r(t, x, y, z) = h(t, y) * k(x, z) + h(x, z) * k(t, y) - h(t, z) * k(x, y) - h(x, y) * k(t, z);
  return r;
}

void schouten_weyl(CurvatureBundle& b) {
  const int m = static_cast<int>(b.g.rows());
  if (m < 3) throw GeometryError("schouten_weyl: the decomposition needs dimension >= 3");
  const double tr_r = b.scalar / (2.0 * (m - 1));
  b.schouten = (b.ricci - tr_r * b.g) / (m - 2.0);
  b.weyl = b.riemann - kulkarni(b.g, b.schouten);
  b.has_weyl = true;
}

double tensor_norm(const Tensor4& t, const Eigen::MatrixXd& g) {
  return t.in_frame(orthonormal_frame(g)).data().norm();
}

Eigen::MatrixXd orthonormal_frame(const Eigen::MatrixXd& g) {
  const int m = static_cast<int>(g.rows());
  for (int rot = 0; rot < m; ++rot) {
    Eigen::MatrixXd e(m, m);
    bool ok = true;
    for (int s = 0; s < m && ok; ++s) {
      Eigen::VectorXd v = Eigen::VectorXd::Unit(m, (s + rot) % m);
      for (int pass = 0; pass < 2; ++pass)
        for (int q = 0; q < s; ++q) v -= (e.col(q).dot(g * v)) * e.col(q);
      const double nrm = std::sqrt(std::max(0.0, v.dot(g * v)));
      if (nrm < 1e-8) ok = false;
      else e.col(s) = v / nrm;
    }
    if (ok) return e;
  }
  throw GeometryError("orthonormal_frame: metric is degenerate");
}

Eigen::MatrixXd gram_schmidt(const Eigen::MatrixXd& g, const Eigen::MatrixXd& candidates, int count,
                             const Eigen::MatrixXd& against) {
  const int m = static_cast<int>(g.rows());
  std::vector<Eigen::VectorXd> basis;
  auto project_out = [&](Eigen::VectorXd v) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) v -= (q.dot(g * v)) * q;
    return v;
  };
  auto add = [&](const Eigen::VectorXd& c) {
    const double before = std::sqrt(std::max(0.0, c.dot(g * c)));
    const Eigen::VectorXd v = project_out(c);
    const double nrm = std::sqrt(std::max(0.0, v.dot(g * v)));
    if (before == 0.0 || nrm < 1e-8 * before) return false;
    basis.push_back(v / nrm);
    return true;
  };
  for (Eigen::Index j = 0; j < against.cols(); ++j) add(against.col(j));
  const std::size_t skip = basis.size();
  for (Eigen::Index j = 0; j < candidates.cols() && static_cast<int>(basis.size() - skip) < count; ++j)
    add(candidates.col(j));
  Eigen::MatrixXd out(m, static_cast<Eigen::Index>(basis.size() - skip));
  for (std::size_t j = skip; j < basis.size(); ++j) out.col(static_cast<Eigen::Index>(j - skip)) = basis[j];
  return out;
}

double sectional_curvature(const Tensor4& r, const Eigen::MatrixXd& g, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y) {
  const double area = x.dot(g * x) * y.dot(g * y) - std::pow(x.dot(g * y), 2);
  if (!(area > 0.0)) throw GeometryError("sectional_curvature: degenerate plane");
  return r.contract(x, y, x, y) / area;
}

std::vector<IsotropicPair> isotropic_planes(const Eigen::MatrixXd& g, FrameMode mode, const Eigen::VectorXd& u) {
  const int m = static_cast<int>(g.rows());
  if (m < 4) throw GeometryError("isotropic_planes: needs dimension >= 4");
  const std::complex<double> I(0.0, 1.0);
  std::vector<IsotropicPair> out;
  if (mode == FrameMode::kFull) {
    const Eigen::MatrixXcd e = orthonormal_frame(g).cast<std::complex<double>>();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          for (int l = 0; l < m; ++l) {
            if (i == j || i == k || i == l || j == k || j == l || k == l) continue;
            for (double s : {1.0, -1.0}) out.push_back({e.col(i) + s * I * e.col(j), e.col(k) + I * e.col(l)});
          }
    return out;
  }
  if (u.size() != m) throw std::invalid_argument("isotropic_planes: mixed mode needs U");
  const double nu = std::sqrt(u.dot(g * u));
  if (!(nu > 0.0)) throw GeometryError("isotropic_planes: U vanishes");
  const Eigen::VectorXcd uu = (u / nu).cast<std::complex<double>>();
  const Eigen::MatrixXcd x =
      gram_schmidt(g, Eigen::MatrixXd::Identity(m, m), m - 1, u).cast<std::complex<double>>();
  const int k_max = static_cast<int>(x.cols());
  for (int j = 0; j < k_max; ++j)
    for (int k = 0; k < k_max; ++k)
      for (int l = 0; l < k_max; ++l) {
        if (j == k || j == l || k == l) continue;
        for (double s : {1.0, -1.0}) out.push_back({uu + s * I * x.col(j), x.col(k) + I * x.col(l)});
      }
  return out;
}

double isotropic_residual(const Tensor4& r, const Eigen::MatrixXd& g, const std::vector<IsotropicPair>& pairs) {
  const double scale = std::max(1.0, tensor_norm(r, g));
  double worst = 0.0;
  for (const auto& p : pairs) {
    const double nx = hermitian(g, p.x).real();
    const double ny = hermitian(g, p.y).real();
    worst = std::max(worst, std::abs(r.contract(p.x, p.y, p.x, p.y)) / (scale * nx * ny));
  }
  return worst;
}

// -- sampling --------------------------------------------------------------

Eigen::VectorXd sample_point(const MetricChart& chart, std::uint64_t seed, int index,
                             std::optional<std::pair<int, double>> pinned) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), 0x6d6574u};
  std::mt19937_64 rng(seq);
  // 53 random bits -> [0, 1), identical on every platform.
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const int m = chart.dim();
  Eigen::VectorXd p(m);
  constexpr int kAttempts = 100000;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    for (int i = 0; i < m; ++i) {
      const Interval& iv = chart.box()[static_cast<std::size_t>(i)];
      p[i] = iv.lo + (iv.hi - iv.lo) * uniform();
    }
    // A pinned coordinate is exempt from the margin test: it was chosen.
    const int skip = pinned ? pinned->first : -1;
    if (pinned) p[skip] = pinned->second;
    if (within_margin(chart, p, 0.05, skip) && constraint_holds(chart, p)) return p;
  }
  throw SamplingError("no admissible sample point in the box of '" + chart.name() + "'", p);
}

std::vector<Eigen::VectorXd> sample_points(const MetricChart& chart, int count, std::uint64_t seed,
                                           std::optional<std::pair<int, double>> pinned) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) out.push_back(sample_point(chart, seed, i, pinned));
  return out;
}

// -- reports ---------------------------------------------------------------

ConformalFlatnessReport conformal_flatness_report(const MetricChart& chart, int samples, std::uint64_t seed,
                                                  double tol) {
  ConformalFlatnessReport rep;
  rep.samples = samples;
  if (chart.dim() < 4) {
    rep.supported = false;
    return rep;
  }
  struct Local {
    double weyl = 0.0;
    double iso = 0.0;
    Eigen::VectorXd p;
  };
  const auto locals = parallel_map<Local>(samples, [&](int i) {
    Local l;
    l.p = sample_point(chart, seed, i);
    CurvatureBundle b = riemann(chart, l.p);
    schouten_weyl(b);
    const Eigen::MatrixXd e = orthonormal_frame(b.g);
    const double r_norm = b.riemann.in_frame(e).data().norm();
    l.weyl = b.weyl.in_frame(e).data().norm() / std::max(1.0, r_norm);
    l.iso = isotropic_residual(b.riemann, b.g, isotropic_planes(b.g, FrameMode::kFull));
    return l;
  });
  double worst = -1.0;
  for (const auto& l : locals) {
    rep.weyl_sup = std::max(rep.weyl_sup, l.weyl);
    rep.isotropic_sup = std::max(rep.isotropic_sup, l.iso);
    if (std::max(l.weyl, l.iso) > worst) {
      worst = std::max(l.weyl, l.iso);
      rep.worst_point = l.p;
    }
  }
  rep.weyl_flat = rep.weyl_sup <= tol;
  rep.isotropic_flat = rep.isotropic_sup <= tol;
  rep.conformally_flat = rep.weyl_flat && rep.isotropic_flat;
  return rep;
}

MetricChart conformal_rescale(const MetricChart& chart, const ExprAst& factor, int spot_checks, std::uint64_t seed) {
  if (factor.variables() != chart.coords())
    throw std::invalid_argument("conformal_rescale: factor not parsed against the chart coordinates");
  for (const auto& p : sample_points(chart, spot_checks, seed)) {
    std::vector<double> env(p.data(), p.data() + p.size());
    double v = 0.0;
    try {
      v = eval<double>(factor, env);
    } catch (const DomainError& e) {
      throw GeometryError("conformal_rescale: factor undefined at " + point_text(p) + ": " + describe(e, factor));
    }
    if (!(v > 0.0)) throw GeometryError("conformal_rescale: factor is not positive at " + point_text(p));
  }
  std::vector<ExprAst> upper;
  for (const auto& c : chart.upper()) upper.push_back(multiply(factor, c));
  return MetricChart(chart.name() + "*(" + factor.source() + ")", chart.coords(), std::move(upper), chart.box(),
                     chart.constraint());
}

ConstantCurvatureReport constant_curvature_check(const MetricChart& chart, int samples, std::uint64_t seed,
                                                 double tol) {
  const int m = chart.dim();
  const auto secs = parallel_map<std::vector<double>>(samples, [&](int i) {
    const Eigen::VectorXd p = sample_point(chart, seed, i);
    const CurvatureBundle b = riemann(chart, p);
    const Eigen::MatrixXd e = orthonormal_frame(b.g);
    std::vector<double> out;
    for (int a = 0; a < m; ++a)
      for (int c = a + 1; c < m; ++c) out.push_back(sectional_curvature(b.riemann, b.g, e.col(a), e.col(c)));
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(i + 1)));
    std::normal_distribution<double> nd;
    for (int t = 0; t < 3; ++t) {
      Eigen::VectorXd x(m), y(m);
      for (int k = 0; k < m; ++k) {
        x[k] = nd(rng);
        y[k] = nd(rng);
      }
      out.push_back(sectional_curvature(b.riemann, b.g, e * x, e * y));
    }
    return out;
  });
  ConstantCurvatureReport rep;
  double lo = INFINITY, hi = -INFINITY, sum = 0.0;
  for (const auto& v : secs)
    for (double s : v) {
      lo = std::min(lo, s);
      hi = std::max(hi, s);
      sum += s;
      ++rep.planes;
    }
  if (rep.planes == 0) return rep;
  rep.c_estimate = sum / rep.planes;
  rep.spread = hi - lo;
  rep.is_constant = rep.spread <= tol * std::max(1.0, std::abs(rep.c_estimate));
  return rep;
}

double CurvatureIdentityResiduals::max() const {
  return std::max({antisymmetry, pair_symmetry, bianchi, weyl_trace, decomposition});
}

CurvatureIdentityResiduals curvature_identities(const CurvatureBundle& b) {
  const int m = static_cast<int>(b.g.rows());
  const Tensor4& R = b.riemann;
  const double scale = std::max(1.0, R.max_abs());
  CurvatureIdentityResiduals res;
  for (int t = 0; t < m; ++t)
    for (int x = 0; x < m; ++x)
      for (int y = 0; y < m; ++y)
        for (int z = 0; z < m; ++z) {
          res.antisymmetry = std::max({res.antisymmetry, std::abs(R(t, x, y, z) + R(x, t, y, z)),
                                       std::abs(R(t, x, y, z) + R(t, x, z, y))});
          res.pair_symmetry = std::max(res.pair_symmetry, std::abs(R(t, x, y, z) - R(y, z, t, x)));
          res.bianchi = std::max(res.bianchi, std::abs(R(t, x, y, z) + R(x, y, t, z) + R(y, t, x, z)));
        }
  if (b.has_weyl) {
    for (int y = 0; y < m; ++y)
      for (int z = 0; z < m; ++z) {
        double tr = 0.0;
        for (int a = 0; a < m; ++a)
          for (int d = 0; d < m; ++d) tr += b.g_inv(a, d) * b.weyl(a, y, z, d);
        res.weyl_trace = std::max(res.weyl_trace, std::abs(tr));
      }
    res.decomposition = (kulkarni(b.g, b.schouten) + b.weyl - R).max_abs();
  }
  res.antisymmetry /= scale;
  res.pair_symmetry /= scale;
  res.bianchi /= scale;
  res.weyl_trace /= scale;
  res.decomposition /= scale;
  return res;
}

}  // namespace hmc
