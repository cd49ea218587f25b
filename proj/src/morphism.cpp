#include "hmcheck/morphism.hpp"

#include <algorithm>
#include <cmath>
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

Jet dot(const JetVec& a, const JetVec& b) {
  Jet acc(0.0);
  for (Eigen::Index i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

Jet quadratic(const JetMat& g, const JetVec& x, const JetVec& y) {
  Jet acc(0.0);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    for (Eigen::Index j = 0; j < y.size(); ++j) acc += g(i, j) * x[i] * y[j];
  return acc;
}

double gnorm(const Eigen::MatrixXd& g, const Eigen::VectorXd& v) { return std::sqrt(std::max(0.0, v.dot(g * v))); }

}  // namespace

Eigen::VectorXd values_of(const JetVec& v) { return values(v); }

JetVec bracket(const JetVec& x, const JetVec& y) {
  JetVec out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = directional(x, y[i]) - directional(y, x[i]);
  return out;
}

// -- SubmersionSpec --------------------------------------------------------

SubmersionSpec SubmersionSpec::from_strings(std::string name, MetricChart domain, MetricChart codomain,
                                            const std::vector<std::string>& components,
                                            std::optional<int> leaf_coordinate) {
  SubmersionSpec s;
  s.name = std::move(name);
  for (const auto& c : components) s.components.push_back(parse(c, domain.coords()));
  s.domain = std::move(domain);
  s.codomain = std::move(codomain);
  s.leaf_coordinate = leaf_coordinate;
  s.validate();
  return s;
}

void SubmersionSpec::validate() const {
  if (static_cast<int>(components.size()) != n())
    throw std::invalid_argument("map '" + name + "': needs one component per codomain coordinate (" +
                                std::to_string(n()) + "), got " + std::to_string(components.size()));
  if (n() > m()) throw std::invalid_argument("map '" + name + "': codomain dimension exceeds domain dimension");
  for (const auto& c : components)
    if (c.variables() != domain.coords())
      throw std::invalid_argument("map '" + name + "': component not parsed against the domain coordinates");
  if (leaf_coordinate && (*leaf_coordinate < 0 || *leaf_coordinate >= m()))
    throw std::invalid_argument("map '" + name + "': leaf coordinate out of range");
}

// -- LocalMorphism ---------------------------------------------------------

LocalMorphism::LocalMorphism(const SubmersionSpec& spec, const Eigen::VectorXd& point)
    : spec_(spec), point_(point) {
  const int m = spec.m();
  const int n = spec.n();
  std::vector<Jet> x;
  for (int i = 0; i < m; ++i) x.push_back(Jet::coordinate(point, i));
  phi_.resize(n);
  image_.resize(n);
  for (int a = 0; a < n; ++a) {
    const ExprAst& c = spec.components[static_cast<std::size_t>(a)];
    try {
      phi_[a] = eval<Jet>(c, x);
    } catch (const DomainError& e) {
      throw GeometryError("map '" + spec.name + "' component " + std::to_string(a) + " at " + point_text(point) +
                          ": " + describe(e, c));
    }
    if (phi_[a].is_constant()) phi_[a] = Jet::constant(m, phi_[a].value());
    image_[a] = phi_[a].value();
  }
  dphi_.resize(n, m);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < m; ++i) dphi_(a, i) = phi_[a].partial(i);
  g_ = metric_jets(spec.domain, point);
  g_values_ = values(g_);
}

const JetMat& LocalMorphism::g_inv() const {
  if (!g_inv_) g_inv_ = inverse(g_);
  return *g_inv_;
}

const JetMat& LocalMorphism::h() const {
  if (!h_) {
    const int n = this->n();
    std::vector<Jet> y(phi_.data(), phi_.data() + n);
    JetMat h(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        const ExprAst& c = spec_.codomain.component(a, b);
        try {
          h(a, b) = eval<Jet>(c, y);
        } catch (const DomainError& e) {
          throw GeometryError("codomain metric of '" + spec_.name + "' at image " + point_text(image_) + ": " +
                              describe(e, c));
        }
        if (h(a, b).is_constant()) h(a, b) = Jet::constant(m(), h(a, b).value());
        h(b, a) = h(a, b);
      }
    require_positive_definite(values(h), image_);
    h_ = std::move(h);
  }
  return *h_;
}

const Eigen::MatrixXd& LocalMorphism::h_values() const {
  if (!h_values_) h_values_ = values(h());
  return *h_values_;
}

const JetMat& LocalMorphism::pullback() const {
  if (!pullback_) {
    const JetMat hd = h() * dphi_;
    pullback_ = JetMat(dphi_.transpose() * hd);
  }
  return *pullback_;
}

const Jet& LocalMorphism::lambda2() const {
  if (!lambda2_) {
    // Trace of phi^*h over a g-orthonormal horizontal frame equals
    // tr(g^-1 phi^*h), since phi^*h vanishes on vertical vectors.
    const JetMat& gi = g_inv();
    const JetMat& p = pullback();
    Jet tr(0.0);
    for (int i = 0; i < m(); ++i)
      for (int j = 0; j < m(); ++j) tr += gi(i, j) * p(j, i);
    const Jet l2 = tr * (1.0 / n());
    if (!(l2.value() > 0.0)) throw CriticalPoint("map '" + spec_.name + "' is critical at " + point_text(point_), point_);
    lambda2_ = l2;
  }
  return *lambda2_;
}

const Jet& LocalMorphism::sigma() const {
  if (!sigma_) sigma_ = Jet(0.5) * log(lambda2());
  return *sigma_;
}

const Eigen::MatrixXd& LocalMorphism::horizontal_frame() const {
  if (!hframe_) {
    // Horizontal lifts at value level: g^-1 dphi^T (dphi g^-1 dphi^T)^-1.
    const Eigen::MatrixXd d = values(dphi_);
    const Eigen::MatrixXd gi = g_values_.inverse();
    const Eigen::MatrixXd gram = d * gi * d.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (lu.rank() < n()) throw CriticalPoint("map '" + spec_.name + "' is not submersive at " + point_text(point_), point_);
    const Eigen::MatrixXd lifts = gi * d.transpose() * lu.inverse();
    const Eigen::MatrixXd f = gram_schmidt(g_values_, lifts, n());
    if (f.cols() < n()) throw CriticalPoint("map '" + spec_.name + "' is not submersive at " + point_text(point_), point_);
    hframe_ = f;
  }
  return *hframe_;
}

double LocalMorphism::hconf_residual() const {
  const Eigen::MatrixXd& e = horizontal_frame();
  const Eigen::MatrixXd d = values(dphi_);
  const Eigen::MatrixXd q = (d * e).transpose() * h_values() * (d * e);
  const double l2 = lambda2().value();
  return (q - l2 * Eigen::MatrixXd::Identity(n(), n())).cwiseAbs().maxCoeff() / std::max(1.0, l2);
}

const JetVec& LocalMorphism::kernel() const {
  if (!kernel_) {
    const int m = this->m();
    if (m != n() + 1) throw std::logic_error("vertical kernel needs one-dimensional fibres (m = n + 1)");
    const std::vector<Jet> minors = maximal_minors(dphi_);
    const unsigned all = (1u << m) - 1u;
    JetVec k(m);
    for (int i = 0; i < m; ++i) {
      const Jet& mi = minors[all & ~(1u << i)];
      k[i] = (i % 2 == 0) ? mi : Jet(0.0) - mi;
    }
    double scale = 1.0;
    for (int a = 0; a < n(); ++a) scale *= values(JetVec(dphi_.row(a).transpose())).norm();
    if (!(values(k).norm() > 1e-10 * std::max(1.0, scale)))
      throw CriticalPoint("map '" + spec_.name + "' has a critical point at " + point_text(point_), point_);
    kernel_ = std::move(k);
  }
  return *kernel_;
}

const JetVec& LocalMorphism::V() const {
  if (!V_) {
    const JetVec& k = kernel();
    const Jet kn = sqrt(quadratic(g_, k, k));
    const Jet scale = pow_const(lambda2(), 0.5 * (n() - 2)) / kn;
    JetVec v(m());
    for (int i = 0; i < m(); ++i) v[i] = scale * k[i];
    V_ = std::move(v);
  }
  return *V_;
}

const JetVec& LocalMorphism::theta() const {
  if (!theta_) {
    const JetVec& v = V();
    const Jet w = pow_const(lambda2(), -(n() - 2.0));
    JetVec t(m());
    for (int i = 0; i < m(); ++i) {
      Jet acc(0.0);
      for (int j = 0; j < m(); ++j) acc += g_(i, j) * v[j];
      t[i] = w * acc;
    }
    theta_ = std::move(t);
  }
  return *theta_;
}

const JetMat& LocalMorphism::Omega() const {
  if (!Omega_) {
    const JetVec& t = theta();
    JetMat o(m(), m());
    for (int i = 0; i < m(); ++i) {
      o(i, i) = Jet::constant(m(), 0.0).truncated(1);
      for (int j = i + 1; j < m(); ++j) {
        o(i, j) = t[j].partial(i) - t[i].partial(j);
        o(j, i) = Jet(0.0) - o(i, j);
      }
    }
    Omega_ = std::move(o);
  }
  return *Omega_;
}

double LocalMorphism::v_sigma() const {
  const JetVec& v = V();
  double acc = 0.0;
  for (int i = 0; i < m(); ++i) acc += v[i].value() * sigma().grad(i);
  return acc;
}

const JetMat& LocalMorphism::lifts() const {
  if (!lifts_) {
    const int m = this->m();
    const int n = this->n();
    try {
      if (m == n + 1) {
        // [d phi; theta] Y = (e_a; 0)
        JetMat a(m, m);
        a.topRows(n) = dphi_;
        const JetVec& t = theta();
        for (int i = 0; i < m; ++i) a(n, i) = t[i];
        JetMat rhs(m, n);
        for (int i = 0; i < m; ++i)
          for (int b = 0; b < n; ++b) rhs(i, b) = Jet(i == b ? 1.0 : 0.0);
        lifts_ = solve(a, rhs);
      } else {
        const JetMat& gi = g_inv();
        const JetMat gdt = gi * dphi_.transpose();
        const JetMat gram = dphi_ * gdt;
        lifts_ = JetMat(gdt * inverse(gram));
      }
    } catch (const std::domain_error&) {
      throw CriticalPoint("map '" + spec_.name + "': lift system singular at " + point_text(point_), point_);
    }
  }
  return *lifts_;
}

const Tensor3<Jet>& LocalMorphism::domain_christoffel() const {
  if (!gamma_) gamma_ = christoffel(g_);
  return *gamma_;
}

const CurvatureBundle& LocalMorphism::codomain_curvature() const {
  if (!codomain_) codomain_ = riemann(spec_.codomain, image_);
  return *codomain_;
}

Tension LocalMorphism::tension() const {
  const int m = this->m();
  const int n = this->n();
  const Eigen::MatrixXd gi = values(g_inv());
  const Tensor3<Jet>& gm = domain_christoffel();
  const Tensor3<double>& gn = codomain_curvature().gamma;
  const Eigen::MatrixXd d = values(dphi_);
  Tension t;
  t.tau = Eigen::VectorXd::Zero(n);
  for (int a = 0; a < n; ++a) {
    double acc = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        if (gi(i, j) == 0.0) continue;
        double hess = phi_[a].hess(i, j);
        for (int k = 0; k < m; ++k) hess -= gm(k, i, j).value() * d(a, k);
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c) hess += gn(a, b, c) * d(b, i) * d(c, j);
        acc += gi(i, j) * hess;
      }
    t.tau[a] = acc;
  }
  const double energy = (gi * d.transpose() * h_values() * d).trace();
  t.harmonic_residual = gnorm(h_values(), t.tau) / std::max(1.0, energy);
  return t;
}

Eigen::VectorXd LocalMorphism::vertical_part(const Eigen::VectorXd& z) const {
  const Eigen::VectorXd c = values(dphi_) * z;
  const Eigen::MatrixXd y = values(lifts());
  return z - y * c;
}

// -- spec-level wrappers -----------------------------------------------------

JetMat differential(const SubmersionSpec& spec, const Eigen::VectorXd& p) { return LocalMorphism(spec, p).dphi(); }

JetVec vertical_kernel(const SubmersionSpec& spec, const Eigen::VectorXd& p) { return LocalMorphism(spec, p).kernel(); }

Dilation dilation(const SubmersionSpec& spec, const Eigen::VectorXd& p) {
  LocalMorphism lm(spec, p);
  return {lm.lambda2(), lm.sigma(), lm.hconf_residual()};
}

Tension tension(const SubmersionSpec& spec, const Eigen::VectorXd& p) { return LocalMorphism(spec, p).tension(); }

FiberData fundamental_data(const SubmersionSpec& spec, const Eigen::VectorXd& p) {
  LocalMorphism lm(spec, p);
  FiberData f;
  f.point = p;
  f.lambda2 = lm.lambda2();
  f.sigma = lm.sigma();
  f.V = lm.V();
  f.theta = lm.theta();
  f.omega = values(lm.Omega());
  f.v_sigma = lm.v_sigma();
  return f;
}

JetVec basic_lift(const SubmersionSpec& spec, const Eigen::VectorXd& p, int a) {
  if (a < 0 || a >= spec.n()) throw std::out_of_range("basic_lift: codomain index out of range");
  return LocalMorphism(spec, p).lift(a);
}

Eigen::VectorXd integrability_tensor(const LocalMorphism& lm, int a, int b) {
  const Eigen::VectorXd z = values(bracket(lm.lift(a), lm.lift(b)));
  if (lm.m() == lm.n() + 1) {
    const Eigen::VectorXd v = values(lm.V());
    const Eigen::MatrixXd& g = lm.g_values();
    return -(z.dot(g * v) / v.dot(g * v)) * v;
  }
  return -lm.vertical_part(z);
}

Eigen::VectorXd integrability_tensor(const SubmersionSpec& spec, const Eigen::VectorXd& p, int a, int b) {
  if (a == b) throw std::invalid_argument("integrability_tensor: needs a != b");
  return integrability_tensor(LocalMorphism(spec, p), a, b);
}

OneillTerms oneill_terms(const LocalMorphism& lm, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const int n = lm.n();
  const int m = lm.m();
  const Eigen::MatrixXd d = values(lm.dphi());
  const Eigen::VectorXd cx = d * x;
  const Eigen::VectorXd cy = d * y;
  const Eigen::MatrixXd lifts = values(lm.lifts());
  const Eigen::VectorXd xh = lifts * cx;
  const Eigen::VectorXd yh = lifts * cy;

  // Rescaled domain metric lambda^2 g as jets of order 2.
  JetMat gt(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) gt(i, j) = lm.lambda2() * lm.g()(i, j);
  const CurvatureBundle bt = riemann(gt);

  // V[X,Y] is tensorial in horizontal X, Y: expand over the lifts.
  Eigen::VectorXd vb = Eigen::VectorXd::Zero(m);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b || cx[a] * cy[b] == 0.0) continue;
      vb += cx[a] * cy[b] * lm.vertical_part(values(bracket(lm.lift(a), lm.lift(b))));
    }
  OneillTerms t;
  t.lhs = bt.riemann.contract(xh, yh, xh, yh);
  t.codomain = lm.codomain_curvature().riemann.contract(cx, cy, cx, cy);
  t.bracket = 0.75 * vb.dot(bt.g * vb);
  const double scale = std::max({1.0, std::abs(t.lhs), std::abs(t.codomain), std::abs(t.bracket)});
  t.residual = std::abs(t.lhs - (t.codomain - t.bracket)) / scale;
  return t;
}

double oneill_residual(const SubmersionSpec& spec, const Eigen::VectorXd& p, int a, int b) {
  LocalMorphism lm(spec, p);
  const Eigen::MatrixXd lifts = values(lm.lifts());
  return oneill_terms(lm, lifts.col(a), lifts.col(b)).residual;
}

Prop23Report prop23_residual(const SubmersionSpec& spec, int samples, std::uint64_t seed, double flat_tol) {
  Prop23Report rep;
  rep.samples = samples;
  const int n = spec.n();
  rep.domain_conformally_flat = conformal_flatness_report(spec.domain, samples, seed, flat_tol).conformally_flat;
  if (n >= 4) rep.codomain_conformally_flat = conformal_flatness_report(spec.codomain, samples, seed, flat_tol).conformally_flat;
  if (n < 4) {
    rep.vacuous = true;
    return rep;
  }
  const auto sups = parallel_map<double>(samples, [&](int s) {
    const Eigen::VectorXd p = sample_point(spec.domain, seed, s);
    LocalMorphism lm(spec, p);
    const Eigen::MatrixXd& g = lm.g_values();
    // I(Y_a, Y_b) for all lift pairs, then bilinear expansion.
    std::vector<Eigen::VectorXd> ib(static_cast<std::size_t>(n * n), Eigen::VectorXd::Zero(lm.m()));
    double i_scale = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        ib[static_cast<std::size_t>(a * n + b)] = integrability_tensor(lm, a, b);
        ib[static_cast<std::size_t>(b * n + a)] = -ib[static_cast<std::size_t>(a * n + b)];
        i_scale = std::max(i_scale, gnorm(g, ib[static_cast<std::size_t>(a * n + b)]));
      }
    const Eigen::MatrixXd d = values(lm.dphi());
    const Eigen::MatrixXd e = lm.horizontal_frame();
    const std::complex<double> I(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            if (i == j || i == k || i == l || j == k || j == l || k == l) continue;
            for (double sgn : {1.0, -1.0}) {
              const Eigen::VectorXcd cx = d * e.col(i) + sgn * I * (d * e.col(j));
              const Eigen::VectorXcd cy = d * e.col(k) + I * (d * e.col(l));
              Eigen::VectorXcd val = Eigen::VectorXcd::Zero(lm.m());
              for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                  if (a != b) val += cx[a] * cy[b] * ib[static_cast<std::size_t>(a * n + b)].cast<std::complex<double>>();
              const std::complex<double> gii = (val.transpose() * g.cast<std::complex<double>>() * val).value();
              // |X|^2 |Y|^2 = 4 for frame combinations; lift coefficients carry lambda.
              const double lam2 = lm.lambda2().value();
              worst = std::max(worst, std::abs(gii) / std::max(1.0, 4.0 * lam2 * lam2 * i_scale * i_scale));
            }
          }
    return worst;
  });
  for (double s : sups) rep.sup = std::max(rep.sup, s);
  return rep;
}

FiberInvariants fiber_invariants(const LocalMorphism& lm) {
  const int m = lm.m();
  const int n = lm.n();
  FiberInvariants r;
  const Eigen::MatrixXd& g = lm.g_values();
  const Eigen::MatrixXd d = values(lm.dphi());
  const JetVec& vj = lm.V();
  const Eigen::VectorXd v = values(vj);
  const Eigen::VectorXd th = values(lm.theta());
  const Eigen::MatrixXd y = values(lm.lifts());
  const Eigen::MatrixXd om = values(lm.Omega());
  const double l2 = lm.lambda2().value();
  const double vv_want = std::pow(l2, n - 2.0);

  r.kernel = (d * v).cwiseAbs().maxCoeff() / std::max(1.0, d.norm() * v.norm());
  r.v_norm = std::abs(v.dot(g * v) - vv_want) / std::max(1.0, vv_want);
  r.theta_v = std::abs(th.dot(v) - 1.0);
  for (int a = 0; a < n; ++a) {
    r.theta_h = std::max(r.theta_h, std::abs(th.dot(y.col(a))) / std::max(1.0, th.norm() * y.col(a).norm()));
    r.lift_system = std::max(r.lift_system, (d * y.col(a) - Eigen::VectorXd::Unit(n, a)).cwiseAbs().maxCoeff());
    const Eigen::VectorXd br = values(bracket(vj, lm.lift(a)));
    r.lift_bracket = std::max(r.lift_bracket, gnorm(g, br) / std::max(1.0, gnorm(g, v) * gnorm(g, y.col(a))));
  }
  r.omega_vertical = (om * v).cwiseAbs().maxCoeff() / std::max(1.0, om.norm() * v.norm());

  // (L_V Omega)_ij = V^k d_k Omega_ij + Omega_kj d_i V^k + Omega_ik d_j V^k
  const JetMat& oj = lm.Omega();
  Eigen::MatrixXd dv(m, m);  // dv(k, i) = d_i V^k
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i) dv(k, i) = vj[k].grad(i);
  double lie = 0.0, lie_scale = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double acc = 0.0, sc = 0.0;
      for (int k = 0; k < m; ++k) {
        const double t1 = v[k] * oj(i, j).grad(k);
        const double t2 = om(k, j) * dv(k, i) + om(i, k) * dv(k, j);
        acc += t1 + t2;
        sc += std::abs(t1) + std::abs(t2);
      }
      lie = std::max(lie, std::abs(acc));
      lie_scale = std::max(lie_scale, sc);
    }
  r.omega_lie = lie / std::max(1.0, lie_scale);

  // g = lambda^-2 phi^*h + lambda^(2n-4) theta (x) theta
  const Eigen::MatrixXd p = values(lm.pullback());
  const Eigen::MatrixXd rec = p / l2 + vv_want * th * th.transpose();
  r.reconstruction = (rec - g).cwiseAbs().maxCoeff() / std::max(1.0, g.cwiseAbs().maxCoeff());

  // (L_V g)_ij = V^k d_k g_ij + g_kj d_i V^k + g_ik d_j V^k on the horizontal frame.
  Eigen::MatrixXd lg(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int k = 0; k < m; ++k) acc += v[k] * lm.g()(i, j).grad(k) + g(k, j) * dv(k, i) + g(i, k) * dv(k, j);
      lg(i, j) = acc;
    }
  const Eigen::MatrixXd e = lm.horizontal_frame();
  r.killing_h = (e.transpose() * lg * e).cwiseAbs().maxCoeff() / std::max(1.0, gnorm(g, v));
  return r;
}

}  // namespace hmc
