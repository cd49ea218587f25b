#pragma once

// Truncated Taylor expansions ("jets") of order 3 in d variables.
//
// A Jet3 stores the value of a scalar function at a point together with all
// partial derivatives up to third order. Mixed partials are stored once
// (i <= j <= k), so the storage for d variables is
//   1 + d + d(d+1)/2 + d(d+1)(d+2)/6
// coefficients. A jet with dim() == 0 is a constant and broadcasts against
// jets of any dimension.
//
// Each jet also carries the order up to which its coefficients are valid.
// Taking a partial derivative lowers the order by one; binary operations
// return the minimum order of their operands. Slots above order() are zero.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

namespace hmc {

inline constexpr int kJetMaxDim = 8;
inline constexpr int kJetMaxOrder = 3;

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};
template <class T>
inline constexpr bool is_complex_v = is_complex<T>::value;

/// Raised when an operation leaves the domain of a function (log of a
/// nonpositive value, division by zero, ...). The span is filled in by the
/// expression evaluator when the failing node is known.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
  DomainError(const std::string& what, std::size_t begin, std::size_t end)
      : std::runtime_error(what), has_span_(true), begin_(begin), end_(end) {}

  bool has_span() const { return has_span_; }
  std::size_t span_begin() const { return begin_; }
  std::size_t span_end() const { return end_; }

 private:
  bool has_span_ = false;
  std::size_t begin_ = 0;
  std::size_t end_ = 0;
};

enum class ArithOp { kAdd, kSub, kMul, kDiv, kPowConst, kNeg };

enum class ElementaryFn { kSin, kCos, kTan, kExp, kLog, kSqrt, kSinh, kCosh, kTanh, kAtan };

const char* to_string(ElementaryFn fn);

/// Index tables for the symmetric derivative storage of one dimension.
class JetLayout {
 public:
  struct HessSlot {
    int i, j;
  };
  struct ThirdSlot {
    int i, j, k;
    int ij, ik, jk;  // offsets of the matching second-order slots
  };

  explicit JetLayout(int dim);

  int dim() const { return dim_; }
  int size() const { return size_; }
  int grad_offset() const { return 1; }
  int hess_offset() const { return 1 + dim_; }
  int third_offset() const { return 1 + dim_ + static_cast<int>(hess_.size()); }
  int size_for_order(int order) const;

  int hess_index(int i, int j) const { return hess_index_[i * kJetMaxDim + j]; }
  int third_index(int i, int j, int k) const {
    return third_index_[(i * kJetMaxDim + j) * kJetMaxDim + k];
  }
  const std::vector<HessSlot>& hess_slots() const { return hess_; }
  const std::vector<ThirdSlot>& third_slots() const { return third_; }

 private:
  int dim_;
  int size_;
  std::vector<HessSlot> hess_;
  std::vector<ThirdSlot> third_;
  std::array<int, kJetMaxDim * kJetMaxDim> hess_index_{};
  std::array<int, kJetMaxDim * kJetMaxDim * kJetMaxDim> third_index_{};
};

/// Shared, immutable layout for `dim` in [0, kJetMaxDim].
const JetLayout& jet_layout(int dim);

namespace detail {

template <class T>
bool is_finite(const T& v) {
  if constexpr (is_complex_v<T>) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  } else {
    return std::isfinite(v);
  }
}

template <class T>
bool is_zero(const T& v) {
  return v == T(0);
}

// On the real axis the complex overloads of the standard library are not
// bit-identical to the real functions; route those inputs through the real
// function so complex and real evaluation agree exactly.
template <class T, class RealFn, class ComplexFn>
T real_axis(const T& x, RealFn real_fn, ComplexFn complex_fn) {
  if constexpr (is_complex_v<T>) {
    if (x.imag() == 0.0) return T(real_fn(x.real()));
    return complex_fn(x);
  } else {
    return real_fn(x);
  }
}

// Same, for functions whose real version is only defined for positive input.
template <class T, class RealFn, class ComplexFn>
T positive_real_axis(const T& x, RealFn real_fn, ComplexFn complex_fn) {
  if constexpr (is_complex_v<T>) {
    if (x.imag() == 0.0 && x.real() > 0.0) return T(real_fn(x.real()));
    return complex_fn(x);
  } else {
    return real_fn(x);
  }
}

template <class T>
T divide(const T& a, const T& b) {
  if constexpr (is_complex_v<T>) {
    if (a.imag() == 0.0 && b.imag() == 0.0) return T(a.real() / b.real());
  }
  return a / b;
}

inline bool is_integer(double c) { return std::floor(c) == c && std::isfinite(c); }

/// Value and first three derivatives of x -> x^c at x.
template <class T>
std::array<T, 4> pow_taylor(const T& x, double c) {
  const bool integral = is_integer(c);
  if constexpr (!is_complex_v<T>) {
    if (!integral && !(x > 0.0)) {
      throw DomainError("pow: non-integer exponent requires a positive base");
    }
  }
  if (integral && c < 0.0 && is_zero(x)) throw DomainError("pow: zero base with negative exponent");
  if (!integral && is_zero(x)) throw DomainError("pow: zero base with non-integer exponent");

  std::array<T, 4> out{};
  double coeff = 1.0;
  for (int k = 0; k < 4; ++k) {
    if (coeff == 0.0) {
      out[k] = T(0);
    } else {
      const double e = c - k;
      T p;
      if constexpr (is_complex_v<T>) {
        p = (x.imag() == 0.0 && (integral || x.real() > 0.0)) ? T(std::pow(x.real(), e))
                                                              : std::pow(x, T(e));
      } else {
        p = std::pow(x, e);
      }
      out[k] = T(coeff) * p;
    }
    coeff *= (c - k);
  }
  return out;
}

/// Value and first three derivatives of fn at x.
template <class T>
std::array<T, 4> elementary_taylor(ElementaryFn fn, const T& x) {
  const T one(1);
  switch (fn) {
    case ElementaryFn::kSin: {
      const T s = real_axis(x, [](double v) { return std::sin(v); }, [](const T& z) { return std::sin(z); });
      const T c = real_axis(x, [](double v) { return std::cos(v); }, [](const T& z) { return std::cos(z); });
      return {s, c, -s, -c};
    }
    case ElementaryFn::kCos: {
      const T s = real_axis(x, [](double v) { return std::sin(v); }, [](const T& z) { return std::sin(z); });
      const T c = real_axis(x, [](double v) { return std::cos(v); }, [](const T& z) { return std::cos(z); });
      return {c, -s, -c, s};
    }
    case ElementaryFn::kTan: {
      const T t = real_axis(x, [](double v) { return std::tan(v); }, [](const T& z) { return std::tan(z); });
      const T sec2 = one + t * t;
      return {t, sec2, T(2) * t * sec2, sec2 * (T(2) + T(6) * t * t)};
    }
    case ElementaryFn::kExp: {
      const T e = real_axis(x, [](double v) { return std::exp(v); }, [](const T& z) { return std::exp(z); });
      return {e, e, e, e};
    }
    case ElementaryFn::kLog: {
      if constexpr (!is_complex_v<T>) {
        if (!(x > 0.0)) throw DomainError("log: argument must be positive");
      } else {
        if (is_zero(x)) throw DomainError("log: argument must be nonzero");
      }
      const T l = positive_real_axis(x, [](double v) { return std::log(v); },
                                     [](const T& z) { return std::log(z); });
      const T r = divide(one, x);
      return {l, r, -r * r, T(2) * r * r * r};
    }
    case ElementaryFn::kSqrt: {
      if constexpr (!is_complex_v<T>) {
        if (!(x > 0.0)) throw DomainError("sqrt: argument must be positive");
      } else {
        if (is_zero(x)) throw DomainError("sqrt: argument must be nonzero");
      }
      const T s = positive_real_axis(x, [](double v) { return std::sqrt(v); },
                                     [](const T& z) { return std::sqrt(z); });
      const T r = divide(one, s);
      return {s, T(0.5) * r, T(-0.25) * r * r * r, T(0.375) * r * r * r * r * r};
    }
    case ElementaryFn::kSinh: {
      const T s = real_axis(x, [](double v) { return std::sinh(v); }, [](const T& z) { return std::sinh(z); });
      const T c = real_axis(x, [](double v) { return std::cosh(v); }, [](const T& z) { return std::cosh(z); });
      return {s, c, s, c};
    }
    case ElementaryFn::kCosh: {
      const T s = real_axis(x, [](double v) { return std::sinh(v); }, [](const T& z) { return std::sinh(z); });
      const T c = real_axis(x, [](double v) { return std::cosh(v); }, [](const T& z) { return std::cosh(z); });
      return {c, s, c, s};
    }
    case ElementaryFn::kTanh: {
      const T t = real_axis(x, [](double v) { return std::tanh(v); }, [](const T& z) { return std::tanh(z); });
      const T sech2 = one - t * t;
      return {t, sech2, T(-2) * t * sech2, sech2 * (T(-2) + T(6) * t * t)};
    }
    case ElementaryFn::kAtan: {
      const T a = real_axis(x, [](double v) { return std::atan(v); }, [](const T& z) { return std::atan(z); });
      const T q = divide(one, one + x * x);
      return {a, q, T(-2) * x * q * q, (T(6) * x * x - T(2)) * q * q * q};
    }
  }
  throw DomainError("unknown elementary function");
}

}  // namespace detail

template <class T>
class Jet3 {
 public:
  using Scalar = T;
  using Coeffs = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  /// The constant zero.
  Jet3() : c_(Coeffs::Zero(1)) {}
  /// A constant; broadcasts against jets of any dimension.
  Jet3(const T& value) : c_(Coeffs::Constant(1, value)) {}  // NOLINT(google-explicit-constructor)
  template <class U, class = std::enable_if_t<std::is_arithmetic_v<U> && !std::is_same_v<U, T>>>
  Jet3(U value) : Jet3(T(static_cast<double>(value))) {}  // NOLINT(google-explicit-constructor)

  /// Constant `value` with explicit dimension (derivatives stored as zeros).
  static Jet3 constant(int dim, const T& value) {
    check_dim(dim);
    Jet3 j;
    j.dim_ = dim;
    j.c_ = Coeffs::Zero(jet_layout(dim).size());
    j.c_[0] = value;
    return j;
  }

  /// The coordinate function x_index, expanded at `point`.
  template <class Vec>
  static Jet3 coordinate(const Vec& point, int index) {
    const int dim = static_cast<int>(point.size());
    if (index < 0 || index >= dim) {
      throw std::out_of_range("jet coordinate index " + std::to_string(index) +
                              " outside [0, " + std::to_string(dim) + ")");
    }
    Jet3 j = constant(dim, T(point[index]));
    j.c_[1 + index] = T(1);
    return j;
  }

  /// Builds a jet from explicit derivative arrays; used by tests and by
  /// code that assembles jets on another chart. Only slots i <= j <= k
  /// are read.
  static Jet3 from_derivatives(int dim, int order, const T& value, const std::vector<T>& grad,
                               const std::vector<T>& hess, const std::vector<T>& third) {
    Jet3 j = constant(dim, value);
    j.order_ = order;
    const JetLayout& L = jet_layout(dim);
    if (order >= 1)
      for (int i = 0; i < dim; ++i) j.c_[1 + i] = grad.at(i);
    if (order >= 2)
      for (const auto& s : L.hess_slots())
        j.c_[L.hess_index(s.i, s.j)] = hess.at(s.i * dim + s.j);
    if (order >= 3)
      for (const auto& s : L.third_slots())
        j.c_[L.third_index(s.i, s.j, s.k)] = third.at((s.i * dim + s.j) * dim + s.k);
    return j;
  }

  int dim() const { return dim_; }
  int order() const { return order_; }
  bool is_constant() const { return dim_ == 0; }

  const T& value() const { return c_[0]; }
  T grad(int i) const { return dim_ == 0 ? T(0) : c_[1 + i]; }
  T hess(int i, int j) const { return dim_ == 0 ? T(0) : c_[jet_layout(dim_).hess_index(i, j)]; }
  T third(int i, int j, int k) const {
    return dim_ == 0 ? T(0) : c_[jet_layout(dim_).third_index(i, j, k)];
  }
  const Coeffs& coeffs() const { return c_; }

  /// Lowers the valid order, zeroing the dropped slots.
  Jet3 truncated(int order) const {
    Jet3 r = *this;
    r.truncate_in_place(std::min(order, order_));
    return r;
  }

  /// d/dx_i as a jet of one lower order.
  Jet3 partial(int i) const {
    if (dim_ == 0) return Jet3();
    if (i < 0 || i >= dim_) throw std::out_of_range("jet partial index out of range");
    if (order_ < 1) throw std::logic_error("jet partial: order exhausted");
    const JetLayout& L = jet_layout(dim_);
    Jet3 r = constant(dim_, c_[1 + i]);
    r.order_ = order_ - 1;
    if (r.order_ >= 1)
      for (int j = 0; j < dim_; ++j) r.c_[1 + j] = c_[L.hess_index(i, j)];
    if (r.order_ >= 2)
      for (const auto& s : L.hess_slots())
        r.c_[L.hess_index(s.i, s.j)] = c_[L.third_index(i, s.i, s.j)];
    return r;
  }

  /// Promotes a real jet into the complex field.
  template <class U = T, class = std::enable_if_t<!is_complex_v<U>>>
  Jet3<std::complex<U>> to_complex() const {
    Jet3<std::complex<U>> r;
    r.dim_ = dim_;
    r.order_ = order_;
    r.c_ = c_.template cast<std::complex<U>>();
    return r;
  }

  bool all_finite() const {
    for (Eigen::Index k = 0; k < c_.size(); ++k)
      if (!detail::is_finite(c_[k])) return false;
    return true;
  }

  // -- arithmetic ----------------------------------------------------------

  friend Jet3 operator+(const Jet3& a, const Jet3& b) {
    if (b.dim_ == 0) {
      Jet3 r = a;
      r.c_[0] += b.c_[0];
      return r;
    }
    if (a.dim_ == 0) return b + a;
    check_same(a, b);
    Jet3 r = a;
    r.c_ += b.c_;
    r.truncate_in_place(std::min(a.order_, b.order_));
    return r;
  }
  friend Jet3 operator-(const Jet3& a) {
    Jet3 r = a;
    r.c_ = -r.c_;
    return r;
  }
  friend Jet3 operator-(const Jet3& a, const Jet3& b) { return a + (-b); }
  friend Jet3 operator*(const Jet3& a, const Jet3& b) {
    if (b.dim_ == 0) {
      Jet3 r = a;
      r.c_ *= b.c_[0];
      return r;
    }
    if (a.dim_ == 0) return b * a;
    check_same(a, b);
    return multiply(a, b);
  }
  friend Jet3 operator/(const Jet3& a, const Jet3& b) {
    if (detail::is_zero(b.value())) throw DomainError("division by zero");
    if (b.dim_ == 0) {
      Jet3 r = a;
      const T inv = detail::divide(T(1), b.c_[0]);
      r.c_ *= inv;
      r.c_[0] = detail::divide(a.c_[0], b.c_[0]);
      return r;
    }
    Jet3 r = a * compose(b, reciprocal_taylor(b.value()));
    r.c_[0] = detail::divide(a.value(), b.value());
    r.check_finite("division");
    return r;
  }
  Jet3& operator+=(const Jet3& o) { return *this = *this + o; }
  Jet3& operator-=(const Jet3& o) { return *this = *this - o; }
  Jet3& operator*=(const Jet3& o) { return *this = *this * o; }
  Jet3& operator/=(const Jet3& o) { return *this = *this / o; }

  friend bool operator==(const Jet3& a, const Jet3& b) {
    return a.dim_ == b.dim_ && a.order_ == b.order_ && a.c_ == b.c_;
  }

  /// f(a) given the Taylor coefficients f, f', f'', f''' of f at a.value().
  static Jet3 compose(const Jet3& a, const std::array<T, 4>& f) {
    Jet3 r = a;
    r.c_[0] = f[0];
    if (a.dim_ == 0) return r;
    const JetLayout& L = jet_layout(a.dim_);
    const T* x = a.c_.data();
    T* y = r.c_.data();
    const int d = a.dim_;
    if (a.order_ >= 1)
      for (int i = 0; i < d; ++i) y[1 + i] = f[1] * x[1 + i];
    if (a.order_ >= 2) {
      int s = L.hess_offset();
      for (const auto& h : L.hess_slots()) {
        y[s] = f[2] * x[1 + h.i] * x[1 + h.j] + f[1] * x[s];
        ++s;
      }
    }
    if (a.order_ >= 3) {
      int s = L.third_offset();
      for (const auto& t : L.third_slots()) {
        const T xi = x[1 + t.i], xj = x[1 + t.j], xk = x[1 + t.k];
        y[s] = f[3] * xi * xj * xk + f[2] * (x[t.ij] * xk + x[t.ik] * xj + x[t.jk] * xi) +
               f[1] * x[s];
        ++s;
      }
    }
    return r;
  }

 private:
  template <class U>
  friend class Jet3;

  static void check_dim(int dim) {
    if (dim < 0 || dim > kJetMaxDim) throw std::invalid_argument("jet dimension out of range");
  }
  static void check_same(const Jet3& a, const Jet3& b) {
    if (a.dim_ != b.dim_) throw std::invalid_argument("jet dimension mismatch");
  }
  static std::array<T, 4> reciprocal_taylor(const T& b) {
    const T r = detail::divide(T(1), b);
    return {r, -r * r, T(2) * r * r * r, T(-6) * r * r * r * r};
  }

  void check_finite(const char* what) const {
    if (!all_finite()) throw DomainError(std::string(what) + ": non-finite result");
  }

  void truncate_in_place(int order) {
    order_ = order;
    if (dim_ == 0) return;
    const int keep = jet_layout(dim_).size_for_order(order);
    c_.tail(c_.size() - keep).setZero();
  }

  static Jet3 multiply(const Jet3& a, const Jet3& b) {
    const int d = a.dim_;
    const JetLayout& L = jet_layout(d);
    Jet3 r;
    r.dim_ = d;
    r.order_ = std::min(a.order_, b.order_);
    r.c_ = Coeffs::Zero(L.size());
    const T* x = a.c_.data();
    const T* z = b.c_.data();
    T* y = r.c_.data();
    const T x0 = x[0], z0 = z[0];
    y[0] = x0 * z0;
    if (r.order_ >= 1)
      for (int i = 0; i < d; ++i) y[1 + i] = x0 * z[1 + i] + x[1 + i] * z0;
    if (r.order_ >= 2) {
      int s = L.hess_offset();
      for (const auto& h : L.hess_slots()) {
        y[s] = x0 * z[s] + x[s] * z0 + x[1 + h.i] * z[1 + h.j] + x[1 + h.j] * z[1 + h.i];
        ++s;
      }
    }
    if (r.order_ >= 3) {
      int s = L.third_offset();
      for (const auto& t : L.third_slots()) {
        y[s] = x0 * z[s] + x[s] * z0 + x[t.ij] * z[1 + t.k] + x[t.ik] * z[1 + t.j] +
               x[t.jk] * z[1 + t.i] + x[1 + t.i] * z[t.jk] + x[1 + t.j] * z[t.ik] +
               x[1 + t.k] * z[t.ij];
        ++s;
      }
    }
    return r;
  }

  int dim_ = 0;
  int order_ = kJetMaxOrder;
  Coeffs c_;
};

using Jet = Jet3<double>;
using CJet = Jet3<std::complex<double>>;

// -- elementary functions (the arithmetic contract shared by every scalar
//    type the expression evaluator accepts) -------------------------------

template <class T>
Jet3<T> apply(ElementaryFn fn, const Jet3<T>& a) {
  Jet3<T> r = Jet3<T>::compose(a, detail::elementary_taylor(fn, a.value()));
  if (!r.all_finite()) throw DomainError(std::string(to_string(fn)) + ": non-finite result");
  return r;
}

inline double apply(ElementaryFn fn, double a) {
  const double v = detail::elementary_taylor(fn, a)[0];
  if (!std::isfinite(v)) throw DomainError(std::string(to_string(fn)) + ": non-finite result");
  return v;
}

inline std::complex<double> apply(ElementaryFn fn, const std::complex<double>& a) {
  return detail::elementary_taylor(fn, a)[0];
}

template <class T>
Jet3<T> pow_const(const Jet3<T>& a, double exponent) {
  Jet3<T> r = Jet3<T>::compose(a, detail::pow_taylor(a.value(), exponent));
  if (!r.all_finite()) throw DomainError("pow: non-finite result");
  return r;
}

inline double pow_const(double a, double exponent) {
  return detail::pow_taylor(a, exponent)[0];
}

inline std::complex<double> pow_const(const std::complex<double>& a, double exponent) {
  return detail::pow_taylor(a, exponent)[0];
}

inline double divide(double a, double b) {
  if (b == 0.0) throw DomainError("division by zero");
  return a / b;
}

inline std::complex<double> divide(const std::complex<double>& a, const std::complex<double>& b) {
  if (b == std::complex<double>(0.0)) throw DomainError("division by zero");
  return detail::divide(a, b);
}

template <class T>
Jet3<T> divide(const Jet3<T>& a, const Jet3<T>& b) {
  return a / b;
}

/// The `jet_arith` contract in one entry point. `b` is ignored for kNeg;
/// for kPowConst only its value is used and it must be a constant jet.
template <class T>
Jet3<T> jet_arith(ArithOp op, const Jet3<T>& a, const Jet3<T>& b) {
  switch (op) {
    case ArithOp::kAdd: return a + b;
    case ArithOp::kSub: return a - b;
    case ArithOp::kMul: return a * b;
    case ArithOp::kDiv: return a / b;
    case ArithOp::kNeg: return -a;
    case ArithOp::kPowConst:
      if (!b.is_constant()) throw std::invalid_argument("pow exponent must be a constant");
      if constexpr (is_complex_v<T>) {
        if (b.value().imag() != 0.0) throw std::invalid_argument("pow exponent must be real");
        return pow_const(a, b.value().real());
      } else {
        return pow_const(a, b.value());
      }
  }
  throw std::invalid_argument("unknown arithmetic op");
}

template <class T>
Jet3<T> jet_elementary(ElementaryFn fn, const Jet3<T>& a) {
  return hmc::apply(fn, a);
}

template <class T>
Jet3<T> sqrt(const Jet3<T>& a) {
  return hmc::apply(ElementaryFn::kSqrt, a);
}
template <class T>
Jet3<T> log(const Jet3<T>& a) {
  return hmc::apply(ElementaryFn::kLog, a);
}
template <class T>
Jet3<T> exp(const Jet3<T>& a) {
  return hmc::apply(ElementaryFn::kExp, a);
}

/// Directional derivative sum_i v_i * d/dx_i f, as a jet.
template <class T, class Vec>
Jet3<T> directional(const Vec& v, const Jet3<T>& f) {
  Jet3<T> acc(T(0));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(v.size()); ++i) acc += v[i] * f.partial(static_cast<int>(i));
  return acc;
}

}  // namespace hmc

namespace Eigen {

template <class T>
struct NumTraits<hmc::Jet3<T>> : GenericNumTraits<T> {
  using Real = hmc::Jet3<typename NumTraits<T>::Real>;
  using NonInteger = hmc::Jet3<T>;
  using Nested = hmc::Jet3<T>;
  using Literal = hmc::Jet3<T>;
  enum {
    IsComplex = NumTraits<T>::IsComplex,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 8,
    AddCost = 32,
    MulCost = 128
  };
  static inline Real epsilon() { return Real(NumTraits<typename NumTraits<T>::Real>::epsilon()); }
  static inline Real dummy_precision() { return Real(1e-12); }
  static inline int digits10() { return NumTraits<T>::digits10(); }
};

}  // namespace Eigen
