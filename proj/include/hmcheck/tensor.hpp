#pragma once

// Dense containers for the pointwise tensors of the curvature stack, and
// jet-valued linear algebra (solve, inverse, minors) carried out entirely in
// jet arithmetic so every result keeps its derivatives.

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "hmcheck/jet.hpp"

namespace hmc {

template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

using JetVec = Vec<Jet>;
using JetMat = Mat<Jet>;

/// Rank-3 array with every index ranging over [0, n).
template <class T>
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n, const T& fill = T(0)) : n_(n), data_(static_cast<std::size_t>(n * n * n), fill) {}

  int dim() const { return n_; }
  T& operator()(int a, int b, int c) { return data_[static_cast<std::size_t>((a * n_ + b) * n_ + c)]; }
  const T& operator()(int a, int b, int c) const {
    return data_[static_cast<std::size_t>((a * n_ + b) * n_ + c)];
  }

 private:
  int n_ = 0;
  std::vector<T> data_;
};

/// Rank-4 array of doubles with every index ranging over [0, n).
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n) : n_(n), data_(Eigen::VectorXd::Zero(n * n * n * n)) {}

  int dim() const { return n_; }
  double& operator()(int a, int b, int c, int d) { return data_[((a * n_ + b) * n_ + c) * n_ + d]; }
  double operator()(int a, int b, int c, int d) const { return data_[((a * n_ + b) * n_ + c) * n_ + d]; }
  const Eigen::VectorXd& data() const { return data_; }
  Eigen::VectorXd& data() { return data_; }

  double max_abs() const { return n_ == 0 ? 0.0 : data_.cwiseAbs().maxCoeff(); }

  friend Tensor4 operator-(const Tensor4& a, const Tensor4& b) {
    Tensor4 r(a.n_);
    r.data_ = a.data_ - b.data_;
    return r;
  }
  friend Tensor4 operator+(const Tensor4& a, const Tensor4& b) {
    Tensor4 r(a.n_);
    r.data_ = a.data_ + b.data_;
    return r;
  }
  friend Tensor4 operator*(double s, const Tensor4& a) {
    Tensor4 r(a.n_);
    r.data_ = s * a.data_;
    return r;
  }

  /// T(X, Y, Z, W) for vectors over any field (complex arguments give the
  /// complex-bilinear extension).
  template <class V>
  typename V::Scalar contract(const V& x, const V& y, const V& z, const V& w) const {
    using S = typename V::Scalar;
    S acc(0);
    for (int a = 0; a < n_; ++a) {
      if (x[a] == S(0)) continue;
      for (int b = 0; b < n_; ++b) {
        if (y[b] == S(0)) continue;
        const S xy = x[a] * y[b];
        for (int c = 0; c < n_; ++c) {
          if (z[c] == S(0)) continue;
          S inner(0);
          for (int d = 0; d < n_; ++d) inner += (*this)(a, b, c, d) * w[d];
          acc += xy * z[c] * inner;
        }
      }
    }
    return acc;
  }

  /// Components in the frame whose vectors are the columns of `frame`.
  Tensor4 in_frame(const Eigen::MatrixXd& frame) const;

 private:
  int n_ = 0;
  Eigen::VectorXd data_;
};

Mat<double> values(const JetMat& m);
Vec<double> values(const JetVec& v);

/// Solves A X = B in jet arithmetic (Gauss-Jordan, pivoting on the value
/// part). Throws std::domain_error when A is singular at the point.
JetMat solve(const JetMat& a, const JetMat& b);
JetMat inverse(const JetMat& a);

/// All maximal minors of an r x c matrix (r <= c): the entry for a column
/// subset S (bitmask with r bits set) is det(A restricted to columns S).
/// Computed by cofactor recursion over column subsets, so it is exact in
/// jet arithmetic even where the minor's value vanishes.
std::vector<Jet> maximal_minors(const JetMat& a);

Jet determinant(const JetMat& a);

}  // namespace hmc
