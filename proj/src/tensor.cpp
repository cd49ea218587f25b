#include "hmcheck/tensor.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace hmc {

Tensor4 Tensor4::in_frame(const Eigen::MatrixXd& frame) const {
  const int n = n_;
  const int k = static_cast<int>(frame.cols());
  // One index at a time: O(n^4 k) rather than O(n^4 k^4).
  Eigen::VectorXd cur = data_;
  std::array<int, 4> dims{n, n, n, n};
  for (int slot = 0; slot < 4; ++slot) {
    std::array<int, 4> out_dims = dims;
    out_dims[slot] = k;
    Eigen::VectorXd next = Eigen::VectorXd::Zero(out_dims[0] * out_dims[1] * out_dims[2] * out_dims[3]);
    for (int a = 0; a < out_dims[0]; ++a)
      for (int b = 0; b < out_dims[1]; ++b)
        for (int c = 0; c < out_dims[2]; ++c)
          for (int d = 0; d < out_dims[3]; ++d) {
            std::array<int, 4> idx{a, b, c, d};
            const int e = idx[slot];
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
              idx[slot] = i;
              acc += frame(i, e) *
                     cur[((idx[0] * dims[1] + idx[1]) * dims[2] + idx[2]) * dims[3] + idx[3]];
            }
            next[((a * out_dims[1] + b) * out_dims[2] + c) * out_dims[3] + d] = acc;
          }
    cur = std::move(next);
    dims = out_dims;
  }
  Tensor4 r(k);
  r.data_ = cur;
  return r;
}

Mat<double> values(const JetMat& m) {
  Mat<double> out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).value();
  return out;
}

Vec<double> values(const JetVec& v) {
  Vec<double> out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v[i].value();
  return out;
}

JetMat solve(const JetMat& a, const JetMat& b) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n) throw std::invalid_argument("solve: shape mismatch");
  JetMat m = a;
  JetMat x = b;
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) scale = std::max(scale, std::abs(m(i, j).value()));
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index piv = col;
    for (Eigen::Index r = col + 1; r < n; ++r)
      if (std::abs(m(r, col).value()) > std::abs(m(piv, col).value())) piv = r;
    if (!(std::abs(m(piv, col).value()) > 1e-14 * std::max(scale, 1e-300)))
      throw std::domain_error("solve: matrix is singular at the point");
    if (piv != col) {
      m.row(piv).swap(m.row(col));
      x.row(piv).swap(x.row(col));
    }
    const Jet inv_p = Jet(1.0) / m(col, col);
    for (Eigen::Index j = col; j < n; ++j) m(col, j) = m(col, j) * inv_p;
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(col, j) = x(col, j) * inv_p;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == col) continue;
      const Jet f = m(r, col);
      if (f.is_constant() && f.value() == 0.0) continue;
      for (Eigen::Index j = col; j < n; ++j) m(r, j) = m(r, j) - f * m(col, j);
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(r, j) = x(r, j) - f * x(col, j);
    }
  }
  return x;
}

JetMat inverse(const JetMat& a) {
  const Eigen::Index n = a.rows();
  JetMat id(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) id(i, j) = Jet(i == j ? 1.0 : 0.0);
  return solve(a, id);
}

std::vector<Jet> maximal_minors(const JetMat& a) {
  const int rows = static_cast<int>(a.rows());
  const int cols = static_cast<int>(a.cols());
  if (rows > cols || cols > 16) throw std::invalid_argument("maximal_minors: unsupported shape");
  // det(rows 0..|S|-1, columns S), built up by expanding along the last row.
  std::vector<Jet> minor(std::size_t{1} << cols, Jet(0.0));
  minor[0] = Jet(1.0);
  for (unsigned s = 1; s < (1u << cols); ++s) {
    const int k = std::popcount(s);
    if (k > rows) continue;
    const int row = k - 1;
    Jet acc(0.0);
    int position = 0;  // column position of c within S
    for (int c = 0; c < cols; ++c) {
      if (!(s & (1u << c))) continue;
      const Jet& sub = minor[s & ~(1u << c)];
      // Cofactor sign for deleting row `row` (last) and column position.
      const bool negative = ((row + position) % 2) == 1;
      const Jet term = a(row, c) * sub;
      acc = negative ? acc - term : acc + term;
      ++position;
    }
    minor[s] = acc;
  }
  return minor;
}

Jet determinant(const JetMat& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("determinant: matrix not square");
  const int n = static_cast<int>(a.rows());
  return maximal_minors(a)[(std::size_t{1} << n) - 1];
}

}  // namespace hmc
