#include "hmcheck/jet.hpp"

#include <memory>
#include <vector>

namespace hmc {

const char* to_string(ElementaryFn fn) {
  switch (fn) {
    case ElementaryFn::kSin: return "sin";
    case ElementaryFn::kCos: return "cos";
    case ElementaryFn::kTan: return "tan";
    case ElementaryFn::kExp: return "exp";
    case ElementaryFn::kLog: return "log";
    case ElementaryFn::kSqrt: return "sqrt";
    case ElementaryFn::kSinh: return "sinh";
    case ElementaryFn::kCosh: return "cosh";
    case ElementaryFn::kTanh: return "tanh";
    case ElementaryFn::kAtan: return "atan";
  }
  return "?";
}

JetLayout::JetLayout(int dim) : dim_(dim) {
  hess_index_.fill(-1);
  third_index_.fill(-1);
  int next = 1 + dim;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      hess_.push_back({i, j});
      hess_index_[i * kJetMaxDim + j] = next;
      hess_index_[j * kJetMaxDim + i] = next;
      ++next;
    }
  }
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      for (int k = j; k < dim; ++k) {
        third_.push_back({i, j, k, hess_index(i, j), hess_index(i, k), hess_index(j, k)});
        const int perms[6][3] = {{i, j, k}, {i, k, j}, {j, i, k}, {j, k, i}, {k, i, j}, {k, j, i}};
        for (const auto& p : perms) third_index_[(p[0] * kJetMaxDim + p[1]) * kJetMaxDim + p[2]] = next;
        ++next;
      }
    }
  }
  size_ = next;
}

int JetLayout::size_for_order(int order) const {
  switch (order) {
    case 0: return 1;
    case 1: return 1 + dim_;
    case 2: return third_offset();
    default: return size_;
  }
}

const JetLayout& jet_layout(int dim) {
  static const std::vector<std::unique_ptr<JetLayout>> layouts = [] {
    std::vector<std::unique_ptr<JetLayout>> v;
    for (int d = 0; d <= kJetMaxDim; ++d) v.push_back(std::make_unique<JetLayout>(d));
    return v;
  }();
  return *layouts.at(dim);
}

}  // namespace hmc
