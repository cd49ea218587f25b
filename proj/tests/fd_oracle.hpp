#pragma once

// Finite-difference oracle shared by the tests: nested central differences
// with one Richardson step. Independent of the jet code; it only ever calls
// the function being differentiated at plain double points.

#include <functional>

#include <Eigen/Core>

namespace hmc::testing {

using ScalarField = std::function<double(const Eigen::VectorXd&)>;

struct FdDerivatives {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  std::vector<double> third;  // (i*n + j)*n + k
};

inline double central_first(const ScalarField& f, Eigen::VectorXd x, int i, double h) {
  x[i] += h;
  const double fp = f(x);
  x[i] -= 2 * h;
  const double fm = f(x);
  return (fp - fm) / (2 * h);
}

inline double central_second(const ScalarField& f, const Eigen::VectorXd& x, int i, int j, double h) {
  auto g = [&](const Eigen::VectorXd& y) { return central_first(f, y, j, h); };
  return central_first(g, x, i, h);
}

inline double central_third(const ScalarField& f, const Eigen::VectorXd& x, int i, int j, int k, double h) {
  auto g = [&](const Eigen::VectorXd& y) { return central_second(f, y, j, k, h); };
  return central_first(g, x, i, h);
}

template <class D>
double richardson(D d, double h) {
  return (4.0 * d(h / 2) - d(h)) / 3.0;
}

inline FdDerivatives fd_derivatives(const ScalarField& f, const Eigen::VectorXd& x, int order = 3) {
  const int n = static_cast<int>(x.size());
  FdDerivatives r;
  r.value = f(x);
  r.grad = Eigen::VectorXd::Zero(n);
  r.hess = Eigen::MatrixXd::Zero(n, n);
  r.third.assign(static_cast<std::size_t>(n * n * n), 0.0);
  for (int i = 0; i < n; ++i) r.grad[i] = richardson([&](double h) { return central_first(f, x, i, h); }, 1e-5);
  if (order < 2) return r;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      r.hess(i, j) = richardson([&](double h) { return central_second(f, x, i, j, h); }, 1e-4);
  if (order < 3) return r;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        r.third[static_cast<std::size_t>((i * n + j) * n + k)] =
            richardson([&](double h) { return central_third(f, x, i, j, k, h); }, 1e-3);
  return r;
}

}  // namespace hmc::testing
