// Shared helpers for the test executables.

#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hanle/liouvillian.hpp"

namespace hanle::testing {

inline const std::vector<double>& figure_intensities() {
  static const std::vector<double> v{2e-3, 6e-3, 0.02, 0.06, 2.0};
  return v;
}

inline TransitionSpec reference(bool eia, double intensity) {
  TransitionSpec s = eia ? TransitionSpec::eia() : TransitionSpec::eit();
  return s.with_intensity(intensity);
}

// Random unit-trace Hermitian positive state.
inline CMatrix random_density(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  CMatrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

inline CMatrix random_matrix(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  return a;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace hanle::testing
