// Dense eigen-decomposition of a (non-Hermitian) Liouvillian.

#pragma once

#include <vector>

#include "hanle/angular.hpp"

namespace hanle {

struct Eigensystem {
  CVector values;
  /// Columns are unit-norm right eigenvectors, ordered like `values`.
  CMatrix vectors;
  /// Degenerate clusters whose geometric multiplicity fell short of the
  /// algebraic one (Jordan blocks); vectors there are unreliable.
  bool defective = false;
  /// 2-norm condition number of `vectors`.
  double condition = 0.0;
  /// max_i ||M v_i - lambda_i v_i||.
  double max_residual = 0.0;
};

/// Eigenvalues sorted by (|Re|, Im) ascending. Eigenvalues closer than
/// `cluster_tol` are treated as one degenerate eigenvalue and their
/// eigenspace is re-spanned by an orthonormal null-space basis of
/// (M - mu I), which keeps the eigenvector matrix well conditioned.
/// Throws NumericalError if the eigensolver fails.
Eigensystem decompose(const CMatrix& M, double cluster_tol = 1e-9);

}  // namespace hanle
