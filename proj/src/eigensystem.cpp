#include "hanle/eigensystem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "hanle/errors.hpp"

namespace hanle {

namespace {

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

void normalize_phase(Eigen::Ref<CVector> v) {
  v.normalize();
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    // Prefer the earliest component among near-equal maxima.
    if (std::abs(v(i)) > best_abs * (1.0 + 1e-9)) {
      best_abs = std::abs(v(i));
      best = i;
    }
  }
  if (best_abs > 0.0) v *= std::conj(v(best)) / best_abs;
}

}  // namespace

Eigensystem decompose(const CMatrix& M, double cluster_tol) {
  const int n = static_cast<int>(M.rows());
  Eigen::ComplexEigenSolver<CMatrix> solver(M, true);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigensolver did not converge (matrix norm " +
                         std::to_string(M.norm()) + ")");
  const CVector raw_values = solver.eigenvalues();
  const CMatrix raw_vectors = solver.eigenvectors();

  DisjointSet sets(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(raw_values(i) - raw_values(j)) <= cluster_tol) sets.unite(i, j);

  std::vector<std::vector<int>> clusters;
  {
    std::vector<int> slot(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
      const int root = sets.find(i);
      if (slot[root] < 0) {
        slot[root] = static_cast<int>(clusters.size());
        clusters.emplace_back();
      }
      clusters[slot[root]].push_back(i);
    }
  }

  struct Entry {
    cplx value;
    CVector vector;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(n));
  bool defective = false;
  const double null_tol = 1e-7 * std::max(1.0, M.norm());

  for (const auto& members : clusters) {
    cplx mean(0.0);
    for (int i : members) mean += raw_values(i);
    mean /= static_cast<double>(members.size());
    const auto k = static_cast<Eigen::Index>(members.size());
    if (k == 1) {
      entries.push_back({raw_values(members[0]), raw_vectors.col(members[0])});
      continue;
    }
    const CMatrix shifted = M - mean * CMatrix::Identity(n, n);
    Eigen::JacobiSVD<CMatrix> svd(shifted, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(n - k) <= null_tol) {
      for (Eigen::Index c = 0; c < k; ++c) entries.push_back({mean, svd.matrixV().col(n - k + c)});
    } else {
      defective = true;
      for (int i : members) entries.push_back({raw_values(i), raw_vectors.col(i)});
    }
  }

  auto key = [](cplx v) {
    return std::make_pair(std::llround(std::abs(v.real()) * 1e12), std::llround(v.imag() * 1e12));
  };
  std::stable_sort(entries.begin(), entries.end(),
                   [&](const Entry& a, const Entry& b) { return key(a.value) < key(b.value); });

  Eigensystem out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.values(i) = entries[static_cast<std::size_t>(i)].value;
    out.vectors.col(i) = entries[static_cast<std::size_t>(i)].vector;
    normalize_phase(out.vectors.col(i));
  }
  out.defective = defective;
  for (int i = 0; i < n; ++i) {
    const double r = (M * out.vectors.col(i) - out.values(i) * out.vectors.col(i)).norm();
    out.max_residual = std::max(out.max_residual, r);
  }
  Eigen::JacobiSVD<CMatrix> vsvd(out.vectors);
  const auto& s = vsvd.singularValues();
  out.condition = s(n - 1) > 0.0 ? s(0) / s(n - 1) : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace hanle
