// Angular-momentum algebra for a degenerate two-level atom.
//
// Basis contract (shared by every matrix in the library): the ground
// multiplet comes first with m ascending, followed by the excited multiplet
// with m ascending. For Fg=1 -> Fe=0 the order is |g,-1>, |g,0>, |g,+1>, |e,0>.

#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hanle {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Matrix over the documented ground-then-excited basis.
using OperatorMatrix = CMatrix;

/// Angular momentum quantum number, stored as 2F so half-integers are exact.
class AngMom {
 public:
  constexpr AngMom() = default;
  /// Throws std::invalid_argument unless 2F is a non-negative integer.
  explicit AngMom(double f);

  static AngMom from_twice(int twice_f);

  int twice() const { return twice_f_; }
  double value() const { return 0.5 * twice_f_; }
  int multiplicity() const { return twice_f_ + 1; }

  /// 2m for m = -F, -F+1, ..., +F.
  std::vector<int> twice_projections() const;

  friend bool operator==(AngMom, AngMom) = default;

 private:
  int twice_f_ = 0;
};

/// Wigner 3-j symbol (j1 j2 j3; m1 m2 m3) from the Racah sum, evaluated in
/// exact rational arithmetic and converted to double at the end. Returns 0
/// when any selection rule fails, including m values that are not of the
/// same parity as their j.
double wigner3j(AngMom j1, AngMom j2, AngMom j3, double m1, double m2, double m3);

/// Same, with every projection given as 2m.
double wigner3j_twice(AngMom j1, AngMom j2, AngMom j3, int tm1, int tm2, int tm3);

/// Index map for the ground-then-excited basis.
class LevelBasis {
 public:
  LevelBasis(AngMom fg, AngMom fe);

  AngMom fg() const { return fg_; }
  AngMom fe() const { return fe_; }
  int ground_count() const { return fg_.multiplicity(); }
  int excited_count() const { return fe_.multiplicity(); }
  int size() const { return ground_count() + excited_count(); }

  int ground_index(int twice_m) const;
  int excited_index(int twice_m) const;
  bool is_excited(int index) const { return index >= ground_count(); }
  /// Projection m of basis state `index`.
  double projection(int index) const;

 private:
  AngMom fg_;
  AngMom fe_;
};

/// Normalized dipole component Q_ge^q: nonzero only for ground rows and
/// excited columns with m_g = m_e + q. Elements carry the Condon-Shortley
/// phase (-1)^(Fg-m_g) (Fg 1 Fe; -m_g q m_e), which makes
/// (2Fe+1) sum_q Q_eg^q Q_ge^q = P_e hold exactly with Q_eg^q = (Q_ge^q)^dagger.
/// Throws std::invalid_argument when |Fg-Fe| > 1, Fg=Fe=0, or |q| > 1.
OperatorMatrix q_matrix(AngMom fg, AngMom fe, int q);

/// Diagonal F_z over the full basis.
OperatorMatrix fz_matrix(AngMom fg, AngMom fe);

struct Projectors {
  OperatorMatrix ground;
  OperatorMatrix excited;
};
Projectors projectors(AngMom fg, AngMom fe);

/// Unit polarization vector in the spherical basis, components ordered
/// (e_{-1}, e_0, e_{+1}) with e_{+-1} = -+(x +- iy)/sqrt(2). The quantization
/// (magnetic field) axis is z.
class Polarization {
 public:
  enum class Kind { linear_x, linear_y, sigma_plus, sigma_minus, general };

  static Polarization linear_x();
  static Polarization linear_y();
  static Polarization sigma_plus();
  static Polarization sigma_minus();
  /// Throws std::invalid_argument unless the vector has unit norm (1e-12).
  static Polarization general(const std::array<cplx, 3>& spherical);
  /// Accepts "linear-x", "linear-y", "sigma+", "sigma-".
  static Polarization from_name(const std::string& name);

  Kind kind() const { return kind_; }
  std::string name() const;
  /// Component e_q for q in {-1, 0, +1}.
  cplx component(int q) const { return comps_[static_cast<std::size_t>(q + 1)]; }
  const std::array<cplx, 3>& components() const { return comps_; }

 private:
  Polarization(Kind kind, std::array<cplx, 3> comps) : kind_(kind), comps_(comps) {}
  Kind kind_;
  std::array<cplx, 3> comps_;
};

}  // namespace hanle
