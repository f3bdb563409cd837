// Bloch superoperator for a Zeeman-degenerate Fg -> Fe transition.
//
// Units: Gamma = hbar = 1. The magnetic field only enters through the
// products beta_g * B and beta_e * B.
//
// Density matrices are vectorized row-major over the ground-then-excited
// basis: y[i * N + j] = sigma(i, j).

#pragma once

#include <optional>
#include <string>

#include "hanle/angular.hpp"

namespace hanle {

/// How an intensity on the Omega^2/Gamma^2 axis maps to the Rabi frequency
/// that multiplies Q in the Hamiltonian. Q itself is always normalized by the
/// decay sum rule. With clebsch_gordan the intensity is the squared Rabi
/// frequency referred to a reduced element whose matrix elements are plain
/// Clebsch-Gordan coefficients, so Omega^2 = (2Fg+1) * intensity.
enum class RabiConvention { clebsch_gordan, sum_rule };

struct TransitionSpec {
  AngMom fg{1.0};
  AngMom fe{0.0};
  double rabi = 0.0;       // reduced Rabi frequency Omega
  double detuning = 0.0;   // Delta = omega_0 - omega
  double gamma = 0.002;    // transit relaxation rate
  double beta_g = 1.0;     // ground Zeeman shift per unit field
  double beta_e = 0.0;     // excited Zeeman shift per unit field
  double field = 0.0;      // B
  Polarization pol = Polarization::linear_x();
  double dipole_scale = 1.0;  // multiplies Omega^2

  static TransitionSpec eit() { return {}; }
  static TransitionSpec eia() {
    TransitionSpec s;
    s.fe = AngMom(2.0);
    return s;
  }

  /// Omega^2 including the dipole scale.
  double effective_rabi2() const { return rabi * rabi * dipole_scale; }
  TransitionSpec with_field(double b) const {
    TransitionSpec s = *this;
    s.field = b;
    return s;
  }
  TransitionSpec with_rabi2(double omega2) const;
  TransitionSpec with_intensity(double intensity,
                                RabiConvention convention = RabiConvention::clebsch_gordan) const;
  double intensity(RabiConvention convention = RabiConvention::clebsch_gordan) const;

  /// Throws std::invalid_argument on non-physical parameters.
  void validate() const;
  /// Non-empty when gamma is large enough that the relaxation-rate hierarchy
  /// assumed by the group classification no longer holds.
  std::optional<std::string> warning() const;
};

/// dy/dt = M y + p0 together with the probe coupling used for absorption.
struct Liouvillian {
  CMatrix M;
  CVector p0;
  int levels = 0;
  /// e . Q_ge placed in the full basis (ground rows, excited columns),
  /// already multiplied by sqrt(dipole_scale).
  CMatrix probe;
  double gamma = 0.0;
  std::optional<TransitionSpec> spec;

  int size() const { return static_cast<int>(M.rows()); }
};

/// e . Q_ge = sum_q (-1)^q e_q Q_ge^{-q}; the adjoint is e* . Q_eg.
OperatorMatrix probe_coupling(const TransitionSpec& spec);

OperatorMatrix hamiltonian(const TransitionSpec& spec);

Liouvillian build_liouvillian(const TransitionSpec& spec);

/// sigma_0 = P_g / (2Fg + 1).
OperatorMatrix isotropic_ground_state(AngMom fg, AngMom fe);

CVector vectorize(const CMatrix& sigma);
/// Throws std::invalid_argument unless y.size() == levels^2.
CMatrix devectorize(const CVector& y, int levels);

/// Absorption rate i Tr[sigma (P) - sigma (P^dagger)] with P the probe
/// coupling. Positive for absorbing states: (Omega/2) w equals the rate at
/// which the light transfers population to the excited level. Complex for
/// non-Hermitian sigma (eigenmode components).
cplx absorption_complex(const CMatrix& sigma, const CMatrix& probe);
double absorption(const CMatrix& sigma, const TransitionSpec& spec);
double absorption(const CVector& y, const Liouvillian& L);

/// Linear functional g with w(y) = g . y (no conjugation).
Eigen::RowVectorXcd absorption_functional(const CMatrix& probe);

}  // namespace hanle
