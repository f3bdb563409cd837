// Eigenmode analysis of the Bloch superoperator.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "hanle/dynamics.hpp"
#include "hanle/liouvillian.hpp"

namespace hanle {

struct EigenMode {
  cplx lambda{0.0};
  CVector v;  // unit norm
  int group = 0;
  /// False when |Re lambda| lies within 20% of a group threshold.
  bool group_confident = true;
  cplx a{0.0};
  /// Absorption of the mode's density-matrix component (complex in general).
  cplx w_complex{0.0};
  double w_mode = 0.0;  // |w_complex|
  bool observable = false;
};

/// Complete spectrum of L.M with unit right eigenvectors; mode order follows
/// decompose(). Throws NumericalError if the eigensolver fails or a residual
/// exceeds 1e-9.
std::vector<EigenMode> eigenmodes(const Liouvillian& L);

struct GroupThresholds {
  double slow;  // sqrt(gamma * Gamma/2): group 1 below
  double fast;  // sqrt(Gamma/2 * Gamma): group 3 above
};
GroupThresholds group_thresholds(double gamma);

/// Group 1 (|Re| ~ gamma, ground-state dynamics), 2 (~ Gamma/2, optical
/// coherences) or 3 (~ Gamma, excited populations).
void classify_groups(std::vector<EigenMode>& modes, double gamma);

struct AmplitudeResult {
  CVector a;
  double condition = 0.0;
  bool ill_conditioned = false;
  double residual = 0.0;  // ||V a - (y0 - y_ss)||
};
/// Solves V a = y0 - y_ss. Ill-conditioning (condition > 1e10) is flagged,
/// not thrown.
AmplitudeResult mode_amplitudes(const std::vector<EigenMode>& modes, const CVector& y0,
                                const CVector& y_ss);

struct ObservabilityTolerances {
  double amplitude = 1e-8;   // relative to the largest |a_i|
  double absorption = 1e-8;  // relative to the largest |w_i|
};

/// Condition a) |a| > tol_a * max_a and condition b) |w| > tol_w * max_w.
bool is_observable(const EigenMode& mode, double max_a, double max_w,
                   const ObservabilityTolerances& tol = {});

/// Full analysis for initial state y0 relaxing toward y_ss: amplitudes,
/// mode absorptions, group labels and observability flags.
std::vector<EigenMode> analyze_modes(const Liouvillian& L, const CVector& y0,
                                     const CVector& y_ss,
                                     const ObservabilityTolerances& tol = {});

/// Modes of `target` seen from the steady state of `origin` (the transient
/// right after switching from origin's field to target's).
std::vector<EigenMode> switched_modes(const Liouvillian& target, const Liouvillian& origin,
                                      const ObservabilityTolerances& tol = {});

struct DarkBrightStates {
  CVector dark_ket;
  CVector bright_ket;
  CMatrix dark;    // |D><D|
  CMatrix bright;  // |B><B|
};
/// Ground-state superpositions of |1,-1> and |1,+1> that are uncoupled
/// (dark) and coupled (bright) for Fg=1 -> Fe=0 under linear polarization
/// perpendicular to the field. For linear-y these are
/// (|-1> -+ |+1>)/sqrt(2); linear-x swaps the signs. Throws
/// std::invalid_argument for other polarizations or transitions.
DarkBrightStates dark_state(const TransitionSpec& spec);

/// Open Lambda system: grounds |-> and |+> (Zeeman shifts -+ zeeman), excited
/// |e>, sink |s>. Both arms couple with strength arm_coupling * Omega / 2
/// and opposite signs. The excited level decays at Gamma = 1, a fraction
/// alpha into the sink and (1 - alpha)/2 into each Lambda ground. Transit
/// relaxation gamma acts on all levels toward equal populations of -, + and s.
/// Level order: -, +, e, s.
struct OpenLambdaSpec {
  double rabi = 0.0;
  double gamma = 0.002;
  double detuning = 0.0;
  double zeeman = 0.0;
  double alpha = 1.0 / 3.0;
  double arm_coupling = 1.0 / std::sqrt(6.0);
  void validate() const;
};
Liouvillian open_lambda_liouvillian(const OpenLambdaSpec& spec);

enum class FieldCase { zero = 0, on = 1 };

struct SweepRow {
  double intensity = 0.0;  // as passed to intensity_sweep
  FieldCase b_case = FieldCase::zero;
  cplx lambda{0.0};
  int group = 0;
  bool group_confident = true;
  bool observable = false;
  double w_mode = 0.0;
  double amplitude = 0.0;
};

/// For each intensity, eigenmodes at B = 0 (starting from the B = b1 steady
/// state) and at B = b1 (starting from B = 0). Returns every mode; filter with
/// observable_group1(). Rows are ordered by intensity index, then b_case,
/// then mode order, regardless of thread scheduling.
std::vector<SweepRow> intensity_sweep(
    const TransitionSpec& base, std::span<const double> intensities, double b1,
    RabiConvention convention = RabiConvention::clebsch_gordan, bool parallel = true);

std::vector<SweepRow> observable_group1(const std::vector<SweepRow>& rows);

/// n points log-uniform over [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

/// Observable group-1 mode with |Im| <= 1e-9 and the smallest |Re| among the
/// rows for (intensity, b_case), excluding eigenvalues within 1e-9 of -gamma.
/// Returns nullptr if none.
const SweepRow* slowest_real_observable(const std::vector<SweepRow>& rows, double intensity,
                                        FieldCase b_case, double gamma);

}  // namespace hanle
