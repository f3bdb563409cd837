// Steady states, time propagation and square-wave field transients.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hanle/eigensystem.hpp"
#include "hanle/liouvillian.hpp"

namespace hanle {

/// Square-wave field: each period starts with `duty * period` at b0, then
/// switches to b1 for the rest of the period. Switching is instantaneous
/// unless `settling_time` > 0, in which case the field relaxes
/// exponentially to its new value with that time constant (integrator only).
struct SwitchSchedule {
  double b0 = 0.0;
  double b1 = 0.03;
  double period = 5000.0;
  double duty = 0.5;
  int n_periods = 1;
  int samples_per_period = 4000;
  double settling_time = 0.0;

  void validate() const;
  double b0_duration() const { return duty * period; }
  double b1_duration() const { return (1.0 - duty) * period; }
};

struct TransientTrace {
  std::vector<double> times;
  std::vector<double> w;
  std::vector<double> b;
  std::optional<TransitionSpec> spec;
  std::optional<SwitchSchedule> schedule;
  /// Set when the modal expansion was replaced by direct integration.
  bool used_integrator = false;

  std::size_t size() const { return times.size(); }
  /// Throws std::invalid_argument on unequal lengths or non-increasing time.
  void validate() const;
  /// Samples with t_begin <= t < t_end, times shifted so the slice starts at 0.
  TransientTrace slice(double t_begin, double t_end) const;
};

enum class Propagator { modal, integrated };

/// y_ss = -M^{-1} p0. Throws NumericalError if M is numerically singular or
/// the residual exceeds 1e-10.
CVector steady_state(const Liouvillian& L);

/// Modal expansion y(t) = sum_i a_i v_i exp(lambda_i t) + y_ss.
class ModalPropagator {
 public:
  explicit ModalPropagator(const Liouvillian& L);

  static constexpr double max_condition = 1e10;

  bool well_conditioned() const { return eig_.condition <= max_condition && !eig_.defective; }
  const Eigensystem& eigensystem() const { return eig_; }
  const CVector& steady() const { return y_ss_; }
  double steady_absorption() const { return w_ss_; }
  /// Absorption of each eigenvector (as a density-matrix component).
  const CVector& mode_absorption() const { return mode_w_; }

  CVector amplitudes(const CVector& y0) const;
  std::vector<double> absorption(const CVector& y0, std::span<const double> times) const;
  /// One state per column.
  CMatrix states(const CVector& y0, std::span<const double> times) const;
  CVector state(const CVector& y0, double t) const;

 private:
  Eigensystem eig_;
  Eigen::PartialPivLU<CMatrix> lu_;
  CVector y_ss_;
  CVector mode_w_;
  double w_ss_ = 0.0;
};

/// Absorption at the requested times via the modal expansion. Falls back to
/// the integrator (and sets used_integrator) when the eigenvector matrix is
/// too poorly conditioned to trust.
TransientTrace propagate_modal(const Liouvillian& L, const CVector& y0,
                               std::span<const double> times);

/// Classical fourth-order Runge-Kutta on dy/dt = M y + p0 with a fixed step.
/// Records every `stride`-th step, starting with t = 0. The step is shrunk
/// so that it divides t_end exactly. Throws std::invalid_argument if dt > 0.05.
TransientTrace propagate_integrated(const Liouvillian& L, const CVector& y0, double dt,
                                    double t_end, int stride = 1);

/// Integrated state at the requested (ascending, non-negative) times, one per
/// column.
CMatrix integrate_states(const Liouvillian& L, const CVector& y0, std::span<const double> times,
                         double dt);

/// Square-wave transient. The initial state is the steady state of the b1
/// phase that precedes t = 0.
TransientTrace switched_transient(const TransitionSpec& spec, const SwitchSchedule& schedule,
                                  Propagator method = Propagator::modal, double dt = 0.01);

/// Density matrices along a switched transient (one per sample, as columns).
CMatrix switched_states(const TransitionSpec& spec, const SwitchSchedule& schedule,
                        Propagator method = Propagator::modal, double dt = 0.01);

struct PhysicalityReport {
  double max_trace_error = 0.0;
  double min_eigenvalue = 0.0;
  double max_hermiticity_error = 0.0;
};
PhysicalityReport physicality(const CMatrix& states, int levels);

/// Steady-state absorption at each field value (a Hanle resonance scan).
std::vector<double> hanle_scan(const TransitionSpec& spec, std::span<const double> fields);
std::vector<double> hanle_scan_serial(const TransitionSpec& spec, std::span<const double> fields);

/// Mean transverse transit time D (2 k_B T / m)^{-1/2}, SI units.
double transit_time(double diameter_m, double temperature_k, double mass_kg);
/// Atomic mass in kg for "Rb87", "Rb85" or "Cs133". Throws std::invalid_argument.
double isotope_mass(const std::string& isotope);

}  // namespace hanle
