#include "hanle/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include "hanle/errors.hpp"
#include "hanle/kernels.hpp"

namespace hanle {

namespace {

using SparseC = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

constexpr double kMaxStep = 0.05;

// M(t) = base + exp(-(t - t0) / tau) * delta. `delta` is empty for a
// constant generator.
struct Generator {
  SparseC base;
  SparseC delta;
  double tau = 0.0;
  double t0 = 0.0;
  CVector p0;

  CVector rhs(const CVector& y, double t) const {
    CVector out = base * y + p0;
    if (tau > 0.0 && delta.nonZeros() > 0) out += std::exp(-(t - t0) / tau) * (delta * y);
    return out;
  }
};

Generator constant_generator(const Liouvillian& L) {
  Generator g;
  g.base = L.M.sparseView(1.0, 0.0);
  g.p0 = L.p0;
  return g;
}

void rk4_advance(const Generator& g, CVector& y, double t, double span, double dt) {
  if (span <= 0.0) return;
  const auto steps = static_cast<long long>(std::ceil(span / dt - 1e-9));
  const double h = span / static_cast<double>(steps);
  for (long long s = 0; s < steps; ++s) {
    const double ts = t + h * static_cast<double>(s);
    const CVector k1 = g.rhs(y, ts);
    const CVector k2 = g.rhs(y + 0.5 * h * k1, ts + 0.5 * h);
    const CVector k3 = g.rhs(y + 0.5 * h * k2, ts + 0.5 * h);
    const CVector k4 = g.rhs(y + h * k3, ts + h);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
}

CMatrix rk4_samples(const Generator& g, CVector y, std::span<const double> times, double dt,
                    double t_start = 0.0) {
  CMatrix out(y.size(), static_cast<Eigen::Index>(times.size()));
  double t = t_start;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t - 1e-12) throw std::invalid_argument("sample times must be ascending");
    rk4_advance(g, y, t, times[k] - t, dt);
    t = times[k];
    out.col(static_cast<Eigen::Index>(k)) = y;
  }
  return out;
}

void check_step(double dt) {
  if (!(dt > 0.0) || dt > kMaxStep)
    throw std::invalid_argument("integrator step must lie in (0, 0.05] (units of 1/Gamma)");
}

std::vector<double> absorption_of_states(const Liouvillian& L, const CMatrix& states) {
  const Eigen::RowVectorXcd g = absorption_functional(L.probe);
  const Eigen::RowVectorXcd w = g * states;
  std::vector<double> out(static_cast<std::size_t>(w.size()));
  for (Eigen::Index k = 0; k < w.size(); ++k) out[static_cast<std::size_t>(k)] = w(k).real();
  return out;
}

struct SwitchedResult {
  TransientTrace trace;
  CMatrix states;
};

SwitchedResult run_switched(const TransitionSpec& spec, const SwitchSchedule& schedule,
                            Propagator method, double dt, bool keep_states) {
  schedule.validate();
  const bool settling = schedule.settling_time > 0.0;
  if (method == Propagator::integrated || settling) check_step(dt);

  const Liouvillian l0 = build_liouvillian(spec.with_field(schedule.b0));
  const Liouvillian l1 = build_liouvillian(spec.with_field(schedule.b1));

  std::optional<ModalPropagator> m0, m1;
  if (method == Propagator::modal && !settling) {
    m0.emplace(l0);
    m1.emplace(l1);
  }

  SwitchedResult res;
  res.trace.spec = spec;
  res.trace.schedule = schedule;
  std::vector<CMatrix> state_blocks;

  CVector y = steady_state(l1);
  const int n_b0 = static_cast<int>(std::lround(schedule.samples_per_period * schedule.duty));
  const int n_b1 = schedule.samples_per_period - n_b0;

  for (int p = 0; p < schedule.n_periods; ++p) {
    for (int phase = 0; phase < 2; ++phase) {
      const bool on = phase == 1;
      const double length = on ? schedule.b1_duration() : schedule.b0_duration();
      const int count = on ? n_b1 : n_b0;
      if (length <= 0.0 || count <= 0) continue;
      const double start = p * schedule.period + (on ? schedule.b0_duration() : 0.0);
      const double spacing = length / count;
      const Liouvillian& L = on ? l1 : l0;

      std::vector<double> local(static_cast<std::size_t>(count) + 1);
      for (int j = 0; j <= count; ++j) local[static_cast<std::size_t>(j)] = j * spacing;
      local.back() = length;

      CMatrix states;
      std::vector<double> w;
      bool integrated = false;
      if (m0 && (on ? m1 : m0)->well_conditioned()) {
        const ModalPropagator& prop = on ? *m1 : *m0;
        if (keep_states) {
          states = prop.states(y, local);
          w = absorption_of_states(L, states);
        } else {
          w = prop.absorption(y, local);
          states = prop.state(y, length);
        }
      } else {
        Generator g = constant_generator(L);
        if (settling) {
          const Liouvillian& other = on ? l0 : l1;
          g.delta = (other.M - L.M).sparseView(1.0, 0.0);
          g.tau = schedule.settling_time;
          g.t0 = 0.0;
        }
        states = rk4_samples(g, y, local, dt);
        w = absorption_of_states(L, states);
        integrated = method == Propagator::modal;
      }
      res.trace.used_integrator = res.trace.used_integrator || integrated;

      for (int j = 0; j < count; ++j) {
        const double b_now =
            settling ? (on ? schedule.b1 + (schedule.b0 - schedule.b1) *
                                               std::exp(-local[static_cast<std::size_t>(j)] /
                                                        schedule.settling_time)
                           : schedule.b0 + (schedule.b1 - schedule.b0) *
                                               std::exp(-local[static_cast<std::size_t>(j)] /
                                                        schedule.settling_time))
                     : (on ? schedule.b1 : schedule.b0);
        res.trace.times.push_back(start + local[static_cast<std::size_t>(j)]);
        res.trace.w.push_back(w[static_cast<std::size_t>(j)]);
        res.trace.b.push_back(b_now);
      }
      if (keep_states) state_blocks.push_back(states.leftCols(count));
      y = states.col(states.cols() - 1);
    }
  }

  if (keep_states) {
    Eigen::Index total = 0;
    for (const auto& blk : state_blocks) total += blk.cols();
    res.states.resize(l0.size(), total);
    Eigen::Index c = 0;
    for (const auto& blk : state_blocks) {
      res.states.middleCols(c, blk.cols()) = blk;
      c += blk.cols();
    }
  }
  return res;
}

}  // namespace

void SwitchSchedule::validate() const {
  if (!(period > 0.0) || !std::isfinite(period)) throw std::invalid_argument("period must be > 0");
  if (!(duty >= 0.0 && duty <= 1.0)) throw std::invalid_argument("duty must lie in [0, 1]");
  if (n_periods < 1) throw std::invalid_argument("n_periods must be >= 1");
  if (samples_per_period < 2) throw std::invalid_argument("samples_per_period must be >= 2");
  if (!(settling_time >= 0.0)) throw std::invalid_argument("settling_time must be >= 0");
  if (!std::isfinite(b0) || !std::isfinite(b1)) throw std::invalid_argument("non-finite field");
}

void TransientTrace::validate() const {
  if (w.size() != times.size() || b.size() != times.size())
    throw std::invalid_argument("trace columns differ in length");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("trace times must increase");
}

TransientTrace TransientTrace::slice(double t_begin, double t_end) const {
  TransientTrace out;
  out.spec = spec;
  out.schedule = schedule;
  out.used_integrator = used_integrator;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= t_begin && times[i] < t_end) {
      out.times.push_back(times[i] - t_begin);
      out.w.push_back(w[i]);
      out.b.push_back(b[i]);
    }
  }
  return out;
}

CVector steady_state(const Liouvillian& L) {
  Eigen::PartialPivLU<CMatrix> lu(L.M);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14))
    throw NumericalError("Liouvillian is singular (reciprocal condition " +
                         std::to_string(rcond) + ")");
  CVector y = lu.solve(-L.p0);
  // One round of iterative refinement.
  const CVector r = L.M * y + L.p0;
  y -= lu.solve(r);
  const double residual = (L.M * y + L.p0).norm();
  if (residual > 1e-10)
    throw NumericalError("steady-state residual " + std::to_string(residual) + " exceeds 1e-10");
  return y;
}

ModalPropagator::ModalPropagator(const Liouvillian& L)
    : eig_(decompose(L.M)), lu_(eig_.vectors), y_ss_(steady_state(L)) {
  const Eigen::RowVectorXcd g = absorption_functional(L.probe);
  mode_w_ = (g * eig_.vectors).transpose();
  w_ss_ = (g * y_ss_)(0).real();
}

CVector ModalPropagator::amplitudes(const CVector& y0) const { return lu_.solve(y0 - y_ss_); }

std::vector<double> ModalPropagator::absorption(const CVector& y0,
                                                std::span<const double> times) const {
  const CVector a = amplitudes(y0);
  const CVector weights = (a.array() * mode_w_.array()).matrix();
  return kernels::modal_signal(eig_.values, weights, w_ss_, times);
}

CMatrix ModalPropagator::states(const CVector& y0, std::span<const double> times) const {
  return kernels::modal_states(eig_.vectors, amplitudes(y0), eig_.values, y_ss_, times);
}

CVector ModalPropagator::state(const CVector& y0, double t) const {
  const double times[1] = {t};
  return states(y0, times).col(0);
}

TransientTrace propagate_modal(const Liouvillian& L, const CVector& y0,
                               std::span<const double> times) {
  TransientTrace out;
  out.times.assign(times.begin(), times.end());
  out.spec = L.spec;
  const double field = L.spec ? L.spec->field : 0.0;
  out.b.assign(times.size(), field);
  const ModalPropagator prop(L);
  if (prop.well_conditioned()) {
    out.w = prop.absorption(y0, times);
  } else {
    out.w = absorption_of_states(L, integrate_states(L, y0, times, 0.01));
    out.used_integrator = true;
  }
  return out;
}

TransientTrace propagate_integrated(const Liouvillian& L, const CVector& y0, double dt,
                                    double t_end, int stride) {
  check_step(dt);
  if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be >= 0");
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  const auto steps = static_cast<long long>(std::ceil(t_end / dt - 1e-9));
  const double h = steps > 0 ? t_end / static_cast<double>(steps) : dt;
  std::vector<double> times;
  for (long long s = 0; s <= steps; s += stride) times.push_back(h * static_cast<double>(s));
  const CMatrix states = integrate_states(L, y0, times, h);

  TransientTrace out;
  out.times = times;
  out.w = absorption_of_states(L, states);
  out.b.assign(times.size(), L.spec ? L.spec->field : 0.0);
  out.spec = L.spec;
  return out;
}

CMatrix integrate_states(const Liouvillian& L, const CVector& y0, std::span<const double> times,
                         double dt) {
  check_step(dt);
  return rk4_samples(constant_generator(L), y0, times, dt);
}

TransientTrace switched_transient(const TransitionSpec& spec, const SwitchSchedule& schedule,
                                  Propagator method, double dt) {
  return run_switched(spec, schedule, method, dt, false).trace;
}

CMatrix switched_states(const TransitionSpec& spec, const SwitchSchedule& schedule,
                        Propagator method, double dt) {
  return run_switched(spec, schedule, method, dt, true).states;
}

PhysicalityReport physicality(const CMatrix& states, int levels) {
  PhysicalityReport rep;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < states.cols(); ++k) {
    const CMatrix sigma = devectorize(states.col(k), levels);
    rep.max_trace_error = std::max(rep.max_trace_error, std::abs(sigma.trace() - 1.0));
    rep.max_hermiticity_error =
        std::max(rep.max_hermiticity_error, (sigma - sigma.adjoint()).cwiseAbs().maxCoeff());
    const CMatrix herm = 0.5 * (sigma + sigma.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, es.eigenvalues().minCoeff());
  }
  if (states.cols() == 0) rep.min_eigenvalue = 0.0;
  return rep;
}

std::vector<double> hanle_scan(const TransitionSpec& spec, std::span<const double> fields) {
  return kernels::parallel_map(fields.size(), [&](std::size_t i) {
    const Liouvillian L = build_liouvillian(spec.with_field(fields[i]));
    return absorption(steady_state(L), L);
  });
}

std::vector<double> hanle_scan_serial(const TransitionSpec& spec,
                                      std::span<const double> fields) {
  return kernels::serial_map(fields.size(), [&](std::size_t i) {
    const Liouvillian L = build_liouvillian(spec.with_field(fields[i]));
    return absorption(steady_state(L), L);
  });
}

double transit_time(double diameter_m, double temperature_k, double mass_kg) {
  if (!(diameter_m > 0.0) || !(temperature_k > 0.0) || !(mass_kg > 0.0))
    throw std::invalid_argument("transit time inputs must be positive");
  constexpr double boltzmann = 1.380649e-23;
  return diameter_m / std::sqrt(2.0 * boltzmann * temperature_k / mass_kg);
}

double isotope_mass(const std::string& isotope) {
  constexpr double amu = 1.66053906660e-27;
  if (isotope == "Rb87") return 86.909180527 * amu;
  if (isotope == "Rb85") return 84.911789738 * amu;
  if (isotope == "Cs133") return 132.905451961 * amu;
  throw std::invalid_argument("unknown isotope '" + isotope + "'");
}

}  // namespace hanle
