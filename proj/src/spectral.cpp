#include "hanle/spectral.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SVD>

#include "hanle/errors.hpp"
#include "hanle/kernels.hpp"

namespace hanle {

std::vector<EigenMode> eigenmodes(const Liouvillian& L) {
  const Eigensystem eig = decompose(L.M);
  if (eig.max_residual > 1e-9)
    throw NumericalError("eigenvector residual " + std::to_string(eig.max_residual) +
                         " exceeds 1e-9 (eigenvector condition " +
                         std::to_string(eig.condition) + ")");
  std::vector<EigenMode> modes(static_cast<std::size_t>(eig.values.size()));
  const Eigen::RowVectorXcd g = absorption_functional(L.probe);
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    auto& m = modes[static_cast<std::size_t>(i)];
    m.lambda = eig.values(i);
    m.v = eig.vectors.col(i);
    m.w_complex = (g * m.v)(0);
    m.w_mode = std::abs(m.w_complex);
  }
  return modes;
}

GroupThresholds group_thresholds(double gamma) {
  return {std::sqrt(gamma * 0.5), std::sqrt(0.5)};
}

void classify_groups(std::vector<EigenMode>& modes, double gamma) {
  const GroupThresholds th = group_thresholds(gamma);
  for (auto& m : modes) {
    const double rate = std::abs(m.lambda.real());
    m.group = rate < th.slow ? 1 : (rate < th.fast ? 2 : 3);
    const bool near_slow = std::abs(rate - th.slow) < 0.2 * th.slow;
    const bool near_fast = std::abs(rate - th.fast) < 0.2 * th.fast;
    m.group_confident = !(near_slow || near_fast);
  }
}

AmplitudeResult mode_amplitudes(const std::vector<EigenMode>& modes, const CVector& y0,
                                const CVector& y_ss) {
  const auto n = static_cast<Eigen::Index>(modes.size());
  if (y0.size() != n || y_ss.size() != n)
    throw std::invalid_argument("state size does not match the mode count");
  CMatrix V(n, n);
  for (Eigen::Index i = 0; i < n; ++i) V.col(i) = modes[static_cast<std::size_t>(i)].v;
  const CVector rhs = y0 - y_ss;
  AmplitudeResult out;
  Eigen::JacobiSVD<CMatrix> svd(V);
  const auto& s = svd.singularValues();
  out.condition = s(n - 1) > 0.0 ? s(0) / s(n - 1) : std::numeric_limits<double>::infinity();
  out.ill_conditioned = !(out.condition <= 1e10);
  out.a = V.partialPivLu().solve(rhs);
  out.residual = (V * out.a - rhs).norm();
  return out;
}

bool is_observable(const EigenMode& mode, double max_a, double max_w,
                   const ObservabilityTolerances& tol) {
  return std::abs(mode.a) > tol.amplitude * max_a && mode.w_mode > tol.absorption * max_w;
}

std::vector<EigenMode> analyze_modes(const Liouvillian& L, const CVector& y0,
                                     const CVector& y_ss, const ObservabilityTolerances& tol) {
  std::vector<EigenMode> modes = eigenmodes(L);
  classify_groups(modes, L.gamma);
  const AmplitudeResult amp = mode_amplitudes(modes, y0, y_ss);
  double max_a = 0.0, max_w = 0.0;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    modes[i].a = amp.a(static_cast<Eigen::Index>(i));
    max_a = std::max(max_a, std::abs(modes[i].a));
    max_w = std::max(max_w, modes[i].w_mode);
  }
  for (auto& m : modes) m.observable = is_observable(m, max_a, max_w, tol);
  return modes;
}

std::vector<EigenMode> switched_modes(const Liouvillian& target, const Liouvillian& origin,
                                      const ObservabilityTolerances& tol) {
  return analyze_modes(target, steady_state(origin), steady_state(target), tol);
}

DarkBrightStates dark_state(const TransitionSpec& spec) {
  if (spec.fg != AngMom(1.0) || spec.fe != AngMom(0.0))
    throw std::invalid_argument("dark/bright states are defined for Fg=1 -> Fe=0");
  const auto kind = spec.pol.kind();
  if (kind != Polarization::Kind::linear_x && kind != Polarization::Kind::linear_y)
    throw std::invalid_argument("dark/bright states need linear-x or linear-y polarization");
  const LevelBasis basis(spec.fg, spec.fe);
  const int e = basis.excited_index(0);
  const int gm = basis.ground_index(-2), gp = basis.ground_index(2);

  // The bright state is the ground superposition the light couples to |e>.
  const CMatrix probe = probe_coupling(spec);
  CVector bright = CVector::Zero(basis.size());
  bright(gm) = probe(gm, e);
  bright(gp) = probe(gp, e);
  bright.normalize();
  CVector dark = CVector::Zero(basis.size());
  dark(gm) = std::conj(bright(gp));
  dark(gp) = -std::conj(bright(gm));

  auto fix_phase = [gm](CVector& v) {
    const cplx c = v(gm);
    v *= std::conj(c) / std::abs(c);
  };
  fix_phase(bright);
  fix_phase(dark);
  return {dark, bright, dark * dark.adjoint(), bright * bright.adjoint()};
}

void OpenLambdaSpec::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  if (!(rabi >= 0.0)) throw std::invalid_argument("rabi must be >= 0");
}

Liouvillian open_lambda_liouvillian(const OpenLambdaSpec& spec) {
  spec.validate();
  enum { minus = 0, plus = 1, excited = 2, sink = 3, levels = 4 };
  const cplx i(0.0, 1.0);

  CMatrix h = CMatrix::Zero(levels, levels);
  h(minus, minus) = -spec.zeeman;
  h(plus, plus) = spec.zeeman;
  h(excited, excited) = spec.detuning;
  const double half_rabi = 0.5 * spec.rabi * spec.arm_coupling;
  h(minus, excited) = h(excited, minus) = half_rabi;
  h(plus, excited) = h(excited, plus) = -half_rabi;

  const double to_ground = 0.5 * (1.0 - spec.alpha);
  CMatrix sigma0 = CMatrix::Zero(levels, levels);
  sigma0(minus, minus) = sigma0(plus, plus) = sigma0(sink, sink) = 1.0 / 3.0;

  // Column c of M is the linear part of the right-hand side applied to the
  // elementary matrix E_jk.
  auto rhs = [&](const CMatrix& s) {
    CMatrix d = -i * (h * s - s * h);
    const cplx pe = s(excited, excited);
    for (int k = 0; k < levels; ++k) {
      d(excited, k) -= 0.5 * s(excited, k);
      d(k, excited) -= 0.5 * s(k, excited);
    }
    d(minus, minus) += to_ground * pe;
    d(plus, plus) += to_ground * pe;
    d(sink, sink) += spec.alpha * pe;
    d -= spec.gamma * s;
    return d;
  };

  Liouvillian out;
  out.levels = levels;
  out.M.resize(levels * levels, levels * levels);
  for (int j = 0; j < levels; ++j) {
    for (int k = 0; k < levels; ++k) {
      CMatrix unit = CMatrix::Zero(levels, levels);
      unit(j, k) = 1.0;
      out.M.col(j * levels + k) = vectorize(rhs(unit));
    }
  }
  out.p0 = spec.gamma * vectorize(sigma0);
  out.probe = CMatrix::Zero(levels, levels);
  out.probe(minus, excited) = spec.arm_coupling;
  out.probe(plus, excited) = -spec.arm_coupling;
  out.gamma = spec.gamma;
  return out;
}

std::vector<SweepRow> intensity_sweep(const TransitionSpec& base,
                                      std::span<const double> intensities, double b1,
                                      RabiConvention convention, bool parallel) {
  const std::size_t points = intensities.size();
  auto one = [&](std::size_t job) {
    const std::size_t idx = job / 2;
    const FieldCase b_case = (job % 2 == 0) ? FieldCase::zero : FieldCase::on;
    const TransitionSpec at = base.with_intensity(intensities[idx], convention);
    const Liouvillian zero = build_liouvillian(at.with_field(0.0));
    const Liouvillian on = build_liouvillian(at.with_field(b1));
    const std::vector<EigenMode> modes =
        b_case == FieldCase::zero ? switched_modes(zero, on) : switched_modes(on, zero);
    std::vector<SweepRow> rows;
    rows.reserve(modes.size());
    for (const auto& m : modes) {
      SweepRow r;
      r.intensity = intensities[idx];
      r.b_case = b_case;
      r.lambda = m.lambda;
      r.group = m.group;
      r.group_confident = m.group_confident;
      r.observable = m.observable;
      r.w_mode = m.w_mode;
      r.amplitude = std::abs(m.a);
      rows.push_back(r);
    }
    return rows;
  };
  const auto blocks = parallel ? kernels::parallel_map(2 * points, one)
                               : kernels::serial_map(2 * points, one);
  std::vector<SweepRow> out;
  for (const auto& blk : blocks) out.insert(out.end(), blk.begin(), blk.end());
  return out;
}

std::vector<SweepRow> observable_group1(const std::vector<SweepRow>& rows) {
  std::vector<SweepRow> out;
  for (const auto& r : rows)
    if (r.observable && r.group == 1) out.push_back(r);
  return out;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1)
    throw std::invalid_argument("log grid needs 0 < lo <= hi and n >= 1");
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double step = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
  out.back() = hi;
  return out;
}

const SweepRow* slowest_real_observable(const std::vector<SweepRow>& rows, double intensity,
                                        FieldCase b_case, double gamma) {
  const SweepRow* best = nullptr;
  for (const auto& r : rows) {
    if (r.intensity != intensity || r.b_case != b_case || !r.observable || r.group != 1) continue;
    if (std::abs(r.lambda.imag()) > 1e-9) continue;
    if (std::abs(r.lambda.real() + gamma) <= 1e-9) continue;
    if (!best || std::abs(r.lambda.real()) < std::abs(best->lambda.real())) best = &r;
  }
  return best;
}

}  // namespace hanle
