#include "hanle/liouvillian.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hanle {

namespace {

// Row-major vectorization: vec(A X B) = kron(A, B^T) vec(X).
CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMatrix left_action(const CMatrix& a) {
  return kron(a, CMatrix::Identity(a.rows(), a.cols()));
}

CMatrix right_action(const CMatrix& b) {
  return kron(CMatrix::Identity(b.rows(), b.cols()), b.transpose());
}

}  // namespace

TransitionSpec TransitionSpec::with_rabi2(double omega2) const {
  if (omega2 < 0.0) throw std::invalid_argument("Omega^2 must be non-negative");
  TransitionSpec s = *this;
  s.rabi = std::sqrt(omega2);
  return s;
}

TransitionSpec TransitionSpec::with_intensity(double intensity, RabiConvention convention) const {
  const double factor =
      convention == RabiConvention::clebsch_gordan ? static_cast<double>(fg.multiplicity()) : 1.0;
  return with_rabi2(factor * intensity);
}

double TransitionSpec::intensity(RabiConvention convention) const {
  const double factor =
      convention == RabiConvention::clebsch_gordan ? static_cast<double>(fg.multiplicity()) : 1.0;
  return rabi * rabi / factor;
}

void TransitionSpec::validate() const {
  if (std::abs(fg.twice() - fe.twice()) > 2 || (fg.twice() == 0 && fe.twice() == 0))
    throw std::invalid_argument("Fg -> Fe is not a dipole transition");
  if (!(rabi >= 0.0) || !std::isfinite(rabi)) throw std::invalid_argument("rabi must be >= 0");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be > 0");
  if (!(dipole_scale > 0.0) || !std::isfinite(dipole_scale))
    throw std::invalid_argument("dipole_scale must be > 0");
  if (!std::isfinite(detuning) || !std::isfinite(beta_g) || !std::isfinite(beta_e) ||
      !std::isfinite(field))
    throw std::invalid_argument("non-finite field parameter");
}

std::optional<std::string> TransitionSpec::warning() const {
  if (gamma > 0.1) {
    std::ostringstream os;
    os << "gamma = " << gamma << " is not small compared with Gamma";
    return os.str();
  }
  return std::nullopt;
}

OperatorMatrix probe_coupling(const TransitionSpec& spec) {
  const int n = LevelBasis(spec.fg, spec.fe).size();
  OperatorMatrix out = OperatorMatrix::Zero(n, n);
  for (int q = -1; q <= 1; ++q) {
    const cplx e = spec.pol.component(q);
    if (e == cplx(0.0)) continue;
    const double sign = (q == 0) ? 1.0 : -1.0;
    out += sign * e * q_matrix(spec.fg, spec.fe, -q);
  }
  return std::sqrt(spec.dipole_scale) * out;
}

OperatorMatrix hamiltonian(const TransitionSpec& spec) {
  const auto p = projectors(spec.fg, spec.fe);
  const OperatorMatrix fz = fz_matrix(spec.fg, spec.fe);
  const OperatorMatrix probe = probe_coupling(spec);
  OperatorMatrix h = (spec.beta_g * p.ground + spec.beta_e * p.excited) * fz * spec.field;
  h += spec.detuning * p.excited;
  h += 0.5 * spec.rabi * (probe + probe.adjoint());
  return h;
}

OperatorMatrix isotropic_ground_state(AngMom fg, AngMom fe) {
  return projectors(fg, fe).ground / static_cast<double>(fg.multiplicity());
}

Liouvillian build_liouvillian(const TransitionSpec& spec) {
  spec.validate();
  const LevelBasis basis(spec.fg, spec.fe);
  const int n = basis.size();
  const auto p = projectors(spec.fg, spec.fe);
  const OperatorMatrix h = hamiltonian(spec);
  const cplx i(0.0, 1.0);

  CMatrix m = -i * (left_action(h) - right_action(h));
  m -= 0.5 * (left_action(p.excited) + right_action(p.excited));
  const double feeding = static_cast<double>(spec.fe.multiplicity());
  for (int q = -1; q <= 1; ++q) {
    const OperatorMatrix qge = q_matrix(spec.fg, spec.fe, q);
    m += feeding * kron(qge, qge.adjoint().transpose());
  }
  m -= spec.gamma * CMatrix::Identity(n * n, n * n);

  Liouvillian out;
  out.M = std::move(m);
  out.p0 = spec.gamma * vectorize(isotropic_ground_state(spec.fg, spec.fe));
  out.levels = n;
  out.probe = probe_coupling(spec);
  out.gamma = spec.gamma;
  out.spec = spec;
  return out;
}

CVector vectorize(const CMatrix& sigma) {
  const Eigen::Index n = sigma.rows();
  CVector y(n * sigma.cols());
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < sigma.cols(); ++c) y(r * sigma.cols() + c) = sigma(r, c);
  return y;
}

CMatrix devectorize(const CVector& y, int levels) {
  if (levels <= 0 || y.size() != static_cast<Eigen::Index>(levels) * levels)
    throw std::invalid_argument("Liouville vector size does not match level count");
  CMatrix sigma(levels, levels);
  for (int r = 0; r < levels; ++r)
    for (int c = 0; c < levels; ++c) sigma(r, c) = y(r * levels + c);
  return sigma;
}

cplx absorption_complex(const CMatrix& sigma, const CMatrix& probe) {
  const cplx i(0.0, 1.0);
  return i * ((sigma * probe).trace() - (sigma * probe.adjoint()).trace());
}

double absorption(const CMatrix& sigma, const TransitionSpec& spec) {
  return absorption_complex(sigma, probe_coupling(spec)).real();
}

double absorption(const CVector& y, const Liouvillian& L) {
  return (absorption_functional(L.probe) * y)(0).real();
}

Eigen::RowVectorXcd absorption_functional(const CMatrix& probe) {
  // Tr[sigma A] = sum_{jk} sigma(j,k) A(k,j).
  const Eigen::Index n = probe.rows();
  const cplx i(0.0, 1.0);
  const CMatrix a = i * (probe - probe.adjoint());
  Eigen::RowVectorXcd g(n * n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) g(j * n + k) = a(k, j);
  return g;
}

}  // namespace hanle
