#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "hanle/dynamics.hpp"
#include "hanle/liouvillian.hpp"
#include "support.hpp"

using namespace hanle;
using hanle::testing::random_density;
using hanle::testing::random_matrix;

namespace {

// Dipole element built straight from the 3-j symbol, indexed by 2m.
double dipole(AngMom fg, AngMom fe, int tmg, int tme, int q) {
  const int phase2 = fg.twice() - tmg;
  const double sign = (phase2 / 2) % 2 == 0 ? 1.0 : -1.0;
  return sign * wigner3j_twice(fg, AngMom::from_twice(2), fe, -tmg, 2 * q, tme);
}

// Right-hand side of the Bloch equation evaluated term by term on matrices.
CMatrix bloch_rhs(const TransitionSpec& s, const CMatrix& sigma) {
  const auto mg = s.fg.twice_projections();
  const auto me = s.fe.twice_projections();
  const int ng = static_cast<int>(mg.size()), ne = static_cast<int>(me.size()), n = ng + ne;

  std::vector<CMatrix> q(3, CMatrix::Zero(n, n));
  for (int k = -1; k <= 1; ++k)
    for (int a = 0; a < ng; ++a)
      for (int b = 0; b < ne; ++b) q[k + 1](a, ng + b) = dipole(s.fg, s.fe, mg[a], me[b], k);

  CMatrix probe = CMatrix::Zero(n, n);
  for (int k = -1; k <= 1; ++k) {
    const double sign = k % 2 == 0 ? 1.0 : -1.0;
    probe += sign * s.pol.component(k) * q[1 - k];
  }
  probe *= std::sqrt(s.dipole_scale);

  CMatrix h = CMatrix::Zero(n, n);
  for (int a = 0; a < ng; ++a) h(a, a) = s.beta_g * 0.5 * mg[a] * s.field;
  for (int b = 0; b < ne; ++b) h(ng + b, ng + b) = s.beta_e * 0.5 * me[b] * s.field + s.detuning;
  h += 0.5 * s.rabi * (probe + probe.adjoint());

  CMatrix pe = CMatrix::Zero(n, n);
  for (int b = 0; b < ne; ++b) pe(ng + b, ng + b) = 1.0;
  CMatrix sigma0 = CMatrix::Zero(n, n);
  for (int a = 0; a < ng; ++a) sigma0(a, a) = 1.0 / ng;

  const cplx i(0.0, 1.0);
  CMatrix d = -i * (h * sigma - sigma * h) - 0.5 * (pe * sigma + sigma * pe);
  for (int k = 0; k < 3; ++k) d += static_cast<double>(ne) * q[k] * sigma * q[k].adjoint();
  d += -s.gamma * sigma + s.gamma * sigma0;
  return d;
}

std::vector<TransitionSpec> assorted_specs() {
  std::vector<TransitionSpec> out;
  TransitionSpec a = TransitionSpec::eit().with_rabi2(0.37);
  a.field = 0.041;
  a.detuning = 0.13;
  a.beta_e = 0.4;
  out.push_back(a);
  TransitionSpec b = TransitionSpec::eia().with_rabi2(1.3);
  b.field = -0.02;
  b.detuning = -0.3;
  b.beta_e = 1.5;
  b.dipole_scale = 2.5;
  out.push_back(b);
  TransitionSpec c = b;
  c.pol = Polarization::sigma_plus();
  out.push_back(c);
  TransitionSpec d = a;
  d.fg = AngMom(1.5);
  d.fe = AngMom(2.5);
  d.pol = Polarization::general({cplx(0.6, 0.0), cplx(0.0, 0.48), cplx(-0.64, 0.0)});
  out.push_back(d);
  TransitionSpec e = a;
  e.fg = AngMom(2.0);
  e.fe = AngMom(1.0);
  e.pol = Polarization::linear_y();
  out.push_back(e);
  return out;
}

}  // namespace

TEST_CASE("superoperator dimensions") {
  CHECK(build_liouvillian(TransitionSpec::eit()).M.rows() == 16);
  CHECK(build_liouvillian(TransitionSpec::eia()).M.rows() == 64);
  CHECK(build_liouvillian(TransitionSpec::eia()).M.cols() == 64);
  CHECK(build_liouvillian(TransitionSpec::eia()).levels == 8);
}

TEST_CASE("superoperator reproduces the term-by-term Bloch equation") {
  std::mt19937 rng(7);
  for (const TransitionSpec& s : assorted_specs()) {
    const Liouvillian L = build_liouvillian(s);
    for (int trial = 0; trial < 20; ++trial) {
      const CMatrix sigma = random_matrix(L.levels, rng);
      const CMatrix expected = bloch_rhs(s, sigma);
      const CMatrix got = devectorize(L.M * vectorize(sigma) + L.p0, L.levels);
      CHECK((got - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
    }
  }
}

TEST_CASE("trace and Hermiticity are preserved") {
  std::mt19937 rng(11);
  for (const TransitionSpec& s : assorted_specs()) {
    const Liouvillian L = build_liouvillian(s);
    for (int trial = 0; trial < 10; ++trial) {
      const CMatrix rho = random_density(L.levels, rng);
      const CMatrix d = devectorize(L.M * vectorize(rho) + L.p0, L.levels);
      CHECK(std::abs(d.trace()) < 1e-12);
      CHECK((d - d.adjoint()).norm() < 1e-12);
    }
  }
}

TEST_CASE("vectorization is row-major and invertible") {
  CMatrix s(2, 2);
  s << cplx(1, 0), cplx(2, 0), cplx(3, 0), cplx(4, 0);
  const CVector y = vectorize(s);
  CHECK(y(1) == cplx(2, 0));
  CHECK(y(2) == cplx(3, 0));
  CHECK(devectorize(y, 2) == s);
  CHECK_THROWS_AS(devectorize(y, 3), std::invalid_argument);
}

TEST_CASE("steady-state energy balance fixes the absorption sign") {
  for (bool eia : {false, true})
    for (double intensity : {2e-3, 0.06, 2.0}) {
      TransitionSpec s = testing::reference(eia, intensity);
      s.field = 0.01;
      const Liouvillian L = build_liouvillian(s);
      const CVector y = steady_state(L);
      const CMatrix sigma = devectorize(y, L.levels);
      const auto p = projectors(s.fg, s.fe);
      const double excited = (p.excited * sigma).trace().real();
      const double w = absorption(y, L);
      CHECK(w > 0.0);
      CHECK(0.5 * s.rabi * w == doctest::Approx((1.0 + s.gamma) * excited).epsilon(1e-9));
      CHECK(absorption(sigma, s) == doctest::Approx(w).epsilon(1e-12));
    }
}

TEST_CASE("intensity conventions") {
  const TransitionSpec eit = TransitionSpec::eit().with_intensity(0.06);
  CHECK(eit.rabi * eit.rabi == doctest::Approx(0.18));
  CHECK(eit.intensity() == doctest::Approx(0.06));
  const TransitionSpec raw = TransitionSpec::eia().with_intensity(0.06, RabiConvention::sum_rule);
  CHECK(raw.rabi * raw.rabi == doctest::Approx(0.06));
  CHECK(raw.with_rabi2(0.5).effective_rabi2() == doctest::Approx(0.5));
  TransitionSpec scaled = raw;
  scaled.dipole_scale = 2.5;
  CHECK(scaled.effective_rabi2() == doctest::Approx(0.15));
}

TEST_CASE("invalid specs are rejected") {
  TransitionSpec s = TransitionSpec::eit();
  s.gamma = -1.0;
  CHECK_THROWS_AS(build_liouvillian(s), std::invalid_argument);
  s = TransitionSpec::eit();
  s.fe = AngMom(3.0);
  CHECK_THROWS_AS(build_liouvillian(s), std::invalid_argument);
  s = TransitionSpec::eit();
  s.dipole_scale = 0.0;
  CHECK_THROWS_AS(build_liouvillian(s), std::invalid_argument);
  CHECK_THROWS_AS(TransitionSpec::eit().with_rabi2(-1.0), std::invalid_argument);
  s = TransitionSpec::eit();
  CHECK_FALSE(s.warning());
  s.gamma = 0.2;
  CHECK(s.warning());
}
