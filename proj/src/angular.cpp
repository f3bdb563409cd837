#include "hanle/angular.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

namespace hanle {

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

cpp_int factorial(int n) {
  cpp_int r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

bool valid_projection(AngMom j, int tm) {
  return std::abs(tm) <= j.twice() && ((j.twice() - tm) % 2 == 0);
}

}  // namespace

AngMom::AngMom(double f) {
  const double twice = 2.0 * f;
  const double rounded = std::round(twice);
  if (f < 0.0 || std::abs(twice - rounded) > 1e-12)
    throw std::invalid_argument("angular momentum must be a non-negative multiple of 1/2");
  twice_f_ = static_cast<int>(rounded);
}

AngMom AngMom::from_twice(int twice_f) {
  if (twice_f < 0) throw std::invalid_argument("angular momentum must be non-negative");
  return AngMom(0.5 * twice_f);
}

std::vector<int> AngMom::twice_projections() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(multiplicity()));
  for (int tm = -twice_f_; tm <= twice_f_; tm += 2) out.push_back(tm);
  return out;
}

double wigner3j_twice(AngMom j1, AngMom j2, AngMom j3, int tm1, int tm2, int tm3) {
  if (tm1 + tm2 + tm3 != 0) return 0.0;
  if (!valid_projection(j1, tm1) || !valid_projection(j2, tm2) || !valid_projection(j3, tm3))
    return 0.0;
  const int a = j1.twice(), b = j2.twice(), c = j3.twice();
  if ((a + b + c) % 2 != 0) return 0.0;
  if (c > a + b || c < std::abs(a - b)) return 0.0;

  // Integer-valued combinations (all halved from the doubled representation).
  const int s_abc = (a + b - c) / 2;
  const int s_acb = (a - b + c) / 2;
  const int s_bca = (-a + b + c) / 2;
  const int s_all = (a + b + c) / 2;
  const int j1p = (a + tm1) / 2, j1m = (a - tm1) / 2;
  const int j2p = (b + tm2) / 2, j2m = (b - tm2) / 2;
  const int j3p = (c + tm3) / 2, j3m = (c - tm3) / 2;

  // Terms of the Racah sum: k!, (j3-j2+m1+k)!, (j3-j1-m2+k)!, (j1+j2-j3-k)!,
  // (j1-m1-k)!, (j2+m2-k)!.
  const int t1 = (c - b + tm1) / 2;
  const int t2 = (c - a - tm2) / 2;
  const int kmin = std::max({0, -t1, -t2});
  const int kmax = std::min({s_abc, j1m, j2p});

  cpp_rational sum = 0;
  for (int k = kmin; k <= kmax; ++k) {
    cpp_int den = factorial(k) * factorial(t1 + k) * factorial(t2 + k) * factorial(s_abc - k) *
                  factorial(j1m - k) * factorial(j2p - k);
    cpp_rational term(cpp_int(1), den);
    if (k % 2 != 0) term = -term;
    sum += term;
  }
  if (sum == 0) return 0.0;

  const cpp_rational triangle(factorial(s_abc) * factorial(s_acb) * factorial(s_bca),
                              factorial(s_all + 1));
  const cpp_int projections = factorial(j1p) * factorial(j1m) * factorial(j2p) *
                              factorial(j2m) * factorial(j3p) * factorial(j3m);
  const cpp_rational squared = triangle * cpp_rational(projections) * sum * sum;
  const double magnitude = std::sqrt(squared.convert_to<double>());

  // (-1)^(j1 - j2 - m3); the exponent is an integer by the selection rules.
  const int phase_exp = (a - b - tm3) / 2;
  const double phase = (phase_exp % 2 == 0) ? 1.0 : -1.0;
  return phase * (sum > 0 ? 1.0 : -1.0) * magnitude;
}

double wigner3j(AngMom j1, AngMom j2, AngMom j3, double m1, double m2, double m3) {
  auto twice = [](double m, int& out) {
    const double r = std::round(2.0 * m);
    if (std::abs(2.0 * m - r) > 1e-12) return false;
    out = static_cast<int>(r);
    return true;
  };
  int tm1 = 0, tm2 = 0, tm3 = 0;
  if (!twice(m1, tm1) || !twice(m2, tm2) || !twice(m3, tm3)) return 0.0;
  return wigner3j_twice(j1, j2, j3, tm1, tm2, tm3);
}

LevelBasis::LevelBasis(AngMom fg, AngMom fe) : fg_(fg), fe_(fe) {}

int LevelBasis::ground_index(int twice_m) const {
  if (!valid_projection(fg_, twice_m)) throw std::out_of_range("ground projection out of range");
  return (twice_m + fg_.twice()) / 2;
}

int LevelBasis::excited_index(int twice_m) const {
  if (!valid_projection(fe_, twice_m)) throw std::out_of_range("excited projection out of range");
  return ground_count() + (twice_m + fe_.twice()) / 2;
}

double LevelBasis::projection(int index) const {
  if (index < 0 || index >= size()) throw std::out_of_range("basis index out of range");
  if (index < ground_count()) return -fg_.value() + index;
  return -fe_.value() + (index - ground_count());
}

OperatorMatrix q_matrix(AngMom fg, AngMom fe, int q) {
  if (q < -1 || q > 1) throw std::invalid_argument("q must be -1, 0 or +1");
  if (std::abs(fg.twice() - fe.twice()) > 2 || (fg.twice() == 0 && fe.twice() == 0))
    throw std::invalid_argument("dipole transition violates the triangle rule");
  const LevelBasis basis(fg, fe);
  const AngMom one(1.0);
  OperatorMatrix out = OperatorMatrix::Zero(basis.size(), basis.size());
  for (int tme : fe.twice_projections()) {
    const int tmg = tme + 2 * q;
    if (std::abs(tmg) > fg.twice()) continue;
    const int phase_exp = (fg.twice() - tmg) / 2;
    const double phase = (phase_exp % 2 == 0) ? 1.0 : -1.0;
    const double value = phase * wigner3j_twice(fg, one, fe, -tmg, 2 * q, tme);
    out(basis.ground_index(tmg), basis.excited_index(tme)) = value;
  }
  return out;
}

OperatorMatrix fz_matrix(AngMom fg, AngMom fe) {
  const LevelBasis basis(fg, fe);
  OperatorMatrix out = OperatorMatrix::Zero(basis.size(), basis.size());
  for (int i = 0; i < basis.size(); ++i) out(i, i) = basis.projection(i);
  return out;
}

Projectors projectors(AngMom fg, AngMom fe) {
  const LevelBasis basis(fg, fe);
  Projectors p{OperatorMatrix::Zero(basis.size(), basis.size()),
               OperatorMatrix::Zero(basis.size(), basis.size())};
  for (int i = 0; i < basis.size(); ++i) {
    if (basis.is_excited(i))
      p.excited(i, i) = 1.0;
    else
      p.ground(i, i) = 1.0;
  }
  return p;
}

Polarization Polarization::linear_x() {
  const double s = 1.0 / std::sqrt(2.0);
  return Polarization(Kind::linear_x, {cplx(s, 0), cplx(0, 0), cplx(-s, 0)});
}

Polarization Polarization::linear_y() {
  const double s = 1.0 / std::sqrt(2.0);
  return Polarization(Kind::linear_y, {cplx(0, s), cplx(0, 0), cplx(0, s)});
}

Polarization Polarization::sigma_plus() {
  return Polarization(Kind::sigma_plus, {cplx(0, 0), cplx(0, 0), cplx(1, 0)});
}

Polarization Polarization::sigma_minus() {
  return Polarization(Kind::sigma_minus, {cplx(1, 0), cplx(0, 0), cplx(0, 0)});
}

Polarization Polarization::general(const std::array<cplx, 3>& spherical) {
  double norm2 = 0.0;
  for (const auto& c : spherical) norm2 += std::norm(c);
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12)
    throw std::invalid_argument("polarization vector must have unit norm");
  return Polarization(Kind::general, spherical);
}

Polarization Polarization::from_name(const std::string& name) {
  if (name == "linear-x") return linear_x();
  if (name == "linear-y") return linear_y();
  if (name == "sigma+") return sigma_plus();
  if (name == "sigma-") return sigma_minus();
  throw std::invalid_argument("unknown polarization '" + name + "'");
}

std::string Polarization::name() const {
  switch (kind_) {
    case Kind::linear_x: return "linear-x";
    case Kind::linear_y: return "linear-y";
    case Kind::sigma_plus: return "sigma+";
    case Kind::sigma_minus: return "sigma-";
    case Kind::general: return "general";
  }
  return "general";
}

}  // namespace hanle
