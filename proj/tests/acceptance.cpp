// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hanle/commands.hpp"
#include "hanle/config.hpp"
#include "hanle/dynamics.hpp"
#include "hanle/fit.hpp"
#include "hanle/spectral.hpp"

using namespace hanle;

namespace {

const std::vector<double> kIntensities{2e-3, 6e-3, 0.02, 0.06, 2.0};
constexpr double kGamma = 0.002;
constexpr double kB1 = 0.03;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

RunConfig preset(const std::string& name) { return resolve_config("", name, Json::object()); }

std::vector<EigenMode> transient_modes(const TransitionSpec& s, double target, double origin) {
  return switched_modes(build_liouvillian(s.with_field(target)),
                        build_liouvillian(s.with_field(origin)));
}

Outcome dimensions() {
  const auto a = build_liouvillian(TransitionSpec::eit()).M.rows();
  const auto b = build_liouvillian(TransitionSpec::eia()).M.rows();
  return {a == 16 && b == 64, "n = " + std::to_string(a) + ", " + std::to_string(b)};
}

Outcome constant_eigenvalue() {
  bool ok = true;
  double worst = 0.0;
  for (const TransitionSpec& base : {TransitionSpec::eit(), TransitionSpec::eia()})
    for (double I : kIntensities)
      for (double b : {0.0, kB1 / base.beta_g}) {
        const TransitionSpec s = base.with_intensity(I);
        const auto modes = transient_modes(s, b, b == 0.0 ? kB1 : 0.0);
        double nearest = 1e300;
        for (const auto& m : modes) {
          const double d = std::abs(m.lambda + s.gamma) / s.gamma;
          nearest = std::min(nearest, d);
          if (b == 0.0 && d <= 1e-10 && m.observable) ok = false;
        }
        worst = std::max(worst, nearest);
        if (nearest > 1e-10) ok = false;
      }
  return {ok, fmt("max |lambda+gamma|/gamma = %.2e", worst)};
}

Outcome oracle_equivalence(std::vector<CMatrix>* rk_states) {
  double worst = 0.0;
  for (const char* name : {"fig5e", "fig6e"}) {
    const RunConfig c = preset(name);
    SwitchSchedule sch = c.schedule;
    sch.period = 2.0 * 5.0 / kGamma;
    sch.duty = 0.5;
    const TransientTrace modal = switched_transient(c.spec, sch, Propagator::modal);
    const TransientTrace rk = switched_transient(c.spec, sch, Propagator::integrated, 0.01);
    for (std::size_t i = 0; i < modal.size(); ++i)
      worst = std::max(worst, std::abs(modal.w[i] - rk.w[i]));
    rk_states->push_back(switched_states(c.spec, sch, Propagator::integrated, 0.01));
  }
  return {worst <= 1e-8, fmt("max |w_modal - w_rk4| = %.2e", worst)};
}

Outcome physicality_all(const std::vector<CMatrix>& rk_states) {
  double drift = 0.0, min_eig = 1e300;
  for (const Preset& p : presets()) {
    if (p.command != "transient") continue;
    const RunConfig c = preset(p.name);
    const PhysicalityReport r =
        physicality(switched_states(c.spec, c.schedule, Propagator::modal), LevelBasis(c.spec.fg, c.spec.fe).size());
    drift = std::max(drift, r.max_trace_error);
    min_eig = std::min(min_eig, r.min_eigenvalue);
  }
  for (const CMatrix& states : rk_states) {
    const int levels = static_cast<int>(std::lround(std::sqrt(static_cast<double>(states.rows()))));
    const PhysicalityReport r = physicality(states, levels);
    drift = std::max(drift, r.max_trace_error);
    min_eig = std::min(min_eig, r.min_eigenvalue);
  }
  return {drift <= 1e-8 && min_eig >= -1e-7,
          fmt("trace drift %.2e", drift) + fmt(", min eigenvalue %.2e", min_eig)};
}

FitResult fit_b1_phase(const RunConfig& c, bool force_c_zero) {
  const TransientTrace tr = switched_transient(c.spec, c.schedule, c.propagator, c.dt);
  return fit(tr.slice(c.schedule.b0_duration(), c.schedule.period), FitModel::damped_sine(force_c_zero));
}

Outcome oscillation_frequency() {
  const double beta_eit = fit_b1_phase(preset("fig5a"), false).value("beta");
  const double beta_eia = fit_b1_phase(preset("fig6a"), true).value("beta");
  const bool ok = std::abs(beta_eit / 0.06 - 1.0) <= 0.05 && std::abs(beta_eia / 0.06 - 1.0) <= 0.05;
  return {ok, fmt("beta EIT %.5f", beta_eit) + fmt(", EIA %.5f", beta_eia)};
}

Outcome zeno_slowdown() {
  const RunConfig c = preset("fig7a");
  const auto rows = intensity_sweep(c.spec, c.intensities, c.schedule.b1, c.convention);
  // Signed minimum of the slow real eigenvalue.
  double best = 1e300, ic = 0.0;
  for (double I : c.intensities) {
    const SweepRow* r = slowest_real_observable(rows, I, FieldCase::on, c.spec.gamma);
    if (r && r->lambda.real() < best) {
      best = r->lambda.real();
      ic = I;
    }
  }
  const double eta1 = fit_b1_phase(preset("fig5e"), false).value("eta1");

  const RunConfig eia = preset("fig6e");
  double slowest = 1e300;
  for (const auto& m : transient_modes(eia.spec, eia.schedule.b1, eia.schedule.b0))
    if (m.observable) slowest = std::min(slowest, std::abs(m.lambda.real()));

  const bool ok = ic >= 0.05 && ic <= 0.2 && eta1 >= 0.5 * kGamma && eta1 <= 2.0 * kGamma &&
                  slowest > 5.0 * kGamma;
  return {ok, fmt("I_c = %.4g", ic) + fmt(", EIT eta1 = %.3g", eta1) +
                  fmt(", EIA slowest decay = %.3g", slowest)};
}

Outcome eia_monotonic() {
  const RunConfig c = preset("fig7b");
  const auto rows = observable_group1(intensity_sweep(c.spec, c.intensities, c.schedule.b1, c.convention));
  int violations = 0;
  for (FieldCase bc : {FieldCase::zero, FieldCase::on}) {
    std::vector<cplx> prev;
    for (double I : c.intensities) {
      std::vector<cplx> cur;
      for (const auto& r : rows)
        if (r.intensity == I && r.b_case == bc) cur.push_back(r.lambda);
      for (cplx l : cur) {
        if (prev.empty()) break;
        cplx match = prev.front();
        for (cplx p : prev)
          if (std::abs(p - l) < std::abs(match - l)) match = p;
        if (std::abs(l.real()) < std::abs(match.real()) * (1.0 - 1e-9)) ++violations;
      }
      prev = cur;
    }
  }
  return {violations == 0, std::to_string(violations) + " decreasing branch steps over " +
                               std::to_string(c.intensities.size()) + " intensities"};
}

std::vector<cplx> sorted_observable(const std::vector<EigenMode>& modes) {
  std::vector<cplx> out;
  for (const auto& m : modes)
    if (m.observable && m.group == 1) out.push_back(m.lambda);
  std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
    return std::abs(a.real() - b.real()) > 1e-9 ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

Outcome open_lambda() {
  auto lam = [](double rabi, double zeeman) {
    OpenLambdaSpec o;
    o.rabi = rabi;
    o.gamma = kGamma;
    o.zeeman = zeeman;
    o.alpha = 1.0 / 3.0;
    return o;
  };
  double worst = 0.0;
  bool ok = true;
  for (double I : {2e-3, 0.06, 2.0})
    for (double b : {0.0, kB1}) {
      const TransitionSpec s = TransitionSpec::eit().with_intensity(I);
      const double origin = b == 0.0 ? kB1 : 0.0;
      const auto full = sorted_observable(transient_modes(s, b, origin));
      const auto open = sorted_observable(switched_modes(open_lambda_liouvillian(lam(s.rabi, b)),
                                                         open_lambda_liouvillian(lam(s.rabi, origin))));
      if (full.size() != open.size()) {
        ok = false;
        continue;
      }
      for (std::size_t k = 0; k < full.size(); ++k) worst = std::max(worst, std::abs(full[k] - open[k]));
    }
  ok = ok && worst <= 1e-6;

  std::vector<double> ks;
  for (int k = 0; k < 8; ++k) {
    const double omega2 = 1e-3 * std::pow(0.5, k);
    double shift = 1e300;
    for (const auto& m : switched_modes(open_lambda_liouvillian(lam(std::sqrt(omega2), 0.0)),
                                        open_lambda_liouvillian(lam(std::sqrt(omega2), kB1))))
      if (m.observable && m.group == 1 && std::abs(m.lambda.imag()) < 1e-12)
        shift = std::min(shift, std::abs(m.lambda + kGamma));
    ks.push_back(shift / omega2);
  }
  const double k_last = ks.back(), k_prev = ks[ks.size() - 2];
  const bool stable = std::abs(k_last - k_prev) <= 0.05 * k_last && std::isfinite(k_last);
  return {ok && stable, fmt("max eigenvalue mismatch %.2e", worst) + fmt(", K = %.4g", k_last) +
                            fmt(" (previous %.4g)", k_prev)};
}

Outcome hanle_contrast() {
  bool ok = true;
  double worst = 1e300;
  for (const TransitionSpec& base : {TransitionSpec::eit(), TransitionSpec::eia()})
    for (double I : kIntensities) {
      const std::vector<double> fields{0.0, kB1};
      const auto w = hanle_scan(base.with_intensity(I), fields);
      const bool eit = base.fe.twice() < base.fg.twice();
      const double margin = eit ? w[1] - w[0] : w[0] - w[1];
      worst = std::min(worst, margin / std::abs(w[1]));
      if (!(margin > 0.0)) ok = false;
    }
  return {ok, fmt("smallest relative contrast %.3g", worst)};
}

Outcome fit_round_trip() {
  const FitModel m = FitModel::damped_sine();
  Eigen::VectorXd p(7);
  p << 0.5, 0.002, 1.0, 0.01, 0.06, 0.3, 0.0;
  std::vector<double> t, y;
  for (int k = 0; k < 2000; ++k) {
    t.push_back(1.25 * k);
    y.push_back(m.evaluate(p, t.back()));
  }
  auto rel = [&](const Eigen::VectorXd& q, int n) {
    double d = 0.0;
    for (int k = 0; k < n; ++k) d = std::max(d, std::abs(q(k) / p(k) - 1.0));
    return d;
  };
  const double clean = rel(fit(t, y, m).params, 6);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> errs;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> yn = y;
    for (double& v : yn) v += noise(rng);
    errs.push_back(rel(fit(t, yn, m).params, 5));
  }
  std::sort(errs.begin(), errs.end());
  return {clean <= 1e-6 && errs[94] <= 0.05,
          fmt("noiseless %.2e", clean) + fmt(", noisy p95 %.3g", errs[94])};
}

Outcome transit() {
  const double tau = transit_time(0.01, 330.0, isotope_mass("Rb87")) * 1e6;
  return {std::abs(tau / 40.0 - 1.0) <= 0.1, fmt("tau = %.3f us", tau)};
}

std::string run_preset(const Preset& p) {
  std::vector<std::string> args{"hanle", p.command, "--preset", p.name};
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return std::to_string(code) + "\n" + out.str() + err.str();
}

Outcome determinism() {
  int differing = 0;
  for (const Preset& p : presets())
    if (run_preset(p) != run_preset(p)) ++differing;
  return {differing == 0,
          std::to_string(presets().size()) + " presets, " + std::to_string(differing) + " differing"};
}

}  // namespace

int main() {
  std::vector<CMatrix> rk_states;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Liouvillian dimensions", dimensions},
      {"constant eigenvalue -gamma", constant_eigenvalue},
      {"modal vs integrator", [&] { return oracle_equivalence(&rk_states); }},
      {"physicality", [&] { return physicality_all(rk_states); }},
      {"oscillation frequency", oscillation_frequency},
      {"Zeno slowdown", zeno_slowdown},
      {"EIA monotonicity", eia_monotonic},
      {"open Lambda equivalence", open_lambda},
      {"Hanle contrast signs", hanle_contrast},
      {"fit round trip", fit_round_trip},
      {"transit time", transit},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("%s %2zu %-26s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
