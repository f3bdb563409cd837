#include "hanle/fit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "hanle/errors.hpp"
#include "hanle/kernels.hpp"

namespace hanle {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Reported parameter slots.
enum Y1 { y1_a, y1_eta2, y1_off, y1_count };
enum Y2 { y2_c, y2_eta1, y2_d, y2_eta3, y2_beta, y2_phi, y2_off, y2_count };

// The optimized vector x holds amplitudes, phases and offset as they are and
// rates as logarithms. `slots` maps x entries to reported slots.
struct Layout {
  std::vector<int> slots;
  std::vector<bool> log_scaled;
  int reported = 0;
};

Layout layout_for(const FitModel& m) {
  Layout l;
  if (m.kind == FitKind::single_exp) {
    l.slots = {y1_a, y1_eta2, y1_off};
    l.log_scaled = {false, true, false};
    l.reported = y1_count;
  } else if (m.force_c_zero) {
    l.slots = {y2_d, y2_eta3, y2_beta, y2_phi, y2_off};
    l.log_scaled = {false, true, true, false, false};
    l.reported = y2_count;
  } else {
    l.slots = {y2_c, y2_eta1, y2_d, y2_eta3, y2_beta, y2_phi, y2_off};
    l.log_scaled = {false, true, false, true, true, false, false};
    l.reported = y2_count;
  }
  return l;
}

VectorXd to_reported(const Layout& l, const VectorXd& x) {
  VectorXd p = VectorXd::Zero(l.reported);
  for (std::size_t k = 0; k < l.slots.size(); ++k)
    p(l.slots[k]) = l.log_scaled[k] ? std::exp(x(static_cast<Eigen::Index>(k)))
                                    : x(static_cast<Eigen::Index>(k));
  return p;
}

VectorXd to_free(const Layout& l, const VectorXd& p) {
  VectorXd x(static_cast<Eigen::Index>(l.slots.size()));
  for (std::size_t k = 0; k < l.slots.size(); ++k) {
    const double v = p(l.slots[k]);
    x(static_cast<Eigen::Index>(k)) =
        l.log_scaled[k] ? std::log(std::max(v, std::numeric_limits<double>::min())) : v;
  }
  return x;
}

// Residual f(x) - y and its Jacobian with respect to x.
struct Problem {
  std::span<const double> t;
  std::span<const double> y;
  FitModel model;
  Layout layout;

  VectorXd residual(const VectorXd& x) const {
    const VectorXd p = to_reported(layout, x);
    VectorXd r(static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i)
      r(static_cast<Eigen::Index>(i)) = model.evaluate(p, t[i]) - y[i];
    return r;
  }

  MatrixXd jacobian(const VectorXd& x) const {
    const VectorXd p = to_reported(layout, x);
    const auto n = static_cast<Eigen::Index>(t.size());
    MatrixXd full(n, layout.reported);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ti = t[static_cast<std::size_t>(i)];
      if (model.kind == FitKind::single_exp) {
        const double e = std::exp(-p(y1_eta2) * ti);
        full(i, y1_a) = e;
        full(i, y1_eta2) = -p(y1_a) * ti * e;
        full(i, y1_off) = 1.0;
      } else {
        const double e1 = std::exp(-p(y2_eta1) * ti);
        const double e3 = std::exp(-p(y2_eta3) * ti);
        const double arg = p(y2_beta) * ti + p(y2_phi);
        const double s = std::sin(arg), c = std::cos(arg);
        full(i, y2_c) = e1;
        full(i, y2_eta1) = -p(y2_c) * ti * e1;
        full(i, y2_d) = e3 * s;
        full(i, y2_eta3) = -p(y2_d) * ti * e3 * s;
        full(i, y2_beta) = p(y2_d) * e3 * c * ti;
        full(i, y2_phi) = p(y2_d) * e3 * c;
        full(i, y2_off) = 1.0;
      }
    }
    // Chain rule for log-scaled entries: d/du = v d/dv.
    MatrixXd J(n, static_cast<Eigen::Index>(layout.slots.size()));
    for (std::size_t k = 0; k < layout.slots.size(); ++k) {
      const auto col = static_cast<Eigen::Index>(k);
      J.col(col) = full.col(layout.slots[k]);
      if (layout.log_scaled[k]) J.col(col) *= p(layout.slots[k]);
    }
    return J;
  }
};

struct Run {
  VectorXd x;
  double cost = std::numeric_limits<double>::infinity();
  double gradient = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// Levenberg-Marquardt with Marquardt's diagonal scaling.
Run levenberg_marquardt(const Problem& pr, VectorXd x, const FitOptions& opt) {
  double y_norm = 0.0;
  for (double v : pr.y) y_norm += v * v;
  y_norm = std::sqrt(y_norm);

  Run run;
  VectorXd r = pr.residual(x);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  for (int it = 0;; ++it) {
    const MatrixXd J = pr.jacobian(x);
    const VectorXd g = J.transpose() * r;
    const double scale = std::max(J.norm() * y_norm, std::numeric_limits<double>::min());
    run.gradient = g.cwiseAbs().maxCoeff() / scale;
    run.iterations = it;
    if (!std::isfinite(cost)) break;
    if (run.gradient <= opt.gradient_tolerance) {
      run.converged = true;
      break;
    }
    if (it >= opt.max_iterations) break;

    const MatrixXd A = J.transpose() * J;
    VectorXd diag = A.diagonal();
    const double floor = 1e-12 * std::max(diag.maxCoeff(), 1e-300);
    diag = diag.cwiseMax(floor);
    bool accepted = false;
    while (lambda < 1e16) {
      MatrixXd damped = A;
      damped.diagonal() += lambda * diag;
      const VectorXd step = damped.ldlt().solve(-g);
      const VectorXd x_new = x + step;
      const VectorXd r_new = pr.residual(x_new);
      const double cost_new = r_new.squaredNorm();
      if (std::isfinite(cost_new) && cost_new < cost) {
        x = x_new;
        r = r_new;
        cost = cost_new;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      run.iterations = it + 1;
      // No descent possible: report the gradient at the final point.
      const VectorXd g_end = pr.jacobian(x).transpose() * r;
      run.gradient = g_end.cwiseAbs().maxCoeff() / scale;
      run.converged = run.gradient <= opt.gradient_tolerance;
      break;
    }
  }
  run.x = x;
  run.cost = cost;
  return run;
}

double span_of(std::span<const double> t) { return t.back() - t.front(); }

// Linear amplitudes for fixed rates and frequency; returns the reported
// parameter vector and the residual sum of squares.
std::pair<VectorXd, double> linear_projection(const Problem& pr, double eta_a, double eta3,
                                              double beta) {
  const auto n = static_cast<Eigen::Index>(pr.t.size());
  const bool y1 = pr.model.kind == FitKind::single_exp;
  const bool with_c = !y1 && !pr.model.force_c_zero;
  const int cols = y1 ? 2 : (with_c ? 4 : 3);
  MatrixXd B(n, cols);
  VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ti = pr.t[static_cast<std::size_t>(i)];
    y(i) = pr.y[static_cast<std::size_t>(i)];
    int c = 0;
    if (y1 || with_c) B(i, c++) = std::exp(-eta_a * ti);
    if (!y1) {
      const double e3 = std::exp(-eta3 * ti);
      B(i, c++) = e3 * std::sin(beta * ti);
      B(i, c++) = e3 * std::cos(beta * ti);
    }
    B(i, c) = 1.0;
  }
  const VectorXd coef = B.colPivHouseholderQr().solve(y);
  const double rss = (B * coef - y).squaredNorm();
  VectorXd p = VectorXd::Zero(pr.layout.reported);
  if (y1) {
    p << coef(0), eta_a, coef(1);
  } else {
    int c = 0;
    if (with_c) {
      p(y2_c) = coef(c++);
      p(y2_eta1) = eta_a;
    }
    const double cs = coef(c++), cc = coef(c++);
    p(y2_d) = std::hypot(cs, cc);
    p(y2_phi) = std::atan2(cc, cs);
    p(y2_eta3) = eta3;
    p(y2_beta) = beta;
    p(y2_off) = coef(c);
  }
  return {p, rss};
}

// Slope of log(max |y|) over windows one oscillation period long.
double envelope_rate(std::span<const double> t, std::span<const double> y, double beta) {
  const std::size_t n = t.size();
  const double dt = span_of(t) / static_cast<double>(n - 1);
  const auto window = static_cast<std::size_t>(
      std::max(2.0, std::round(2.0 * std::numbers::pi / (beta * dt))));
  std::vector<double> tc, le;
  for (std::size_t start = 0; start + window < n; start += window) {
    double peak = 0.0;
    for (std::size_t k = start; k < start + window; ++k)
      peak = std::max(peak, std::abs(y[k]));
    if (peak > 0.0) {
      tc.push_back(t[start] + 0.5 * window * dt);
      le.push_back(std::log(peak));
    }
  }
  if (tc.size() < 3) return kNaN;
  const auto m = static_cast<double>(tc.size());
  double st = 0, sl = 0, stt = 0, stl = 0;
  for (std::size_t k = 0; k < tc.size(); ++k) {
    st += tc[k];
    sl += le[k];
    stt += tc[k] * tc[k];
    stl += tc[k] * le[k];
  }
  const double slope = (m * stl - st * sl) / (m * stt - st * st);
  return -slope;
}

// Log-linear decay estimate of |y - tail| over its early part.
double exponential_rate(std::span<const double> t, std::span<const double> y) {
  const std::size_t n = y.size();
  const std::size_t tail_len = std::max<std::size_t>(1, n / 10);
  double tail = 0.0;
  for (std::size_t k = n - tail_len; k < n; ++k) tail += y[k];
  tail /= static_cast<double>(tail_len);
  const double first = std::abs(y[0] - tail);
  if (!(first > 0.0)) return kNaN;
  double st = 0, sl = 0, stt = 0, stl = 0, m = 0;
  for (std::size_t k = 0; k < n - tail_len; ++k) {
    const double d = std::abs(y[k] - tail);
    if (d < 0.1 * first) break;
    const double l = std::log(d);
    st += t[k];
    sl += l;
    stt += t[k] * t[k];
    stl += t[k] * l;
    m += 1.0;
  }
  if (m < 3.0) return kNaN;
  return -(m * stl - st * sl) / (m * stt - st * st);
}

void canonicalize(const FitModel& model, VectorXd& p) {
  if (model.kind != FitKind::exp_plus_damped_sine) return;
  if (p(y2_d) < 0.0) {
    p(y2_d) = -p(y2_d);
    p(y2_phi) += std::numbers::pi;
  }
  p(y2_phi) = std::remainder(p(y2_phi), 2.0 * std::numbers::pi);
  if (p(y2_phi) <= -std::numbers::pi) p(y2_phi) += 2.0 * std::numbers::pi;
}

VectorXd uncertainties_of(const Problem& pr, const VectorXd& x, double cost) {
  const MatrixXd J = pr.jacobian(x);
  const auto n = J.rows(), k = J.cols();
  VectorXd out = VectorXd::Constant(pr.layout.reported, 0.0);
  const double s2 = n > k ? cost / static_cast<double>(n - k) : kNaN;
  Eigen::JacobiSVD<MatrixXd> svd(J, Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();
  const double cutoff = 1e-12 * sv(0);
  const bool full_rank = sv(k - 1) > cutoff;
  const VectorXd p = to_reported(pr.layout, x);
  for (Eigen::Index j = 0; j < k; ++j) {
    double var = 0.0;
    for (Eigen::Index m = 0; m < k; ++m)
      if (sv(m) > cutoff) var += std::pow(svd.matrixV()(j, m) / sv(m), 2);
    const int slot = pr.layout.slots[static_cast<std::size_t>(j)];
    double sd = full_rank ? std::sqrt(s2 * var) : kNaN;
    if (pr.layout.log_scaled[static_cast<std::size_t>(j)]) sd *= p(slot);
    out(slot) = sd;
  }
  return out;
}

// Residual after the best A exp(-eta t) + c over a log grid of rates.
std::vector<double> detrend(std::span<const double> t, std::span<const double> y) {
  const auto n = static_cast<Eigen::Index>(t.size());
  const double T = span_of(t);
  VectorXd yv(n);
  for (Eigen::Index i = 0; i < n; ++i) yv(i) = y[static_cast<std::size_t>(i)];
  double best_rss = std::numeric_limits<double>::infinity();
  VectorXd best = yv;
  for (double f = 0.25; f <= 1024.0; f *= 2.0) {
    MatrixXd B(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      B(i, 0) = std::exp(-f / T * (t[static_cast<std::size_t>(i)] - t.front()));
      B(i, 1) = 1.0;
    }
    const VectorXd res = yv - B * B.colPivHouseholderQr().solve(yv);
    const double rss = res.squaredNorm();
    if (rss < best_rss) {
      best_rss = rss;
      best = res;
    }
  }
  return {best.data(), best.data() + n};
}

}  // namespace

FitModel FitModel::from_name(const std::string& name, bool force_c_zero) {
  if (name == "single_exp" || name == "y1") return single_exp();
  if (name == "exp_plus_damped_sine" || name == "y2") return damped_sine(force_c_zero);
  throw ConfigError("unknown fit model '" + name + "' (expected single_exp or exp_plus_damped_sine)");
}

std::string FitModel::name() const {
  return kind == FitKind::single_exp ? "single_exp" : "exp_plus_damped_sine";
}

std::vector<std::string> FitModel::parameter_names() const {
  if (kind == FitKind::single_exp) return {"A", "eta2", "offset"};
  return {"C", "eta1", "D", "eta3", "beta", "phi", "offset"};
}

int FitModel::free_parameters() const {
  return static_cast<int>(layout_for(*this).slots.size());
}

double FitModel::evaluate(const Eigen::VectorXd& p, double t) const {
  if (kind == FitKind::single_exp) return p(y1_a) * std::exp(-p(y1_eta2) * t) + p(y1_off);
  return p(y2_c) * std::exp(-p(y2_eta1) * t) +
         p(y2_d) * std::exp(-p(y2_eta3) * t) * std::sin(p(y2_beta) * t + p(y2_phi)) + p(y2_off);
}

double FitResult::value(const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k] == name) return params(static_cast<Eigen::Index>(k));
  throw std::out_of_range("no fit parameter '" + name + "'");
}

double FitResult::uncertainty(const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k] == name) return uncertainties(static_cast<Eigen::Index>(k));
  throw std::out_of_range("no fit parameter '" + name + "'");
}

double dominant_frequency(std::span<const double> t, std::span<const double> y) {
  const std::vector<double> peaks = spectral_peaks(t, y, 1);
  return peaks.empty() ? 0.0 : peaks.front();
}

std::vector<double> spectral_peaks(std::span<const double> t, std::span<const double> y,
                                   std::size_t count) {
  if (t.size() != y.size() || t.size() < 4)
    throw std::invalid_argument("need at least four equally long samples");
  const std::vector<double> r = detrend(t, y);
  // Long records are block-averaged down to at most 4096 samples.
  const std::size_t block = (r.size() + 4095) / 4096;
  const std::size_t n = r.size() / block;
  const double dt = span_of(t) / static_cast<double>(t.size() - 1) * static_cast<double>(block);
  std::vector<double> d(n, 0.0);
  double mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < block; ++j) d[k] += r[k * block + j];
    d[k] /= static_cast<double>(block);
    mean += d[k];
  }
  mean /= static_cast<double>(n);
  for (double& v : d) v -= mean;

  // Twofold zero padding up to the Nyquist frequency.
  const std::size_t bins = n;
  const double base = std::numbers::pi / (static_cast<double>(n) * dt);
  std::vector<double> power(bins + 2, 0.0);
  for (std::size_t j = 1; j <= bins; ++j) {
    const std::complex<double> rot = std::polar(1.0, -base * static_cast<double>(j) * dt);
    std::complex<double> phase(1.0, 0.0), acc(0.0, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      acc += d[k] * phase;
      phase *= rot;
    }
    power[j] = std::norm(acc);
  }
  std::vector<std::pair<double, double>> found;  // (power, refined frequency)
  for (std::size_t j = 1; j <= bins; ++j) {
    const double a = power[j - 1], b = power[j], c = power[j + 1];
    if (!(b > 0.0) || b < a || b < c) continue;
    double shift = 0.0;
    const double den = a - 2.0 * b + c;
    if (j > 1 && den < 0.0) shift = 0.5 * (a - c) / den;
    found.emplace_back(b, base * (static_cast<double>(j) + shift));
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const auto& x, const auto& z) { return x.first > z.first; });
  std::vector<double> out;
  for (std::size_t i = 0; i < std::min(count, found.size()); ++i) out.push_back(found[i].second);
  return out;
}

FitResult fit(std::span<const double> t, std::span<const double> y, const FitModel& model,
              const FitOptions& options) {
  if (t.size() != y.size()) throw std::invalid_argument("time and signal lengths differ");
  const Layout layout = layout_for(model);
  const auto k = static_cast<std::size_t>(layout.slots.size());
  if (t.size() < 10 * k)
    throw std::invalid_argument("fit needs at least " + std::to_string(10 * k) +
                                " samples for model " + model.name());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(y[i]))
      throw std::invalid_argument("non-finite sample in fit input");
    if (i > 0 && !(t[i] > t[i - 1])) throw std::invalid_argument("fit times must increase");
  }

  FitResult res;
  res.model = model;
  res.names = model.parameter_names();

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double spread = 0.0;
  for (double v : y) spread = std::max(spread, std::abs(v - mean));
  if (spread <= 1e-12 * std::max(std::abs(mean), 1e-300)) {
    res.params = VectorXd::Zero(layout.reported);
    res.params(model.kind == FitKind::single_exp ? static_cast<int>(y1_off) : static_cast<int>(y2_off)) = mean;
    res.uncertainties = VectorXd::Zero(layout.reported);
    res.seeds = res.params;
    res.degenerate = true;
    res.converged = true;
    return res;
  }

  const Problem pr{t, y, model, layout};
  const double T = span_of(t);

  std::vector<VectorXd> starts;
  if (options.start) {
    if (options.start->size() != layout.reported)
      throw std::invalid_argument("start vector has the wrong length");
    starts.push_back(*options.start);
  } else {
    // Candidate nonlinear parameters, ranked by their projected residual.
    std::vector<double> eta_a;
    for (double f : {0.5, 2.0, 8.0, 32.0}) eta_a.push_back(f / T);
    std::vector<double> eta3s{1.0}, betas{0.0};
    if (model.kind == FitKind::single_exp) {
      const double est = exponential_rate(t, y);
      if (std::isfinite(est) && est > 0.0) eta_a.push_back(est);
    } else {
      betas = spectral_peaks(t, y, 3);
      if (betas.empty()) betas = {2.0 * std::numbers::pi / T};
      const std::vector<double> r = detrend(t, y);
      const double env = envelope_rate(t, r, betas[0]);
      const double e3 = std::isfinite(env) && env > 0.0 ? env : 2.0 / T;
      eta3s = {e3, e3 / 3.0, 3.0 * e3};
      for (double f : {2.0, 8.0, 32.0, 128.0, 512.0}) eta3s.push_back(f / T);
    }
    if (model.force_c_zero) eta_a = {0.0};
    std::vector<std::pair<double, VectorXd>> ranked;
    for (double ea : eta_a)
      for (double e3 : eta3s)
        for (double b : betas) {
          auto [p, rss] = linear_projection(pr, ea, e3, b);
          ranked.emplace_back(rss, p);
        }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < std::min<std::size_t>(3, ranked.size()); ++i)
      starts.push_back(ranked[i].second);
  }

  Run best;
  VectorXd best_seed;
  for (const VectorXd& s : starts) {
    Run r = levenberg_marquardt(pr, to_free(layout, s), options);
    if (r.cost < best.cost) {
      best = r;
      best_seed = s;
    }
  }

  res.seeds = best_seed;
  res.params = to_reported(layout, best.x);
  res.uncertainties = uncertainties_of(pr, best.x, best.cost);
  canonicalize(model, res.params);
  res.rms = std::sqrt(best.cost / static_cast<double>(t.size()));
  res.iterations = best.iterations;
  res.converged = best.converged;
  res.gradient = best.gradient;
  return res;
}

FitResult fit(const TransientTrace& trace, const FitModel& model, const FitOptions& options) {
  return fit(trace.times, trace.w, model, options);
}

double round12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

nlohmann::ordered_json to_json(const FitResult& r) {
  auto number = [](double v) -> nlohmann::ordered_json {
    if (!std::isfinite(v)) return nullptr;
    return round12(v);
  };
  auto block = [&](const VectorXd& v) {
    nlohmann::ordered_json o = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < r.names.size(); ++k)
      o[r.names[k]] = number(v(static_cast<Eigen::Index>(k)));
    return o;
  };
  nlohmann::ordered_json j;
  j["model"] = r.model.name();
  j["params"] = block(r.params);
  j["uncertainties"] = block(r.uncertainties);
  j["rms"] = number(r.rms);
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["force_c_zero"] = r.model.force_c_zero;
  j["degenerate"] = r.degenerate;
  j["seeds"] = block(r.seeds);
  return j;
}

std::vector<RateRow> rate_vs_intensity(const TransitionSpec& base,
                                       std::span<const double> intensities,
                                       const SwitchSchedule& schedule, RabiConvention convention,
                                       bool parallel) {
  SwitchSchedule one = schedule;
  one.n_periods = 1;
  one.validate();
  const bool eia = base.fe.twice() > base.fg.twice();
  auto row = [&](std::size_t i) {
    RateRow out;
    out.intensity = intensities[i];
    try {
      const TransitionSpec spec = base.with_intensity(intensities[i], convention);
      const TransientTrace tr = switched_transient(spec, one);
      const FitResult f0 = fit(tr.slice(0.0, one.b0_duration()), FitModel::single_exp());
      const FitResult f1 =
          fit(tr.slice(one.b0_duration(), one.period), FitModel::damped_sine(eia));
      out.eta2 = f0.value("eta2");
      out.eta1 = f1.value("eta1");
      out.eta3 = f1.value("eta3");
      out.beta = f1.value("beta");
      out.converged_b0 = f0.converged;
      out.converged_b1 = f1.converged;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    return out;
  };
  return parallel ? kernels::parallel_map(intensities.size(), row)
                  : kernels::serial_map(intensities.size(), row);
}

}  // namespace hanle
