// Least-squares fits of switched transients.
//
//   single_exp:             y1(t) = A exp(-eta2 t) + offset
//   exp_plus_damped_sine:   y2(t) = C exp(-eta1 t) + D exp(-eta3 t) sin(beta t + phi) + offset
//
// Rates and beta are optimized in log space so they stay non-negative.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "hanle/dynamics.hpp"

namespace hanle {

enum class FitKind { single_exp, exp_plus_damped_sine };

struct FitModel {
  FitKind kind = FitKind::single_exp;
  bool force_c_zero = false;  // drops C and eta1 from y2

  static FitModel single_exp() { return {FitKind::single_exp, false}; }
  static FitModel damped_sine(bool force_c_zero = false) {
    return {FitKind::exp_plus_damped_sine, force_c_zero};
  }
  /// "single_exp"/"y1" or "exp_plus_damped_sine"/"y2". Throws ConfigError.
  static FitModel from_name(const std::string& name, bool force_c_zero = false);

  std::string name() const;
  /// Reported parameter names, in output order.
  std::vector<std::string> parameter_names() const;
  /// Number of parameters actually optimized.
  int free_parameters() const;
  /// Model value for reported parameters p.
  double evaluate(const Eigen::VectorXd& p, double t) const;
};

struct FitOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-10;
  /// Start from these reported parameters instead of the built-in seeds.
  std::optional<Eigen::VectorXd> start;
};

struct FitResult {
  FitModel model;
  std::vector<std::string> names;
  Eigen::VectorXd params;
  Eigen::VectorXd uncertainties;  // 1-sigma from the Gauss-Newton covariance
  Eigen::VectorXd seeds;
  double rms = 0.0;
  double gradient = 0.0;  // final relative gradient
  int iterations = 0;
  bool converged = false;
  /// Constant input: amplitudes and rates set to zero, offset = mean.
  bool degenerate = false;

  /// Throws std::out_of_range for an unknown name.
  double value(const std::string& name) const;
  double uncertainty(const std::string& name) const;
};

/// Fits one switching phase. Needs at least 10 samples per free parameter
/// (std::invalid_argument otherwise). Never throws on non-convergence.
FitResult fit(std::span<const double> t, std::span<const double> y, const FitModel& model,
              const FitOptions& options = {});
FitResult fit(const TransientTrace& trace, const FitModel& model, const FitOptions& options = {});

/// {"model", "params", "uncertainties", "rms", "converged", "iterations", ...}
/// with numbers rounded to 12 significant digits.
nlohmann::ordered_json to_json(const FitResult& result);

/// Angular frequencies of the strongest spectral peaks (strongest first) of a
/// uniformly sampled signal after removing its best single exponential and
/// offset.
std::vector<double> spectral_peaks(std::span<const double> t, std::span<const double> y,
                                   std::size_t count);
double dominant_frequency(std::span<const double> t, std::span<const double> y);

struct RateRow {
  double intensity = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;
  double eta3 = 0.0;
  double beta = 0.0;
  bool converged_b0 = false;
  bool converged_b1 = false;
  std::string error;  // non-empty if the row could not be computed
};

/// For each intensity, fits y1 to the first B = b0 phase and y2 to the
/// following B = b1 phase of a one-period switched transient. C is forced to
/// zero for Fe = Fg + 1 transitions.
std::vector<RateRow> rate_vs_intensity(const TransitionSpec& base,
                                       std::span<const double> intensities,
                                       const SwitchSchedule& schedule,
                                       RabiConvention convention = RabiConvention::clebsch_gordan,
                                       bool parallel = true);

/// Rounds to 12 significant digits (the precision of every emitted number).
double round12(double x);

}  // namespace hanle
