#include "hanle/kernels.hpp"

#include <stdexcept>

#include <omp.h>

namespace hanle::kernels {

namespace {

void check_modal_sizes(const CVector& rates, const CVector& weights) {
  if (rates.size() != weights.size())
    throw std::invalid_argument("modal rates and weights differ in length");
}

double modal_sample(const CVector& rates, const CVector& weights, double offset, double t) {
  cplx acc(0.0);
  for (Eigen::Index i = 0; i < rates.size(); ++i) acc += weights(i) * std::exp(rates(i) * t);
  return acc.real() + offset;
}

}  // namespace

int max_threads() { return omp_get_max_threads(); }

std::vector<double> modal_signal(const CVector& rates, const CVector& weights, double offset,
                                 std::span<const double> times) {
  check_modal_sizes(rates, weights);
  std::vector<double> out(times.size());
  const auto count = static_cast<long long>(times.size());
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < count; ++k)
    out[static_cast<std::size_t>(k)] =
        modal_sample(rates, weights, offset, times[static_cast<std::size_t>(k)]);
  return out;
}

std::vector<double> modal_signal_serial(const CVector& rates, const CVector& weights,
                                        double offset, std::span<const double> times) {
  check_modal_sizes(rates, weights);
  std::vector<double> out(times.size());
  for (std::size_t k = 0; k < times.size(); ++k)
    out[k] = modal_sample(rates, weights, offset, times[k]);
  return out;
}

CMatrix modal_states(const CMatrix& V, const CVector& a, const CVector& rates,
                     const CVector& base, std::span<const double> times) {
  check_modal_sizes(rates, a);
  CMatrix out(V.rows(), static_cast<Eigen::Index>(times.size()));
  const auto count = static_cast<long long>(times.size());
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < count; ++k) {
    const double t = times[static_cast<std::size_t>(k)];
    const CVector c = (a.array() * (rates.array() * t).exp()).matrix();
    out.col(k) = V * c + base;
  }
  return out;
}

CMatrix modal_states_serial(const CMatrix& V, const CVector& a, const CVector& rates,
                            const CVector& base, std::span<const double> times) {
  check_modal_sizes(rates, a);
  CMatrix out(V.rows(), static_cast<Eigen::Index>(times.size()));
  for (std::size_t k = 0; k < times.size(); ++k) {
    const CVector c = (a.array() * (rates.array() * times[k]).exp()).matrix();
    out.col(static_cast<Eigen::Index>(k)) = V * c + base;
  }
  return out;
}

}  // namespace hanle::kernels
