// Data-parallel kernels. Every OpenMP kernel has a serial twin with the same
// signature; the tests check them against each other and bench/ times both.
// Results are written by index, so output order never depends on scheduling.

#pragma once

#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <type_traits>
#include <vector>

#include "hanle/angular.hpp"

namespace hanle::kernels {

int max_threads();

/// s(t_k) = Re sum_i weights_i exp(rates_i t_k) + offset.
std::vector<double> modal_signal(const CVector& rates, const CVector& weights, double offset,
                                 std::span<const double> times);
std::vector<double> modal_signal_serial(const CVector& rates, const CVector& weights,
                                        double offset, std::span<const double> times);

/// Column k is V (a .* exp(rates t_k)) + base.
CMatrix modal_states(const CMatrix& V, const CVector& a, const CVector& rates,
                     const CVector& base, std::span<const double> times);
CMatrix modal_states_serial(const CMatrix& V, const CVector& a, const CVector& rates,
                            const CVector& base, std::span<const double> times);

/// out[i] = f(i). The first exception thrown by any f(i) is rethrown after
/// the loop.
template <class F>
auto parallel_map(std::size_t n, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  using R = std::invoke_result_t<F&, std::size_t>;
  std::vector<R> out(n);
  std::exception_ptr first;
  std::mutex guard;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
  return out;
}

template <class F>
auto serial_map(std::size_t n, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  std::vector<std::invoke_result_t<F&, std::size_t>> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
  return out;
}

}  // namespace hanle::kernels
