#include "nhtopo/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <complex>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace nhtopo {

std::vector<double> unwrap_phase(std::span<const double> wrapped, double period) {
  std::vector<double> out(wrapped.begin(), wrapped.end());
  for (std::size_t j = 1; j < out.size(); ++j) {
    const double d = wrapped[j] - out[j - 1];
    out[j] = wrapped[j] - period * std::round(d / period);
  }
  return out;
}

double winding_of(std::span<const std::complex<double>> z) {
  CompensatedSum total;
  const std::size_t n = z.size();
  for (std::size_t j = 0; j < n; ++j) total.add(std::arg(z[(j + 1) % n] / z[j]));
  return total.value() / kTwoPi;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

unsigned default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = default_threads();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace nhtopo
