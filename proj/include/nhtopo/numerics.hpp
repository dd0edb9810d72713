#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace nhtopo {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Neumaier compensated sum. Adding the same terms in the same order gives
/// bit-identical results.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, kTwoPi);
  return a <= -kPi ? a + kTwoPi : a;
}

/// Unwrap a sequence of angles given modulo `period`: each element is moved by
/// a multiple of `period` so that consecutive differences are minimal.
std::vector<double> unwrap_phase(std::span<const double> wrapped, double period = kTwoPi);

/// Total change of arg(z) along a closed polyline z[0], ..., z[n-1], z[0],
/// divided by 2 pi. Each step uses the principal arg of z[j+1] / z[j].
double winding_of(std::span<const std::complex<double>> z);

/// Median of a copy of the values (mean of the two middle elements for even
/// sizes). Empty input returns NaN.
double median(std::vector<double> values);

/// Run body(i) for i in [0, n) on up to `threads` worker threads. Work is
/// split by index, so any per-index output is independent of the thread count.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

/// Number of worker threads used when a caller passes 0.
unsigned default_threads();

}  // namespace nhtopo
