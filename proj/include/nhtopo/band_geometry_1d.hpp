#pragma once

#include <vector>

#include "nhtopo/model.hpp"

namespace nhtopo {

/// Length of the band curve E_+(k), k in [-pi, pi], in the complex energy
/// plane. Both bands have the same length (E_- = -E_+).
struct CurveLengthResult {
  double length = 0.0;
  int n_panels = 0;
  double est_error = 0.0;
  std::vector<double> ep_crossings;  ///< momenta where epsilon = omega = 0
};

/// Minimum number of uniform panels accepted by the length integrators.
inline constexpr int kMinLengthPanels = 64;

/// Arc length from the band derivatives (dE_R/dk, dE_I/dk), obtained by
/// solving [[E_R, -E_I], [E_I, E_R]] (dE_R, dE_I) = (eps', omega') / 2.
CurveLengthResult length_direct(const SshParams& p, int n_panels = 4096);

/// Arc length from the closed-form integrand
/// t' sqrt(t^2 sin^2 k + delta^2 cos^2 k) / |E|.
CurveLengthResult length_closed_form(const SshParams& p, int n_panels = 4096);

/// Arc length in polar form, sqrt(|E|'^2 + |E|^2 phi'^2), with |E| and the
/// continuous phase phi = arg(E^2) / 2 differentiated analytically.
CurveLengthResult length_polar(const SshParams& p, int n_panels = 4096);

enum class SshAxis { t, tp, delta };

const char* to_string(SshAxis a);

enum class DerivativeStatus {
  smooth,              ///< central difference is the derivative
  straddles_boundary,  ///< a phase boundary lies inside [x - h, x + h]
};

struct LengthDerivative {
  double value = 0.0;  ///< Richardson-extrapolated central difference
  double left = 0.0;   ///< backward difference (l(x) - l(x - h)) / h
  double right = 0.0;  ///< forward difference (l(x + h) - l(x)) / h
  DerivativeStatus status = DerivativeStatus::smooth;
};

/// d(length)/d(parameter) by central differences of length_closed_form,
/// h in (0, 1e-2]. Near a gap closing the one-sided slopes differ by O(1)
/// instead of O(h); such results carry `straddles_boundary`.
LengthDerivative length_param_derivative(const SshParams& p, SshAxis which,
                                         double h = 1e-4);

/// |E| and continuous phase of E_+ sampled on k_j = -pi + 2 pi j / n,
/// j = 0..n (the last node closes the loop).
struct PolarTrace {
  std::vector<double> k;
  std::vector<double> magnitude;
  std::vector<double> phase;       ///< unwrapped, continuous across branch cuts
  std::vector<bool> exceptional;   ///< node hit an exceptional point
  double total_phase_change() const { return phase.back() - phase.front(); }
};

PolarTrace polar_trace(const SshParams& p, int n = 1024);

/// Small-radial-variation estimate of the length from the winding number,
/// 2 pi w <|E| + (d|E|/dphi)^2 / (2|E|)>. Diagnostic only.
struct WindingLengthEstimate {
  double estimate = 0.0;
  double actual = 0.0;
  double ratio = 0.0;  ///< estimate / actual (inf when actual == 0)
  double winding = 0.0;
  bool applicable = true;  ///< false when the winding number is zero
  /// Fraction of the grid where |d|E|/dk| >= |E| |dphi/dk|, the regime the
  /// expansion does not cover. The correction term is dropped there.
  double violation_fraction = 0.0;
};

WindingLengthEstimate winding_length_estimate(const SshParams& p, int n = 2048);

}  // namespace nhtopo
