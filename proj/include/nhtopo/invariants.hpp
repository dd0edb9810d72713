#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nhtopo/model.hpp"

namespace nhtopo {

struct KPoint {
  double kx = 0.0;
  double ky = 0.0;
};

/// Winding number of the non-Hermitian SSH chain, w = (w_+ + w_-) / 2 with
/// w_+ the winding of q_+ = (t - delta) + t' e^{ik} and w_- that of
/// conj(q_-) = (t + delta) + t' e^{ik}. Takes values 0, 1/2, 1 (up to sign
/// of t').
struct WindingResult {
  double value = 0.0;
  double w_plus = 0.0;
  double w_minus = 0.0;
  std::vector<double> phase_trace;  ///< (arg q_+ + arg conj q_-) / 2, unwrapped
  double residual = 0.0;            ///< distance of value from the nearest half-integer
};

/// Throws DomainError if an exceptional point lies on the k grid.
WindingResult winding_number(const SshParams& p, int n = 4096);

struct VorticityResult {
  double value = 0.0;
  std::vector<KPoint> loop;
  double residual = 0.0;
};

/// Phase winding of the band E_+(k) over the BZ loop divided by 2 pi, i.e.
/// half the winding of E^2 = epsilon + i omega.
VorticityResult vorticity_1d(const SshParams& p, int n = 4096);

/// Winding of arg(E_+ - E_-) around a closed loop in the 2D BZ, divided by
/// 2 pi. The loop is closed implicitly (last point connects to the first).
VorticityResult vorticity_2d(const ChernParams& p, std::span<const KPoint> loop);

/// Counter-clockwise circle of n points.
std::vector<KPoint> circle_loop(KPoint center, double radius, int n = 720);

struct ChernResult {
  cplx value;                 ///< Chern number of the lower band
  double residual = 0.0;      ///< |Re value - nearest integer|
  int n = 0;
  double branch_cut = 0.0;    ///< direction of the sqrt branch cut in the E^2 plane
};

/// Chern number from Omega = 1/2 h^ . (d_x h^ x d_y h^) with h^ = h / sqrt(h.h),
/// central differences and a midpoint plaquette sum on an n x n grid.
/// Gapless input, or an E^2 image that winds around the origin, throws
/// DomainError.
ChernResult chern_number(const ChernParams& p, int n = 128);

enum class SshPhase { trivial, half, topological, boundary };
enum class ChernPhase { gapped, gapless_kx0, gapless_kxpi, gapless_both, boundary };

const char* to_string(SshPhase p);
const char* to_string(ChernPhase p);

/// Phase from the analytic boundaries t = +-delta +- t'.
SshPhase ssh_reference_phase(const SshParams& p, double tol = 1e-12);

/// Phase from the exceptional-point inequalities. The "kx0" family is
/// |m| <= |gamma| <= |m + 2t| (or reversed), the "kxpi" family
/// |m| <= |gamma| <= |m - 2t| (or reversed).
ChernPhase chern_reference_phase(const ChernParams& p, double tol = 1e-12);

/// Label for either model by id.
std::string reference_phase(std::string_view model_id, const ParamMap& params);

bool is_gapless(ChernPhase p);

}  // namespace nhtopo
