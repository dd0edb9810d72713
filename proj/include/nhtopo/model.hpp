#pragma once

#include <complex>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nhtopo {

using cplx = std::complex<double>;

/// Complex 3-vector h(k) of a Dirac Bloch Hamiltonian H = h . sigma.
struct HVector {
  cplx hx, hy, hz;

  /// h . h (not |h|^2); the squared band energy for a Dirac model.
  cplx dot_self() const { return hx * hx + hy * hy + hz * hz; }
};

/// Non-Hermitian SSH chain: intracell hopping t, intercell hopping t' (tp),
/// gain/loss delta.
struct SshParams {
  double t = 1.0;
  double tp = 1.0;
  double delta = 0.0;
};

/// Non-Hermitian Chern insulator. The same non-Hermitian strength appears in
/// h_y and in the band energies; it is called gamma throughout.
struct ChernParams {
  double t = 1.0;
  double m = 0.0;
  double gamma = 0.0;
};

/// Real and imaginary parts of E^2: E^2 = epsilon + i omega.
struct EpsOmega {
  double epsilon = 0.0;
  double omega = 0.0;

  double modulus_sq() const { return epsilon * epsilon + omega * omega; }
};

/// One band at one momentum. eR, eI >= 0; the complex energy is
/// branch * (eR + i sigma eI).
struct BandSample {
  double eR = 0.0;
  double eI = 0.0;
  int sigma = 1;
  int branch = 1;
  bool exceptional = false;

  cplx value() const { return double(branch) * cplx(eR, double(sigma) * eI); }
  double re() const { return double(branch) * eR; }
  double im() const { return double(branch * sigma) * eI; }
};

/// epsilon^2 + omega^2 below this counts as an exceptional point (|E| < 1e-6).
inline constexpr double kExceptionalModulusSq = 1e-24;

HVector ssh_h(double k, const SshParams& p);
HVector chern_h(double kx, double ky, const ChernParams& p);

EpsOmega ssh_epsilon_omega(double k, const SshParams& p);
/// d(epsilon)/dk and d(omega)/dk.
EpsOmega ssh_epsilon_omega_dk(double k, const SshParams& p);

/// Off-diagonal elements q_plus = (t - delta) + t' e^{ik} and
/// q_minus = (t + delta) + t' e^{-ik} of the chiral SSH Bloch matrix;
/// q_plus * q_minus = epsilon + i omega.
struct SshOffDiagonal {
  cplx q_plus, q_minus;
};
SshOffDiagonal ssh_off_diagonal(double k, const SshParams& p);

EpsOmega chern_epsilon_omega(double kx, double ky, const ChernParams& p);
EpsOmega chern_epsilon_omega_dkx(double kx, double ky, const ChernParams& p);
EpsOmega chern_epsilon_omega_dky(double kx, double ky, const ChernParams& p);

/// Splits E^2 = epsilon + i omega into the band (eR, eI, sigma) without
/// squaring E. Stable near exceptional points.
BandSample band_sample(double epsilon, double omega, int branch = 1);
inline BandSample band_sample(const EpsOmega& eo, int branch = 1) {
  return band_sample(eo.epsilon, eo.omega, branch);
}

// Model registry -------------------------------------------------------------

using ParamMap = std::map<std::string, double, std::less<>>;

struct ModelInfo {
  std::string id;
  int dimension;                    ///< BZ dimension (1 or 2)
  std::vector<std::string> params;  ///< valid parameter names
  ParamMap defaults;
  std::function<EpsOmega(std::span<const double>, const ParamMap&)> epsilon_omega;
};

/// Throws UnsupportedModel for unknown ids.
const ModelInfo& model_info(std::string_view id);
const std::vector<std::string>& model_ids();

EpsOmega epsilon_omega(std::string_view model_id, std::span<const double> k,
                       const ParamMap& params);

/// Build typed parameters from a name->value map. Unknown names, non-finite
/// values or (chern) t <= 0 throw UsageError. Missing names take defaults.
SshParams ssh_params(const ParamMap& params);
ChernParams chern_params(const ParamMap& params);
ParamMap to_param_map(const SshParams& p);
ParamMap to_param_map(const ChernParams& p);

}  // namespace nhtopo
