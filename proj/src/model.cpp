#include "nhtopo/model.hpp"

#include <cmath>

#include "nhtopo/error.hpp"

namespace nhtopo {

HVector ssh_h(double k, const SshParams& p) {
  return {cplx(p.t - p.delta + p.tp * std::cos(k), 0.0),
          cplx(p.t + p.delta, p.tp * std::sin(k)), cplx(0.0, 0.0)};
}

HVector chern_h(double kx, double ky, const ChernParams& p) {
  return {cplx(p.t * std::sin(kx), 0.0), cplx(p.t * std::sin(ky), -p.gamma),
          cplx(p.m + p.t * std::cos(kx) + p.t * std::cos(ky), 0.0)};
}

SshOffDiagonal ssh_off_diagonal(double k, const SshParams& p) {
  const cplx e_ik = std::polar(1.0, k);
  return {(p.t - p.delta) + p.tp * e_ik, (p.t + p.delta) + p.tp * std::conj(e_ik)};
}

// Computed as q_plus * q_minus.
EpsOmega ssh_epsilon_omega(double k, const SshParams& p) {
  const auto q = ssh_off_diagonal(k, p);
  const cplx e2 = q.q_plus * q.q_minus;
  return {e2.real(), e2.imag()};
}

EpsOmega ssh_epsilon_omega_dk(double k, const SshParams& p) {
  return {-2.0 * p.tp * p.t * std::sin(k), 2.0 * p.tp * p.delta * std::cos(k)};
}

EpsOmega chern_epsilon_omega(double kx, double ky, const ChernParams& p) {
  const double cx = std::cos(kx), cy = std::cos(ky);
  const double t2 = p.t * p.t;
  return {2.0 * t2 + p.m * p.m - p.gamma * p.gamma + 2.0 * t2 * cx * cy +
              2.0 * p.m * p.t * (cx + cy),
          -2.0 * p.t * p.gamma * std::sin(ky)};
}

EpsOmega chern_epsilon_omega_dkx(double kx, double ky, const ChernParams& p) {
  const double sx = std::sin(kx), cy = std::cos(ky);
  return {-2.0 * p.t * sx * (p.t * cy + p.m), 0.0};
}

EpsOmega chern_epsilon_omega_dky(double kx, double ky, const ChernParams& p) {
  const double cx = std::cos(kx), sy = std::sin(ky), cy = std::cos(ky);
  return {-2.0 * p.t * sy * (p.t * cx + p.m), -2.0 * p.t * p.gamma * cy};
}

BandSample band_sample(double epsilon, double omega, int branch) {
  BandSample s;
  s.branch = branch >= 0 ? 1 : -1;
  s.sigma = omega >= 0.0 ? 1 : -1;
  const double r = std::hypot(epsilon, omega);
  s.exceptional = epsilon * epsilon + omega * omega <= kExceptionalModulusSq;
  if (r == 0.0) return s;
  // Take the root of the larger half first, recover the other from
  // eR * eI = |omega| / 2 to avoid cancellation in (r -/+ epsilon).
  if (epsilon >= 0.0) {
    s.eR = std::sqrt(0.5 * (epsilon + r));
    s.eI = std::abs(omega) / (2.0 * s.eR);
  } else {
    s.eI = std::sqrt(0.5 * (r - epsilon));
    s.eR = std::abs(omega) / (2.0 * s.eI);
  }
  return s;
}

namespace {

void check_finite(const ParamMap& params) {
  for (const auto& [name, value] : params)
    if (!std::isfinite(value))
      throw UsageError("parameter '" + name + "' is not finite");
}

void check_names(const ModelInfo& info, const ParamMap& params) {
  for (const auto& [name, value] : params) {
    bool known = false;
    for (const auto& valid : info.params) known = known || valid == name;
    if (!known) {
      std::string list;
      for (const auto& valid : info.params) list += (list.empty() ? "" : ", ") + valid;
      throw UsageError("unknown parameter '" + name + "' for model " + info.id +
                       " (valid: " + list + ")");
    }
  }
}

double lookup(const ModelInfo& info, const ParamMap& params, std::string_view name) {
  if (auto it = params.find(name); it != params.end()) return it->second;
  return info.defaults.find(name)->second;
}

std::vector<ModelInfo> build_registry() {
  std::vector<ModelInfo> models;
  models.push_back(ModelInfo{
      "ssh", 1, {"t", "tp", "delta"}, {{"t", 1.0}, {"tp", 1.0}, {"delta", 0.0}},
      [](std::span<const double> k, const ParamMap& params) {
        if (k.size() != 1) throw UsageError("ssh expects a single momentum");
        return ssh_epsilon_omega(k[0], ssh_params(params));
      }});
  models.push_back(ModelInfo{
      "chern", 2, {"t", "m", "gamma"}, {{"t", 1.0}, {"m", 0.0}, {"gamma", 0.0}},
      [](std::span<const double> k, const ParamMap& params) {
        if (k.size() != 2) throw UsageError("chern expects (kx, ky)");
        return chern_epsilon_omega(k[0], k[1], chern_params(params));
      }});
  return models;
}

const std::vector<ModelInfo>& registry() {
  static const std::vector<ModelInfo> models = build_registry();
  return models;
}

}  // namespace

const ModelInfo& model_info(std::string_view id) {
  for (const auto& info : registry())
    if (info.id == id) return info;
  throw UnsupportedModel(std::string(id));
}

const std::vector<std::string>& model_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out;
    for (const auto& info : registry()) out.push_back(info.id);
    return out;
  }();
  return ids;
}

EpsOmega epsilon_omega(std::string_view model_id, std::span<const double> k,
                       const ParamMap& params) {
  return model_info(model_id).epsilon_omega(k, params);
}

SshParams ssh_params(const ParamMap& params) {
  const auto& info = model_info("ssh");
  check_names(info, params);
  check_finite(params);
  return {lookup(info, params, "t"), lookup(info, params, "tp"),
          lookup(info, params, "delta")};
}

ChernParams chern_params(const ParamMap& params) {
  const auto& info = model_info("chern");
  check_names(info, params);
  check_finite(params);
  ChernParams p{lookup(info, params, "t"), lookup(info, params, "m"),
                lookup(info, params, "gamma")};
  if (!(p.t > 0.0)) throw UsageError("chern model requires t > 0");
  return p;
}

ParamMap to_param_map(const SshParams& p) {
  return {{"t", p.t}, {"tp", p.tp}, {"delta", p.delta}};
}

ParamMap to_param_map(const ChernParams& p) {
  return {{"t", p.t}, {"m", p.m}, {"gamma", p.gamma}};
}

}  // namespace nhtopo
