#include "nhtopo/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "nhtopo/error.hpp"
#include "nhtopo/numerics.hpp"

namespace nhtopo {

namespace {

constexpr double kEpModulusSq = 1e-12;
// Smallest angular gap in the E^2 image that still admits a continuous
// square-root branch on the sampled grid.
constexpr double kMinBranchGap = 0.05;
constexpr double kDiffStep = 1e-5;

double half_integer_residual(double v) { return std::abs(v - std::round(2.0 * v) / 2.0); }

std::string k_text(double k) {
  std::ostringstream os;
  os.precision(17);
  os << k;
  return os.str();
}

void require_grid(int n, int min_n) {
  if (n < min_n) throw UsageError("grid size must be >= " + std::to_string(min_n));
}

}  // namespace

WindingResult winding_number(const SshParams& p, int n) {
  require_grid(n, 16);
  std::vector<cplx> qp(n), qm(n);
  for (int j = 0; j < n; ++j) {
    const double k = -kPi + kTwoPi * j / n;
    const auto q = ssh_off_diagonal(k, p);
    if (std::norm(q.q_plus * q.q_minus) < kEpModulusSq)
      throw DomainError("exceptional point on the k grid at k=" + k_text(k));
    qp[j] = q.q_plus;
    qm[j] = std::conj(q.q_minus);
  }
  WindingResult out;
  out.w_plus = winding_of(qp);
  out.w_minus = winding_of(qm);
  out.value = 0.5 * (out.w_plus + out.w_minus);
  out.residual = half_integer_residual(out.value);

  std::vector<double> ap(n + 1), am(n + 1);
  for (int j = 0; j <= n; ++j) {
    ap[j] = std::arg(qp[j % n]);
    am[j] = std::arg(qm[j % n]);
  }
  const auto up = unwrap_phase(ap), um = unwrap_phase(am);
  out.phase_trace.resize(n + 1);
  for (int j = 0; j <= n; ++j) out.phase_trace[j] = 0.5 * (up[j] + um[j]);
  return out;
}

VorticityResult vorticity_1d(const SshParams& p, int n) {
  require_grid(n, 16);
  std::vector<cplx> z(n);
  VorticityResult out;
  out.loop.resize(n);
  for (int j = 0; j < n; ++j) {
    const double k = -kPi + kTwoPi * j / n;
    const auto eo = ssh_epsilon_omega(k, p);
    if (eo.modulus_sq() < kEpModulusSq)
      throw DomainError("exceptional point on the k grid at k=" + k_text(k));
    z[j] = cplx(eo.epsilon, eo.omega);
    out.loop[j] = {k, 0.0};
  }
  out.value = 0.5 * winding_of(z);
  out.residual = half_integer_residual(out.value);
  return out;
}

VorticityResult vorticity_2d(const ChernParams& p, std::span<const KPoint> loop) {
  if (loop.size() < 3) throw UsageError("vorticity loop needs at least 3 points");
  std::vector<cplx> z(loop.size());
  for (std::size_t j = 0; j < loop.size(); ++j) {
    const auto eo = chern_epsilon_omega(loop[j].kx, loop[j].ky, p);
    if (eo.modulus_sq() < kEpModulusSq)
      throw DomainError("loop passes through an exceptional point at kx=" +
                        k_text(loop[j].kx) + " ky=" + k_text(loop[j].ky));
    z[j] = cplx(eo.epsilon, eo.omega);
  }
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (std::abs(std::arg(z[(j + 1) % z.size()] / z[j])) > 0.5 * kPi)
      throw DomainError("loop too coarse: E^2 phase step above pi/2 after point " +
                        std::to_string(j) + "; use more loop points");
  }
  VorticityResult out;
  out.loop.assign(loop.begin(), loop.end());
  out.value = 0.5 * winding_of(z);
  out.residual = half_integer_residual(out.value);
  return out;
}

std::vector<KPoint> circle_loop(KPoint center, double radius, int n) {
  if (n < 3) throw UsageError("circle loop needs at least 3 points");
  std::vector<KPoint> loop(n);
  for (int j = 0; j < n; ++j) {
    const double a = kTwoPi * j / n;
    loop[j] = {center.kx + radius * std::cos(a), center.ky + radius * std::sin(a)};
  }
  return loop;
}

namespace {

struct Branch {
  double rotation;  // E^2 is rotated by this angle so the cut lands on the negative axis

  cplx sqrt(cplx z) const {
    const cplx r = std::polar(1.0, rotation);
    return std::sqrt(z * r) * std::polar(1.0, -0.5 * rotation);
  }
};

// Largest empty sector of arg(E^2) over the samples; the cut goes through
// its middle.
Branch choose_branch(const std::vector<double>& args) {
  std::vector<double> a = args;
  std::sort(a.begin(), a.end());
  double best_gap = a.front() + kTwoPi - a.back();
  double best_mid = a.back() + 0.5 * best_gap;
  for (std::size_t i = 1; i < a.size(); ++i) {
    const double gap = a[i] - a[i - 1];
    if (gap > best_gap) {
      best_gap = gap;
      best_mid = a[i - 1] + 0.5 * gap;
    }
  }
  if (best_gap < kMinBranchGap)
    throw DomainError(
        "no continuous square-root branch: E^2 surrounds the origin on the grid; "
        "refine the grid or choose gapped parameters");
  return {wrap_angle(kPi - best_mid)};
}

struct UnitH {
  cplx x, y, z;
};

UnitH unit_h(const ChernParams& p, double kx, double ky, const Branch& b) {
  const auto h = chern_h(kx, ky, p);
  const cplx s = b.sqrt(h.dot_self());
  return {h.hx / s, h.hy / s, h.hz / s};
}

}  // namespace

ChernResult chern_number(const ChernParams& p, int n) {
  require_grid(n, 16);
  if (is_gapless(chern_reference_phase(p)))
    throw DomainError("gapless parameters: the Chern number needs a gapped spectrum");

  const double dk = kTwoPi / n;
  auto node = [&](int i) { return -kPi + (i + 0.5) * dk; };

  std::vector<double> args;
  args.reserve(std::size_t(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto eo = chern_epsilon_omega(node(i), node(j), p);
      if (eo.modulus_sq() < kEpModulusSq)
        throw DomainError("exceptional point on the grid at kx=" + k_text(node(i)) +
                          " ky=" + k_text(node(j)));
      args.push_back(std::atan2(eo.omega, eo.epsilon));
    }
  }
  const Branch branch = choose_branch(args);

  std::vector<cplx> rows(n);
  parallel_for(std::size_t(n), 0, [&](std::size_t i) {
    const double kx = node(int(i));
    CompensatedSum re, im;
    for (int j = 0; j < n; ++j) {
      const double ky = node(j);
      const auto c = unit_h(p, kx, ky, branch);
      const auto xp = unit_h(p, kx + kDiffStep, ky, branch);
      const auto xm = unit_h(p, kx - kDiffStep, ky, branch);
      const auto yp = unit_h(p, kx, ky + kDiffStep, branch);
      const auto ym = unit_h(p, kx, ky - kDiffStep, branch);
      const double inv = 1.0 / (2.0 * kDiffStep);
      const UnitH dx{(xp.x - xm.x) * inv, (xp.y - xm.y) * inv, (xp.z - xm.z) * inv};
      const UnitH dy{(yp.x - ym.x) * inv, (yp.y - ym.y) * inv, (yp.z - ym.z) * inv};
      const cplx triple = c.x * (dx.y * dy.z - dx.z * dy.y) +
                          c.y * (dx.z * dy.x - dx.x * dy.z) +
                          c.z * (dx.x * dy.y - dx.y * dy.x);
      const cplx omega = 0.5 * triple;
      re.add(omega.real());
      im.add(omega.imag());
    }
    rows[i] = cplx(re.value(), im.value());
  });
  CompensatedSum re, im;
  for (const auto& r : rows) {
    re.add(r.real());
    im.add(r.imag());
  }
  const double scale = dk * dk / kTwoPi;
  ChernResult out;
  out.value = cplx(re.value() * scale, im.value() * scale);
  out.residual = std::abs(out.value.real() - std::round(out.value.real()));
  out.n = n;
  out.branch_cut = wrap_angle(kPi - branch.rotation);
  return out;
}

const char* to_string(SshPhase p) {
  switch (p) {
    case SshPhase::trivial: return "trivial";
    case SshPhase::half: return "half";
    case SshPhase::topological: return "topological";
    case SshPhase::boundary: return "boundary";
  }
  return "?";
}

const char* to_string(ChernPhase p) {
  switch (p) {
    case ChernPhase::gapped: return "gapped";
    case ChernPhase::gapless_kx0: return "gapless-kx0";
    case ChernPhase::gapless_kxpi: return "gapless-kxpi";
    case ChernPhase::gapless_both: return "gapless-both";
    case ChernPhase::boundary: return "boundary";
  }
  return "?";
}

SshPhase ssh_reference_phase(const SshParams& p, double tol) {
  const double a = std::abs(p.t - p.delta), b = std::abs(p.t + p.delta), c = std::abs(p.tp);
  if (std::abs(a - c) <= tol || std::abs(b - c) <= tol) return SshPhase::boundary;
  const int inside = int(a < c) + int(b < c);
  return inside == 2 ? SshPhase::topological : inside == 1 ? SshPhase::half : SshPhase::trivial;
}

ChernPhase chern_reference_phase(const ChernParams& p, double tol) {
  const double g = std::abs(p.gamma);
  const double a = std::abs(p.m), b = std::abs(p.m + 2.0 * p.t), c = std::abs(p.m - 2.0 * p.t);
  if (std::abs(g - a) <= tol || std::abs(g - b) <= tol || std::abs(g - c) <= tol)
    return ChernPhase::boundary;
  auto between = [g](double x, double y) { return g > std::min(x, y) && g < std::max(x, y); };
  const bool f0 = between(a, b), fpi = between(a, c);
  if (f0 && fpi) return ChernPhase::gapless_both;
  if (f0) return ChernPhase::gapless_kx0;
  if (fpi) return ChernPhase::gapless_kxpi;
  return ChernPhase::gapped;
}

bool is_gapless(ChernPhase p) {
  return p == ChernPhase::gapless_kx0 || p == ChernPhase::gapless_kxpi ||
         p == ChernPhase::gapless_both || p == ChernPhase::boundary;
}

std::string reference_phase(std::string_view model_id, const ParamMap& params) {
  const auto& info = model_info(model_id);
  if (info.id == "ssh") return to_string(ssh_reference_phase(ssh_params(params)));
  return to_string(chern_reference_phase(chern_params(params)));
}

}  // namespace nhtopo
