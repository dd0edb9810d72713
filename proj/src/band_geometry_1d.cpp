#include "nhtopo/band_geometry_1d.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "nhtopo/error.hpp"
#include "nhtopo/invariants.hpp"
#include "nhtopo/numerics.hpp"

namespace nhtopo {

namespace {

// epsilon^2 + omega^2 below this marks an exceptional point on the curve.
constexpr double kEpModulusSq = 1e-12;
constexpr double kPieceRelTol = 1e-10;
constexpr unsigned kMaxDepth = 18;

void validate(const SshParams& p, int n_panels) {
  if (!std::isfinite(p.t) || !std::isfinite(p.tp) || !std::isfinite(p.delta))
    throw UsageError("ssh parameters must be finite");
  if (n_panels < kMinLengthPanels)
    throw UsageError("panel count must be >= " + std::to_string(kMinLengthPanels));
}

double g_of(double k, const SshParams& p) { return ssh_epsilon_omega(k, p).modulus_sq(); }

double g_prime(double k, const SshParams& p) {
  const auto eo = ssh_epsilon_omega(k, p);
  const auto d = ssh_epsilon_omega_dk(k, p);
  return 2.0 * (eo.epsilon * d.epsilon + eo.omega * d.omega);
}

// Local minima of |E|^2 over the periodic BZ, refined to machine precision
// through the sign change of d|E|^2/dk. Returned in (-pi, pi].
std::vector<double> locate_minima(const SshParams& p, int n) {
  const double h = kTwoPi / n;
  std::vector<double> g(n);
  for (int j = 0; j < n; ++j) g[j] = g_of(-kPi + h * j, p);

  std::vector<double> minima;
  for (int j = 0; j < n; ++j) {
    const double gl = g[(j + n - 1) % n], gc = g[j], gr = g[(j + 1) % n];
    if (!(gc <= gl && gc <= gr && (gc < gl || gc < gr))) continue;
    // A plateau shared with the right neighbour is reported once.
    if (gc == gr && gc < gl && j + 1 < n) continue;
    double a = -kPi + h * (j - 1), b = -kPi + h * (j + 1);
    double fa = g_prime(a, p), fb = g_prime(b, p);
    double kstar = -kPi + h * j;
    if (fa < 0.0 && fb > 0.0) {
      boost::uintmax_t iters = 200;
      const auto r = boost::math::tools::toms748_solve(
          [&](double k) { return g_prime(k, p); }, a, b, fa, fb,
          boost::math::tools::eps_tolerance<double>(52), iters);
      kstar = 0.5 * (r.first + r.second);
      // Keep whichever candidate has the smaller |E|^2.
      if (g_of(kstar, p) > gc) kstar = -kPi + h * j;
    }
    kstar = wrap_angle(kstar);
    minima.push_back(kstar);
  }
  std::sort(minima.begin(), minima.end());
  return minima;
}

struct Piece {
  double a, b;
  bool singular_a, singular_b;
};

// Uniform panels over [-pi, pi], split at the minima of |E|^2. A minimum at
// +-pi lands on the domain ends, which are marked singular instead.
std::vector<Piece> build_pieces(int n, const std::vector<double>& minima) {
  const double h = kTwoPi / n;
  std::vector<double> nodes(n + 1);
  for (int j = 0; j <= n; ++j) nodes[j] = -kPi + h * j;
  nodes[n] = kPi;

  std::vector<double> marks;
  bool end_singular = false;
  for (double km : minima) {
    if (kPi - std::abs(km) < 1e-12 * kPi) {
      end_singular = true;
      continue;
    }
    // Snap the nearest node onto the minimum when they nearly coincide.
    const int j = static_cast<int>(std::lround((km + kPi) / h));
    if (j > 0 && j < n && std::abs(nodes[j] - km) < 1e-6 * h)
      nodes[j] = km;
    else
      nodes.push_back(km);
    marks.push_back(km);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  auto is_mark = [&](double x) {
    return std::find(marks.begin(), marks.end(), x) != marks.end();
  };
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    Piece pc{nodes[i], nodes[i + 1], is_mark(nodes[i]), is_mark(nodes[i + 1])};
    if (i == 0 && end_singular) pc.singular_a = true;
    if (i + 2 == nodes.size() && end_singular) pc.singular_b = true;
    if (pc.singular_a && pc.singular_b) {
      const double mid = 0.5 * (pc.a + pc.b);
      pieces.push_back({pc.a, mid, true, false});
      pieces.push_back({mid, pc.b, false, true});
    } else {
      pieces.push_back(pc);
    }
  }
  return pieces;
}

using Integrand = std::function<double(double)>;

// The integrands behave like |k - k_ep|^{-1/2} next to an exceptional point;
// the substitution k = k_ep +- L u^2 makes them bounded before Gauss-Kronrod.
CurveLengthResult integrate_curve(const SshParams& p, int n, const Integrand& f) {
  validate(p, n);
  const auto minima = locate_minima(p, n);
  const auto pieces = build_pieces(n, minima);

  CompensatedSum total, err_total;
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  for (const auto& pc : pieces) {
    const double len = pc.b - pc.a;
    double err = 0.0;
    double value = 0.0;
    if (pc.singular_a) {
      value = GK::integrate(
          [&](double u) { return f(pc.a + len * u * u) * 2.0 * len * u; }, 0.0, 1.0,
          kMaxDepth, kPieceRelTol, &err);
    } else if (pc.singular_b) {
      value = GK::integrate(
          [&](double u) { return f(pc.b - len * u * u) * 2.0 * len * u; }, 0.0, 1.0,
          kMaxDepth, kPieceRelTol, &err);
    } else {
      value = GK::integrate(f, pc.a, pc.b, kMaxDepth, kPieceRelTol, &err);
    }
    total.add(value);
    err_total.add(err);
  }

  CurveLengthResult out;
  out.length = total.value();
  out.est_error = err_total.value();
  out.n_panels = n;
  for (double km : minima)
    if (g_of(km, p) < kEpModulusSq) out.ep_crossings.push_back(km);
  return out;
}

}  // namespace

CurveLengthResult length_direct(const SshParams& p, int n_panels) {
  return integrate_curve(p, n_panels, [&p](double k) {
    const auto eo = ssh_epsilon_omega(k, p);
    const auto d = ssh_epsilon_omega_dk(k, p);
    const auto s = band_sample(eo);
    const double x = s.re(), y = s.im();
    const double e2 = x * x + y * y;
    if (e2 == 0.0) return 0.0;
    const double dx = (x * 0.5 * d.epsilon + y * 0.5 * d.omega) / e2;
    const double dy = (-y * 0.5 * d.epsilon + x * 0.5 * d.omega) / e2;
    return std::hypot(dx, dy);
  });
}

CurveLengthResult length_closed_form(const SshParams& p, int n_panels) {
  return integrate_curve(p, n_panels, [&p](double k) {
    const double sk = std::sin(k), ck = std::cos(k);
    const double num =
        std::abs(p.tp) * std::sqrt(p.t * p.t * sk * sk + p.delta * p.delta * ck * ck);
    if (num == 0.0) return 0.0;
    const double g = ssh_epsilon_omega(k, p).modulus_sq();
    if (g == 0.0) return 0.0;
    return num / std::sqrt(std::sqrt(g));
  });
}

CurveLengthResult length_polar(const SshParams& p, int n_panels) {
  return integrate_curve(p, n_panels, [&p](double k) {
    const auto eo = ssh_epsilon_omega(k, p);
    const auto d = ssh_epsilon_omega_dk(k, p);
    const double g = eo.modulus_sq();
    if (g == 0.0) return 0.0;
    const double mag = std::sqrt(std::sqrt(g));
    const double dmag = (eo.epsilon * d.epsilon + eo.omega * d.omega) / (2.0 * mag * mag * mag);
    const double dphi = (eo.epsilon * d.omega - eo.omega * d.epsilon) / (2.0 * g);
    return std::hypot(dmag, mag * dphi);
  });
}

const char* to_string(SshAxis a) {
  switch (a) {
    case SshAxis::t: return "t";
    case SshAxis::tp: return "tp";
    case SshAxis::delta: return "delta";
  }
  return "?";
}

namespace {

double& axis_ref(SshParams& p, SshAxis a) {
  switch (a) {
    case SshAxis::t: return p.t;
    case SshAxis::tp: return p.tp;
    case SshAxis::delta: return p.delta;
  }
  return p.t;
}

// Gap closes at k = 0 when (t + t')^2 = delta^2 and at k = pi when
// (t - t')^2 = delta^2.
bool gap_sign_changes(const SshParams& lo, const SshParams& hi) {
  auto f0 = [](const SshParams& q) { return (q.t + q.tp) * (q.t + q.tp) - q.delta * q.delta; };
  auto fpi = [](const SshParams& q) { return (q.t - q.tp) * (q.t - q.tp) - q.delta * q.delta; };
  return f0(lo) * f0(hi) <= 0.0 || fpi(lo) * fpi(hi) <= 0.0;
}

}  // namespace

LengthDerivative length_param_derivative(const SshParams& p, SshAxis which, double h) {
  if (!(h > 0.0 && h <= 1e-2)) throw UsageError("derivative step must lie in (0, 1e-2]");
  auto ell = [&](double offset) {
    SshParams q = p;
    axis_ref(q, which) += offset;
    return length_closed_form(q).length;
  };
  const double l0 = ell(0.0);
  const double lp = ell(h), lm = ell(-h);
  const double lp2 = ell(0.5 * h), lm2 = ell(-0.5 * h);
  const double d_h = (lp - lm) / (2.0 * h);
  const double d_h2 = (lp2 - lm2) / h;

  LengthDerivative out;
  out.value = (4.0 * d_h2 - d_h) / 3.0;
  out.left = (l0 - lm) / h;
  out.right = (lp - l0) / h;

  SshParams lo = p, hi = p;
  axis_ref(lo, which) -= h;
  axis_ref(hi, which) += h;
  if (gap_sign_changes(lo, hi) || std::abs(out.right - out.left) > 0.5)
    out.status = DerivativeStatus::straddles_boundary;
  return out;
}

PolarTrace polar_trace(const SshParams& p, int n) {
  if (n < 256) throw UsageError("polar trace needs n >= 256");
  validate(p, kMinLengthPanels);
  PolarTrace tr;
  tr.k.resize(n + 1);
  tr.magnitude.resize(n + 1);
  tr.phase.assign(n + 1, 0.0);
  tr.exceptional.assign(n + 1, false);

  std::vector<double> raw;
  std::vector<int> good;
  for (int j = 0; j <= n; ++j) {
    const double k = j == n ? kPi : -kPi + kTwoPi * j / n;
    const auto eo = ssh_epsilon_omega(k, p);
    const double g = eo.modulus_sq();
    tr.k[j] = k;
    tr.magnitude[j] = std::sqrt(std::sqrt(g));
    if (g < kEpModulusSq) {
      tr.exceptional[j] = true;
      continue;
    }
    const auto s = band_sample(eo);
    raw.push_back(std::atan2(s.im(), s.re()));
    good.push_back(j);
  }
  if (good.empty()) return tr;

  // E_+ with Re E >= 0 flips by pi where E^2 crosses the negative real axis;
  // unwrapping modulo pi follows the continuous band instead.
  const auto unwrapped = unwrap_phase(raw, kPi);
  for (std::size_t i = 0; i < good.size(); ++i) tr.phase[good[i]] = unwrapped[i];

  // Bridge exceptional nodes linearly between the nearest good neighbours.
  for (int j = 0; j <= n; ++j) {
    if (!tr.exceptional[j]) continue;
    const auto next = std::lower_bound(good.begin(), good.end(), j);
    if (next == good.begin()) {
      tr.phase[j] = tr.phase[*next];
    } else if (next == good.end()) {
      tr.phase[j] = tr.phase[good.back()];
    } else {
      const int jl = *(next - 1), jr = *next;
      const double w = double(j - jl) / double(jr - jl);
      tr.phase[j] = (1.0 - w) * tr.phase[jl] + w * tr.phase[jr];
    }
  }
  return tr;
}

WindingLengthEstimate winding_length_estimate(const SshParams& p, int n) {
  WindingLengthEstimate out;
  out.actual = length_closed_form(p).length;
  out.winding = winding_number(p, n).value;
  if (std::abs(out.winding) < 0.25) {
    out.applicable = false;
    out.estimate = 0.0;
    out.ratio = out.actual > 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  CompensatedSum factor;
  int violations = 0;
  for (int j = 0; j < n; ++j) {
    const double k = -kPi + kTwoPi * j / n;
    const auto eo = ssh_epsilon_omega(k, p);
    const auto d = ssh_epsilon_omega_dk(k, p);
    const double g = eo.modulus_sq();
    const double mag = std::sqrt(std::sqrt(g));
    const double dmag = (eo.epsilon * d.epsilon + eo.omega * d.omega) / (2.0 * mag * mag * mag);
    const double dphi = (eo.epsilon * d.omega - eo.omega * d.epsilon) / (2.0 * g);
    double f = mag;
    if (std::abs(dmag) < mag * std::abs(dphi)) {
      const double dmag_dphi = dmag / dphi;
      f += dmag_dphi * dmag_dphi / (2.0 * mag);
    } else if (dmag != 0.0) {
      ++violations;
    }
    factor.add(f);
  }
  out.violation_fraction = double(violations) / n;
  out.estimate = kTwoPi * std::abs(out.winding) * factor.value() / n;
  out.ratio = out.actual > 0.0 ? out.estimate / out.actual
                               : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace nhtopo
