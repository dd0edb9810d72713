#pragma once
// Independent reference computations used by the tests. None of these call
// into the library's length, invariant or boundary code.

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "nhtopo/model.hpp"

namespace oracle {

using cplx = std::complex<double>;
constexpr double pi = std::numbers::pi;

inline cplx ssh_e2(double k, double t, double tp, double delta) {
  const cplx qp = (t - delta) + tp * std::exp(cplx(0, k));
  const cplx qm = (t + delta) + tp * std::exp(cplx(0, -k));
  return qp * qm;
}

inline cplx chern_e2(double kx, double ky, double t, double m, double gamma) {
  const cplx hx = t * std::sin(kx);
  const cplx hy = cplx(t * std::sin(ky), -gamma);
  const cplx hz = m + t * std::cos(kx) + t * std::cos(ky);
  return hx * hx + hy * hy + hz * hz;
}

/// Length of the continuously tracked square root of E^2(k) over one BZ
/// period, as a polyline through n points.
inline double ssh_polyline_length(double t, double tp, double delta, int n) {
  double total = 0.0;
  cplx prev = std::sqrt(ssh_e2(-pi, t, tp, delta));
  for (int j = 1; j <= n; ++j) {
    const double k = -pi + 2.0 * pi * j / n;
    cplx e = std::sqrt(ssh_e2(k, t, tp, delta));
    if (std::abs(-e - prev) < std::abs(e - prev)) e = -e;
    total += std::abs(e - prev);
    prev = e;
  }
  return total;
}

/// Richardson extrapolation of the polyline length (error ~ n^-2).
inline double ssh_polyline_extrapolated(double t, double tp, double delta, int n) {
  const double a = ssh_polyline_length(t, tp, delta, n);
  const double b = ssh_polyline_length(t, tp, delta, 2 * n);
  return (4.0 * b - a) / 3.0;
}

/// Winding of z0 + r e^{ik} around the origin.
inline int circle_winding(double z0, double r) {
  if (std::abs(z0) < std::abs(r)) return r > 0 ? 1 : -1;
  return 0;
}

/// Lattice Chern number of the lower band of H = h . sigma from biorthogonal
/// link variables U = <L_k|R_{k+mu}> with <L_k|R_k> = 1. With the connection
/// A = i <L|dR>, U ~ exp(-i A dk), so the Chern number is minus the summed
/// plaquette phase over 2 pi. The lower band is
/// the eigenvalue with negative projection on the direction e^{i theta};
/// returns nullopt if that projection changes sign on the grid.
inline std::optional<int> fukui_chern(double t, double m, double gamma, int n, double theta = 0.0) {
  struct Vec {
    cplx a, b;
  };
  const cplx dir = std::exp(cplx(0, -theta));
  std::vector<Vec> right(std::size_t(n) * n), left(right.size());
  auto at = [n](int i, int j) { return std::size_t((i + n) % n) * n + std::size_t((j + n) % n); };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double kx = -pi + 2.0 * pi * i / n, ky = -pi + 2.0 * pi * j / n;
      const cplx hx = t * std::sin(kx);
      const cplx hy = cplx(t * std::sin(ky), -gamma);
      const cplx hz = m + t * std::cos(kx) + t * std::cos(ky);
      cplx lam = std::sqrt(hx * hx + hy * hy + hz * hz);
      if ((lam * dir).real() > 0) lam = -lam;
      if (std::abs((lam * dir).real()) < 1e-9) return std::nullopt;
      // H R = lam R and u H = lam u for the row vector u.
      Vec r1{hx - cplx(0, 1) * hy, lam - hz}, r2{lam + hz, hx + cplx(0, 1) * hy};
      Vec u1{hx + cplx(0, 1) * hy, lam - hz}, u2{lam + hz, hx - cplx(0, 1) * hy};
      const Vec r = std::norm(r1.a) + std::norm(r1.b) >= std::norm(r2.a) + std::norm(r2.b) ? r1 : r2;
      Vec u = std::norm(u1.a) + std::norm(u1.b) >= std::norm(u2.a) + std::norm(u2.b) ? u1 : u2;
      const cplx norm = u.a * r.a + u.b * r.b;
      u.a /= norm;
      u.b /= norm;
      right[at(i, j)] = r;
      left[at(i, j)] = u;
    }
  auto link = [&](int i, int j, int di, int dj) {
    const auto& u = left[at(i, j)];
    const auto& r = right[at(i + di, j + dj)];
    return u.a * r.a + u.b * r.b;
  };
  double flux = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cplx f = link(i, j, 1, 0) * link(i + 1, j, 0, 1) / (link(i, j + 1, 1, 0) * link(i, j, 0, 1));
      flux += std::arg(f);
    }
  return int(std::lround(-flux / (2.0 * pi)));
}

/// Deterministic generator for the property tests.
inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20240611u);
  return g;
}

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

/// Points on a circle of radius r about (cx, cy).
inline std::vector<std::pair<double, double>> circle_points(double cx, double cy, double r, int n) {
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * pi * i / n;
    out.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
  }
  return out;
}

}  // namespace oracle
