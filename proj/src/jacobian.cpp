#include "nhtopo/jacobian.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "nhtopo/error.hpp"
#include "nhtopo/numerics.hpp"

namespace nhtopo {

namespace {


double numeric_det(const ChernParams& p, double kx, double ky) {
  const auto eo = chern_epsilon_omega(kx, ky, p);
  const auto dx = chern_epsilon_omega_dkx(kx, ky, p);
  const auto dy = chern_epsilon_omega_dky(kx, ky, p);
  const double e2 = std::sqrt(eo.modulus_sq());
  return (dx.epsilon * dy.omega - dx.omega * dy.epsilon) / (4.0 * e2);
}

}  // namespace

JacobianSample jacobian_at(const ChernParams& p, double kx, double ky) {
  const auto eo = chern_epsilon_omega(kx, ky, p);
  const auto s = band_sample(eo);
  const double x = s.re(), y = s.im();
  const double e2 = x * x + y * y;
  if (s.exceptional) throw DomainError("exceptional point: |E| <= 1e-6 at the requested k");
  JacobianSample out;
  out.k = {kx, ky};
  const EpsOmega d[2] = {chern_epsilon_omega_dkx(kx, ky, p), chern_epsilon_omega_dky(kx, ky, p)};
  for (int c = 0; c < 2; ++c) {
    out.matrix[0][c] = (x * d[c].epsilon + y * d[c].omega) / (2.0 * e2);
    out.matrix[1][c] = (x * d[c].omega - y * d[c].epsilon) / (2.0 * e2);
  }
  out.det = out.matrix[0][0] * out.matrix[1][1] - out.matrix[0][1] * out.matrix[1][0];
  return out;
}

double jacobian_det_closed(const ChernParams& p, double kx, double ky) {
  if (p.t != 1.0)
    throw UsageError("closed-form determinant needs t = 1; use the numeric jacobian");
  const double g = chern_epsilon_omega(kx, ky, p).modulus_sq();
  if (g <= kExceptionalModulusSq) throw DomainError("exceptional point: |E| <= 1e-6 at the requested k");
  const double e2 = std::sqrt(g);
  const double cy = std::cos(ky);
  return p.gamma * (p.m + cy) * std::sin(kx) * cy / e2;
}

ZeroLocus zero_locus(const ChernParams& p, int n, std::optional<double> tol) {
  if (n < 128) throw UsageError("zero locus needs n >= 128");
  const double h = kTwoPi / n;
  auto k_of = [&](int i) { return -kPi + h * i; };

  std::vector<double> det(std::size_t(n) * n);
  std::vector<char> valid(det.size(), 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto eo = chern_epsilon_omega(k_of(i), k_of(j), p);
      const std::size_t c = std::size_t(i) * n + j;
      if (eo.modulus_sq() <= kExceptionalModulusSq) {
        valid[c] = 0;
        det[c] = 0.0;
      } else {
        det[c] = numeric_det(p, k_of(i), k_of(j));
      }
    }

  ZeroLocus out;
  if (tol) {
    out.tolerance = *tol;
  } else {
    std::vector<double> mags;
    mags.reserve(det.size());
    for (std::size_t c = 0; c < det.size(); ++c)
      if (valid[c]) mags.push_back(std::abs(det[c]));
    out.tolerance = mags.empty() ? 0.0 : 1e-3 * median(std::move(mags));
  }
  const double eps = out.tolerance;

  auto emit = [&](double kx, double ky, double d) {
    out.points.push_back({kx, ky});
    out.det.push_back(d);
    const auto s = band_sample(chern_epsilon_omega(kx, ky, p));
    out.images.push_back({s.re(), s.im()});
  };

  // Zero crossing on the segment a -> b (a, b in k-space); bisection on det.
  auto refine = [&](KPoint a, KPoint b, double da) {
    for (int it = 0; it < 200; ++it) {
      const KPoint m{0.5 * (a.kx + b.kx), 0.5 * (a.ky + b.ky)};
      const auto eo = chern_epsilon_omega(m.kx, m.ky, p);
      if (eo.modulus_sq() <= kExceptionalModulusSq) return;
      const double dm = numeric_det(p, m.kx, m.ky);
      if (std::abs(dm) <= eps) {
        emit(m.kx, m.ky, dm);
        return;
      }
      if ((dm > 0) == (da > 0)) {
        a = m;
        da = dm;
      } else {
        b = m;
      }
    }
  };

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t c = std::size_t(i) * n + j;
      if (!valid[c]) continue;
      if (std::abs(det[c]) <= eps) {
        emit(k_of(i), k_of(j), det[c]);
        continue;
      }
      // Right and upper neighbours; the grid is periodic.
      const int nb[2][2] = {{(i + 1) % n, j}, {i, (j + 1) % n}};
      for (const auto& q : nb) {
        const std::size_t d = std::size_t(q[0]) * n + q[1];
        if (!valid[d] || std::abs(det[d]) <= eps) continue;
        if ((det[c] > 0) == (det[d] > 0)) continue;
        const KPoint a{k_of(i), k_of(j)};
        const KPoint b{k_of(i) + (q[0] != i ? h : 0.0), k_of(j) + (q[1] != j ? h : 0.0)};
        refine(a, b, det[c]);
      }
    }
  }
  return out;
}

namespace {

double segment_distance(EnergyPoint q, EnergyPoint a, EnergyPoint b) {
  const double vx = b.re - a.re, vy = b.im - a.im;
  const double wx = q.re - a.re, wy = q.im - a.im;
  const double len2 = vx * vx + vy * vy;
  double s = len2 > 0.0 ? (wx * vx + wy * vy) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return std::hypot(wx - s * vx, wy - s * vy);
}

}  // namespace

Correspondence boundary_correspondence(const ChernParams& p, int n, std::optional<double> r) {
  const auto boundary = boundary_length(p, n, r);
  Correspondence out;
  out.radius = boundary.radius;
  if (boundary.degenerate_1d) {
    out.applicable = false;
    return out;
  }
  const auto locus = zero_locus(p, std::max(n, 128));

  // Bucket boundary segments on a grid of cell size r.
  const double cell = boundary.radius;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool first = true;
  for (const auto& l : boundary.loops)
    for (const auto& v : l.vertices) {
      if (first) {
        x0 = x1 = v.re;
        y0 = y1 = v.im;
        first = false;
      }
      x0 = std::min(x0, v.re);
      x1 = std::max(x1, v.re);
      y0 = std::min(y0, v.im);
      y1 = std::max(y1, v.im);
    }
  const int nx = int((x1 - x0) / cell) + 1, ny = int((y1 - y0) / cell) + 1;
  std::vector<std::vector<std::pair<EnergyPoint, EnergyPoint>>> buckets(std::size_t(nx) * ny);
  auto cx = [&](double x) { return std::clamp(int(std::floor((x - x0) / cell)), 0, nx - 1); };
  auto cy = [&](double y) { return std::clamp(int(std::floor((y - y0) / cell)), 0, ny - 1); };
  for (const auto& l : boundary.loops)
    for (std::size_t i = 0; i + 1 < l.vertices.size(); ++i) {
      const auto a = l.vertices[i], b = l.vertices[i + 1];
      for (int ix = cx(std::min(a.re, b.re)); ix <= cx(std::max(a.re, b.re)); ++ix)
        for (int iy = cy(std::min(a.im, b.im)); iy <= cy(std::max(a.im, b.im)); ++iy)
          buckets[std::size_t(ix) * ny + iy].push_back({a, b});
    }

  auto near_boundary = [&](EnergyPoint q) {
    const int qx = int(std::floor((q.re - x0) / cell)), qy = int(std::floor((q.im - y0) / cell));
    for (int ix = std::max(0, qx - 1); ix <= std::min(nx - 1, qx + 1); ++ix)
      for (int iy = std::max(0, qy - 1); iy <= std::min(ny - 1, qy + 1); ++iy)
        for (const auto& [a, b] : buckets[std::size_t(ix) * ny + iy])
          if (segment_distance(q, a, b) <= boundary.radius) return true;
    return false;
  };

  std::size_t hits = 0;
  for (const auto& img : locus.images) {
    for (int branch : {1, -1}) {
      if (near_boundary({branch * img.re, branch * img.im})) ++hits;
      ++out.images;
    }
  }
  out.fraction = out.images ? double(hits) / double(out.images) : 1.0;
  return out;
}

void write_locus_csv(std::ostream& os, const ZeroLocus& locus) {
  const auto old = os.precision(17);
  os << "kx,ky,det,eR,eI\n";
  for (std::size_t i = 0; i < locus.points.size(); ++i)
    os << locus.points[i].kx << ',' << locus.points[i].ky << ',' << locus.det[i] << ','
       << locus.images[i].re << ',' << locus.images[i].im << '\n';
  os.precision(old);
}

}  // namespace nhtopo
