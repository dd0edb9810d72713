#include "nhtopo/boundary_2d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <unordered_set>

#include "nhtopo/error.hpp"
#include "nhtopo/numerics.hpp"

namespace nhtopo {

EnergyPointCloud sample_bulk(const ChernParams& p, int n) {
  if (n < 64) throw UsageError("BZ grid must be n >= 64");
  EnergyPointCloud cloud;
  cloud.grid_step = kTwoPi / n;
  const std::size_t total = 2 * std::size_t(n) * std::size_t(n);
  cloud.points.reserve(total);
  cloud.source.reserve(total);
  for (int i = 0; i < n; ++i) {
    const double kx = -kPi + cloud.grid_step * i;
    for (int j = 0; j < n; ++j) {
      const double ky = -kPi + cloud.grid_step * j;
      const auto s = band_sample(chern_epsilon_omega(kx, ky, p));
      if (s.exceptional) ++cloud.exceptional_nodes;
      for (int branch : {1, -1}) {
        cloud.points.push_back({branch * s.eR, branch * s.sigma * s.eI});
        cloud.source.push_back({kx, ky, branch});
      }
    }
  }
  return cloud;
}

namespace {

struct Vec {
  double x, y;
};
Vec operator-(EnergyPoint a, EnergyPoint b) { return {a.re - b.re, a.im - b.im}; }
double dot(Vec a, Vec b) { return a.x * b.x + a.y * b.y; }
double cross(Vec a, Vec b) { return a.x * b.y - a.y * b.x; }
double norm(Vec a) { return std::hypot(a.x, a.y); }

struct Box {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double extent() const { return std::max(x1 - x0, y1 - y0); }
};

Box bounding_box(const std::vector<EnergyPoint>& pts) {
  Box b{pts[0].re, pts[0].im, pts[0].re, pts[0].im};
  for (const auto& q : pts) {
    b.x0 = std::min(b.x0, q.re);
    b.x1 = std::max(b.x1, q.re);
    b.y0 = std::min(b.y0, q.im);
    b.y1 = std::max(b.y1, q.im);
  }
  return b;
}

constexpr long kMaxGridCells = 1L << 22;

// Uniform bucket grid over a fixed point set (counting-sort layout).
class Grid {
 public:
  Grid(const std::vector<EnergyPoint>& pts, double cell) : pts_(pts) {
    const Box b = bounding_box(pts);
    x0_ = b.x0;
    y0_ = b.y0;
    const double ext = std::max(b.extent(), 1e-300);
    cell = std::max(cell, ext / std::sqrt(double(kMaxGridCells)));
    cell_ = cell > 0.0 ? cell : 1.0;
    nx_ = int((b.x1 - b.x0) / cell_) + 1;
    ny_ = int((b.y1 - b.y0) / cell_) + 1;
    start_.assign(std::size_t(nx_) * ny_ + 1, 0);
    std::vector<int> key(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      key[i] = index(cx(pts[i].re), cy(pts[i].im));
      ++start_[key[i] + 1];
    }
    std::partial_sum(start_.begin(), start_.end(), start_.begin());
    items_.resize(pts.size());
    std::vector<int> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < pts.size(); ++i) items_[fill[key[i]]++] = int(i);
  }

  // Calls f(j, distance) for every point within `radius` of q.
  template <class F>
  void for_each_near(EnergyPoint q, double radius, F&& f) const {
    const int ix0 = cx(q.re - radius), ix1 = cx(q.re + radius);
    const int iy0 = cy(q.im - radius), iy1 = cy(q.im + radius);
    for (int ix = ix0; ix <= ix1; ++ix) {
      for (int iy = iy0; iy <= iy1; ++iy) {
        const int c = index(ix, iy);
        for (int s = start_[c]; s < start_[c + 1]; ++s) {
          const int j = items_[s];
          const double d = std::hypot(pts_[j].re - q.re, pts_[j].im - q.im);
          if (d <= radius) f(j, d);
        }
      }
    }
  }

  // Nearest point to q other than `self`; grows the search ring until found.
  std::pair<int, double> nearest(EnergyPoint q, int self) const {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    const int qx = cx(q.re), qy = cy(q.im);
    const int max_ring = std::max(nx_, ny_);
    for (int ring = 0; ring <= max_ring; ++ring) {
      for (int ix = qx - ring; ix <= qx + ring; ++ix) {
        for (int iy = qy - ring; iy <= qy + ring; ++iy) {
          if (std::max(std::abs(ix - qx), std::abs(iy - qy)) != ring) continue;
          if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) continue;
          const int c = ix * ny_ + iy;
          for (int s = start_[c]; s < start_[c + 1]; ++s) {
            const int j = items_[s];
            if (j == self) continue;
            const double d = std::hypot(pts_[j].re - q.re, pts_[j].im - q.im);
            if (d < best_d) {
              best_d = d;
              best = j;
            }
          }
        }
      }
      // Everything beyond this ring is at least ring * cell away.
      if (best >= 0 && best_d <= ring * cell_) break;
    }
    return {best, best_d};
  }

 private:
  int cx(double x) const { return std::clamp(int(std::floor((x - x0_) / cell_)), 0, nx_ - 1); }
  int cy(double y) const { return std::clamp(int(std::floor((y - y0_) / cell_)), 0, ny_ - 1); }
  int index(int ix, int iy) const { return ix * ny_ + iy; }

  const std::vector<EnergyPoint>& pts_;
  double x0_ = 0, y0_ = 0, cell_ = 1;
  int nx_ = 1, ny_ = 1;
  std::vector<int> start_, items_;
};

double typical_spacing(const std::vector<EnergyPoint>& pts) {
  const Box b = bounding_box(pts);
  const double w = b.x1 - b.x0, h = b.y1 - b.y0;
  const double n = double(pts.size());
  const double area_based = std::sqrt(std::max(w * h, 0.0) / n);
  const double line_based = std::max(w, h) / n;
  const double s = std::max(area_based, line_based);
  return s > 0.0 ? s : 1.0;
}

// Drops points closer than a tiny fraction of the cloud size to an earlier
// point (symmetric k-points map onto the same energy).
std::vector<EnergyPoint> distinct_points(const std::vector<EnergyPoint>& pts) {
  if (pts.empty()) return {};
  const double eps = 1e-10 * std::max(bounding_box(pts).extent(), 1e-300);
  const Grid grid(pts, typical_spacing(pts));
  std::vector<char> keep(pts.size(), 1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    grid.for_each_near(pts[i], eps, [&](int j, double) {
      if (std::size_t(j) < i && keep[j]) keep[i] = 0;
    });
  }
  std::vector<EnergyPoint> out;
  out.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (keep[i]) out.push_back(pts[i]);
  return out;
}

SpacingStats spacing_of_distinct(const std::vector<EnergyPoint>& pts) {
  SpacingStats s;
  if (pts.size() < 2) return s;
  const Grid grid(pts, typical_spacing(pts));
  std::vector<double> d(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) d[i] = grid.nearest(pts[i], int(i)).second;
  s.max = *std::max_element(d.begin(), d.end());
  s.median = median(std::move(d));
  return s;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int a) {
    while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

struct Pivoter {
  const std::vector<EnergyPoint>& pts;
  const Grid& grid;
  double r;

  // Rotates the empty disk centred at c about pts[q] counter-clockwise until
  // it touches another point. The previously visited point is only taken
  // when nothing else is reachable.
  bool step(int q, EnergyPoint c, int prev, int& next, EnergyPoint& c_next) const {
    const EnergyPoint pq = pts[q];
    const Vec a = c - pq;
    double best = std::numeric_limits<double>::infinity();
    next = -1;
    grid.for_each_near(pq, 2.0 * r, [&](int s, double d) {
      if (s == q || d == 0.0) return;
      const Vec u{(pts[s].re - pq.re) / d, (pts[s].im - pq.im) / d};
      const double h = std::sqrt(std::max(0.0, r * r - 0.25 * d * d));
      const EnergyPoint cs{pq.re + 0.5 * d * u.x + h * u.y, pq.im + 0.5 * d * u.y - h * u.x};
      const Vec b = cs - pq;
      double ang = std::atan2(cross(a, b), dot(a, b));
      if (ang < -1e-10)
        ang += kTwoPi;
      else if (ang < 0.0)
        ang = 0.0;
      if (s == prev) ang = kTwoPi;
      if (ang < best) {
        best = ang;
        next = s;
        c_next = cs;
      }
    });
    return next >= 0;
  }
};

std::uint64_t edge_key(int a, int b) { return (std::uint64_t(a) << 32) | std::uint32_t(b); }

struct TracedLoop {
  std::vector<int> vertices;  // closed
  bool ok = true;
};

TracedLoop trace_loop(const Pivoter& pv, int q0, EnergyPoint c0,
                      std::unordered_set<std::uint64_t>& used, std::size_t max_steps) {
  TracedLoop loop;
  int s0 = -1;
  EnergyPoint c{};
  if (!pv.step(q0, c0, -1, s0, c)) {
    loop.vertices = {q0, q0};
    return loop;
  }
  if (used.count(edge_key(q0, s0))) {
    loop.ok = false;
    return loop;
  }
  loop.vertices = {q0, s0};
  used.insert(edge_key(q0, s0));
  int prev = q0, q = s0;
  for (std::size_t steps = 0;; ++steps) {
    if (steps > max_steps) throw Error("ball pivoting did not close a loop");
    int s = -1;
    EnergyPoint cn{};
    pv.step(q, c, prev, s, cn);
    if (q == q0 && s == s0) break;
    used.insert(edge_key(q, s));
    loop.vertices.push_back(s);
    prev = q;
    q = s;
    c = cn;
  }
  return loop;
}

double polygon_length(const std::vector<EnergyPoint>& v) {
  CompensatedSum sum;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) sum.add(norm(v[i + 1] - v[i]));
  return sum.value();
}

// Raster of the distance from cell centres to the nearest point, capped at
// 2r. Empty disks of radius r are centred in cells whose value is >= r.
class FreeSpace {
 public:
  FreeSpace(const std::vector<EnergyPoint>& pts, double r) : r_(r) {
    const Box b = bounding_box(pts);
    cell_ = r / 3.0;
    const double pad = 2.0 * r;
    const double w = b.x1 - b.x0 + 2 * pad, h = b.y1 - b.y0 + 2 * pad;
    if ((w / cell_) * (h / cell_) > double(kMaxGridCells)) cell_ = std::sqrt(w * h / kMaxGridCells);
    nx_ = int(w / cell_) + 1;
    ny_ = int(h / cell_) + 1;
    ox_ = b.x0 - pad;
    oy_ = b.y0 - pad;
    dist_.assign(std::size_t(nx_) * ny_, float(2.0 * r));
    const double reach = r + cell_;
    const int span = int(std::ceil(reach / cell_)) + 1;
    for (const auto& q : pts) {
      const int qx = int((q.re - ox_) / cell_), qy = int((q.im - oy_) / cell_);
      for (int ix = std::max(0, qx - span); ix <= std::min(nx_ - 1, qx + span); ++ix)
        for (int iy = std::max(0, qy - span); iy <= std::min(ny_ - 1, qy + span); ++iy) {
          const auto c = center(ix, iy);
          const float d = float(std::hypot(c.re - q.re, c.im - q.im));
          float& slot = dist_[std::size_t(ix) * ny_ + iy];
          if (d < slot) slot = d;
        }
    }
  }

  // Points that some empty disk of radius r can touch: within r + cell/sqrt2
  // of a cell centre lying at least r - cell/sqrt2 from every point.
  std::vector<char> touchable(const std::vector<EnergyPoint>& pts) const {
    const double slack = cell_ * std::sqrt(0.5) + 1e-12 * r_;
    const double reach = r_ + slack;
    const int span = int(std::ceil(reach / cell_)) + 1;
    std::vector<char> out(pts.size(), 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& q = pts[i];
      const int qx = int((q.re - ox_) / cell_), qy = int((q.im - oy_) / cell_);
      for (int ix = std::max(0, qx - span); ix <= std::min(nx_ - 1, qx + span) && !out[i]; ++ix)
        for (int iy = std::max(0, qy - span); iy <= std::min(ny_ - 1, qy + span); ++iy) {
          if (dist_[std::size_t(ix) * ny_ + iy] < r_ - slack) continue;
          const auto c = center(ix, iy);
          if (std::hypot(c.re - q.re, c.im - q.im) <= reach) {
            out[i] = 1;
            break;
          }
        }
    }
    return out;
  }

  // One disk centre per free component not connected to the border.
  std::vector<std::pair<int, EnergyPoint>> hole_seeds(const std::vector<EnergyPoint>& pts,
                                                      const Grid& grid) const {
    // 0 free, 1 blocked, 2 outside, 3 visited hole
    std::vector<std::uint8_t> state(dist_.size());
    for (std::size_t c = 0; c < dist_.size(); ++c) state[c] = dist_[c] >= r_ ? 0 : 1;
    std::vector<int> stack, members;
    auto flood = [&](int start, std::uint8_t mark, std::vector<int>* out) {
      stack.assign(1, start);
      state[start] = mark;
      while (!stack.empty()) {
        const int c = stack.back();
        stack.pop_back();
        if (out) out->push_back(c);
        const int ix = c / ny_, iy = c % ny_;
        const int nb[4][2] = {{ix - 1, iy}, {ix + 1, iy}, {ix, iy - 1}, {ix, iy + 1}};
        for (const auto& q : nb) {
          if (q[0] < 0 || q[1] < 0 || q[0] >= nx_ || q[1] >= ny_) continue;
          const int k = q[0] * ny_ + q[1];
          if (state[k] == 0) {
            state[k] = mark;
            stack.push_back(k);
          }
        }
      }
    };
    for (int ix = 0; ix < nx_; ++ix)
      for (int iy : {0, ny_ - 1})
        if (state[std::size_t(ix) * ny_ + iy] == 0) flood(ix * ny_ + iy, 2, nullptr);
    for (int iy = 0; iy < ny_; ++iy)
      for (int ix : {0, nx_ - 1})
        if (state[std::size_t(ix) * ny_ + iy] == 0) flood(ix * ny_ + iy, 2, nullptr);

    std::vector<std::pair<int, EnergyPoint>> seeds;
    for (int c = 0; c < nx_ * ny_; ++c) {
      if (state[c] != 0) continue;
      members.clear();
      flood(c, 3, &members);
      // The member cell farthest from the points gives the roomiest disk.
      int best = members.front();
      for (int m : members)
        if (dist_[m] > dist_[best]) best = m;
      const auto cc = center(best / ny_, best % ny_);
      const auto [pidx, d] = grid.nearest(cc, -1);
      if (pidx < 0 || d < r_) continue;
      const Vec dir = cc - pts[pidx];
      seeds.push_back({pidx, {pts[pidx].re + r_ * dir.x / d, pts[pidx].im + r_ * dir.y / d}});
    }
    return seeds;
  }

 private:
  EnergyPoint center(int ix, int iy) const {
    return {ox_ + (ix + 0.5) * cell_, oy_ + (iy + 0.5) * cell_};
  }

  double r_, cell_ = 1, ox_ = 0, oy_ = 0;
  int nx_ = 1, ny_ = 1;
  std::vector<float> dist_;
};

// Components of the "disks of radius r overlap" graph. Points sharing a cell
// of side sqrt(2) r are always linked; neighbouring cells are linked as soon
// as one pair lies within 2r.
std::vector<int> components(const std::vector<EnergyPoint>& pts, double r) {
  const double side = std::sqrt(2.0) * r;
  const Box b = bounding_box(pts);
  const long nx = long((b.x1 - b.x0) / side) + 1, ny = long((b.y1 - b.y0) / side) + 1;
  UnionFind uf(pts.size());
  if (nx * ny > kMaxGridCells) {
    const Grid grid(pts, r);
    for (std::size_t i = 0; i < pts.size(); ++i)
      grid.for_each_near(pts[i], 2.0 * r, [&](int j, double) { uf.unite(int(i), j); });
  } else {
    std::vector<std::vector<int>> cells(std::size_t(nx * ny));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const long ix = long((pts[i].re - b.x0) / side), iy = long((pts[i].im - b.y0) / side);
      cells[std::size_t(ix * ny + iy)].push_back(int(i));
    }
    for (auto& c : cells)
      for (std::size_t k = 1; k < c.size(); ++k) uf.unite(c[0], c[k]);
    const double lim = 2.0 * r;
    for (long ix = 0; ix < nx; ++ix)
      for (long iy = 0; iy < ny; ++iy) {
        const auto& a = cells[std::size_t(ix * ny + iy)];
        if (a.empty()) continue;
        for (long dx = 0; dx <= 2; ++dx)
          for (long dy = -2; dy <= 2; ++dy) {
            if (dx == 0 && dy <= 0) continue;
            const long jx = ix + dx, jy = iy + dy;
            if (jx >= nx || jy < 0 || jy >= ny) continue;
            const auto& bb = cells[std::size_t(jx * ny + jy)];
            if (bb.empty() || uf.find(a[0]) == uf.find(bb[0])) continue;
            bool linked = false;
            for (int p : a) {
              for (int q : bb)
                if (std::hypot(pts[p].re - pts[q].re, pts[p].im - pts[q].im) <= lim) {
                  linked = true;
                  break;
                }
              if (linked) break;
            }
            if (linked) uf.unite(a[0], bb[0]);
          }
      }
  }
  std::vector<int> comp(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) comp[i] = uf.find(int(i));
  return comp;
}

bool nested_in(const std::vector<EnergyPoint>& inner, const std::vector<EnergyPoint>& outer) {
  if (outer.size() < 4) return false;
  int inside = 0, total = 0;
  for (std::size_t i = 0; i + 1 < inner.size(); ++i) {
    ++total;
    if (point_in_polygon(inner[i], outer)) ++inside;
  }
  return total > 0 && 2 * inside > total;
}

}  // namespace

SpacingStats nearest_neighbor_spacing(const std::vector<EnergyPoint>& points) {
  return spacing_of_distinct(distinct_points(points));
}

double default_pivot_radius(const SpacingStats& s, double covering) {
  return std::max({2.5 * s.median, 2.0 * s.max, 1.5 * covering}) * (1.0 + 1e-9);
}

double covering_radius(const ChernParams& p, int n) {
  if (n < 2) throw UsageError("covering radius needs n >= 2");
  const double h = kTwoPi / n;
  std::vector<cplx> corner(std::size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      corner[std::size_t(i) * n + j] = band_sample(chern_epsilon_omega(-kPi + h * i, -kPi + h * j, p)).value();
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cplx c = band_sample(chern_epsilon_omega(-kPi + h * (i + 0.5), -kPi + h * (j + 0.5), p)).value();
      double best = std::numeric_limits<double>::infinity();
      for (int di = 0; di <= 1; ++di)
        for (int dj = 0; dj <= 1; ++dj) {
          const cplx v = corner[std::size_t((i + di) % n) * n + (j + dj) % n];
          best = std::min({best, std::abs(c - v), std::abs(c + v)});
        }
      worst = std::max(worst, best);
    }
  return worst;
}

bool point_in_polygon(const EnergyPoint& q, const std::vector<EnergyPoint>& poly) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.im > q.im) != (b.im > q.im)) {
      const double x = a.re + (q.im - a.im) * (b.re - a.re) / (b.im - a.im);
      if (q.re < x) in = !in;
    }
  }
  return in;
}

double convex_hull_perimeter(const std::vector<EnergyPoint>& points) {
  std::vector<EnergyPoint> p = points;
  std::sort(p.begin(), p.end(), [](auto a, auto b) { return a.re < b.re || (a.re == b.re && a.im < b.im); });
  p.erase(std::unique(p.begin(), p.end(),
                      [](auto a, auto b) { return a.re == b.re && a.im == b.im; }),
          p.end());
  if (p.size() < 2) return 0.0;
  std::vector<EnergyPoint> hull(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], p[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k);
  return polygon_length(hull);
}

double principal_thickness(const std::vector<EnergyPoint>& points) {
  if (points.size() < 2) return 0.0;
  double mx = 0, my = 0;
  for (const auto& q : points) {
    mx += q.re;
    my += q.im;
  }
  mx /= points.size();
  my /= points.size();
  double sxx = 0, syy = 0, sxy = 0;
  for (const auto& q : points) {
    sxx += (q.re - mx) * (q.re - mx);
    syy += (q.im - my) * (q.im - my);
    sxy += (q.re - mx) * (q.im - my);
  }
  const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  const double nx = -std::sin(theta), ny = std::cos(theta);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& q : points) {
    const double s = q.re * nx + q.im * ny;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return hi - lo;
}

BoundaryResult collapsed_boundary(const std::vector<EnergyPoint>& points, double r) {
  if (points.empty()) throw UsageError("empty point cloud");
  double mx = 0, my = 0;
  for (const auto& q : points) {
    mx += q.re;
    my += q.im;
  }
  mx /= points.size();
  my /= points.size();
  double sxx = 0, syy = 0, sxy = 0;
  for (const auto& q : points) {
    sxx += (q.re - mx) * (q.re - mx);
    syy += (q.im - my) * (q.im - my);
    sxy += (q.re - mx) * (q.im - my);
  }
  const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  const double ux = std::cos(theta), uy = std::sin(theta);
  std::vector<double> s(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) s[i] = (points[i].re - mx) * ux + (points[i].im - my) * uy;
  std::sort(s.begin(), s.end());

  BoundaryResult out;
  out.degenerate_1d = true;
  out.radius = r;
  auto emit = [&](double a, double b, int count) {
    BoundaryLoop loop;
    const EnergyPoint pa{mx + a * ux, my + a * uy}, pb{mx + b * ux, my + b * uy};
    loop.vertices = {pa, pb, pa};
    loop.perimeter = 2.0 * (b - a);
    loop.enclosed = count;
    out.loops.push_back(std::move(loop));
  };
  std::size_t first = 0;
  for (std::size_t i = 1; i <= s.size(); ++i) {
    if (i == s.size() || s[i] - s[i - 1] > 2.0 * r) {
      emit(s[first], s[i - 1], int(i - first));
      first = i;
    }
  }
  CompensatedSum total;
  for (const auto& l : out.loops) total.add(l.perimeter);
  out.total_length = total.value();
  out.region_count = int(out.loops.size());
  return out;
}

namespace {

BoundaryResult pivot_distinct(const std::vector<EnergyPoint>& pts, double r) {
  const auto comp = components(pts, r);

  // Leftmost point of each component; the disk to its left is empty.
  std::vector<int> seed(pts.size(), -1), comp_size(pts.size(), 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int c = comp[i];
    ++comp_size[c];
    if (seed[c] < 0 || pts[i].re < pts[seed[c]].re ||
        (pts[i].re == pts[seed[c]].re && pts[i].im < pts[seed[c]].im))
      seed[c] = int(i);
  }

  // Only points an empty disk can touch take part in pivoting.
  const FreeSpace free_space(pts, r);
  const auto touch = free_space.touchable(pts);
  std::vector<int> local(pts.size(), -1);
  std::vector<int> global;
  std::vector<EnergyPoint> sub;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!touch[i]) continue;
    local[i] = int(sub.size());
    global.push_back(int(i));
    sub.push_back(pts[i]);
  }
  const Grid sub_grid(sub, r);
  const Pivoter pv{sub, sub_grid, r};

  std::unordered_set<std::uint64_t> used;
  const std::size_t max_steps = 8 * sub.size() + 16;
  BoundaryResult out;
  out.radius = r;
  auto add_loop = [&](const TracedLoop& t, bool hole, int enclosed) {
    BoundaryLoop loop;
    loop.vertices.reserve(t.vertices.size());
    for (int v : t.vertices) loop.vertices.push_back(sub[v]);
    loop.perimeter = polygon_length(loop.vertices);
    loop.hole = hole;
    loop.enclosed = enclosed;
    out.loops.push_back(std::move(loop));
  };
  for (std::size_t c = 0; c < pts.size(); ++c) {
    if (seed[c] < 0) continue;
    const int q = local[seed[c]];
    if (q < 0) throw Error("internal: component seed is not touchable");
    const auto t = trace_loop(pv, q, {sub[q].re - r, sub[q].im}, used, max_steps);
    if (t.ok) add_loop(t, false, comp_size[c]);
  }
  const Grid grid(pts, r);
  for (const auto& [q, center] : free_space.hole_seeds(pts, grid)) {
    if (local[q] < 0) continue;
    const auto t = trace_loop(pv, local[q], center, used, max_steps);
    if (t.ok) add_loop(t, true, 0);
  }

  CompensatedSum total;
  for (const auto& l : out.loops) total.add(l.perimeter);
  out.total_length = total.value();
  for (std::size_t i = 0; i < out.loops.size(); ++i) {
    if (out.loops[i].hole) continue;
    bool nested = false;
    for (std::size_t j = 0; j < out.loops.size() && !nested; ++j)
      if (i != j && !out.loops[j].hole && nested_in(out.loops[i].vertices, out.loops[j].vertices))
        nested = true;
    if (!nested) ++out.region_count;
  }
  return out;
}

void require_radius(const SpacingStats& spacing, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw UsageError("pivot radius must be positive and finite");
  if (r < 2.0 * spacing.max * (1.0 - 1e-12))
    throw UsageError("pivot radius " + std::to_string(r) +
                     " is below 2 x max nearest-neighbour spacing (" +
                     std::to_string(2.0 * spacing.max) + "); use a larger radius");
}

}  // namespace

BoundaryResult ball_pivot_boundary(const std::vector<EnergyPoint>& input, double r) {
  if (input.size() < 3) throw UsageError("ball pivoting needs at least 3 points");
  const auto pts = distinct_points(input);
  if (pts.size() < 3) throw UsageError("ball pivoting needs at least 3 distinct points");
  require_radius(spacing_of_distinct(pts), r);
  return pivot_distinct(pts, r);
}

BoundaryResult boundary_length(const ChernParams& p, int n, std::optional<double> r) {
  const auto cloud = sample_bulk(p, n);
  const auto pts = distinct_points(cloud.points);
  const auto spacing = spacing_of_distinct(pts);
  const double radius = r ? *r : default_pivot_radius(spacing, covering_radius(p, n));
  BoundaryResult out;
  if (principal_thickness(pts) < 2.0 * radius) {
    out = collapsed_boundary(pts, radius);
  } else {
    if (pts.size() < 3) throw UsageError("ball pivoting needs at least 3 distinct points");
    require_radius(spacing, radius);
    out = pivot_distinct(pts, radius);
  }
  out.exceptional_nodes = cloud.exceptional_nodes;
  return out;
}

void write_boundary_csv(std::ostream& os, const EnergyPointCloud& cloud, const BoundaryResult& result) {
  const auto old = os.precision(17);
  os << "eR,eI,loop-id,vertex-order\n";
  for (const auto& q : cloud.points) os << q.re << ',' << q.im << ",-1,-1\n";
  for (std::size_t l = 0; l < result.loops.size(); ++l) {
    const auto& v = result.loops[l].vertices;
    for (std::size_t i = 0; i < v.size(); ++i) os << v[i].re << ',' << v[i].im << ',' << l << ',' << i << '\n';
  }
  os.precision(old);
}

}  // namespace nhtopo
