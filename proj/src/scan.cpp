#include "nhtopo/scan.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>

#include <json.hpp>

#include "nhtopo/band_geometry_1d.hpp"
#include "nhtopo/boundary_2d.hpp"
#include "nhtopo/error.hpp"
#include "nhtopo/invariants.hpp"
#include "nhtopo/numerics.hpp"

namespace nhtopo {

const char* to_string(CellFlag f) {
  switch (f) {
    case CellFlag::ok: return "ok";
    case CellFlag::ep_adjacent: return "ep-adjacent";
    case CellFlag::degenerate: return "degenerate";
  }
  return "?";
}

const char* to_string(TransitionClass c) {
  switch (c) {
    case TransitionClass::none: return "none";
    case TransitionClass::jump: return "jump";
    case TransitionClass::kink: return "kink";
    case TransitionClass::boundary_exact: return "boundary-exact";
  }
  return "?";
}

std::size_t TransitionMap::count(TransitionClass c) const {
  return std::size_t(std::count(cells.begin(), cells.end(), c));
}

ParamMap LengthSurface::params_at(int i1, int i2) const {
  ParamMap p = fixed;
  p[axis1.name] = axis1.value(i1);
  p[axis2.name] = axis2.value(i2);
  return p;
}

namespace {

void check_axis(const ModelInfo& info, const ScanAxis& a) {
  if (std::find(info.params.begin(), info.params.end(), a.name) == info.params.end()) {
    std::string valid;
    for (const auto& n : info.params) valid += (valid.empty() ? "" : ", ") + n;
    throw UsageError("invalid axis '" + a.name + "' for model " + info.id + " (valid: " + valid + ")");
  }
  if (a.n != 1 && a.n < 16) throw UsageError("axis '" + a.name + "' needs n >= 16 (or n = 1)");
  if (!std::isfinite(a.lo) || !std::isfinite(a.hi)) throw UsageError("axis range must be finite");
  if (a.n > 1 && !(a.hi > a.lo)) throw UsageError("axis '" + a.name + "' needs hi > lo");
}

// A 1D band curve shrinking to a point makes the length a cone in parameter
// space. Cells whose linear extrapolation reaches zero length within two
// cells are marked degenerate.
void mark_collapsed_curves(LengthSurface& s) {
  const int n1 = s.axis1.n, n2 = s.axis2.n;
  std::vector<bool> collapsed(s.values.size(), false);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      const double v = s.values[s.index(i, j)];
      double slope = 0.0;
      const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
      for (const auto& q : nb) {
        if (q[0] < 0 || q[1] < 0 || q[0] >= n1 || q[1] >= n2) continue;
        slope = std::max(slope, std::abs(s.values[s.index(q[0], q[1])] - v));
      }
      if (v <= 2.0 * slope) collapsed[s.index(i, j)] = true;
    }
  for (std::size_t c = 0; c < collapsed.size(); ++c)
    if (collapsed[c]) s.flags[c] = CellFlag::degenerate;
}

}  // namespace

LengthSurface sweep(std::string_view model_id, const ScanAxis& axis1, const ScanAxis& axis2,
                    const ParamMap& fixed, const SweepOptions& options) {
  const auto& info = model_info(model_id);
  check_axis(info, axis1);
  check_axis(info, axis2);
  if (axis1.name == axis2.name) throw UsageError("sweep axes must differ");

  LengthSurface s;
  s.model = info.id;
  s.dimension = info.dimension;
  s.axis1 = axis1;
  s.axis2 = axis2;
  s.fixed = info.defaults;
  for (const auto& [k, v] : fixed) s.fixed[k] = v;
  s.fixed[axis1.name] = axis1.value(0);
  s.fixed[axis2.name] = axis2.value(0);
  // Validates names and values once up front.
  if (info.dimension == 1)
    (void)ssh_params(s.fixed);
  else
    (void)chern_params(s.fixed);

  const std::size_t cells = std::size_t(axis1.n) * axis2.n;
  s.values.assign(cells, 0.0);
  s.flags.assign(cells, CellFlag::ok);
  if (info.dimension == 2) s.regions.assign(cells, 0);

  parallel_for(cells, options.threads, [&](std::size_t c) {
    const int i1 = int(c / axis2.n), i2 = int(c % axis2.n);
    const auto params = s.params_at(i1, i2);
    if (info.dimension == 1) {
      const auto r = length_closed_form(ssh_params(params), options.panels);
      s.values[c] = r.length;
      if (!r.ep_crossings.empty()) s.flags[c] = CellFlag::ep_adjacent;
    } else {
      const auto r = boundary_length(chern_params(params), options.bz_n);
      s.values[c] = r.total_length;
      s.regions[c] = r.region_count;
      if (r.degenerate_1d)
        s.flags[c] = CellFlag::degenerate;
      else if (r.exceptional_nodes > 0)
        s.flags[c] = CellFlag::ep_adjacent;
    }
  });
  if (info.dimension == 1) mark_collapsed_curves(s);
  return s;
}

namespace {

int rank(TransitionClass c) {
  switch (c) {
    case TransitionClass::none: return 0;
    case TransitionClass::boundary_exact: return 1;
    case TransitionClass::kink: return 2;
    case TransitionClass::jump: return 3;
  }
  return 0;
}

void promote(TransitionClass& slot, TransitionClass c) {
  if (rank(c) > rank(slot)) slot = c;
}

double window_median(const std::vector<double>& a, std::size_t k, std::size_t lo, std::size_t hi,
                     int window) {
  const std::size_t half = std::size_t(window / 2);
  const std::size_t b = k >= lo + half ? k - half : lo;
  const std::size_t e = std::min(hi, k + half + 1);
  return median(std::vector<double>(a.begin() + std::ptrdiff_t(b), a.begin() + std::ptrdiff_t(e)));
}

struct LineContext {
  const LengthSurface& s;
  const DetectOptions& opt;
  double floor;
  TransitionMap& map;
};

// One contiguous run of non-degenerate cells along an axis direction.
void scan_segment(const LineContext& ctx, const std::vector<std::size_t>& cells) {
  const std::size_t L = cells.size();
  if (L < 2) return;
  const auto& s = ctx.s;
  const bool two_d = s.dimension == 2;
  std::vector<double> y(L);
  for (std::size_t k = 0; k < L; ++k) y[k] = s.values[cells[k]];

  std::vector<double> d1(L - 1);
  for (std::size_t k = 0; k + 1 < L; ++k) d1[k] = std::abs(y[k + 1] - y[k]);

  std::vector<bool> jump(L, false), kink(L, false), divergent(L, false);
  for (std::size_t k = 0; k + 1 < L; ++k) {
    const double med = std::max(window_median(d1, k, 0, L - 1, ctx.opt.window), ctx.floor);
    if (d1[k] > ctx.opt.jump_threshold * med) jump[k] = jump[k + 1] = true;
    if (two_d && s.regions[cells[k]] != s.regions[cells[k + 1]]) jump[k] = jump[k + 1] = true;
  }

  if (L >= 3) {
    std::vector<double> d2(L, 0.0);
    for (std::size_t k = 1; k + 1 < L; ++k) d2[k] = std::abs(y[k + 1] - 2.0 * y[k] + y[k - 1]);
    for (std::size_t k = 1; k + 1 < L; ++k) {
      const double med = std::max(window_median(d2, k, 1, L - 1, ctx.opt.window), ctx.floor);
      if (!(d2[k] > ctx.opt.kink_threshold * med)) continue;
      if ((k > 1 && d2[k - 1] > d2[k]) || (k + 2 < L && d2[k + 1] > d2[k])) continue;
      if (two_d && s.regions[cells[k - 1]] != s.regions[cells[k + 1]]) {
        jump[k] = true;
        continue;
      }
      kink[k] = true;
      const bool left = k >= 2 && d1[k - 1] > 1.5 * d1[k - 2];
      const bool right = k + 2 < L && d1[k] > 1.5 * d1[k + 1];
      divergent[k] = left || right;
    }
  }

  for (std::size_t k = 0; k < L; ++k) {
    auto& slot = ctx.map.cells[cells[k]];
    if (jump[k]) {
      promote(slot, two_d ? TransitionClass::jump : TransitionClass::kink);
    } else if (kink[k]) {
      promote(slot, TransitionClass::kink);
      if (divergent[k]) ctx.map.divergent[cells[k]] = true;
    }
  }
}

}  // namespace

TransitionMap detect_transitions(const LengthSurface& s, const DetectOptions& opt) {
  const int n1 = s.axis1.n, n2 = s.axis2.n;
  if (s.values.size() != std::size_t(n1) * n2 || s.flags.size() != s.values.size())
    throw UsageError("surface dimensions do not match its axes");
  if (!(opt.jump_threshold > 0.0) || !(opt.kink_threshold > 0.0) || opt.window < 3)
    throw UsageError("thresholds must be positive and the window at least 3 cells");
  const auto flagged = std::count_if(s.flags.begin(), s.flags.end(),
                                     [](CellFlag f) { return f != CellFlag::ok; });
  if (2 * std::size_t(flagged) > s.flags.size())
    throw DomainError("more than half of the surface is flagged; the grid is too coarse near singular structure");

  TransitionMap map;
  map.n1 = n1;
  map.n2 = n2;
  map.cells.assign(s.values.size(), TransitionClass::none);
  map.divergent.assign(s.values.size(), false);

  std::vector<double> mags;
  for (double v : s.values) mags.push_back(std::abs(v));
  const double floor = 1e-9 * std::max(median(mags), 1e-300);
  const LineContext ctx{s, opt, floor, map};

  auto run_line = [&](int count, auto cell_of) {
    std::vector<std::size_t> seg;
    for (int k = 0; k < count; ++k) {
      const std::size_t c = cell_of(k);
      if (s.flags[c] == CellFlag::degenerate) {
        scan_segment(ctx, seg);
        seg.clear();
      } else {
        seg.push_back(c);
      }
    }
    scan_segment(ctx, seg);
  };
  if (n1 >= 2)
    for (int j = 0; j < n2; ++j) run_line(n1, [&](int k) { return s.index(k, j); });
  if (n2 >= 2)
    for (int i = 0; i < n1; ++i) run_line(n2, [&](int k) { return s.index(i, k); });

  for (std::size_t c = 0; c < map.cells.size(); ++c)
    if (map.cells[c] == TransitionClass::none && s.flags[c] == CellFlag::ep_adjacent)
      map.cells[c] = TransitionClass::boundary_exact;
  return map;
}

std::vector<bool> reference_boundary_mask(const LengthSurface& s) {
  const int n1 = s.axis1.n, n2 = s.axis2.n;
  std::vector<std::string> label(s.values.size());
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) label[s.index(i, j)] = reference_phase(s.model, s.params_at(i, j));
  std::vector<bool> mask(label.size(), false);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      const auto c = s.index(i, j);
      if (label[c] == "boundary") {
        mask[c] = true;
        continue;
      }
      const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
      for (const auto& q : nb) {
        if (q[0] < 0 || q[1] < 0 || q[0] >= n1 || q[1] >= n2) continue;
        if (label[s.index(q[0], q[1])] != label[c]) mask[c] = true;
      }
    }
  return mask;
}

std::vector<int> chebyshev_distance(const std::vector<bool>& marked, int n1, int n2) {
  std::vector<int> dist(marked.size(), -1);
  std::deque<std::size_t> queue;
  for (std::size_t c = 0; c < marked.size(); ++c)
    if (marked[c]) {
      dist[c] = 0;
      queue.push_back(c);
    }
  while (!queue.empty()) {
    const std::size_t c = queue.front();
    queue.pop_front();
    const int i = int(c / n2), j = int(c % n2);
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        const int a = i + di, b = j + dj;
        if (a < 0 || b < 0 || a >= n1 || b >= n2) continue;
        const std::size_t d = std::size_t(a) * n2 + b;
        if (dist[d] < 0) {
          dist[d] = dist[c] + 1;
          queue.push_back(d);
        }
      }
  }
  return dist;
}

ReferenceReport compare_reference(const TransitionMap& map, const LengthSurface& s) {
  const int n1 = s.axis1.n, n2 = s.axis2.n;
  const auto mask = reference_boundary_mask(s);
  const auto to_boundary = chebyshev_distance(mask, n1, n2);
  std::vector<bool> detected(map.cells.size(), false);
  for (std::size_t c = 0; c < map.cells.size(); ++c)
    detected[c] = map.cells[c] != TransitionClass::none;
  const auto to_detection = chebyshev_distance(detected, n1, n2);

  ReferenceReport r;
  r.distance.assign(map.cells.size(), -1.0);
  CompensatedSum sum;
  for (std::size_t c = 0; c < map.cells.size(); ++c) {
    if (mask[c]) {
      ++r.boundary_cells;
      if (to_detection[c] < 0 || to_detection[c] > 1) ++r.missed;
    }
    if (!detected[c]) continue;
    ++r.detected;
    // With no analytic boundary on the grid every detection is "infinitely" far.
    const double d = to_boundary[c] < 0 ? double(n1 + n2) : double(to_boundary[c]);
    r.distance[c] = d;
    r.max_distance = std::max(r.max_distance, d);
    sum.add(d);
  }
  r.mean_distance = r.detected ? sum.value() / double(r.detected) : 0.0;
  return r;
}

void write_scan_csv(std::ostream& os, const LengthSurface& s, const TransitionMap& map) {
  const auto old = os.precision(17);
  os << s.axis1.name << ',' << s.axis2.name << ",length,flag,class\n";
  for (int i = 0; i < s.axis1.n; ++i)
    for (int j = 0; j < s.axis2.n; ++j) {
      const auto c = s.index(i, j);
      os << s.axis1.value(i) << ',' << s.axis2.value(j) << ',' << s.values[c] << ','
         << to_string(s.flags[c]) << ',' << to_string(map.cells[c]) << '\n';
    }
  os.precision(old);
}

std::string scan_json(const LengthSurface& s, const TransitionMap& map, const ReferenceReport& report) {
  using json = nlohmann::ordered_json;
  json doc;
  doc["schema_version"] = kScanSchemaVersion;
  doc["model"] = s.model;
  json axes = json::array();
  for (const auto* a : {&s.axis1, &s.axis2})
    axes.push_back({{"name", a->name}, {"lo", a->lo}, {"hi", a->hi}, {"n", a->n}});
  doc["axes"] = axes;
  json fixed = json::object();
  for (const auto& [k, v] : s.fixed)
    if (k != s.axis1.name && k != s.axis2.name) fixed[k] = v;
  doc["fixed"] = fixed;

  json values = json::array(), flags = json::array(), classes = json::array(), regions = json::array();
  for (int i = 0; i < s.axis1.n; ++i) {
    json vrow = json::array(), frow = json::array(), crow = json::array(), rrow = json::array();
    for (int j = 0; j < s.axis2.n; ++j) {
      const auto c = s.index(i, j);
      vrow.push_back(s.values[c]);
      frow.push_back(to_string(s.flags[c]));
      crow.push_back(to_string(map.cells[c]));
      if (!s.regions.empty()) rrow.push_back(s.regions[c]);
    }
    values.push_back(std::move(vrow));
    flags.push_back(std::move(frow));
    classes.push_back(std::move(crow));
    if (!s.regions.empty()) regions.push_back(std::move(rrow));
  }
  doc["values"] = std::move(values);
  doc["flags"] = std::move(flags);
  doc["classes"] = std::move(classes);
  if (!s.regions.empty()) doc["regions"] = std::move(regions);
  doc["comparison"] = {{"detected", report.detected},
                       {"jump", map.count(TransitionClass::jump)},
                       {"kink", map.count(TransitionClass::kink)},
                       {"boundary_exact", map.count(TransitionClass::boundary_exact)},
                       {"max_distance", report.max_distance},
                       {"mean_distance", report.mean_distance},
                       {"boundary_cells", report.boundary_cells},
                       {"missed", report.missed}};
  return doc.dump(2);
}

}  // namespace nhtopo
