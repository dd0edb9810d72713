#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <sstream>

#include "nhtopo/error.hpp"
#include "nhtopo/scan.hpp"

using namespace nhtopo;

namespace {

LengthSurface synthetic(int n1, int n2, const std::function<double(double, double)>& f) {
  LengthSurface s;
  s.model = "ssh";
  s.dimension = 1;
  s.axis1 = {"t", 0.0, 1.0, n1};
  s.axis2 = {"delta", 0.0, 1.0, n2};
  s.fixed = {{"t", 0.0}, {"tp", 1.0}, {"delta", 0.0}};
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) s.values.push_back(f(s.axis1.value(i), s.axis2.value(j)));
  s.flags.assign(s.values.size(), CellFlag::ok);
  return s;
}

std::vector<double> positions(const LengthSurface& s, const TransitionMap& map, TransitionClass c) {
  std::vector<double> out;
  for (int i = 0; i < s.axis1.n; ++i)
    for (int j = 0; j < s.axis2.n; ++j)
      if (map.cells[s.index(i, j)] == c) out.push_back(s.axis1.value(i));
  return out;
}

bool near_any(const std::vector<double>& xs, double target, double tol) {
  return std::any_of(xs.begin(), xs.end(), [&](double x) { return std::abs(x - target) <= tol; });
}

}  // namespace

TEST_CASE("constant and smooth surfaces have no transitions") {
  const auto flat = synthetic(40, 40, [](double, double) { return 3.0; });
  const auto m = detect_transitions(flat);
  CHECK(m.count(TransitionClass::none) == flat.values.size());
  const auto smooth = synthetic(40, 40, [](double x, double y) { return 2.0 + std::sin(3 * x) * std::cos(2 * y); });
  CHECK(detect_transitions(smooth).count(TransitionClass::none) == smooth.values.size());
}

TEST_CASE("a kink line is found as a thin set") {
  auto s = synthetic(60, 30, [](double x, double) { return 1.0 + std::abs(x - 0.5); });
  const auto m = detect_transitions(s);
  const auto kinks = positions(s, m, TransitionClass::kink);
  CHECK(kinks.size() >= 30);
  for (double x : kinks) CHECK(std::abs(x - 0.5) <= 1.0 / 59 + 1e-12);
}

TEST_CASE("2D models report jumps") {
  auto s = synthetic(60, 30, [](double x, double) { return x < 0.5 ? 1.0 + x : 3.0 + x; });
  s.model = "chern";
  s.dimension = 2;
  s.axis1.name = "m";
  s.axis2.name = "gamma";
  s.fixed = {{"t", 1.0}, {"m", 0.0}, {"gamma", 0.0}};
  s.regions.assign(s.values.size(), 1);
  const auto m = detect_transitions(s);
  const auto jumps = positions(s, m, TransitionClass::jump);
  CHECK(jumps.size() == 60);
  for (double x : jumps) CHECK(std::abs(x - 0.5) < 1.0 / 59);

  // A change in region count alone is a jump as well.
  auto r = synthetic(40, 20, [](double x, double) { return 1.0 + x; });
  r.model = "chern";
  r.dimension = 2;
  r.axis1.name = "m";
  r.axis2.name = "gamma";
  r.fixed = {{"t", 1.0}, {"m", 0.0}, {"gamma", 0.0}};
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 20; ++j) r.regions.push_back(i < 20 ? 2 : 1);
  const auto mr = detect_transitions(r);
  CHECK(mr.count(TransitionClass::jump) == 40);
}

TEST_CASE("flagged surfaces and degenerate cells") {
  auto s = synthetic(40, 40, [](double, double) { return 1.0; });
  std::fill(s.flags.begin(), s.flags.begin() + 900, CellFlag::ep_adjacent);
  CHECK_THROWS_AS(detect_transitions(s), DomainError);
  std::fill(s.flags.begin(), s.flags.end(), CellFlag::ok);
  s.flags[5] = CellFlag::ep_adjacent;
  s.flags[6] = CellFlag::degenerate;
  const auto m = detect_transitions(s);
  CHECK(m.cells[5] == TransitionClass::boundary_exact);
  CHECK(m.cells[6] == TransitionClass::none);
}

TEST_CASE("sweep validation") {
  CHECK_THROWS_AS(sweep("ssh", {"m", 0, 1, 16}, {"delta", 0, 1, 16}, {}), UsageError);
  try {
    sweep("ssh", {"m", 0, 1, 16}, {"delta", 0, 1, 16}, {});
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("t, tp, delta") != std::string::npos);
  }
  CHECK_THROWS_AS(sweep("ssh", {"t", 0, 1, 8}, {"delta", 0, 1, 16}, {}), UsageError);
  CHECK_THROWS_AS(sweep("ssh", {"t", 0, 1, 16}, {"t", 0, 1, 16}, {}), UsageError);
  CHECK_THROWS_AS(sweep("ssh", {"t", 0, 1, 16}, {"delta", 0, 1, 16}, {{"gamma", 1.0}}), UsageError);
  CHECK_THROWS_AS(sweep("nope", {"t", 0, 1, 16}, {"delta", 0, 1, 16}, {}), UnsupportedModel);
}

TEST_CASE("Hermitian chain trace: one kink at t = 1") {
  const auto s = sweep("ssh", {"t", 0.0, 2.0, 101}, {"delta", 0.0, 0.0, 1}, {{"tp", 1.0}});
  CHECK(s.values.size() == 101);
  const auto m = detect_transitions(s);
  const auto kinks = positions(s, m, TransitionClass::kink);
  REQUIRE_FALSE(kinks.empty());
  for (double x : kinks) CHECK(std::abs(x - 1.0) <= 0.02 + 1e-12);
  CHECK(m.count(TransitionClass::jump) == 0);
  for (std::size_t c = 0; c < m.cells.size(); ++c)
    if (m.cells[c] == TransitionClass::kink) CHECK_FALSE(m.divergent[c]);
}

TEST_CASE("non-Hermitian chain trace: cusps at the exceptional lines are divergent") {
  const auto s = sweep("ssh", {"t", 0.0, 2.0, 101}, {"delta", 0.5, 0.5, 1}, {{"tp", 1.0}});
  const auto m = detect_transitions(s);
  std::vector<double> marked;
  for (int i = 0; i < 101; ++i)
    if (m.cells[std::size_t(i)] != TransitionClass::none) marked.push_back(s.axis1.value(i));
  CHECK(near_any(marked, 0.5, 0.02 + 1e-12));
  CHECK(near_any(marked, 1.5, 0.02 + 1e-12));
  for (double x : marked) CHECK((std::abs(x - 0.5) <= 0.02 + 1e-12 || std::abs(x - 1.5) <= 0.02 + 1e-12));
  bool divergent = false;
  for (std::size_t c = 0; c < m.cells.size(); ++c) divergent = divergent || m.divergent[c];
  CHECK(divergent);
}

TEST_CASE("SSH grid: detections hug the analytic lines, independent of threads") {
  const ScanAxis a{"t", -2.0, 2.0, 41}, b{"delta", -2.0, 2.0, 41};
  SweepOptions one, many;
  one.threads = 1;
  many.threads = 3;
  const auto s1 = sweep("ssh", a, b, {{"tp", 1.0}}, one);
  const auto s3 = sweep("ssh", a, b, {{"tp", 1.0}}, many);
  CHECK(s1.values == s3.values);
  const auto m = detect_transitions(s1);
  const auto rep = compare_reference(m, s1);
  CHECK(rep.detected > 0);
  CHECK(rep.max_distance <= 1.0);
  CHECK(rep.missed == 0);

  DetectOptions doubled;
  doubled.jump_threshold = 20.0;
  doubled.kink_threshold = 20.0;
  const auto m2 = detect_transitions(s1, doubled);
  const auto rep2 = compare_reference(m2, s1);
  CHECK(rep2.max_distance == rep.max_distance);
  CHECK(rep2.missed == rep.missed);

}

TEST_CASE("detections are stable under grid refinement") {
  const auto coarse = sweep("ssh", {"t", -2.0, 2.0, 41}, {"delta", -2.0, 2.0, 41}, {{"tp", 1.0}});
  const auto fine = sweep("ssh", {"t", -2.0, 2.0, 81}, {"delta", -2.0, 2.0, 81}, {{"tp", 1.0}});
  const auto mc = detect_transitions(coarse), mf = detect_transitions(fine);
  auto pts = [](const LengthSurface& s, const TransitionMap& m) {
    std::vector<std::pair<double, double>> out;
    for (int i = 0; i < s.axis1.n; ++i)
      for (int j = 0; j < s.axis2.n; ++j)
        if (m.cells[s.index(i, j)] != TransitionClass::none) out.push_back({s.axis1.value(i), s.axis2.value(j)});
    return out;
  };
  const auto pc = pts(coarse, mc), pf = pts(fine, mf);
  auto directed = [](const auto& from, const auto& to) {
    double worst = 0.0;
    for (const auto& p : from) {
      double best = 1e9;
      for (const auto& q : to) best = std::min(best, std::max(std::abs(p.first - q.first), std::abs(p.second - q.second)));
      worst = std::max(worst, best);
    }
    return worst;
  };
  const double cell = 0.1;
  CHECK(std::max(directed(pc, pf), directed(pf, pc)) <= cell + 1e-9);
}

TEST_CASE("Chern trace through both transition types") {
  const auto s = sweep("chern", {"m", -4.0, 4.0, 81}, {"gamma", 1.0, 1.0, 1}, {{"t", 1.0}});
  const auto m = detect_transitions(s);
  const auto jumps = positions(s, m, TransitionClass::jump);
  const auto kinks = positions(s, m, TransitionClass::kink);
  for (double x : {-3.0, 3.0}) CHECK(near_any(jumps, x, 0.1 + 1e-9));
  for (double x : {-1.0, 1.0}) CHECK(near_any(kinks, x, 0.1 + 1e-9));
  for (double x : jumps) CHECK(std::abs(std::abs(x) - 3.0) <= 0.1 + 1e-9);
  for (int i = 0; i < 81; ++i) {
    const double x = s.axis1.value(i);
    if (std::abs(std::abs(x) - 3.0) > 0.15) CHECK(s.regions[std::size_t(i)] == (std::abs(x) > 3.0 ? 2 : 1));
  }
}

TEST_CASE("reference comparison") {
  auto s = synthetic(30, 30, [](double, double) { return 1.0; });
  s.fixed["tp"] = 1.0;
  s.axis1 = {"t", 0.0, 2.0, 30};
  const auto empty = detect_transitions(s);
  const auto rep = compare_reference(empty, s);
  CHECK(rep.detected == 0);
  CHECK(rep.boundary_cells > 0);
  CHECK(rep.missed == rep.boundary_cells);

  std::vector<bool> marked(25, false);
  marked[12] = true;
  const auto d = chebyshev_distance(marked, 5, 5);
  CHECK(d[12] == 0);
  CHECK(d[0] == 2);
  CHECK(d[6] == 1);
  CHECK(chebyshev_distance(std::vector<bool>(4, false), 2, 2)[0] == -1);
}

TEST_CASE("CSV and JSON output") {
  const auto s = sweep("ssh", {"t", 0.0, 2.0, 16}, {"delta", 0.0, 1.0, 16}, {{"tp", 1.0}});
  const auto m = detect_transitions(s);
  const auto rep = compare_reference(m, s);
  std::ostringstream csv;
  write_scan_csv(csv, s, m);
  const std::string text = csv.str();
  CHECK(text.rfind("t,delta,length,flag,class\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 256);

  const auto doc = nlohmann::json::parse(scan_json(s, m, rep));
  CHECK(doc["schema_version"] == kScanSchemaVersion);
  CHECK(doc["model"] == "ssh");
  CHECK(doc["axes"].size() == 2);
  CHECK(doc["values"].size() == 16);
  CHECK(doc["values"][0].size() == 16);
  CHECK(doc["classes"][3].size() == 16);
  CHECK(doc["fixed"]["tp"] == 1.0);
  CHECK(doc["comparison"]["detected"] == rep.detected);
  CHECK(scan_json(s, m, rep) == scan_json(s, m, rep));
}
