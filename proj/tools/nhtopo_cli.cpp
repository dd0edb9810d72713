#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nhtopo/band_geometry_1d.hpp"
#include "nhtopo/boundary_2d.hpp"
#include "nhtopo/error.hpp"
#include "nhtopo/invariants.hpp"
#include "nhtopo/jacobian.hpp"
#include "nhtopo/model.hpp"
#include "nhtopo/numerics.hpp"
#include "nhtopo/scan.hpp"

using json = nlohmann::ordered_json;
using namespace nhtopo;

namespace {

constexpr int kSchemaVersion = 1;
const std::vector<std::string> kAllParams = {"t", "tp", "delta", "m", "gamma"};

/// Everything a subcommand needs. Flags fill the optionals; the config file
/// fills whatever the flags left empty.
struct RunConfig {
  std::optional<std::string> model;
  std::map<std::string, std::optional<double>> params;
  std::optional<int> n;
  std::optional<std::string> output;
  std::optional<std::string> format;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  std::optional<double> radius;
  std::optional<std::string> axis1, axis2;
  std::optional<std::string> loop;
  std::string config_path;
};

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + " is not key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(v))
    throw UsageError("'" + key + "' needs a finite number, got '" + text + "'");
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) throw UsageError("'" + key + "' needs an integer, got '" + text + "'");
  return v;
}

void merge_config(RunConfig& cfg) {
  if (cfg.config_path.empty()) return;
  for (const auto& [key, value] : read_config(cfg.config_path)) {
    if (cfg.params.count(key)) {
      if (!cfg.params[key]) cfg.params[key] = parse_double(key, value);
    } else if (key == "model") {
      if (!cfg.model) cfg.model = value;
    } else if (key == "n") {
      if (!cfg.n) cfg.n = int(parse_integer(key, value));
    } else if (key == "output") {
      if (!cfg.output) cfg.output = value;
    } else if (key == "format") {
      if (!cfg.format) cfg.format = value;
    } else if (key == "threads") {
      if (!cfg.threads) cfg.threads = unsigned(parse_integer(key, value));
    } else if (key == "seed") {
      if (!cfg.seed) cfg.seed = std::uint64_t(parse_integer(key, value));
    } else if (key == "radius") {
      if (!cfg.radius) cfg.radius = parse_double(key, value);
    } else if (key == "axis1") {
      if (!cfg.axis1) cfg.axis1 = value;
    } else if (key == "axis2") {
      if (!cfg.axis2) cfg.axis2 = value;
    } else if (key == "loop") {
      if (!cfg.loop) cfg.loop = value;
    } else {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
}

const ModelInfo& require_model(const RunConfig& cfg) {
  if (!cfg.model) throw UsageError("missing --model (valid: ssh, chern)");
  return model_info(*cfg.model);
}

/// Parameter map for the model. Parameters of other models are rejected; with
/// `all_required` every model parameter must be given.
ParamMap collect_params(const RunConfig& cfg, const ModelInfo& info, bool all_required) {
  ParamMap out;
  for (const auto& [name, value] : cfg.params) {
    const bool valid = std::find(info.params.begin(), info.params.end(), name) != info.params.end();
    if (value && !valid)
      throw UsageError("parameter '" + name + "' is not valid for model " + info.id);
    if (valid && value) out[name] = *value;
    if (valid && !value && all_required)
      throw UsageError("missing required parameter --" + name + " for model " + info.id);
  }
  return out;
}

int grid_n(const RunConfig& cfg, int fallback, int lo, int hi, const char* what) {
  const int n = cfg.n.value_or(fallback);
  if (n < lo || n > hi)
    throw UsageError(std::string(what) + " needs " + std::to_string(lo) + " <= n <= " +
                     std::to_string(hi) + ", got " + std::to_string(n));
  return n;
}

std::string output_format(const RunConfig& cfg) {
  const std::string f = cfg.format.value_or("csv");
  if (f != "csv" && f != "json") throw UsageError("--format must be csv or json");
  return f;
}

/// Writes to the -o path, or stdout without one.
class Sink {
 public:
  explicit Sink(const std::optional<std::string>& path) {
    if (path && *path != "-") {
      file_.open(*path, std::ios::binary);
      if (!file_) throw IoError("cannot open '" + *path + "' for writing");
      to_file_ = true;
    }
  }
  std::ostream& stream() { return to_file_ ? static_cast<std::ostream&>(file_) : std::cout; }
  bool to_file() const { return to_file_; }
  void finish(const std::optional<std::string>& path) {
    stream().flush();
    if (!stream()) throw IoError("write failed for '" + path.value_or("stdout") + "'");
  }

 private:
  std::ofstream file_;
  bool to_file_ = false;
};

json params_json(const ParamMap& p) {
  json j = json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

json header(const std::string& command, const ModelInfo& info, const ParamMap& p) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["model"] = info.id;
  if (!p.empty()) j["params"] = params_json(p);
  return j;
}

ParamMap full_params(const ModelInfo& info, const ParamMap& given) {
  ParamMap p = info.defaults;
  for (const auto& [k, v] : given) p[k] = v;
  return p;
}

// bands ----------------------------------------------------------------------

void cmd_bands(const RunConfig& cfg) {
  const auto& info = require_model(cfg);
  const auto given = collect_params(cfg, info, true);
  const auto params = full_params(info, given);
  const std::string fmt = output_format(cfg);
  const int n = info.dimension == 1 ? grid_n(cfg, 1024, 16, 1 << 22, "bands (1D)")
                                    : grid_n(cfg, 128, 16, 4096, "bands (2D)");
  if (info.dimension == 1)
    (void)ssh_params(params);
  else
    (void)chern_params(params);

  const double h = kTwoPi / n;
  std::vector<std::string> columns;
  if (info.dimension == 1)
    columns = {"k"};
  else
    columns = {"kx", "ky"};
  for (const char* c : {"eR", "eI", "sigma", "branch"}) columns.push_back(c);

  Sink sink(cfg.output);
  auto& os = sink.stream();
  os.precision(17);
  json rows = json::array();
  auto emit = [&](std::span<const double> k) {
    const auto eo = epsilon_omega(info.id, k, params);
    for (int branch : {1, -1}) {
      const auto s = band_sample(eo, branch);
      if (fmt == "csv") {
        for (double kk : k) os << kk << ',';
        os << s.re() << ',' << s.im() << ',' << s.sigma << ',' << s.branch << '\n';
      } else {
        json row = json::array();
        for (double kk : k) row.push_back(kk);
        row.push_back(s.re());
        row.push_back(s.im());
        row.push_back(s.sigma);
        row.push_back(s.branch);
        rows.push_back(std::move(row));
      }
    }
  };
  if (fmt == "csv") {
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
    os << '\n';
  }
  if (info.dimension == 1) {
    for (int j = 0; j < n; ++j) {
      const double k[1] = {-kPi + h * j};
      emit(k);
    }
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double k[2] = {-kPi + h * i, -kPi + h * j};
        emit(k);
      }
  }
  if (fmt == "json") {
    auto doc = header("bands", info, params);
    doc["n"] = n;
    doc["columns"] = columns;
    doc["rows"] = std::move(rows);
    os << doc.dump(2) << '\n';
  }
  sink.finish(cfg.output);
}

// length ---------------------------------------------------------------------

void cmd_length(const RunConfig& cfg) {
  const auto& info = require_model(cfg);
  const auto given = collect_params(cfg, info, true);
  const auto params = full_params(info, given);
  auto doc = header("length", info, params);
  if (info.dimension == 1) {
    const int n = grid_n(cfg, 4096, kMinLengthPanels, 1 << 22, "length (1D panels)");
    const auto r = length_closed_form(ssh_params(params), n);
    doc["length"] = r.length;
    doc["error_estimate"] = r.est_error;
    doc["panels"] = r.n_panels;
    doc["ep_crossings"] = r.ep_crossings;
    doc["degenerate_1d"] = false;
  } else {
    const int n = grid_n(cfg, 128, 64, 1024, "length (2D BZ grid)");
    const auto p = chern_params(params);
    const auto r = boundary_length(p, n, cfg.radius);
    doc["length"] = r.total_length;
    doc["error_estimate"] = r.radius;
    doc["regions"] = r.region_count;
    doc["loops"] = r.loops.size();
    doc["holes"] = std::count_if(r.loops.begin(), r.loops.end(), [](const auto& l) { return l.hole; });
    doc["degenerate_1d"] = r.degenerate_1d;
    doc["radius"] = r.radius;
    doc["exceptional_nodes"] = r.exceptional_nodes;
    doc["n"] = n;
    if (cfg.output) {
      Sink sink(cfg.output);
      write_boundary_csv(sink.stream(), sample_bulk(p, n), r);
      sink.finish(cfg.output);
    }
  }
  std::cout << doc.dump() << '\n';
}

// scan -----------------------------------------------------------------------

ScanAxis parse_axis(const std::string& text) {
  // name:lo:hi:n
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.size() != 4) throw UsageError("axis '" + text + "' must be name:lo:hi:n");
  ScanAxis a;
  a.name = parts[0];
  a.lo = parse_double("axis lo", parts[1]);
  a.hi = parse_double("axis hi", parts[2]);
  a.n = int(parse_integer("axis n", parts[3]));
  return a;
}

void cmd_scan(const RunConfig& cfg) {
  const auto& info = require_model(cfg);
  const auto given = collect_params(cfg, info, false);
  const std::string fmt = output_format(cfg);
  ScanAxis a1, a2;
  if (info.dimension == 1) {
    a1 = {"t", -2.0, 2.0, 201};
    a2 = {"delta", -2.0, 2.0, 201};
  } else {
    a1 = {"m", -4.0, 4.0, 101};
    a2 = {"gamma", 0.0, 4.0, 101};
  }
  if (cfg.axis1) a1 = parse_axis(*cfg.axis1);
  if (cfg.axis2) a2 = parse_axis(*cfg.axis2);
  SweepOptions opt;
  opt.threads = cfg.threads.value_or(0);
  if (cfg.n) {
    if (info.dimension == 1)
      opt.panels = grid_n(cfg, 512, kMinLengthPanels, 1 << 20, "scan (1D panels)");
    else
      opt.bz_n = grid_n(cfg, 128, 64, 1024, "scan (2D BZ grid)");
  }

  const auto surface = sweep(info.id, a1, a2, given, opt);
  const auto map = detect_transitions(surface);
  const auto report = compare_reference(map, surface);

  json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["command"] = "scan";
  summary["model"] = info.id;
  summary["detected"] = report.detected;
  summary["jump"] = map.count(TransitionClass::jump);
  summary["kink"] = map.count(TransitionClass::kink);
  summary["boundary_exact"] = map.count(TransitionClass::boundary_exact);
  summary["max_distance"] = report.max_distance;
  summary["mean_distance"] = report.mean_distance;
  summary["boundary_cells"] = report.boundary_cells;
  summary["missed"] = report.missed;

  Sink sink(cfg.output);
  if (fmt == "csv")
    write_scan_csv(sink.stream(), surface, map);
  else
    sink.stream() << scan_json(surface, map, report) << '\n';
  sink.finish(cfg.output);
  (sink.to_file() ? std::cout : std::cerr) << summary.dump() << '\n';
}

// invariants -----------------------------------------------------------------

std::vector<KPoint> read_loop(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read loop file '" + path + "'");
  std::vector<KPoint> loop;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream ls(line);
    KPoint q;
    if (!(ls >> q.kx)) continue;
    if (!(ls >> q.ky)) throw UsageError("loop line '" + line + "' needs kx and ky");
    loop.push_back(q);
  }
  return loop;
}

void cmd_invariants(const RunConfig& cfg) {
  const auto& info = require_model(cfg);
  const auto given = collect_params(cfg, info, true);
  const auto params = full_params(info, given);
  auto doc = header("invariants", info, params);
  doc["reference_phase"] = reference_phase(info.id, params);
  if (info.dimension == 1) {
    const int n = grid_n(cfg, 4096, 64, 1 << 22, "invariants (1D grid)");
    const auto p = ssh_params(params);
    const auto w = winding_number(p, n);
    const auto v = vorticity_1d(p, n);
    doc["winding"] = w.value;
    doc["w_plus"] = w.w_plus;
    doc["w_minus"] = w.w_minus;
    doc["vorticity"] = v.value;
  } else {
    const auto p = chern_params(params);
    if (cfg.loop) {
      const auto loop = read_loop(*cfg.loop);
      const auto v = vorticity_2d(p, loop);
      doc["vorticity"] = v.value;
      doc["loop_points"] = loop.size();
    } else {
      const int n = grid_n(cfg, 128, 16, 1024, "invariants (2D BZ grid)");
      const auto c = chern_number(p, n);
      doc["chern_re"] = c.value.real();
      doc["chern_im"] = c.value.imag();
      doc["chern"] = std::lround(c.value.real());
      doc["residual"] = c.residual;
      doc["n"] = n;
    }
  }
  std::cout << doc.dump() << '\n';
}

// jacobian -------------------------------------------------------------------

void cmd_jacobian(const RunConfig& cfg) {
  const auto& info = require_model(cfg);
  if (info.dimension != 2) throw UsageError("jacobian needs a 2D model (chern)");
  const auto given = collect_params(cfg, info, true);
  const auto params = full_params(info, given);
  const auto p = chern_params(params);
  const int n = grid_n(cfg, 128, 128, 1024, "jacobian (BZ grid)");
  const auto locus = zero_locus(p, n);
  const auto corr = boundary_correspondence(p, n, cfg.radius);
  auto doc = header("jacobian", info, params);
  doc["n"] = n;
  doc["zero_points"] = locus.points.size();
  doc["tolerance"] = locus.tolerance;
  doc["correspondence_applicable"] = corr.applicable;
  doc["correspondence_fraction"] = corr.fraction;
  doc["images_tested"] = corr.images;
  doc["radius"] = corr.radius;
  if (cfg.output) {
    Sink sink(cfg.output);
    write_locus_csv(sink.stream(), locus);
    sink.finish(cfg.output);
  }
  std::cout << doc.dump() << '\n';
}

void report_error(const char* kind, int code, const std::string& message) {
  json j;
  j["error"] = kind;
  j["exit_code"] = code;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
}

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--model", cfg.model, "model id: ssh or chern");
  for (const auto& name : kAllParams) sub->add_option("--" + name, cfg.params[name], "model parameter " + name);
  sub->add_option("--n", cfg.n, "grid size (k points, panels or BZ side)");
  sub->add_option("-o,--output", cfg.output, "output file");
  sub->add_option("--format", cfg.format, "csv or json");
  sub->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
  sub->add_option("--seed", cfg.seed, "seed for randomized checks");
  sub->add_option("--config", cfg.config_path, "key=value file; flags take precedence");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Band-image length analysis of non-Hermitian lattice models"};
  app.require_subcommand(1);
  RunConfig cfg;
  for (const auto& name : kAllParams) cfg.params[name] = std::nullopt;

  auto* bands = app.add_subcommand("bands", "sample both bands on the BZ grid");
  auto* length = app.add_subcommand("length", "length of the band image");
  auto* scan = app.add_subcommand("scan", "length surface, transitions and reference comparison");
  auto* invariants = app.add_subcommand("invariants", "winding, vorticity or Chern number");
  auto* jacobian = app.add_subcommand("jacobian", "Jacobian zero locus and boundary correspondence");
  for (auto* sub : {bands, length, scan, invariants, jacobian}) add_common(sub, cfg);
  length->add_option("--radius", cfg.radius, "pivot radius (2D)");
  jacobian->add_option("--radius", cfg.radius, "pivot radius");
  scan->add_option("--axis1", cfg.axis1, "name:lo:hi:n");
  scan->add_option("--axis2", cfg.axis2, "name:lo:hi:n");
  invariants->add_option("--loop", cfg.loop, "file of kx,ky lines for the 2D vorticity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", 2, e.what());
    return 2;
  }

  try {
    merge_config(cfg);
    if (bands->parsed()) cmd_bands(cfg);
    if (length->parsed()) cmd_length(cfg);
    if (scan->parsed()) cmd_scan(cfg);
    if (invariants->parsed()) cmd_invariants(cfg);
    if (jacobian->parsed()) cmd_jacobian(cfg);
  } catch (const UsageError& e) {
    report_error("usage", e.exit_code(), e.what());
    return e.exit_code();
  } catch (const DomainError& e) {
    report_error("domain", e.exit_code(), e.what());
    return e.exit_code();
  } catch (const IoError& e) {
    report_error("io", e.exit_code(), e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    report_error("internal", 1, e.what());
    return 1;
  }
  return 0;
}
