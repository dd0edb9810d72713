#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "nhtopo/model.hpp"

namespace nhtopo {

struct ScanAxis {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  int n = 1;

  /// lo + (hi - lo) i / (n - 1); a single-node axis sits at lo.
  double value(int i) const { return n == 1 ? lo : lo + (hi - lo) * double(i) / double(n - 1); }
};

enum class CellFlag { ok, ep_adjacent, degenerate };
const char* to_string(CellFlag f);

struct SweepOptions {
  unsigned threads = 0;  ///< 0 = hardware concurrency
  int bz_n = 128;        ///< BZ grid for 2D models
  int panels = 512;      ///< uniform panels for 1D lengths
};

/// Lengths on the axis1 x axis2 grid, row-major: index = i1 * axis2.n + i2.
struct LengthSurface {
  std::string model;
  int dimension = 1;  ///< BZ dimension of the model
  ScanAxis axis1, axis2;
  ParamMap fixed;     ///< every model parameter, with the axis ones at axis lo
  std::vector<double> values;
  std::vector<CellFlag> flags;
  std::vector<int> regions;  ///< region count per cell (2D models only)

  std::size_t index(int i1, int i2) const { return std::size_t(i1) * axis2.n + i2; }
  ParamMap params_at(int i1, int i2) const;
};

/// Evaluates the band-image length on every node: length_closed_form for
/// 1D models, boundary_length for 2D models. Axis names must be parameters
/// of the model; n1, n2 >= 16 unless the axis is a single node (1D trace).
/// 1D cells whose curve has collapsed to within two cells of a point are
/// flagged degenerate, as are 2D cells whose cloud collapses to a curve.
LengthSurface sweep(std::string_view model_id, const ScanAxis& axis1, const ScanAxis& axis2,
                    const ParamMap& fixed, const SweepOptions& options = {});

enum class TransitionClass { none, jump, kink, boundary_exact };
const char* to_string(TransitionClass c);

struct DetectOptions {
  double jump_threshold = 10.0;
  double kink_threshold = 10.0;
  int window = 9;  ///< cells in the local median window
};

struct TransitionMap {
  int n1 = 0, n2 = 0;
  std::vector<TransitionClass> cells;
  std::vector<bool> divergent;  ///< kink whose one-sided slopes grow towards the cell
  std::size_t count(TransitionClass c) const;
};

/// Per axis direction: first differences |dl| > J x local median flag jumps
/// (both cells), second differences |d2l| > K x local median flag kinks at
/// local maxima of |d2l|. Degenerate cells split the difference sequences.
/// In 2D models a change of region count between neighbours is a jump and
/// kinks between cells of different region count are jumps; in 1D models
/// every detection is a kink. Remaining ep_adjacent cells are boundary_exact.
/// More than half the cells flagged throws DomainError.
TransitionMap detect_transitions(const LengthSurface& surface, const DetectOptions& options = {});

/// Cells whose analytic phase label differs from a 4-neighbour (or that lie
/// exactly on a boundary).
std::vector<bool> reference_boundary_mask(const LengthSurface& surface);

struct ReferenceReport {
  std::size_t detected = 0;        ///< cells classified jump, kink or boundary_exact
  double max_distance = 0.0;       ///< Chebyshev cell distance to the boundary mask
  double mean_distance = 0.0;
  std::size_t boundary_cells = 0;
  std::size_t missed = 0;          ///< boundary cells farther than one cell from a detection
  std::vector<double> distance;    ///< per cell; -1 where nothing was detected
};

ReferenceReport compare_reference(const TransitionMap& map, const LengthSurface& surface);

/// Chebyshev distance (cells) from every cell to the nearest marked cell;
/// -1 everywhere when nothing is marked.
std::vector<int> chebyshev_distance(const std::vector<bool>& marked, int n1, int n2);

/// CSV cell-per-row: axis1,axis2,length,flag,class (header uses axis names).
void write_scan_csv(std::ostream& os, const LengthSurface& surface, const TransitionMap& map);

/// Single JSON document: schema version, axes, fixed parameters, matrices
/// and the comparison summary.
std::string scan_json(const LengthSurface& surface, const TransitionMap& map,
                      const ReferenceReport& report);

inline constexpr int kScanSchemaVersion = 1;

}  // namespace nhtopo
