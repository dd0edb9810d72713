#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "nhtopo/model.hpp"

namespace nhtopo {

struct EnergyPoint {
  double re = 0.0;
  double im = 0.0;
};

struct PointSource {
  double kx = 0.0;
  double ky = 0.0;
  int branch = 1;
};

/// Both bands of a 2D model sampled on a uniform BZ grid.
struct EnergyPointCloud {
  std::vector<EnergyPoint> points;
  std::vector<PointSource> source;  ///< parallel to points
  double grid_step = 0.0;           ///< BZ grid step 2 pi / n
  int exceptional_nodes = 0;        ///< grid nodes sitting on an exceptional point
};

/// n x n grid k = -pi + 2 pi j / n (the endpoint pi is identified with -pi),
/// branch +1 then -1 at every node. n >= 64.
EnergyPointCloud sample_bulk(const ChernParams& p, int n);

struct BoundaryLoop {
  std::vector<EnergyPoint> vertices;  ///< closed: front() == back()
  double perimeter = 0.0;
  /// Cloud points of the region this loop bounds (0 for holes).
  int enclosed = 0;
  bool hole = false;
};

struct BoundaryResult {
  std::vector<BoundaryLoop> loops;
  double total_length = 0.0;
  int region_count = 0;
  bool degenerate_1d = false;
  double radius = 0.0;
  int exceptional_nodes = 0;  ///< set by boundary_length
};

struct SpacingStats {
  double median = 0.0;
  double max = 0.0;
};

/// Nearest-neighbour distances over the distinct points of the cloud.
SpacingStats nearest_neighbor_spacing(const std::vector<EnergyPoint>& points);

/// Largest distance from the band energy at a BZ plaquette centre to the
/// nearest sampled corner energy (either band). Empty disks smaller than
/// this can open up between image points near exceptional points.
double covering_radius(const ChernParams& p, int n);

/// Default pivot radius: max(2.5 x median spacing, 2 x max spacing,
/// 1.5 x covering radius), slightly enlarged so it always meets the
/// ball_pivot_boundary precondition.
double default_pivot_radius(const SpacingStats& s, double covering = 0.0);

/// Boundary of the point set traced by rolling a disk of radius r. One
/// outer loop per connected region, plus one loop per interior hole the disk
/// fits into. Throws UsageError for fewer than 3 points or r < 2 x max
/// nearest-neighbour spacing.
BoundaryResult ball_pivot_boundary(const std::vector<EnergyPoint>& points, double r);
inline BoundaryResult ball_pivot_boundary(const EnergyPointCloud& cloud, double r) {
  return ball_pivot_boundary(cloud.points, r);
}

/// Extent of the cloud across its principal axis (max - min of the
/// projection on the minor axis).
double principal_thickness(const std::vector<EnergyPoint>& points);

/// Out-and-back length of a cloud collapsed onto its principal axis: the
/// sorted projections are split at gaps wider than 2r and every piece
/// contributes twice its extent.
BoundaryResult collapsed_boundary(const std::vector<EnergyPoint>& points, double r);

/// sample_bulk followed by ball_pivot_boundary, or collapsed_boundary when the
/// principal thickness is below 2r.
BoundaryResult boundary_length(const ChernParams& p, int n = 128,
                               std::optional<double> r = std::nullopt);

/// Crossing-number test; points on the polygon boundary may go either way.
bool point_in_polygon(const EnergyPoint& q, const std::vector<EnergyPoint>& closed_polygon);

/// Perimeter of the convex hull of the vertices.
double convex_hull_perimeter(const std::vector<EnergyPoint>& points);

/// CSV with header eR,eI,loop-id,vertex-order. Cloud points carry loop-id -1
/// and vertex-order -1.
void write_boundary_csv(std::ostream& os, const EnergyPointCloud& cloud,
                        const BoundaryResult& result);

}  // namespace nhtopo
