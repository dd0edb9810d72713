#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include "nhtopo/boundary_2d.hpp"
#include "nhtopo/invariants.hpp"
#include "nhtopo/model.hpp"

namespace nhtopo {

/// d(E_R, E_I)/d(kx, ky) of the band E_+ (signed coordinates).
struct JacobianSample {
  std::array<std::array<double, 2>, 2> matrix{};  ///< matrix[row][col], rows E_R, E_I
  double det = 0.0;
  KPoint k;
};

/// Throws DomainError at exceptional points, using the band_sample
/// threshold (|E| <= 1e-6).
JacobianSample jacobian_at(const ChernParams& p, double kx, double ky);

/// gamma (m + cos ky) sin kx cos ky / |E|^2. Only defined for t = 1; other
/// hopping values throw UsageError (use jacobian_at).
double jacobian_det_closed(const ChernParams& p, double kx, double ky);

struct ZeroLocus {
  std::vector<KPoint> points;
  std::vector<double> det;
  std::vector<EnergyPoint> images;  ///< E_+ at each point; E_- is the negative
  double tolerance = 0.0;
};

/// Grid nodes of the n x n BZ grid with |det| <= tol, plus zero crossings of
/// det between neighbouring nodes refined by bisection until |det| <= tol.
/// Default tol = 1e-3 x median |det| over the grid. n >= 128.
ZeroLocus zero_locus(const ChernParams& p, int n = 128, std::optional<double> tol = std::nullopt);

struct Correspondence {
  bool applicable = true;
  double fraction = 0.0;
  std::size_t images = 0;  ///< image points tested (both bands)
  double radius = 0.0;
};

/// Fraction of zero-locus images (both bands) within the pivot radius of a
/// boundary loop. Not applicable when the cloud collapses to a curve.
Correspondence boundary_correspondence(const ChernParams& p, int n = 128,
                                       std::optional<double> r = std::nullopt);

/// CSV with header kx,ky,det,eR,eI.
void write_locus_csv(std::ostream& os, const ZeroLocus& locus);

}  // namespace nhtopo
