#pragma once

#include "cylfit/fitting.hpp"
#include "cylfit/types.hpp"

#include <cstdint>
#include <vector>

namespace cylfit {

// Density clustering knobs.  eps <= 0 selects the surface-sampling default
// 4 * (2 / sqrt(N)) at call time.
struct DbscanParams {
    double eps = 0.0;
    int min_pts = 8;
};

// Neighborhood radius heuristic for ~N points sampled on a unit-scale
// surface: four times the expected nearest-neighbor spacing.
double auto_dbscan_eps(std::size_t n);

// Classic DBSCAN over 3D points.  Returns one cluster id per point, -1 for
// noise.  Cluster ids are assigned in first-touch order, so output is
// deterministic.
std::vector<int> dbscan(const std::vector<Vec3>& points, const DbscanParams& params);

// Same clustering over scalars (used for axial extents).
std::vector<int> dbscan_1d(const std::vector<double>& values, const DbscanParams& params);

struct RefineParams {
    DbscanParams dbscan;
    int knn = 10;            // neighbor count for label voting
    double consensus = 0.7;  // disagreeing-neighbor fraction that flips a label
    int max_passes = 3;      // cap on consensus sweeps
};

// Segmentation cleanup: (i) per segment, drop everything outside its largest
// spatial cluster; (ii) give dropped points the majority label of their
// nearest labeled neighbors; (iii) flip labels that a strong neighborhood
// consensus contradicts, repeated to a (capped) fixed point.  Barrel/base
// labels pass through untouched, and no new segment index is ever created.
HardLabels refine_segmentation(const OrientedPointCloud& cloud, const HardLabels& labels,
                               const RefineParams& params = {});

struct RansacParams {
    double sample_frac = 0.01; // barrel fraction drawn per candidate
    double accept_frac = 0.80; // coverage needed to accept a candidate
    double inlier_tol = 0.02;  // relative radial slack
    int max_iters = 100;
    std::uint64_t seed = 0;
};

struct RansacScale {
    double scale = 0.0;
    double coverage = 0.0; // inlier fraction at the returned scale
    bool accepted = false; // false: best-coverage fallback, treat as warning
};

// Outlier-tolerant scale: repeatedly sample a small barrel subset, take its
// largest planar radius, grow it to the fixed point of max-over-inliers
// (inlier = planar radius within (1 + inlier_tol) of the candidate), and
// keep candidates covering at least accept_frac of the points.  Returns the
// smallest accepted radius — outlier-seeded candidates cover everything but
// are beaten by any clean candidate.  With no accepted candidate the best
// coverage wins and `accepted` stays false.
RansacScale ransac_scale(const std::vector<Vec3>& barrel_points, const Vec3& axis,
                         const Vec3& center, const RansacParams& params = {});

// Extent from the dominant cluster of axial projections: 1D DBSCAN, take the
// largest cluster, symmetrize its min/max like the plain estimator.  Isolated
// stragglers along the axis stop stretching the extent.
Extent robust_extent(const std::vector<Vec3>& barrel_points, const Vec3& axis,
                     const Vec3& center, const DbscanParams& params = {});

} // namespace cylfit
