#pragma once

#include "cylfit/labels.hpp"
#include "cylfit/sketch2d.hpp"
#include "cylfit/types.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace cylfit {

// Extrusion cylinder: a planar sketch swept along a straight axis.
// The axis direction is unoriented (e and -e describe the same cylinder) and
// stored with canonical sign.  `sketch` is expressed in the normalized sketch
// plane (unit-disk scale); `scale` carries the world size and the extent is
// symmetric about the center by construction (r_min = -r_max).
struct ExtrusionCylinder {
    Vec3 axis = Vec3::UnitZ();
    Vec3 center = Vec3::Zero();
    double scale = 1.0;
    double r_min = 0.0;
    double r_max = 0.0;
    SketchProfile sketch;
    std::string op = "unknown"; // boolean op against the rest of the model
};

// Per-point soft weights for one segment: barrel column and base column.
struct SoftWeights {
    Eigen::VectorXd barrel;
    Eigen::VectorXd base;
};

struct AxisFit {
    Vec3 axis;                    // unit, canonical sign
    double gap = 0.0;             // second-smallest minus smallest eigenvalue
    std::array<double, 3> values{}; // scatter eigenvalues, ascending
};

// Weighted scatter of the axis objective: sum over points of
// (w_barrel^2 - w_base^2) * n n^T.  Barrel normals should be orthogonal to
// the axis, base normals parallel, so the best axis is the smallest-eigenvalue
// eigenvector of this matrix.  With 0/1 weights it reduces to the plain
// barrel-minus-base normal scatter.
Mat3 weighted_axis_scatter(const std::vector<Vec3>& normals, const SoftWeights& w);

// Axis from the scatter's smallest eigenpair.  Throws AmbiguousAxisError when
// the two smallest eigenvalues are closer than gap_rel_tol times the total
// eigenvalue magnitude (no single best direction), or when no normal carries
// weight.
AxisFit recover_axis(const std::vector<Vec3>& normals, const SoftWeights& w,
                     double gap_rel_tol = 1e-7);

// Barrel-weighted centroid.  Throws DegenerateError when the weights sum to
// (near) zero.
Vec3 recover_center(const std::vector<Vec3>& points, const Eigen::VectorXd& barrel_weight);

// Max planar radius of the barrel points around (axis, center).
// Throws DegenerateError on an empty set or when every point projects onto
// the axis (zero radius).
double recover_scale(const std::vector<Vec3>& barrel_points, const Vec3& axis,
                     const Vec3& center);

struct Extent {
    double r_min = 0.0;
    double r_max = 0.0;
    bool zero = false; // all barrel points coplanar orthogonal to the axis
};

// Axial extent from min/max of axis . (p - center) over barrel points,
// symmetrized to r_max = max(|lo|, |hi|), r_min = -r_max (the axis direction
// is unoriented, so a lopsided raw extent is not recoverable).  A zero extent
// is flagged, not an error.
Extent recover_extent(const std::vector<Vec3>& barrel_points, const Vec3& axis,
                      const Vec3& center);

// Full per-segment fit.  Alongside the cylinder parameters this keeps the
// normalized sketch-plane samples (the projected barrel points divided by the
// scale) and their planar normals, which downstream consumers use to build a
// boundary polygon.
struct FitResult {
    ExtrusionCylinder cylinder;
    std::vector<Vec2> sketch_points;
    std::vector<Vec2> sketch_normals;
    std::vector<std::uint8_t> sketch_normal_valid;
    std::vector<int> barrel_indices; // rows assigned to this segment's barrel
    bool zero_extent = false;
};

// Fits segment k from a soft membership matrix: axis from the weighted
// scatter (columns 2k / 2k+1), center from the barrel-weighted mean, then
// scale, extent and sketch from the points whose argmax class is this
// segment's barrel column.  Invalid normals contribute no axis weight but
// their positions still count.
FitResult fit_segment(const OrientedPointCloud& cloud, const MembershipMatrix& membership,
                      int segment);

// Hard-label convenience: one-hot membership from the cloud's own labels.
FitResult fit_segment(const OrientedPointCloud& cloud, int segment);

// Same chain with the axis supplied by the caller (e.g. a voting stage)
// instead of the scatter eigenvector: center from the segment's barrel mean,
// then scale/extent/sketch as usual.
FitResult fit_segment_with_axis(const OrientedPointCloud& cloud, const HardLabels& labels,
                                int segment, const Vec3& axis);

} // namespace cylfit
