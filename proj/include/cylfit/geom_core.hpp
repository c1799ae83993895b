#pragma once

#include "cylfit/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace cylfit {

// Canonical representative of an unoriented direction: sign flipped so the
// largest-magnitude component is positive.
Vec3 canonical_direction(Vec3 v);

// Minimal rotation taking `axis` (unit) onto +z.  Built from the cross product
// (Rodrigues); when axis is within ~1e-9 of -z the rotation is ill-defined and
// a fixed half-turn about x is used instead.  Always a proper rotation.
Mat3 rotation_to_z(const Vec3& axis);

// Projection onto the sketch plane through `center` orthogonal to `axis`:
// rotate axis onto +z, drop the z coordinate.  An isometry of the plane.
Vec2 project_to_sketch_plane(const Vec3& p, const Vec3& axis, const Vec3& center);

struct ProjectedCloud {
    std::vector<Vec2> points;
    std::vector<Vec2> normals;                 // normalized planar part
    std::vector<std::uint8_t> normal_valid;    // 0 when planar part is near zero
};

// Projects points and normals of a cloud.  Normal directions are projected as
// directions (no translation), renormalized; normals that are parallel to the
// axis have no planar direction and are flagged invalid.
ProjectedCloud project_cloud(const std::vector<Vec3>& points,
                             const std::vector<Vec3>& normals,
                             const Vec3& axis, const Vec3& center);

struct SymEigen3 {
    Vec3 vector;                      // unit eigenvector of the smallest eigenvalue
    std::array<double, 3> values;     // eigenvalues, ascending
    double gap;                       // values[1] - values[0]
};

// Eigen-decomposition of a symmetric 3x3 matrix, specialized to the smallest
// eigenpair.  Closed-form characteristic-polynomial roots, eigenvector from
// row cross products, then polished by shifted inverse iteration.  The sign is
// fixed so the largest-magnitude component is positive.  Works for indefinite
// matrices.  `gap` is the caller's ambiguity measure.
SymEigen3 smallest_eigenvector_sym3(const Mat3& H);

struct NormalEstimate {
    std::vector<Vec3> normals;
    std::vector<std::uint8_t> valid;
};

// PCA normal estimation: for each point, the covariance of its k nearest
// neighbors (point included) is decomposed and the smallest-eigenvalue
// direction taken as the normal.  Neighborhoods whose covariance has rank < 2
// (collinear or duplicated points) yield a flagged invalid normal.  Signs are
// unoriented; a deterministic canonical sign is applied.
NormalEstimate estimate_normals_pca(const std::vector<Vec3>& points, int k = 16);

} // namespace cylfit
