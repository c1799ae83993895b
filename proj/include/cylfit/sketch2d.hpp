#pragma once

#include "cylfit/types.hpp"

#include <functional>
#include <vector>

namespace cylfit {

// Closed 2D profile: one or more simple polygon loops, pairwise non-crossing.
// Loops are implicitly closed (last vertex connects to the first).  On
// construction the orientation is normalized: loops at even containment depth
// (outer boundaries) wind counter-clockwise, odd-depth loops (holes) wind
// clockwise.  Inside/outside follows the even-odd rule, so holes do not need
// their own bookkeeping.
struct SketchProfile {
    std::vector<std::vector<Vec2>> loops;

    static SketchProfile from_loops(std::vector<std::vector<Vec2>> loops);

    bool empty() const { return loops.empty(); }
    std::size_t vertex_count() const;

    // Total enclosed area under the even-odd rule (outer minus holes).
    double area() const;

    // Max vertex distance from the origin.
    double max_radius() const;

    // Exhaustive simplicity check: no loop self-intersects and no two loops
    // cross.  Quadratic in edge count; intended for construction-time checks
    // on modest profiles, not per-query use.  Throws DataError on violation.
    void validate() const;
};

double signed_area(const std::vector<Vec2>& loop);

// Even-odd (crossing parity) containment over all loops.
bool point_inside(const SketchProfile& profile, const Vec2& p);

// Exact distance to the profile boundary: min over all edges of the exact
// point-segment distance.  Signed variant is negative inside (even-odd rule).
double unsigned_distance(const SketchProfile& profile, const Vec2& p);
double signed_distance(const SketchProfile& profile, const Vec2& p);

// Regular scalar-field samples over an axis-aligned square domain.  `exact`,
// when set, evaluates the true field at arbitrary points (used to resolve
// marching-squares saddles exactly); otherwise cell-center values fall back
// to the corner average.
struct DistanceField2D {
    double lo = -1.2, hi = 1.2; // domain [lo,hi]^2
    int resolution = 0;         // samples per side (>= 2)
    std::vector<double> values; // row-major, y rows, x columns
    std::function<double(double, double)> exact;

    double step() const { return (hi - lo) / (resolution - 1); }
    double x_at(int col) const { return lo + step() * col; }
    double y_at(int row) const { return lo + step() * row; }
    double at(int row, int col) const { return values[static_cast<std::size_t>(row) * resolution + col]; }

    // Bilinear interpolation; clamps to the domain.
    double interp(const Vec2& p) const;
};

// Samples signed_distance on a resolution^2 grid over [-1.2, 1.2]^2 (the
// normalized sketch domain plus margin).  resolution >= 2 or UsageError.
DistanceField2D rasterize_field(const SketchProfile& profile, int resolution);

// Same grid, arbitrary field.
DistanceField2D field_from_function(const std::function<double(double, double)>& f,
                                    int resolution, double lo = -1.2, double hi = 1.2);

// Zero-isocontour extraction.  Vertices are linearly interpolated on grid
// edges; ambiguous saddle cells are split according to the field sign at the
// exact cell center.  Emits only closed loops (open chains can occur only when
// the contour leaves the domain; they are discarded).
SketchProfile marching_squares(const DistanceField2D& field);

// Mean unsigned distance from the points to the profile boundary.
// Throws DataError when either the profile or point set is empty.
double fit_distance(const SketchProfile& profile, const std::vector<Vec2>& points);

// Closed profile through a bare 2D boundary sampling (no connectivity):
// contour the union of small disks around the samples, then pull the dilated
// contour back onto the samples by the disk radius.  The radius adapts to the
// sampling density, so loops stay closed across sampling gaps.  Returns an
// empty profile when no closed contour survives.
SketchProfile profile_from_samples(const std::vector<Vec2>& samples, int resolution = 256);

} // namespace cylfit
