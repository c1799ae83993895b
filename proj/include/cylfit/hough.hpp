#pragma once

#include "cylfit/fitting.hpp"
#include "cylfit/types.hpp"

#include <cstdint>
#include <vector>

namespace cylfit {

struct HoughParams {
    int directions = 2048;        // hemisphere accumulator resolution
    double epsilon = 0.05;        // orthogonality threshold for a vote
    int tangent_samples = 8;      // random tangent hypotheses per point
    double bandwidth = 0.15;      // mean-shift geodesic bandwidth, radians
    double mode_rel_weight = 0.5; // keep modes >= this fraction of the strongest
    int max_modes = 8;
    std::uint64_t seed = 0;
};

// Candidate axis directions with accumulated vote mass.  Directions sample
// the upper hemisphere (axes are unoriented) via a Fibonacci spiral, so they
// are near-uniform and pairwise non-antipodal.
struct HoughAccumulator {
    std::vector<Vec3> directions;
    std::vector<double> scores;
};

HoughAccumulator make_accumulator(int directions);

// A direction scores a vote from a normal iff they are nearly orthogonal —
// barrel normals are orthogonal to the true axis, so directions collecting
// many votes are axis candidates.  Strict inequality: |d . n| < epsilon.
int vote(const Vec3& direction, const Vec3& normal, double epsilon);

// For every point with a valid normal, draws `tangent_samples` random unit
// vectors in the normal's tangent plane, snaps each to the nearest
// accumulator direction (antipodally aware) and scores it with vote().
// Deterministic for a fixed seed.
void accumulate(HoughAccumulator& acc, const OrientedPointCloud& cloud,
                const HoughParams& params);

struct AxisMode {
    Vec3 axis;     // unit, canonical sign
    double weight; // vote mass within one bandwidth
};

// Spherical mean-shift over the accumulator: seeds at the top-scoring
// directions, geodesic-bandwidth weighted means until the shift drops below
// 1e-4 rad, modes merged when closer than bandwidth/2, then pruned to
// >= mode_rel_weight of the strongest.  Sorted by weight, descending.
std::vector<AxisMode> mean_shift_modes(const HoughAccumulator& acc, const HoughParams& params);

struct Decomposition {
    HardLabels labels;               // per-point segment + barrel/base
    std::vector<AxisMode> modes;     // one per segment, aligned with labels
    std::vector<FitResult> segments; // cylinders fitted around the mode axes
};

// Full voting pipeline.  Axes are discovered by peeling: vote, pick one
// mode, remove the points whose normals it explains, vote again on the
// remainder — base normals smear votes along a great circle, so a single
// accumulator pass would keep spurious equatorial modes.  Within a round the
// candidates are ranked by the angular coverage of their supporting barrel
// normals before vote mass, because on flat box-like solids the caps plus
// the dominant wall pair impersonate an extrusion along the wall edge with
// more votes than the true axis but only two normal direction pairs.  Every
// point is then assigned to the discovered mode axis that best explains its
// normal (the larger of the barrel/base agreements), called base iff
// |n . axis| > cos(45 deg), and each segment's remaining cylinder parameters
// are fitted around its mode axis.  Modes that attract no barrel points are
// dropped and the assignment repeats.  Throws DegenerateError when no mode
// survives, DataError on an empty cloud.
Decomposition decompose(const OrientedPointCloud& cloud, const HoughParams& params);

} // namespace cylfit
