#pragma once

#include "cylfit/fitting.hpp"
#include "cylfit/types.hpp"

#include <cstdint>
#include <vector>

namespace cylfit {

// One extrusion solid to sample: a simple polygon profile (any winding; the
// origin should be interior), swept along `axis` over [-half_extent,
// +half_extent] around `center`, with `scale` multiplying the profile.
struct SolidSpec {
    std::vector<Vec2> profile;
    Vec3 axis = Vec3::UnitZ();
    Vec3 center = Vec3::Zero();
    double scale = 1.0;
    double half_extent = 0.5;
};

struct SynthModel {
    OrientedPointCloud cloud;          // labeled, unit-sphere normalized
    std::vector<ExtrusionCylinder> gt; // exact per-segment ground truth
};

struct SynthConfig {
    int segments = 1;         // K, 1..8
    int points = 8192;        // total samples
    double noise_sigma = 0.0; // along-normal uniform displacement bound
    std::uint64_t seed = 0;
    double min_extent = 0.015; // discard rule: minimum |r_max| after normalization
    double min_share = 0.02;   // discard rule: minimum per-segment point share
    int min_points = 50;       // discard rule: minimum per-segment point count
};

// Deterministic sub-stream derivation so independent draws (geometry,
// sampling, noise) never shift each other.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

// Samples `points` points area-uniformly over the boundary faces of the given
// solids (walls and both caps), assigns exact normals and labels, normalizes
// the cloud to the unit sphere and derives exact ground-truth cylinders.
// Every profile vertex is anchored as a sample at both extent ends, so the
// sample extrema coincide with the nominal scale/extent.  Per-segment counts
// respect the config's discard rules.  Throws DegenerateError when the rules
// cannot be met.
SynthModel extrude_solids(const std::vector<SolidSpec>& solids, const SynthConfig& cfg);

// Random model: K disjoint solids with randomized profiles (polygon, star or
// rounded rectangle), axes, scales and extents, placed by rejection sampling
// with a growing placement volume.  Fixed seed gives a byte-identical model.
SynthModel generate_model(const SynthConfig& cfg);

// Displaces each point along its normal by u ~ Uniform[-sigma, sigma].
void perturb_noise(OrientedPointCloud& cloud, double sigma, std::uint64_t seed);

// Redraws each normal as normalize(n + sigma_n * g), g standard Gaussian.
// Draws depend on the seed only, so deviation grows monotonically with
// sigma_n under a fixed seed.
void perturb_normals(OrientedPointCloud& cloud, double sigma_n, std::uint64_t seed);

// Deterministic test/demo solids.
SolidSpec l_profile_solid();                      // L-shaped sketch, tilted axis
SynthModel l_profile_model(std::uint64_t seed, int points = 4096);
SynthModel coaxial_pair_model(std::uint64_t seed, int points = 8192); // shared axis

} // namespace cylfit
