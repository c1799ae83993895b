#pragma once

#include "cylfit/fitting.hpp"
#include "cylfit/sketch2d.hpp"
#include "cylfit/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cylfit {

// Point-cloud text format, one point per line:
//   x y z nx ny nz seg bb
// seg in {-1, 0..K-1} (-1 unlabeled), bb in {-1, 0 barrel, 1 base}.
// `#` starts a comment, fields are whitespace-delimited, lines end with LF.
// Zero normals read back as invalid; everything else is renormalized.
OrientedPointCloud read_cloud_text(const std::string& path);
void write_cloud_text(const std::string& path, const OrientedPointCloud& cloud);

// Cylinder list JSON: {"schema":1,"cylinders":[{axis,center,scale,extent,
// op,sketch},...]}.  Sketch loops serialize as [[x,y],...] vertex arrays.
std::vector<ExtrusionCylinder> read_cylinders_json(const std::string& path);
void write_cylinders_json(const std::string& path,
                          const std::vector<ExtrusionCylinder>& cylinders);

// Standalone sketch JSON: {"schema":1,"loops":[...]}.
SketchProfile read_sketch_json(const std::string& path);
void write_sketch_json(const std::string& path, const SketchProfile& profile);

// Visual-inspection SVG: one even-odd-filled path per loop over the
// normalized sketch domain.
void write_sketch_svg(const std::string& path, const SketchProfile& profile);

// Provenance record written next to every command's outputs; replaying the
// same command line and seed reproduces outputs byte for byte.
struct RunManifest {
    std::string command;
    std::vector<std::string> flags; // normalized "--flag=value" snapshot
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::string version;
    double wall_time_s = 0.0;
};

void write_manifest(const std::string& path, const RunManifest& manifest);

} // namespace cylfit
