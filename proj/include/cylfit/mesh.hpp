#pragma once

#include "cylfit/fitting.hpp"
#include "cylfit/sketch2d.hpp"
#include "cylfit/types.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace cylfit {

struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
};

// Ear-clipping triangulation of a simple polygon (either winding).  Returned
// triangles index into `loop` and are wound counter-clockwise.
std::vector<std::array<int, 3>> triangulate_polygon(const std::vector<Vec2>& loop);

// Triangulation of a multi-loop profile.  Holes are joined to their enclosing
// boundary with bridge edges, then the merged polygon is ear-clipped.
// Triangle indices refer to the concatenation of the profile's loops in
// order.  Triangles are CCW with respect to the profile plane.
std::vector<std::array<int, 3>> triangulate_profile(const SketchProfile& profile);

// Watertight triangle mesh of an extrusion cylinder: triangulated caps at both
// extent ends plus side walls (two triangles per profile edge).  Outward
// orientation throughout.  Throws DegenerateError for an empty sketch or a
// zero extent (no volume to mesh).
TriMesh extrusion_mesh(const ExtrusionCylinder& cylinder);

// True when every undirected edge is shared by exactly two triangles.
bool is_watertight(const TriMesh& mesh);

void write_obj(std::ostream& os, const TriMesh& mesh);
void write_obj(std::ostream& os, const std::vector<TriMesh>& meshes); // one OBJ, grouped

} // namespace cylfit
