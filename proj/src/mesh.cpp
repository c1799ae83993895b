#include "cylfit/mesh.hpp"

#include "cylfit/error.hpp"
#include "cylfit/geom_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>

namespace cylfit {

namespace {

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

bool strictly_inside_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    const double d1 = cross2(a, b, p);
    const double d2 = cross2(b, c, p);
    const double d3 = cross2(c, a, p);
    return (d1 > 0 && d2 > 0 && d3 > 0) || (d1 < 0 && d2 < 0 && d3 < 0);
}

// Ear clipping over an index list into `pts`.  `pts` must be CCW overall.
std::vector<std::array<int, 3>> clip_ears(const std::vector<Vec2>& pts, std::vector<int> ring) {
    std::vector<std::array<int, 3>> tris;
    if (ring.size() < 3) return tris;
    int guard = 0;
    while (ring.size() > 3) {
        const int n = static_cast<int>(ring.size());
        bool clipped = false;
        for (int i = 0; i < n; ++i) {
            const int ia = ring[(i + n - 1) % n], ib = ring[i], ic = ring[(i + 1) % n];
            const Vec2 &a = pts[ia], &b = pts[ib], &c = pts[ic];
            if (cross2(a, b, c) <= 0) continue; // reflex or degenerate corner
            bool blocked = false;
            for (int j = 0; j < n && !blocked; ++j) {
                int iv = ring[j];
                if (iv == ia || iv == ib || iv == ic) continue;
                if (strictly_inside_triangle(pts[iv], a, b, c)) blocked = true;
            }
            if (blocked) continue;
            tris.push_back({ia, ib, ic});
            ring.erase(ring.begin() + i);
            clipped = true;
            break;
        }
        if (!clipped) {
            // Numerically stuck (collinear runs): drop the corner with the
            // largest cross product anyway to guarantee progress.
            int best = 0;
            double best_c = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < n; ++i) {
                double cc = cross2(pts[ring[(i + n - 1) % n]], pts[ring[i]],
                                   pts[ring[(i + 1) % n]]);
                if (cc > best_c) { best_c = cc; best = i; }
            }
            tris.push_back({ring[(best + n - 1) % n], ring[best], ring[(best + 1) % n]});
            ring.erase(ring.begin() + best);
        }
        if (++guard > 100000) throw DegenerateError("triangulation failed to converge");
    }
    tris.push_back({ring[0], ring[1], ring[2]});
    return tris;
}

} // namespace

std::vector<std::array<int, 3>> triangulate_polygon(const std::vector<Vec2>& loop) {
    if (loop.size() < 3) throw DataError("triangulate_polygon: need at least 3 vertices");
    std::vector<int> ring(loop.size());
    for (std::size_t i = 0; i < loop.size(); ++i) ring[i] = static_cast<int>(i);
    if (signed_area(loop) < 0) std::reverse(ring.begin(), ring.end());
    // Work on a CCW copy so the ear test is uniform, then indices map back.
    std::vector<Vec2> pts = loop;
    std::vector<std::array<int, 3>> tris = clip_ears(pts, ring);
    return tris;
}

std::vector<std::array<int, 3>> triangulate_profile(const SketchProfile& profile) {
    if (profile.empty()) throw DataError("triangulate_profile: empty profile");
    // Offsets of each loop in the concatenated vertex list.
    std::vector<int> offset(profile.loops.size());
    std::vector<Vec2> pts;
    for (std::size_t i = 0; i < profile.loops.size(); ++i) {
        offset[i] = static_cast<int>(pts.size());
        pts.insert(pts.end(), profile.loops[i].begin(), profile.loops[i].end());
    }

    // Group loops: outers (positive area after normalization) own the holes
    // whose representative vertex they contain.
    std::vector<std::size_t> outers, holes;
    for (std::size_t i = 0; i < profile.loops.size(); ++i)
        (signed_area(profile.loops[i]) > 0 ? outers : holes).push_back(i);

    std::vector<std::array<int, 3>> tris;
    for (std::size_t oi : outers) {
        // Ring of global indices for this outer loop, CCW already.
        std::vector<int> ring;
        for (std::size_t v = 0; v < profile.loops[oi].size(); ++v)
            ring.push_back(offset[oi] + static_cast<int>(v));

        // Holes directly inside this outer, bridged one by one, rightmost
        // first (the classic visibility argument needs that order).
        std::vector<std::size_t> my_holes;
        for (std::size_t hi : holes) {
            const Vec2& probe = profile.loops[hi][0];
            bool in_this = false;
            int depth = 0;
            for (std::size_t oj : outers) {
                // crossing test against each outer; deepest containing outer wins
                const auto& lp = profile.loops[oj];
                bool in = false;
                for (std::size_t a = 0, b = lp.size() - 1; a < lp.size(); b = a++) {
                    if ((lp[a].y() > probe.y()) != (lp[b].y() > probe.y())) {
                        double x = lp[a].x() + (probe.y() - lp[a].y()) * (lp[b].x() - lp[a].x()) /
                                                   (lp[b].y() - lp[a].y());
                        if (probe.x() < x) in = !in;
                    }
                }
                if (in) { ++depth; if (oj == oi) in_this = true; }
            }
            if (in_this && depth == 1) my_holes.push_back(hi);
        }
        std::sort(my_holes.begin(), my_holes.end(), [&](std::size_t a, std::size_t b) {
            auto maxx = [&](std::size_t li) {
                double m = -std::numeric_limits<double>::infinity();
                for (const Vec2& v : profile.loops[li]) m = std::max(m, v.x());
                return m;
            };
            return maxx(a) > maxx(b);
        });

        for (std::size_t hi : my_holes) {
            const auto& hole = profile.loops[hi];
            // Hole vertex with max x.
            int mi = 0;
            for (int v = 1; v < static_cast<int>(hole.size()); ++v)
                if (hole[v].x() > hole[mi].x()) mi = v;
            const Vec2 m = hole[mi];

            // Shoot a ray +x from m; find the nearest ring edge crossing and
            // take the visible ring vertex to connect to.
            double best_x = std::numeric_limits<double>::infinity();
            int bridge = -1;
            const int rn = static_cast<int>(ring.size());
            for (int a = 0; a < rn; ++a) {
                const Vec2& p = pts[ring[a]];
                const Vec2& q = pts[ring[(a + 1) % rn]];
                if ((p.y() > m.y()) == (q.y() > m.y())) continue;
                double x = p.x() + (m.y() - p.y()) * (q.x() - p.x()) / (q.y() - p.y());
                if (x >= m.x() && x < best_x) {
                    best_x = x;
                    bridge = p.x() > q.x() ? a : (a + 1) % rn;
                }
            }
            if (bridge < 0)
                throw DataError("triangulate_profile: hole is not inside its boundary");
            // Prefer a closer visible vertex inside the triangle (m, i, bridge).
            const Vec2 hit(best_x, m.y());
            double best_d = (pts[ring[bridge]] - m).squaredNorm();
            for (int a = 0; a < rn; ++a) {
                if (a == bridge) continue;
                const Vec2& cand = pts[ring[a]];
                if (cand.x() < m.x()) continue;
                if (!strictly_inside_triangle(cand, m, hit, pts[ring[bridge]]) &&
                    (cand - pts[ring[bridge]]).squaredNorm() > 0)
                    continue;
                double d = (cand - m).squaredNorm();
                if (d < best_d) { best_d = d; bridge = a; }
            }

            // Splice: ... bridge, m, hole walk (CW), m, bridge, ...
            std::vector<int> merged;
            merged.reserve(ring.size() + hole.size() + 2);
            for (int a = 0; a <= bridge; ++a) merged.push_back(ring[a]);
            const int hn = static_cast<int>(hole.size());
            for (int v = 0; v <= hn; ++v)
                merged.push_back(offset[hi] + (mi + v) % hn);
            merged.push_back(ring[bridge]);
            for (int a = bridge + 1; a < rn; ++a) merged.push_back(ring[a]);
            ring = std::move(merged);
        }
        auto part = clip_ears(pts, ring);
        tris.insert(tris.end(), part.begin(), part.end());
    }
    return tris;
}

TriMesh extrusion_mesh(const ExtrusionCylinder& cyl) {
    if (cyl.sketch.empty()) throw DegenerateError("extrusion_mesh: cylinder has no sketch");
    if (!(cyl.r_max > 0.0)) throw DegenerateError("extrusion_mesh: zero extent");
    if (!(cyl.scale > 0.0)) throw DegenerateError("extrusion_mesh: non-positive scale");

    const Mat3 r_inv = rotation_to_z(cyl.axis).transpose();
    auto lift = [&](const Vec2& q, double t) {
        return Vec3(cyl.center + r_inv * Vec3(cyl.scale * q.x(), cyl.scale * q.y(), t));
    };

    TriMesh mesh;
    std::vector<int> offset(cyl.sketch.loops.size());
    int total = 0;
    for (std::size_t li = 0; li < cyl.sketch.loops.size(); ++li) {
        offset[li] = total;
        total += static_cast<int>(cyl.sketch.loops[li].size());
    }
    mesh.vertices.reserve(2 * total);
    for (const auto& loop : cyl.sketch.loops)
        for (const Vec2& q : loop) mesh.vertices.push_back(lift(q, cyl.r_min));
    for (const auto& loop : cyl.sketch.loops)
        for (const Vec2& q : loop) mesh.vertices.push_back(lift(q, cyl.r_max));

    // Walls.  Loops wind CCW for outers and CW for holes, which makes the
    // same quad split outward-facing in both cases.
    for (std::size_t li = 0; li < cyl.sketch.loops.size(); ++li) {
        const int n = static_cast<int>(cyl.sketch.loops[li].size());
        for (int v = 0; v < n; ++v) {
            const int b0 = offset[li] + v;
            const int b1 = offset[li] + (v + 1) % n;
            const int t0 = b0 + total;
            const int t1 = b1 + total;
            mesh.triangles.push_back({b0, b1, t1});
            mesh.triangles.push_back({b0, t1, t0});
        }
    }

    // Caps.  Profile triangles are CCW in the sketch plane; that faces +axis,
    // so the top cap keeps the winding and the bottom cap flips it.
    const auto cap = triangulate_profile(cyl.sketch);
    for (const auto& t : cap) {
        mesh.triangles.push_back({t[0] + total, t[1] + total, t[2] + total}); // top
        mesh.triangles.push_back({t[0], t[2], t[1]});                         // bottom
    }
    return mesh;
}

bool is_watertight(const TriMesh& mesh) {
    std::map<std::pair<int, int>, int> count;
    for (const auto& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            int a = t[e], b = t[(e + 1) % 3];
            if (a == b) return false;
            count[{std::min(a, b), std::max(a, b)}]++;
        }
    }
    for (const auto& [edge, c] : count)
        if (c != 2) return false;
    return !mesh.triangles.empty();
}

void write_obj(std::ostream& os, const TriMesh& mesh) {
    os << "# extrusion mesh\n";
    char buf[128];
    for (const Vec3& v : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
        os << buf;
    }
    for (const auto& t : mesh.triangles)
        os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void write_obj(std::ostream& os, const std::vector<TriMesh>& meshes) {
    os << "# extrusion scene\n";
    char buf[128];
    int base = 0;
    for (std::size_t i = 0; i < meshes.size(); ++i) {
        os << "g segment_" << i << '\n';
        for (const Vec3& v : meshes[i].vertices) {
            std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
            os << buf;
        }
        for (const auto& t : meshes[i].triangles)
            os << "f " << t[0] + 1 + base << ' ' << t[1] + 1 + base << ' ' << t[2] + 1 + base
               << '\n';
        base += static_cast<int>(meshes[i].vertices.size());
    }
}

} // namespace cylfit
