#include "cylfit/sketch2d.hpp"

#include "cylfit/error.hpp"
#include "cylfit/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

namespace cylfit {

namespace {

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 <= 0.0) return (p - a).norm();
    double t = (p - a).dot(ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

// Crossing-parity test against a single loop.  Half-open edge rule so shared
// vertices are not double counted.
bool inside_loop(const std::vector<Vec2>& loop, const Vec2& p) {
    bool in = false;
    const std::size_t n = loop.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = loop[j];
        const Vec2& b = loop[i];
        if ((b.y() > p.y()) != (a.y() > p.y())) {
            double x = b.x() + (p.y() - b.y()) * (a.x() - b.x()) / (a.y() - b.y());
            if (p.x() < x) in = !in;
        }
    }
    return in;
}

// Proper segment intersection (shared endpoints between adjacent edges of the
// same loop are handled by the caller).
bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        double v = (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
        return v > 0 ? 1 : (v < 0 ? -1 : 0);
    };
    int o1 = orient(a, b, c), o2 = orient(a, b, d);
    int o3 = orient(c, d, a), o4 = orient(c, d, b);
    return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

} // namespace

double signed_area(const std::vector<Vec2>& loop) {
    double a = 0.0;
    const std::size_t n = loop.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++)
        a += loop[j].x() * loop[i].y() - loop[i].x() * loop[j].y();
    return 0.5 * a;
}

SketchProfile SketchProfile::from_loops(std::vector<std::vector<Vec2>> loops) {
    for (const auto& loop : loops) {
        if (loop.size() < 3) throw DataError("sketch loop needs at least 3 vertices");
        for (const Vec2& v : loop)
            if (!v.allFinite()) throw DataError("sketch loop has non-finite vertex");
    }
    // Containment depth decides winding: even depth -> CCW, odd -> CW.
    for (std::size_t i = 0; i < loops.size(); ++i) {
        int depth = 0;
        for (std::size_t j = 0; j < loops.size(); ++j)
            if (j != i && inside_loop(loops[j], loops[i][0])) ++depth;
        const bool want_ccw = depth % 2 == 0;
        if ((signed_area(loops[i]) > 0.0) != want_ccw)
            std::reverse(loops[i].begin(), loops[i].end());
    }
    SketchProfile p;
    p.loops = std::move(loops);
    return p;
}

std::size_t SketchProfile::vertex_count() const {
    std::size_t n = 0;
    for (const auto& l : loops) n += l.size();
    return n;
}

double SketchProfile::area() const {
    double a = 0.0;
    for (const auto& l : loops) a += signed_area(l);
    return a;
}

double SketchProfile::max_radius() const {
    double r = 0.0;
    for (const auto& l : loops)
        for (const Vec2& v : l) r = std::max(r, v.norm());
    return r;
}

void SketchProfile::validate() const {
    // Gather edges as (loop, index) and test all non-adjacent pairs.
    struct Edge { std::size_t loop, idx; Vec2 a, b; };
    std::vector<Edge> edges;
    for (std::size_t li = 0; li < loops.size(); ++li) {
        const auto& l = loops[li];
        for (std::size_t i = 0; i < l.size(); ++i)
            edges.push_back({li, i, l[i], l[(i + 1) % l.size()]});
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
        for (std::size_t j = i + 1; j < edges.size(); ++j) {
            const Edge& e = edges[i];
            const Edge& f = edges[j];
            if (e.loop == f.loop) {
                std::size_t n = loops[e.loop].size();
                std::size_t d = (f.idx + n - e.idx) % n;
                if (d == 1 || d == n - 1) continue; // adjacent edges share a vertex
            }
            if (segments_cross(e.a, e.b, f.a, f.b))
                throw DataError("sketch profile self-intersects");
        }
    }
    if (area() <= 0.0) throw DataError("sketch profile has non-positive area");
}

bool point_inside(const SketchProfile& profile, const Vec2& p) {
    int crossings = 0;
    for (const auto& loop : profile.loops)
        if (inside_loop(loop, p)) ++crossings;
    return crossings % 2 == 1;
}

double unsigned_distance(const SketchProfile& profile, const Vec2& p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& loop : profile.loops) {
        const std::size_t n = loop.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++)
            best = std::min(best, point_segment_distance(p, loop[j], loop[i]));
    }
    return best;
}

double signed_distance(const SketchProfile& profile, const Vec2& p) {
    const double d = unsigned_distance(profile, p);
    return point_inside(profile, p) ? -d : d;
}

double DistanceField2D::interp(const Vec2& p) const {
    const double h = step();
    double fx = std::clamp((p.x() - lo) / h, 0.0, static_cast<double>(resolution - 1));
    double fy = std::clamp((p.y() - lo) / h, 0.0, static_cast<double>(resolution - 1));
    int c = std::min(static_cast<int>(fx), resolution - 2);
    int r = std::min(static_cast<int>(fy), resolution - 2);
    double tx = fx - c, ty = fy - r;
    return (1 - tx) * (1 - ty) * at(r, c) + tx * (1 - ty) * at(r, c + 1) +
           (1 - tx) * ty * at(r + 1, c) + tx * ty * at(r + 1, c + 1);
}

DistanceField2D rasterize_field(const SketchProfile& profile, int resolution) {
    if (resolution < 2) throw UsageError("rasterize_field: resolution must be >= 2");
    DistanceField2D f;
    f.resolution = resolution;
    f.values.resize(static_cast<std::size_t>(resolution) * resolution);
    for (int r = 0; r < resolution; ++r)
        for (int c = 0; c < resolution; ++c)
            f.values[static_cast<std::size_t>(r) * resolution + c] =
                signed_distance(profile, Vec2(f.x_at(c), f.y_at(r)));
    f.exact = [profile](double x, double y) { return signed_distance(profile, Vec2(x, y)); };
    return f;
}

DistanceField2D field_from_function(const std::function<double(double, double)>& fn,
                                    int resolution, double lo, double hi) {
    if (resolution < 2) throw UsageError("field_from_function: resolution must be >= 2");
    DistanceField2D f;
    f.lo = lo;
    f.hi = hi;
    f.resolution = resolution;
    f.values.resize(static_cast<std::size_t>(resolution) * resolution);
    for (int r = 0; r < resolution; ++r)
        for (int c = 0; c < resolution; ++c)
            f.values[static_cast<std::size_t>(r) * resolution + c] = fn(f.x_at(c), f.y_at(r));
    f.exact = fn;
    return f;
}

// ----------------------------------------------------------------------------
// Marching squares.
//
// Contour vertices live on grid edges, which gives exact stitching: a vertex
// is keyed by its grid edge, every interior key is shared by the two adjacent
// cells, so tracing the segment graph yields closed loops without any
// floating-point welding.
// ----------------------------------------------------------------------------

namespace {

// Grid edge key: (vertical?, row, col) of the edge start sample.
using EdgeKey = std::tuple<int, int, int>;

Vec2 edge_point(const DistanceField2D& f, bool vertical, int row, int col) {
    double v0, v1;
    Vec2 a, b;
    if (vertical) {
        v0 = f.at(row, col);
        v1 = f.at(row + 1, col);
        a = Vec2(f.x_at(col), f.y_at(row));
        b = Vec2(f.x_at(col), f.y_at(row + 1));
    } else {
        v0 = f.at(row, col);
        v1 = f.at(row, col + 1);
        a = Vec2(f.x_at(col), f.y_at(row));
        b = Vec2(f.x_at(col + 1), f.y_at(row));
    }
    double denom = v0 - v1;
    double t = std::abs(denom) > 0.0 ? v0 / denom : 0.5;
    t = std::clamp(t, 0.0, 1.0);
    return a + t * (b - a);
}

} // namespace

SketchProfile marching_squares(const DistanceField2D& field) {
    if (field.resolution < 2) throw UsageError("marching_squares: field too small");
    const int n = field.resolution;
    auto inside = [](double v) { return v < 0.0; };

    // Per-cell segments between edge keys.
    std::vector<std::pair<EdgeKey, EdgeKey>> segments;
    for (int r = 0; r + 1 < n; ++r) {
        for (int c = 0; c + 1 < n; ++c) {
            const bool bl = inside(field.at(r, c));
            const bool br = inside(field.at(r, c + 1));
            const bool tr = inside(field.at(r + 1, c + 1));
            const bool tl = inside(field.at(r + 1, c));
            const int config = (bl ? 1 : 0) | (br ? 2 : 0) | (tr ? 4 : 0) | (tl ? 8 : 0);
            if (config == 0 || config == 15) continue;

            const EdgeKey bottom{0, r, c};
            const EdgeKey top{0, r + 1, c};
            const EdgeKey left{1, r, c};
            const EdgeKey right{1, r, c + 1};

            if (config == 5 || config == 10) {
                // Saddle: two contour arcs; the exact field sign at the cell
                // center decides which diagonal the inside region takes.
                double center;
                if (field.exact) {
                    center = field.exact(field.x_at(c) + field.step() * 0.5,
                                         field.y_at(r) + field.step() * 0.5);
                } else {
                    center = 0.25 * (field.at(r, c) + field.at(r, c + 1) +
                                     field.at(r + 1, c) + field.at(r + 1, c + 1));
                }
                const bool center_in = inside(center);
                const bool joins_bl_tr = (config == 5) == center_in;
                if (joins_bl_tr) {
                    segments.emplace_back(bottom, right);
                    segments.emplace_back(top, left);
                } else {
                    segments.emplace_back(bottom, left);
                    segments.emplace_back(right, top);
                }
                continue;
            }

            // Non-saddle: exactly two crossed edges.
            EdgeKey pts[4];
            int m = 0;
            if (bl != br) pts[m++] = bottom;
            if (br != tr) pts[m++] = right;
            if (tl != tr) pts[m++] = top;
            if (bl != tl) pts[m++] = left;
            if (m == 2) segments.emplace_back(pts[0], pts[1]);
        }
    }

    // Stitch: each key has degree <= 2; walk unused segments into loops.
    std::map<EdgeKey, std::vector<int>> incident;
    for (int i = 0; i < static_cast<int>(segments.size()); ++i) {
        incident[segments[i].first].push_back(i);
        incident[segments[i].second].push_back(i);
    }
    std::vector<char> used(segments.size(), 0);
    std::vector<std::vector<Vec2>> loops;
    for (int start = 0; start < static_cast<int>(segments.size()); ++start) {
        if (used[start]) continue;
        std::vector<EdgeKey> chain;
        EdgeKey first = segments[start].first;
        EdgeKey cur = segments[start].second;
        used[start] = 1;
        chain.push_back(first);
        chain.push_back(cur);
        bool closed = false;
        while (true) {
            int next = -1;
            for (int si : incident[cur])
                if (!used[si]) { next = si; break; }
            if (next < 0) break;
            used[next] = 1;
            cur = segments[next].first == cur ? segments[next].second : segments[next].first;
            if (cur == first) { closed = true; break; }
            chain.push_back(cur);
        }
        if (!closed || chain.size() < 3) continue; // open chain: contour left the domain
        std::vector<Vec2> loop;
        loop.reserve(chain.size());
        for (const EdgeKey& k : chain)
            loop.push_back(edge_point(field, std::get<0>(k) == 1, std::get<1>(k), std::get<2>(k)));
        loops.push_back(std::move(loop));
    }
    return SketchProfile::from_loops(std::move(loops));
}

double fit_distance(const SketchProfile& profile, const std::vector<Vec2>& points) {
    if (profile.empty()) throw DataError("fit_distance: empty profile");
    if (points.empty()) throw DataError("fit_distance: empty point set");
    double sum = 0.0;
    for (const Vec2& p : points) sum += unsigned_distance(profile, p);
    return sum / static_cast<double>(points.size());
}

SketchProfile profile_from_samples(const std::vector<Vec2>& samples, int resolution) {
    if (samples.size() < 3)
        throw DataError("profile_from_samples: need at least 3 samples");
    if (resolution < 16)
        throw UsageError("profile_from_samples: resolution must be >= 16");

    KdTree2 tree(samples);

    // Disk radius: generous multiple of the median sample spacing so the
    // union of disks is connected along the boundary, but never below the
    // grid step (contouring cannot resolve thinner features anyway).
    std::vector<double> spacing;
    spacing.reserve(samples.size());
    for (const Vec2& p : samples) {
        const std::vector<int> two = tree.knn(p, 2);
        if (two.size() == 2)
            spacing.push_back((samples[static_cast<std::size_t>(two[1])] - p).norm());
    }
    std::sort(spacing.begin(), spacing.end());
    const double median = spacing.empty() ? 0.0 : spacing[spacing.size() / 2];
    const double h = 2.4 / (resolution - 1);
    const double rho = std::max(2.0 * median, 1.5 * h);

    const auto disk_field = [&](double x, double y) {
        return tree.nearest_distance(Vec2(x, y)) - rho;
    };
    const DistanceField2D field = field_from_function(disk_field, resolution);
    const SketchProfile dilated = marching_squares(field);
    if (dilated.empty()) return dilated;

    // The dilated region is a band straddling each sample curve, so contouring
    // yields two edges per curve: one outside the samples (CCW after winding
    // normalization) and one on the material side (CW).  Both sit rho away
    // from the curve; keeping both would collapse them onto the same offset
    // curve with opposite windings and cancel under even-odd.  Keep the CCW
    // edges and pull each back by rho toward the material side, which the
    // winding convention puts on the left of the direction of travel.
    std::vector<std::vector<Vec2>> loops;
    for (const auto& loop : dilated.loops) {
        if (signed_area(loop) < 0.0) continue; // inner band edge
        const std::size_t m = loop.size();
        std::vector<Vec2> shrunk;
        shrunk.reserve(m);
        for (std::size_t i = 0; i < m; ++i) {
            const Vec2& prev = loop[(i + m - 1) % m];
            const Vec2& cur = loop[i];
            const Vec2& next = loop[(i + 1) % m];
            Vec2 d0 = cur - prev;
            Vec2 d1 = next - cur;
            const double l0 = d0.norm();
            const double l1 = d1.norm();
            if (l0 > 1e-15) d0 /= l0;
            if (l1 > 1e-15) d1 /= l1;
            Vec2 inward(-(d0.y() + d1.y()), d0.x() + d1.x());
            const double len = inward.norm();
            if (len < 1e-12) inward = Vec2(-d1.y(), d1.x());
            else inward /= len;
            shrunk.push_back(cur + rho * inward);
        }
        // Collapse duplicate runs the offset can create at sharp corners.
        std::vector<Vec2> clean;
        for (const Vec2& p : shrunk)
            if (clean.empty() || (p - clean.back()).norm() > 1e-12) clean.push_back(p);
        while (clean.size() > 1 && (clean.front() - clean.back()).norm() <= 1e-12)
            clean.pop_back();
        if (clean.size() < 3) continue;
        if (std::abs(signed_area(clean)) < 1e-6) continue; // collapsed sliver
        loops.push_back(std::move(clean));
    }
    return SketchProfile::from_loops(std::move(loops));
}

} // namespace cylfit
