#include "cylfit/synth.hpp"

#include "cylfit/error.hpp"
#include "cylfit/geom_core.hpp"
#include "cylfit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace cylfit {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 of the salted seed; keeps independent draw streams stable.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec3 v;
    do {
        v = Vec3(g(rng), g(rng), g(rng));
    } while (v.norm() < 1e-9);
    return v.normalized();
}

// Index draw proportional to `weights` (cumulative inverse sampling).
int draw_weighted(std::mt19937_64& rng, const std::vector<double>& cumulative) {
    const double x = uniform(rng, 0.0, 1.0) * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
    int idx = static_cast<int>(it - cumulative.begin());
    return std::min(idx, static_cast<int>(cumulative.size()) - 1);
}

// --- profile families ---------------------------------------------------
// All are star-shaped around the origin (radial functions of angle), which
// guarantees simple polygons, and get scaled to max vertex norm 1.

std::vector<Vec2> profile_ngon(std::mt19937_64& rng) {
    const int n = uniform_int(rng, 3, 8);
    std::vector<Vec2> v(n);
    for (int i = 0; i < n; ++i) {
        const double th = 2.0 * M_PI * (i + uniform(rng, -0.27, 0.27)) / n;
        const double r = uniform(rng, 0.55, 1.0);
        v[i] = r * Vec2(std::cos(th), std::sin(th));
    }
    return v;
}

std::vector<Vec2> profile_star(std::mt19937_64& rng) {
    const int spikes = uniform_int(rng, 4, 7);
    const double r_in = uniform(rng, 0.42, 0.62);
    const double r_out = uniform(rng, 0.9, 1.0);
    std::vector<Vec2> v(2 * spikes);
    for (int i = 0; i < 2 * spikes; ++i) {
        const double th = M_PI * (i + uniform(rng, -0.12, 0.12)) / spikes;
        const double r = (i % 2 == 0) ? r_out : r_in;
        v[i] = r * Vec2(std::cos(th), std::sin(th));
    }
    return v;
}

std::vector<Vec2> profile_rounded_rect(std::mt19937_64& rng) {
    const double a = 1.0;
    const double b = uniform(rng, 0.45, 0.85);
    const double rho = uniform(rng, 0.15, 0.4) * b;
    const int arc = 5; // segments per corner
    // Corner centers in CCW order starting from the +x/+y quadrant.
    const double sx[4] = {+1, -1, -1, +1};
    const double sy[4] = {+1, +1, -1, -1};
    std::vector<Vec2> v;
    for (int k = 0; k < 4; ++k) {
        const Vec2 c(sx[k] * (a - rho), sy[k] * (b - rho));
        for (int i = 0; i <= arc; ++i) {
            const double th = M_PI / 2.0 * (k + static_cast<double>(i) / arc);
            v.push_back(c + rho * Vec2(std::cos(th), std::sin(th)));
        }
    }
    return v;
}

std::vector<Vec2> random_profile(std::mt19937_64& rng) {
    std::vector<Vec2> v;
    switch (uniform_int(rng, 0, 2)) {
        case 0: v = profile_ngon(rng); break;
        case 1: v = profile_star(rng); break;
        default: v = profile_rounded_rect(rng); break;
    }
    double m = 0.0;
    for (const Vec2& p : v) m = std::max(m, p.norm());
    for (Vec2& p : v) p /= m;
    return v;
}

} // namespace

SynthModel extrude_solids(const std::vector<SolidSpec>& solids, const SynthConfig& cfg) {
    const int k_count = static_cast<int>(solids.size());
    if (k_count < 1) throw UsageError("extrude_solids: need at least one solid");
    const int n_total = cfg.points;
    const int min_count = std::max(cfg.min_points,
                                   static_cast<int>(std::ceil(cfg.min_share * n_total)));
    if (k_count * min_count > n_total)
        throw DegenerateError("extrude_solids: point budget too small for the per-segment minimum");

    struct Prep {
        std::vector<Vec2> verts;                  // CCW profile
        std::vector<double> edge_len2d;
        std::vector<Vec2> edge_normal;            // outward unit
        std::vector<std::array<int, 3>> cap_tris;
        std::vector<double> cap_cum;              // cumulative triangle areas
        std::vector<double> face_cum;             // walls..., top cap, bottom cap (world areas)
        double area_total = 0.0;
        Mat3 rot;                                 // axis -> z
        Vec3 axis;
    };

    std::vector<Prep> prep(k_count);
    for (int k = 0; k < k_count; ++k) {
        const SolidSpec& s = solids[k];
        if (s.profile.size() < 3) throw DataError("extrude_solids: profile needs 3+ vertices");
        if (!(s.scale > 0.0) || !(s.half_extent > 0.0))
            throw DataError("extrude_solids: scale and half_extent must be positive");
        Prep& p = prep[k];
        p.verts = s.profile;
        if (signed_area(p.verts) < 0.0) std::reverse(p.verts.begin(), p.verts.end());
        SketchProfile::from_loops({p.verts}).validate(); // simple polygon or bust
        p.axis = s.axis.normalized();
        p.rot = rotation_to_z(p.axis);

        const int nv = static_cast<int>(p.verts.size());
        double wall_area = 0.0;
        for (int i = 0; i < nv; ++i) {
            const Vec2 d = p.verts[(i + 1) % nv] - p.verts[i];
            const double len = d.norm();
            if (len < 1e-12) throw DataError("extrude_solids: degenerate profile edge");
            p.edge_len2d.push_back(len);
            p.edge_normal.push_back(Vec2(d.y(), -d.x()) / len); // outward for CCW
            const double w = s.scale * len * 2.0 * s.half_extent;
            wall_area += w;
            p.face_cum.push_back(wall_area);
        }
        p.cap_tris = triangulate_polygon(p.verts);
        double cap2d = 0.0;
        for (const auto& t : p.cap_tris) {
            const Vec2 e1 = p.verts[t[1]] - p.verts[t[0]];
            const Vec2 e2 = p.verts[t[2]] - p.verts[t[0]];
            cap2d += 0.5 * std::abs(e1.x() * e2.y() - e1.y() * e2.x());
            p.cap_cum.push_back(cap2d);
        }
        const double cap_world = s.scale * s.scale * cap2d;
        p.face_cum.push_back(wall_area + cap_world);       // top cap
        p.face_cum.push_back(wall_area + 2.0 * cap_world); // bottom cap
        p.area_total = p.face_cum.back();
    }

    // Segment budgets: largest-remainder proportional to area, then clamp to
    // the per-segment minimum by stealing from the largest segments.
    double area_sum = 0.0;
    for (const Prep& p : prep) area_sum += p.area_total;
    std::vector<int> counts(k_count, 0);
    {
        std::vector<double> frac(k_count);
        int assigned = 0;
        for (int k = 0; k < k_count; ++k) {
            const double want = n_total * prep[k].area_total / area_sum;
            counts[k] = static_cast<int>(want);
            frac[k] = want - counts[k];
            assigned += counts[k];
        }
        std::vector<int> order(k_count);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return frac[a] != frac[b] ? frac[a] > frac[b] : a < b;
        });
        for (int i = 0; assigned < n_total; ++i, ++assigned) counts[order[i % k_count]]++;
        for (int k = 0; k < k_count; ++k) {
            while (counts[k] < min_count) {
                int big = static_cast<int>(std::max_element(counts.begin(), counts.end()) -
                                           counts.begin());
                if (counts[big] <= min_count)
                    throw DegenerateError("extrude_solids: cannot satisfy per-segment minimum");
                counts[big]--;
                counts[k]++;
            }
        }
    }

    SynthModel model;
    OrientedPointCloud& cloud = model.cloud;
    struct Book { // per-segment sketch-frame bookkeeping for exact GT
        Vec2 q_sum = Vec2::Zero();
        double t_sum = 0.0;
        long barrel_n = 0;
    };
    std::vector<Book> book(k_count);

    for (int k = 0; k < k_count; ++k) {
        const SolidSpec& s = solids[k];
        const Prep& p = prep[k];
        const int nv = static_cast<int>(p.verts.size());
        const int need = counts[k];
        if (need < 2 * nv + 2)
            throw DegenerateError("extrude_solids: segment budget below anchor count");
        std::mt19937_64 rng(derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(k)));
        const Mat3 rot_inv = p.rot.transpose();

        auto emit = [&](const Vec2& q, double t, const Vec2& n2d, int bb_label,
                        double nz) {
            cloud.points.push_back(s.center +
                                   rot_inv * Vec3(s.scale * q.x(), s.scale * q.y(), t));
            cloud.normals.push_back(bb_label == kBarrel
                                        ? Vec3(rot_inv * Vec3(n2d.x(), n2d.y(), 0.0))
                                        : Vec3(rot_inv * Vec3(0.0, 0.0, nz)));
            cloud.normal_valid.push_back(1);
            cloud.seg.push_back(k);
            cloud.bb.push_back(bb_label);
            if (bb_label == kBarrel) {
                book[k].q_sum += q;
                book[k].t_sum += t;
                book[k].barrel_n++;
            }
        };

        // Anchors: every profile vertex sampled at both extent ends, so the
        // sample extrema match the nominal scale and extent exactly.
        for (int v = 0; v < nv; ++v) {
            emit(p.verts[v], -s.half_extent, p.edge_normal[v], kBarrel, 0.0);
            emit(p.verts[v], +s.half_extent, p.edge_normal[v], kBarrel, 0.0);
        }

        for (int i = 2 * nv; i < need; ++i) {
            const int face = draw_weighted(rng, p.face_cum);
            if (face < nv) { // wall
                const double u = uniform(rng, 0.0, 1.0);
                const Vec2 q = p.verts[face] + u * (p.verts[(face + 1) % nv] - p.verts[face]);
                const double t = uniform(rng, -s.half_extent, s.half_extent);
                emit(q, t, p.edge_normal[face], kBarrel, 0.0);
            } else { // cap: top first, bottom second
                const bool top = face == nv;
                const auto& t3 = p.cap_tris[draw_weighted(rng, p.cap_cum)];
                double u = uniform(rng, 0.0, 1.0), v = uniform(rng, 0.0, 1.0);
                if (u + v > 1.0) { u = 1.0 - u; v = 1.0 - v; }
                const Vec2 q = p.verts[t3[0]] + u * (p.verts[t3[1]] - p.verts[t3[0]]) +
                               v * (p.verts[t3[2]] - p.verts[t3[0]]);
                emit(q, top ? s.half_extent : -s.half_extent, Vec2::Zero(), kBase,
                     top ? 1.0 : -1.0);
            }
        }
    }

    // Normalize to the unit sphere.
    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : cloud.points) centroid += p;
    centroid /= static_cast<double>(cloud.points.size());
    double radius = 0.0;
    for (const Vec3& p : cloud.points) radius = std::max(radius, (p - centroid).norm());
    if (!(radius > 0.0)) throw DegenerateError("extrude_solids: degenerate cloud");
    for (Vec3& p : cloud.points) p = (p - centroid) / radius;

    // Exact ground truth from the generator's own bookkeeping.
    model.gt.resize(k_count);
    for (int k = 0; k < k_count; ++k) {
        const SolidSpec& s = solids[k];
        const Prep& p = prep[k];
        const Book& b = book[k];
        const Vec2 q_mean = b.q_sum / static_cast<double>(b.barrel_n);
        const double t_mean = b.t_sum / static_cast<double>(b.barrel_n);
        double m = 0.0;
        for (const Vec2& v : p.verts) m = std::max(m, (v - q_mean).norm());

        ExtrusionCylinder& gt = model.gt[k];
        gt.axis = canonical_direction(p.axis);
        gt.center = (s.center + p.rot.transpose() * Vec3(s.scale * q_mean.x(),
                                                         s.scale * q_mean.y(), t_mean) -
                     centroid) /
                    radius;
        gt.scale = s.scale * m / radius;
        gt.r_max = (s.half_extent + std::abs(t_mean)) / radius;
        gt.r_min = -gt.r_max;
        // The sketch must live in the frame the canonical axis induces; when
        // canonicalization flips the axis, the in-plane image is reflected,
        // so map the profile through the frame change instead of copying it.
        const Mat3 frame_change = rotation_to_z(gt.axis) * p.rot.transpose();
        Eigen::Matrix2d in_plane;
        in_plane.col(0) = frame_change.col(0).head<2>();
        in_plane.col(1) = frame_change.col(1).head<2>();
        std::vector<Vec2> sk(p.verts.size());
        for (std::size_t v = 0; v < p.verts.size(); ++v)
            sk[v] = in_plane * (p.verts[v] - q_mean) / m;
        gt.sketch = SketchProfile::from_loops({std::move(sk)});

        if (gt.r_max < cfg.min_extent)
            throw DegenerateError("extrude_solids: segment extent below discard threshold");
    }

    if (cfg.noise_sigma > 0.0)
        perturb_noise(cloud, cfg.noise_sigma, derive_seed(cfg.seed, 2));
    return model;
}

SynthModel generate_model(const SynthConfig& cfg) {
    if (cfg.segments < 1 || cfg.segments > 8)
        throw UsageError("generate_model: segment count must be in 1..8");
    if (cfg.points < cfg.segments * std::max(cfg.min_points, 2))
        throw UsageError("generate_model: too few points");

    for (int attempt = 0; attempt < 20; ++attempt) {
        const std::uint64_t seed_a = derive_seed(cfg.seed, 500 + static_cast<std::uint64_t>(attempt));
        std::mt19937_64 rng(seed_a);
        try {
            std::vector<SolidSpec> solids(cfg.segments);
            for (SolidSpec& s : solids) {
                s.profile = random_profile(rng);
                s.scale = uniform(rng, 0.45, 1.0);
                s.half_extent = uniform(rng, 0.35, 0.85) * s.scale;
                s.axis = random_unit(rng);
            }
            if (cfg.segments > 1) {
                std::vector<double> rad(cfg.segments);
                for (int k = 0; k < cfg.segments; ++k)
                    rad[k] = std::hypot(solids[k].scale, solids[k].half_extent);
                double box = 1.1 * std::cbrt(static_cast<double>(cfg.segments));
                bool placed_all = false;
                for (int round = 0; round < 6 && !placed_all; ++round, box *= 1.3) {
                    std::vector<Vec3> centers;
                    for (int k = 0; k < cfg.segments; ++k) {
                        bool ok = false;
                        for (int t = 0; t < 400 && !ok; ++t) {
                            Vec3 c(uniform(rng, -box, box), uniform(rng, -box, box),
                                   uniform(rng, -box, box));
                            ok = true;
                            for (std::size_t j = 0; j < centers.size(); ++j)
                                if ((c - centers[j]).norm() < rad[k] + rad[j] + 0.08) {
                                    ok = false;
                                    break;
                                }
                            if (ok) centers.push_back(c);
                        }
                        if (!ok) break;
                    }
                    if (static_cast<int>(centers.size()) == cfg.segments) {
                        for (int k = 0; k < cfg.segments; ++k) solids[k].center = centers[k];
                        placed_all = true;
                    }
                }
                if (!placed_all)
                    throw DegenerateError("generate_model: placement rejection failed");
            }
            SynthConfig sub = cfg;
            sub.seed = seed_a;
            return extrude_solids(solids, sub);
        } catch (const DegenerateError&) {
            continue; // resample with the next attempt seed
        }
    }
    throw DegenerateError("generate_model: failed after bounded retries");
}

void perturb_noise(OrientedPointCloud& cloud, double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw UsageError("perturb_noise: sigma must be >= 0");
    if (sigma == 0.0) return;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const double u = uniform(rng, -sigma, sigma);
        if (cloud.normal_valid.empty() || cloud.normal_valid[i])
            cloud.points[i] += u * cloud.normals[i];
    }
}

void perturb_normals(OrientedPointCloud& cloud, double sigma_n, std::uint64_t seed) {
    if (sigma_n < 0.0) throw UsageError("perturb_normals: sigma must be >= 0");
    if (sigma_n == 0.0) return;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3 gv(g(rng), g(rng), g(rng));
        if (cloud.normal_valid.empty() || cloud.normal_valid[i]) {
            Vec3 n = cloud.normals[i] + sigma_n * gv;
            const double len = n.norm();
            if (len > 1e-12) cloud.normals[i] = n / len;
        }
    }
}

SolidSpec l_profile_solid() {
    // Rectilinear L, centered on its area centroid then max-norm scaled.
    std::vector<Vec2> l = {{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
    const Vec2 centroid(5.0 / 6.0, 5.0 / 6.0);
    double m = 0.0;
    for (Vec2& v : l) {
        v -= centroid;
        m = std::max(m, v.norm());
    }
    for (Vec2& v : l) v /= m;
    SolidSpec s;
    s.profile = std::move(l);
    s.axis = Vec3(0.3, -0.5, 0.81).normalized();
    s.scale = 1.0;
    s.half_extent = 0.6;
    return s;
}

SynthModel l_profile_model(std::uint64_t seed, int points) {
    SynthConfig cfg;
    cfg.segments = 1;
    cfg.points = points;
    cfg.seed = seed;
    return extrude_solids({l_profile_solid()}, cfg);
}

SynthModel coaxial_pair_model(std::uint64_t seed, int points) {
    const Vec3 axis = Vec3(0.25, 0.4, 0.88).normalized();
    SolidSpec a, b;
    a.profile = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}}; // diamond
    a.axis = axis;
    a.center = -1.2 * axis;
    a.scale = 0.7;
    a.half_extent = 0.75;
    b.profile.clear();
    for (int i = 0; i < 6; ++i) { // hexagon
        const double th = 2.0 * M_PI * i / 6.0;
        b.profile.push_back(Vec2(std::cos(th), std::sin(th)));
    }
    b.axis = axis;
    b.center = 1.2 * axis;
    b.scale = 0.55;
    b.half_extent = 0.65;
    SynthConfig cfg;
    cfg.segments = 2;
    cfg.points = points;
    cfg.seed = seed;
    return extrude_solids({a, b}, cfg);
}

} // namespace cylfit
