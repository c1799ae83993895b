#include "cylfit/postproc.hpp"

#include "cylfit/error.hpp"
#include "cylfit/geom_core.hpp"
#include "cylfit/kdtree.hpp"
#include "cylfit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <random>

namespace cylfit {

namespace {

// Shared DBSCAN loop over an abstract neighbor query (self included).
std::vector<int> dbscan_core(std::size_t n, int min_pts,
                             const std::function<std::vector<int>(std::size_t)>& neighbors_of) {
    constexpr int kUndefined = -2;
    std::vector<int> label(n, kUndefined);
    int next_cluster = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != kUndefined) continue;
        std::vector<int> nb = neighbors_of(i);
        if (static_cast<int>(nb.size()) < min_pts) {
            label[i] = -1;
            continue;
        }
        const int cluster = next_cluster++;
        label[i] = cluster;
        std::deque<int> queue(nb.begin(), nb.end());
        while (!queue.empty()) {
            const int j = queue.front();
            queue.pop_front();
            if (label[j] == -1) label[j] = cluster; // noise becomes border
            if (label[j] != kUndefined) continue;
            label[j] = cluster;
            std::vector<int> nb2 = neighbors_of(static_cast<std::size_t>(j));
            if (static_cast<int>(nb2.size()) >= min_pts)
                queue.insert(queue.end(), nb2.begin(), nb2.end());
        }
    }
    return label;
}

double resolve_eps(const DbscanParams& params, std::size_t n) {
    if (params.eps > 0.0) return params.eps;
    return auto_dbscan_eps(n);
}

// Largest cluster id; ties break toward the earlier cluster.  -1 when the
// labeling contains no cluster at all.
int largest_cluster(const std::vector<int>& labels) {
    std::map<int, std::size_t> sizes;
    for (int l : labels)
        if (l >= 0) ++sizes[l];
    int best = -1;
    std::size_t best_size = 0;
    for (const auto& [id, count] : sizes) {
        if (count > best_size) {
            best = id;
            best_size = count;
        }
    }
    return best;
}

} // namespace

double auto_dbscan_eps(std::size_t n) {
    if (n == 0) throw DataError("auto_dbscan_eps: empty input");
    return 4.0 * (2.0 / std::sqrt(static_cast<double>(n)));
}

std::vector<int> dbscan(const std::vector<Vec3>& points, const DbscanParams& params) {
    if (params.min_pts < 1) throw DataError("dbscan: min_pts must be positive");
    if (points.empty()) return {};
    const double eps = resolve_eps(params, points.size());
    KdTree3 tree(points);
    return dbscan_core(points.size(), params.min_pts,
                       [&](std::size_t i) { return tree.radius(points[i], eps); });
}

std::vector<int> dbscan_1d(const std::vector<double>& values, const DbscanParams& params) {
    if (params.min_pts < 1) throw DataError("dbscan_1d: min_pts must be positive");
    if (values.empty()) return {};
    const double eps = resolve_eps(params, values.size());

    std::vector<int> order(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (values[static_cast<std::size_t>(a)] != values[static_cast<std::size_t>(b)])
            return values[static_cast<std::size_t>(a)] < values[static_cast<std::size_t>(b)];
        return a < b;
    });
    std::vector<double> sorted(values.size());
    for (std::size_t r = 0; r < order.size(); ++r)
        sorted[r] = values[static_cast<std::size_t>(order[r])];

    auto neighbors_of = [&](std::size_t i) {
        const double v = values[i];
        const auto lo = std::lower_bound(sorted.begin(), sorted.end(), v - eps);
        const auto hi = std::upper_bound(sorted.begin(), sorted.end(), v + eps);
        std::vector<int> out;
        out.reserve(static_cast<std::size_t>(hi - lo));
        for (auto it = lo; it != hi; ++it)
            out.push_back(order[static_cast<std::size_t>(it - sorted.begin())]);
        std::sort(out.begin(), out.end());
        return out;
    };
    return dbscan_core(values.size(), params.min_pts, neighbors_of);
}

HardLabels refine_segmentation(const OrientedPointCloud& cloud, const HardLabels& labels,
                               const RefineParams& params) {
    const std::size_t n = cloud.size();
    if (labels.seg.size() != n || labels.bb.size() != n)
        throw DataError("refine_segmentation: label/cloud size mismatch");
    if (params.knn < 1 || params.max_passes < 0)
        throw DataError("refine_segmentation: bad parameters");

    HardLabels out = labels;
    const int segments = segment_count(labels.seg);

    // (i) Per segment, keep only the dominant spatial blob.
    DbscanParams db = params.dbscan;
    if (db.eps <= 0.0) db.eps = auto_dbscan_eps(n);
    for (int s = 0; s < segments; ++s) {
        std::vector<int> member;
        std::vector<Vec3> pts;
        for (std::size_t i = 0; i < n; ++i) {
            if (labels.seg[i] != s) continue;
            member.push_back(static_cast<int>(i));
            pts.push_back(cloud.points[i]);
        }
        if (pts.empty()) continue;
        const std::vector<int> cl = dbscan(pts, db);
        const int keep = largest_cluster(cl);
        for (std::size_t j = 0; j < member.size(); ++j)
            if (cl[j] != keep) out.seg[static_cast<std::size_t>(member[j])] = kUnlabeled;
    }

    std::vector<int> labeled;
    std::vector<Vec3> labeled_pts;
    for (std::size_t i = 0; i < n; ++i) {
        if (out.seg[i] < 0) continue;
        labeled.push_back(static_cast<int>(i));
        labeled_pts.push_back(cloud.points[i]);
    }
    if (labeled.empty()) return labels; // nothing survived; leave input alone

    // (ii) Majority vote of the nearest labeled neighbors for dropped points.
    {
        KdTree3 tree(labeled_pts);
        std::vector<std::pair<std::size_t, int>> assign;
        for (std::size_t i = 0; i < n; ++i) {
            if (out.seg[i] >= 0) continue;
            const std::vector<int> nb = tree.knn(cloud.points[i], params.knn);
            std::map<int, int> votes;
            for (int j : nb) ++votes[out.seg[static_cast<std::size_t>(labeled[static_cast<std::size_t>(j)])]];
            int best = -1, best_votes = 0;
            for (const auto& [lab, v] : votes)
                if (v > best_votes) { best = lab; best_votes = v; }
            assign.emplace_back(i, best);
        }
        for (const auto& [i, lab] : assign) out.seg[i] = lab;
    }

    // (iii) Flip labels a strong neighborhood consensus contradicts.
    KdTree3 tree(cloud.points);
    for (int pass = 0; pass < params.max_passes; ++pass) {
        std::vector<std::pair<std::size_t, int>> flips;
        for (std::size_t i = 0; i < n; ++i) {
            const std::vector<int> nb = tree.knn(cloud.points[i], params.knn + 1);
            std::map<int, int> votes;
            int considered = 0;
            for (int j : nb) {
                if (static_cast<std::size_t>(j) == i) continue;
                if (considered == params.knn) break;
                ++votes[out.seg[static_cast<std::size_t>(j)]];
                ++considered;
            }
            if (considered == 0) continue;
            int best = out.seg[i], best_votes = 0;
            for (const auto& [lab, v] : votes)
                if (v > best_votes) { best = lab; best_votes = v; }
            if (best != out.seg[i] &&
                best_votes >= static_cast<int>(std::ceil(params.consensus * considered)))
                flips.emplace_back(i, best);
        }
        if (flips.empty()) break;
        for (const auto& [i, lab] : flips) out.seg[i] = lab;
    }
    return out;
}

RansacScale ransac_scale(const std::vector<Vec3>& barrel_points, const Vec3& axis,
                         const Vec3& center, const RansacParams& params) {
    const std::size_t n = barrel_points.size();
    if (n == 0) throw DataError("ransac_scale: empty barrel set");
    if (n < 2) throw DataError("ransac_scale: need at least two barrel points");
    if (params.sample_frac <= 0.0 || params.sample_frac > 1.0 ||
        params.accept_frac <= 0.0 || params.accept_frac > 1.0 ||
        params.inlier_tol < 0.0 || params.max_iters < 1)
        throw DataError("ransac_scale: bad parameters");

    const Mat3 r = rotation_to_z(axis);
    std::vector<double> radii(n);
    for (std::size_t i = 0; i < n; ++i)
        radii[i] = (r * (barrel_points[i] - center)).head<2>().norm();
    std::vector<double> sorted = radii;
    std::sort(sorted.begin(), sorted.end());

    const double grow = 1.0 + params.inlier_tol;
    // Inlier count and refit are monotone lookups in the sorted radii.
    auto coverage_at = [&](double s) {
        const auto hi = std::upper_bound(sorted.begin(), sorted.end(), s * grow);
        return static_cast<double>(hi - sorted.begin()) / static_cast<double>(n);
    };
    auto refit = [&](double s) {
        // Fixed point of max-over-inliers: keep absorbing radii the current
        // estimate already tolerates.  Strictly increases through the sorted
        // radii, so at most n steps.
        for (std::size_t guard = 0; guard <= n; ++guard) {
            const auto hi = std::upper_bound(sorted.begin(), sorted.end(), s * grow);
            if (hi == sorted.begin() || *(hi - 1) <= s) break;
            s = *(hi - 1);
        }
        return s;
    };

    const std::size_t sample_size = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::ceil(params.sample_frac * static_cast<double>(n))));

    std::vector<int> index(n);
    for (std::size_t i = 0; i < n; ++i) index[i] = static_cast<int>(i);
    std::mt19937_64 rng(derive_seed(params.seed, 0x5ca1e));

    double best_accepted = std::numeric_limits<double>::infinity();
    double best_accepted_cov = 0.0;
    double fallback = 0.0;
    double fallback_cov = -1.0;

    for (int iter = 0; iter < params.max_iters; ++iter) {
        std::vector<int> sample;
        sample.reserve(sample_size);
        std::sample(index.begin(), index.end(), std::back_inserter(sample), sample_size, rng);
        double cand = 0.0;
        for (int i : sample) cand = std::max(cand, radii[static_cast<std::size_t>(i)]);
        const double refined = refit(cand);
        const double cov = coverage_at(refined);
        if (cov >= params.accept_frac && refined < best_accepted) {
            best_accepted = refined;
            best_accepted_cov = cov;
        }
        if (cov > fallback_cov || (cov == fallback_cov && refined < fallback)) {
            fallback = refined;
            fallback_cov = cov;
        }
    }

    RansacScale out;
    if (std::isfinite(best_accepted)) {
        out.scale = best_accepted;
        out.coverage = best_accepted_cov;
        out.accepted = true;
    } else {
        out.scale = fallback;
        out.coverage = std::max(0.0, fallback_cov);
        out.accepted = false;
    }
    return out;
}

Extent robust_extent(const std::vector<Vec3>& barrel_points, const Vec3& axis,
                     const Vec3& center, const DbscanParams& params) {
    if (barrel_points.empty())
        throw DegenerateError("robust_extent: no barrel points");
    const Vec3 e = axis.normalized();
    std::vector<double> t(barrel_points.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = e.dot(barrel_points[i] - center);

    const std::vector<int> cl = dbscan_1d(t, params);
    const int keep = largest_cluster(cl);

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (keep >= 0 && cl[i] != keep) continue; // all-noise input keeps everything
        lo = std::min(lo, t[i]);
        hi = std::max(hi, t[i]);
    }
    Extent ext;
    ext.r_max = std::max(std::abs(lo), std::abs(hi));
    ext.r_min = -ext.r_max;
    ext.zero = !(ext.r_max > 1e-12);
    return ext;
}

} // namespace cylfit
