#pragma once

// Slow, independent reference implementations used to cross-check the
// library: brute-force grid searches and exhaustive enumerations instead of
// closed forms.  Everything here is deliberately written from the problem
// statement, not by calling into the library.

#include "cylfit/types.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using cylfit::Mat3;
using cylfit::Vec2;
using cylfit::Vec3;

inline double angle_deg(const Vec3& a, const Vec3& b) {
    const double c = std::min(1.0, std::abs(a.normalized().dot(b.normalized())));
    return std::acos(c) * 180.0 / M_PI;
}

// Literal weighted scatter: sum of (wb^2 - wa^2) n n^T, no library calls.
inline Mat3 scatter_matrix(const std::vector<Vec3>& normals,
                           const std::vector<double>& w_barrel,
                           const std::vector<double>& w_base) {
    Mat3 h = Mat3::Zero();
    for (std::size_t i = 0; i < normals.size(); ++i) {
        const double w = w_barrel[i] * w_barrel[i] - w_base[i] * w_base[i];
        h += w * normals[i] * normals[i].transpose();
    }
    return h;
}

// Brute-force sphere-grid minimizer of e^T H e over the upper hemisphere
// (the objective is sign-symmetric).  step_deg controls the grid pitch.
inline Vec3 grid_min_axis(const Mat3& h, double step_deg) {
    double best = std::numeric_limits<double>::infinity();
    Vec3 best_dir = Vec3::UnitZ();
    const double step = step_deg * M_PI / 180.0;
    for (double theta = 0.0; theta <= M_PI / 2 + 1e-12; theta += step) {
        const double st = std::sin(theta);
        const double ct = std::cos(theta);
        // Poles need a single sample; elsewhere sweep the full circle.
        const double phi_end = (st < 1e-12) ? step / 2 : 2.0 * M_PI;
        for (double phi = 0.0; phi < phi_end; phi += step) {
            const Vec3 e(st * std::cos(phi), st * std::sin(phi), ct);
            const double val = e.dot(h * e);
            if (val < best) {
                best = val;
                best_dir = e;
            }
        }
    }
    return best_dir;
}

// Point-segment distance written out long-hand.
inline double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::max(0.0, std::min(1.0, t));
    return (p - (a + t * ab)).norm();
}

// Winding of one closed loop around p via summed signed angles.
inline int winding_number(const std::vector<Vec2>& loop, const Vec2& p) {
    double total = 0.0;
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = loop[i] - p;
        const Vec2 b = loop[(i + 1) % n] - p;
        total += std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
    }
    return static_cast<int>(std::lround(total / (2.0 * M_PI)));
}

// Signed distance to a multi-loop polygon: min edge distance, sign by the
// even-odd rule evaluated through angle-sum winding numbers (a different
// route than crossing parity).
inline double polygon_signed_distance(const std::vector<std::vector<Vec2>>& loops,
                                      const Vec2& p) {
    double dist = std::numeric_limits<double>::infinity();
    int crossings = 0;
    for (const auto& loop : loops) {
        const std::size_t n = loop.size();
        for (std::size_t i = 0; i < n; ++i)
            dist = std::min(dist, segment_distance(p, loop[i], loop[(i + 1) % n]));
        crossings += std::abs(winding_number(loop, p));
    }
    return (crossings % 2 == 1) ? -dist : dist;
}

// Relaxed IoU, written inline for independence.
inline double riou_ref(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    const double dot = u.dot(v);
    const double denom = u.sum() + v.sum() - dot;
    if (denom <= 0.0) return 1.0;
    return dot / denom;
}

// Best mean RIoU over every permutation of predicted columns (pred already
// one-hot), K! enumeration.
inline double best_permutation_mean_riou(const Eigen::MatrixXd& pred_one_hot,
                                         const Eigen::MatrixXd& w_gt) {
    const int k = static_cast<int>(w_gt.cols());
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    double best = -1.0;
    do {
        double total = 0.0;
        for (int j = 0; j < k; ++j)
            total += riou_ref(pred_one_hot.col(perm[static_cast<std::size_t>(j)]), w_gt.col(j));
        best = std::max(best, total / k);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Exhaustive assignment: minimal total cost and the lexicographically
// smallest permutation achieving it.
struct Assignment {
    double cost = 0.0;
    std::vector<int> perm;
};

inline Assignment brute_force_assignment(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Assignment best;
    best.cost = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += cost(i, perm[static_cast<std::size_t>(i)]);
        // Strictly-better wins; equal cost keeps the earlier (lexicographically
        // smaller) permutation because next_permutation enumerates in order.
        if (total < best.cost - 1e-12) {
            best.cost = total;
            best.perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec3 v;
    do {
        v = Vec3(g(rng), g(rng), g(rng));
    } while (v.norm() < 1e-6);
    return v.normalized();
}

// Random rotation from a random unit quaternion.
inline Mat3 random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
    q.normalize();
    return q.toRotationMatrix();
}

} // namespace oracle
