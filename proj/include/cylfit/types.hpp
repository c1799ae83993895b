#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace cylfit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Barrel/base codes used throughout.  Barrel points sit on the side walls of an
// extrusion (normal perpendicular to the axis), base points on the flat caps
// (normal parallel to the axis).
constexpr int kBarrel = 0;
constexpr int kBase = 1;
constexpr int kUnlabeled = -1;

// Point cloud with per-point unit normals and optional labels.
//
// seg[i]  : segment index in [0, K), or -1 when unlabeled.
// bb[i]   : kBarrel / kBase, or -1 when unknown.
// normal_valid[i] == 0 flags normals that could not be estimated (degenerate
// neighborhoods); such normals are stored as zero vectors and skipped by
// consumers.  Both label vectors may be empty for unlabeled clouds.
struct OrientedPointCloud {
    std::vector<Vec3> points;
    std::vector<Vec3> normals;
    std::vector<std::uint8_t> normal_valid;
    std::vector<int> seg;
    std::vector<int> bb;

    std::size_t size() const { return points.size(); }

    // True when the cloud carries usable labels: the parsers keep seg/bb
    // arrays even for files labeled -1 throughout, which is still unlabeled.
    bool has_labels() const {
        if (seg.empty() || bb.empty()) return false;
        for (std::size_t i = 0; i < seg.size(); ++i)
            if (seg[i] != kUnlabeled && bb[i] != kUnlabeled) return true;
        return false;
    }

    void resize(std::size_t n) {
        points.resize(n, Vec3::Zero());
        normals.resize(n, Vec3::Zero());
        normal_valid.resize(n, 1);
        seg.resize(n, kUnlabeled);
        bb.resize(n, kUnlabeled);
    }
};

// Hard per-point labels, detached from the cloud for APIs that transform them.
struct HardLabels {
    std::vector<int> seg;
    std::vector<int> bb;
};

inline HardLabels labels_of(const OrientedPointCloud& cloud) {
    return HardLabels{cloud.seg, cloud.bb};
}

// Number of segments implied by a label vector (max index + 1, ignoring -1).
int segment_count(const std::vector<int>& seg);

} // namespace cylfit
