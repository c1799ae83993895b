#include "cylfit/fitting.hpp"

#include "cylfit/error.hpp"
#include "cylfit/geom_core.hpp"

#include <cmath>
#include <limits>

namespace cylfit {

Mat3 weighted_axis_scatter(const std::vector<Vec3>& normals, const SoftWeights& w) {
    if (w.barrel.size() != static_cast<Eigen::Index>(normals.size()) ||
        w.base.size() != static_cast<Eigen::Index>(normals.size()))
        throw DataError("weighted_axis_scatter: weight/normal size mismatch");
    Mat3 h = Mat3::Zero();
    for (std::size_t i = 0; i < normals.size(); ++i) {
        const double wb = w.barrel[static_cast<Eigen::Index>(i)];
        const double wa = w.base[static_cast<Eigen::Index>(i)];
        const double coef = wb * wb - wa * wa;
        if (coef == 0.0) continue;
        h.noalias() += coef * normals[i] * normals[i].transpose();
    }
    return h;
}

AxisFit recover_axis(const std::vector<Vec3>& normals, const SoftWeights& w,
                     double gap_rel_tol) {
    const Mat3 h = weighted_axis_scatter(normals, w);
    const SymEigen3 eig = smallest_eigenvector_sym3(h);
    // Relative ambiguity scale: sum of |eigenvalues|.  Equals the trace for
    // PSD matrices and stays positive for the indefinite barrel-minus-base
    // scatter, so the tolerance survives weight rescaling either way.
    const double mag = std::abs(eig.values[0]) + std::abs(eig.values[1]) + std::abs(eig.values[2]);
    if (!(mag > 0.0))
        throw AmbiguousAxisError("recover_axis: no normal carries weight");
    if (eig.gap < gap_rel_tol * mag)
        throw AmbiguousAxisError("recover_axis: eigenvalue gap " + std::to_string(eig.gap) +
                                 " below tolerance; axis is not unique");
    AxisFit fit;
    fit.axis = eig.vector;
    fit.gap = eig.gap;
    fit.values = eig.values;
    return fit;
}

Vec3 recover_center(const std::vector<Vec3>& points, const Eigen::VectorXd& barrel_weight) {
    if (barrel_weight.size() != static_cast<Eigen::Index>(points.size()))
        throw DataError("recover_center: weight/point size mismatch");
    Vec3 sum = Vec3::Zero();
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double wi = barrel_weight[static_cast<Eigen::Index>(i)];
        sum += wi * points[i];
        total += wi;
    }
    if (!(total > 1e-12))
        throw DegenerateError("recover_center: total barrel weight is zero");
    return sum / total;
}

double recover_scale(const std::vector<Vec3>& barrel_points, const Vec3& axis,
                     const Vec3& center) {
    if (barrel_points.empty())
        throw DegenerateError("recover_scale: no barrel points");
    const Mat3 r = rotation_to_z(axis);
    double s = 0.0;
    for (const Vec3& p : barrel_points)
        s = std::max(s, (r * (p - center)).head<2>().norm());
    if (!(s > 1e-12))
        throw DegenerateError("recover_scale: barrel points collapse onto the axis");
    return s;
}

Extent recover_extent(const std::vector<Vec3>& barrel_points, const Vec3& axis,
                      const Vec3& center) {
    if (barrel_points.empty())
        throw DegenerateError("recover_extent: no barrel points");
    const Vec3 e = axis.normalized();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const Vec3& p : barrel_points) {
        const double t = e.dot(p - center);
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }
    Extent ext;
    ext.r_max = std::max(std::abs(lo), std::abs(hi));
    ext.r_min = -ext.r_max;
    ext.zero = !(ext.r_max > 1e-12);
    return ext;
}

FitResult fit_segment(const OrientedPointCloud& cloud, const MembershipMatrix& membership,
                      int segment) {
    if (segment < 0 || segment >= membership.segments)
        throw DataError("fit_segment: segment index out of range");
    if (membership.m.rows() != static_cast<Eigen::Index>(cloud.size()))
        throw DataError("fit_segment: membership/cloud size mismatch");

    const Eigen::Index n = membership.m.rows();
    SoftWeights w;
    w.barrel = membership.m.col(2 * segment);
    w.base = membership.m.col(2 * segment + 1);
    // Flagged-invalid normals cannot inform the axis.
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i < static_cast<Eigen::Index>(cloud.normal_valid.size()) && !cloud.normal_valid[i]) {
            w.barrel[i] = 0.0;
            w.base[i] = 0.0;
        }
    }

    const AxisFit axis = recover_axis(cloud.normals, w);
    const Vec3 center = recover_center(cloud.points, membership.m.col(2 * segment));

    // Hard assignment decides which points carry the sketch: a point belongs
    // to this barrel iff its best class is column 2*segment.
    std::vector<int> assign = argmax_rows(membership.m);
    std::vector<int> barrel_idx;
    for (Eigen::Index i = 0; i < n; ++i)
        if (assign[static_cast<std::size_t>(i)] == 2 * segment)
            barrel_idx.push_back(static_cast<int>(i));
    if (barrel_idx.empty())
        throw DegenerateError("fit_segment: segment " + std::to_string(segment) +
                              " has no barrel points");

    std::vector<Vec3> bp, bn;
    bp.reserve(barrel_idx.size());
    bn.reserve(barrel_idx.size());
    for (int i : barrel_idx) {
        bp.push_back(cloud.points[static_cast<std::size_t>(i)]);
        bn.push_back(cloud.normals[static_cast<std::size_t>(i)]);
    }

    const double scale = recover_scale(bp, axis.axis, center);
    const Extent extent = recover_extent(bp, axis.axis, center);
    ProjectedCloud proj = project_cloud(bp, bn, axis.axis, center);

    FitResult out;
    out.cylinder.axis = axis.axis;
    out.cylinder.center = center;
    out.cylinder.scale = scale;
    out.cylinder.r_min = extent.r_min;
    out.cylinder.r_max = extent.r_max;
    out.zero_extent = extent.zero;
    out.barrel_indices = std::move(barrel_idx);
    out.sketch_points.reserve(proj.points.size());
    for (const Vec2& q : proj.points)
        out.sketch_points.push_back(q / scale);
    out.sketch_normals = std::move(proj.normals);
    out.sketch_normal_valid = std::move(proj.normal_valid);
    return out;
}

FitResult fit_segment(const OrientedPointCloud& cloud, int segment) {
    if (!cloud.has_labels())
        throw DataError("fit_segment: cloud carries no labels");
    const int k = segment_count(cloud.seg);
    MembershipMatrix mm = one_hot_membership(labels_of(cloud), k);
    return fit_segment(cloud, mm, segment);
}

FitResult fit_segment_with_axis(const OrientedPointCloud& cloud, const HardLabels& labels,
                                int segment, const Vec3& axis) {
    if (labels.seg.size() != cloud.size() || labels.bb.size() != cloud.size())
        throw DataError("fit_segment_with_axis: label/cloud size mismatch");
    std::vector<int> barrel_idx;
    std::vector<Vec3> bp, bn;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (labels.seg[i] == segment && labels.bb[i] == kBarrel) {
            barrel_idx.push_back(static_cast<int>(i));
            bp.push_back(cloud.points[i]);
            bn.push_back(cloud.normals[i]);
        }
    }
    if (bp.empty())
        throw DegenerateError("fit_segment_with_axis: segment " + std::to_string(segment) +
                              " has no barrel points");
    Vec3 center = Vec3::Zero();
    for (const Vec3& p : bp) center += p;
    center /= static_cast<double>(bp.size());

    const Vec3 e = axis.normalized();
    const double scale = recover_scale(bp, e, center);
    const Extent extent = recover_extent(bp, e, center);
    ProjectedCloud proj = project_cloud(bp, bn, e, center);

    FitResult out;
    out.cylinder.axis = e;
    out.cylinder.center = center;
    out.cylinder.scale = scale;
    out.cylinder.r_min = extent.r_min;
    out.cylinder.r_max = extent.r_max;
    out.zero_extent = extent.zero;
    out.barrel_indices = std::move(barrel_idx);
    out.sketch_points.reserve(proj.points.size());
    for (const Vec2& q : proj.points)
        out.sketch_points.push_back(q / scale);
    out.sketch_normals = std::move(proj.normals);
    out.sketch_normal_valid = std::move(proj.normal_valid);
    return out;
}

} // namespace cylfit
