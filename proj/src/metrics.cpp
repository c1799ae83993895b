#include "cylfit/metrics.hpp"

#include "cylfit/error.hpp"
#include "cylfit/geom_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cylfit {

namespace {

constexpr double kRad2Deg = 180.0 / M_PI;

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// Each point goes entirely to its strongest column (ties break low, matching
// argmax_rows).  Scoring evaluates predictions one-hot, and the assignment
// must optimize the objective that is scored, so matching uses this too.
Eigen::MatrixXd one_hot_columns(const Eigen::MatrixXd& w) {
    const std::vector<int> best = argmax_rows(w);
    Eigen::MatrixXd one_hot = Eigen::MatrixXd::Zero(w.rows(), w.cols());
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        one_hot(i, best[static_cast<std::size_t>(i)]) = 1.0;
    return one_hot;
}

} // namespace

double riou(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    if (u.size() != v.size())
        throw DataError("riou: vector lengths differ");
    if (u.size() > 0 && (u.minCoeff() < -1e-12 || v.minCoeff() < -1e-12))
        throw DataError("riou: negative weight");
    const double su = u.sum();
    const double sv = v.sum();
    if (su <= 0.0 && sv <= 0.0) return 1.0; // empty vs empty: vacuous agreement
    const double dot = u.dot(v);
    return dot / (su + sv - dot);
}

SegmentMatching match_segments(const Eigen::MatrixXd& w_pred, const Eigen::MatrixXd& w_gt) {
    if (w_pred.rows() != w_gt.rows())
        throw DataError("match_segments: point counts differ");
    const int kp = static_cast<int>(w_pred.cols());
    const int kg = static_cast<int>(w_gt.cols());
    if (kp == 0 || kg == 0)
        throw DataError("match_segments: empty marginal");

    const int n = std::max(kp, kg);
    const Eigen::MatrixXd pred = one_hot_columns(w_pred);
    Eigen::MatrixXd cost = Eigen::MatrixXd::Ones(n, n); // pad pairs cost as zero overlap
    for (int j = 0; j < kp; ++j)
        for (int k = 0; k < kg; ++k)
            cost(j, k) = 1.0 - riou(pred.col(j), w_gt.col(k));

    const std::vector<int> row_to_col = hungarian_match(cost);

    SegmentMatching out;
    out.pred_to_gt.assign(kp, -1);
    out.gt_to_pred.assign(kg, -1);
    for (int j = 0; j < kp; ++j) {
        const int k = row_to_col[j];
        if (k < kg) {
            out.pred_to_gt[j] = k;
            out.gt_to_pred[k] = j;
        }
    }
    out.unmatched_gt = static_cast<int>(
        std::count(out.gt_to_pred.begin(), out.gt_to_pred.end(), -1));
    return out;
}

double seg_iou(const Eigen::MatrixXd& w_pred, const Eigen::MatrixXd& w_gt,
               const SegmentMatching& matching) {
    if (w_pred.rows() != w_gt.rows())
        throw DataError("seg_iou: point counts differ");
    const int kg = static_cast<int>(w_gt.cols());
    if (kg == 0) throw DataError("seg_iou: no ground-truth segments");
    if (static_cast<int>(matching.gt_to_pred.size()) != kg ||
        static_cast<int>(matching.pred_to_gt.size()) != w_pred.cols())
        throw DataError("seg_iou: matching shape mismatch");

    const Eigen::MatrixXd one_hot = one_hot_columns(w_pred);

    double total = 0.0;
    for (int k = 0; k < kg; ++k) {
        const int j = matching.gt_to_pred[k];
        if (j < 0) continue; // unmatched gt segment scores 0
        total += riou(one_hot.col(j), w_gt.col(k));
    }
    return total / kg;
}

double seg_iou(const Eigen::MatrixXd& w_pred, const Eigen::MatrixXd& w_gt) {
    return seg_iou(w_pred, w_gt, match_segments(w_pred, w_gt));
}

double normal_angle_err_deg(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt) {
    if (pred.size() != gt.size())
        throw DataError("normal_angle_err_deg: point counts differ");
    if (pred.empty())
        throw DataError("normal_angle_err_deg: empty input");
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double na = pred[i].norm();
        const double nb = gt[i].norm();
        if (na < 1e-12 || nb < 1e-12) {
            total += 90.0; // missing normal: maximal unoriented error
            continue;
        }
        const double c = clamp01(std::abs(pred[i].dot(gt[i])) / (na * nb));
        total += std::acos(c) * kRad2Deg;
    }
    return total / static_cast<double>(pred.size());
}

double bb_accuracy(const std::vector<int>& bb_pred, const std::vector<int>& bb_gt) {
    if (bb_pred.size() != bb_gt.size())
        throw DataError("bb_accuracy: point counts differ");
    if (bb_pred.empty())
        throw DataError("bb_accuracy: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < bb_pred.size(); ++i)
        if (bb_pred[i] == bb_gt[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(bb_pred.size());
}

double axis_angle_deg(const Vec3& a, const Vec3& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na < 1e-12 || nb < 1e-12)
        throw DataError("axis_angle_deg: zero-length axis");
    const double c = clamp01(std::abs(a.dot(b)) / (na * nb));
    return std::acos(c) * kRad2Deg;
}

double center_distance(const Vec3& c_pred, const Vec3& c_gt) {
    return (c_pred - c_gt).norm();
}

double sketch_fit_distance(const ExtrusionCylinder& cyl, const Vec3& point) {
    if (cyl.sketch.loops.empty())
        throw DataError("sketch_fit_distance: cylinder has no sketch");
    if (!(cyl.scale > 0.0))
        throw DegenerateError("sketch_fit_distance: non-positive scale");
    const Vec2 xy = project_to_sketch_plane(point, cyl.axis, cyl.center) / cyl.scale;
    return unsigned_distance(cyl.sketch, xy);
}

double fit_cyl(const std::vector<ExtrusionCylinder>& pred,
               const OrientedPointCloud& gt_cloud,
               const SegmentMatching& matching) {
    if (!gt_cloud.has_labels())
        throw DataError("fit_cyl: ground truth is unlabeled");
    const int kg = static_cast<int>(matching.gt_to_pred.size());

    double total = 0.0;
    int matched = 0;
    for (int k = 0; k < kg; ++k) {
        const int j = matching.gt_to_pred[k];
        if (j < 0) continue;
        if (j >= static_cast<int>(pred.size()))
            throw DataError("fit_cyl: matching references a missing cylinder");
        double seg_total = 0.0;
        std::size_t seg_points = 0;
        for (std::size_t i = 0; i < gt_cloud.size(); ++i) {
            if (gt_cloud.seg[i] != k || gt_cloud.bb[i] != kBarrel) continue;
            seg_total += sketch_fit_distance(pred[static_cast<std::size_t>(j)],
                                             gt_cloud.points[i]);
            ++seg_points;
        }
        if (seg_points == 0)
            throw DataError("fit_cyl: matched segment has no barrel points");
        total += seg_total / static_cast<double>(seg_points);
        ++matched;
    }
    if (matched == 0)
        throw DegenerateError("fit_cyl: no matched segments");
    return total / static_cast<double>(matched);
}

double fit_glob(const std::vector<ExtrusionCylinder>& pred,
                const OrientedPointCloud& gt_cloud) {
    if (pred.empty())
        throw DataError("fit_glob: no predicted cylinders");
    if (!gt_cloud.has_labels())
        throw DataError("fit_glob: ground truth is unlabeled");

    double total = 0.0;
    std::size_t barrel_points = 0;
    for (std::size_t i = 0; i < gt_cloud.size(); ++i) {
        if (gt_cloud.bb[i] != kBarrel) continue;
        double best = std::numeric_limits<double>::infinity();
        for (const ExtrusionCylinder& cyl : pred)
            best = std::min(best, sketch_fit_distance(cyl, gt_cloud.points[i]));
        total += best;
        ++barrel_points;
    }
    if (barrel_points == 0)
        throw DataError("fit_glob: no barrel points");
    return total / static_cast<double>(barrel_points);
}

double bce_bb(const Eigen::MatrixXd& b_pred, const std::vector<int>& bb_gt) {
    if (b_pred.cols() != 2)
        throw DataError("bce_bb: expected two probability columns");
    if (static_cast<std::size_t>(b_pred.rows()) != bb_gt.size())
        throw DataError("bce_bb: point counts differ");
    double total = 0.0;
    for (Eigen::Index i = 0; i < b_pred.rows(); ++i) {
        const int y = bb_gt[static_cast<std::size_t>(i)];
        if (y != kBarrel && y != kBase)
            throw DataError("bce_bb: label outside {barrel, base}");
        const double p_base =
            std::min(1.0 - 1e-12, std::max(1e-12, b_pred(i, 1)));
        total -= (y == kBase) ? std::log(p_base) : std::log(1.0 - p_base);
    }
    return total;
}

EvalReport evaluate_model(const OrientedPointCloud& pred_cloud,
                          const std::vector<ExtrusionCylinder>& pred_cyls,
                          const OrientedPointCloud& gt_cloud,
                          const std::vector<ExtrusionCylinder>& gt_cyls) {
    if (pred_cloud.size() != gt_cloud.size())
        throw DataError("evaluate_model: point counts differ");
    if (!pred_cloud.has_labels() || !gt_cloud.has_labels())
        throw DataError("evaluate_model: both clouds must carry labels");
    if (pred_cyls.empty() || gt_cyls.empty())
        throw DataError("evaluate_model: empty cylinder list");

    const int kp = static_cast<int>(pred_cyls.size());
    const int kg = static_cast<int>(gt_cyls.size());
    if (segment_count(pred_cloud.seg) > kp || segment_count(gt_cloud.seg) > kg)
        throw DataError("evaluate_model: labels reference missing cylinders");

    const Eigen::MatrixXd w_pred =
        segment_marginal(one_hot_membership(labels_of(pred_cloud), kp));
    const Eigen::MatrixXd w_gt =
        segment_marginal(one_hot_membership(labels_of(gt_cloud), kg));

    const SegmentMatching matching = match_segments(w_pred, w_gt);

    EvalReport rep;
    rep.seg_iou = seg_iou(w_pred, w_gt, matching);
    rep.unmatched_gt = matching.unmatched_gt;

    // A declared-invalid normal counts as missing (maximal angular error).
    std::vector<Vec3> pred_normals = pred_cloud.normals;
    if (!pred_cloud.normal_valid.empty())
        for (std::size_t i = 0; i < pred_normals.size(); ++i)
            if (!pred_cloud.normal_valid[i]) pred_normals[i].setZero();
    rep.normal_err_deg = normal_angle_err_deg(pred_normals, gt_cloud.normals);

    rep.bb_acc = bb_accuracy(pred_cloud.bb, gt_cloud.bb);

    double ea_total = 0.0;
    double ec_total = 0.0;
    int matched = 0;
    for (int k = 0; k < kg; ++k) {
        const int j = matching.gt_to_pred[k];
        if (j < 0) continue;
        ea_total += axis_angle_deg(pred_cyls[static_cast<std::size_t>(j)].axis,
                                   gt_cyls[static_cast<std::size_t>(k)].axis);
        ec_total += center_distance(pred_cyls[static_cast<std::size_t>(j)].center,
                                    gt_cyls[static_cast<std::size_t>(k)].center);
        ++matched;
    }
    if (matched == 0)
        throw DegenerateError("evaluate_model: no matched segments");
    rep.ea_err_deg = ea_total / matched;
    rep.ec_err = ec_total / matched;

    rep.fit_cyl = fit_cyl(pred_cyls, gt_cloud, matching);
    rep.fit_glob = fit_glob(pred_cyls, gt_cloud);
    return rep;
}

EvalReport aggregate_reports(const std::vector<EvalReport>& reports) {
    if (reports.empty())
        throw DataError("aggregate_reports: no reports");
    EvalReport agg;
    for (const EvalReport& r : reports) {
        agg.seg_iou += r.seg_iou;
        agg.normal_err_deg += r.normal_err_deg;
        agg.bb_acc += r.bb_acc;
        agg.ea_err_deg += r.ea_err_deg;
        agg.ec_err += r.ec_err;
        agg.fit_cyl += r.fit_cyl;
        agg.fit_glob += r.fit_glob;
        agg.unmatched_gt += r.unmatched_gt;
    }
    const double n = static_cast<double>(reports.size());
    agg.seg_iou /= n;
    agg.normal_err_deg /= n;
    agg.bb_acc /= n;
    agg.ea_err_deg /= n;
    agg.ec_err /= n;
    agg.fit_cyl /= n;
    agg.fit_glob /= n;
    return agg;
}

} // namespace cylfit
