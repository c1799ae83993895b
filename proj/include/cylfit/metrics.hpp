#pragma once

#include "cylfit/fitting.hpp"
#include "cylfit/labels.hpp"
#include "cylfit/types.hpp"

#include <Eigen/Core>

#include <vector>

namespace cylfit {

// Relaxed intersection-over-union between two nonnegative weight vectors:
// u.v / (|u|_1 + |v|_1 - u.v).  Both all-zero counts as perfect agreement
// (empty matched against empty should not penalize).
double riou(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

// Segment correspondence between predicted and ground-truth marginals.
struct SegmentMatching {
    std::vector<int> pred_to_gt; // per predicted column; -1 = no partner
    std::vector<int> gt_to_pred; // per ground-truth column; -1 = no partner
    int unmatched_gt = 0;        // gt segments without a predicted partner
};

// Hungarian assignment on cost 1 - riou between the one-hot-converted
// predicted columns and the (soft) ground-truth columns, padded square with
// cost 1 when the segment counts differ.  One-hotting the prediction here
// keeps the matching aligned with how seg_iou scores it.
SegmentMatching match_segments(const Eigen::MatrixXd& w_pred, const Eigen::MatrixXd& w_gt);

// Mean over ground-truth segments of riou between the one-hot-converted
// predicted column and the gt column, under `matching`.  Unmatched gt
// segments contribute 0.
double seg_iou(const Eigen::MatrixXd& w_pred, const Eigen::MatrixXd& w_gt,
               const SegmentMatching& matching);

// Convenience overload that computes the matching itself.
double seg_iou(const Eigen::MatrixXd& w_pred, const Eigen::MatrixXd& w_gt);

// Mean unoriented angle between paired normals, in degrees.  A pair with a
// (near-)zero vector on either side counts as 90 degrees.
double normal_angle_err_deg(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt);

// Fraction of matching barrel/base labels.
double bb_accuracy(const std::vector<int>& bb_pred, const std::vector<int>& bb_gt);

// Unoriented angle between two axes, in degrees (0..90).
double axis_angle_deg(const Vec3& a, const Vec3& b);

// Euclidean distance between centers.
double center_distance(const Vec3& c_pred, const Vec3& c_gt);

// Distance from one world-space point to the surface of an unbounded
// extrusion cylinder: project into the normalized sketch plane and take the
// unsigned boundary distance there.
double sketch_fit_distance(const ExtrusionCylinder& cyl, const Vec3& point);

// Mean over matched segments of the mean unsigned sketch distance of that
// gt segment's barrel points under the matched predicted cylinder.  Gt
// segments without a partner are skipped (counted in SegmentMatching).
double fit_cyl(const std::vector<ExtrusionCylinder>& pred,
               const OrientedPointCloud& gt_cloud,
               const SegmentMatching& matching);

// Mean over all gt barrel points of the smallest unsigned sketch distance
// across every predicted cylinder.
double fit_glob(const std::vector<ExtrusionCylinder>& pred,
                const OrientedPointCloud& gt_cloud);

// Binary cross-entropy of the soft base probability against hard gt labels,
// summed over points.  Probabilities are clamped to [1e-12, 1 - 1e-12].
double bce_bb(const Eigen::MatrixXd& b_pred, const std::vector<int>& bb_gt);

// One model's scores; `aggregate` over a run is the plain mean per field.
struct EvalReport {
    double seg_iou = 0.0;
    double normal_err_deg = 0.0;
    double bb_acc = 0.0;
    double ea_err_deg = 0.0;
    double ec_err = 0.0;
    double fit_cyl = 0.0;
    double fit_glob = 0.0;
    int unmatched_gt = 0;
};

// Full per-model evaluation of a hard-labeled prediction against a
// hard-labeled ground truth.  Both clouds must cover the same points in the
// same order; cylinder lists are indexed by segment id.
EvalReport evaluate_model(const OrientedPointCloud& pred_cloud,
                          const std::vector<ExtrusionCylinder>& pred_cyls,
                          const OrientedPointCloud& gt_cloud,
                          const std::vector<ExtrusionCylinder>& gt_cyls);

// Field-wise mean over per-model reports (unmatched counts are summed).
EvalReport aggregate_reports(const std::vector<EvalReport>& reports);

} // namespace cylfit
