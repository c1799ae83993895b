#include "doctest.h"
#include "oracles.hpp"

#include "cylfit/error.hpp"
#include "cylfit/labels.hpp"
#include "cylfit/metrics.hpp"
#include "cylfit/synth.hpp"

#include <cmath>
#include <random>

using namespace cylfit;

namespace {

Eigen::MatrixXd random_marginal(int rows, int cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        double total = 0.0;
        for (int j = 0; j < cols; ++j) {
            m(i, j) = u(rng) + 1e-9;
            total += m(i, j);
        }
        m.row(i) /= total;
    }
    return m;
}

Eigen::MatrixXd one_hot_cols(const std::vector<int>& seg, int k) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(seg.size()), k);
    for (std::size_t i = 0; i < seg.size(); ++i) m(static_cast<Eigen::Index>(i), seg[i]) = 1.0;
    return m;
}

} // namespace

TEST_CASE("relaxed iou basics") {
    Eigen::VectorXd a(4), b(4);
    a << 1, 0, 1, 0;
    b << 1, 0, 1, 0;
    CHECK(riou(a, b) == doctest::Approx(1.0).epsilon(1e-12));
    b << 0, 1, 0, 1;
    CHECK(riou(a, b) == doctest::Approx(0.0).epsilon(1e-12));
    Eigen::VectorXd u(2), v(2);
    u << 0.5, 0.5;
    v << 1.0, 0.0;
    CHECK(riou(u, v) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(riou(u, v) == doctest::Approx(riou(v, u)).epsilon(1e-15));
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
    CHECK(riou(zero, zero) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("riou of identical binary masks is exactly one") {
    std::mt19937_64 rng(101);
    for (int t = 0; t < 50; ++t) {
        Eigen::VectorXd m(20);
        for (int i = 0; i < 20; ++i) m[i] = static_cast<double>(rng() % 2);
        CHECK(riou(m, m) == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("segment matching pairs permuted marginals perfectly") {
    std::mt19937_64 rng(102);
    const int n = 60, k = 4;
    std::vector<int> seg;
    for (int i = 0; i < n; ++i) seg.push_back(static_cast<int>(rng() % k));
    const Eigen::MatrixXd gt = one_hot_cols(seg, k);
    std::vector<int> perm = {2, 0, 3, 1};
    std::vector<int> pseg;
    for (int s : seg) pseg.push_back(perm[static_cast<std::size_t>(s)]);
    const Eigen::MatrixXd pred = one_hot_cols(pseg, k);
    const SegmentMatching match = match_segments(pred, gt);
    CHECK(match.unmatched_gt == 0);
    for (int s = 0; s < k; ++s)
        CHECK(match.gt_to_pred[static_cast<std::size_t>(s)] == perm[static_cast<std::size_t>(s)]);
    CHECK(seg_iou(pred, gt) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("seg_iou matches exhaustive best-permutation search") {
    std::mt19937_64 rng(103);
    for (int t = 0; t < 100; ++t) {
        const int k = 2 + static_cast<int>(rng() % 4); // up to 5
        const int n = 40;
        const Eigen::MatrixXd w_pred = random_marginal(n, k, rng);
        const Eigen::MatrixXd w_gt = random_marginal(n, k, rng);
        // One-hot the prediction exactly as the metric does, then let the
        // oracle try every pairing of the resulting columns.
        Eigen::MatrixXd pred_hot = Eigen::MatrixXd::Zero(n, k);
        for (int i = 0; i < n; ++i) {
            int best = 0;
            w_pred.row(i).maxCoeff(&best);
            pred_hot(i, best) = 1.0;
        }
        const double ref = oracle::best_permutation_mean_riou(pred_hot, w_gt);
        CHECK(seg_iou(w_pred, w_gt) == doctest::Approx(ref).epsilon(1e-9));
    }
}

TEST_CASE("unmatched ground-truth segments score zero inside seg_iou") {
    // Predicted marginal has a single column; gt has three.
    const int n = 30;
    std::vector<int> seg(n, 0);
    for (int i = 10; i < 20; ++i) seg[static_cast<std::size_t>(i)] = 1;
    for (int i = 20; i < 30; ++i) seg[static_cast<std::size_t>(i)] = 2;
    const Eigen::MatrixXd gt = one_hot_cols(seg, 3);
    const Eigen::MatrixXd pred = Eigen::MatrixXd::Ones(n, 1);
    const SegmentMatching match = match_segments(pred, gt);
    CHECK(match.unmatched_gt == 2);
    const double got = seg_iou(pred, gt, match);
    CHECK(got == doctest::Approx(1.0 / 9.0).epsilon(1e-12)); // riou(1_n, first third) / 3
}

TEST_CASE("normal angle error handles flips and zeros") {
    const std::vector<Vec3> gt = {Vec3(1, 0, 0), Vec3(0, 1, 0)};
    CHECK(normal_angle_err_deg(gt, gt) == doctest::Approx(0.0).epsilon(1e-9));
    const std::vector<Vec3> flipped = {Vec3(-1, 0, 0), Vec3(0, -1, 0)};
    CHECK(normal_angle_err_deg(flipped, gt) == doctest::Approx(0.0).epsilon(1e-9));
    const std::vector<Vec3> ortho = {Vec3(0, 0, 1), Vec3(0, 0, 1)};
    CHECK(normal_angle_err_deg(ortho, gt) == doctest::Approx(90.0).epsilon(1e-9));
    const std::vector<Vec3> zero = {Vec3(0, 0, 0), Vec3(0, 1, 0)};
    CHECK(normal_angle_err_deg(zero, gt) == doctest::Approx(45.0).epsilon(1e-9));
}

TEST_CASE("barrel-base accuracy is the plain agreement rate") {
    CHECK(bb_accuracy({0, 1, 0, 1}, {0, 1, 0, 1}) == doctest::Approx(1.0));
    CHECK(bb_accuracy({1, 0, 1, 0}, {0, 1, 0, 1}) == doctest::Approx(0.0));
    CHECK(bb_accuracy({0, 0, 1, 1}, {0, 1, 0, 1}) == doctest::Approx(0.5));
}

TEST_CASE("axis angle is unoriented") {
    CHECK(axis_angle_deg(Vec3::UnitZ(), -Vec3::UnitZ()) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(axis_angle_deg(Vec3::UnitZ(), Vec3::UnitX()) == doctest::Approx(90.0).epsilon(1e-9));
    const Vec3 diag = Vec3(1, 1, 0).normalized();
    CHECK(axis_angle_deg(Vec3::UnitX(), diag) == doctest::Approx(45.0).epsilon(1e-9));
}

TEST_CASE("center distance is plain euclidean and translation equivariant") {
    CHECK(center_distance(Vec3(0.3, 0, 0), Vec3::Zero()) == doctest::Approx(0.3).epsilon(1e-12));
    std::mt19937_64 rng(104);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int t = 0; t < 50; ++t) {
        const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng));
        const Vec3 shift(u(rng), u(rng), u(rng));
        CHECK(center_distance(a + shift, b + shift) ==
              doctest::Approx(center_distance(a, b)).epsilon(1e-9));
    }
}

TEST_CASE("ground-truth cylinders explain their own barrel points") {
    const SynthModel model = l_profile_model(105);
    const SegmentMatching match = match_segments(
        one_hot_cols(model.cloud.seg, 1), one_hot_cols(model.cloud.seg, 1));
    CHECK(fit_cyl(model.gt, model.cloud, match) < 1e-6);
    CHECK(fit_glob(model.gt, model.cloud) < 1e-6);
    // A single segment makes the two fit views coincide.
    CHECK(fit_cyl(model.gt, model.cloud, match) ==
          doctest::Approx(fit_glob(model.gt, model.cloud)).epsilon(1e-12));
}

TEST_CASE("shifting a cylinder center moves the fit by at most the shift") {
    const SynthModel model = l_profile_model(106);
    const SegmentMatching match = match_segments(
        one_hot_cols(model.cloud.seg, 1), one_hot_cols(model.cloud.seg, 1));
    const double base = fit_cyl(model.gt, model.cloud, match);
    std::vector<ExtrusionCylinder> shifted = model.gt;
    const Vec3 axis = shifted[0].axis;
    // In-plane unit direction.
    Vec3 lateral = axis.cross(Vec3::UnitX());
    if (lateral.norm() < 1e-6) lateral = axis.cross(Vec3::UnitY());
    lateral.normalize();
    const double delta = 0.07;
    shifted[0].center += delta * lateral;
    const double moved = fit_cyl(shifted, model.cloud, match);
    CHECK(moved <= base + delta / shifted[0].scale + 1e-9);
    CHECK(moved > base);
}

TEST_CASE("sketch fit distance validates its cylinder") {
    ExtrusionCylinder empty;
    CHECK_THROWS_AS(sketch_fit_distance(empty, Vec3(1, 0, 0)), DataError);
    ExtrusionCylinder bad;
    bad.sketch = SketchProfile::from_loops(
        {{Vec2(-1, -1), Vec2(1, -1), Vec2(1, 1), Vec2(-1, 1)}});
    bad.scale = 0.0;
    CHECK_THROWS_AS(sketch_fit_distance(bad, Vec3(1, 0, 0)), DegenerateError);
}

TEST_CASE("binary cross entropy sums per-point losses") {
    const int n = 100;
    Eigen::MatrixXd half(n, 2);
    half.setConstant(0.5);
    const std::vector<int> gt(static_cast<std::size_t>(n), kBase);
    CHECK(bce_bb(half, gt) == doctest::Approx(n * std::log(2.0)).epsilon(1e-9));

    Eigen::MatrixXd confident(n, 2);
    confident.col(0).setConstant(1e-12);
    confident.col(1).setConstant(1.0 - 1e-12);
    CHECK(bce_bb(confident, gt) < 1e-9);

    // Elementwise-log reference on random inputs.
    std::mt19937_64 rng(107);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    Eigen::MatrixXd soft(n, 2);
    std::vector<int> labels;
    double ref = 0.0;
    for (int i = 0; i < n; ++i) {
        const double p = u(rng);
        soft(i, 0) = 1.0 - p;
        soft(i, 1) = p;
        const int y = static_cast<int>(rng() % 2);
        labels.push_back(y);
        ref -= y == kBase ? std::log(p) : std::log(1.0 - p);
    }
    CHECK(bce_bb(soft, labels) == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("evaluating a prediction against itself is perfect") {
    SynthConfig cfg;
    cfg.segments = 3;
    cfg.points = 3000;
    cfg.seed = 108;
    const SynthModel model = generate_model(cfg);
    const EvalReport report = evaluate_model(model.cloud, model.gt, model.cloud, model.gt);
    CHECK(report.seg_iou == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(report.normal_err_deg == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(report.bb_acc == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.ea_err_deg == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(report.ec_err == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(report.fit_cyl < 1e-6);
    CHECK(report.fit_glob < 1e-6);
    CHECK(report.unmatched_gt == 0);
}

TEST_CASE("evaluation is invariant to a relabeling of predicted segments") {
    SynthConfig cfg;
    cfg.segments = 4;
    cfg.points = 4000;
    cfg.seed = 109;
    const SynthModel model = generate_model(cfg);
    OrientedPointCloud relabeled = model.cloud;
    const std::vector<int> perm = {3, 0, 2, 1};
    for (int& s : relabeled.seg) s = perm[static_cast<std::size_t>(s)];
    std::vector<ExtrusionCylinder> cyls(4);
    for (int s = 0; s < 4; ++s)
        cyls[static_cast<std::size_t>(perm[static_cast<std::size_t>(s)])] =
            model.gt[static_cast<std::size_t>(s)];
    const EvalReport base = evaluate_model(model.cloud, model.gt, model.cloud, model.gt);
    const EvalReport shuffled = evaluate_model(relabeled, cyls, model.cloud, model.gt);
    CHECK(shuffled.seg_iou == doctest::Approx(base.seg_iou).epsilon(1e-9));
    CHECK(shuffled.ea_err_deg == doctest::Approx(base.ea_err_deg).epsilon(1e-9));
    CHECK(shuffled.ec_err == doctest::Approx(base.ec_err).epsilon(1e-9));
    CHECK(shuffled.fit_cyl == doctest::Approx(base.fit_cyl).epsilon(1e-9));
}

TEST_CASE("missing predicted segments are skipped but counted") {
    SynthConfig cfg;
    cfg.segments = 3;
    cfg.points = 3000;
    cfg.seed = 110;
    const SynthModel model = generate_model(cfg);
    // Collapse every predicted label onto segment 0.
    OrientedPointCloud collapsed = model.cloud;
    for (int& s : collapsed.seg) s = 0;
    const std::vector<ExtrusionCylinder> one = {model.gt[0]};
    const EvalReport report = evaluate_model(collapsed, one, model.cloud, model.gt);
    CHECK(report.unmatched_gt == 2);
    CHECK(report.seg_iou < 0.7);
}

TEST_CASE("report aggregation averages fields and sums unmatched") {
    EvalReport a, b;
    a.seg_iou = 0.8;
    b.seg_iou = 0.6;
    a.ea_err_deg = 1.0;
    b.ea_err_deg = 3.0;
    a.unmatched_gt = 1;
    b.unmatched_gt = 2;
    const EvalReport mean = aggregate_reports({a, b});
    CHECK(mean.seg_iou == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(mean.ea_err_deg == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(mean.unmatched_gt == 3);
}
