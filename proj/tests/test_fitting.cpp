#include "doctest.h"
#include "oracles.hpp"

#include "cylfit/error.hpp"
#include "cylfit/fitting.hpp"
#include "cylfit/synth.hpp"

#include <cmath>
#include <random>

using namespace cylfit;

namespace {

SoftWeights hard_weights(const std::vector<int>& bb) {
    SoftWeights w;
    w.barrel.resize(static_cast<Eigen::Index>(bb.size()));
    w.base.resize(static_cast<Eigen::Index>(bb.size()));
    for (std::size_t i = 0; i < bb.size(); ++i) {
        w.barrel[static_cast<Eigen::Index>(i)] = bb[i] == kBarrel ? 1.0 : 0.0;
        w.base[static_cast<Eigen::Index>(i)] = bb[i] == kBase ? 1.0 : 0.0;
    }
    return w;
}

} // namespace

TEST_CASE("axis from clean barrel and base normals") {
    const std::vector<Vec3> normals = {Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0),
                                       Vec3(0, -1, 0), Vec3(0, 0, 1), Vec3(0, 0, -1)};
    const AxisFit fit = recover_axis(normals, hard_weights({0, 0, 0, 0, 1, 1}));
    CHECK(std::abs(fit.axis.dot(Vec3::UnitZ())) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.gap > 0.5);
}

TEST_CASE("a single barrel normal leaves the axis ambiguous") {
    const std::vector<Vec3> normals = {Vec3(1, 0, 0)};
    CHECK_THROWS_AS(recover_axis(normals, hard_weights({0})), AmbiguousAxisError);
}

TEST_CASE("zero total weight is ambiguous too") {
    const std::vector<Vec3> normals = {Vec3(1, 0, 0), Vec3(0, 1, 0)};
    SoftWeights w;
    w.barrel = Eigen::VectorXd::Zero(2);
    w.base = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(recover_axis(normals, w), AmbiguousAxisError);
}

TEST_CASE("axis recovery is rotation equivariant and matches grid search") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
    for (int t = 0; t < 20; ++t) {
        const Mat3 r = oracle::random_rotation(rng);
        std::vector<Vec3> normals;
        std::vector<int> bb;
        for (int i = 0; i < 24; ++i) {
            const double a = u(rng);
            normals.push_back(r * Vec3(std::cos(a), std::sin(a), 0));
            bb.push_back(kBarrel);
        }
        normals.push_back(r * Vec3::UnitZ());
        bb.push_back(kBase);
        const SoftWeights w = hard_weights(bb);
        const AxisFit fit = recover_axis(normals, w);
        CHECK(oracle::angle_deg(fit.axis, r * Vec3::UnitZ()) < 1e-6 * 180.0 / M_PI);

        const Mat3 h = oracle::scatter_matrix(
            normals, std::vector<double>(w.barrel.data(), w.barrel.data() + w.barrel.size()),
            std::vector<double>(w.base.data(), w.base.data() + w.base.size()));
        CHECK(oracle::angle_deg(fit.axis, oracle::grid_min_axis(h, 0.5)) < 2.0);
    }
}

TEST_CASE("weighted scatter equals the hand-built sum") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        std::vector<Vec3> normals;
        std::vector<double> wb, wa;
        SoftWeights w;
        const int n = 16;
        w.barrel.resize(n);
        w.base.resize(n);
        for (int i = 0; i < n; ++i) {
            normals.push_back(oracle::random_unit(rng));
            wb.push_back(u(rng));
            wa.push_back(u(rng));
            w.barrel[i] = wb.back();
            w.base[i] = wa.back();
        }
        const Mat3 ref = oracle::scatter_matrix(normals, wb, wa);
        CHECK((weighted_axis_scatter(normals, w) - ref).norm() < 1e-12);
    }
}

TEST_CASE("uniform weight scaling leaves the axis unchanged") {
    std::mt19937_64 rng(43);
    std::vector<Vec3> normals;
    std::vector<int> bb;
    for (int i = 0; i < 30; ++i) {
        const double a = 2.0 * M_PI * i / 30.0;
        normals.push_back(Vec3(std::cos(a), std::sin(a), 0));
        bb.push_back(kBarrel);
    }
    normals.push_back(Vec3::UnitZ());
    bb.push_back(kBase);
    SoftWeights w = hard_weights(bb);
    const Vec3 base_axis = recover_axis(normals, w).axis;
    w.barrel *= 0.37;
    w.base *= 0.37;
    const Vec3 scaled_axis = recover_axis(normals, w).axis;
    CHECK((base_axis - scaled_axis).norm() < 1e-12);
}

TEST_CASE("zero-weight outliers do not disturb the fit") {
    std::mt19937_64 rng(44);
    std::vector<Vec3> normals;
    std::vector<Vec3> points;
    SoftWeights w;
    const int n = 40;
    w.barrel = Eigen::VectorXd::Zero(n + 5);
    w.base = Eigen::VectorXd::Zero(n + 5);
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * M_PI * i / n;
        normals.push_back(Vec3(std::cos(a), std::sin(a), 0));
        points.push_back(Vec3(std::cos(a), std::sin(a), (i % 5) * 0.1));
        w.barrel[i] = 1.0;
    }
    for (int i = 0; i < 5; ++i) { // garbage rows with zero weight
        normals.push_back(oracle::random_unit(rng));
        points.push_back(Vec3(100, -50, 3) * (i + 1));
    }
    const Vec3 axis = recover_axis(normals, w).axis;
    CHECK(std::abs(axis.dot(Vec3::UnitZ())) == doctest::Approx(1.0).epsilon(1e-9));
    const Vec3 center = recover_center(points, w.barrel);
    Vec3 mean = Vec3::Zero();
    for (int i = 0; i < n; ++i) mean += points[static_cast<std::size_t>(i)];
    CHECK((center - mean / n).norm() < 1e-12);
}

TEST_CASE("center is the weighted barrel centroid") {
    const std::vector<Vec3> points = {Vec3(1, 0, 0), Vec3(-1, 0, 0)};
    Eigen::VectorXd w = Eigen::VectorXd::Ones(2);
    CHECK(recover_center(points, w).norm() < 1e-15);
    w *= 0.5; // uniform soft weights, same centroid
    CHECK(recover_center(points, w).norm() < 1e-15);

    std::mt19937_64 rng(45);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<Vec3> cloud;
    for (int i = 0; i < 100; ++i) cloud.emplace_back(u(rng), u(rng), u(rng));
    Vec3 mean = Vec3::Zero();
    for (const Vec3& p : cloud) mean += p;
    mean /= 100.0;
    CHECK((recover_center(cloud, Eigen::VectorXd::Ones(100)) - mean).norm() < 1e-12);

    CHECK_THROWS_AS(recover_center(cloud, Eigen::VectorXd::Zero(100)), DegenerateError);
}

TEST_CASE("scale is the largest planar radius") {
    const std::vector<Vec3> corners = {Vec3(1, 1, 0), Vec3(-1, 1, 2), Vec3(1, -1, -1),
                                       Vec3(-1, -1, 0.5)};
    CHECK(recover_scale(corners, Vec3::UnitZ(), Vec3::Zero()) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    const std::vector<Vec3> one = {Vec3(0.5, 0, 7.0)};
    CHECK(recover_scale(one, Vec3::UnitZ(), Vec3::Zero()) == doctest::Approx(0.5).epsilon(1e-12));

    std::mt19937_64 rng(46);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 50; ++t) {
        const Vec3 e = oracle::random_unit(rng);
        const Vec3 c(u(rng), u(rng), u(rng));
        std::vector<Vec3> pts;
        double ref = 0.0;
        for (int i = 0; i < 60; ++i) {
            const Vec3 p(u(rng), u(rng), u(rng));
            pts.push_back(p);
            const Vec3 d = (p - c) - e.dot(p - c) * e; // independent planar radius
            ref = std::max(ref, d.norm());
        }
        CHECK(recover_scale(pts, e, c) == doctest::Approx(ref).epsilon(1e-12));
    }

    CHECK_THROWS_AS(recover_scale({}, Vec3::UnitZ(), Vec3::Zero()), DegenerateError);
    const std::vector<Vec3> on_axis = {Vec3(0, 0, 1), Vec3(0, 0, -2)};
    CHECK_THROWS_AS(recover_scale(on_axis, Vec3::UnitZ(), Vec3::Zero()), DegenerateError);
}

TEST_CASE("extent is the symmetrized axial span") {
    const std::vector<Vec3> pts = {Vec3(1, 0, 0), Vec3(0, 1, 1)};
    const Extent ext = recover_extent(pts, Vec3::UnitZ(), Vec3(0, 0, 0.5));
    CHECK(ext.r_min == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(ext.r_max == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_FALSE(ext.zero);

    const std::vector<Vec3> flat = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(-1, 0, 0)};
    const Extent zero = recover_extent(flat, Vec3::UnitZ(), Vec3::Zero());
    CHECK(zero.zero);
    CHECK(zero.r_max == doctest::Approx(0.0).epsilon(1e-12));

    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 50; ++t) {
        const Vec3 e = oracle::random_unit(rng);
        const Vec3 c(u(rng), u(rng), u(rng));
        std::vector<Vec3> cloud;
        double hi = 0.0;
        for (int i = 0; i < 40; ++i) {
            const Vec3 p(u(rng), u(rng), u(rng));
            cloud.push_back(p);
            hi = std::max(hi, std::abs(e.dot(p - c)));
        }
        const Extent r = recover_extent(cloud, e, c);
        CHECK(r.r_max == doctest::Approx(hi).epsilon(1e-12));
        CHECK(r.r_min == doctest::Approx(-hi).epsilon(1e-12));
    }
}

TEST_CASE("full segment fit recovers generator ground truth") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const SynthModel model = l_profile_model(seed);
        const FitResult fit = fit_segment(model.cloud, 0);
        const ExtrusionCylinder& gt = model.gt[0];
        CHECK(oracle::angle_deg(fit.cylinder.axis, gt.axis) < 0.01);
        CHECK((fit.cylinder.center - gt.center).norm() < 1e-9);
        CHECK(fit.cylinder.scale == doctest::Approx(gt.scale).epsilon(1e-9));
        CHECK(fit.cylinder.r_max == doctest::Approx(gt.r_max).epsilon(1e-9));
    }
}

TEST_CASE("soft one-hot weights reproduce the hard-label fit") {
    const SynthModel model = l_profile_model(7);
    const FitResult hard = fit_segment(model.cloud, 0);
    const MembershipMatrix soft = one_hot_membership(labels_of(model.cloud), 1);
    const FitResult via_soft = fit_segment(model.cloud, soft, 0);
    CHECK((hard.cylinder.axis - via_soft.cylinder.axis).norm() < 1e-12);
    CHECK((hard.cylinder.center - via_soft.cylinder.center).norm() < 1e-12);
    CHECK(hard.cylinder.scale == doctest::Approx(via_soft.cylinder.scale).epsilon(1e-12));
    CHECK(hard.cylinder.r_max == doctest::Approx(via_soft.cylinder.r_max).epsilon(1e-12));
}

TEST_CASE("segment fit is rigid-motion equivariant") {
    std::mt19937_64 rng(48);
    const SynthModel model = l_profile_model(9);
    const FitResult base = fit_segment(model.cloud, 0);
    const Mat3 r = oracle::random_rotation(rng);
    const Vec3 t(0.4, -0.2, 1.1);
    OrientedPointCloud moved = model.cloud;
    for (std::size_t i = 0; i < moved.size(); ++i) {
        moved.points[i] = r * moved.points[i] + t;
        moved.normals[i] = r * moved.normals[i];
    }
    const FitResult rot = fit_segment(moved, 0);
    CHECK(oracle::angle_deg(rot.cylinder.axis, r * base.cylinder.axis) < 1e-6 * 180.0 / M_PI);
    CHECK((rot.cylinder.center - (r * base.cylinder.center + t)).norm() < 1e-9);
    CHECK(rot.cylinder.scale == doctest::Approx(base.cylinder.scale).epsilon(1e-9));
    CHECK(rot.cylinder.r_max == doctest::Approx(base.cylinder.r_max).epsilon(1e-9));
}

TEST_CASE("normalized sketch samples stay inside the unit disk") {
    const SynthModel model = l_profile_model(10);
    const FitResult fit = fit_segment(model.cloud, 0);
    REQUIRE_FALSE(fit.sketch_points.empty());
    double worst = 0.0;
    for (const Vec2& p : fit.sketch_points) worst = std::max(worst, p.norm());
    CHECK(worst <= 1.0 + 1e-9);
    CHECK(worst > 0.9); // the extreme samples sit on the unit circle by construction
}

TEST_CASE("axis survives moderate normal noise") {
    SynthModel model = l_profile_model(12);
    perturb_normals(model.cloud, 0.1, 99);
    const FitResult fit = fit_segment(model.cloud, 0);
    CHECK(oracle::angle_deg(fit.cylinder.axis, model.gt[0].axis) < 10.0);
}
