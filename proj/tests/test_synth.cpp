#include "doctest.h"
#include "oracles.hpp"

#include "cylfit/error.hpp"
#include "cylfit/fitting.hpp"
#include "cylfit/synth.hpp"

#include <cmath>
#include <set>

using namespace cylfit;

namespace {

std::vector<Vec2> unit_square() {
    return {Vec2(-1, -1), Vec2(1, -1), Vec2(1, 1), Vec2(-1, 1)};
}

} // namespace

TEST_CASE("clean samples have exactly orthogonal or parallel normals") {
    SynthConfig cfg;
    cfg.segments = 1;
    cfg.points = 2000;
    cfg.seed = 51;
    const SynthModel model = generate_model(cfg);
    const Vec3 e = model.gt[0].axis;
    for (std::size_t i = 0; i < model.cloud.size(); ++i) {
        const double agree = std::abs(model.cloud.normals[i].dot(e));
        if (model.cloud.bb[i] == kBarrel)
            CHECK(agree < 1e-9);
        else
            CHECK(agree > 1.0 - 1e-9);
    }
}

TEST_CASE("ground truth is reproduced by an independent fit") {
    for (int k = 1; k <= 4; ++k) {
        SynthConfig cfg;
        cfg.segments = k;
        cfg.points = 4096;
        cfg.seed = 52u + static_cast<std::uint64_t>(k);
        const SynthModel model = generate_model(cfg);
        REQUIRE(static_cast<int>(model.gt.size()) == k);
        for (int s = 0; s < k; ++s) {
            const FitResult fit = fit_segment(model.cloud, s);
            const ExtrusionCylinder& gt = model.gt[static_cast<std::size_t>(s)];
            CHECK(oracle::angle_deg(fit.cylinder.axis, gt.axis) < 0.01);
            CHECK((fit.cylinder.center - gt.center).norm() < 1e-6);
            CHECK(std::abs(fit.cylinder.scale - gt.scale) < 1e-6);
            CHECK(std::abs(fit.cylinder.r_max - gt.r_max) < 1e-6);
        }
    }
}

TEST_CASE("generation is deterministic under a fixed seed") {
    SynthConfig cfg;
    cfg.segments = 3;
    cfg.points = 1024;
    cfg.seed = 53;
    const SynthModel a = generate_model(cfg);
    const SynthModel b = generate_model(cfg);
    REQUIRE(a.cloud.size() == b.cloud.size());
    for (std::size_t i = 0; i < a.cloud.size(); ++i) {
        CHECK(a.cloud.points[i] == b.cloud.points[i]);   // bitwise
        CHECK(a.cloud.normals[i] == b.cloud.normals[i]);
        CHECK(a.cloud.seg[i] == b.cloud.seg[i]);
        CHECK(a.cloud.bb[i] == b.cloud.bb[i]);
    }
    SynthConfig other = cfg;
    other.seed = 54;
    const SynthModel c = generate_model(other);
    bool all_equal = a.cloud.size() == c.cloud.size();
    for (std::size_t i = 0; all_equal && i < a.cloud.size(); ++i)
        all_equal = a.cloud.points[i] == c.cloud.points[i];
    CHECK_FALSE(all_equal);
}

TEST_CASE("models are normalized to the unit sphere") {
    SynthConfig cfg;
    cfg.segments = 2;
    cfg.points = 2048;
    cfg.seed = 55;
    const SynthModel model = generate_model(cfg);
    double max_norm = 0.0;
    for (const Vec3& p : model.cloud.points) max_norm = std::max(max_norm, p.norm());
    CHECK(max_norm <= 1.0 + 1e-9);
    CHECK(max_norm > 0.5); // actually fills a good part of the sphere
}

TEST_CASE("discard rules reject degenerate layouts") {
    // Second solid carries a vanishing share of the surface area.
    SolidSpec big;
    big.profile = unit_square();
    SolidSpec tiny = big;
    tiny.scale = 1e-4;
    tiny.half_extent = 1e-4;
    tiny.center = Vec3(3, 0, 0);
    SynthConfig cfg;
    cfg.segments = 2;
    cfg.points = 1000;
    CHECK_THROWS_AS(extrude_solids({big, tiny}, cfg), DegenerateError);

    // Far too few points to give each segment its minimum.
    SynthConfig starved;
    starved.segments = 4;
    starved.points = 100;
    CHECK_THROWS_AS(extrude_solids(
        {big, big, big, big}, starved), DegenerateError);
}

TEST_CASE("sampling splits barrel and base by surface area") {
    SolidSpec solid;
    solid.profile = unit_square();
    solid.scale = 1.0;
    solid.half_extent = 0.5; // walls: 8*1 = 8, caps: 2*4 = 8 (equal areas)
    SynthConfig cfg;
    cfg.segments = 1;
    cfg.points = 20000;
    cfg.seed = 56;
    const SynthModel model = extrude_solids({solid}, cfg);
    int barrel = 0;
    for (int b : model.cloud.bb) barrel += (b == kBarrel) ? 1 : 0;
    const double n = static_cast<double>(model.cloud.size());
    const double sigma = std::sqrt(n * 0.25);
    CHECK(std::abs(barrel - 0.5 * n) < 4.0 * sigma + 8.0); // anchors tilt it slightly
}

TEST_CASE("vertex anchors pin the sample extrema to the nominal size") {
    SolidSpec solid;
    solid.profile = unit_square();
    solid.scale = 0.8;
    solid.half_extent = 0.4;
    SynthConfig cfg;
    cfg.segments = 1;
    cfg.points = 500;
    cfg.seed = 57;
    const SynthModel model = extrude_solids({solid}, cfg);
    const ExtrusionCylinder& gt = model.gt[0];
    // The generator's bookkeeping and a from-scratch fit agree exactly.
    std::vector<Vec3> barrel_pts;
    for (std::size_t i = 0; i < model.cloud.size(); ++i)
        if (model.cloud.bb[i] == kBarrel) barrel_pts.push_back(model.cloud.points[i]);
    CHECK(recover_scale(barrel_pts, gt.axis, gt.center) ==
          doctest::Approx(gt.scale).epsilon(1e-12));
    const Extent ext = recover_extent(barrel_pts, gt.axis, gt.center);
    CHECK(ext.r_max == doctest::Approx(gt.r_max).epsilon(1e-12));
}

TEST_CASE("noise displaces along the normal, bounded and uniform") {
    SynthModel model = l_profile_model(58, 4096);
    OrientedPointCloud clean = model.cloud;

    perturb_noise(model.cloud, 0.0, 1);
    for (std::size_t i = 0; i < clean.size(); ++i)
        CHECK(model.cloud.points[i] == clean.points[i]); // sigma 0 is the identity

    const double sigma = 0.05;
    perturb_noise(model.cloud, sigma, 2);
    double mean = 0.0;
    int bins[10] = {0};
    for (std::size_t i = 0; i < clean.size(); ++i) {
        const Vec3 d = model.cloud.points[i] - clean.points[i];
        // Displacement is along the normal...
        CHECK((d - d.dot(clean.normals[i]) * clean.normals[i]).norm() < 1e-12);
        const double u = d.dot(clean.normals[i]);
        // ...bounded by sigma...
        CHECK(std::abs(u) <= sigma * (1.0 + 1e-12));
        mean += u;
        bins[std::min(9, static_cast<int>((u + sigma) / (2 * sigma) * 10))] += 1;
    }
    mean /= static_cast<double>(clean.size());
    CHECK(std::abs(mean) < 4.0 * sigma / std::sqrt(3.0 * clean.size()));
    // ...and roughly uniform: each decile within 5 sigma of the expectation.
    const double expect = clean.size() / 10.0;
    const double bin_sigma = std::sqrt(clean.size() * 0.1 * 0.9);
    for (int b : bins) CHECK(std::abs(b - expect) < 5.0 * bin_sigma);
}

TEST_CASE("normal perturbation is monotone in sigma and keeps unit length") {
    const SynthModel base = l_profile_model(59, 2048);
    double prev = 0.0;
    for (double sigma : {0.0, 0.02, 0.05, 0.1, 0.2}) {
        OrientedPointCloud cloud = base.cloud;
        perturb_normals(cloud, sigma, 7);
        double total = 0.0;
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            CHECK(cloud.normals[i].norm() == doctest::Approx(1.0).epsilon(1e-12));
            total += oracle::angle_deg(cloud.normals[i], base.cloud.normals[i]);
        }
        const double mean_dev = total / static_cast<double>(cloud.size());
        if (sigma == 0.0)
            CHECK(mean_dev == doctest::Approx(0.0).epsilon(1e-12));
        else
            CHECK(mean_dev > prev);
        prev = mean_dev;
    }
}

TEST_CASE("per-segment labels are sound for fitting") {
    SynthConfig cfg;
    cfg.segments = 3;
    cfg.points = 6144;
    cfg.seed = 60;
    const SynthModel model = generate_model(cfg);
    const std::set<int> segs(model.cloud.seg.begin(), model.cloud.seg.end());
    CHECK(static_cast<int>(segs.size()) == 3);
    for (int s = 0; s < 3; ++s) {
        const FitResult fit = fit_segment(model.cloud, s);
        CHECK(oracle::angle_deg(fit.cylinder.axis, model.gt[static_cast<std::size_t>(s)].axis) <
              0.01);
    }
}

TEST_CASE("segment shares respect the configured minimum") {
    SynthConfig cfg;
    cfg.segments = 5;
    cfg.points = 8192;
    cfg.seed = 61;
    const SynthModel model = generate_model(cfg);
    std::vector<int> counts(5, 0);
    for (int s : model.cloud.seg) counts[static_cast<std::size_t>(s)] += 1;
    for (int c : counts) {
        CHECK(c >= cfg.min_points);
        CHECK(c >= static_cast<int>(cfg.min_share * cfg.points));
    }
    for (const ExtrusionCylinder& gt : model.gt) CHECK(gt.r_max >= cfg.min_extent);
}

TEST_CASE("derive_seed decorrelates sub-streams") {
    const std::uint64_t a = derive_seed(1, 0);
    const std::uint64_t b = derive_seed(1, 1);
    const std::uint64_t c = derive_seed(2, 0);
    CHECK(a != b);
    CHECK(a != c);
    CHECK(derive_seed(1, 0) == a);
}

TEST_CASE("fixture models are labeled and well formed") {
    const SynthModel l = l_profile_model(62);
    CHECK(l.gt.size() == 1);
    CHECK(l.cloud.has_labels());
    CHECK(l.cloud.size() == 4096);
    CHECK_FALSE(l.gt[0].sketch.empty());

    const SynthModel pair = coaxial_pair_model(63);
    REQUIRE(pair.gt.size() == 2);
    CHECK(std::abs(pair.gt[0].axis.dot(pair.gt[1].axis)) == doctest::Approx(1.0).epsilon(1e-9));
}
