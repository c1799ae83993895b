// cylfit: batch front end for the extrusion-cylinder toolkit.
//
// Subcommands: gen, fit, decompose, eval, sketch, recon, noise-sweep.
// Exit codes: 0 ok, 1 usage, 2 bad data, 3 degenerate geometry.

#include "cylfit/error.hpp"
#include "cylfit/fitting.hpp"
#include "cylfit/geom_core.hpp"
#include "cylfit/hough.hpp"
#include "cylfit/io.hpp"
#include "cylfit/mesh.hpp"
#include "cylfit/metrics.hpp"
#include "cylfit/postproc.hpp"
#include "cylfit/sketch2d.hpp"
#include "cylfit/synth.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cylfit;

namespace {

constexpr const char* kVersion = "cylfit 0.1.0";

struct GlobalOpts {
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string out = ".";
    std::string format = "text";
};

fs::path ensure_out(const std::string& out) {
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

std::string model_stem(int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "model_%04d", i);
    return buf;
}

// Simple deterministic worker pool: results are produced per index, so the
// output layout never depends on scheduling.
void parallel_for(int jobs, int count, const std::function<void(int)>& fn) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min(jobs, count);
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

RunManifest start_manifest(const std::string& command, int argc, char** argv,
                           const GlobalOpts& g) {
    RunManifest m;
    m.command = command;
    for (int i = 1; i < argc; ++i) m.flags.emplace_back(argv[i]);
    m.seed = g.seed;
    m.version = kVersion;
    return m;
}

void finish_manifest(RunManifest& m, const fs::path& out_dir,
                     std::chrono::steady_clock::time_point t0) {
    m.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const fs::path path = out_dir / "run_manifest.json";
    write_manifest(path.string(), m);
}

// Attach a boundary polygon to a fitted cylinder from its normalized barrel
// samples.  Failures leave the sketch empty (reported, not fatal): a sparse or
// dusty segment still gets its axis/center/scale parameters.
void attach_sketch(ExtrusionCylinder& cyl, const std::vector<Vec2>& samples,
                   int resolution, const std::string& label) {
    try {
        cyl.sketch = profile_from_samples(samples, resolution);
        if (cyl.sketch.empty())
            std::cerr << "warning: " << label << ": no closed boundary extracted\n";
    } catch (const Error& e) {
        std::cerr << "warning: " << label << ": " << e.what() << "\n";
    }
}

void write_sketch_samples(const fs::path& path, const std::vector<Vec2>& samples) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open for writing: " + path.string());
    f << "# normalized sketch-plane samples: x y\n";
    char buf[80];
    for (const Vec2& p : samples) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", p.x(), p.y());
        f << buf;
    }
}

// ---------------------------------------------------------------- gen ----

struct GenOpts {
    int models = 10;
    int k = 0; // 0: draw from [k_min, k_max]
    int k_min = 1;
    int k_max = 8;
    int points = 8192;
    double noise = 0.0;
    double single_frac = 0.2;
};

int run_gen(const GlobalOpts& g, const GenOpts& o, RunManifest& manifest) {
    if (o.models < 1 || o.points < 1 || o.k < 0 || o.k_min < 1 || o.k_max < o.k_min ||
        o.noise < 0.0 || o.single_frac < 0.0 || o.single_frac > 1.0)
        throw UsageError("gen: invalid flag values");
    const fs::path out_dir = ensure_out(g.out);

    struct Entry {
        std::string cloud, gt;
        std::uint64_t seed;
        int segments;
    };
    std::vector<Entry> entries(static_cast<std::size_t>(o.models));

    parallel_for(g.jobs, o.models, [&](int i) {
        const std::uint64_t model_seed = derive_seed(g.seed, 3000 + static_cast<std::uint64_t>(i));
        SynthConfig cfg;
        cfg.points = o.points;
        cfg.noise_sigma = o.noise;
        cfg.seed = model_seed;
        if (o.k > 0) {
            cfg.segments = o.k;
        } else {
            std::mt19937_64 rng(derive_seed(model_seed, 77));
            if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < o.single_frac)
                cfg.segments = 1;
            else
                cfg.segments = std::uniform_int_distribution<int>(o.k_min, o.k_max)(rng);
        }
        const SynthModel model = generate_model(cfg);

        const std::string stem = model_stem(i);
        const fs::path cloud_path = out_dir / (stem + ".txt");
        const fs::path gt_path = out_dir / (stem + ".cylinders.json");
        write_cloud_text(cloud_path.string(), model.cloud);
        write_cylinders_json(gt_path.string(), model.gt);
        entries[static_cast<std::size_t>(i)] =
            Entry{cloud_path.filename().string(), gt_path.filename().string(),
                  model_seed, cfg.segments};
    });

    json jmodels = json::array();
    for (const Entry& e : entries) {
        jmodels.push_back(json{{"cloud", e.cloud},
                               {"gt", e.gt},
                               {"seed", e.seed},
                               {"segments", e.segments}});
        manifest.outputs.push_back(e.cloud);
        manifest.outputs.push_back(e.gt);
    }
    const fs::path ds_path = out_dir / "dataset.json";
    std::ofstream ds(ds_path, std::ios::binary);
    if (!ds) throw DataError("cannot open for writing: " + ds_path.string());
    ds << json{{"schema", 1}, {"models", std::move(jmodels)}}.dump(2) << '\n';
    manifest.outputs.push_back("dataset.json");

    std::cout << "wrote " << o.models << " models to " << out_dir.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------- fit ----

struct FitOpts {
    std::string input;
    bool estimate_normals = false;
    bool allow_degenerate = false;
    int normals_k = 16;
    int resolution = 256;
};

int run_fit(const GlobalOpts& g, const FitOpts& o, RunManifest& manifest) {
    const fs::path out_dir = ensure_out(g.out);
    OrientedPointCloud cloud = read_cloud_text(o.input);
    manifest.inputs.push_back(o.input);

    if (!cloud.has_labels())
        throw UsageError("fit: input is unlabeled; segment and base/barrel labels are required");

    if (o.estimate_normals) {
        NormalEstimate est = estimate_normals_pca(cloud.points, o.normals_k);
        cloud.normals = std::move(est.normals);
        cloud.normal_valid = std::move(est.valid);
    }

    const int segments = segment_count(cloud.seg);
    std::vector<ExtrusionCylinder> cylinders;
    for (int k = 0; k < segments; ++k) {
        try {
            FitResult fr = fit_segment(cloud, k);
            if (fr.zero_extent)
                std::cerr << "warning: segment " << k << " has zero extent\n";
            attach_sketch(fr.cylinder, fr.sketch_points, o.resolution,
                          "segment " + std::to_string(k));
            char buf[32];
            std::snprintf(buf, sizeof(buf), "sketch_samples_%02d.txt", k);
            const fs::path sp = out_dir / buf;
            write_sketch_samples(sp, fr.sketch_points);
            manifest.outputs.push_back(sp.filename().string());
            cylinders.push_back(std::move(fr.cylinder));
        } catch (const DegenerateError& e) {
            if (!o.allow_degenerate) throw;
            std::cerr << "warning: segment " << k << " skipped: " << e.what() << "\n";
        }
    }
    if (cylinders.empty())
        throw DegenerateError("fit: no segment could be fitted");

    const fs::path cyl_path = out_dir / "cylinders.json";
    write_cylinders_json(cyl_path.string(), cylinders);
    manifest.outputs.push_back("cylinders.json");
    std::cout << "fitted " << cylinders.size() << " of " << segments << " segments\n";
    return 0;
}

// ---------------------------------------------------------- decompose ----

struct DecomposeOpts {
    std::string input;
    bool estimate_normals = false;
    bool refine = false;
    int normals_k = 16;
    int resolution = 256;
    HoughParams hough;
};

int run_decompose(const GlobalOpts& g, const DecomposeOpts& o, RunManifest& manifest) {
    const fs::path out_dir = ensure_out(g.out);
    OrientedPointCloud cloud = read_cloud_text(o.input);
    manifest.inputs.push_back(o.input);

    if (o.estimate_normals) {
        NormalEstimate est = estimate_normals_pca(cloud.points, o.normals_k);
        cloud.normals = std::move(est.normals);
        cloud.normal_valid = std::move(est.valid);
    }

    HoughParams hp = o.hough;
    hp.seed = g.seed;
    Decomposition dec = decompose(cloud, hp);
    if (dec.modes.size() == 1)
        std::cerr << "note: one axis mode explains the cloud; segments sharing an axis"
                     " cannot be separated\n";

    OrientedPointCloud labeled = cloud;
    labeled.seg = dec.labels.seg;
    labeled.bb = dec.labels.bb;

    std::vector<ExtrusionCylinder> cylinders;
    if (!o.refine) {
        for (std::size_t k = 0; k < dec.segments.size(); ++k) {
            FitResult& fr = dec.segments[k];
            attach_sketch(fr.cylinder, fr.sketch_points, o.resolution,
                          "segment " + std::to_string(k));
            cylinders.push_back(std::move(fr.cylinder));
        }
    } else {
        const HardLabels refined =
            refine_segmentation(labeled, HardLabels{labeled.seg, labeled.bb});
        labeled.seg = refined.seg;
        labeled.bb = refined.bb;
        const int segments = segment_count(labeled.seg);
        for (int k = 0; k < segments; ++k) {
            FitResult fr = fit_segment(labeled, k);

            std::vector<Vec3> barrel;
            for (int idx : fr.barrel_indices) barrel.push_back(labeled.points[static_cast<std::size_t>(idx)]);

            RansacParams rp;
            rp.seed = derive_seed(g.seed, 0xf17 + static_cast<std::uint64_t>(k));
            const RansacScale rs =
                ransac_scale(barrel, fr.cylinder.axis, fr.cylinder.center, rp);
            if (!rs.accepted)
                std::cerr << "warning: segment " << k
                          << ": scale consensus below threshold, best-coverage estimate used\n";
            const Extent ext =
                robust_extent(barrel, fr.cylinder.axis, fr.cylinder.center, DbscanParams{});

            // Re-normalize the sketch samples to the robust scale.
            std::vector<Vec2> samples = fr.sketch_points;
            const double ratio = fr.cylinder.scale / rs.scale;
            for (Vec2& s : samples) s *= ratio;

            fr.cylinder.scale = rs.scale;
            fr.cylinder.r_min = ext.r_min;
            fr.cylinder.r_max = ext.r_max;
            attach_sketch(fr.cylinder, samples, o.resolution,
                          "segment " + std::to_string(k));
            cylinders.push_back(std::move(fr.cylinder));
        }
    }

    const fs::path cloud_path = out_dir / "labels.txt";
    const fs::path cyl_path = out_dir / "cylinders.json";
    write_cloud_text(cloud_path.string(), labeled);
    write_cylinders_json(cyl_path.string(), cylinders);
    manifest.outputs.push_back("labels.txt");
    manifest.outputs.push_back("cylinders.json");
    std::cout << "decomposed into " << cylinders.size() << " segments\n";
    return 0;
}

// --------------------------------------------------------------- eval ----

struct EvalOpts {
    std::string pred;
    std::string gt;
};

std::map<std::string, fs::path> cloud_files(const std::string& dir) {
    std::map<std::string, fs::path> out;
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const fs::path p = entry.path();
        if (p.extension() == ".txt" && p.stem().string().rfind("sketch_samples", 0) != 0)
            out[p.stem().string()] = p;
    }
    return out;
}

fs::path sibling_cylinders(const fs::path& cloud_path) {
    // decompose writes labels.txt + cylinders.json; gen writes
    // <stem>.txt + <stem>.cylinders.json.  Accept both layouts.
    fs::path by_stem = cloud_path.parent_path() / (cloud_path.stem().string() + ".cylinders.json");
    if (fs::exists(by_stem)) return by_stem;
    fs::path flat = cloud_path.parent_path() / "cylinders.json";
    if (fs::exists(flat)) return flat;
    throw DataError("no cylinder JSON found next to " + cloud_path.string());
}

int run_eval(const GlobalOpts& g, const EvalOpts& o, RunManifest& manifest) {
    const fs::path out_dir = ensure_out(g.out);
    const auto pred_files = cloud_files(o.pred);
    const auto gt_files = cloud_files(o.gt);
    manifest.inputs.push_back(o.pred);
    manifest.inputs.push_back(o.gt);

    if (pred_files.size() != gt_files.size())
        throw DataError("eval: model counts differ (pred " +
                        std::to_string(pred_files.size()) + ", gt " +
                        std::to_string(gt_files.size()) + ")");
    if (gt_files.empty()) throw DataError("eval: no models found");

    struct Row {
        std::string name;
        EvalReport rep;
    };
    std::vector<std::string> stems;
    // Single-model prediction dirs use fixed file names; pair them by order.
    const bool flat_pred = pred_files.size() == 1 && gt_files.size() == 1;
    for (const auto& [stem, path] : gt_files) {
        (void)path;
        if (!flat_pred && pred_files.find(stem) == pred_files.end())
            throw DataError("eval: prediction missing for " + stem);
        stems.push_back(stem);
    }

    std::vector<Row> rows(stems.size());
    parallel_for(g.jobs, static_cast<int>(stems.size()), [&](int i) {
        const std::string& stem = stems[static_cast<std::size_t>(i)];
        const fs::path gt_cloud_path = gt_files.at(stem);
        const fs::path pred_cloud_path =
            flat_pred ? pred_files.begin()->second : pred_files.at(stem);
        const OrientedPointCloud pred_cloud = read_cloud_text(pred_cloud_path.string());
        const OrientedPointCloud gt_cloud = read_cloud_text(gt_cloud_path.string());
        const auto pred_cyls = read_cylinders_json(sibling_cylinders(pred_cloud_path).string());
        const auto gt_cyls = read_cylinders_json(sibling_cylinders(gt_cloud_path).string());
        rows[static_cast<std::size_t>(i)] =
            Row{stem, evaluate_model(pred_cloud, pred_cyls, gt_cloud, gt_cyls)};
    });

    std::vector<EvalReport> reports;
    for (const Row& r : rows) reports.push_back(r.rep);
    const EvalReport agg = aggregate_reports(reports);

    auto to_json = [](const EvalReport& r) {
        return json{{"seg_iou", r.seg_iou},       {"normal_err_deg", r.normal_err_deg},
                    {"bb_acc", r.bb_acc},         {"ea_err_deg", r.ea_err_deg},
                    {"ec_err", r.ec_err},         {"fit_cyl", r.fit_cyl},
                    {"fit_glob", r.fit_glob},     {"unmatched_gt", r.unmatched_gt}};
    };
    json jmodels = json::array();
    for (const Row& r : rows) {
        json j = to_json(r.rep);
        j["model"] = r.name;
        jmodels.push_back(std::move(j));
    }
    const json report{{"schema", 1}, {"models", std::move(jmodels)}, {"aggregate", to_json(agg)}};
    const fs::path report_path = out_dir / "eval.json";
    std::ofstream rf(report_path, std::ios::binary);
    if (!rf) throw DataError("cannot open for writing: " + report_path.string());
    rf << report.dump(2) << '\n';
    manifest.outputs.push_back("eval.json");

    if (g.format == "json") {
        std::cout << report.dump(2) << '\n';
    } else {
        char line[256];
        std::printf("%-14s %7s %8s %7s %8s %8s %9s %9s\n", "model", "Seg.", "Norm.",
                    "B.B.", "E.A.", "E.C.", "Fit Cyl", "Fit Glob");
        auto print_row = [&](const std::string& name, const EvalReport& r) {
            std::snprintf(line, sizeof(line),
                          "%-14s %7.4f %8.3f %7.4f %8.3f %8.5f %9.5f %9.5f", name.c_str(),
                          r.seg_iou, r.normal_err_deg, r.bb_acc, r.ea_err_deg, r.ec_err,
                          r.fit_cyl, r.fit_glob);
            std::printf("%s\n", line);
        };
        for (const Row& r : rows) print_row(r.name, r.rep);
        print_row("mean", agg);
        if (agg.unmatched_gt > 0)
            std::printf("unmatched gt segments: %d\n", agg.unmatched_gt);
    }
    return 0;
}

// ------------------------------------------------------------- sketch ----

struct SketchOpts {
    std::string input;
    int resolution = 256;
};

int run_sketch(const GlobalOpts& g, const SketchOpts& o, RunManifest& manifest) {
    if (o.resolution < 16)
        throw UsageError("sketch: resolution must be at least 16");
    const fs::path out_dir = ensure_out(g.out);
    const auto cylinders = read_cylinders_json(o.input);
    manifest.inputs.push_back(o.input);

    int written = 0;
    for (std::size_t k = 0; k < cylinders.size(); ++k) {
        const SketchProfile& profile = cylinders[k].sketch;
        if (profile.empty()) {
            std::cerr << "warning: cylinder " << k << " has no sketch, skipped\n";
            continue;
        }
        const DistanceField2D field = rasterize_field(profile, o.resolution);
        const SketchProfile extracted = marching_squares(field);
        char buf[32];
        std::snprintf(buf, sizeof(buf), "sketch_%02zu", k);
        const fs::path jpath = out_dir / (std::string(buf) + ".json");
        const fs::path spath = out_dir / (std::string(buf) + ".svg");
        write_sketch_json(jpath.string(), extracted);
        write_sketch_svg(spath.string(), extracted);
        manifest.outputs.push_back(jpath.filename().string());
        manifest.outputs.push_back(spath.filename().string());
        ++written;
    }
    if (written == 0) throw DataError("sketch: no cylinder carried a sketch");
    std::cout << "extracted " << written << " sketches\n";
    return 0;
}

// -------------------------------------------------------------- recon ----

struct ReconOpts {
    std::string input;
};

int run_recon(const GlobalOpts& g, const ReconOpts& o, RunManifest& manifest) {
    const fs::path out_dir = ensure_out(g.out);
    const auto cylinders = read_cylinders_json(o.input);
    manifest.inputs.push_back(o.input);

    std::vector<TriMesh> scene;
    for (std::size_t k = 0; k < cylinders.size(); ++k) {
        try {
            TriMesh mesh = extrusion_mesh(cylinders[k]);
            char buf[32];
            std::snprintf(buf, sizeof(buf), "part_%02zu.obj", k);
            const fs::path path = out_dir / buf;
            std::ofstream f(path, std::ios::binary);
            if (!f) throw DataError("cannot open for writing: " + path.string());
            write_obj(f, mesh);
            manifest.outputs.push_back(path.filename().string());
            scene.push_back(std::move(mesh));
        } catch (const DegenerateError& e) {
            std::cerr << "warning: cylinder " << k << " skipped: " << e.what() << "\n";
        }
    }
    if (scene.empty()) throw DegenerateError("recon: no cylinder produced a mesh");

    const fs::path scene_path = out_dir / "scene.obj";
    std::ofstream f(scene_path, std::ios::binary);
    if (!f) throw DataError("cannot open for writing: " + scene_path.string());
    write_obj(f, scene);
    manifest.outputs.push_back("scene.obj");
    std::cout << "wrote " << scene.size() << " parts and scene.obj\n";
    return 0;
}

// -------------------------------------------------------- noise-sweep ----

struct NoiseSweepOpts {
    std::string input; // optional labeled cloud; GT cylinders found next to it
    std::vector<double> sigmas{0.0, 0.02, 0.04, 0.06, 0.08, 0.10};
    int trials = 20;
};

int run_noise_sweep(const GlobalOpts& g, const NoiseSweepOpts& o, RunManifest& manifest) {
    if (o.trials < 1) throw UsageError("noise-sweep: trials must be positive");
    const fs::path out_dir = ensure_out(g.out);

    OrientedPointCloud cloud;
    Vec3 gt_axis;
    if (o.input.empty()) {
        const SynthModel fixture = l_profile_model(derive_seed(g.seed, 11));
        cloud = fixture.cloud;
        gt_axis = fixture.gt.at(0).axis;
    } else {
        cloud = read_cloud_text(o.input);
        manifest.inputs.push_back(o.input);
        const auto gt = read_cylinders_json(sibling_cylinders(fs::path(o.input)).string());
        if (gt.size() != 1)
            throw DataError("noise-sweep: fixture must contain exactly one segment");
        gt_axis = gt.at(0).axis;
        if (segment_count(cloud.seg) != 1 || !cloud.has_labels())
            throw DataError("noise-sweep: fixture must be a labeled single-segment cloud");
    }

    const fs::path csv_path = out_dir / "noise_sweep.csv";
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw DataError("cannot open for writing: " + csv_path.string());
    csv << "sigma,mean_axis_err_deg,trials\n";

    std::printf("%8s %18s\n", "sigma", "axis err (deg)");
    char buf[96];
    for (double sigma : o.sigmas) {
        double total = 0.0;
        for (int t = 0; t < o.trials; ++t) {
            OrientedPointCloud noisy = cloud;
            perturb_normals(noisy, sigma,
                            derive_seed(g.seed, 7000 + static_cast<std::uint64_t>(t)));
            const FitResult fr = fit_segment(noisy, 0);
            total += axis_angle_deg(fr.cylinder.axis, gt_axis);
        }
        const double mean = total / o.trials;
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d\n", sigma, mean, o.trials);
        csv << buf;
        std::printf("%8.3f %18.5f\n", sigma, mean);
    }
    manifest.outputs.push_back("noise_sweep.csv");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"extrusion-cylinder decomposition toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "master random seed")->capture_default_str();
    app.add_option("--jobs", g.jobs, "worker threads for per-model commands")
        ->capture_default_str();
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_option("--format", g.format, "report format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();

    GenOpts gen;
    CLI::App* cmd_gen = app.add_subcommand("gen", "generate a synthetic dataset");
    cmd_gen->add_option("--models", gen.models, "number of models")->capture_default_str();
    cmd_gen->add_option("--k", gen.k, "fixed segment count (0: draw per model)")
        ->capture_default_str();
    cmd_gen->add_option("--k-min", gen.k_min, "segment count lower bound")->capture_default_str();
    cmd_gen->add_option("--k-max", gen.k_max, "segment count upper bound")->capture_default_str();
    cmd_gen->add_option("--points", gen.points, "samples per model")->capture_default_str();
    cmd_gen->add_option("--noise", gen.noise, "along-normal displacement bound")
        ->capture_default_str();
    cmd_gen->add_option("--single-frac", gen.single_frac,
                        "fraction of single-segment models when --k is 0")
        ->capture_default_str();

    FitOpts fit;
    CLI::App* cmd_fit = app.add_subcommand("fit", "fit cylinders to a labeled cloud");
    cmd_fit->add_option("--input", fit.input, "labeled point-cloud text file")->required();
    cmd_fit->add_flag("--estimate-normals", fit.estimate_normals,
                      "replace file normals with a PCA estimate");
    cmd_fit->add_flag("--allow-degenerate", fit.allow_degenerate,
                      "skip degenerate segments instead of failing");
    cmd_fit->add_option("--normals-k", fit.normals_k, "PCA neighborhood size")
        ->capture_default_str();
    cmd_fit->add_option("--resolution", fit.resolution, "sketch extraction grid")
        ->capture_default_str();

    DecomposeOpts dec;
    CLI::App* cmd_dec = app.add_subcommand("decompose", "segment a cloud by axis voting");
    cmd_dec->add_option("--input", dec.input, "point-cloud text file")->required();
    cmd_dec->add_flag("--estimate-normals", dec.estimate_normals,
                      "replace file normals with a PCA estimate");
    cmd_dec->add_flag("--refine", dec.refine,
                      "post-process labels, scale and extent");
    cmd_dec->add_option("--normals-k", dec.normals_k, "PCA neighborhood size")
        ->capture_default_str();
    cmd_dec->add_option("--resolution", dec.resolution, "sketch extraction grid")
        ->capture_default_str();
    cmd_dec->add_option("--epsilon", dec.hough.epsilon, "orthogonality vote threshold")
        ->capture_default_str();
    cmd_dec->add_option("--tangent-samples", dec.hough.tangent_samples,
                        "axis hypotheses per point")
        ->capture_default_str();
    cmd_dec->add_option("--directions", dec.hough.directions, "accumulator resolution")
        ->capture_default_str();
    cmd_dec->add_option("--bandwidth", dec.hough.bandwidth, "mean-shift bandwidth (rad)")
        ->capture_default_str();
    cmd_dec->add_option("--max-modes", dec.hough.max_modes, "segment cap")
        ->capture_default_str();

    EvalOpts ev;
    CLI::App* cmd_eval = app.add_subcommand("eval", "score predictions against ground truth");
    cmd_eval->add_option("--pred", ev.pred, "prediction directory")->required();
    cmd_eval->add_option("--gt", ev.gt, "ground-truth directory")->required();

    SketchOpts sk;
    CLI::App* cmd_sketch = app.add_subcommand("sketch", "re-extract sketch curves");
    cmd_sketch->add_option("--input", sk.input, "cylinders JSON")->required();
    cmd_sketch->add_option("--resolution", sk.resolution, "marching-squares grid")
        ->capture_default_str();

    ReconOpts rc;
    CLI::App* cmd_recon = app.add_subcommand("recon", "export OBJ meshes");
    cmd_recon->add_option("--input", rc.input, "cylinders JSON")->required();

    NoiseSweepOpts ns;
    CLI::App* cmd_ns = app.add_subcommand("noise-sweep", "axis error vs normal noise");
    cmd_ns->add_option("--input", ns.input,
                       "labeled single-segment cloud (default: built-in fixture)");
    cmd_ns->add_option("--sigmas", ns.sigmas, "noise levels")->delimiter(',');
    cmd_ns->add_option("--trials", ns.trials, "seeds per noise level")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(ErrorKind::usage);
    }

    const auto t0 = std::chrono::steady_clock::now();
    try {
        int rc_code = 0;
        RunManifest manifest;
        if (cmd_gen->parsed()) {
            manifest = start_manifest("gen", argc, argv, g);
            rc_code = run_gen(g, gen, manifest);
        } else if (cmd_fit->parsed()) {
            manifest = start_manifest("fit", argc, argv, g);
            rc_code = run_fit(g, fit, manifest);
        } else if (cmd_dec->parsed()) {
            manifest = start_manifest("decompose", argc, argv, g);
            rc_code = run_decompose(g, dec, manifest);
        } else if (cmd_eval->parsed()) {
            manifest = start_manifest("eval", argc, argv, g);
            rc_code = run_eval(g, ev, manifest);
        } else if (cmd_sketch->parsed()) {
            manifest = start_manifest("sketch", argc, argv, g);
            rc_code = run_sketch(g, sk, manifest);
        } else if (cmd_recon->parsed()) {
            manifest = start_manifest("recon", argc, argv, g);
            rc_code = run_recon(g, rc, manifest);
        } else if (cmd_ns->parsed()) {
            manifest = start_manifest("noise-sweep", argc, argv, g);
            rc_code = run_noise_sweep(g, ns, manifest);
        }
        finish_manifest(manifest, ensure_out(g.out), t0);
        return rc_code;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ErrorKind::data);
    }
}
