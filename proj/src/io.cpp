#include "cylfit/io.hpp"

#include "cylfit/error.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace cylfit {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open for reading: " + path);
    return f;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary); // binary: keep LF endings everywhere
    if (!f) throw DataError("cannot open for writing: " + path);
    return f;
}

json parse_json_file(const std::string& path) {
    std::ifstream f = open_in(path);
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

void require_schema(const json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("schema") || j["schema"] != 1)
        throw DataError(path + ": missing or unsupported schema tag");
}

Vec3 vec3_from(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3)
        throw DataError(what + ": expected a 3-vector");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json vec3_to(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json loops_to(const SketchProfile& profile) {
    json loops = json::array();
    for (const auto& loop : profile.loops) {
        json l = json::array();
        for (const Vec2& p : loop) l.push_back(json::array({p.x(), p.y()}));
        loops.push_back(std::move(l));
    }
    return loops;
}

SketchProfile loops_from(const json& j, const std::string& what) {
    if (!j.is_array()) throw DataError(what + ": loops must be an array");
    std::vector<std::vector<Vec2>> loops;
    for (const auto& jl : j) {
        if (!jl.is_array()) throw DataError(what + ": loop must be an array");
        std::vector<Vec2> loop;
        for (const auto& jp : jl) {
            if (!jp.is_array() || jp.size() != 2)
                throw DataError(what + ": vertex must be [x, y]");
            loop.emplace_back(jp[0].get<double>(), jp[1].get<double>());
        }
        loops.push_back(std::move(loop));
    }
    if (loops.empty()) return SketchProfile{};
    return SketchProfile::from_loops(std::move(loops));
}

void dump_json_file(const std::string& path, const json& j) {
    std::ofstream f = open_out(path);
    f << j.dump(2) << '\n';
    if (!f) throw DataError("write failed: " + path);
}

} // namespace

OrientedPointCloud read_cloud_text(const std::string& path) {
    std::ifstream f = open_in(path);
    OrientedPointCloud cloud;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ss(line);
        double x, y, z, nx, ny, nz;
        int seg, bb;
        if (!(ss >> x)) continue; // blank or comment-only line
        if (!(ss >> y >> z >> nx >> ny >> nz >> seg >> bb))
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": expected 8 fields (x y z nx ny nz seg bb)");
        std::string extra;
        if (ss >> extra)
            throw DataError(path + ":" + std::to_string(line_no) + ": trailing fields");
        if (seg < -1)
            throw DataError(path + ":" + std::to_string(line_no) + ": bad segment id");
        if (bb < -1 || bb > 1)
            throw DataError(path + ":" + std::to_string(line_no) + ": bad base/barrel label");

        cloud.points.emplace_back(x, y, z);
        Vec3 n(nx, ny, nz);
        const double len = n.norm();
        if (len < 1e-9) {
            cloud.normals.emplace_back(Vec3::Zero());
            cloud.normal_valid.push_back(false);
        } else {
            cloud.normals.emplace_back(n / len);
            cloud.normal_valid.push_back(true);
        }
        cloud.seg.push_back(seg);
        cloud.bb.push_back(bb);
    }
    if (cloud.points.empty()) throw DataError(path + ": no points");
    return cloud;
}

void write_cloud_text(const std::string& path, const OrientedPointCloud& cloud) {
    std::ofstream f = open_out(path);
    f << "# x y z nx ny nz seg bb\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points[i];
        Vec3 n = cloud.normals.empty() ? Vec3::Zero() : cloud.normals[i];
        if (!cloud.normal_valid.empty() && !cloud.normal_valid[i]) n.setZero();
        const int seg = cloud.seg.empty() ? kUnlabeled : cloud.seg[i];
        const int bb = cloud.bb.empty() ? kUnlabeled : cloud.bb[i];
        f << fmt_double(p.x()) << ' ' << fmt_double(p.y()) << ' ' << fmt_double(p.z())
          << ' ' << fmt_double(n.x()) << ' ' << fmt_double(n.y()) << ' '
          << fmt_double(n.z()) << ' ' << seg << ' ' << bb << '\n';
    }
    if (!f) throw DataError("write failed: " + path);
}

std::vector<ExtrusionCylinder> read_cylinders_json(const std::string& path) {
    const json j = parse_json_file(path);
    require_schema(j, path);
    if (!j.contains("cylinders") || !j["cylinders"].is_array())
        throw DataError(path + ": missing cylinders array");
    std::vector<ExtrusionCylinder> out;
    for (const auto& jc : j["cylinders"]) {
        ExtrusionCylinder c;
        c.axis = vec3_from(jc.at("axis"), path + ": axis");
        c.center = vec3_from(jc.at("center"), path + ": center");
        c.scale = jc.at("scale").get<double>();
        const auto& ext = jc.at("extent");
        if (!ext.is_array() || ext.size() != 2)
            throw DataError(path + ": extent must be [r_min, r_max]");
        c.r_min = ext[0].get<double>();
        c.r_max = ext[1].get<double>();
        c.op = jc.value("op", std::string("unknown"));
        if (jc.contains("sketch"))
            c.sketch = loops_from(jc.at("sketch").at("loops"), path + ": sketch");
        out.push_back(std::move(c));
    }
    return out;
}

void write_cylinders_json(const std::string& path,
                          const std::vector<ExtrusionCylinder>& cylinders) {
    json jc = json::array();
    for (const ExtrusionCylinder& c : cylinders) {
        json j;
        j["axis"] = vec3_to(c.axis);
        j["center"] = vec3_to(c.center);
        j["scale"] = c.scale;
        j["extent"] = json::array({c.r_min, c.r_max});
        j["op"] = c.op;
        j["sketch"] = json{{"schema", 1}, {"loops", loops_to(c.sketch)}};
        jc.push_back(std::move(j));
    }
    dump_json_file(path, json{{"schema", 1}, {"cylinders", std::move(jc)}});
}

SketchProfile read_sketch_json(const std::string& path) {
    const json j = parse_json_file(path);
    require_schema(j, path);
    if (!j.contains("loops")) throw DataError(path + ": missing loops");
    return loops_from(j["loops"], path);
}

void write_sketch_json(const std::string& path, const SketchProfile& profile) {
    dump_json_file(path, json{{"schema", 1}, {"loops", loops_to(profile)}});
}

void write_sketch_svg(const std::string& path, const SketchProfile& profile) {
    std::ofstream f = open_out(path);
    // Normalized sketch domain with margin; y flipped so +y points up.
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"512\" height=\"512\" "
         "viewBox=\"-1.2 -1.2 2.4 2.4\">\n";
    f << "<g transform=\"scale(1,-1)\">\n";
    for (const auto& loop : profile.loops) {
        if (loop.empty()) continue;
        f << "<path fill-rule=\"evenodd\" fill=\"#9ecae1\" fill-opacity=\"0.6\" "
             "stroke=\"#08306b\" stroke-width=\"0.01\" d=\"";
        for (std::size_t i = 0; i < loop.size(); ++i)
            f << (i == 0 ? "M " : "L ") << fmt_double(loop[i].x()) << ' '
              << fmt_double(loop[i].y()) << ' ';
        f << "Z\"/>\n";
    }
    f << "</g>\n</svg>\n";
    if (!f) throw DataError("write failed: " + path);
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
    json j;
    j["schema"] = 1;
    j["command"] = manifest.command;
    j["flags"] = manifest.flags;
    j["seed"] = manifest.seed;
    j["inputs"] = manifest.inputs;
    j["outputs"] = manifest.outputs;
    j["version"] = manifest.version;
    j["wall_time_s"] = manifest.wall_time_s;
    dump_json_file(path, j);
}

} // namespace cylfit
