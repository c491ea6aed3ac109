// Command-line front end: scene analysis, viewpoint optimization, design
// sweeps, and gesture trace replay. Machine-readable JSON on stdout (or
// --out), structured errors on stderr.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sightline/config.hpp"
#include "sightline/errors.hpp"
#include "sightline/gestures.hpp"
#include "sightline/raster.hpp"
#include "sightline/scene_io.hpp"
#include "sightline/solar.hpp"
#include "sightline/sweep.hpp"
#include "sightline/viewopt.hpp"

namespace {

using nlohmann::json;
using namespace sightline;

struct GlobalOptions {
    std::string config_path;
    int threads = 0;
    bool deterministic = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

EngineConfig resolve_config(const GlobalOptions& global) {
    std::string path = global.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("SIGHTLINE_CONFIG")) path = env;
    }
    EngineConfig config = path.empty() ? default_config() : load_config(path);
    if (global.seed_set) config.energy.seed = global.seed;
    return config;
}

void emit(const json& payload, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << payload.dump(2) << "\n";
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw Error(ErrorKind::Io, "cannot write output file '" + out_path + "'");
    out << payload.dump(2) << "\n";
    std::cout << "wrote " << out_path << "\n";
}

std::string timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&t));
    return buf;
}

Point3 parse_point(const std::string& text) {
    Point3 p;
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf", &p.x, &p.y, &p.z) != 3)
        throw Error(ErrorKind::Validation, "expected x,y,z but got '" + text + "'");
    return p;
}

json point_json(const Point3& p) { return json::array({p.x, p.y, p.z}); }

int run_analyze(const GlobalOptions& global, const std::string& scene_path,
                const std::string& target, const std::string& viewpoint_text,
                const std::string& sun_text, int resolution_override,
                const std::string& out_path, const std::string& dump_mask) {
    const EngineConfig config = resolve_config(global);
    const Scene scene = load_scene(scene_path);
    const int resolution =
        resolution_override > 0 ? resolution_override : config.raster.resolution;

    json result;
    result["scene"] = scene_path;
    result["target"] = target;
    result["resolution"] = resolution;

    if (!viewpoint_text.empty()) {
        const Point3 viewpoint = parse_point(viewpoint_text);
        VisibilityOptions opts;
        opts.fov_y = config.raster.fov_y;
        opts.threads = global.threads;
        result["viewpoint"] = point_json(viewpoint);
        result["visibility"] = visibility(scene, viewpoint, target, resolution, opts);
        if (!dump_mask.empty()) {
            Camera cam;
            cam.position = viewpoint;
            cam.look_at = scene.building(target).centroid();
            cam.fov_y = config.raster.fov_y;
            write_ppm(render_mask(scene, cam, target, RenderMode::FullScene, resolution,
                                  {global.threads}),
                      dump_mask);
            result["mask"] = dump_mask;
        }
    } else {
        const CivilDateTime when = CivilDateTime::parse(sun_text);
        const SunSample sun = sun_direction(scene.origin.lat, scene.origin.lon, when);
        ShadingOptions opts;
        opts.projection = config.raster.sun_projection;
        opts.threads = global.threads;
        result["timestamp"] = when.to_string();
        result["sun"] = json{{"azimuth", sun.azimuth}, {"elevation", sun.elevation}};
        result["shading"] = shading(scene, target, sun.direction(), resolution, opts);
    }
    emit(result, out_path);
    return 0;
}

int run_optimize(const GlobalOptions& global, const std::string& scene_path,
                 const std::string& target, const std::string& out_path) {
    const EngineConfig config = resolve_config(global);
    const Scene scene = load_scene(scene_path);
    const ViewpointResult r =
        optimize_viewpoint(scene, target, config.energy, global.threads);

    json result;
    result["scene"] = scene_path;
    result["target"] = target;
    result["position"] = point_json(r.position);
    result["energy"] = r.energy;
    result["terms"] = json{{"e1", r.term_energies[0]},
                           {"e2", r.term_energies[1]},
                           {"e3", r.term_energies[2]}};
    result["start_index"] = r.start_index;
    result["iterations"] = r.iterations;
    result["converged"] = r.converged;
    if (!global.deterministic) result["generated_at"] = timestamp_now();
    emit(result, out_path);
    return 0;
}

int run_sweep_cmd(const GlobalOptions& global, const std::string& scene_path,
                  const std::string& candidate, const std::string& date_text,
                  bool use_cache, int select_orientation, int select_scale, int select_time,
                  int select_path, const std::string& out_path) {
    const EngineConfig config = resolve_config(global);
    const Scene scene = load_scene(scene_path);
    Date date = date_text.empty() ? config.solar_date() : Date::parse(date_text);
    date.utc_offset_hours = config.solar.utc_offset_hours;
    const ScheduleOptions schedule = config.schedule_options();
    const SweepConfig sweep_cfg = config.sweep_config(global.threads);

    SweepCache cache;
    const std::string cache_path = scene_path + ".sweep-cache.json";
    SweepCache* cache_ptr = nullptr;
    if (use_cache) {
        cache = SweepCache::load(cache_path);
        cache.rekey(
            sweep_fingerprint(scene_to_json(scene).dump(), date, schedule, sweep_cfg));
        cache_ptr = &cache;
    }

    AnalysisReport report = run_sweep(scene, candidate, date, schedule, sweep_cfg, cache_ptr);
    if (use_cache) cache.save(cache_path);

    if (select_orientation >= 0 && select_scale >= 0) {
        if (select_orientation > 5 || select_scale > 2)
            throw Error(ErrorKind::Validation, "selection indices out of the 6x3 grid");
        CandidatePose pose{select_orientation * std::numbers::pi / 3.0,
                           sweep_cfg.scale_factors[static_cast<std::size_t>(select_scale)]};
        report = recompute(report, scene, pose, sweep_cfg);
        if (report.selected) {
            if (select_time >= 0) report.selected->time_index = select_time;
            if (select_path >= 0) report.selected->path_index = select_path;
        }
    }

    if (out_path.empty()) {
        std::cout << "sweep complete: " << report.variations.size() << " variations, "
                  << report.sun_samples.size() << " sun samples, " << report.viewpoints.size()
                  << " path viewpoints\n";
        export_report(report, scene_path + ".report.json");
        std::cout << "wrote " << scene_path + ".report.json" << "\n";
    } else {
        export_report(report, out_path);
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int run_gestures(const GlobalOptions& global, const std::string& trace_path,
                 const std::string& scene_path, const std::string& out_path) {
    const EngineConfig config = resolve_config(global);
    const Scene scene = load_scene(scene_path);

    std::vector<SceneObject> objects;
    for (const auto& b : scene.buildings) objects.push_back({b.id, b.centroid()});

    const std::vector<GestureFrame> frames = load_trace(trace_path);
    GestureSession session(objects, config.gesture_config());
    std::vector<GestureEvent> events;
    for (const auto& frame : frames) {
        auto batch = session.push(frame);
        events.insert(events.end(), batch.begin(), batch.end());
    }
    auto tail = session.finish();
    events.insert(events.end(), tail.begin(), tail.end());

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw Error(ErrorKind::Io, "cannot write output file '" + out_path + "'");
        out = &file;
    }
    write_events_ndjson(events, *out);
    *out << json{{"event", "diagnostics"},
                 {"skipped_frames", session.skipped_frames()},
                 {"events", events.size()}}
                .dump()
         << "\n";
    if (!out_path.empty()) std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Urban-design analytics engine: landmark visibility, candidate shading, "
                 "viewpoint optimization, and gesture replay"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOptions global;
    app.add_option("--config", global.config_path,
                   "Engine config JSON (or SIGHTLINE_CONFIG env var)");
    app.add_option("--threads", global.threads, "Worker threads (0 = hardware)");
    app.add_flag("--deterministic", global.deterministic,
                 "Omit wall-clock timestamps from outputs");
    auto* seed_opt = app.add_option("--seed", global.seed, "Seed for stochastic retries");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Single visibility or shading measurement");
    std::string scene_path, target, viewpoint_text, sun_text, out_path, dump_mask;
    int resolution_override = 0;
    analyze->add_option("--scene", scene_path, "Scene JSON file")->required();
    analyze->add_option("--target", target, "Target building id")->required();
    auto* vp = analyze->add_option("--viewpoint", viewpoint_text, "Observer position x,y,z");
    auto* sun = analyze->add_option("--sun", sun_text,
                                    "Sun timestamp YYYY-MM-DDTHH:MM[:SS][+HH:MM]");
    vp->excludes(sun);
    sun->excludes(vp);
    analyze->add_option("--resolution", resolution_override, "Render resolution (per side)");
    analyze->add_option("--out", out_path, "Output JSON path (stdout otherwise)");
    analyze->add_option("--dump-mask", dump_mask, "Write the full-scene mask as PPM");

    // optimize
    auto* optimize = app.add_subcommand("optimize", "Occlusion-minimizing viewpoint search");
    std::string opt_scene, opt_target, opt_out;
    optimize->add_option("--scene", opt_scene, "Scene JSON file")->required();
    optimize->add_option("--target", opt_target, "Target building id")->required();
    optimize->add_option("--out", opt_out, "Output JSON path (stdout otherwise)");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "18-variation shading/visibility sweep");
    std::string sweep_scene, sweep_candidate, sweep_date, sweep_out;
    bool sweep_cache = false;
    int sel_orient = -1, sel_scale = -1, sel_time = -1, sel_path = -1;
    sweep_cmd->add_option("--scene", sweep_scene, "Scene JSON file")->required();
    sweep_cmd->add_option("--candidate", sweep_candidate, "Candidate building id")->required();
    sweep_cmd->add_option("--date", sweep_date, "Analysis date YYYY-MM-DD");
    sweep_cmd->add_option("--out", sweep_out, "Report JSON path");
    sweep_cmd->add_flag("--cache", sweep_cache, "Use the sweep cache sidecar");
    sweep_cmd->add_option("--select-orientation", sel_orient, "Selected orientation index 0-5");
    sweep_cmd->add_option("--select-scale", sel_scale, "Selected scale index 0-2");
    sweep_cmd->add_option("--select-time", sel_time, "Highlighted time index");
    sweep_cmd->add_option("--select-path", sel_path, "Highlighted path index");

    // gestures
    auto* gestures_cmd = app.add_subcommand("gestures", "Gesture stream tools");
    auto* replay = gestures_cmd->add_subcommand("replay", "Replay a recorded gesture trace");
    std::string trace_path, gest_scene, gest_out;
    replay->add_option("--trace", trace_path, "Gesture trace NDJSON file")->required();
    replay->add_option("--scene", gest_scene, "Scene JSON file")->required();
    replay->add_option("--out", gest_out, "Events NDJSON path (stdout otherwise)");
    gestures_cmd->require_subcommand(1);

    // config
    auto* config_cmd = app.add_subcommand("config", "Configuration tools");
    auto* dump = config_cmd->add_subcommand("dump-defaults", "Print the default config JSON");
    config_cmd->require_subcommand(1);

    try {
        app.parse(argc, argv);
        global.seed_set = seed_opt->count() > 0;

        if (*analyze) {
            if (viewpoint_text.empty() == sun_text.empty())
                throw sightline::Error(sightline::ErrorKind::Validation,
                                       "analyze needs exactly one of --viewpoint / --sun");
            return run_analyze(global, scene_path, target, viewpoint_text, sun_text,
                               resolution_override, out_path, dump_mask);
        }
        if (*optimize) return run_optimize(global, opt_scene, opt_target, opt_out);
        if (*sweep_cmd)
            return run_sweep_cmd(global, sweep_scene, sweep_candidate, sweep_date, sweep_cache,
                                 sel_orient, sel_scale, sel_time, sel_path, sweep_out);
        if (*replay) return run_gestures(global, trace_path, gest_scene, gest_out);
        if (*dump) {
            std::cout << config_to_json(resolve_config(global)).dump(2) << "\n";
            return 0;
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const sightline::Error& e) {
        std::cout << "error: " << e.what() << "\n";
        std::cerr << json{{"error", {{"kind", e.kind_name()}, {"message", e.what()}}}}.dump()
                  << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cout << "error: " << e.what() << "\n";
        std::cerr << json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump()
                  << "\n";
        return 1;
    }
}
