#include "sightline/config.hpp"

#include <cstdio>
#include <fstream>

#include "sightline/errors.hpp"

namespace sightline {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> known,
                         const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const auto& k : known)
            if (key == k) ok = true;
        if (!ok)
            throw Error(ErrorKind::Validation,
                        "unknown config key '" + key + "' in " + where);
    }
}

int parse_minutes(const std::string& hhmm) {
    int h = 0, m = 0;
    if (std::sscanf(hhmm.c_str(), "%d:%d", &h, &m) != 2 || h < 0 || h > 23 || m < 0 || m > 59)
        throw Error(ErrorKind::Validation, "cannot parse time-of-day '" + hhmm + "'");
    return h * 60 + m;
}

}  // namespace

SweepConfig EngineConfig::sweep_config(int threads) const {
    SweepConfig cfg;
    cfg.scale_factors = sweep.scale_factors;
    cfg.histogram_bins = sweep.histogram_bins;
    cfg.eye_height = sweep.eye_height;
    cfg.path_step = sweep.path_step;
    cfg.resolution = raster.resolution;
    cfg.fov_y = raster.fov_y;
    cfg.threads = threads;
    return cfg;
}

GestureConfig EngineConfig::gesture_config() const {
    GestureConfig cfg;
    cfg.selection_threshold = gestures.selection_threshold;
    cfg.stability_threshold = gestures.stability_threshold_deg * std::numbers::pi / 180.0;
    cfg.confirm_window = gestures.confirm_window_seconds;
    return cfg;
}

ScheduleOptions EngineConfig::schedule_options() const {
    return {parse_minutes(solar.window_start), parse_minutes(solar.window_end),
            solar.step_minutes};
}

Date EngineConfig::solar_date() const {
    Date d = Date::parse(solar.date);
    d.utc_offset_hours = solar.utc_offset_hours;
    return d;
}

void EngineConfig::validate() const {
    if (raster.resolution <= 0 || raster.resolution % 10 != 0)
        throw Error(ErrorKind::Validation, "raster.resolution must be divisible by 10");
    if (!(raster.fov_y > 0.0 && raster.fov_y < std::numbers::pi))
        throw Error(ErrorKind::Validation, "raster.fov_y must be in (0, pi)");
    energy.validate();
    SweepConfig sc = sweep_config();
    sc.validate();
    if (!(gestures.selection_threshold > 0.0))
        throw Error(ErrorKind::Validation, "gestures.selection_threshold must be positive");
    if (!(gestures.stability_threshold_deg > 0.0))
        throw Error(ErrorKind::Validation, "gestures.stability_threshold must be positive");
    schedule_options();  // parses the window
    solar_date();
}

EngineConfig default_config() { return EngineConfig{}; }

json config_to_json(const EngineConfig& c) {
    json j;
    j["raster"] = json{
        {"resolution", c.raster.resolution},
        {"fov_y", c.raster.fov_y},
        {"sun_projection",
         c.raster.sun_projection == Camera::Projection::Orthographic ? "orthographic"
                                                                     : "perspective"}};
    j["energy"] = json{{"lambda0", c.energy.lambda0},
                       {"lambda1", c.energy.lambda1},
                       {"theta0", c.energy.theta0},
                       {"theta1", c.energy.theta1},
                       {"dmin_factor", c.energy.dmin_factor},
                       {"dmax_factor", c.energy.dmax_factor},
                       {"omega", c.energy.omega},
                       {"neighbor_radius_factor", c.energy.neighbor_radius_factor},
                       {"starts", c.energy.starts},
                       {"max_iterations", c.energy.max_iterations},
                       {"e3_theta1_inverted", c.energy.e3_theta1_inverted},
                       {"min_altitude", c.energy.min_altitude},
                       // null = infinite alpha, i.e. the convex hull
                       {"alpha", std::isinf(c.energy.alpha) ? json(nullptr)
                                                            : json(c.energy.alpha)}};
    j["sweep"] = json{{"scale_factors", c.sweep.scale_factors},
                      {"histogram_bins", c.sweep.histogram_bins},
                      {"eye_height", c.sweep.eye_height},
                      {"path_step", c.sweep.path_step}};
    j["gestures"] = json{{"selection_threshold", c.gestures.selection_threshold},
                         {"stability_threshold_deg", c.gestures.stability_threshold_deg},
                         {"confirm_window_seconds", c.gestures.confirm_window_seconds}};
    j["solar"] = json{{"date", c.solar.date},
                      {"window_start", c.solar.window_start},
                      {"window_end", c.solar.window_end},
                      {"step_minutes", c.solar.step_minutes},
                      {"utc_offset_hours", c.solar.utc_offset_hours}};
    return j;
}

EngineConfig config_from_json(const json& j) {
    EngineConfig c;
    reject_unknown_keys(j, {"raster", "energy", "sweep", "gestures", "solar"}, "config");

    if (j.contains("raster")) {
        const json& r = j.at("raster");
        reject_unknown_keys(r, {"resolution", "fov_y", "sun_projection"}, "raster");
        if (r.contains("resolution")) c.raster.resolution = r.at("resolution").get<int>();
        if (r.contains("fov_y")) c.raster.fov_y = r.at("fov_y").get<double>();
        if (r.contains("sun_projection")) {
            const std::string p = r.at("sun_projection").get<std::string>();
            if (p == "orthographic")
                c.raster.sun_projection = Camera::Projection::Orthographic;
            else if (p == "perspective")
                c.raster.sun_projection = Camera::Projection::Perspective;
            else
                throw Error(ErrorKind::Validation, "unknown sun_projection '" + p + "'");
        }
    }
    if (j.contains("energy")) {
        const json& e = j.at("energy");
        reject_unknown_keys(e,
                            {"lambda0", "lambda1", "theta0", "theta1", "dmin_factor",
                             "dmax_factor", "omega", "neighbor_radius_factor", "starts",
                             "max_iterations", "e3_theta1_inverted", "min_altitude", "alpha"},
                            "energy");
        if (e.contains("lambda0")) c.energy.lambda0 = e.at("lambda0").get<double>();
        if (e.contains("lambda1")) c.energy.lambda1 = e.at("lambda1").get<double>();
        if (e.contains("theta0")) c.energy.theta0 = e.at("theta0").get<double>();
        if (e.contains("theta1")) c.energy.theta1 = e.at("theta1").get<double>();
        if (e.contains("dmin_factor")) c.energy.dmin_factor = e.at("dmin_factor").get<double>();
        if (e.contains("dmax_factor")) c.energy.dmax_factor = e.at("dmax_factor").get<double>();
        if (e.contains("omega")) c.energy.omega = e.at("omega").get<std::array<double, 3>>();
        if (e.contains("neighbor_radius_factor"))
            c.energy.neighbor_radius_factor = e.at("neighbor_radius_factor").get<double>();
        if (e.contains("starts")) c.energy.starts = e.at("starts").get<int>();
        if (e.contains("max_iterations"))
            c.energy.max_iterations = e.at("max_iterations").get<int>();
        if (e.contains("e3_theta1_inverted"))
            c.energy.e3_theta1_inverted = e.at("e3_theta1_inverted").get<bool>();
        if (e.contains("min_altitude")) c.energy.min_altitude = e.at("min_altitude").get<double>();
        if (e.contains("alpha"))
            c.energy.alpha = e.at("alpha").is_null() ? kAlphaInfinity
                                                     : e.at("alpha").get<double>();
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        reject_unknown_keys(s, {"scale_factors", "histogram_bins", "eye_height", "path_step"},
                            "sweep");
        if (s.contains("scale_factors"))
            c.sweep.scale_factors = s.at("scale_factors").get<std::vector<double>>();
        if (s.contains("histogram_bins"))
            c.sweep.histogram_bins = s.at("histogram_bins").get<int>();
        if (s.contains("eye_height")) c.sweep.eye_height = s.at("eye_height").get<double>();
        if (s.contains("path_step")) c.sweep.path_step = s.at("path_step").get<double>();
    }
    if (j.contains("gestures")) {
        const json& g = j.at("gestures");
        reject_unknown_keys(
            g, {"selection_threshold", "stability_threshold_deg", "confirm_window_seconds"},
            "gestures");
        if (g.contains("selection_threshold"))
            c.gestures.selection_threshold = g.at("selection_threshold").get<double>();
        if (g.contains("stability_threshold_deg"))
            c.gestures.stability_threshold_deg = g.at("stability_threshold_deg").get<double>();
        if (g.contains("confirm_window_seconds"))
            c.gestures.confirm_window_seconds = g.at("confirm_window_seconds").get<double>();
    }
    if (j.contains("solar")) {
        const json& s = j.at("solar");
        reject_unknown_keys(
            s, {"date", "window_start", "window_end", "step_minutes", "utc_offset_hours"},
            "solar");
        if (s.contains("date")) c.solar.date = s.at("date").get<std::string>();
        if (s.contains("window_start"))
            c.solar.window_start = s.at("window_start").get<std::string>();
        if (s.contains("window_end")) c.solar.window_end = s.at("window_end").get<std::string>();
        if (s.contains("step_minutes")) c.solar.step_minutes = s.at("step_minutes").get<int>();
        if (s.contains("utc_offset_hours"))
            c.solar.utc_offset_hours = s.at("utc_offset_hours").get<double>();
    }
    c.validate();
    return c;
}

EngineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Validation, std::string("config parse error: ") + e.what());
    }
    return config_from_json(j);
}

}  // namespace sightline
