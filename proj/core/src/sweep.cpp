#include "sightline/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "sightline/errors.hpp"
#include "sightline/gestures.hpp"

namespace sightline {

using nlohmann::json;

void SweepConfig::validate() const {
    if (scale_factors.size() != 3)
        throw Error(ErrorKind::Validation, "sweep needs exactly three scale factors");
    for (double s : scale_factors)
        if (!(s > 0.0)) throw Error(ErrorKind::Validation, "scale factors must be positive");
    if (histogram_bins < 1)
        throw Error(ErrorKind::Validation, "histogram_bins must be >= 1");
    if (!(path_step > 0.0)) throw Error(ErrorKind::Validation, "path_step must be positive");
    if (resolution <= 0 || resolution % 10 != 0)
        throw Error(ErrorKind::Validation, "sweep resolution must be divisible by 10");
}

std::vector<DesignVariation> enumerate_variations(const Scene& scene,
                                                  std::string_view candidate_id,
                                                  const SweepConfig& config) {
    config.validate();
    scene.building(candidate_id);  // NotFound check
    std::vector<DesignVariation> out;
    out.reserve(18);
    for (int o = 0; o < 6; ++o)
        for (int s = 0; s < 3; ++s)
            out.push_back({std::string(candidate_id), o, s});
    return out;
}

std::vector<Point3> resample_path(std::span<const Point3> path, double step) {
    if (path.size() < 2)
        throw Error(ErrorKind::Validation, "resample_path needs at least 2 path points");
    if (!(step > 0.0)) throw Error(ErrorKind::Validation, "path step must be positive");

    std::vector<double> cumulative{0.0};
    for (std::size_t i = 1; i < path.size(); ++i)
        cumulative.push_back(cumulative.back() + (path[i] - path[i - 1]).norm());
    const double total = cumulative.back();
    if (total == 0.0) return {path.front(), path.back()};

    auto point_at = [&](double s) {
        std::size_t seg = 1;
        while (seg < cumulative.size() - 1 && cumulative[seg] < s) ++seg;
        const double seg_len = cumulative[seg] - cumulative[seg - 1];
        const double t = seg_len > 0.0 ? (s - cumulative[seg - 1]) / seg_len : 0.0;
        return path[seg - 1] + (path[seg] - path[seg - 1]) * t;
    };

    std::vector<Point3> out;
    const double eps = 1e-9 * std::max(total, step);
    for (double s = 0.0; s < total - eps; s += step) out.push_back(point_at(s));
    out.push_back(path.back());
    return out;
}

// ---------------------------------------------------------------------------
// Sweep execution
// ---------------------------------------------------------------------------

namespace {

Building pose_candidate(const Building& base, const CandidatePose& pose) {
    Manipulation rotate;
    rotate.kind = Manipulation::Kind::Rotate;
    rotate.rotation_angle = pose.yaw_offset;
    Manipulation scale;
    scale.kind = Manipulation::Kind::Scale;
    scale.scale_factors = {pose.scale, pose.scale, pose.scale};
    return apply_manipulation(apply_manipulation(base, rotate), scale);
}

struct SeriesPair {
    std::vector<std::optional<double>> shading;
    std::vector<std::optional<double>> visibility;
    long long failed = 0;
};

std::string cache_key(std::string_view candidate, const CandidatePose& pose,
                      std::string_view kind, std::size_t index) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s|yaw=%.17g|scale=%.17g|%s|%zu",
                  std::string(candidate).c_str(), pose.yaw_offset, pose.scale,
                  std::string(kind).c_str(), index);
    return buf;
}

SeriesPair compute_pose_series(const Scene& scene, std::string_view candidate_id,
                               const CandidatePose& pose,
                               std::span<const SunSample> sun_samples,
                               std::span<const Point3> viewpoints,
                               const SweepConfig& config, SweepCache* cache) {
    Scene posed = scene;
    posed.building(candidate_id) = pose_candidate(scene.building(candidate_id), pose);

    SeriesPair out;
    out.shading.resize(sun_samples.size());
    out.visibility.resize(viewpoints.size());

    ShadingOptions shading_opts;
    shading_opts.threads = config.threads;
    for (std::size_t i = 0; i < sun_samples.size(); ++i) {
        const std::string key = cache_key(candidate_id, pose, "shading", i);
        if (cache) {
            if (auto hit = cache->lookup(key)) {
                out.shading[i] = *hit;
                continue;
            }
        }
        std::optional<double> value;
        if (sun_samples[i].elevation >= 0.0) {
            try {
                value = shading(posed, candidate_id, sun_samples[i].direction(),
                                config.resolution, shading_opts);
            } catch (const Error&) {
                ++out.failed;
            }
        }
        out.shading[i] = value;
        if (cache) cache->store(key, value);
    }

    if (!viewpoints.empty()) {
        const Building& landmark = scene.landmark();
        VisibilityOptions vis_opts;
        vis_opts.fov_y = config.fov_y;
        vis_opts.threads = config.threads;
        for (std::size_t i = 0; i < viewpoints.size(); ++i) {
            const std::string key = cache_key(candidate_id, pose, "visibility", i);
            if (cache) {
                if (auto hit = cache->lookup(key)) {
                    out.visibility[i] = *hit;
                    continue;
                }
            }
            std::optional<double> value;
            const Point3 eye = viewpoints[i] + Vec3{0.0, 0.0, config.eye_height};
            try {
                value = visibility(posed, eye, landmark.id, config.resolution, vis_opts);
            } catch (const Error&) {
                ++out.failed;
            }
            out.visibility[i] = value;
            if (cache) cache->store(key, value);
        }
    }
    return out;
}

Histogram build_histogram(const std::vector<VariationSeries>& variations, int bins,
                          bool use_shading) {
    Histogram h;
    h.bins.assign(static_cast<std::size_t>(bins), 0);
    for (const auto& v : variations) {
        for (const auto& sample : (use_shading ? v.shading : v.visibility)) {
            if (!sample) continue;
            const int b = std::min(static_cast<int>(*sample * bins), bins - 1);
            ++h.bins[static_cast<std::size_t>(std::max(0, b))];
            ++h.total;
        }
    }
    return h;
}

}  // namespace

AnalysisReport run_sweep(const Scene& scene, std::string_view candidate_id, const Date& date,
                         const ScheduleOptions& schedule, const SweepConfig& config,
                         SweepCache* cache) {
    config.validate();
    const auto variations = enumerate_variations(scene, candidate_id, config);
    if (!scene.path.empty()) scene.landmark();  // visibility requested: must exist

    AnalysisReport report;
    report.candidate_id = std::string(candidate_id);
    report.date = date;
    report.schedule = schedule;
    report.scale_factors = config.scale_factors;
    report.sun_samples = sun_schedule(scene.origin.lat, scene.origin.lon, date, schedule);
    report.viewpoints = scene.path.size() >= 2 ? resample_path(scene.path, config.path_step)
                                               : scene.path;

    for (const auto& variation : variations) {
        VariationSeries series;
        series.variation = variation;
        series.scale_factor =
            config.scale_factors[static_cast<std::size_t>(variation.scale_index)];
        const CandidatePose pose{variation.yaw_offset(), series.scale_factor};
        SeriesPair pair = compute_pose_series(scene, candidate_id, pose, report.sun_samples,
                                              report.viewpoints, config, cache);
        series.shading = std::move(pair.shading);
        series.visibility = std::move(pair.visibility);
        report.failed_samples += pair.failed;
        report.variations.push_back(std::move(series));
    }

    report.shading_hist = build_histogram(report.variations, config.histogram_bins, true);
    report.visibility_hist = build_histogram(report.variations, config.histogram_bins, false);
    return report;
}

AnalysisReport recompute(const AnalysisReport& report, const Scene& scene,
                         const CandidatePose& pose, const SweepConfig& config) {
    AnalysisReport out = report;  // cached variation series stay untouched

    SelectedDesign selected;
    selected.pose = pose;
    for (const auto& v : report.variations) {
        const double scale =
            report.scale_factors[static_cast<std::size_t>(v.variation.scale_index)];
        if (std::abs(v.variation.yaw_offset() - pose.yaw_offset) < 1e-12 &&
            std::abs(scale - pose.scale) < 1e-12) {
            selected.orientation_index = v.variation.orientation_index;
            selected.scale_index = v.variation.scale_index;
            break;
        }
    }
    if (out.selected) {
        selected.time_index = out.selected->time_index;
        selected.path_index = out.selected->path_index;
    }

    SeriesPair pair = compute_pose_series(scene, report.candidate_id, pose,
                                          report.sun_samples, report.viewpoints, config,
                                          nullptr);
    selected.shading = std::move(pair.shading);
    selected.visibility = std::move(pair.visibility);
    out.failed_samples += pair.failed;
    out.selected = std::move(selected);
    return out;
}

// ---------------------------------------------------------------------------
// Cache
// ---------------------------------------------------------------------------

namespace {

std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

}  // namespace

std::string sweep_fingerprint(const std::string& scene_json, const Date& date,
                              const ScheduleOptions& schedule, const SweepConfig& config) {
    std::string blob = scene_json;
    blob += '|';
    blob += date.to_string();
    char buf[256];
    std::snprintf(buf, sizeof buf, "|%g|%d|%d|%d|%d|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g",
                  date.utc_offset_hours, schedule.start_minutes, schedule.end_minutes,
                  schedule.step_minutes, config.resolution, config.eye_height,
                  config.path_step, config.fov_y, config.scale_factors[0],
                  config.scale_factors[1], config.scale_factors[2]);
    blob += buf;
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(blob)));
    return buf;
}

SweepCache SweepCache::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) return SweepCache{};
    json j;
    try {
        in >> j;
        SweepCache cache;
        cache.fingerprint_ = j.at("fingerprint").get<std::string>();
        for (const auto& [key, value] : j.at("entries").items())
            cache.entries_[key] =
                value.is_null() ? std::nullopt : std::optional<double>(value.get<double>());
        return cache;
    } catch (const json::exception&) {
        return SweepCache{};  // unreadable cache is just a miss
    }
}

void SweepCache::save(const std::string& path) const {
    json entries = json::object();
    for (const auto& [key, value] : entries_) {
        if (value)
            entries[key] = *value;
        else
            entries[key] = nullptr;
    }
    json j{{"fingerprint", fingerprint_}, {"entries", entries}};
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write cache file '" + path + "'");
    out << j.dump(2) << "\n";
}

void SweepCache::rekey(const std::string& fingerprint) {
    if (fingerprint_ != fingerprint) {
        entries_.clear();
        fingerprint_ = fingerprint;
    }
}

std::optional<std::optional<double>> SweepCache::lookup(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void SweepCache::store(const std::string& key, std::optional<double> value) {
    entries_[key] = value;
}

// ---------------------------------------------------------------------------
// Report JSON
// ---------------------------------------------------------------------------

namespace {

json optional_series_json(const std::vector<std::optional<double>>& series) {
    json arr = json::array();
    for (const auto& v : series) {
        if (v)
            arr.push_back(*v);
        else
            arr.push_back(nullptr);
    }
    return arr;
}

std::vector<std::optional<double>> optional_series_from_json(const json& arr) {
    std::vector<std::optional<double>> out;
    for (const auto& v : arr)
        out.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
    return out;
}

json point_json(const Point3& p) { return json::array({p.x, p.y, p.z}); }

Point3 point_from_json(const json& j) {
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

std::string minutes_label(int minutes) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d", minutes / 60, minutes % 60);
    return buf;
}

json histogram_json(const Histogram& h) {
    return json{{"bins", h.bins}, {"total", h.total}};
}

Histogram histogram_from_json(const json& j) {
    Histogram h;
    h.bins = j.at("bins").get<std::vector<long long>>();
    h.total = j.at("total").get<long long>();
    return h;
}

json report_to_json(const AnalysisReport& r) {
    json j;
    j["schema_version"] = r.schema_version;
    j["candidate"] = r.candidate_id;
    j["date"] = r.date.to_string();
    j["utc_offset_hours"] = r.date.utc_offset_hours;

    json time_axis;
    time_axis["arc"] = true;  // the PCP bends this axis into a sunrise-sundown arc
    json labels = json::array(), elevations = json::array();
    for (std::size_t i = 0; i < r.sun_samples.size(); ++i) {
        labels.push_back(
            minutes_label(r.schedule.start_minutes + static_cast<int>(i) * r.schedule.step_minutes));
        elevations.push_back(r.sun_samples[i].elevation);
    }
    time_axis["labels"] = labels;
    time_axis["sun_elevations"] = elevations;
    time_axis["step_minutes"] = r.schedule.step_minutes;

    json path_axis;
    json vps = json::array(), order = json::array();
    for (std::size_t i = 0; i < r.viewpoints.size(); ++i) {
        vps.push_back(point_json(r.viewpoints[i]));
        order.push_back(i);
    }
    path_axis["viewpoints"] = vps;
    path_axis["order"] = order;  // original street order along the path

    json orient_axis;
    json offsets = json::array();
    for (int o = 0; o < 6; ++o) offsets.push_back(o * std::numbers::pi / 3.0);
    orient_axis["yaw_offsets"] = offsets;

    j["axes"] = json{{"time", time_axis},
                     {"path", path_axis},
                     {"orientation", orient_axis},
                     {"scale", json{{"factors", r.scale_factors}}},
                     {"candidate", json{{"ids", json::array({r.candidate_id})}}}};

    json variations = json::array();
    for (const auto& v : r.variations) {
        variations.push_back(json{{"orientation_index", v.variation.orientation_index},
                                  {"scale_index", v.variation.scale_index},
                                  {"yaw_offset", v.variation.yaw_offset()},
                                  {"scale", v.scale_factor},
                                  {"shading", optional_series_json(v.shading)},
                                  {"visibility", optional_series_json(v.visibility)}});
    }
    j["variations"] = variations;
    j["histograms"] = json{{"shading", histogram_json(r.shading_hist)},
                           {"visibility", histogram_json(r.visibility_hist)}};

    if (r.selected) {
        const SelectedDesign& s = *r.selected;
        json sj{{"yaw_offset", s.pose.yaw_offset},
                {"scale", s.pose.scale},
                {"shading", optional_series_json(s.shading)},
                {"visibility", optional_series_json(s.visibility)}};
        sj["orientation_index"] =
            s.orientation_index ? json(*s.orientation_index) : json(nullptr);
        sj["scale_index"] = s.scale_index ? json(*s.scale_index) : json(nullptr);
        sj["time_index"] = s.time_index ? json(*s.time_index) : json(nullptr);
        sj["path_index"] = s.path_index ? json(*s.path_index) : json(nullptr);
        j["selected"] = sj;
    } else {
        j["selected"] = nullptr;
    }
    j["failed_samples"] = r.failed_samples;
    j["schedule"] = json{{"start_minutes", r.schedule.start_minutes},
                         {"end_minutes", r.schedule.end_minutes},
                         {"step_minutes", r.schedule.step_minutes}};
    return j;
}

AnalysisReport report_from_json_value(const json& j) {
    AnalysisReport r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != 1)
        throw Error(ErrorKind::Validation, "unsupported report schema version");
    r.candidate_id = j.at("candidate").get<std::string>();
    r.date = Date::parse(j.at("date").get<std::string>());
    r.date.utc_offset_hours = j.at("utc_offset_hours").get<double>();
    r.schedule.start_minutes = j.at("schedule").at("start_minutes").get<int>();
    r.schedule.end_minutes = j.at("schedule").at("end_minutes").get<int>();
    r.schedule.step_minutes = j.at("schedule").at("step_minutes").get<int>();
    r.scale_factors = j.at("axes").at("scale").at("factors").get<std::vector<double>>();
    for (const auto& vp : j.at("axes").at("path").at("viewpoints"))
        r.viewpoints.push_back(point_from_json(vp));
    const auto& elevations = j.at("axes").at("time").at("sun_elevations");
    for (std::size_t i = 0; i < elevations.size(); ++i) {
        SunSample s;
        s.elevation = elevations.at(i).get<double>();
        r.sun_samples.push_back(s);
    }
    for (const auto& vj : j.at("variations")) {
        VariationSeries v;
        v.variation.candidate_id = r.candidate_id;
        v.variation.orientation_index = vj.at("orientation_index").get<int>();
        v.variation.scale_index = vj.at("scale_index").get<int>();
        v.scale_factor = vj.at("scale").get<double>();
        v.shading = optional_series_from_json(vj.at("shading"));
        v.visibility = optional_series_from_json(vj.at("visibility"));
        r.variations.push_back(std::move(v));
    }
    r.shading_hist = histogram_from_json(j.at("histograms").at("shading"));
    r.visibility_hist = histogram_from_json(j.at("histograms").at("visibility"));
    if (!j.at("selected").is_null()) {
        const auto& sj = j.at("selected");
        SelectedDesign s;
        s.pose.yaw_offset = sj.at("yaw_offset").get<double>();
        s.pose.scale = sj.at("scale").get<double>();
        if (!sj.at("orientation_index").is_null())
            s.orientation_index = sj.at("orientation_index").get<int>();
        if (!sj.at("scale_index").is_null()) s.scale_index = sj.at("scale_index").get<int>();
        if (!sj.at("time_index").is_null()) s.time_index = sj.at("time_index").get<int>();
        if (!sj.at("path_index").is_null()) s.path_index = sj.at("path_index").get<int>();
        s.shading = optional_series_from_json(sj.at("shading"));
        s.visibility = optional_series_from_json(sj.at("visibility"));
        r.selected = std::move(s);
    }
    r.failed_samples = j.at("failed_samples").get<long long>();
    return r;
}

}  // namespace

void export_report(const AnalysisReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write report file '" + path + "'");
    out << report_to_json(report).dump(2) << "\n";
    if (!out) throw Error(ErrorKind::Io, "failed writing report file '" + path + "'");
}

AnalysisReport import_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open report file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Validation, std::string("report parse error: ") + e.what());
    }
    return report_from_json_value(j);
}

}  // namespace sightline
