#pragma once

#include <string>

#include <json.hpp>

#include "sightline/gestures.hpp"
#include "sightline/raster.hpp"
#include "sightline/solar.hpp"
#include "sightline/sweep.hpp"
#include "sightline/viewopt.hpp"

namespace sightline {

/// Engine-wide configuration: documented defaults, strict parsing (unknown
/// keys are rejected).
struct EngineConfig {
    struct Raster {
        int resolution = 1000;
        double fov_y = std::numbers::pi / 3.0;
        Camera::Projection sun_projection = Camera::Projection::Orthographic;
    } raster;

    EnergyConfig energy;

    struct Sweep {
        std::vector<double> scale_factors{0.8, 1.0, 1.2};
        int histogram_bins = 10;
        double eye_height = 1.7;
        double path_step = 20.0;
    } sweep;

    struct Gestures {
        double selection_threshold = 0.5;
        double stability_threshold_deg = 15.0;
        double confirm_window_seconds = 1.0;
    } gestures;

    struct Solar {
        std::string date = "2020-06-21";
        std::string window_start = "08:00";
        std::string window_end = "18:00";
        int step_minutes = 30;
        double utc_offset_hours = 0.0;
    } solar;

    SweepConfig sweep_config(int threads = 0) const;
    GestureConfig gesture_config() const;
    ScheduleOptions schedule_options() const;
    Date solar_date() const;

    void validate() const;
};

EngineConfig default_config();

nlohmann::json config_to_json(const EngineConfig& config);
EngineConfig config_from_json(const nlohmann::json& j);
EngineConfig load_config(const std::string& path);

}  // namespace sightline
