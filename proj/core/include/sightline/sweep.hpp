#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sightline/solar.hpp"

namespace sightline {

struct SweepConfig {
    std::vector<double> scale_factors{0.8, 1.0, 1.2};
    int histogram_bins = 10;
    double eye_height = 1.7;   // meters added to path viewpoints
    double path_step = 20.0;   // arc-length resampling step, meters
    int resolution = 1000;
    double fov_y = std::numbers::pi / 3.0;  // visibility camera
    int threads = 0;

    void validate() const;
};

/// One of the 6 orientations x 3 scales design grid cells.
struct DesignVariation {
    std::string candidate_id;
    int orientation_index = 0;  // 0..5, yaw offset = index * pi/3
    int scale_index = 0;        // 0..2

    double yaw_offset() const { return orientation_index * std::numbers::pi / 3.0; }
};

/// The full grid in (orientation, scale) lexicographic order; always 18 rows.
std::vector<DesignVariation> enumerate_variations(const Scene& scene,
                                                  std::string_view candidate_id,
                                                  const SweepConfig& config);

struct VariationSeries {
    DesignVariation variation;
    double scale_factor = 1.0;
    std::vector<std::optional<double>> shading;     // one per sun sample; null = night/failed
    std::vector<std::optional<double>> visibility;  // one per path viewpoint
};

struct Histogram {
    std::vector<long long> bins;
    long long total = 0;  // number of binned (non-null) samples
};

/// An arbitrary candidate pose relative to the proposed design.
struct CandidatePose {
    double yaw_offset = 0.0;
    double scale = 1.0;
};

struct SelectedDesign {
    CandidatePose pose;
    std::optional<int> orientation_index;  // set when the pose matches the grid
    std::optional<int> scale_index;
    std::optional<int> time_index;  // PCP polyline highlight
    std::optional<int> path_index;
    std::vector<std::optional<double>> shading;
    std::vector<std::optional<double>> visibility;
};

/// The PCP data payload: per-variation series, per-candidate distributions,
/// and the optional selected-design polyline.
struct AnalysisReport {
    int schema_version = 1;
    std::string candidate_id;
    Date date;
    ScheduleOptions schedule;
    std::vector<SunSample> sun_samples;
    std::vector<Point3> viewpoints;  // resampled path, original order
    std::vector<double> scale_factors;
    std::vector<VariationSeries> variations;
    Histogram shading_hist;
    Histogram visibility_hist;
    std::optional<SelectedDesign> selected;
    long long failed_samples = 0;
};

/// Persistent per-sample cache, stored as a JSON sidecar next to the scene.
class SweepCache {
  public:
    SweepCache() = default;
    explicit SweepCache(std::string fingerprint) : fingerprint_(std::move(fingerprint)) {}

    static SweepCache load(const std::string& path);
    void save(const std::string& path) const;

    const std::string& fingerprint() const { return fingerprint_; }
    /// Drops all entries unless the fingerprint matches.
    void rekey(const std::string& fingerprint);

    std::optional<std::optional<double>> lookup(const std::string& key) const;
    void store(const std::string& key, std::optional<double> value);
    std::size_t size() const { return entries_.size(); }

  private:
    std::string fingerprint_;
    std::map<std::string, std::optional<double>> entries_;
};

/// FNV-1a fingerprint of everything a sweep result depends on.
std::string sweep_fingerprint(const std::string& scene_json, const Date& date,
                              const ScheduleOptions& schedule, const SweepConfig& config);

/// Arc-length resampling at the given step; endpoints preserved.
std::vector<Point3> resample_path(std::span<const Point3> path, double step);

/// 18 variations x (21 shading samples + |path| visibility samples), plus the
/// two per-candidate histograms. Failed samples become nulls.
AnalysisReport run_sweep(const Scene& scene, std::string_view candidate_id, const Date& date,
                         const ScheduleOptions& schedule, const SweepConfig& config,
                         SweepCache* cache = nullptr);

/// Recomputes only the selected-design series for an edited pose on a copy of
/// the report; equals a fresh computation of the same pose bit-exactly.
AnalysisReport recompute(const AnalysisReport& report, const Scene& scene,
                         const CandidatePose& pose, const SweepConfig& config);

void export_report(const AnalysisReport& report, const std::string& path);
AnalysisReport import_report(const std::string& path);

}  // namespace sightline
