#pragma once

#include <array>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sightline/scene.hpp"

namespace sightline {

/// All constants of the three-term viewpoint energy plus solver settings.
struct EnergyConfig {
    double lambda0 = 1.0;  // E1 distance-term weight
    double lambda1 = 1.0;  // E1 angle-term weight
    double theta0 = std::numbers::pi / 4.0;      // preferred view angles;
    double theta1 = 3.0 * std::numbers::pi / 4.0;  // theta0 + theta1 = pi
    double dmin_factor = 0.5;  // preferred distance range, multiples of d_alpha
    double dmax_factor = 1.5;
    std::array<double, 3> omega{1.0, 100.0, 10.0};
    double neighbor_radius_factor = 7.0;  // occluder filter, multiples of d_alpha*
    int starts = 10;
    int max_iterations = 1000;
    double alpha = kAlphaInfinity;  // alpha-shape parameter; infinity = hull
    /// Swaps the view-occlusion pair weight 1/(e^t1 + 1) for
    /// e^t1/(e^t1 + 1) (experimental alternative; off by default).
    bool e3_theta1_inverted = false;

    // Quasi-Newton settings.
    double armijo_c = 1e-4;
    double backtrack_factor = 0.5;
    double fd_step_factor = 1e-4;    // finite-difference step, d_alpha* multiples
    double grad_tolerance = 1e-6;    // scaled by max(1, |E|)
    double step_tol_factor = 1e-9;   // minimal step, d_alpha* multiples
    double min_altitude = 1.0;       // meters; positions are clamped to z >= this
    std::uint64_t seed = 0;          // perturbation seed for retry starts

    void validate() const;
};

/// Per-plane projections needed by the energy terms.
struct PlaneCache {
    Polygon2 target_hull;  // alpha-shape of all target corners
    double d_alpha = 0.0;
    std::vector<Polygon2> target_polys;  // one per target cuboid
    std::vector<Vec2> target_centers;    // projected cuboid centers
    std::vector<Polygon2> occluder_polys;
    std::vector<Vec2> occluder_centers;
};

struct OptimizationProblem {
    std::vector<Cuboid> target_cuboids;
    std::vector<Cuboid> occluder_cuboids;
    std::array<PlaneCache, 3> planes;  // XY, XZ, YZ
    Point3 target_centroid;            // volume-weighted cuboid centers
    double d_alpha_star = 0.0;         // max of the per-plane d_alpha
    EnergyConfig config;

    static OptimizationProblem build(std::vector<Cuboid> targets, std::vector<Cuboid> occluders,
                                     const EnergyConfig& config);

    const PlaneCache& plane(Plane p) const { return planes[static_cast<std::size_t>(p)]; }
};

/// Occluder set = cuboids of every other building whose centroid lies within
/// neighbor_radius_factor * d_alpha* of the target centroid.
OptimizationProblem filter_neighbors(const Scene& scene, std::string_view target_id,
                                     const EnergyConfig& config);

/// One plane's E1 sub-term: lambda0*e^((d-dmin)(d-dmax)) + lambda1*e^((t-t0)^2+(t-t1)^2)
/// with dmin/dmax taken as factors of this plane's d_alpha.
double e1_subterm(double distance, double theta, double d_alpha, const EnergyConfig& config);

/// Elevation of p over the horizon seen from the target centroid.
double elevation_angle(const Point3& p, const OptimizationProblem& problem);

double energy_e1(const Point3& p, const OptimizationProblem& problem);
double energy_e2(const Point3& p, const OptimizationProblem& problem);
double energy_e3(const Point3& p, const OptimizationProblem& problem);
double total_energy(const Point3& p, const OptimizationProblem& problem);

/// Angular interval of directions from p towards a polygon; `full` when p is
/// inside and every direction hits it.
struct AngleInterval {
    double lo = 0.0;
    double hi = 0.0;  // hi >= lo, hi - lo <= 2*pi
    bool full = false;

    double width() const { return full ? 2.0 * std::numbers::pi : hi - lo; }
};

AngleInterval view_interval(const Vec2& p, const Polygon2& poly);

/// Overlap length of two circular intervals.
double interval_overlap(const AngleInterval& a, const AngleInterval& b);

/// One plane's view-occlusion sum over (target i, other j) pairs.
double e3_plane(const Vec2& p, const PlaneCache& cache, const EnergyConfig& config);

/// `starts` points at 3D distance d_alpha* from the target centroid, 60 deg
/// above the ground, azimuths uniformly spaced from 0.
std::vector<Point3> initial_positions(const OptimizationProblem& problem);

struct ViewpointResult {
    Point3 position;
    double energy = 0.0;
    std::array<double, 3> term_energies{};  // E1, E2, E3
    int start_index = 0;
    int iterations = 0;
    bool converged = false;
};

/// Independent quasi-Newton descents from every start (parallel), then the
/// minimum-energy run whose endpoint is outside all occluders. Runs ending
/// inside an occluder are retried once from a perturbed start; throws
/// NoValidViewpoint when none qualifies.
ViewpointResult optimize_viewpoint(const OptimizationProblem& problem, int threads = 0);
ViewpointResult optimize_viewpoint(const Scene& scene, std::string_view target_id,
                                   const EnergyConfig& config, int threads = 0);

/// Single descent from one start; exposed for convergence diagnostics.
/// energy_trace (optional) receives the accepted energy after every iteration.
ViewpointResult descend_from(const Point3& start, int start_index,
                             const OptimizationProblem& problem,
                             std::vector<double>* energy_trace = nullptr);

}  // namespace sightline
