#include "sightline/viewopt.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sightline/errors.hpp"
#include "sightline/parallel.hpp"

namespace sightline {

namespace {

constexpr double kPi = std::numbers::pi;

Polygon2 projected_hull(const Cuboid& box, Plane plane) {
    std::vector<Vec2> pts;
    pts.reserve(8);
    for (const auto& c : box.corners()) pts.push_back(project_point(c, plane));
    return convex_hull(std::move(pts));
}

Point3 cuboid_set_centroid(std::span<const Cuboid> cuboids) {
    Point3 sum;
    double total = 0.0;
    for (const auto& c : cuboids) {
        sum = sum + c.center * c.volume();
        total += c.volume();
    }
    return total > 0.0 ? sum / total : Point3{};
}

}  // namespace

void EnergyConfig::validate() const {
    if (std::abs(theta0 + theta1 - kPi) > 1e-9)
        throw Error(ErrorKind::Validation, "energy config requires theta0 + theta1 = pi");
    if (lambda0 < 0.0 || lambda1 < 0.0 || omega[0] < 0.0 || omega[1] < 0.0 || omega[2] < 0.0)
        throw Error(ErrorKind::Validation, "energy weights must be non-negative");
    if (!(dmin_factor < dmax_factor))
        throw Error(ErrorKind::Validation, "dmin_factor must be below dmax_factor");
    if (starts < 1) throw Error(ErrorKind::Validation, "at least one start is required");
    if (max_iterations < 1) throw Error(ErrorKind::Validation, "max_iterations must be >= 1");
    if (!(neighbor_radius_factor > 0.0))
        throw Error(ErrorKind::Validation, "neighbor_radius_factor must be positive");
    if (!(alpha > 0.0)) throw Error(ErrorKind::Validation, "alpha must be positive");
}

OptimizationProblem OptimizationProblem::build(std::vector<Cuboid> targets,
                                               std::vector<Cuboid> occluders,
                                               const EnergyConfig& config) {
    config.validate();
    if (targets.empty())
        throw Error(ErrorKind::EmptyInput, "optimization problem needs target cuboids");

    OptimizationProblem problem;
    problem.target_cuboids = std::move(targets);
    problem.occluder_cuboids = std::move(occluders);
    problem.config = config;
    problem.target_centroid = cuboid_set_centroid(problem.target_cuboids);

    for (std::size_t pi = 0; pi < kAllPlanes.size(); ++pi) {
        const Plane plane = kAllPlanes[pi];
        PlaneCache& cache = problem.planes[pi];
        cache.target_hull =
            alpha_shape(project_cuboids(problem.target_cuboids, plane), config.alpha);
        cache.d_alpha = max_diagonal(cache.target_hull);
        for (const auto& box : problem.target_cuboids) {
            cache.target_polys.push_back(projected_hull(box, plane));
            cache.target_centers.push_back(project_point(box.center, plane));
        }
        for (const auto& box : problem.occluder_cuboids) {
            cache.occluder_polys.push_back(projected_hull(box, plane));
            cache.occluder_centers.push_back(project_point(box.center, plane));
        }
        problem.d_alpha_star = std::max(problem.d_alpha_star, cache.d_alpha);
    }
    return problem;
}

OptimizationProblem filter_neighbors(const Scene& scene, std::string_view target_id,
                                     const EnergyConfig& config) {
    const Building& target = scene.building(target_id);

    // d_alpha* from the target alone decides the neighborhood radius.
    double d_alpha_star = 0.0;
    for (const Plane plane : kAllPlanes) {
        const Polygon2 hull = alpha_shape(project_cuboids(target.cuboids, plane), config.alpha);
        d_alpha_star = std::max(d_alpha_star, max_diagonal(hull));
    }

    const Point3 target_centroid = target.centroid();
    std::vector<Cuboid> occluders;
    for (const auto& b : scene.buildings) {
        if (b.id == target.id) continue;
        const double dist = (b.centroid() - target_centroid).norm();
        if (dist <= config.neighbor_radius_factor * d_alpha_star)
            occluders.insert(occluders.end(), b.cuboids.begin(), b.cuboids.end());
    }
    return OptimizationProblem::build(target.cuboids, std::move(occluders), config);
}

// ---------------------------------------------------------------------------
// Energy terms
// ---------------------------------------------------------------------------

double e1_subterm(double distance, double theta, double d_alpha, const EnergyConfig& config) {
    const double dmin = config.dmin_factor * d_alpha;
    const double dmax = config.dmax_factor * d_alpha;
    const double dt0 = theta - config.theta0;
    const double dt1 = theta - config.theta1;
    return config.lambda0 * std::exp((distance - dmin) * (distance - dmax)) +
           config.lambda1 * std::exp(dt0 * dt0 + dt1 * dt1);
}

double elevation_angle(const Point3& p, const OptimizationProblem& problem) {
    const Vec3 d = p - problem.target_centroid;
    return std::atan2(d.z, std::hypot(d.x, d.y));
}

double energy_e1(const Point3& p, const OptimizationProblem& problem) {
    const double theta = elevation_angle(p, problem);
    double sum = 0.0;
    for (std::size_t pi = 0; pi < kAllPlanes.size(); ++pi) {
        const PlaneCache& cache = problem.planes[pi];
        const double d = signed_distance(project_point(p, kAllPlanes[pi]), cache.target_hull);
        sum += e1_subterm(d, theta, cache.d_alpha, problem.config);
    }
    return sum;
}

double energy_e2(const Point3& p, const OptimizationProblem& problem) {
    double sum = 0.0;
    for (std::size_t i = 0; i < problem.occluder_cuboids.size(); ++i) {
        double inner = 0.0;
        for (std::size_t pi = 0; pi < kAllPlanes.size(); ++pi) {
            const PlaneCache& cache = problem.planes[pi];
            inner += std::exp(
                signed_distance(project_point(p, kAllPlanes[pi]), cache.occluder_polys[i]));
        }
        sum += 1.0 / inner;
    }
    return sum;
}

AngleInterval view_interval(const Vec2& p, const Polygon2& poly) {
    if (point_strictly_inside(p, poly)) return {.lo = 0.0, .hi = 2.0 * kPi, .full = true};
    const Vec2 to_mean = poly.vertex_mean() - p;
    const double ref = std::atan2(to_mean.y, to_mean.x);
    double lo = 0.0, hi = 0.0;
    for (const auto& v : poly.vertices) {
        const Vec2 d = v - p;
        const double a = std::atan2(d.y, d.x);
        const double delta = std::remainder(a - ref, 2.0 * kPi);
        lo = std::min(lo, delta);
        hi = std::max(hi, delta);
    }
    return {.lo = ref + lo, .hi = ref + hi, .full = false};
}

double interval_overlap(const AngleInterval& a, const AngleInterval& b) {
    if (a.full && b.full) return 2.0 * kPi;
    if (a.full) return b.width();
    if (b.full) return a.width();
    double best = 0.0;
    for (const double shift : {-2.0 * kPi, 0.0, 2.0 * kPi}) {
        const double lo = std::max(a.lo, b.lo + shift);
        const double hi = std::min(a.hi, b.hi + shift);
        best = std::max(best, hi - lo);
    }
    return best;
}

double e3_plane(const Vec2& p, const PlaneCache& cache, const EnergyConfig& config) {
    const std::size_t n = cache.target_polys.size();
    const std::size_t m = cache.occluder_polys.size();

    auto poly_at = [&](std::size_t j) -> const Polygon2& {
        return j < n ? cache.target_polys[j] : cache.occluder_polys[j - n];
    };
    auto center_at = [&](std::size_t j) -> const Vec2& {
        return j < n ? cache.target_centers[j] : cache.occluder_centers[j - n];
    };

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const AngleInterval target_iv = view_interval(p, cache.target_polys[i]);
        for (std::size_t j = 0; j < n + m; ++j) {
            if (j == i) continue;
            const Vec2 to_target = cache.target_centers[i] - center_at(j);
            const Vec2 to_p = p - center_at(j);
            const double theta1 = angle_between(to_target, to_p);

            double theta2;
            if (target_iv.full) {
                // Viewpoint inside the projected target: maximal overlap.
                theta2 = kPi;
            } else {
                theta2 = interval_overlap(target_iv, view_interval(p, poly_at(j)));
            }
            const double et1 = std::exp(theta1);
            const double weight = config.e3_theta1_inverted ? et1 / (et1 + 1.0)
                                                            : 1.0 / (et1 + 1.0);
            sum += weight * std::exp(theta2);
        }
    }
    return sum;
}

double energy_e3(const Point3& p, const OptimizationProblem& problem) {
    double sum = 0.0;
    for (std::size_t pi = 0; pi < kAllPlanes.size(); ++pi)
        sum += e3_plane(project_point(p, kAllPlanes[pi]), problem.planes[pi], problem.config);
    return sum;
}

double total_energy(const Point3& p, const OptimizationProblem& problem) {
    const auto& w = problem.config.omega;
    return w[0] * energy_e1(p, problem) + w[1] * energy_e2(p, problem) +
           w[2] * energy_e3(p, problem);
}

// ---------------------------------------------------------------------------
// Multi-start quasi-Newton minimization
// ---------------------------------------------------------------------------

std::vector<Point3> initial_positions(const OptimizationProblem& problem) {
    const double r = problem.d_alpha_star;
    const double elev = kPi / 3.0;  // 60 degrees over the ground
    const double horiz = r * std::cos(elev);
    const double height = r * std::sin(elev);
    std::vector<Point3> starts;
    starts.reserve(static_cast<std::size_t>(problem.config.starts));
    for (int k = 0; k < problem.config.starts; ++k) {
        const double az = 2.0 * kPi * k / problem.config.starts;
        starts.push_back(problem.target_centroid +
                         Vec3{horiz * std::cos(az), horiz * std::sin(az), height});
    }
    return starts;
}

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 identity3() {
    return {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
}

Vec3 mat_vec(const Mat3& m, const Vec3& v) {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
}

double vec_at(const Vec3& v, int i) { return i == 0 ? v.x : (i == 1 ? v.y : v.z); }

Point3 clamp_altitude(Point3 p, double min_z) {
    p.z = std::max(p.z, min_z);
    return p;
}

// Central-difference gradient with one-sided fallback near non-finite regions.
bool fd_gradient(const OptimizationProblem& problem, const Point3& p, double fp, double h,
                 Vec3& grad) {
    const std::array<Vec3, 3> axes{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
    double g[3];
    for (int i = 0; i < 3; ++i) {
        const Vec3 step = axes[static_cast<std::size_t>(i)] * h;
        const double f_plus = total_energy(p + step, problem);
        const double f_minus = total_energy(p - step, problem);
        if (std::isfinite(f_plus) && std::isfinite(f_minus)) {
            g[i] = (f_plus - f_minus) / (2.0 * h);
        } else if (std::isfinite(f_plus)) {
            g[i] = (f_plus - fp) / h;
        } else if (std::isfinite(f_minus)) {
            g[i] = (fp - f_minus) / h;
        } else {
            return false;
        }
    }
    grad = {g[0], g[1], g[2]};
    return grad.finite();
}

// Walks the start outward/inward along its ray until the energy is finite;
// meter-scale scenes can make the verbatim E1 exponent overflow elsewhere.
Point3 finite_start(const OptimizationProblem& problem, const Point3& start) {
    if (std::isfinite(total_energy(start, problem))) return start;
    const Point3 c = problem.target_centroid;
    const Vec3 dir = (start - c).normalized();
    Point3 best = start;
    double best_f = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 24; ++k) {
        const double t = (0.5 + 0.125 * k) * problem.d_alpha_star;
        const Point3 candidate =
            clamp_altitude(c + dir * t, problem.config.min_altitude);
        const double f = total_energy(candidate, problem);
        if (f < best_f) {
            best_f = f;
            best = candidate;
        }
    }
    return best;
}

}  // namespace

ViewpointResult descend_from(const Point3& start, int start_index,
                             const OptimizationProblem& problem,
                             std::vector<double>* energy_trace) {
    const EnergyConfig& cfg = problem.config;
    const double h = cfg.fd_step_factor * problem.d_alpha_star;
    const double step_tol = cfg.step_tol_factor * problem.d_alpha_star;

    Point3 x = clamp_altitude(finite_start(problem, start), cfg.min_altitude);
    double fx = total_energy(x, problem);
    if (energy_trace) energy_trace->push_back(fx);

    ViewpointResult result;
    result.start_index = start_index;
    result.converged = false;

    Mat3 hessian_inv = identity3();
    Vec3 grad;
    bool have_grad = std::isfinite(fx) && fd_gradient(problem, x, fx, h, grad);

    int iter = 0;
    for (; iter < cfg.max_iterations && have_grad; ++iter) {
        if (grad.norm() < cfg.grad_tolerance * std::max(1.0, std::abs(fx))) {
            result.converged = true;
            break;
        }

        Vec3 direction = -1.0 * mat_vec(hessian_inv, grad);
        double slope = grad.dot(direction);
        if (slope >= 0.0) {  // not a descent direction: reset to steepest descent
            hessian_inv = identity3();
            direction = -1.0 * grad;
            slope = grad.dot(direction);
        }

        // First trial step never exceeds the target scale; the energy's
        // exponential walls produce gradients far above unit magnitude.
        double alpha = std::min(1.0, problem.d_alpha_star / direction.norm());
        Point3 x_new = x;
        double f_new = fx;
        bool accepted = false;
        for (int shrink = 0; shrink < 64 && !accepted; ++shrink) {
            const Point3 trial = clamp_altitude(x + direction * alpha, cfg.min_altitude);
            const double f_trial = total_energy(trial, problem);
            if (std::isfinite(f_trial) && f_trial <= fx + cfg.armijo_c * alpha * slope) {
                x_new = trial;
                f_new = f_trial;
                accepted = true;
            } else {
                alpha *= cfg.backtrack_factor;
            }
        }
        if (!accepted) {
            // No progress possible along any tested step: local minimum in
            // working precision.
            result.converged = true;
            break;
        }

        const Vec3 s = x_new - x;
        if (s.norm() < step_tol) {
            x = x_new;
            fx = f_new;
            if (energy_trace) energy_trace->push_back(fx);
            result.converged = true;
            ++iter;
            break;
        }

        Vec3 grad_new;
        if (!fd_gradient(problem, x_new, f_new, h, grad_new)) {
            x = x_new;
            fx = f_new;
            if (energy_trace) energy_trace->push_back(fx);
            have_grad = false;
            break;
        }
        const Vec3 y = grad_new - grad;
        const double ys = y.dot(s);
        if (ys > 1e-12 * s.norm() * y.norm()) {
            // BFGS inverse update: H = (I - r s y^T) H (I - r y s^T) + r s s^T.
            const double rho = 1.0 / ys;
            const Vec3 hy = mat_vec(hessian_inv, y);
            const double yhy = y.dot(hy);
            Mat3 next;
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    const double si = vec_at(s, i), sj = vec_at(s, j);
                    const double hyi = vec_at(hy, i), hyj = vec_at(hy, j);
                    next[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                        hessian_inv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                        rho * (si * hyj + hyi * sj) +
                        rho * rho * yhy * si * sj + rho * si * sj;
                }
            }
            hessian_inv = next;
        } else {
            hessian_inv = identity3();
        }

        x = x_new;
        fx = f_new;
        grad = grad_new;
        if (energy_trace) energy_trace->push_back(fx);
    }

    result.position = x;
    result.iterations = iter;
    result.term_energies = {energy_e1(x, problem), energy_e2(x, problem),
                            energy_e3(x, problem)};
    const auto& w = problem.config.omega;
    result.energy = w[0] * result.term_energies[0] + w[1] * result.term_energies[1] +
                    w[2] * result.term_energies[2];
    return result;
}

namespace {

bool inside_any_occluder(const Point3& p, const OptimizationProblem& problem) {
    for (const auto& box : problem.occluder_cuboids)
        if (box.strictly_inside(p)) return true;
    return false;
}

Point3 perturbed_start(const OptimizationProblem& problem, int start_index) {
    std::mt19937_64 rng(problem.config.seed * 1000003ULL +
                        static_cast<std::uint64_t>(start_index) + 1ULL);
    std::uniform_real_distribution<double> radius(1.1, 1.6);
    std::uniform_real_distribution<double> az_shift(0.15, 0.45);
    const double r = problem.d_alpha_star * radius(rng);
    const double az =
        2.0 * kPi * start_index / problem.config.starts + az_shift(rng);
    const double elev = kPi / 3.0;
    return problem.target_centroid +
           Vec3{r * std::cos(elev) * std::cos(az), r * std::cos(elev) * std::sin(az),
                r * std::sin(elev)};
}

}  // namespace

ViewpointResult optimize_viewpoint(const OptimizationProblem& problem, int threads) {
    const std::vector<Point3> starts = initial_positions(problem);
    std::vector<ViewpointResult> runs(starts.size());

    parallel_for(starts.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k)
            runs[k] = descend_from(starts[k], static_cast<int>(k), problem);
    });

    // Runs ending inside an occluder get one retry from a perturbed start.
    std::vector<Point3> retry_starts(starts.size());
    std::vector<std::size_t> retry_idx;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        if (inside_any_occluder(runs[k].position, problem) ||
            !std::isfinite(runs[k].energy)) {
            retry_starts[k] = perturbed_start(problem, static_cast<int>(k));
            retry_idx.push_back(k);
        }
    }
    parallel_for(retry_idx.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t k = retry_idx[i];
            runs[k] = descend_from(retry_starts[k], static_cast<int>(k), problem);
        }
    });

    const ViewpointResult* best = nullptr;
    for (const auto& run : runs) {
        if (!std::isfinite(run.energy) || inside_any_occluder(run.position, problem)) continue;
        if (!best || run.energy < best->energy - 1e-9 ||
            (std::abs(run.energy - best->energy) <= 1e-9 &&
             run.start_index < best->start_index))
            best = &run;
    }
    if (!best)
        throw Error(ErrorKind::NoValidViewpoint,
                    "every descent run ended inside an occluder or diverged");
    return *best;
}

ViewpointResult optimize_viewpoint(const Scene& scene, std::string_view target_id,
                                   const EnergyConfig& config, int threads) {
    return optimize_viewpoint(filter_neighbors(scene, target_id, config), threads);
}

}  // namespace sightline
