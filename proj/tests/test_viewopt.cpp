#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sightline/errors.hpp"
#include "sightline/viewopt.hpp"
#include "support/fixtures.hpp"

using namespace sightline;
using testing::box_building;

namespace {

constexpr double kPi = std::numbers::pi;

OptimizationProblem cube_problem(const EnergyConfig& cfg = {}) {
    // Unit cube centered at the origin; no occluders.
    return OptimizationProblem::build({Cuboid::make({0, 0, 0}, {0.5, 0.5, 0.5})}, {}, cfg);
}

}  // namespace

TEST_CASE("energy config invariants") {
    EnergyConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.theta0 = 1.0;  // theta0 + theta1 != pi
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.dmin_factor = 2.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.omega = {1.0, -1.0, 1.0};
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("E1 sub-term reproduces the closed-form substitutions") {
    const EnergyConfig cfg;  // lambda0 = lambda1 = 1

    SUBCASE("d = d_alpha, theta = pi/2 with d_alpha = sqrt(2)") {
        const double d_alpha = std::sqrt(2.0);
        const double expected = std::exp(-0.5) + std::exp(kPi * kPi / 8.0);
        const double got = e1_subterm(d_alpha, kPi / 2.0, d_alpha, cfg);
        CHECK(got == doctest::Approx(expected).epsilon(1e-12));
        CHECK(got == doctest::Approx(4.0404440816).epsilon(1e-6));
    }

    SUBCASE("d = d_min zeroes the distance exponent") {
        const double d_alpha = 3.7;
        const double theta = 0.9;
        const double angle_term = std::exp((theta - cfg.theta0) * (theta - cfg.theta0) +
                                           (theta - cfg.theta1) * (theta - cfg.theta1));
        const double got = e1_subterm(cfg.dmin_factor * d_alpha, theta, d_alpha, cfg);
        CHECK(got - angle_term == doctest::Approx(cfg.lambda0).epsilon(1e-12));
    }

    SUBCASE("divergence far away") {
        CHECK(e1_subterm(1e4, kPi / 4.0, 1.0, cfg) ==
              std::numeric_limits<double>::infinity());
    }
}

TEST_CASE("E2 matches the hand-derived occluder fixture") {
    EnergyConfig cfg;

    SUBCASE("no occluders sum to zero") {
        const OptimizationProblem problem = cube_problem();
        CHECK(energy_e2({3, 4, 5}, problem) == 0.0);
    }

    SUBCASE("unit distance on all three planes gives 1/(3e)") {
        // Occluder cube of half extents 1 at the origin; the diagonal point
        // (1 + sqrt2/2, ...) is at distance 1 from its hull on every plane.
        const OptimizationProblem problem = OptimizationProblem::build(
            {Cuboid::make({100, 100, 0}, {0.5, 0.5, 0.5})},
            {Cuboid::make({0, 0, 0}, {1, 1, 1})}, cfg);
        const double c = 1.0 + std::sqrt(2.0) / 2.0;
        const double expected = 1.0 / (3.0 * std::exp(1.0));
        CHECK(energy_e2({c, c, c}, problem) == doctest::Approx(expected).epsilon(1e-9));
        CHECK(energy_e2({c, c, c}, problem) == doctest::Approx(0.12263).epsilon(1e-4));
    }

    SUBCASE("interior points dominate every exterior fixture point") {
        const OptimizationProblem problem = OptimizationProblem::build(
            {Cuboid::make({100, 100, 0}, {0.5, 0.5, 0.5})},
            {Cuboid::make({0, 0, 0}, {10, 10, 10})}, cfg);
        const double inside = energy_e2({0, 0, 0}, problem);
        for (const Point3 p : {Point3{12, 0, 0}, Point3{0, 14, 3}, Point3{11, 11, 11}})
            CHECK(inside > 100.0 * energy_e2(p, problem));
    }
}

TEST_CASE("E3 matches the collinear overlap fixture") {
    EnergyConfig cfg;

    SUBCASE("single target, no other polygons") {
        const OptimizationProblem problem = cube_problem();
        CHECK(energy_e3({3, 2, 1}, problem) == 0.0);
    }

    SUBCASE("collinear p-occluder-target with 0.4 rad contained overlap") {
        // On XY: target square half-extent s so its interval from p = (10,0)
        // spans exactly 0.4 rad; occluder between them, wide enough to
        // contain that interval.
        const double b = 10.0;
        const double s = b * std::tan(0.2) / (1.0 + std::tan(0.2));
        const OptimizationProblem problem = OptimizationProblem::build(
            {Cuboid::make({0, 0, 0}, {s, s, 1})}, {Cuboid::make({5, 0, 0}, {2, 2, 1})}, cfg);
        const double expected = std::exp(0.4) / (std::exp(kPi) + 1.0);
        const double got =
            e3_plane({b, 0.0}, problem.plane(Plane::XY), problem.config);
        CHECK(got == doctest::Approx(expected).epsilon(1e-9));
        CHECK(got == doctest::Approx(0.0618).epsilon(1e-3));
    }

    SUBCASE("disjoint intervals bound the sub-term by 1/2") {
        // Occluder far off to the side: no angular overlap from p.
        const OptimizationProblem problem = OptimizationProblem::build(
            {Cuboid::make({0, 0, 0}, {1, 1, 1})}, {Cuboid::make({0, 50, 0}, {1, 1, 1})}, cfg);
        const double term = e3_plane({20, 0}, problem.plane(Plane::XY), problem.config);
        CHECK(term > 0.0);
        CHECK(term <= 0.5);
    }

    SUBCASE("inverted theta1 weight flag flips the pair weight") {
        const double b = 10.0;
        const double s = b * std::tan(0.2) / (1.0 + std::tan(0.2));
        EnergyConfig inverted = cfg;
        inverted.e3_theta1_inverted = true;
        const OptimizationProblem problem = OptimizationProblem::build(
            {Cuboid::make({0, 0, 0}, {s, s, 1})}, {Cuboid::make({5, 0, 0}, {2, 2, 1})},
            inverted);
        // Same collinear fixture: weight becomes e^pi/(e^pi + 1).
        const double expected = std::exp(0.4) * std::exp(kPi) / (std::exp(kPi) + 1.0);
        const double got = e3_plane({b, 0.0}, problem.plane(Plane::XY), problem.config);
        CHECK(got == doctest::Approx(expected).epsilon(1e-9));
    }

    SUBCASE("viewpoint inside the projected target uses the theta2 = pi fallback") {
        const OptimizationProblem problem = OptimizationProblem::build(
            {Cuboid::make({0, 0, 10}, {5, 5, 1})}, {Cuboid::make({20, 0, 10}, {1, 1, 1})},
            cfg);
        // p_xy inside the target footprint.
        const Vec2 inside{0.5, 0.5};
        const AngleInterval iv =
            view_interval(inside, problem.plane(Plane::XY).target_polys[0]);
        CHECK(iv.full);
        const double got = e3_plane(inside, problem.plane(Plane::XY), problem.config);
        // One pair, theta2 = pi.
        const Vec2 qj = problem.plane(Plane::XY).occluder_centers[0];
        const Vec2 qi = problem.plane(Plane::XY).target_centers[0];
        const double theta1 = angle_between(Vec3{qi.x - qj.x, qi.y - qj.y, 0},
                                            Vec3{inside.x - qj.x, inside.y - qj.y, 0});
        const double expected = std::exp(kPi) / (std::exp(theta1) + 1.0);
        CHECK(got == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("angle interval mechanics") {
    const Polygon2 square = Polygon2::make({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}});

    SUBCASE("width from a point on the +x axis") {
        const AngleInterval iv = view_interval({5, 0}, square);
        CHECK_FALSE(iv.full);
        // Extreme directions point at (-? no: nearest corners (1, +-1)):
        // half-width = atan(1/4).
        CHECK(iv.width() == doctest::Approx(2.0 * std::atan(1.0 / 4.0)).epsilon(1e-12));
    }

    SUBCASE("overlap with wraparound") {
        const AngleInterval a{.lo = 3.0, .hi = 3.4, .full = false};       // straddles pi
        const AngleInterval b{.lo = -3.34159, .hi = -3.0, .full = false};  // same arc, shifted
        CHECK(interval_overlap(a, b) > 0.0);
        const AngleInterval c{.lo = 0.0, .hi = 0.5, .full = false};
        CHECK(interval_overlap(a, c) == 0.0);
    }

    SUBCASE("full interval overlaps by the other's width") {
        const AngleInterval full{.lo = 0.0, .hi = 2.0 * kPi, .full = true};
        const AngleInterval arc{.lo = 1.0, .hi = 1.7, .full = false};
        CHECK(interval_overlap(full, arc) == doctest::Approx(0.7));
    }
}

TEST_CASE("total energy decomposition and invariances") {
    EnergyConfig cfg;
    const OptimizationProblem problem = OptimizationProblem::build(
        {Cuboid::make({0, 0, 2}, {2, 2, 2})},
        {Cuboid::make({8, 0, 3}, {1, 3, 3}), Cuboid::make({-6, 5, 2}, {2, 1, 2}, 0.3)}, cfg);

    SUBCASE("total = omega . (E1, E2, E3)") {
        std::mt19937 rng(17);
        std::uniform_real_distribution<double> coord(-12.0, 12.0);
        for (int i = 0; i < 50; ++i) {
            const Point3 p{coord(rng), coord(rng), std::abs(coord(rng)) + 1.0};
            const double total = total_energy(p, problem);
            const double composed = cfg.omega[0] * energy_e1(p, problem) +
                                    cfg.omega[1] * energy_e2(p, problem) +
                                    cfg.omega[2] * energy_e3(p, problem);
            if (std::isfinite(total))
                CHECK(total == doctest::Approx(composed).epsilon(1e-12));
        }
    }

    SUBCASE("weighted-sum arithmetic") {
        EnergyConfig zero = cfg;
        zero.omega = {0.0, 0.0, 0.0};
        const OptimizationProblem p0 = OptimizationProblem::build(
            problem.target_cuboids, problem.occluder_cuboids, zero);
        CHECK(total_energy({9, 1, 4}, p0) == 0.0);
    }

    SUBCASE("translation equivariance") {
        const Vec3 shift{13.5, -7.25, 4.0};
        std::vector<Cuboid> targets, occluders;
        for (auto c : problem.target_cuboids) {
            c.center = c.center + shift;
            targets.push_back(c);
        }
        for (auto c : problem.occluder_cuboids) {
            c.center = c.center + shift;
            occluders.push_back(c);
        }
        const OptimizationProblem moved =
            OptimizationProblem::build(targets, occluders, cfg);
        std::mt19937 rng(29);
        std::uniform_real_distribution<double> coord(-10.0, 10.0);
        for (int i = 0; i < 20; ++i) {
            const Point3 p{coord(rng), coord(rng), std::abs(coord(rng)) + 1.5};
            const double e1 = energy_e1(p, problem);
            if (!std::isfinite(e1)) continue;
            CHECK(energy_e1(p + shift, moved) == doctest::Approx(e1).epsilon(1e-9));
            CHECK(energy_e2(p + shift, moved) ==
                  doctest::Approx(energy_e2(p, problem)).epsilon(1e-9));
            CHECK(energy_e3(p + shift, moved) ==
                  doctest::Approx(energy_e3(p, problem)).epsilon(1e-9));
        }
    }

    SUBCASE("finite-difference secant consistency") {
        const double h_fd = cfg.fd_step_factor * problem.d_alpha_star;
        std::mt19937 rng(31);
        std::uniform_real_distribution<double> az(0.0, 2.0 * kPi);
        for (int i = 0; i < 10; ++i) {
            // Points near the preferred annulus where the energy is smooth.
            const double a = az(rng);
            const Point3 p = problem.target_centroid +
                             Vec3{std::cos(a), std::sin(a), 0.9} * problem.d_alpha_star;
            const double fp = total_energy(p, problem);
            if (!std::isfinite(fp)) continue;
            Vec3 grad;
            for (int k = 0; k < 3; ++k) {
                const Vec3 axis = k == 0 ? Vec3{1, 0, 0} : k == 1 ? Vec3{0, 1, 0} : Vec3{0, 0, 1};
                const double fplus = total_energy(p + axis * h_fd, problem);
                const double fminus = total_energy(p - axis * h_fd, problem);
                const double g = (fplus - fminus) / (2.0 * h_fd);
                grad = grad + axis * g;
            }
            const Vec3 v = Vec3{0.36, -0.48, 0.8};  // unit direction
            // Independent curvature scale from a coarse second difference.
            const double big_h = 1e-2 * problem.d_alpha_star;
            const double curv =
                std::abs(total_energy(p + v * big_h, problem) - 2.0 * fp +
                         total_energy(p - v * big_h, problem)) /
                (big_h * big_h);
            const double c_bound = 5.0 * std::max(
                curv, std::abs(fp) / (problem.d_alpha_star * problem.d_alpha_star));
            for (const double h : {1e-2 * problem.d_alpha_star, 1e-3 * problem.d_alpha_star}) {
                const double lhs =
                    std::abs(total_energy(p + v * h, problem) - fp - h * grad.dot(v));
                CHECK(lhs <= c_bound * h * h + 1e-12);
            }
        }
    }
}

TEST_CASE("initial positions ring") {
    EnergyConfig cfg;

    SUBCASE("ten starts, 36 degree gaps, 60 degrees over the ground") {
        const OptimizationProblem problem = cube_problem(cfg);
        const auto starts = initial_positions(problem);
        REQUIRE(starts.size() == 10);
        const double r = problem.d_alpha_star;
        for (std::size_t k = 0; k < starts.size(); ++k) {
            const Vec3 d = starts[k] - problem.target_centroid;
            CHECK(d.norm() == doctest::Approx(r).epsilon(1e-9));
            CHECK(starts[k].z ==
                  doctest::Approx(r * std::sin(kPi / 3.0)).epsilon(1e-9));
            const double az = std::atan2(d.y, d.x);
            const double expected = 2.0 * kPi * k / 10.0;
            const double wrapped = expected > kPi ? expected - 2.0 * kPi : expected;
            CHECK(az == doctest::Approx(wrapped).epsilon(1e-9));
        }
        // Consecutive gap 36 degrees.
        const Vec3 d0 = starts[0] - problem.target_centroid;
        const Vec3 d1 = starts[1] - problem.target_centroid;
        CHECK(signed_ground_angle(d0, d1) == doctest::Approx(2.0 * kPi / 10.0).epsilon(1e-9));
    }

    SUBCASE("single start sits at azimuth zero") {
        EnergyConfig one = cfg;
        one.starts = 1;
        const OptimizationProblem problem = cube_problem(one);
        const auto starts = initial_positions(problem);
        REQUIRE(starts.size() == 1);
        CHECK(starts[0].y == doctest::Approx(0.0));
        CHECK(starts[0].x > 0.0);
    }
}

TEST_CASE("filter_neighbors radius") {
    EnergyConfig cfg;
    Scene scene;
    scene.origin = {0, 0};
    scene.buildings.push_back(box_building("target", Role::Landmark, {0, 0, 0}, {1, 1, 1}));
    // Unit-cube target: d_alpha* = sqrt(8) from the XY/XZ/YZ 2x2 hulls.
    const double d_star = std::sqrt(8.0);

    scene.buildings.push_back(
        box_building("far", Role::Static, {8.0 * d_star, 0, 0}, {1, 1, 1}));
    scene.buildings.push_back(
        box_building("near", Role::Static, {6.9 * d_star, 0, 0}, {1, 1, 1}));

    const OptimizationProblem problem = filter_neighbors(scene, "target", cfg);
    CHECK(problem.occluder_cuboids.size() == 1);
    CHECK(problem.occluder_cuboids[0].center.x == doctest::Approx(6.9 * d_star));

    SUBCASE("mixed scene equals the brute-force filter") {
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> pos(-10.0 * d_star, 10.0 * d_star);
        Scene big;
        big.origin = {0, 0};
        big.buildings.push_back(box_building("target", Role::Landmark, {0, 0, 0}, {1, 1, 1}));
        std::size_t expected = 0;
        for (int i = 0; i < 10; ++i) {
            const Point3 c{pos(rng), pos(rng), 0.0};
            big.buildings.push_back(box_building("b" + std::to_string(i),
                                                 Role::Static, c, {1, 1, 1}));
            if (c.norm() <= cfg.neighbor_radius_factor * d_star) ++expected;
        }
        const OptimizationProblem filtered = filter_neighbors(big, "target", cfg);
        CHECK(filtered.occluder_cuboids.size() == expected);
    }

    SUBCASE("unknown target") {
        CHECK_THROWS_AS(filter_neighbors(scene, "ghost", cfg), Error);
    }
}

TEST_CASE("descent behaviour") {
    EnergyConfig cfg;
    cfg.starts = 4;

    SUBCASE("lone target: converged and no worse than any start") {
        const OptimizationProblem problem = OptimizationProblem::build(
            {Cuboid::make({0, 0, 0}, {3, 3, 3})}, {}, cfg);
        const ViewpointResult result = optimize_viewpoint(problem);
        CHECK(result.converged);
        for (const auto& start : initial_positions(problem)) {
            const double start_energy = total_energy(start, problem);
            if (std::isfinite(start_energy)) CHECK(result.energy <= start_energy + 1e-9);
        }
    }

    SUBCASE("per-run energies are non-increasing") {
        const OptimizationProblem problem = OptimizationProblem::build(
            {Cuboid::make({0, 0, 2}, {3, 3, 2})}, {Cuboid::make({9, 0, 3}, {1, 4, 3})}, cfg);
        for (const auto& start : initial_positions(problem)) {
            std::vector<double> trace;
            descend_from(start, 0, problem, &trace);
            for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-12);
        }
    }

    SUBCASE("slab fixture: result beats the slab-side start on E3") {
        const OptimizationProblem problem = OptimizationProblem::build(
            {Cuboid::make({0, 0, 2}, {2, 2, 2})}, {Cuboid::make({5, 0, 4}, {0.8, 6, 4})}, cfg);
        const ViewpointResult result = optimize_viewpoint(problem);
        const Point3 slab_side_start = initial_positions(problem)[0];  // azimuth 0: towards slab
        CHECK(result.term_energies[2] < energy_e3(slab_side_start, problem));
    }

    SUBCASE("obstruction avoidance: interior points lose to the result") {
        const OptimizationProblem problem = OptimizationProblem::build(
            {Cuboid::make({0, 0, 2}, {3, 3, 2})}, {Cuboid::make({10, 0, 5}, {2, 4, 5})}, cfg);
        const ViewpointResult result = optimize_viewpoint(problem);
        for (const Point3 inside : {Point3{10, 0, 5}, Point3{9, 2, 3}, Point3{11, -2, 7}}) {
            CHECK(problem.occluder_cuboids[0].strictly_inside(inside));
            CHECK(total_energy(inside, problem) > result.energy);
        }
        CHECK_FALSE(problem.occluder_cuboids[0].strictly_inside(result.position));
    }

    SUBCASE("grid oracle on a small scene") {
        EnergyConfig full = cfg;
        full.starts = 10;
        const OptimizationProblem problem = OptimizationProblem::build(
            {Cuboid::make({0, 0, 3}, {3, 3, 3})},
            {Cuboid::make({10, 2, 4}, {1.5, 3, 4}), Cuboid::make({-9, -4, 3}, {2, 2, 3}, 0.4),
             Cuboid::make({2, 11, 5}, {3, 1.5, 5}), Cuboid::make({-4, -12, 2}, {2, 2, 2})},
            full);
        const ViewpointResult result = optimize_viewpoint(problem);

        const double d = problem.d_alpha_star;
        const Point3 c = problem.target_centroid;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 20; ++i) {
            for (int j = 0; j < 20; ++j) {
                for (int k = 1; k <= 10; ++k) {
                    const Point3 p{c.x - 3 * d + i * (6 * d / 19.0),
                                   c.y - 3 * d + j * (6 * d / 19.0), c.z + k * (2 * d / 10.0)};
                    const double e = total_energy(p, problem);
                    if (std::isfinite(e)) best = std::min(best, e);
                }
            }
        }
        CHECK(result.energy <= 1.05 * best);
    }

    SUBCASE("all runs trapped inside an occluder raise no-valid-viewpoint") {
        EnergyConfig trapped = cfg;
        trapped.starts = 2;
        trapped.max_iterations = 2;  // no room to escape
        const OptimizationProblem problem = OptimizationProblem::build(
            {Cuboid::make({0, 0, 0}, {0.5, 0.5, 0.5})},
            {Cuboid::make({0, 0, 0}, {60, 60, 60})}, trapped);
        // Every start lies deep inside the giant occluder.
        for (const auto& s : initial_positions(problem))
            CHECK(problem.occluder_cuboids[0].strictly_inside(s));
        CHECK_THROWS_AS(optimize_viewpoint(problem), Error);
    }

    SUBCASE("deterministic across thread counts") {
        EnergyConfig full = cfg;
        full.starts = 10;
        const OptimizationProblem problem = OptimizationProblem::build(
            {Cuboid::make({0, 0, 2}, {3, 3, 2})},
            {Cuboid::make({9, 0, 3}, {1, 4, 3}), Cuboid::make({-8, 3, 2}, {2, 2, 2})}, full);
        const ViewpointResult a = optimize_viewpoint(problem, 1);
        const ViewpointResult b = optimize_viewpoint(problem, 8);
        CHECK(a.position == b.position);
        CHECK(a.energy == b.energy);
        CHECK(a.start_index == b.start_index);
    }
}
