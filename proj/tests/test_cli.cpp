// End-to-end checks of the sightline binary. The executable path comes from
// the SIGHTLINE_BIN environment variable (set by CTest).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "sightline/scene_io.hpp"
#include "support/fixtures.hpp"

using namespace sightline;
using nlohmann::json;

namespace {

std::string binary() {
    const char* bin = std::getenv("SIGHTLINE_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "SIGHTLINE_BIN must point at the CLI binary");
    return bin;
}

struct RunResult {
    int exit_code = 0;
    std::string stdout_text;
};

RunResult run(const std::string& args) {
    const std::string cmd = binary() + " " + args + " 2>/tmp/sightline_cli_stderr.txt";
    std::array<char, 4096> buf{};
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

std::string stderr_text() {
    std::ifstream in("/tmp/sightline_cli_stderr.txt");
    return {std::istreambuf_iterator<char>(in), {}};
}

std::filesystem::path write_fixture_scene() {
    using testing::box_building;
    Scene scene;
    scene.origin = {1.35, 103.82};
    scene.buildings.push_back(box_building("tower", Role::Landmark, {0, 0, 15}, {5, 5, 15}));
    scene.buildings.push_back(box_building("plat", Role::Static, {40, 0, 0}, {10, 10, 0.5}));
    scene.buildings.push_back(box_building("cand", Role::Candidate, {40, 0, 20}, {5, 5, 2}));
    scene.path = {{80, -20, 0}, {80, 20, 0}};
    const auto dir = std::filesystem::temp_directory_path() / "sightline_cli_fixture";
    std::filesystem::create_directories(dir);
    const auto path = dir / "scene.json";
    save_scene(scene, path.string());
    return path;
}

}  // namespace

TEST_CASE("analyze visibility of an unoccluded landmark") {
    const auto scene = write_fixture_scene();
    const RunResult r = run("analyze --scene " + scene.string() +
                            " --target tower --viewpoint -60,0,15 --resolution 500");
    REQUIRE(r.exit_code == 0);
    const json out = json::parse(r.stdout_text);
    CHECK(out.at("visibility").get<double>() == 1.0);
}

TEST_CASE("analyze shading errors at night with structured stderr") {
    const auto scene = write_fixture_scene();
    const RunResult r = run("analyze --scene " + scene.string() +
                            " --target cand --sun 2021-06-21T23:00:00+08:00");
    CHECK(r.exit_code == 5);
    const json err = json::parse(stderr_text());
    CHECK(err.at("error").at("kind").get<std::string>() == "night_time");
}

TEST_CASE("analyze wants exactly one probe") {
    const auto scene = write_fixture_scene();
    const RunResult both = run("analyze --scene " + scene.string() +
                               " --target tower --viewpoint 1,2,3 --sun 2021-06-21T12:00:00Z");
    CHECK(both.exit_code != 0);
    const RunResult neither = run("analyze --scene " + scene.string() + " --target tower");
    CHECK(neither.exit_code != 0);
}

TEST_CASE("config dump-defaults parses and reloads") {
    const RunResult r = run("config dump-defaults");
    REQUIRE(r.exit_code == 0);
    const json cfg = json::parse(r.stdout_text);
    CHECK(cfg.at("raster").at("resolution").get<int>() == 1000);
    CHECK(cfg.at("energy").at("omega")[1].get<double>() == 100.0);

    // Round trip: dumped defaults load back as a config file.
    const auto path = std::filesystem::temp_directory_path() / "sightline_cfg.json";
    std::ofstream(path) << r.stdout_text;
    const RunResult with_cfg = run("--config " + path.string() + " config dump-defaults");
    CHECK(with_cfg.exit_code == 0);
    CHECK(json::parse(with_cfg.stdout_text) == cfg);

    // The environment variable supplies the config path as well.
    json altered = cfg;
    altered["raster"]["resolution"] = 500;
    const auto env_path = std::filesystem::temp_directory_path() / "sightline_env_cfg.json";
    std::ofstream(env_path) << altered.dump();
    const std::string env_cmd =
        "SIGHTLINE_CONFIG=" + env_path.string() + " " + binary() + " config dump-defaults";
    FILE* pipe = popen(env_cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    pclose(pipe);
    CHECK(json::parse(out).at("raster").at("resolution").get<int>() == 500);
}

TEST_CASE("gestures replay classifies the canonical translate trace") {
    const auto scene = write_fixture_scene();
    const auto trace = std::filesystem::temp_directory_path() / "sightline_translate.ndjson";
    {
        std::ofstream out(trace);
        for (int i = 0; i < 100; ++i) {
            const double t = i * 0.01;
            out << json{{"t", t}, {"hand", "left"}, {"status", "close"},
                        {"p", {-1, 0, 0}}, {"o", {0, 0, 1}}}
                       .dump()
                << "\n";
            out << json{{"t", t}, {"hand", "right"}, {"status", "close"},
                        {"p", {1, 0, 0}}, {"o", {0, 0, 1}}}
                       .dump()
                << "\n";
        }
        out << json{{"t", 1.0}, {"hand", "left"}, {"status", "close"}, {"p", {-1, 0, 1}},
                    {"o", {0, 0, 1}}}
                   .dump()
            << "\n";
        out << json{{"t", 1.0}, {"hand", "right"}, {"status", "close"}, {"p", {1, 0, 1}},
                    {"o", {0, 0, 1}}}
                   .dump()
            << "\n";
    }
    const RunResult r =
        run("gestures replay --trace " + trace.string() + " --scene " + scene.string());
    REQUIRE(r.exit_code == 0);

    int translates = 0, initial_bars = 0, released = 0;
    std::istringstream lines(r.stdout_text);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        const json e = json::parse(line);
        if (e.value("event", "") == "manipulation" && e.value("kind", "") == "translate") {
            ++translates;
            CHECK(e.at("vector")[2].get<double>() == doctest::Approx(1.0));
        }
        initial_bars += e.value("event", "") == "initial_bar";
        released += e.value("event", "") == "released";
    }
    CHECK(translates == 1);
    CHECK(initial_bars == 1);
    CHECK(released == 1);
}

TEST_CASE("optimize emits a converged result as JSON") {
    const auto scene = write_fixture_scene();
    const auto out_path = std::filesystem::temp_directory_path() / "sightline_opt.json";
    const RunResult r = run("optimize --scene " + scene.string() +
                            " --target tower --deterministic --out " + out_path.string());
    REQUIRE(r.exit_code == 0);
    std::ifstream in(out_path);
    const json out = json::parse(in);
    CHECK(out.at("converged").get<bool>());
    CHECK(out.at("position").size() == 3);
    CHECK(out.contains("terms"));
    CHECK_FALSE(out.contains("generated_at"));
}

TEST_CASE("byte-identical reruns across thread counts") {
    const auto scene = write_fixture_scene();
    const auto dir = std::filesystem::temp_directory_path() / "sightline_det";
    std::filesystem::create_directories(dir);

    auto read = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string{std::istreambuf_iterator<char>(in), {}};
    };

    const auto a = dir / "a.json";
    const auto b = dir / "b.json";
    const std::string base = "analyze --scene " + scene.string() +
                             " --target tower --viewpoint -60,5,15 --resolution 500 --deterministic";
    REQUIRE(run(base + " --threads 1 --out " + a.string()).exit_code == 0);
    REQUIRE(run(base + " --threads 8 --out " + b.string()).exit_code == 0);
    CHECK(read(a) == read(b));
}
