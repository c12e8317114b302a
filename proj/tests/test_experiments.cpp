#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ccbfnet/experiments.hpp"

using namespace ccbfnet;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "ccbfnet_tests" / name;
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("simulate writes trajectory, resilience and a manifest") {
    auto cfg = parse_config(shipped_config(2));
    cfg.directory = fresh_dir("simulate").string();
    cfg.write_svg = true;
    const auto res = cmd_simulate(cfg);
    CHECK(res.exit_code == 0);
    CHECK(res.summary == "no violations");
    const fs::path dir(cfg.directory);
    for (const char* name : {"trajectory.csv", "resilience.csv", "manifest.json",
                             "trajectory_states.svg", "trajectory_controls.svg"})
        CHECK(fs::exists(dir / name));
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["command"] == "simulate");
    CHECK(manifest["seed"] == 0);
    CHECK(manifest["config_hash"] == config_hash(cfg.raw_text));
    CHECK(manifest["summary"]["status"] == "ok");

    const std::string csv = slurp(dir / "trajectory.csv");
    CHECK(csv.rfind("t,i,x_i,u_i,h_i,psi1,psi2,delta_i,e_i,epsilon_i,lo_i,hi_i\n", 0) ==
          0);
    const std::string res_csv = slurp(dir / "resilience.csv");
    CHECK(res_csv.rfind("t,i,e_i,epsilon_i,nu_i,nu_star_i,within_bound\n", 0) == 0);
}

TEST_CASE("svg output never alters the csv bytes") {
    auto cfg = parse_config(shipped_config(3));
    cfg.directory = fresh_dir("sweep_csv").string();
    cfg.write_svg = false;
    cmd_nu_star_sweep(cfg);
    const auto plain = slurp(fs::path(cfg.directory) / "nu_star.csv");
    cfg.directory = fresh_dir("sweep_svg").string();
    cfg.write_svg = true;
    cmd_nu_star_sweep(cfg);
    const auto with_svg = slurp(fs::path(cfg.directory) / "nu_star.csv");
    CHECK(plain == with_svg);
    CHECK(fs::exists(fs::path(cfg.directory) / "nu_star.svg"));
}

TEST_CASE("command and config kinds must agree") {
    auto cfg = parse_config(shipped_config(2));  // kind = simulate
    CHECK_THROWS_AS(cmd_nu_star_sweep(cfg), ConfigError);
    CHECK_THROWS_AS(cmd_epsilon_surface(cfg), ConfigError);
}

TEST_CASE("reproduce rejects unknown figures") {
    CHECK_THROWS_AS(cmd_reproduce(5, fresh_dir("bad").string(), true, false),
                    ArgumentError);
}

TEST_CASE("reproductions are byte-identical across runs") {
    const auto dir_a = fresh_dir("repro_a"), dir_b = fresh_dir("repro_b");
    const auto a = cmd_reproduce(3, dir_a.string(), true, false);
    const auto b = cmd_reproduce(3, dir_b.string(), true, false);
    CHECK(a.exit_code == 0);
    CHECK(b.exit_code == 0);
    CHECK(slurp(dir_a / "nu_star.csv") == slurp(dir_b / "nu_star.csv"));
    CHECK(slurp(dir_a / "manifest.json") == slurp(dir_b / "manifest.json"));
}

TEST_CASE("sweep results are independent of the worker count") {
    auto cfg = parse_config(shipped_config(4));
    cfg.directory = fresh_dir("surface_t1").string();
    setenv("CCBFNET_THREADS", "1", 1);
    cmd_epsilon_surface(cfg);
    const auto one = slurp(fs::path(cfg.directory) / "epsilon_surface.csv");
    cfg.directory = fresh_dir("surface_t2").string();
    setenv("CCBFNET_THREADS", "2", 1);
    cmd_epsilon_surface(cfg);
    const auto two = slurp(fs::path(cfg.directory) / "epsilon_surface.csv");
    unsetenv("CCBFNET_THREADS");
    CHECK(one == two);
}

TEST_CASE("with the control disabled the endemic drive violates every threshold") {
    // hi = 0 pins u to zero; the uncontrolled equilibrium sits far above all
    // safety caps.
    std::string text = shipped_config(2);
    text.replace(text.find("hi = 0.75"), 9, "hi = 0");
    text.replace(text.find("event = 10 box 0 0.6"), 20, "");
    auto cfg = parse_config(text);
    const auto traj = run_simulate_data(cfg);
    REQUIRE(traj.ok());
    Vec min_h = Vec::Constant(3, 1.0);
    for (const auto& s : traj.samples)
        for (int i = 0; i < 3; ++i) min_h(i) = std::min(min_h(i), s.h[i]);
    for (int i = 0; i < 3; ++i) CHECK(min_h(i) < 0.0);
}

TEST_CASE("thread cap respects the environment variable") {
    setenv("CCBFNET_THREADS", "1", 1);
    CHECK(sweep_thread_count(64) == 1);
    setenv("CCBFNET_THREADS", "not-a-number", 1);
    CHECK(sweep_thread_count(64) >= 1);
    unsetenv("CCBFNET_THREADS");
    CHECK(sweep_thread_count(1) == 1);
}

TEST_CASE("config hashes separate distinct inputs") {
    CHECK(config_hash("a") != config_hash("b"));
    CHECK(config_hash(shipped_config(1)) == config_hash(shipped_config(1)));
    CHECK(config_hash("x").rfind("fnv1a64:", 0) == 0);
}

TEST_CASE("the numeric formatter is round-trip safe") {
    for (double v : {0.1, 1.0 / 3.0, 0.6, 1e-17, 12345.6789, -0.0733125}) {
        CHECK(std::stod(format_number(v)) == v);
    }
}
