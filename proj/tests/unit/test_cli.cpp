// End-to-end checks of the command-line tool: spawns the built binary (path
// from DOGNOSE_BIN, set by ctest) against a coarse fast scenario.
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

#include "dognose/config.hpp"
#include "dognose/io.hpp"
#include "dognose/scenarios.hpp"

using namespace dognose;
namespace fs = std::filesystem;

namespace {

const char* bin() { return std::getenv("DOGNOSE_BIN"); }

int run_cmd(const std::string& args) {
    const std::string cmd = std::string(bin()) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

// coarse sideways scenario that finishes in a couple of seconds
ScenarioSpec quick_spec() {
    ScenarioSpec s;
    s.name = "custom";
    s.pose.orientation = Orientation::Horizontal90;
    s.domain.cell_size = 0.25 / 64;
    s.inhale_schedule = {ScheduleMode::Continuous, 1.0, 20.0, 0.5, 0.0};
    s.exhale_schedule = {ScheduleMode::Continuous, 1.0, 20.0, 0.5, 0.0};
    s.source.offset = 0.03;
    s.source.radius = 0.004;
    s.source.start_time = 0.5;
    s.sensor.sample_period = 0.5;
    s.duration = 4.0;
    s.motor_off_time = 3.0;
    return s;
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("dognose_cli_" + std::to_string(std::rand()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& s) const { return (path / s).string(); }
};

}  // namespace

TEST_CASE("cli: list-presets and unknown preset exit codes") {
    if (!bin()) return;  // only meaningful under ctest
    CHECK(run_cmd("list-presets") == 0);
    TempDir tmp;
    CHECK(run_cmd("simulate --preset nope --out " + (tmp / "o")) == 2);
    CHECK(run_cmd("simulate --out " + (tmp / "o")) == 2);      // neither preset nor config
    CHECK(run_cmd("definitely-not-a-subcommand") == 2);        // parse error
}

TEST_CASE("cli: simulate writes the four artifacts deterministically") {
    if (!bin()) return;
    TempDir tmp;
    save_scenario_file(quick_spec(), tmp / "cfg.json");
    REQUIRE(run_cmd("simulate --config " + (tmp / "cfg.json") + " --out " + (tmp / "a")) == 0);
    for (const char* f : {"trace.csv", "ledger.json", "metrics.json", "manifest.json"})
        CHECK(fs::exists(tmp / (std::string("a/") + f)));

    // manifest checksums match the files on disk
    nlohmann::json man = nlohmann::json::parse(read_file(tmp / "a/manifest.json"));
    for (const auto& jf : man.at("files")) {
        const std::string bytes = read_file(tmp / ("a/" + jf.at("name").get<std::string>()));
        char hex[20];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
        CHECK(jf.at("fnv1a64").get<std::string>() == hex);
        CHECK(jf.at("bytes").get<size_t>() == bytes.size());
    }
    // config echo in the manifest round-trips to the input spec
    CHECK(scenario_from_json(man.at("config")).duration == 4.0);

    // rerun: all outputs byte-identical
    REQUIRE(run_cmd("simulate --config " + (tmp / "cfg.json") + " --out " + (tmp / "b")) == 0);
    for (const char* f : {"trace.csv", "ledger.json", "metrics.json"})
        CHECK(read_file(tmp / (std::string("a/") + f)) == read_file(tmp / (std::string("b/") + f)));
}

TEST_CASE("cli: --set override equals an edited config") {
    if (!bin()) return;
    TempDir tmp;
    save_scenario_file(quick_spec(), tmp / "base.json");
    ScenarioSpec edited = quick_spec();
    edited.inhale_schedule.duty = 0.6;
    save_scenario_file(edited, tmp / "edited.json");
    REQUIRE(run_cmd("simulate --config " + (tmp / "base.json") + " --set inhale_schedule.duty=0.6 --out " +
                    (tmp / "ov")) == 0);
    REQUIRE(run_cmd("simulate --config " + (tmp / "edited.json") + " --out " + (tmp / "ed")) == 0);
    CHECK(read_file(tmp / "ov/trace.csv") == read_file(tmp / "ed/trace.csv"));
    CHECK(read_file(tmp / "ov/metrics.json") == read_file(tmp / "ed/metrics.json"));
}

TEST_CASE("cli: preset with overrides and snapshot dumps") {
    if (!bin()) return;
    TempDir tmp;
    const std::string sets =
        " --set domain.cell_size=0.00390625 --set duration=2 --set motor_off_time=null"
        " --set sensor.sample_period=0.5 --set snapshot_cadence=1 --set source.start_time=0.2";
    REQUIRE(run_cmd("simulate --preset ninety_dognose" + sets + " --out " + (tmp / "p")) == 0);
    CHECK(fs::exists(tmp / "p/trace.csv"));
    CHECK(fs::exists(tmp / "p/snapshots/frame0000_speed.csv"));
    CHECK(fs::exists(tmp / "p/snapshots/frame0001_pressure.csv"));
    CHECK(fs::exists(tmp / "p/snapshots/frame0001_concentration.csv"));
    SensorTrace t = trace_from_csv_file(tmp / "p/trace.csv");
    CHECK(t.rows.size() == 5);  // 2 s at 0.5 s sampling
}

TEST_CASE("cli: analyze single, pair and malformed traces") {
    if (!bin()) return;
    TempDir tmp;
    write_file(tmp / "t1.csv", "t_s,reading_ugm3,inhale_f,exhale_f\n0,0,0,0\n1,2,0,0\n2,1,0,0\n");
    write_file(tmp / "t2.csv", "t_s,reading_ugm3,inhale_f,exhale_f\n0,0,0,0\n1,4,0,0\n2,2,0,0\n");
    CHECK(run_cmd("analyze " + (tmp / "t1.csv") + " --out " + (tmp / "m1")) == 0);
    CHECK(fs::exists(tmp / "m1/t1_metrics.json"));
    CHECK(run_cmd("analyze " + (tmp / "t1.csv") + " " + (tmp / "t2.csv") + " --out " + (tmp / "m2")) == 0);
    CHECK(fs::exists(tmp / "m2/comparison.csv"));
    write_file(tmp / "bad.csv", "t_s,reading_ugm3,inhale_f,exhale_f\n0,0,0,0\n1,2\n");
    CHECK(run_cmd("analyze " + (tmp / "bad.csv") + " --out " + (tmp / "m3")) == 2);
}

TEST_CASE("cli: sweep writes rows and honors the budget") {
    if (!bin()) return;
    TempDir tmp;
    ScenarioSpec s = quick_spec();
    s.duration = 2.0;
    s.motor_off_time.reset();
    save_scenario_file(s, tmp / "cfg.json");
    REQUIRE(run_cmd("sweep --config " + (tmp / "cfg.json") +
                    " --param inhale_duty=0.6:1.0:0.2 --objective peak --out " + (tmp / "sw")) == 0);
    const std::string csv = read_file(tmp / "sw/sweep.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 rows
    CHECK(run_cmd("sweep --config " + (tmp / "cfg.json") +
                  " --param inhale_duty=0:1:0.01 --budget 5 --objective peak --out " + (tmp / "sw2")) == 4);
    CHECK(run_cmd("sweep --config " + (tmp / "cfg.json") + " --objective peak --out " + (tmp / "sw3")) == 2);
}
