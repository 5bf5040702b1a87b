#include "doctest.h"

#include "wpb/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = wpb::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("wpb_cli_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }
    std::string file(const std::string& name, const json& content) const {
        std::ofstream(path_ / name) << content.dump(2);
        return (path_ / name).string();
    }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::vector<std::string> split(const std::string& row) {
    std::vector<std::string> out;
    std::istringstream in(row);
    for (std::string cell; std::getline(in, cell, ',');) out.push_back(cell);
    if (!row.empty() && row.back() == ',') out.emplace_back();
    return out;
}

const std::string kConfigs = WPB_CONFIG_DIR;

json sim_config() {
    return json::parse(R"({
        "demand": {"kind": "uniform", "params": [0, 80]},
        "stats": {"r_agreed": 100},
        "rates": {"c_en": 1.5, "c_co2": 0.5, "c_viol": 1.0},
        "policy": {"kind": "balance"},
        "simulation": {"steps": 2000, "replications": 2, "seed": 42, "energy_full": 2.0, "carbon_intensity": 0.5}
    })");
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("balance command") {
    const auto r = run({"balance", kConfigs + "/balance.json"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["r_provisioned"].get<double>() == doctest::Approx(55.3846).epsilon(1e-6));
    CHECK(j["method"] == "closed_form");

    const auto n = run({"balance", kConfigs + "/balance.json", "--numeric"});
    REQUIRE(n.code == 0);
    CHECK(std::abs(json::parse(n.out)["r_provisioned"].get<double>() - 14400.0 / 260.0) < 1e-9);

    TempDir tmp;
    auto cfg = json::parse(slurp(kConfigs + "/balance.json"));
    cfg["rates"]["c_viol"] = 0.0;
    const auto zero = run({"balance", tmp.file("c.json", cfg), "--output", tmp.path().string()});
    REQUIRE(zero.code == 0);
    CHECK(json::parse(zero.out)["r_provisioned"].get<double>() == 40.0);
    CHECK(slurp(tmp.path() / "balance.json") == zero.out);

    cfg["rates"]["c_viol"] = 1.0;
    cfg["rates"]["satisfaction"] = 0.2;
    const auto sat = run({"balance", tmp.file("s.json", cfg)});
    REQUIRE(sat.code == 0);
    CHECK(json::parse(sat.out)["r_provisioned"].get<double>() == doctest::Approx(2.0 / 0.0325).epsilon(1e-12));
    CHECK(json::parse(sat.out)["method"] == "bisection");
}

TEST_CASE("exit codes and error messages") {
    TempDir tmp;
    auto cfg = json::parse(slurp(kConfigs + "/balance.json"));
    cfg.erase("rates");
    auto r = run({"balance", tmp.file("missing.json", cfg)});
    CHECK(r.code == 1);
    CHECK(r.err.find("rates:") != std::string::npos);

    cfg = json::parse(slurp(kConfigs + "/balance.json"));
    cfg["rates"] = {{"c_en", 0}, {"c_co2", 0}, {"c_viol", 0}};
    r = run({"balance", tmp.file("degenerate.json", cfg)});
    CHECK(r.code == 2);
    CHECK(r.err.find("DegenerateCosts") != std::string::npos);

    cfg["rates"] = {{"c_en", 1.5}, {"c_co2", 0.5}, {"c_viol", 1.0}, {"satisfaction", 10.0}};
    r = run({"balance", tmp.file("noroot.json", cfg)});
    CHECK(r.code == 2);
    CHECK(r.err.find("NoRootInRange") != std::string::npos);

    CHECK(run({"balance", (tmp.path() / "absent.json").string()}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({}).code == 1);
    CHECK(run({"--help"}).code == 0);

    std::ofstream(tmp.path() / "broken.json") << "{\"stats\": ";
    CHECK(run({"balance", (tmp.path() / "broken.json").string()}).code == 1);

    // Unbounded demand with no maximum to derive from is an input error.
    auto unbounded = sim_config();
    unbounded["demand"] = {{"kind", "log_normal"}, {"params", {3.0, 0.5}}};
    unbounded["stats"]["max_method"] = "true_upper_bound";
    CHECK(run({"simulate", tmp.file("unbounded.json", unbounded)}).code == 1);
}

TEST_CASE("simulate is reproducible byte for byte") {
    TempDir tmp;
    const auto cfg = tmp.file("sim.json", sim_config());
    const auto a = (tmp.path() / "a").string();
    const auto b = (tmp.path() / "b").string();
    const auto ra = run({"simulate", cfg, "--output", a, "--trace"});
    const auto rb = run({"simulate", cfg, "--output", b, "--trace"});
    REQUIRE(ra.code == 0);
    REQUIRE(rb.code == 0);
    CHECK(ra.out == rb.out);
    CHECK(slurp(fs::path(a) / "report.json") == slurp(fs::path(b) / "report.json"));
    CHECK(slurp(fs::path(a) / "trace.csv") == slurp(fs::path(b) / "trace.csv"));
    CHECK(lines(slurp(fs::path(a) / "trace.csv")).size() == 4001);

    const auto seeded = run({"simulate", cfg, "--seed", "43"});
    REQUIRE(seeded.code == 0);
    CHECK(seeded.out != ra.out);
    CHECK(json::parse(seeded.out)["seed"] == 43);
    CHECK(json::parse(ra.out)["seed"] == 42);

    CHECK(run({"simulate", cfg, "--trace"}).code == 1);

    // The echoed scenario is itself a valid config reproducing the run.
    const auto plain = run({"simulate", cfg});
    const auto echo = tmp.file("echo.json", json::parse(plain.out)["scenario"]);
    CHECK(run({"simulate", echo}).out == plain.out);
}

TEST_CASE("simulate at the support maximum never violates") {
    TempDir tmp;
    auto cfg = sim_config();
    cfg["policy"] = {{"kind", "fixed_level"}, {"level", 80}};
    const auto r = run({"simulate", tmp.file("max.json", cfg)});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["violation_count"] == 0);
    CHECK(j["total_penalty_cost"].get<double>() == 0.0);

    cfg["policy"] = {{"kind", "fixed_level"}, {"level", 120}};
    CHECK(run({"simulate", tmp.file("over.json", cfg)}).code == 1);
}

TEST_CASE("simulate with a policy list compares on common random numbers") {
    TempDir tmp;
    const auto r = run({"simulate", kConfigs + "/compare.json", "--steps", "3000", "--output", tmp.path().string()});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    REQUIRE(j["policies"].size() == 5);
    CHECK(j["ranking"].size() == 5);
    const auto rows = lines(slurp(tmp.path() / "comparison.csv"));
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] ==
          "rank,policy,provisioned_level,violation_count,violation_frequency,total_wastage_cost,"
          "total_penalty_cost,total_cost,total_energy_kwh,total_emissions_kg,error");
    // Rows keep config order; the rank column orders them by total cost.
    std::vector<double> cost_by_rank(rows.size(), -1.0);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto cells = split(rows[i]);
        CHECK(cells[1] == j["policies"][i - 1]["policy"].get<std::string>());
        cost_by_rank.at(std::stoul(cells[0])) = std::stod(cells[7]);
    }
    for (std::size_t k = 2; k < cost_by_rank.size(); ++k) CHECK(cost_by_rank[k] >= cost_by_rank[k - 1]);
}

TEST_CASE("etm command") {
    const auto r = run({"etm", kConfigs + "/etm.json"});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == "name,cap_kg,emissions_kg,position_kg,cash_flow");
    CHECK(rows[1] == "north,100000,120000,-20000,-200");
    CHECK(rows[2] == "south,100000,70000,30000,300");

    // The simulated account matches a direct simulation of the same scenario.
    const auto sim = json::parse(run({"simulate", kConfigs + "/etm.json"}).out);
    const auto cells = split(rows[3]);
    CHECK(cells[0] == "simulated");
    CHECK(std::stod(cells[2]) == doctest::Approx(sim["total_emissions_kg"].get<double>()).epsilon(1e-11));
    CHECK(split(rows[4])[0] == "TOTAL");

    CHECK(run({"etm", kConfigs + "/balance.json"}).code == 1);
}

TEST_CASE("sweep command") {
    const std::string cfg = kConfigs + "/sweep.json";
    auto r = run({"sweep", cfg, "--param", "c_viol=1:1:1"});
    REQUIRE(r.code == 0);
    auto rows = lines(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(std::stod(split(rows[1])[7]) == doctest::Approx(55.3846).epsilon(1e-6));

    r = run({"sweep", cfg, "--param", "c_viol=0:0:1"});
    REQUIRE(r.code == 0);
    rows = lines(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(split(rows[1])[7] == "40");

    r = run({"sweep", cfg, "--param", "c_viol=0:10:11"});
    REQUIRE(r.code == 0);
    rows = lines(r.out);
    REQUIRE(rows.size() == 12);
    double prev = -1;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto cells = split(rows[i]);
        CHECK(std::stod(cells[5]) == doctest::Approx(static_cast<double>(i - 1)));
        const double level = std::stod(cells[7]);
        CHECK(level >= prev);
        prev = level;
    }
    CHECK(std::stod(split(rows[1])[7]) == 40.0);

    TempDir tmp;
    r = run({"sweep", cfg, "--param", "mean_demand=10:40:3", "--param", "c_en=0.5:2:4", "--output",
             tmp.path().string()});
    REQUIRE(r.code == 0);
    rows = lines(slurp(tmp.path() / "sweep.csv"));
    CHECK(rows.size() == 13);
    CHECK(split(rows[1])[0] == "10");
    CHECK(split(rows[2])[0] == "10");
    CHECK(split(rows[5])[0] == "25");

    CHECK(run({"sweep", cfg, "--param", "c_violation=0:1:2"}).code == 1);
    CHECK(run({"sweep", cfg, "--param", "c_viol=0:1:2", "--param", "c_viol=0:1:2"}).code == 1);
    CHECK(run({"sweep", cfg, "--param", "c_viol=0:1"}).code == 1);
    CHECK(run({"sweep", cfg}).code == 1);

    // Every cell failing is a domain error; a partial failure is not.
    CHECK(run({"sweep", cfg, "--param", "mean_demand=90:95:2"}).code == 2);
    r = run({"sweep", cfg, "--param", "mean_demand=70:90:3"});
    CHECK(r.code == 0);
    CHECK_FALSE(split(lines(r.out)[3]).back().empty());
}

}  // TEST_SUITE
