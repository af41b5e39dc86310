#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "tmsdyn/scenario.hpp"

using namespace tmsdyn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("tmsdyn_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) rows.push_back(split(line));
    return rows;
}

Json null_config() {
    return Json::parse(R"({
      "name": "null",
      "mode": "both",
      "eta_end": 30,
      "model": { "chi": 1 },
      "pulse": { "type": "null" },
      "state": { "r": 0.3, "nu_D": 1.2, "nu_d": 1.1 },
      "output": { "csv": "null.csv", "summary": "null.json" }
    })");
}

Json weak_config() {
    return Json::parse(R"({
      "name": "weak",
      "mode": "both",
      "eta_end": 40,
      "model": { "chi": 0.5 },
      "pulse": { "type": "gaussian_quadratic", "lambda": 0.1, "eta0": 1 },
      "state": { "r": 0.2, "nu_D": 1.1, "nu_d": 1 },
      "output": { "csv": "", "summary": "" }
    })");
}

std::string config_error_path(const Json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<no error>";
}

struct Process {
    int status;
    std::string output;
};

Process run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " \"" + std::string(TMSDYN_CLI_PATH) + "\" " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    Process p{-1, {}};
    if (!pipe) return p;
    std::array<char, 512> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe)) p.output += buf.data();
    const int raw = pclose(pipe);
    p.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return p;
}

}  // namespace

TEST(Presets, AllParse) {
    ASSERT_EQ(presets::all().size(), 4u);
    for (const auto& p : presets::all()) {
        const ScenarioConfig c = parse_config(presets::get(p.name));
        EXPECT_EQ(c.name, p.name);
        EXPECT_EQ(c.mode, RunMode::Both);
        EXPECT_DOUBLE_EQ(c.model.chi(), 0.1);
    }
}

TEST(Presets, ShippedFilesMatchBuiltIns) {
    for (const auto& p : presets::all()) {
        const fs::path file = fs::path(TMSDYN_PRESET_DIR) / (std::string(p.name) + ".json");
        ASSERT_TRUE(fs::exists(file)) << file;
        EXPECT_EQ(Json::parse(slurp(file)), Json::parse(p.json)) << p.name;
    }
}

TEST(Presets, FigureParameters) {
    const ScenarioConfig a = load_config("fig1a");
    const auto& g = std::get<GaussianQuadratic>(a.pulse.shape());
    EXPECT_DOUBLE_EQ(g.lambda, 0.1);
    EXPECT_DOUBLE_EQ(g.eta0, 1.0);
    const ScenarioConfig b = load_config("fig2b");
    const auto& g2 = std::get<GaussianQuadratic>(b.pulse.shape());
    EXPECT_DOUBLE_EQ(g2.lambda, 1.0);
    EXPECT_DOUBLE_EQ(g2.eta0, 3.0);
    EXPECT_EQ(b.output.analytic, AnalyticCurve::ClosedForm);
}

TEST(Presets, UnknownNameThrows) { EXPECT_THROW(presets::get("fig3"), std::invalid_argument); }

TEST(Config, Defaults) {
    Json j = null_config();
    j.erase("output");
    j.erase("state");
    const ScenarioConfig c = parse_config(j);
    EXPECT_EQ(c.output.csv, "null.csv");
    EXPECT_EQ(c.output.summary, "null.json");
    EXPECT_EQ(c.state.r, 0.0);
    EXPECT_EQ(c.state.nu_D, 1.0);
    EXPECT_EQ(c.integrator.method, IntegrationMethod::RK45);
}

TEST(Config, ErrorPaths) {
    Json j = null_config();
    j["pulse"]["foo"] = 1;
    EXPECT_EQ(config_error_path(j), "pulse.foo");

    j = null_config();
    j["extra"] = true;
    EXPECT_EQ(config_error_path(j), "extra");

    j = null_config();
    j["model"] = Json::parse(R"({"chi": 1, "omega_D": 1, "omega_d": 1})");
    EXPECT_EQ(config_error_path(j), "model");

    j = null_config();
    j["model"] = Json::object();
    EXPECT_EQ(config_error_path(j), "model");

    j = null_config();
    j["model"]["chi"] = -1;
    EXPECT_EQ(config_error_path(j), "model.chi");

    j = null_config();
    j["state"]["nu_D"] = 0.5;
    EXPECT_EQ(config_error_path(j), "state");

    j = null_config();
    j["state"] = Json::parse(R"({"temperature": 1})");
    EXPECT_EQ(config_error_path(j), "state.temperature");

    j = null_config();
    j["pulse"] = Json::parse(R"({"type": "gaussian_quadratic", "lambda": 1})");
    EXPECT_EQ(config_error_path(j), "pulse.eta0");

    j = null_config();
    j["pulse"] = Json::parse(R"({"type": "square"})");
    EXPECT_EQ(config_error_path(j), "pulse.type");

    j = null_config();
    j["pulse"] = Json::parse(R"({"type": "tabulated", "eta": [0, 1], "h": [0.5, 0]})");
    EXPECT_EQ(config_error_path(j), "pulse");

    j = null_config();
    j["mode"] = "plot";
    EXPECT_EQ(config_error_path(j), "mode");

    j = null_config();
    j.erase("eta_end");
    EXPECT_EQ(config_error_path(j), "eta_end");

    j = null_config();
    j["integrator"] = Json::parse(R"({"method": "euler"})");
    EXPECT_EQ(config_error_path(j), "integrator.method");

    j = null_config();
    j["integrator"] = Json::parse(R"({"rel_tol": 0})");
    EXPECT_EQ(config_error_path(j), "integrator");

    j = null_config();
    j["output"]["analytic"] = "spline";
    EXPECT_EQ(config_error_path(j), "output.analytic");

    j = null_config();
    j["sweep"] = Json::parse(R"({"grid": {"pulse.lambda": [0.1]}})");
    EXPECT_EQ(config_error_path(j), "sweep");

    EXPECT_THROW(parse_config(std::string("{ not json")), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, TemperatureState) {
    Json j = null_config();
    j["model"] = Json::parse(R"({"omega_D": 1, "omega_d": 0.64})");
    j["state"] = Json::parse(R"({"r": 0.1, "temperature": 4})");
    const ScenarioConfig c = parse_config(j);
    EXPECT_DOUBLE_EQ(c.state.nu_D, thermal_nu(1.0, 4.0));
    EXPECT_DOUBLE_EQ(c.state.nu_d, thermal_nu(0.64, 4.0));
    ASSERT_TRUE(c.model.has_epsilon());
    EXPECT_NEAR(*c.model.epsilon(), 0.8, 1e-15);
    EXPECT_NO_THROW(run_scenario(c, scratch("temperature")));
}

TEST(RunScenario, NullPulseIsConstant) {
    const fs::path dir = scratch("null");
    const RunReport r = run_scenario(parse_config(null_config()), dir);
    ASSERT_TRUE(r.max_cross_path_deviation.has_value());
    EXPECT_LE(*r.max_cross_path_deviation, 1e-12);
    EXPECT_LE(*r.max_tail_F_deviation, 1e-12);
    EXPECT_EQ(r.switch_off_eta, 0.0);
    EXPECT_NEAR(r.n_plus.min, r.n_plus.max, 1e-12);
    EXPECT_NEAR(r.negativity.min, r.negativity.max, 1e-12);
    EXPECT_LE(std::abs(r.delta_E.max), 1e-12);
    EXPECT_TRUE(r.stability.ok);

    const auto rows = read_csv(dir / "null.csv");
    ASSERT_GT(rows.size(), 2u);
    EXPECT_EQ(slurp(dir / "null.csv").substr(0, kCsvHeader.size()), kCsvHeader);
    for (const auto& row : rows) EXPECT_EQ(row.size(), 13u);
    for (std::size_t k = 2; k < rows.size(); ++k)
        for (std::size_t col = 6; col < 13; ++col)
            EXPECT_NEAR(std::stod(rows[k][col]), std::stod(rows[1][col]), 1e-12) << k << " " << col;

    const Json summary = Json::parse(slurp(dir / "null.json"));
    EXPECT_EQ(summary["name"], "null");
}

TEST(RunScenario, CsvIsDeterministic) {
    Json j = weak_config();
    j["output"]["csv"] = "weak.csv";
    const ScenarioConfig c = parse_config(j);
    const fs::path a = scratch("det_a");
    const fs::path b = scratch("det_b");
    run_scenario(c, a);
    run_scenario(c, b);
    EXPECT_EQ(slurp(a / "weak.csv"), slurp(b / "weak.csv"));
}

TEST(RunScenario, WeakPulseCrossChecks) {
    const RunReport r = run_scenario(parse_config(weak_config()), scratch("weak"));
    ASSERT_TRUE(r.extracted && r.weak_coupling);
    EXPECT_LE(*r.max_cross_path_deviation, 1e-9);
    EXPECT_LE(*r.max_tail_F_deviation, 1e-7);
    EXPECT_LE(*r.first_integral_rel_variation, 1e-8);
    EXPECT_LE(*r.perturbative_F_plus_rel_deviation, 0.01);
    EXPECT_LE(r.max_symplectic_defect, 1e-10);
    EXPECT_NEAR(r.extracted->amplitude / r.weak_coupling->amplitude, 1.0, 0.01);
    EXPECT_TRUE(r.chi_below_resonance_bound);
    EXPECT_TRUE(r.csv_path.empty());
}

TEST(RunScenario, Fig1aPreset) {
    const fs::path dir = scratch("fig1a");
    const RunReport r = run_scenario(load_config("fig1a"), dir);
    EXPECT_TRUE(fs::exists(dir / "fig1a.csv"));
    EXPECT_TRUE(fs::exists(dir / "fig1a.json"));
    EXPECT_LE(*r.perturbative_F_plus_rel_deviation, 0.01);
    EXPECT_NEAR(r.energy_input_bound, 0.00196349540849362, 1e-12);
    EXPECT_TRUE(r.stability.ok);
    // Numeric and perturbative columns are both present.
    const auto rows = read_csv(dir / "fig1a.csv");
    EXPECT_NE(rows[10][2], "nan");
    EXPECT_NE(rows[10][4], "nan");
}

TEST(RunScenario, AnalyticOnlyLeavesNumericColumnsEmpty) {
    Json j = weak_config();
    j["mode"] = "analytic";
    j["output"]["csv"] = "a.csv";
    j["output"]["samples"] = 101;
    const fs::path dir = scratch("analytic");
    const RunReport r = run_scenario(parse_config(j), dir);
    EXPECT_EQ(r.samples, 101u);
    EXPECT_FALSE(r.extracted.has_value());
    const auto rows = read_csv(dir / "a.csv");
    ASSERT_EQ(rows.size(), 102u);
    for (std::size_t k = 1; k < rows.size(); ++k) {
        EXPECT_EQ(rows[k][2], "nan");
        EXPECT_EQ(rows[k][3], "nan");
        EXPECT_NE(rows[k][4], "nan");
    }
}

TEST(RunScenario, EvolveOnlyLeavesAnalyticColumnsEmpty) {
    Json j = weak_config();
    j["mode"] = "evolve";
    j["output"]["csv"] = "e.csv";
    const fs::path dir = scratch("evolve");
    run_scenario(parse_config(j), dir);
    const auto rows = read_csv(dir / "e.csv");
    for (std::size_t k = 1; k < rows.size(); ++k) {
        EXPECT_NE(rows[k][2], "nan");
        EXPECT_EQ(rows[k][4], "nan");
        EXPECT_EQ(rows[k][5], "nan");
    }
}

TEST(RunScenario, SweepModeIsRejected) {
    Json j = weak_config();
    j["mode"] = "sweep";
    j["sweep"] = Json::parse(R"({"grid": {"pulse.lambda": [0.1]}})");
    EXPECT_THROW(run_scenario(parse_config(j)), ConfigError);
}

TEST(Sweep, SinglePointMatchesRun) {
    Json j = weak_config();
    j["mode"] = "sweep";
    j["sweep"] = Json::parse(R"({"grid": {"pulse.lambda": [0.1]}})");
    const SweepResult s = run_sweep(parse_config(j), 1);
    ASSERT_EQ(s.rows.size(), 1u);
    ASSERT_TRUE(s.rows[0].report.has_value());
    const RunReport single = run_scenario(parse_config(weak_config()), scratch("single"));
    const RunReport& p = *s.rows[0].report;
    EXPECT_EQ(p.extracted->amplitude, single.extracted->amplitude);
    EXPECT_EQ(p.extracted->phase, single.extracted->phase);
    EXPECT_EQ(p.n_plus.min, single.n_plus.min);
    EXPECT_EQ(p.negativity.max, single.negativity.max);
    EXPECT_EQ(p.delta_E.max, single.delta_E.max);
}

TEST(Sweep, AmplitudeGrowsWithLambda) {
    Json j = weak_config();
    j["mode"] = "sweep";
    j["sweep"] = Json::parse(R"({"grid": {"pulse.lambda": [0.05, 0.1, 0.2, 0.3, 0.5]}})");
    const SweepResult s = run_sweep(parse_config(j), 2);
    ASSERT_EQ(s.rows.size(), 5u);
    for (std::size_t k = 1; k < s.rows.size(); ++k)
        EXPECT_GT(s.rows[k].report->extracted->amplitude, s.rows[k - 1].report->extracted->amplitude);
    // Linear in lambda at first order.
    const double a1 = s.rows[0].report->weak_coupling->amplitude;
    const double a2 = s.rows[1].report->weak_coupling->amplitude;
    EXPECT_NEAR(a2 / a1, 2.0, 1e-10);
}

TEST(Sweep, FlagsUnstableAndRecordsErrors) {
    Json j = weak_config();
    j["mode"] = "sweep";
    j["eta_end"] = 10;
    j["sweep"] = Json::parse(R"({"grid": {"pulse.lambda": [0.5, 3], "pulse.eta0": [1, -1]}})");
    const SweepResult s = run_sweep(parse_config(j), 3);
    ASSERT_EQ(s.rows.size(), 4u);
    EXPECT_EQ(s.parameters, (std::vector<std::string>{"pulse.lambda", "pulse.eta0"}));
    // First axis varies slowest.
    EXPECT_EQ(s.rows[1].values[0], Json(0.5));
    EXPECT_EQ(s.rows[1].values[1], Json(-1));
    EXPECT_TRUE(s.rows[0].error.empty());
    EXPECT_TRUE(s.rows[0].report->stability.ok);
    EXPECT_FALSE(s.rows[1].error.empty());
    EXPECT_FALSE(s.rows[1].report.has_value());
    ASSERT_TRUE(s.rows[2].report.has_value());
    EXPECT_FALSE(s.rows[2].report->stability.ok);
    EXPECT_FALSE(s.rows[3].error.empty());

    std::stringstream csv;
    write_sweep_csv(csv, s);
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header,
              "index,pulse.lambda,pulse.eta0,A,phi,N_plus_min,N_plus_max,neg_min,neg_max,delta_E_min,delta_E_max,"
              "energy_input_bound,stable,error");
}

TEST(Sweep, ThreadCountDoesNotChangeOutput) {
    Json j = weak_config();
    j["mode"] = "sweep";
    j["eta_end"] = 20;
    j["sweep"] = Json::parse(R"({"grid": {"pulse.lambda": [0.1, 0.2, 0.4], "model.chi": [0.5, 1.5]}})");
    const ScenarioConfig c = parse_config(j);
    std::stringstream a, b;
    write_sweep_csv(a, run_sweep(c, 1));
    write_sweep_csv(b, run_sweep(c, 4));
    EXPECT_EQ(a.str(), b.str());
}

TEST(Cli, PresetsList) {
    const Process p = run_cli("presets list");
    EXPECT_EQ(p.status, 0);
    EXPECT_EQ(p.output, "fig1a\nfig1b\nfig2a\nfig2b\n");
}

TEST(Cli, PresetsShow) {
    const Process p = run_cli("presets show fig2a");
    EXPECT_EQ(p.status, 0);
    EXPECT_EQ(Json::parse(p.output), Json::parse(presets::get("fig2a")));
}

TEST(Cli, RunWritesToOutFlag) {
    const fs::path dir = scratch("cli_out");
    const Process p = run_cli("--out \"" + dir.string() + "\" run fig1a");
    EXPECT_EQ(p.status, 0) << p.output;
    EXPECT_TRUE(fs::exists(dir / "fig1a.csv"));
    EXPECT_TRUE(fs::exists(dir / "fig1a.json"));
}

TEST(Cli, RunHonoursEnvironmentDirectory) {
    const fs::path dir = scratch("cli_env");
    const Process p = run_cli("run fig1b", "TMSDYN_OUT=\"" + dir.string() + "\"");
    EXPECT_EQ(p.status, 0) << p.output;
    EXPECT_TRUE(fs::exists(dir / "fig1b.csv"));
}

TEST(Cli, ConfigErrorExitCode) {
    const fs::path dir = scratch("cli_bad");
    Json j = null_config();
    j["pulse"]["foo"] = 1;
    std::ofstream(dir / "bad.json") << j.dump();
    const Process p = run_cli("run \"" + (dir / "bad.json").string() + "\"");
    EXPECT_EQ(p.status, 2);
    EXPECT_NE(p.output.find("pulse.foo"), std::string::npos);
}

TEST(Cli, SweepWritesTable) {
    const fs::path dir = scratch("cli_sweep");
    Json j = weak_config();
    j["mode"] = "sweep";
    j["eta_end"] = 10;
    j["output"]["csv"] = "sweep.csv";
    j["sweep"] = Json::parse(R"({"grid": {"pulse.lambda": [0.1, 0.2]}})");
    std::ofstream(dir / "sweep.json") << j.dump();
    const Process p = run_cli("--out \"" + dir.string() + "\" --threads 2 sweep \"" + (dir / "sweep.json").string() + "\"");
    EXPECT_EQ(p.status, 0) << p.output;
    EXPECT_EQ(read_csv(dir / "sweep.csv").size(), 3u);
}
