#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "piezotherm/cli.hpp"
#include "piezotherm/config.hpp"
#include "piezotherm/io.hpp"

using namespace piezotherm;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "piezotherm_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json small_config() {
    return json::parse(R"({
      "grid": {"h": 1.0, "n_elem": 16},
      "time": {"T": 1.0, "n_step": 32},
      "materials": {"p1": 1.0, "p2": 0.5, "p3": 1.0},
      "coefficients": {"rho": 1.0, "c_th": 1.0, "k": 0.1, "beta": 0.3, "tau": 0.05,
                       "gamma_lower": 1e-3, "gamma_upper": 1e3},
      "excitation": {"waveform": "sine_burst", "amplitude": 0.5, "frequency": 1.0, "cycles": 1.0},
      "initial": {"u0": 0.0, "u1": {"type": "sine", "amplitude": 0.1, "mode": 1},
                  "theta0": {"type": "cosine", "offset": 1.0, "amplitude": 1.0, "mode": 1}},
      "observation": {"kind": "bulk", "delta": 0.01, "seed": 3},
      "inversion": {"max_iter": 30, "basis_size": 8, "truth": {"p2": 0.6, "p3": 1.2}},
      "epsilon_study": {"eps": [0.1, 0.01]},
      "convergence": {"levels": 2},
      "derivative_check": {"samples": 3}
    })");
}

fs::path write_config(const fs::path& dir, const json& j) {
    const fs::path p = dir / "config.input.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "piezotherm");
    std::ostringstream out, err;
    const int code = run_command(args, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST(Config, DefaultLoadsAndRoundTrips) {
    const auto c = ExperimentConfig::load(std::string(PIEZOTHERM_CONFIG_DIR) + "/default.json");
    EXPECT_EQ(c.n_elem, 128u);
    EXPECT_EQ(c.n_step, 512u);
    EXPECT_DOUBLE_EQ(c.length, 1e-2);
    EXPECT_DOUBLE_EQ(c.end_time, 1e-3);
    const json j = c.to_json();
    EXPECT_EQ(ExperimentConfig::from_json(j).to_json(), j);
    const Model m = c.model();
    EXPECT_NEAR(m.params.p2.at(0, 0), 15.0, 1e-12);
    EXPECT_GT(m.lift.phi_e_norm, 0.0);
}

TEST(Config, ErrorsNameTheField) {
    auto j = small_config();
    j["grid"]["nelem"] = 4;
    try {
        ExperimentConfig::from_json(j);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("grid.nelem"), std::string::npos) << e.what();
    }
    j = small_config();
    j["observation"]["delta"] = -1.0;
    EXPECT_THROW(ExperimentConfig::from_json(j), ConfigError);
    j = small_config();
    j["grid"]["n_elem"] = 0;
    EXPECT_THROW(ExperimentConfig::from_json(j), InvalidArgument);
    j = small_config();
    j["coefficients"]["rho"] = {{"type", "spline"}};
    try {
        ExperimentConfig::from_json(j);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("coefficients.rho"), std::string::npos) << e.what();
    }
    j = small_config();
    j["inversion"]["tau_dp"] = 0.9;
    EXPECT_THROW(ExperimentConfig::from_json(j), InvalidArgument);
}

TEST(Config, ParseErrorReportsLine) {
    const auto dir = scratch("parse_error");
    std::ofstream(dir / "bad.json") << "{\n  \"grid\": {\"h\": 1.0,\n  }\n}\n";
    try {
        ExperimentConfig::load((dir / "bad.json").string());
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    EXPECT_THROW(ExperimentConfig::load((dir / "missing.json").string()), ConfigError);
}

TEST(Config, CoefficientAndProfileForms) {
    auto j = small_config();
    j["coefficients"]["rho"] = {{"type", "affine"}, {"c0", 1.0}, {"cz", 0.5}, {"ct", 0.0}};
    j["coefficients"]["tau"] = {{"type", "tabulated"}, {"theta", {0.0, 2.0}}, {"tau", {0.1, 0.05}}};
    j["initial"]["theta0"] = {{"type", "tabulated"}, {"z", {0.0, 1.0}}, {"values", {0.0, 2.0}}};
    j["excitation"] = {{"waveform", "tabulated"}, {"t", {0.0, 1.0}}, {"values", {0.0, 1.0}}};
    const auto c = ExperimentConfig::from_json(j);
    const Model m = c.model();
    EXPECT_NEAR(m.coeffs.rho.at(0, 16), 1.5, 1e-14);
    EXPECT_NEAR(m.coeffs.tau(1.0), 0.075, 1e-14);
    EXPECT_FALSE(m.coeffs.tau.is_constant());
    EXPECT_NEAR(m.lift.phi_e[16], 0.5, 1e-14);
    const auto init = c.initial_data();
    EXPECT_NEAR(init.theta0[8], 1.0, 1e-14);
    EXPECT_NEAR(init.u1[8], 0.1, 1e-14);

    j["excitation"] = {{"waveform", "zero"}};
    const auto z = ExperimentConfig::from_json(j);
    EXPECT_TRUE(z.excitation_is_zero());
    EXPECT_THROW(z.model(), InvalidArgument);
    EXPECT_NO_THROW(z.model(true));
}

TEST(Config, MollifyApplied) {
    auto j = small_config();
    j["initial"]["theta0"] = {{"type", "tabulated"}, {"z", {0.0, 0.5, 0.5001, 1.0}}, {"values", {0.0, 0.0, 2.0, 2.0}}};
    j["solver"] = {{"epsilon", 0.0}, {"mollify", 0.01}};
    const auto c = ExperimentConfig::from_json(j);
    const auto init = c.initial_data();
    EXPECT_GT(init.theta0[7], 0.0);
    EXPECT_LT(init.theta0[9], 2.0);
}

TEST(Io, FormatDoubleRoundTrip) {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) EXPECT_EQ(std::stod(format_double(x)), x);
}

TEST(Io, FieldAndTraceFiles) {
    const auto dir = scratch("io");
    const SpatialGrid g(1.0, 4);
    const TimeGrid t(2.0, 3);
    const auto f = SpaceTimeField::from_function(g, t, [](double z, double tt) { return z + 10.0 * tt; });
    write_field_csv(dir / "f.csv", f);
    std::ifstream in(dir / "f.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "0,0.25,0.5,0.75,1");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 4);

    ObservationTrace tr{t, {1.0, -2.0, 0.5, 1.0 / 3.0}, TraceKind::window, 0.1, 0.02, 7, "note", {}};
    write_trace_csv(dir / "sub" / "tr.csv", tr);
    const json side = json::parse(slurp(dir / "sub" / "tr.csv.json"));
    EXPECT_EQ(side["kind"], "window");
    EXPECT_EQ(side["seed"], 7);
    const auto back = read_trace_csv(dir / "sub" / "tr.csv", t);
    EXPECT_EQ(back.values, tr.values);
    EXPECT_EQ(back.kind, TraceKind::window);
    EXPECT_EQ(back.delta, 0.02);
    EXPECT_THROW(read_trace_csv(dir / "sub" / "tr.csv", TimeGrid(2.0, 5)), Error);
}

TEST(Cli, ValidateDefault) {
    const auto dir = scratch("validate");
    const auto r = run({"validate", "--config", std::string(PIEZOTHERM_CONFIG_DIR) + "/default.json", "--out",
                        dir.string()});
    EXPECT_EQ(r.code, exit_ok) << r.err;
    EXPECT_NE(r.out.find("p3"), std::string::npos);
    EXPECT_NE(r.out.find("rho"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "config.json"));
}

TEST(Cli, ValidateRejectsBadCoefficients) {
    const auto dir = scratch("validate_bad");
    auto j = small_config();
    j["coefficients"]["gamma_lower"] = 1.0;
    const auto r = run({"validate", "--config", write_config(dir, j).string(), "--out", dir.string()});
    EXPECT_EQ(r.code, exit_invalid);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, exit_invalid);
    EXPECT_EQ(run({"frobnicate", "--config", "x.json"}).code, exit_invalid);
    EXPECT_EQ(run({"forward"}).code, exit_invalid);
    const auto missing = run({"forward", "--config", "/nonexistent/config.json"});
    EXPECT_EQ(missing.code, exit_invalid);
    EXPECT_FALSE(missing.err.empty());
}

TEST(Cli, ForwardZeroExcitation) {
    const auto dir = scratch("forward_zero");
    auto j = small_config();
    j["excitation"] = {{"waveform", "zero"}};
    j["initial"] = {{"u0", 0.0}, {"u1", 0.0}, {"theta0", 0.0}};
    const auto r = run({"forward", "--config", write_config(dir, j).string(), "--out", dir.string()});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    for (const char* name : {"u.csv", "v.csv", "theta.csv", "phi0.csv"}) {
        std::ifstream in(dir / name);
        std::string line;
        std::getline(in, line);
        int rows = 0;
        while (std::getline(in, line)) {
            ++rows;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) EXPECT_EQ(std::stod(cell), 0.0) << name;
        }
        EXPECT_EQ(rows, 33) << name;
    }
    EXPECT_TRUE(fs::exists(dir / "summary.json"));
    EXPECT_TRUE(fs::exists(dir / "energy.csv"));
    EXPECT_FALSE(fs::exists(dir / "charge.csv"));
}

TEST(Cli, ForwardIsDeterministic) {
    const auto a = scratch("det_a"), b = scratch("det_b");
    auto j = small_config();
    j["observation"]["lower_half"] = true;
    const auto cfg = write_config(a, j);
    ASSERT_EQ(run({"forward", "--config", cfg.string(), "--out", a.string()}).code, exit_ok);
    ASSERT_EQ(run({"forward", "--config", cfg.string(), "--out", b.string()}).code, exit_ok);
    for (const char* name : {"u.csv", "theta.csv", "charge.csv", "charge_lower.csv", "summary.json"}) {
        ASSERT_TRUE(fs::exists(a / name)) << name;
        EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
    }
    json ca = json::parse(slurp(a / "config.json")), cb = json::parse(slurp(b / "config.json"));
    EXPECT_EQ(ca["output"]["dir"], a.string());
    ca.erase("output");
    cb.erase("output");
    EXPECT_EQ(ca, cb);
}

TEST(Cli, ObserveSeedOverride) {
    const auto a = scratch("obs_a"), b = scratch("obs_b");
    const auto cfg = write_config(a, small_config());
    ASSERT_EQ(run({"observe", "--config", cfg.string(), "--out", a.string(), "--seed", "11"}).code, exit_ok);
    ASSERT_EQ(run({"observe", "--config", cfg.string(), "--out", b.string(), "--seed", "12"}).code, exit_ok);
    EXPECT_EQ(slurp(a / "observation_clean.csv"), slurp(b / "observation_clean.csv"));
    EXPECT_NE(slurp(a / "observation.csv"), slurp(b / "observation.csv"));
    EXPECT_EQ(json::parse(slurp(a / "config.json"))["observation"]["seed"], 11);
}

TEST(Cli, DerivativeCheck) {
    const auto dir = scratch("derivative");
    const auto r = run({"derivative-check", "--config", write_config(dir, small_config()).string(), "--out",
                        dir.string()});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    const json rep = json::parse(slurp(dir / "derivative_check.json"));
    EXPECT_LE(rep["a_f_exactness"].get<double>(), 1e-12);
    EXPECT_LE(rep["a_l_remainder"].get<double>(), 1e-12);
    EXPECT_NEAR(rep["a_l_fd_slope"].get<double>(), 1.0, 0.1);
}

TEST(Cli, SweepCommands) {
    const auto dir = scratch("sweeps");
    const auto cfg = write_config(dir, small_config());
    ASSERT_EQ(run({"epsilon-study", "--config", cfg.string(), "--out", dir.string()}).code, exit_ok);
    const json eps = json::parse(slurp(dir / "epsilon_study.json"));
    EXPECT_EQ(eps["eps"].size(), 2u);
    EXPECT_TRUE(fs::exists(dir / "epsilon_study.csv"));
    ASSERT_EQ(run({"convergence", "--config", cfg.string(), "--out", dir.string()}).code, exit_ok);
    const json conv = json::parse(slurp(dir / "convergence.json"));
    EXPECT_EQ(conv["levels"].size(), 2u);
}

TEST(Cli, InvertAndDivergence) {
    const auto dir = scratch("invert");
    const auto cfg = write_config(dir, small_config());
    const auto r = run({"invert", "--config", cfg.string(), "--out", dir.string()});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    const json rep = json::parse(slurp(dir / "inversion.json"));
    EXPECT_FALSE(rep["iterations"].empty());
    EXPECT_TRUE(fs::exists(dir / "data.csv"));

    // nonfinite data: the objective is nonfinite at the initial guess
    const auto bad = scratch("invert_nan");
    std::string csv = slurp(dir / "data.csv");
    const auto pos = csv.find('\n', csv.find('\n') + 1);
    const auto comma = csv.find(',', pos);
    csv.replace(comma + 1, csv.find('\n', comma) - comma - 1, "nan");
    std::ofstream(bad / "data.csv") << csv;
    auto j = small_config();
    j["inversion"]["data"] = (bad / "data.csv").string();
    const auto d = run({"invert", "--config", write_config(bad, j).string(), "--out", bad.string()});
    EXPECT_EQ(d.code, exit_diverged) << d.err;
    EXPECT_TRUE(fs::exists(bad / "inversion.json"));
}

TEST(Cli, SolverFailureExitCode) {
    const auto dir = scratch("solver_failure");
    auto j = small_config();
    j["initial"]["u1"] = {{"type", "sine"}, {"amplitude", 1e300}, {"mode", 1}};
    const auto r = run({"forward", "--config", write_config(dir, j).string(), "--out", dir.string()});
    EXPECT_EQ(r.code, exit_solver) << r.err;
}
