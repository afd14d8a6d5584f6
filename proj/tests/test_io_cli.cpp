#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "paramode/errors.hpp"
#include "paramode/scenario.hpp"

using namespace paramode;
namespace fs = std::filesystem;

namespace {

const fs::path config_dir{PARAMODE_CONFIG_DIR};

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / "paramode_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

json read_json(const fs::path& p)
{
    std::ifstream in(p);
    return json::parse(in);
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json load_doc(const std::string& name)
{
    return read_json(config_dir / name);
}

ValidationReport check(const json& doc)
{
    return validate_config_json(doc, config_dir / "inline.json");
}

bool has_error(const ValidationReport& r, const std::string& needle)
{
    for (const auto& e : r.errors)
        if (e.find(needle) != std::string::npos)
            return true;
    return false;
}

int run_cli(const std::string& args, const fs::path& log)
{
    const std::string cmd = std::string(PARAMODE_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
#ifdef WEXITSTATUS
    return WEXITSTATUS(status);
#else
    return status;
#endif
}

} // namespace

TEST_CASE("number formatting is shortest round-trip")
{
    for (double v : {0.1, 5.7284, -1e-300, 123456789.0, 1.0 / 3.0}) {
        const std::string s = format_number(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("spectrum CSV round trip")
{
    const TwoModeSystem sys = fixtures::resonant_system(6.6);
    const Spectrum s = spectrum_sweep(sys, linspace(ghz(5.70), ghz(5.75), 51));
    std::stringstream io;
    write_spectrum_csv(io, s);
    const std::string text = io.str();
    CHECK(text.rfind("omega_p_ghz,re_rc,im_rc,abs_rc\n", 0) == 0);
    const Spectrum back = read_spectrum_csv(io);
    REQUIRE(back.probe_grid.size() == s.probe_grid.size());
    for (std::size_t i = 0; i < s.r_c.size(); ++i) {
        CHECK(back.r_c[i] == s.r_c[i]);
        CHECK(fixtures::rel_diff(back.probe_grid[i], s.probe_grid[i]) < 1e-15);
    }

    std::istringstream two("freq,mag\n5.70,0.9\n5.71,0.5\n5.72,0.8\n");
    const Spectrum generic = read_spectrum_csv(two);
    REQUIRE(generic.r_c.size() == 3);
    CHECK(generic.r_c[1] == cplx{0.5, 0.0});
    CHECK(to_ghz(generic.probe_grid[2]) == doctest::Approx(5.72));

    std::istringstream bad("5.70,0.9\n5.69,0.5\n");
    CHECK_THROWS_AS(read_spectrum_csv(bad), ConfigError);
}

TEST_CASE("trace CSV schema")
{
    const auto f = fixtures::pulse_fixture(17.6, 50.0);
    const auto sched = ModulationSchedule::always_on(f.span.t_begin, f.span.t_end, f.system.g);
    const TimeTrace tr = integrate(f.system, sched, f.drive, f.span, default_step(f.system, sched, f.drive));
    std::stringstream io;
    write_trace_csv(io, tr);
    std::string line;
    std::getline(io, line);
    CHECK(line == "t_ns,re_a,im_a,re_b,im_b,re_aout,im_aout,v_out");
    std::size_t rows = 0;
    while (std::getline(io, line))
        ++rows;
    CHECK(rows == tr.size());
    const json side = trace_sidecar(tr);
    CHECK(side.contains("system"));
    CHECK(side.contains("schedule"));
}

TEST_CASE("sha256 of known strings")
{
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("every shipped configuration validates")
{
    for (const auto& entry : fs::directory_iterator(config_dir)) {
        if (entry.path().extension() != ".json" || entry.path().filename() == "device.json")
            continue;
        const ValidationReport r = validate_config(entry.path());
        INFO(entry.path().string());
        CHECK(r.ok());
    }
}

TEST_CASE("configuration errors carry JSON-pointer paths")
{
    json doc = load_doc("fig1c_spectrum.json");

    SUBCASE("bare numbers are rejected")
    {
        doc["operating_point"]["phi_dc"] = 0.33;
        const auto r = check(doc);
        CHECK(has_error(r, "/operating_point/phi_dc: bare number"));
    }
    SUBCASE("unknown fields are rejected")
    {
        doc["colour"] = "red";
        CHECK(has_error(check(doc), "/colour: unknown field"));
    }
    SUBCASE("kappa_ext above kappa_tot names the field")
    {
        json dev = load_doc("device.json");
        dev["modes"][1]["kappa_ext"] = {{"mhz", 9.0}};
        doc["device"] = dev;
        CHECK(has_error(check(doc), "/device/modes/1/kappa_ext: invariant violated"));
    }
    SUBCASE("unknown scenario lists the allowed names")
    {
        doc["scenario"] = "spectra";
        const auto r = check(doc);
        REQUIRE_FALSE(r.ok());
        for (const auto& name : scenario_names())
            CHECK(r.errors.front().find(name) != std::string::npos);
    }
    SUBCASE("errors are aggregated")
    {
        doc["colour"] = "red";
        doc["probe"]["count"] = 0;
        doc["operating_point"]["phi_dc"] = 0.33;
        CHECK(check(doc).errors.size() >= 3);
    }
    SUBCASE("decreasing sweep axis")
    {
        doc["probe"]["stop"] = {{"ghz", 5.0}};
        CHECK(has_error(check(doc), "/probe: sweep axis must be strictly increasing"));
    }
    SUBCASE("missing referenced file")
    {
        doc["device"] = "missing_device.json";
        CHECK(has_error(check(doc), "/device"));
    }
    SUBCASE("normalized echo resolves defaults")
    {
        const auto r = check(doc);
        REQUIRE(r.ok());
        CHECK(r.config->normalized.contains("output"));
        CHECK(r.config->normalized["modes"]["probed"] == 3);
    }
}

TEST_CASE("spectrum configuration shows the mode-3 dip")
{
    const ScenarioConfig cfg = load_config(config_dir / "fig1c_spectrum.json");
    RunOptions opt;
    opt.out_dir = scratch("spectrum");
    const RunResult res = run_scenario(cfg, opt);
    std::ifstream in(res.directory / "spectrum.csv");
    const Spectrum s = read_spectrum_csv(in);
    const auto dips = find_dips(s);
    REQUIRE(dips.size() == 1);
    CHECK(to_ghz(dips[0].x) == doctest::Approx(5.7284).epsilon(1e-7));
    CHECK(dips[0].y == doctest::Approx(0.1872).epsilon(1e-3));
    const json manifest = read_json(res.directory / "manifest.json");
    for (const auto& file : manifest["files"])
        CHECK(sha256_hex(slurp(res.directory / file["path"].get<std::string>())) == file["sha256"]);
}

TEST_CASE("memory configuration writes one trace per storage time")
{
    const ScenarioConfig cfg = load_config(config_dir / "fig5_memory.json");
    RunOptions opt;
    opt.out_dir = scratch("memory");
    opt.threads = 4;
    const RunResult res = run_scenario(cfg, opt);
    int traces = 0;
    for (const auto& a : res.artifacts)
        traces += a.path.rfind("trace_", 0) == 0 && a.path.ends_with(".csv") ? 1 : 0;
    CHECK(traces == 9);
    const json metrics = read_json(res.directory / "metrics.json");
    REQUIRE(metrics.size() == 9);
    for (const auto& m : metrics) {
        const double expected = m["expected_ratio"].get<double>();
        CHECK(std::abs(m["amplitude_ratio"].get<double>() - expected) < 0.05 * expected);
    }
}

TEST_CASE("single-point sweep equals the direct module call")
{
    json doc = load_doc("fig3_splitting_sweep.json");
    doc["sweep"] = {{"name", "delta_phi"}, {"start", {{"phi0", 0.0066}}}, {"stop", {{"phi0", 0.0066}}}, {"count", 1}};
    doc["fit"] = false;
    const ValidationReport r = check(doc);
    REQUIRE(r.ok());
    RunOptions opt;
    opt.out_dir = scratch("single_point");
    const RunResult res = run_scenario(*r.config, opt);
    std::vector<std::string> csvs;
    for (const auto& a : res.artifacts)
        if (a.path.ends_with(".csv"))
            csvs.push_back(a.path);
    REQUIRE(csvs.size() == 1);
    const Spectrum direct = spectrum_sweep(build_system(*r.config, 0.0066), r.config->probe->values());
    std::ostringstream os;
    write_spectrum_csv(os, direct);
    CHECK(slurp(res.directory / csvs[0]) == os.str());
}

TEST_CASE("artifacts are identical across thread counts")
{
    for (const char* name : {"fig2_splitting_map.json", "fig3_splitting_sweep.json", "fig4_beating.json"}) {
        const ScenarioConfig cfg = load_config(config_dir / name);
        RunOptions one, many;
        one.out_dir = scratch(std::string(name) + "_1");
        many.out_dir = scratch(std::string(name) + "_8");
        one.threads = 1;
        many.threads = 8;
        const RunResult a = run_scenario(cfg, one);
        const RunResult b = run_scenario(cfg, many);
        INFO(name);
        REQUIRE(a.artifacts.size() == b.artifacts.size());
        for (std::size_t i = 0; i < a.artifacts.size(); ++i) {
            CHECK(a.artifacts[i].path == b.artifacts[i].path);
            CHECK(a.artifacts[i].sha256 == b.artifacts[i].sha256);
        }
    }
}

TEST_CASE("command-line exit codes")
{
    const fs::path dir = scratch("cli");
    const fs::path log = dir / "log.txt";
    const std::string cfg = (config_dir / "fig1c_spectrum.json").string();

    CHECK(run_cli("validate --config " + cfg, log) == 0);
    CHECK(slurp(log).rfind("OK", 0) == 0);
    CHECK(run_cli("spectrum --config " + cfg + " --out " + (dir / "run").string(), log) == 0);
    CHECK(fs::exists(dir / "run" / "manifest.json"));

    // Scenario and subcommand disagree.
    CHECK(run_cli("memory --config " + cfg, log) == 2);
    CHECK(run_cli("spectrum --config " + (dir / "absent.json").string(), log) == 2);

    std::ofstream(dir / "bad.json") << R"({"scenario": "spectra"})";
    CHECK(run_cli("validate --config " + (dir / "bad.json").string(), log) == 2);
    CHECK(slurp(log).find("allowed:") != std::string::npos);

    // A step above the resolution ceiling is a numerical failure.
    const std::string beat = (config_dir / "fig4_beating.json").string();
    CHECK(run_cli("beating --config " + beat + " --out " + (dir / "beat").string() + " --dt-override 1e-8", log)
          == 3);
    CHECK(slurp(log).find("exceeds the resolution limit") != std::string::npos);
}
