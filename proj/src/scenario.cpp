#include "paramode/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "paramode/errors.hpp"
#include "paramode/parallel.hpp"
#include "paramode/units.hpp"

namespace paramode {
namespace fs = std::filesystem;

namespace {

class ArtifactWriter {
public:
    explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    void add(const std::string& rel, const std::string& content)
    {
        const fs::path p = dir_ / rel;
        if (p.has_parent_path())
            fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot write artifact " + p.string());
        out << content;
        if (!out)
            throw Error("failed writing artifact " + p.string());
        artifacts_.push_back({rel, sha256_hex(content), content.size()});
    }

    void add_json(const std::string& rel, const json& j) { add(rel, j.dump(2) + "\n"); }

    std::vector<Artifact>& artifacts() { return artifacts_; }
    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::vector<Artifact> artifacts_;
};

std::string point_name(const std::string& stem, std::size_t i, std::size_t count, const std::string& ext)
{
    const int width = std::max<int>(3, static_cast<int>(std::to_string(count - 1).size()));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*zu", width, i);
    return stem + "_" + buf + ext;
}

template <class F>
std::string render(F&& f)
{
    std::ostringstream os;
    f(os);
    return os.str();
}

double modulation_amplitude_for(const ScenarioConfig& cfg, double g)
{
    return cfg.coupling.eta > 0.0 ? g / cfg.coupling.eta : cfg.operating_point.delta_phi;
}

MotionalShifts shifts_at(const ScenarioConfig& cfg, double delta_phi)
{
    if (!cfg.motional_shifts || delta_phi == 0.0)
        return {};
    FluxOperatingPoint op = cfg.operating_point;
    op.delta_phi = delta_phi;
    return {motional_shift(cfg.probed_mode, op, cfg.device), motional_shift(cfg.partner_mode, op, cfg.device)};
}

double step_for(const ScenarioConfig& cfg, const RunOptions& opt, const TwoModeSystem& sys,
                const ModulationSchedule& schedule, const DriveSpec& drive)
{
    if (opt.dt_override)
        return *opt.dt_override;
    if (cfg.dt)
        return *cfg.dt;
    return default_step(sys, schedule, drive);
}

json dips_json(const Spectrum& s)
{
    json arr = json::array();
    for (const auto& d : find_dips(s))
        arr.push_back({{"omega_p", {{"ghz", to_ghz(d.x)}}}, {"abs_rc", d.y}});
    return arr;
}

// Scenario bodies -------------------------------------------------------------

void run_flux_arch(const ScenarioConfig& cfg, const RunOptions&, ArtifactWriter& w, json& summary)
{
    const auto phis = cfg.sweep->values();
    std::vector<ArchSamples> samples;
    for (const auto& [n, m] : cfg.device.modes) {
        ArchSamples s{n, phis, {}};
        for (double p : phis)
            s.omega.push_back(mode_frequency(n, p, cfg.device));
        samples.push_back(std::move(s));
    }
    w.add("arch.csv", render([&](std::ostream& os) {
              os << "phi_dc_phi0";
              for (const auto& s : samples)
                  os << ",mode" << s.mode << "_ghz";
              os << '\n';
              for (std::size_t i = 0; i < phis.size(); ++i) {
                  os << format_number(phis[i]);
                  for (const auto& s : samples)
                      os << ',' << format_number(to_ghz(s.omega[i]));
                  os << '\n';
              }
          }));

    json at_bias = json::object();
    for (const auto& [n, m] : cfg.device.modes)
        at_bias[std::to_string(n)] = {{"ghz", to_ghz(mode_frequency(n, cfg.operating_point.phi_dc, cfg.device))}};
    summary["frequencies_at_bias"] = at_bias;
    summary["phi_dc"] = {{"phi0", cfg.operating_point.phi_dc}};

    if (!cfg.run_fit || samples.size() < 2 || phis.size() < 4)
        return;
    // Start away from the generating parameters: junction values +10 %,
    // arch tops from the highest sampled frequency.
    ArchGuess guess;
    guess.critical_current = 1.1 * cfg.device.critical_current;
    guess.asymmetry = std::min(1.0, 1.1 * cfg.device.asymmetry + 0.01);
    for (const auto& s : samples)
        guess.omega_zero_flux[s.mode] = *std::max_element(s.omega.begin(), s.omega.end());
    const ArchFit fit = fit_flux_arch(samples, guess);
    std::vector<std::string> names{"critical_current", "asymmetry"};
    std::vector<std::string> units{"a", "1"};
    for (const auto& s : samples) {
        names.push_back("omega_zero_flux_mode" + std::to_string(s.mode));
        units.push_back("ghz");
    }
    json fj = fit_result_json(fit.result, names, units);
    fj["gauge"] = {{"ratio_hint_ohm2", fit.ratio_hint}};
    json shorts = json::object();
    for (const auto& [n, w] : fit.omega_short)
        shorts[std::to_string(n)] = {{"ghz", to_ghz(w)}};
    fj["omega_short"] = shorts;
    const DeviceParams fitted = fit.device();
    json fitted_freqs = json::object();
    for (const auto& s : samples)
        fitted_freqs[std::to_string(s.mode)] = {{"ghz", to_ghz(mode_frequency(s.mode, cfg.operating_point.phi_dc, fitted))}};
    fj["fitted_frequencies_at_bias"] = fitted_freqs;
    w.add_json("arch_fit.json", fj);
}

void run_spectrum(const ScenarioConfig& cfg, const RunOptions& opt, ArtifactWriter& w, json& summary)
{
    const TwoModeSystem sys = build_system(cfg, cfg.operating_point.delta_phi);
    const auto grid = cfg.probe->values();
    const Spectrum s = spectrum_sweep(sys, grid, opt.threads);
    w.add("spectrum.csv", render([&](std::ostream& os) { write_spectrum_csv(os, s); }));
    json side = spectrum_sidecar(s);
    side["dips"] = dips_json(s);
    w.add_json("spectrum.json", side);
    summary["dips"] = side["dips"];
}

void run_splitting_map(const ScenarioConfig& cfg, const RunOptions& opt, ArtifactWriter& w, json& summary)
{
    const int lower = std::min(cfg.probed_mode, cfg.partner_mode);
    const int upper = std::max(cfg.probed_mode, cfg.partner_mode);
    ScenarioConfig lower_cfg = cfg;
    lower_cfg.probed_mode = lower;
    lower_cfg.partner_mode = upper;
    ScenarioConfig upper_cfg = cfg;
    upper_cfg.probed_mode = upper;
    upper_cfg.partner_mode = lower;
    const TwoModeSystem lo = build_system(lower_cfg, cfg.operating_point.delta_phi);
    const TwoModeSystem hi = build_system(upper_cfg, cfg.operating_point.delta_phi);
    const auto mod = cfg.sweep->values();
    const auto pl = cfg.probe_lower->values();
    const auto pu = cfg.probe_upper->values();
    const SplittingMaps maps = splitting_directions(lo, hi, mod, pl, pu, opt.threads);

    auto write_map = [&](const std::string& name, const SplittingMap& m) {
        w.add(name, render([&](std::ostream& os) {
                  os << "omega_mod_ghz,omega_p_ghz,abs_rc\n";
                  for (std::size_t i = 0; i < m.omega_mod_grid.size(); ++i)
                      for (std::size_t j = 0; j < m.probe_grid.size(); ++j)
                          os << format_number(to_ghz(m.omega_mod_grid[i])) << ','
                             << format_number(to_ghz(m.probe_grid[j])) << ',' << format_number(m.at(i, j)) << '\n';
              }));
    };
    write_map("map_probe_mode" + std::to_string(lower) + ".csv", maps.lower);
    write_map("map_probe_mode" + std::to_string(upper) + ".csv", maps.upper);
    summary["views"] = json::array({
        {{"probed_mode", lower}, {"partner_mode", upper}, {"partner_branch_slope", partner_branch_slope(lo)},
         {"system", to_json(lo)}},
        {{"probed_mode", upper}, {"partner_mode", lower}, {"partner_branch_slope", partner_branch_slope(hi)},
         {"system", to_json(hi)}},
    });
}

void run_splitting_sweep(const ScenarioConfig& cfg, const RunOptions& opt, ArtifactWriter& w, json& summary)
{
    const auto dphis = cfg.sweep->values();
    const auto grid = cfg.probe->values();
    const std::size_t n = dphis.size();
    std::vector<std::string> csv(n), side(n);
    std::vector<TwoModeSystem> systems(n);
    std::vector<std::optional<LambdaFit>> fits(n);
    const ModeParams& m3 = cfg.device.mode(cfg.probed_mode);
    const ModeParams& m2 = cfg.device.mode(cfg.partner_mode);
    const LambdaFixed fixed{m2.kappa_tot, m3.kappa_tot, m3.kappa_ext};

    parallel_for(n, opt.threads, [&](std::size_t i) {
        systems[i] = build_system(cfg, dphis[i]);
        const Spectrum s = spectrum_sweep(systems[i], grid, 1);
        csv[i] = render([&](std::ostream& os) { write_spectrum_csv(os, s); });
        json sj = spectrum_sidecar(s);
        sj["delta_phi"] = {{"phi0", dphis[i]}};
        side[i] = sj.dump(2) + "\n";
        if (!cfg.run_fit)
            return;
        // Initial guess from the sampled dips.
        const auto dips = find_dips(s);
        LambdaParams guess{0.5 * m3.kappa_tot, 0.0, 0.0};
        if (dips.size() >= 2) {
            const auto pair = deepest_dip_pair(s);
            guess.g = 0.5 * (pair[1].x - pair[0].x);
            guess.omega3_shifted = 0.5 * (pair[0].x + pair[1].x);
        } else if (!dips.empty()) {
            guess.omega3_shifted = std::min_element(dips.begin(), dips.end(), [](auto& a, auto& b) {
                                       return a.y < b.y;
                                   })->x;
        } else {
            guess.omega3_shifted = 0.5 * (grid.front() + grid.back());
        }
        fits[i] = fit_lambda(s, fixed, guess);
    });
    for (std::size_t i = 0; i < n; ++i) {
        w.add(point_name("spectrum", i, n, ".csv"), csv[i]);
        w.add(point_name("spectrum", i, n, ".json"), side[i]);
    }
    if (!cfg.run_fit)
        return;

    const double omega3_bare = mode_frequency(cfg.probed_mode, cfg.operating_point.phi_dc, cfg.device);
    std::vector<double> g_fit(n), shift_fit(n);
    for (std::size_t i = 0; i < n; ++i) {
        g_fit[i] = fits[i]->params.g;
        shift_fit[i] = fits[i]->params.omega3_shifted - omega3_bare;
    }
    w.add("scaling.csv", render([&](std::ostream& os) {
              os << "delta_phi_phi0,g_fit_mhz,delta2_fit_mhz,shift_fit_mhz,g_model_mhz,shift_model_mhz\n";
              for (std::size_t i = 0; i < n; ++i) {
                  os << format_number(dphis[i]) << ',' << format_number(to_mhz(g_fit[i])) << ','
                     << format_number(to_mhz(fits[i]->params.delta2)) << ',' << format_number(to_mhz(shift_fit[i]))
                     << ',' << format_number(to_mhz(systems[i].g)) << ','
                     << format_number(to_mhz(systems[i].omega3_shifted - omega3_bare)) << '\n';
              }
          }));
    json sj;
    if (n >= 3) {
        const ScalingFit lin = fit_scaling(dphis, g_fit, 1);
        const ScalingFit quad = fit_scaling(dphis, shift_fit, 2);
        sj["g_linear"] = {{"eta", {{"ghz_per_phi0", lin.coefficient / ghz(1.0)}}},
                          {"std_error", {{"ghz_per_phi0", lin.standard_error / ghz(1.0)}}},
                          {"relative_residual", lin.relative_residual}};
        sj["shift_quadratic"] = {{"coefficient", {{"mhz_per_phi0_squared", quad.coefficient / mhz(1.0)}}},
                                 {"std_error", {{"mhz_per_phi0_squared", quad.standard_error / mhz(1.0)}}},
                                 {"relative_residual", quad.relative_residual}};
    }
    json warnings = json::array();
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& msg : fits[i]->result.warnings)
            warnings.push_back({{"point", i}, {"warning", msg}});
    sj["warnings"] = warnings;
    w.add_json("scaling_fit.json", sj);
    summary["points"] = n;
}

void run_beating(const ScenarioConfig& cfg, const RunOptions& opt, ArtifactWriter& w, json& summary)
{
    const auto gs = cfg.sweep->values();
    const std::size_t n = gs.size();
    std::vector<std::string> csv(n), side(n);
    std::vector<json> metrics(n);
    const DriveSpec drive = *cfg.drive;
    parallel_for(n, opt.threads, [&](std::size_t i) {
        const double dphi = modulation_amplitude_for(cfg, gs[i]);
        const MotionalShifts sh = shifts_at(cfg, dphi);
        TwoModeSystem sys = build_system(cfg, 0.0);
        sys.omega3_shifted += sh.shift3;
        sys.omega2_shifted += sh.shift2;
        sys.g = gs[i];
        const auto schedule = ModulationSchedule::always_on(cfg.time.t_begin, cfg.time.t_end, gs[i], sh.shift3, sh.shift2);
        const double dt = step_for(cfg, opt, sys, schedule, drive);
        const TimeTrace tr = integrate(sys, schedule, drive, cfg.time, dt);
        csv[i] = render([&](std::ostream& os) { write_trace_csv(os, tr); });
        side[i] = trace_sidecar(tr).dump(2) + "\n";

        TimeWindow win;
        if (cfg.analysis_window) {
            win = *cfg.analysis_window;
        } else {
            const auto* g = std::get_if<GaussianEnvelope>(&drive.envelope);
            win.t_begin = g ? g->t0 + 2.0 * g->tau : cfg.time.t_begin;
            win.t_end = tr.t.back();
        }
        json mj{{"g", {{"mhz", to_mhz(gs[i])}}}, {"delta_phi", {{"phi0", dphi}}}};
        try {
            const BeatMetrics bm = beating_metrics(tr, win);
            mj["beat_period"] = {{"ns", to_ns(bm.beat_period)}};
            mj["visibility"] = bm.visibility;
            mj["retrieved_fraction"] = bm.retrieved_fraction;
        } catch (const InsufficientPeaksError&) {
            mj["beating"] = "unresolved";
        }
        const EnergyLedger e = energy_balance(tr, sys);
        mj["energy_residual_relative"] = e.residual / e.in_energy;
        metrics[i] = mj;
    });
    json all = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        w.add(point_name("trace", i, n, ".csv"), csv[i]);
        w.add(point_name("trace", i, n, ".json"), side[i]);
        all.push_back(metrics[i]);
    }
    w.add_json("metrics.json", all);
    summary["points"] = n;
}

void run_memory(const ScenarioConfig& cfg, const RunOptions& opt, ArtifactWriter& w, json& summary)
{
    const auto ts = cfg.sweep->values();
    const std::size_t n = ts.size();
    std::vector<std::string> csv(n), side(n);
    std::vector<BeatMetrics> metrics(n);
    const DriveSpec drive = *cfg.drive;
    const double dphi = modulation_amplitude_for(cfg, cfg.g_on);
    const MotionalShifts sh = shifts_at(cfg, dphi);
    TwoModeSystem sys = build_system(cfg, 0.0);
    sys.omega3_shifted += sh.shift3;
    sys.omega2_shifted += sh.shift2;
    sys.g = cfg.g_on;
    const auto probe_schedule =
        ModulationSchedule::always_on(cfg.time.t_begin, cfg.time.t_end, cfg.g_on, sh.shift3, sh.shift2);
    const double dt = step_for(cfg, opt, sys, probe_schedule, drive);

    parallel_for(n, opt.threads, [&](std::size_t i) {
        const TimeTrace tr = memory_sequence(sys, drive, cfg.g_on, cfg.t_off, ts[i], cfg.time, dt, sh);
        csv[i] = render([&](std::ostream& os) { write_trace_csv(os, tr); });
        side[i] = trace_sidecar(tr).dump(2) + "\n";
        const double t_retrieve = cfg.t_off + ts[i];
        metrics[i] = beating_metrics(tr, {std::min(t_retrieve, tr.t.back()), tr.t.back()});
    });

    json all = json::array();
    const double ref = metrics.front().first_peak_value;
    for (std::size_t i = 0; i < n; ++i) {
        w.add(point_name("trace", i, n, ".csv"), csv[i]);
        w.add(point_name("trace", i, n, ".json"), side[i]);
        const double expected = std::exp(-0.5 * sys.kappa_tot2 * (ts[i] - ts.front()));
        all.push_back({{"storage_time", {{"ns", to_ns(ts[i])}}},
                       {"first_retrieved_peak", {{"ns", to_ns(metrics[i].first_peak_time)}}},
                       {"first_retrieved_peak_value", metrics[i].first_peak_value},
                       {"amplitude_ratio", metrics[i].first_peak_value / ref},
                       {"expected_ratio", expected},
                       {"stored_fraction", metrics[i].stored_fraction},
                       {"retrieved_fraction", metrics[i].retrieved_fraction},
                       {"beat_period", {{"ns", to_ns(metrics[i].beat_period)}}}});
    }
    w.add_json("metrics.json", all);
    summary["points"] = n;
    summary["dt"] = {{"ns", to_ns(dt)}};
}

void run_fit(const ScenarioConfig& cfg, const RunOptions&, ArtifactWriter& w, json& summary)
{
    std::ifstream in(cfg.fit.input);
    if (!in)
        throw ConfigError("cannot read fit input " + cfg.fit.input.string());
    const Spectrum s = read_spectrum_csv(in);
    json out;
    if (cfg.fit.model == "single-mode") {
        if (cfg.fit.use_phase && s.metadata.sweep != "spectrum CSV")
            throw ConfigError("phase fitting needs the four-column spectrum CSV");
        const SingleModeFit f = fit_single_mode(s, cfg.fit.single_mode_guess, {cfg.fit.use_phase});
        out = fit_result_json(f.result, {"omega_r", "kappa_tot", "kappa_ext"}, {"ghz", "mhz", "mhz"});
        out["model"] = "single-mode";
        if (!cfg.fit.use_phase)
            out["mirror_candidate"] = {{"kappa_ext", {{"mhz", to_mhz(f.mirror.kappa_ext)}}},
                                       {"residual_norm", f.mirror_residual_norm}};
    } else {
        const LambdaFit f =
            fit_lambda(s, cfg.fit.lambda_fixed, cfg.fit.lambda_guess, {cfg.fit.fit_amplitude_scale});
        std::vector<std::string> names{"g", "delta2", "omega3_shifted"};
        std::vector<std::string> units{"mhz", "mhz", "ghz"};
        if (cfg.fit.fit_amplitude_scale) {
            names.push_back("amplitude_scale");
            units.push_back("1");
        }
        out = fit_result_json(f.result, names, units);
        out["model"] = "lambda";
    }
    w.add_json("fit.json", out);
    summary["converged"] = out["converged"];
}

} // namespace

TwoModeSystem build_system(const ScenarioConfig& cfg, double delta_phi)
{
    const ModeParams& probed = cfg.device.mode(cfg.probed_mode);
    const ModeParams& partner = cfg.device.mode(cfg.partner_mode);
    FluxOperatingPoint op = cfg.operating_point;
    op.delta_phi = delta_phi;
    // The period average does not depend on the modulation rate, and a
    // splitting map sweeps that rate separately.
    if (delta_phi > 0.0 && !(op.omega_mod > 0.0))
        op.omega_mod = 1.0;
    TwoModeSystem sys;
    const bool shift = cfg.motional_shifts && delta_phi > 0.0;
    sys.omega3_shifted = shift ? motional_average(cfg.probed_mode, op, cfg.device)
                               : mode_frequency(cfg.probed_mode, op.phi_dc, cfg.device);
    sys.omega2_shifted = shift ? motional_average(cfg.partner_mode, op, cfg.device)
                               : mode_frequency(cfg.partner_mode, op.phi_dc, cfg.device);
    sys.kappa_tot3 = probed.kappa_tot;
    sys.kappa_ext3 = probed.kappa_ext;
    sys.kappa_tot2 = partner.kappa_tot;
    sys.g = coupling_strength(delta_phi, cfg.coupling);
    sys.omega_mod = cfg.operating_point.omega_mod;
    sys.conversion = cfg.partner_mode < cfg.probed_mode ? 1 : -1;
    return sys;
}

RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options)
{
    if (options.dt_override && !(*options.dt_override > 0.0))
        throw ConfigError("--dt-override must be positive");
    RunResult result;
    result.directory = options.out_dir.value_or(cfg.output_dir);
    ArtifactWriter w(result.directory);
    json summary = json::object();

    switch (cfg.scenario) {
    case Scenario::flux_arch: run_flux_arch(cfg, options, w, summary); break;
    case Scenario::spectrum: run_spectrum(cfg, options, w, summary); break;
    case Scenario::splitting_map: run_splitting_map(cfg, options, w, summary); break;
    case Scenario::splitting_sweep: run_splitting_sweep(cfg, options, w, summary); break;
    case Scenario::beating: run_beating(cfg, options, w, summary); break;
    case Scenario::memory: run_memory(cfg, options, w, summary); break;
    case Scenario::fit: run_fit(cfg, options, w, summary); break;
    }

    json config = cfg.normalized;
    config.erase("output");
    json files = json::array();
    for (const auto& a : w.artifacts())
        files.push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}});
    result.manifest = {{"scenario", to_string(cfg.scenario)},
                       {"config", config},
                       {"summary", summary},
                       {"files", files}};
    if (options.dt_override)
        result.manifest["dt_override"] = {{"ns", to_ns(*options.dt_override)}};
    result.artifacts = w.artifacts();
    std::ofstream mf(result.directory / "manifest.json", std::ios::binary | std::ios::trunc);
    mf << result.manifest.dump(2) << "\n";
    if (!mf)
        throw Error("cannot write manifest.json");
    return result;
}

} // namespace paramode
