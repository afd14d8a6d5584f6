#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "paramode/errors.hpp"
#include "paramode/scenario.hpp"
#include "paramode/units.hpp"

namespace paramode {
namespace fs = std::filesystem;

namespace {

enum class Dim { frequency, time, flux, current, power, inductance, capacitance, impedance, slope };

struct UnitDef {
    const char* key;
    double factor; ///< SI value per unit
};

const std::vector<UnitDef>& unit_table(Dim d)
{
    static const std::vector<UnitDef> frequency{{"ghz", two_pi * 1e9}, {"mhz", two_pi * 1e6},
                                                {"khz", two_pi * 1e3}, {"hz", two_pi}, {"rad_per_s", 1.0}};
    static const std::vector<UnitDef> time{{"ns", 1e-9}, {"us", 1e-6}, {"ps", 1e-12}, {"s", 1.0}};
    static const std::vector<UnitDef> flux{{"phi0", 1.0}};
    static const std::vector<UnitDef> current{{"ua", 1e-6}, {"na", 1e-9}, {"ma", 1e-3}, {"a", 1.0}};
    static const std::vector<UnitDef> power{{"dbm", 1.0}};
    static const std::vector<UnitDef> inductance{{"nh", 1e-9}, {"ph", 1e-12}, {"h", 1.0}};
    static const std::vector<UnitDef> capacitance{{"pf", 1e-12}, {"ff", 1e-15}, {"f", 1.0}};
    static const std::vector<UnitDef> impedance{{"ohm", 1.0}};
    static const std::vector<UnitDef> slope{{"ghz_per_phi0", two_pi * 1e9}, {"mhz_per_phi0", two_pi * 1e6}};
    switch (d) {
    case Dim::frequency: return frequency;
    case Dim::time: return time;
    case Dim::flux: return flux;
    case Dim::current: return current;
    case Dim::power: return power;
    case Dim::inductance: return inductance;
    case Dim::capacitance: return capacitance;
    case Dim::impedance: return impedance;
    case Dim::slope: return slope;
    }
    return flux;
}

std::string allowed_units(Dim d)
{
    std::string s;
    for (const auto& u : unit_table(d))
        s += (s.empty() ? "" : ", ") + std::string(u.key);
    return s;
}

double unit_factor(Dim d, const std::string& key)
{
    for (const auto& u : unit_table(d))
        if (key == u.key)
            return u.factor;
    throw ConfigError("unknown unit " + key);
}

json quantity_json(double si, Dim d, const std::string& unit)
{
    return json{{unit, si / unit_factor(d, unit)}};
}

class Parser {
public:
    std::vector<std::string> errors;

    void error(const std::string& ptr, const std::string& msg) { errors.push_back((ptr.empty() ? "/" : ptr) + ": " + msg); }

    std::optional<double> quantity(const json& obj, const std::string& key, const std::string& ptr, Dim dim,
                                   bool required)
    {
        const std::string p = ptr + "/" + key;
        if (!obj.is_object() || !obj.contains(key)) {
            if (required)
                error(p, "missing required field");
            return std::nullopt;
        }
        const json& v = obj.at(key);
        if (v.is_number()) {
            error(p, "bare number without a unit; write {\"<unit>\": value} with unit one of: " + allowed_units(dim));
            return std::nullopt;
        }
        if (!v.is_object() || v.size() != 1) {
            error(p, "expected a single-unit quantity object, units: " + allowed_units(dim));
            return std::nullopt;
        }
        const auto it = v.begin();
        const auto& table = unit_table(dim);
        const auto u = std::find_if(table.begin(), table.end(), [&](const UnitDef& d) { return it.key() == d.key; });
        if (u == table.end()) {
            error(p + "/" + it.key(), "unknown unit (allowed: " + allowed_units(dim) + ")");
            return std::nullopt;
        }
        if (!it.value().is_number()) {
            error(p + "/" + it.key(), "quantity value must be a number");
            return std::nullopt;
        }
        const double val = it.value().get<double>() * u->factor;
        if (!std::isfinite(val)) {
            error(p, "quantity must be finite");
            return std::nullopt;
        }
        return val;
    }

    std::optional<double> number(const json& obj, const std::string& key, const std::string& ptr, bool required)
    {
        const std::string p = ptr + "/" + key;
        if (!obj.is_object() || !obj.contains(key)) {
            if (required)
                error(p, "missing required field");
            return std::nullopt;
        }
        if (!obj.at(key).is_number()) {
            error(p, "expected a number");
            return std::nullopt;
        }
        return obj.at(key).get<double>();
    }

    std::optional<long long> integer(const json& obj, const std::string& key, const std::string& ptr, bool required)
    {
        const std::string p = ptr + "/" + key;
        if (!obj.is_object() || !obj.contains(key)) {
            if (required)
                error(p, "missing required field");
            return std::nullopt;
        }
        if (!obj.at(key).is_number_integer()) {
            error(p, "expected an integer");
            return std::nullopt;
        }
        return obj.at(key).get<long long>();
    }

    std::optional<bool> boolean(const json& obj, const std::string& key, const std::string& ptr)
    {
        if (!obj.is_object() || !obj.contains(key))
            return std::nullopt;
        if (!obj.at(key).is_boolean()) {
            error(ptr + "/" + key, "expected true or false");
            return std::nullopt;
        }
        return obj.at(key).get<bool>();
    }

    std::optional<std::string> string(const json& obj, const std::string& key, const std::string& ptr, bool required)
    {
        const std::string p = ptr + "/" + key;
        if (!obj.is_object() || !obj.contains(key)) {
            if (required)
                error(p, "missing required field");
            return std::nullopt;
        }
        if (!obj.at(key).is_string()) {
            error(p, "expected a string");
            return std::nullopt;
        }
        return obj.at(key).get<std::string>();
    }

    bool object(const json& obj, const std::string& key, const std::string& ptr, bool required)
    {
        if (!obj.contains(key)) {
            if (required)
                error(ptr + "/" + key, "missing required field");
            return false;
        }
        if (!obj.at(key).is_object()) {
            error(ptr + "/" + key, "expected an object");
            return false;
        }
        return true;
    }

    void known_keys(const json& obj, const std::string& ptr, std::initializer_list<const char*> keys)
    {
        if (!obj.is_object())
            return;
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
                error(ptr + "/" + it.key(), "unknown field");
        }
    }

    std::optional<SweepAxis> axis(const json& doc, const std::string& key, Dim dim, const std::string& default_name,
                                  bool required)
    {
        const std::string p = "/" + key;
        if (!object(doc, key, "", required))
            return std::nullopt;
        const json& a = doc.at(key);
        known_keys(a, p, {"name", "start", "stop", "count"});
        SweepAxis ax;
        ax.name = string(a, "name", p, false).value_or(default_name);
        if (ax.name != default_name)
            error(p + "/name", "this scenario sweeps '" + default_name + "'");
        const auto start = quantity(a, "start", p, dim, true);
        const auto stop = quantity(a, "stop", p, dim, true);
        const auto count = integer(a, "count", p, true);
        if (!start || !stop || !count)
            return std::nullopt;
        if (*count < 1) {
            error(p + "/count", "count must be at least 1");
            return std::nullopt;
        }
        ax.start = *start;
        ax.stop = *stop;
        ax.count = static_cast<std::size_t>(*count);
        if (ax.count > 1 && !(ax.stop > ax.start)) {
            error(p, "sweep axis must be strictly increasing (stop > start)");
            return std::nullopt;
        }
        return ax;
    }
};

json axis_json(const SweepAxis& ax, Dim dim, const std::string& unit)
{
    return {{"name", ax.name},
            {"start", quantity_json(ax.start, dim, unit)},
            {"stop", quantity_json(ax.stop, dim, unit)},
            {"count", ax.count}};
}

std::optional<json> read_json_file(const fs::path& path, Parser& ps, const std::string& ptr)
{
    std::ifstream in(path);
    if (!in) {
        ps.error(ptr, "cannot open file " + path.string());
        return std::nullopt;
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        ps.error(ptr, std::string("invalid JSON in ") + path.string() + ": " + e.what());
        return std::nullopt;
    }
}

std::optional<DeviceParams> parse_device(const json& dj, const std::string& ptr, Parser& ps)
{
    if (!dj.is_object()) {
        ps.error(ptr, "device must be an object or a path to a device JSON file");
        return std::nullopt;
    }
    ps.known_keys(dj, ptr, {"critical_current", "asymmetry", "modes"});
    const std::size_t errors_before = ps.errors.size();
    DeviceParams dev;
    const auto ic = ps.quantity(dj, "critical_current", ptr, Dim::current, true);
    const auto d = ps.number(dj, "asymmetry", ptr, true);
    if (ic) {
        dev.critical_current = *ic;
        if (!(*ic > 0.0))
            ps.error(ptr + "/critical_current", "invariant violated: critical current must be positive");
    }
    if (d) {
        dev.asymmetry = *d;
        if (!(*d >= 0.0 && *d <= 1.0))
            ps.error(ptr + "/asymmetry", "invariant violated: asymmetry must lie in [0, 1]");
    }
    const bool junction_ok = ps.errors.size() == errors_before;

    if (!dj.contains("modes") || !dj.at("modes").is_array() || dj.at("modes").empty()) {
        ps.error(ptr + "/modes", "expected a nonempty array of modes");
        return std::nullopt;
    }
    const json& modes = dj.at("modes");
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const std::string mp = ptr + "/modes/" + std::to_string(i);
        const json& m = modes[i];
        if (!m.is_object()) {
            ps.error(mp, "expected an object");
            continue;
        }
        ps.known_keys(m, mp, {"index", "inductance", "capacitance", "frequency", "calibration_flux", "impedance",
                              "kappa_tot", "kappa_ext"});
        const auto index = ps.integer(m, "index", mp, true);
        const auto kt = ps.quantity(m, "kappa_tot", mp, Dim::frequency, true);
        const auto ke = ps.quantity(m, "kappa_ext", mp, Dim::frequency, true);
        ModeParams mode;
        if (kt) {
            mode.kappa_tot = *kt;
            if (!(*kt > 0.0))
                ps.error(mp + "/kappa_tot", "invariant violated: kappa_tot must be positive");
        }
        if (ke) {
            mode.kappa_ext = *ke;
            if (!(*ke > 0.0))
                ps.error(mp + "/kappa_ext", "invariant violated: kappa_ext must be positive");
        }
        if (kt && ke && *ke > *kt)
            ps.error(mp + "/kappa_ext", "invariant violated: kappa_ext exceeds kappa_tot");

        const bool lumped = m.contains("inductance") || m.contains("capacitance");
        const bool calibrated = m.contains("frequency");
        if (lumped == calibrated) {
            ps.error(mp, "give either inductance and capacitance, or frequency with calibration_flux");
        } else if (lumped) {
            const auto l = ps.quantity(m, "inductance", mp, Dim::inductance, true);
            const auto c = ps.quantity(m, "capacitance", mp, Dim::capacitance, true);
            if (l && !(*l > 0.0))
                ps.error(mp + "/inductance", "invariant violated: inductance must be positive");
            if (c && !(*c > 0.0))
                ps.error(mp + "/capacitance", "invariant violated: capacitance must be positive");
            if (l && c) {
                mode.inductance = *l;
                mode.capacitance = *c;
            }
        } else {
            const auto f = ps.quantity(m, "frequency", mp, Dim::frequency, true);
            const auto at = ps.quantity(m, "calibration_flux", mp, Dim::flux, true);
            const double z = ps.quantity(m, "impedance", mp, Dim::impedance, false).value_or(50.0);
            if (f && !(*f > 0.0))
                ps.error(mp + "/frequency", "invariant violated: frequency must be positive");
            if (!(z > 0.0))
                ps.error(mp + "/impedance", "invariant violated: impedance must be positive");
            if (f && at && *f > 0.0 && z > 0.0 && junction_ok && ic && d) {
                try {
                    const auto lc = calibrate_lc(*f, *at, z * z, dev);
                    mode.inductance = lc.inductance;
                    mode.capacitance = lc.capacitance;
                } catch (const Error& e) {
                    ps.error(mp, e.what());
                }
            }
        }
        if (index) {
            if (dev.modes.contains(static_cast<int>(*index)))
                ps.error(mp + "/index", "duplicate mode index");
            dev.modes[static_cast<int>(*index)] = mode;
        }
    }
    return dev;
}

json device_json(const DeviceParams& dev)
{
    json modes = json::array();
    for (const auto& [n, m] : dev.modes) {
        modes.push_back({{"index", n},
                         {"inductance", quantity_json(m.inductance, Dim::inductance, "nh")},
                         {"capacitance", quantity_json(m.capacitance, Dim::capacitance, "pf")},
                         {"kappa_tot", quantity_json(m.kappa_tot, Dim::frequency, "mhz")},
                         {"kappa_ext", quantity_json(m.kappa_ext, Dim::frequency, "mhz")}});
    }
    return {{"critical_current", quantity_json(dev.critical_current, Dim::current, "ua")},
            {"asymmetry", dev.asymmetry},
            {"modes", modes}};
}

} // namespace

std::string to_string(Scenario s)
{
    switch (s) {
    case Scenario::flux_arch: return "flux-arch";
    case Scenario::spectrum: return "spectrum";
    case Scenario::splitting_map: return "splitting-map";
    case Scenario::splitting_sweep: return "splitting-sweep";
    case Scenario::beating: return "beating";
    case Scenario::memory: return "memory";
    case Scenario::fit: return "fit";
    }
    return "unknown";
}

const std::vector<std::string>& scenario_names()
{
    static const std::vector<std::string> names{"flux-arch", "spectrum", "splitting-map", "splitting-sweep",
                                                "beating",   "memory",   "fit"};
    return names;
}

std::optional<Scenario> scenario_from_string(const std::string& name)
{
    for (Scenario s : {Scenario::flux_arch, Scenario::spectrum, Scenario::splitting_map, Scenario::splitting_sweep,
                       Scenario::beating, Scenario::memory, Scenario::fit})
        if (to_string(s) == name)
            return s;
    return std::nullopt;
}

std::vector<double> SweepAxis::values() const
{
    std::vector<double> v(count);
    if (count == 1) {
        v[0] = start;
        return v;
    }
    for (std::size_t i = 0; i < count; ++i)
        v[i] = start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
    v.back() = stop;
    return v;
}

ValidationReport validate_config_json(const json& doc, const fs::path& source)
{
    Parser ps;
    ValidationReport report;
    ScenarioConfig cfg;
    cfg.source = source;
    const fs::path base = source.has_parent_path() ? source.parent_path() : fs::path(".");

    if (!doc.is_object()) {
        report.errors.push_back("/: configuration must be a JSON object");
        return report;
    }
    ps.known_keys(doc, "",
                  {"scenario", "device", "operating_point", "coupling", "modes", "motional_shifts", "sweep", "probe",
                   "probe_lower", "probe_upper", "drive", "time", "coupling_on", "storage", "analysis_window", "fit",
                   "output", "input", "model", "initial", "fixed", "use_phase", "fit_amplitude_scale"});

    const auto name = ps.string(doc, "scenario", "", true);
    if (!name) {
        report.errors = ps.errors;
        return report;
    }
    const auto scenario = scenario_from_string(*name);
    if (!scenario) {
        std::string allowed;
        for (const auto& n : scenario_names())
            allowed += (allowed.empty() ? "" : ", ") + n;
        ps.error("/scenario", "unknown scenario '" + *name + "' (allowed: " + allowed + ")");
        report.errors = ps.errors;
        return report;
    }
    cfg.scenario = *scenario;
    const Scenario sc = *scenario;
    const bool needs_device = sc != Scenario::fit;
    const bool needs_op = sc != Scenario::fit && sc != Scenario::flux_arch;
    const bool dynamic = sc == Scenario::beating || sc == Scenario::memory;

    json normalized{{"scenario", *name}};

    // Device.
    if (needs_device) {
        if (!doc.contains("device")) {
            ps.error("/device", "missing required field");
        } else if (doc.at("device").is_string()) {
            const fs::path dp = base / doc.at("device").get<std::string>();
            if (!fs::exists(dp))
                ps.error("/device", "referenced device file does not exist: " + dp.string());
            else if (auto dj = read_json_file(dp, ps, "/device"))
                if (auto dev = parse_device(*dj, "/device", ps))
                    cfg.device = *dev;
        } else if (auto dev = parse_device(doc.at("device"), "/device", ps)) {
            cfg.device = *dev;
        }
        normalized["device"] = device_json(cfg.device);
    }

    // Operating point and coupling law.
    if (needs_op || sc == Scenario::flux_arch) {
        if (doc.contains("operating_point") && !doc.at("operating_point").is_object())
            ps.error("/operating_point", "expected an object");
        const json op = doc.value("operating_point", json::object());
        ps.known_keys(op, "/operating_point", {"phi_dc", "delta_phi", "omega_mod"});
        cfg.operating_point.phi_dc =
            ps.quantity(op, "phi_dc", "/operating_point", Dim::flux, needs_op).value_or(0.33);
        cfg.operating_point.delta_phi =
            ps.quantity(op, "delta_phi", "/operating_point", Dim::flux, false).value_or(0.0);
        cfg.operating_point.omega_mod =
            ps.quantity(op, "omega_mod", "/operating_point", Dim::frequency, false).value_or(0.0);
        if (cfg.operating_point.delta_phi < 0.0)
            ps.error("/operating_point/delta_phi", "invariant violated: delta_phi must be non-negative");
        if (cfg.operating_point.delta_phi > 0.0 && !(cfg.operating_point.omega_mod > 0.0))
            ps.error("/operating_point/omega_mod", "invariant violated: omega_mod must be positive when delta_phi > 0");
        normalized["operating_point"] = {
            {"phi_dc", quantity_json(cfg.operating_point.phi_dc, Dim::flux, "phi0")},
            {"delta_phi", quantity_json(cfg.operating_point.delta_phi, Dim::flux, "phi0")},
            {"omega_mod", quantity_json(cfg.operating_point.omega_mod, Dim::frequency, "ghz")}};

        const json cj = doc.value("coupling", json::object());
        ps.known_keys(cj, "/coupling", {"eta"});
        cfg.coupling.eta = ps.quantity(cj, "eta", "/coupling", Dim::slope, false).value_or(0.0);
        if (cfg.coupling.eta < 0.0)
            ps.error("/coupling/eta", "invariant violated: eta must be non-negative");
        normalized["coupling"] = {{"eta", quantity_json(cfg.coupling.eta, Dim::slope, "ghz_per_phi0")}};

        const json mj = doc.value("modes", json::object());
        ps.known_keys(mj, "/modes", {"probed", "partner"});
        cfg.probed_mode = static_cast<int>(ps.integer(mj, "probed", "/modes", false).value_or(3));
        cfg.partner_mode = static_cast<int>(ps.integer(mj, "partner", "/modes", false).value_or(2));
        if (needs_op) {
            for (auto [key, n] : {std::pair{"probed", cfg.probed_mode}, std::pair{"partner", cfg.partner_mode}})
                if (!cfg.device.modes.empty() && !cfg.device.modes.contains(n))
                    ps.error(std::string("/modes/") + key, "mode " + std::to_string(n) + " is not in the device");
            if (cfg.probed_mode == cfg.partner_mode)
                ps.error("/modes", "probed and partner modes must differ");
            normalized["modes"] = {{"probed", cfg.probed_mode}, {"partner", cfg.partner_mode}};
        }
        cfg.motional_shifts = ps.boolean(doc, "motional_shifts", "").value_or(true);
        normalized["motional_shifts"] = cfg.motional_shifts;
    }

    // Sweep axes.
    switch (sc) {
    case Scenario::flux_arch:
        cfg.sweep = ps.axis(doc, "sweep", Dim::flux, "phi_dc", true);
        if (cfg.sweep)
            normalized["sweep"] = axis_json(*cfg.sweep, Dim::flux, "phi0");
        break;
    case Scenario::spectrum:
        cfg.probe = ps.axis(doc, "probe", Dim::frequency, "omega_p", true);
        break;
    case Scenario::splitting_map:
        cfg.sweep = ps.axis(doc, "sweep", Dim::frequency, "omega_mod", true);
        cfg.probe_lower = ps.axis(doc, "probe_lower", Dim::frequency, "omega_p", true);
        cfg.probe_upper = ps.axis(doc, "probe_upper", Dim::frequency, "omega_p", true);
        if (cfg.sweep)
            normalized["sweep"] = axis_json(*cfg.sweep, Dim::frequency, "ghz");
        if (cfg.probe_lower)
            normalized["probe_lower"] = axis_json(*cfg.probe_lower, Dim::frequency, "ghz");
        if (cfg.probe_upper)
            normalized["probe_upper"] = axis_json(*cfg.probe_upper, Dim::frequency, "ghz");
        break;
    case Scenario::splitting_sweep:
        cfg.sweep = ps.axis(doc, "sweep", Dim::flux, "delta_phi", true);
        cfg.probe = ps.axis(doc, "probe", Dim::frequency, "omega_p", true);
        if (cfg.sweep)
            normalized["sweep"] = axis_json(*cfg.sweep, Dim::flux, "phi0");
        break;
    case Scenario::beating:
        cfg.sweep = ps.axis(doc, "sweep", Dim::frequency, "g", true);
        if (cfg.sweep)
            normalized["sweep"] = axis_json(*cfg.sweep, Dim::frequency, "mhz");
        break;
    case Scenario::memory:
        cfg.sweep = ps.axis(doc, "sweep", Dim::time, "storage_time", true);
        if (cfg.sweep)
            normalized["sweep"] = axis_json(*cfg.sweep, Dim::time, "ns");
        break;
    case Scenario::fit:
        break;
    }
    if (cfg.probe)
        normalized["probe"] = axis_json(*cfg.probe, Dim::frequency, "ghz");

    // Drive, time window, storage.
    if (dynamic) {
        if (ps.object(doc, "drive", "", true)) {
            const json& dj = doc.at("drive");
            ps.known_keys(dj, "/drive", {"carrier", "power", "envelope"});
            DriveSpec drive;
            drive.omega_p = ps.quantity(dj, "carrier", "/drive", Dim::frequency, true).value_or(1.0);
            drive.power_dbm = ps.quantity(dj, "power", "/drive", Dim::power, true).value_or(0.0);
            if (ps.object(dj, "envelope", "/drive", true)) {
                const json& ej = dj.at("envelope");
                ps.known_keys(ej, "/drive/envelope", {"type", "t0", "tau"});
                const auto type = ps.string(ej, "type", "/drive/envelope", true);
                if (type == "gaussian") {
                    GaussianEnvelope g;
                    g.t0 = ps.quantity(ej, "t0", "/drive/envelope", Dim::time, true).value_or(0.0);
                    g.tau = ps.quantity(ej, "tau", "/drive/envelope", Dim::time, true).value_or(1.0);
                    if (!(g.tau > 0.0))
                        ps.error("/drive/envelope/tau", "invariant violated: tau must be positive");
                    drive.envelope = g;
                } else if (type == "cw") {
                    drive.envelope = ContinuousWave{};
                } else if (type) {
                    ps.error("/drive/envelope/type", "unknown envelope '" + *type + "' (allowed: gaussian, cw)");
                }
            }
            if (!(drive.omega_p > 0.0))
                ps.error("/drive/carrier", "invariant violated: carrier must be positive");
            cfg.drive = drive;
            normalized["drive"] = to_json(drive);
        }
        if (ps.object(doc, "time", "", true)) {
            const json& tj = doc.at("time");
            ps.known_keys(tj, "/time", {"start", "stop", "dt"});
            cfg.time.t_begin = ps.quantity(tj, "start", "/time", Dim::time, false).value_or(0.0);
            cfg.time.t_end = ps.quantity(tj, "stop", "/time", Dim::time, true).value_or(cfg.time.t_begin);
            cfg.dt = ps.quantity(tj, "dt", "/time", Dim::time, false);
            if (!(cfg.time.t_end > cfg.time.t_begin))
                ps.error("/time", "time window must have stop > start");
            if (cfg.dt && !(*cfg.dt > 0.0))
                ps.error("/time/dt", "time step must be positive");
            normalized["time"] = {{"start", quantity_json(cfg.time.t_begin, Dim::time, "ns")},
                                  {"stop", quantity_json(cfg.time.t_end, Dim::time, "ns")}};
            if (cfg.dt)
                normalized["time"]["dt"] = quantity_json(*cfg.dt, Dim::time, "ns");
        }
        if (doc.contains("analysis_window") && ps.object(doc, "analysis_window", "", false)) {
            const json& wj = doc.at("analysis_window");
            ps.known_keys(wj, "/analysis_window", {"start", "stop"});
            TimeWindow w;
            w.t_begin = ps.quantity(wj, "start", "/analysis_window", Dim::time, true).value_or(0.0);
            w.t_end = ps.quantity(wj, "stop", "/analysis_window", Dim::time, true).value_or(0.0);
            if (!(w.t_end > w.t_begin))
                ps.error("/analysis_window", "window must have stop > start");
            cfg.analysis_window = w;
            normalized["analysis_window"] = {{"start", quantity_json(w.t_begin, Dim::time, "ns")},
                                             {"stop", quantity_json(w.t_end, Dim::time, "ns")}};
        }
    }
    if (sc == Scenario::memory) {
        cfg.g_on = ps.quantity(doc, "coupling_on", "", Dim::frequency, true).value_or(0.0);
        if (cfg.g_on < 0.0)
            ps.error("/coupling_on", "invariant violated: coupling must be non-negative");
        if (ps.object(doc, "storage", "", true)) {
            const json& sj = doc.at("storage");
            ps.known_keys(sj, "/storage", {"t_off"});
            cfg.t_off = ps.quantity(sj, "t_off", "/storage", Dim::time, true).value_or(0.0);
        }
        if (cfg.sweep && cfg.sweep->start < 0.0)
            ps.error("/sweep/start", "storage time must be non-negative");
        if (cfg.sweep && cfg.t_off + cfg.sweep->stop > cfg.time.t_end)
            ps.error("/storage/t_off", "schedule ordering: t_off + storage time exceeds the integration window");
        if (cfg.t_off <= cfg.time.t_begin)
            ps.error("/storage/t_off", "t_off must lie after the start of the integration window");
        normalized["coupling_on"] = quantity_json(cfg.g_on, Dim::frequency, "mhz");
        normalized["storage"] = {{"t_off", quantity_json(cfg.t_off, Dim::time, "ns")}};
    }

    if (sc == Scenario::flux_arch || sc == Scenario::splitting_sweep) {
        cfg.run_fit = ps.boolean(doc, "fit", "").value_or(true);
        normalized["fit"] = cfg.run_fit;
    }

    // Fit scenario.
    if (sc == Scenario::fit) {
        if (const auto in = ps.string(doc, "input", "", true)) {
            cfg.fit.input = base / *in;
            if (!fs::exists(cfg.fit.input))
                ps.error("/input", "referenced input file does not exist: " + cfg.fit.input.string());
            normalized["input"] = *in;
        }
        const auto model = ps.string(doc, "model", "", true);
        if (model && *model != "single-mode" && *model != "lambda")
            ps.error("/model", "unknown fit model '" + *model + "' (allowed: single-mode, lambda)");
        cfg.fit.model = model.value_or("");
        normalized["model"] = cfg.fit.model;
        cfg.fit.use_phase = ps.boolean(doc, "use_phase", "").value_or(false);
        cfg.fit.fit_amplitude_scale = ps.boolean(doc, "fit_amplitude_scale", "").value_or(false);
        if (ps.object(doc, "initial", "", true)) {
            const json& ij = doc.at("initial");
            if (cfg.fit.model == "single-mode") {
                ps.known_keys(ij, "/initial", {"omega_r", "kappa_tot", "kappa_ext"});
                auto& g = cfg.fit.single_mode_guess;
                g.omega_r = ps.quantity(ij, "omega_r", "/initial", Dim::frequency, true).value_or(0.0);
                g.kappa_tot = ps.quantity(ij, "kappa_tot", "/initial", Dim::frequency, true).value_or(0.0);
                g.kappa_ext = ps.quantity(ij, "kappa_ext", "/initial", Dim::frequency, true).value_or(0.0);
                normalized["initial"] = {{"omega_r", quantity_json(g.omega_r, Dim::frequency, "ghz")},
                                         {"kappa_tot", quantity_json(g.kappa_tot, Dim::frequency, "mhz")},
                                         {"kappa_ext", quantity_json(g.kappa_ext, Dim::frequency, "mhz")}};
            } else if (cfg.fit.model == "lambda") {
                ps.known_keys(ij, "/initial", {"g", "delta2", "omega3_shifted"});
                auto& g = cfg.fit.lambda_guess;
                g.g = ps.quantity(ij, "g", "/initial", Dim::frequency, true).value_or(0.0);
                g.delta2 = ps.quantity(ij, "delta2", "/initial", Dim::frequency, false).value_or(0.0);
                g.omega3_shifted = ps.quantity(ij, "omega3_shifted", "/initial", Dim::frequency, true).value_or(0.0);
                normalized["initial"] = {{"g", quantity_json(g.g, Dim::frequency, "mhz")},
                                         {"delta2", quantity_json(g.delta2, Dim::frequency, "mhz")},
                                         {"omega3_shifted", quantity_json(g.omega3_shifted, Dim::frequency, "ghz")}};
            }
        }
        if (cfg.fit.model == "lambda" && ps.object(doc, "fixed", "", true)) {
            const json& fj = doc.at("fixed");
            ps.known_keys(fj, "/fixed", {"kappa_tot2", "kappa_tot3", "kappa_ext3"});
            auto& f = cfg.fit.lambda_fixed;
            f.kappa_tot2 = ps.quantity(fj, "kappa_tot2", "/fixed", Dim::frequency, true).value_or(1.0);
            f.kappa_tot3 = ps.quantity(fj, "kappa_tot3", "/fixed", Dim::frequency, true).value_or(1.0);
            f.kappa_ext3 = ps.quantity(fj, "kappa_ext3", "/fixed", Dim::frequency, true).value_or(1.0);
            if (f.kappa_ext3 > f.kappa_tot3)
                ps.error("/fixed/kappa_ext3", "invariant violated: kappa_ext3 exceeds kappa_tot3");
            normalized["fixed"] = {{"kappa_tot2", quantity_json(f.kappa_tot2, Dim::frequency, "mhz")},
                                   {"kappa_tot3", quantity_json(f.kappa_tot3, Dim::frequency, "mhz")},
                                   {"kappa_ext3", quantity_json(f.kappa_ext3, Dim::frequency, "mhz")}};
        }
        normalized["use_phase"] = cfg.fit.use_phase;
        normalized["fit_amplitude_scale"] = cfg.fit.fit_amplitude_scale;
    }

    // Output.
    std::string out = "out/" + *name;
    if (doc.contains("output")) {
        if (ps.object(doc, "output", "", false)) {
            ps.known_keys(doc.at("output"), "/output", {"directory"});
            out = ps.string(doc.at("output"), "directory", "/output", false).value_or(out);
        }
    }
    cfg.output_dir = base / out;
    normalized["output"] = {{"directory", out}};

    report.errors = ps.errors;
    if (report.errors.empty()) {
        cfg.normalized = normalized;
        report.config = std::move(cfg);
    }
    return report;
}

ValidationReport validate_config(const fs::path& path)
{
    ValidationReport report;
    std::ifstream in(path);
    if (!in) {
        report.errors.push_back("/: cannot read configuration file " + path.string());
        return report;
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        report.errors.push_back(std::string("/: invalid JSON: ") + e.what());
        return report;
    }
    return validate_config_json(doc, path);
}

ScenarioConfig load_config(const fs::path& path)
{
    ValidationReport report = validate_config(path);
    if (!report.ok()) {
        std::string msg = "invalid configuration " + path.string() + ":";
        for (const auto& e : report.errors)
            msg += "\n  " + e;
        throw ConfigError(msg);
    }
    return std::move(*report.config);
}

} // namespace paramode
