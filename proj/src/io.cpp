#include "paramode/io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

#include "paramode/errors.hpp"
#include "paramode/units.hpp"

namespace paramode {

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_spectrum_csv(std::ostream& os, const Spectrum& s)
{
    os << "omega_p_ghz,re_rc,im_rc,abs_rc\n";
    for (std::size_t i = 0; i < s.probe_grid.size(); ++i) {
        const cplx r = s.r_c[i];
        os << format_number(to_ghz(s.probe_grid[i])) << ',' << format_number(r.real()) << ','
           << format_number(r.imag()) << ',' << format_number(std::abs(r)) << '\n';
    }
}

namespace {

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

bool parse_double(std::string s, double& v)
{
    while (!s.empty() && (s.back() == '\r' || s.back() == ' '))
        s.pop_back();
    std::size_t start = s.find_first_not_of(' ');
    if (start == std::string::npos)
        return false;
    const char* first = s.data() + start;
    const char* last = s.data() + s.size();
    const auto res = std::from_chars(first, last, v);
    return res.ec == std::errc() && res.ptr == last;
}

} // namespace

Spectrum read_spectrum_csv(std::istream& is)
{
    Spectrum s;
    std::string line;
    std::size_t line_no = 0;
    int abs_column = -1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r")
            continue;
        const auto cells = split_csv(line);
        std::vector<double> v(cells.size());
        bool numeric = true;
        for (std::size_t i = 0; i < cells.size(); ++i)
            numeric = numeric && parse_double(cells[i], v[i]);
        if (!numeric) {
            if (!s.probe_grid.empty())
                throw ConfigError("spectrum CSV line " + std::to_string(line_no) + ": non-numeric data");
            continue; // header
        }
        if (abs_column < 0) {
            if (cells.size() == 4)
                abs_column = 4;
            else if (cells.size() == 2)
                abs_column = 2;
            else
                throw ConfigError("spectrum CSV must have 2 or 4 columns");
        }
        if (static_cast<int>(cells.size()) != abs_column)
            throw ConfigError("spectrum CSV line " + std::to_string(line_no) + ": inconsistent column count");
        s.probe_grid.push_back(ghz(v[0]));
        if (abs_column == 4)
            s.r_c.emplace_back(v[1], v[2]);
        else
            s.r_c.emplace_back(v[1], 0.0);
    }
    if (s.probe_grid.empty())
        throw ConfigError("spectrum CSV contains no data");
    for (std::size_t i = 1; i < s.probe_grid.size(); ++i)
        if (!(s.probe_grid[i] > s.probe_grid[i - 1]))
            throw ConfigError("spectrum CSV frequencies must be strictly increasing");
    s.metadata.sweep = abs_column == 4 ? "spectrum CSV" : "two-column magnitude CSV";
    return s;
}

void write_trace_csv(std::ostream& os, const TimeTrace& tr)
{
    os << "t_ns,re_a,im_a,re_b,im_b,re_aout,im_aout,v_out\n";
    for (std::size_t i = 0; i < tr.size(); ++i) {
        os << format_number(to_ns(tr.t[i])) << ',' << format_number(tr.a[i].real()) << ','
           << format_number(tr.a[i].imag()) << ',' << format_number(tr.b[i].real()) << ','
           << format_number(tr.b[i].imag()) << ',' << format_number(tr.alpha_out[i].real()) << ','
           << format_number(tr.alpha_out[i].imag()) << ',' << format_number(tr.v_out[i]) << '\n';
    }
}

json to_json(const TwoModeSystem& sys)
{
    return {
        {"omega3_shifted", {{"ghz", to_ghz(sys.omega3_shifted)}}},
        {"omega2_shifted", {{"ghz", to_ghz(sys.omega2_shifted)}}},
        {"kappa_tot3", {{"mhz", to_mhz(sys.kappa_tot3)}}},
        {"kappa_tot2", {{"mhz", to_mhz(sys.kappa_tot2)}}},
        {"kappa_ext3", {{"mhz", to_mhz(sys.kappa_ext3)}}},
        {"g", {{"mhz", to_mhz(sys.g)}}},
        {"omega_mod", {{"ghz", to_ghz(sys.omega_mod)}}},
        {"conversion", sys.conversion},
    };
}

json to_json(const DeviceParams& dev)
{
    json modes = json::array();
    for (const auto& [n, m] : dev.modes) {
        modes.push_back({{"index", n},
                         {"inductance", {{"nh", m.inductance * 1e9}}},
                         {"capacitance", {{"pf", m.capacitance * 1e12}}},
                         {"kappa_tot", {{"mhz", to_mhz(m.kappa_tot)}}},
                         {"kappa_ext", {{"mhz", to_mhz(m.kappa_ext)}}}});
    }
    return {{"critical_current", {{"ua", dev.critical_current * 1e6}}},
            {"asymmetry", dev.asymmetry},
            {"modes", modes}};
}

json to_json(const ModulationSchedule& schedule)
{
    json segs = json::array();
    for (const auto& s : schedule.segments)
        segs.push_back({{"start", {{"ns", to_ns(s.t_start)}}}, {"stop", {{"ns", to_ns(s.t_end)}}}, {"on", s.on}});
    return {{"segments", segs},
            {"g_on", {{"mhz", to_mhz(schedule.g_on)}}},
            {"shift3_on", {{"mhz", to_mhz(schedule.shift3_on)}}},
            {"shift2_on", {{"mhz", to_mhz(schedule.shift2_on)}}}};
}

json to_json(const DriveSpec& drive)
{
    json j{{"carrier", {{"ghz", to_ghz(drive.omega_p)}}}, {"power", {{"dbm", drive.power_dbm}}}};
    if (const auto* g = std::get_if<GaussianEnvelope>(&drive.envelope))
        j["envelope"] = {{"type", "gaussian"}, {"t0", {{"ns", to_ns(g->t0)}}}, {"tau", {{"ns", to_ns(g->tau)}}}};
    else
        j["envelope"] = {{"type", "cw"}};
    return j;
}

json spectrum_sidecar(const Spectrum& s)
{
    return {{"kind", "spectrum"},
            {"points", s.probe_grid.size()},
            {"sweep", s.metadata.sweep},
            {"system", to_json(s.metadata.system)}};
}

json trace_sidecar(const TimeTrace& tr)
{
    return {{"kind", "time-trace"},
            {"samples", tr.size()},
            {"dt", {{"ns", to_ns(tr.metadata.dt)}}},
            {"system", to_json(tr.metadata.system)},
            {"schedule", to_json(tr.metadata.schedule)},
            {"drive", to_json(tr.metadata.drive)}};
}

json fit_result_json(const FitResult& r, const std::vector<std::string>& names,
                     const std::vector<std::string>& units)
{
    auto factor = [&](std::size_t i) {
        if (units[i] == "ghz")
            return 1.0 / ghz(1.0);
        if (units[i] == "mhz")
            return 1.0 / mhz(1.0);
        return 1.0;
    };
    json params = json::object();
    const auto se = r.standard_errors();
    for (std::size_t i = 0; i < r.theta.size(); ++i) {
        params[names[i]] = {{units[i], r.theta[i] * factor(i)}, {"std_error", se[i] * factor(i)}};
    }
    json cov = json::array();
    for (std::size_t i = 0; i < r.covariance.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < r.covariance[i].size(); ++j)
            row.push_back(r.covariance[i][j] * factor(i) * factor(j));
        cov.push_back(row);
    }
    return {{"parameters", params},
            {"covariance", cov},
            {"covariance_units", units},
            {"residual_norm", r.residual_norm},
            {"initial_residual_norm", r.initial_residual_norm},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"warnings", r.warnings}};
}

std::string sha256_hex(const std::string& bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

} // namespace paramode
