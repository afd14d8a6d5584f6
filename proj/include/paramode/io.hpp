#pragma once

// CSV artifacts and JSON provenance sidecars.

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "paramode/dynamics.hpp"
#include "paramode/fitting.hpp"
#include "paramode/steady_state.hpp"

namespace paramode {

using json = nlohmann::ordered_json;

/// Shortest round-trip decimal rendering, locale independent.
std::string format_number(double v);

/// omega_p_ghz,re_rc,im_rc,abs_rc
void write_spectrum_csv(std::ostream& os, const Spectrum& s);

/// Reads the spectrum schema above, or a generic two-column CSV of
/// (frequency in GHz, |r_c|) with an optional header line.
Spectrum read_spectrum_csv(std::istream& is);

/// t_ns,re_a,im_a,re_b,im_b,re_aout,im_aout,v_out
void write_trace_csv(std::ostream& os, const TimeTrace& tr);

json to_json(const TwoModeSystem& sys);
json to_json(const DeviceParams& dev);
json to_json(const ModulationSchedule& schedule);
json to_json(const DriveSpec& drive);
json spectrum_sidecar(const Spectrum& s);
json trace_sidecar(const TimeTrace& tr);

/// FitResult with parameter names and units; frequencies reported in
/// GHz or MHz according to `units` (one entry per parameter: "ghz",
/// "mhz", "a", "1", ...), angular values converted by 2 pi.
json fit_result_json(const FitResult& r, const std::vector<std::string>& names,
                     const std::vector<std::string>& units);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

} // namespace paramode
