#pragma once

// Reference device and two-mode systems shared by the test binaries.

#include <cmath>
#include <complex>

#include "paramode/core_model.hpp"
#include "paramode/dynamics.hpp"
#include "paramode/steady_state.hpp"
#include "paramode/units.hpp"

namespace fixtures {

using namespace paramode;

inline constexpr double phi_bias = 0.33;
inline constexpr double f2_ghz = 4.0614;
inline constexpr double f3_ghz = 5.7284;
inline constexpr double f4_ghz = 7.4203;
inline constexpr double kappa_tot2_mhz = 4.6461;
inline constexpr double kappa_tot3_mhz = 6.8857;
inline constexpr double kappa_tot4_mhz = 8.3224;
inline constexpr double kappa_ext3_mhz = 4.0874;
inline constexpr double omega_mod_ghz = 1.664;
inline constexpr double g_line_cut_mhz = 6.6;
inline constexpr double g_memory_mhz = 17.6;
inline constexpr double carrier_ghz = 5.728;
inline constexpr double pulse_power_dbm = -102.0;
inline constexpr double tau_ns = 5.0;

/// I_c = 1 uA, d = 0.1, modes calibrated to the quoted bias frequencies.
inline DeviceParams reference_device()
{
    DeviceParams dev;
    dev.critical_current = 1e-6;
    dev.asymmetry = 0.1;
    const struct {
        int n;
        double f, kt, ke;
    } modes[] = {{2, f2_ghz, kappa_tot2_mhz, 2.5},
                 {3, f3_ghz, kappa_tot3_mhz, kappa_ext3_mhz},
                 {4, f4_ghz, kappa_tot4_mhz, 5.0}};
    for (const auto& m : modes) {
        const auto lc = calibrate_lc(ghz(m.f), phi_bias, default_ratio_hint, dev);
        dev.modes[m.n] = {lc.inductance, lc.capacitance, mhz(m.kt), mhz(m.ke)};
    }
    return dev;
}

/// Modes 3 (probed) and 2 at the quoted frequencies, modulation on the
/// difference frequency (Delta_2 = 0).
inline TwoModeSystem resonant_system(double g_mhz)
{
    TwoModeSystem s;
    s.omega3_shifted = ghz(f3_ghz);
    s.omega2_shifted = ghz(f2_ghz);
    s.kappa_tot3 = mhz(kappa_tot3_mhz);
    s.kappa_tot2 = mhz(kappa_tot2_mhz);
    s.kappa_ext3 = mhz(kappa_ext3_mhz);
    s.g = mhz(g_mhz);
    s.omega_mod = s.omega3_shifted - s.omega2_shifted;
    return s;
}

/// Beating / memory fixture: quoted modulation frequency, motional shifts
/// at delta_phi = g / (2 pi 1 GHz per Phi0).
struct PulseFixture {
    TwoModeSystem system;
    MotionalShifts shifts;
    DriveSpec drive;
    TimeSpan span;
};

inline PulseFixture pulse_fixture(double g_mhz = g_memory_mhz, double t_end_ns = 300.0)
{
    const DeviceParams dev = reference_device();
    FluxOperatingPoint op{phi_bias, g_mhz / 1000.0, ghz(omega_mod_ghz)};
    PulseFixture f;
    f.shifts = {motional_shift(3, op, dev), motional_shift(2, op, dev)};
    f.system.omega3_shifted = mode_frequency(3, phi_bias, dev) + f.shifts.shift3;
    f.system.omega2_shifted = mode_frequency(2, phi_bias, dev) + f.shifts.shift2;
    f.system.kappa_tot3 = mhz(kappa_tot3_mhz);
    f.system.kappa_tot2 = mhz(kappa_tot2_mhz);
    f.system.kappa_ext3 = mhz(kappa_ext3_mhz);
    f.system.g = mhz(g_mhz);
    f.system.omega_mod = ghz(omega_mod_ghz);
    f.drive.omega_p = ghz(carrier_ghz);
    f.drive.power_dbm = pulse_power_dbm;
    f.drive.envelope = GaussianEnvelope{ns(20.0), ns(tau_ns)};
    f.span = {0.0, ns(t_end_ns)};
    return f;
}

inline double rel_diff(double a, double b)
{
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

inline double rel_diff(std::complex<double> a, std::complex<double> b)
{
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

} // namespace fixtures
