#include "paramode/core_model.hpp"

#include <cmath>
#include <string>

#include "paramode/errors.hpp"
#include "paramode/units.hpp"

namespace paramode {

void DeviceParams::validate() const
{
    if (!(critical_current > 0.0))
        throw ConfigError("critical_current must be positive");
    if (!(asymmetry >= 0.0 && asymmetry <= 1.0))
        throw ConfigError("asymmetry must lie in [0, 1]");
    for (const auto& [n, m] : modes) {
        const std::string where = "mode " + std::to_string(n) + ": ";
        if (!(m.inductance > 0.0) || !(m.capacitance > 0.0))
            throw ConfigError(where + "inductance and capacitance must be positive");
        if (!(m.kappa_ext > 0.0))
            throw ConfigError(where + "kappa_ext must be positive");
        if (!(m.kappa_ext <= m.kappa_tot))
            throw ConfigError(where + "kappa_ext exceeds kappa_tot");
    }
}

const ModeParams& DeviceParams::mode(int n) const
{
    auto it = modes.find(n);
    if (it == modes.end())
        throw ConfigError("mode " + std::to_string(n) + " is not present in the device");
    return it->second;
}

void FluxOperatingPoint::validate() const
{
    if (!(delta_phi >= 0.0))
        throw ConfigError("delta_phi must be non-negative");
    if (delta_phi > 0.0 && !(omega_mod > 0.0))
        throw ConfigError("omega_mod must be positive when delta_phi > 0");
}

void CouplingLaw::validate() const
{
    if (!(eta >= 0.0))
        throw ConfigError("coupling slope eta must be non-negative");
}

double squid_inductance(double phi_dc, const DeviceParams& device)
{
    const double d = device.asymmetry;
    if (d == 0.0) {
        const double frac = phi_dc - std::floor(phi_dc);
        if (std::abs(frac - 0.5) < 1e-15)
            throw NumericalError("SQUID inductance diverges at half flux quantum for a symmetric SQUID");
    }
    const double c = std::cos(pi * phi_dc);
    const double s = std::sin(pi * phi_dc);
    const double root = std::sqrt(c * c + d * d * s * s);
    const double ls = flux_quantum / (4.0 * pi * device.critical_current * root);
    if (!std::isfinite(ls) || !(ls > 0.0))
        throw NumericalError("SQUID inductance is not finite at phi_dc = " + std::to_string(phi_dc));
    return ls;
}

double mode_frequency(int n, double phi_dc, const DeviceParams& device)
{
    const ModeParams& m = device.mode(n);
    return 1.0 / std::sqrt(m.capacitance * (m.inductance + squid_inductance(phi_dc, device)));
}

InductorCapacitor calibrate_lc(double omega_target, double phi_dc, double ratio_hint,
                               const DeviceParams& device)
{
    if (!(omega_target > 0.0))
        throw ConfigError("calibration target frequency must be positive");
    if (!(ratio_hint > 0.0))
        throw ConfigError("ratio_hint must be positive");
    // With L = r C:  r C^2 + L_s C - 1/w^2 = 0, positive root.
    const double ls = squid_inductance(phi_dc, device);
    const double r = ratio_hint;
    const double inv_w2 = 1.0 / (omega_target * omega_target);
    const double disc = std::sqrt(ls * ls + 4.0 * r * inv_w2);
    // Rationalized form avoids cancellation when L_s dominates.
    const double c = 2.0 * inv_w2 / (ls + disc);
    return {r * c, c};
}

double motional_average(int n, const FluxOperatingPoint& op, const DeviceParams& device, int nodes)
{
    op.validate();
    if (nodes < 64)
        throw ConfigError("motional average needs at least 64 quadrature nodes");
    if (op.delta_phi == 0.0)
        return mode_frequency(n, op.phi_dc, device);
    double sum = 0.0;
    for (int k = 0; k < nodes; ++k) {
        const double theta = two_pi * k / nodes;
        sum += mode_frequency(n, op.phi_dc + op.delta_phi * std::sin(theta), device);
    }
    return sum / nodes;
}

double motional_shift(int n, const FluxOperatingPoint& op, const DeviceParams& device, int nodes)
{
    return motional_average(n, op, device, nodes) - mode_frequency(n, op.phi_dc, device);
}

double coupling_strength(double delta_phi, const CouplingLaw& law)
{
    if (!(delta_phi >= 0.0))
        throw ConfigError("delta_phi must be non-negative");
    return law.eta * delta_phi;
}

double dbm_to_photon_flux(double p_dbm, double omega)
{
    if (!(omega > 0.0))
        throw ConfigError("photon flux needs a positive angular frequency");
    const double watts = std::pow(10.0, (p_dbm - 30.0) / 10.0);
    return watts / (hbar * omega);
}

double selectivity_margin(double omega2, double omega3, double omega4)
{
    return (omega3 - omega2) - (omega4 - omega3);
}

} // namespace paramode
