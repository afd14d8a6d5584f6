#pragma once

// Static device physics of the SQUID-terminated multimode resonator:
// flux-dependent SQUID inductance, per-mode resonance frequencies, the
// motional-averaging shift under flux modulation and the linear coupling law.

#include <map>

namespace paramode {

struct ModeParams {
    double inductance = 0.0;  ///< L_n, henries
    double capacitance = 0.0; ///< C_n, farads
    double kappa_tot = 0.0;   ///< total loss rate, rad/s
    double kappa_ext = 0.0;   ///< external (port) loss rate, rad/s
};

struct DeviceParams {
    double critical_current = 0.0; ///< I_c, amperes
    double asymmetry = 0.0;        ///< junction asymmetry d, 0 <= d <= 1
    std::map<int, ModeParams> modes; ///< keyed by mode number n

    /// Throws ConfigError naming the first violated invariant.
    void validate() const;
    const ModeParams& mode(int n) const;
};

/// Flux bias and modulation, fluxes in units of the flux quantum.
struct FluxOperatingPoint {
    double phi_dc = 0.0;
    double delta_phi = 0.0;
    double omega_mod = 0.0; ///< rad/s

    void validate() const;
};

/// g_Phi = eta * delta_phi.
struct CouplingLaw {
    double eta = 0.0; ///< rad/s per flux quantum

    void validate() const;
};

struct InductorCapacitor {
    double inductance = 0.0;
    double capacitance = 0.0;
};

/// Default L_n/C_n ratio (a 50 ohm characteristic impedance squared).
inline constexpr double default_ratio_hint = 2500.0;

/// L_s(phi) = Phi0 / (4 pi I_c sqrt(cos^2(pi phi) + d^2 sin^2(pi phi))).
/// Throws NumericalError at the divergent point d = 0, phi = 1/2 (mod 1).
double squid_inductance(double phi_dc, const DeviceParams& device);

/// 1 / sqrt(C_n (L_n + L_s(phi))), rad/s.
double mode_frequency(int n, double phi_dc, const DeviceParams& device);

/// Solves for (L_n, C_n) with L_n / C_n = ratio_hint such that the mode
/// resonates at omega_target when biased at phi_dc. Only the junction
/// parameters of `device` are used.
InductorCapacitor calibrate_lc(double omega_target, double phi_dc, double ratio_hint,
                               const DeviceParams& device);

inline constexpr int default_quadrature_nodes = 256;

/// Time average of the instantaneous mode frequency over one modulation
/// period, phi(theta) = phi_dc + delta_phi sin(theta), evaluated with the
/// periodic trapezoidal rule on `nodes` equally spaced points (>= 64).
double motional_average(int n, const FluxOperatingPoint& op, const DeviceParams& device,
                        int nodes = default_quadrature_nodes);

/// Delta_Phi = motional_average - mode_frequency at phi_dc.
double motional_shift(int n, const FluxOperatingPoint& op, const DeviceParams& device,
                      int nodes = default_quadrature_nodes);

double coupling_strength(double delta_phi, const CouplingLaw& law);

/// Photon flux P / (hbar omega) of a tone at p_dbm, photons per second.
double dbm_to_photon_flux(double p_dbm, double omega);

/// (w3 - w2) - (w4 - w3): the parametric drive at w3 - w2 addresses only
/// the (2,3) pair when this exceeds every mode linewidth in magnitude.
double selectivity_margin(double omega2, double omega3, double omega4);

} // namespace paramode
