#pragma once

// Continuous-wave steady state of the parametrically coupled two-mode
// system. Mode a is the port-coupled (probed) mode, mode b its partner;
// the modulation converts between them, so b is seen in the frame
// shifted by omega_mod.

#include <array>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "paramode/extrema.hpp"

namespace paramode {

using cplx = std::complex<double>;

struct TwoModeSystem {
    double omega3_shifted = 0.0; ///< probed mode, motional shift included (rad/s)
    double omega2_shifted = 0.0; ///< partner mode, motional shift included (rad/s)
    double kappa_tot3 = 0.0;
    double kappa_tot2 = 0.0;
    double kappa_ext3 = 0.0;
    double g = 0.0;         ///< parametric coupling (rad/s)
    double omega_mod = 0.0; ///< modulation frequency (rad/s)
    /// +1 when the partner lies below the probed mode (Delta_2 =
    /// w3 - w2 - w_mod), -1 when it lies above (Delta_2 = w3 - w2 + w_mod).
    int conversion = 1;

    void validate() const;
};

struct Detunings {
    double delta1 = 0.0; ///< w3 - w_p
    double delta2 = 0.0; ///< w3 - w2 - conversion * w_mod
    double delta = 0.0;  ///< delta1 - delta2, the partner-mode detuning
};

Detunings detunings(const TwoModeSystem& sys, double omega_p);

struct ModeAmplitudes {
    cplx a;
    cplx b;
};

/// Solves the Langevin equations with time derivatives set to zero,
///   0 = (-i D1 - k3/2) a - i g b - i sqrt(ke) alpha_in
///   0 = (-i d  - k2/2) b - i g a
/// by an explicit 2x2 complex solve.
ModeAmplitudes steady_amplitudes(const TwoModeSystem& sys, double omega_p, cplx alpha_in);

/// Largest magnitude of the two Langevin right-hand sides at (a, b).
double langevin_residual(const TwoModeSystem& sys, double omega_p, cplx alpha_in,
                         const ModeAmplitudes& amps);

/// Output field for a given intracavity amplitude of the probed mode:
/// alpha_out = alpha_in - i sqrt(ke) a.
cplx output_field(cplx alpha_in, cplx a, double kappa_ext3);

/// alpha_out / alpha_in from the linear solve.
cplx reflection_numeric(const TwoModeSystem& sys, double omega_p);

/// Closed-form Lambda-type reflection
///   r = 1 + i ke (d - i k2/2) / ((d - i k2/2)(d + D2 - i k3/2) - g^2).
cplx reflection_closed_form(const TwoModeSystem& sys, double omega_p);

/// Complex roots, in the partner detuning d, of the closed-form
/// denominator. Re gives the dressed-mode positions, Im half their widths.
std::array<cplx, 2> dressed_roots(const TwoModeSystem& sys);

/// Probe frequencies of the two dressed modes (real parts), ascending.
std::array<double, 2> dressed_frequencies(const TwoModeSystem& sys);

struct SpectrumMetadata {
    TwoModeSystem system;
    std::string sweep; ///< free-form provenance of the grid
};

struct Spectrum {
    std::vector<double> probe_grid; ///< w_p, rad/s, strictly increasing
    std::vector<cplx> r_c;
    SpectrumMetadata metadata;

    std::vector<double> magnitude() const;
};

std::vector<double> linspace(double start, double stop, std::size_t count);

/// Element-wise closed-form reflection; points are distributed over up to
/// `threads` workers and collected in grid order.
Spectrum spectrum_sweep(const TwoModeSystem& sys, std::span<const double> grid,
                        unsigned threads = 1);

/// Dips of |r_c| with parabolic refinement.
std::vector<Extremum> find_dips(const Spectrum& spectrum);

/// The two deepest dips, ordered by frequency; throws NumericalError if
/// fewer than two are present.
std::array<Extremum, 2> deepest_dip_pair(const Spectrum& spectrum);

struct SplittingMap {
    std::vector<double> omega_mod_grid;
    std::vector<double> probe_grid;
    std::vector<double> abs_rc; ///< row-major: [mod index][probe index]

    double at(std::size_t mod_index, std::size_t probe_index) const
    {
        return abs_rc[mod_index * probe_grid.size() + probe_index];
    }
};

/// |r_c| over (w_mod, w_p) for one probed mode; the omega_mod field of
/// `sys` is replaced by each grid value.
SplittingMap splitting_map(const TwoModeSystem& sys, std::span<const double> omega_mod_grid,
                           std::span<const double> probe_grid, unsigned threads = 1);

struct SplittingMaps {
    SplittingMap lower; ///< probe on the lower mode (partner above)
    SplittingMap upper; ///< probe on the upper mode (partner below)
};

/// Anti-crossing maps viewed from each mode of a coupled pair. The partner
/// branch moves as +conversion * w_mod, so the two views tilt oppositely.
SplittingMaps splitting_directions(const TwoModeSystem& probe_lower, const TwoModeSystem& probe_upper,
                                   std::span<const double> omega_mod_grid,
                                   std::span<const double> lower_probe_grid,
                                   std::span<const double> upper_probe_grid, unsigned threads = 1);

/// d w_p / d w_mod of the partner (idler) branch far from the crossing.
double partner_branch_slope(const TwoModeSystem& sys);

} // namespace paramode
