#include "paramode/steady_state.hpp"

#include <algorithm>
#include <cmath>

#include "paramode/errors.hpp"
#include "paramode/parallel.hpp"

namespace paramode {
namespace {

constexpr cplx I{0.0, 1.0};

} // namespace

void TwoModeSystem::validate() const
{
    if (!(kappa_ext3 > 0.0) || !(kappa_ext3 <= kappa_tot3))
        throw ConfigError("two-mode system requires 0 < kappa_ext3 <= kappa_tot3");
    if (!(kappa_tot2 > 0.0))
        throw ConfigError("two-mode system requires kappa_tot2 > 0");
    if (!(g >= 0.0))
        throw ConfigError("two-mode system requires g >= 0");
    if (conversion != 1 && conversion != -1)
        throw ConfigError("conversion must be +1 or -1");
    if (!std::isfinite(omega3_shifted) || !std::isfinite(omega2_shifted) || !std::isfinite(omega_mod))
        throw ConfigError("two-mode system frequencies must be finite");
}

Detunings detunings(const TwoModeSystem& sys, double omega_p)
{
    Detunings d;
    d.delta1 = sys.omega3_shifted - omega_p;
    d.delta2 = sys.omega3_shifted - sys.omega2_shifted - sys.conversion * sys.omega_mod;
    d.delta = d.delta1 - d.delta2;
    return d;
}

ModeAmplitudes steady_amplitudes(const TwoModeSystem& sys, double omega_p, cplx alpha_in)
{
    const Detunings d = detunings(sys, omega_p);
    // M [a b]^T = [-i sqrt(ke) alpha_in, 0]^T
    const cplx m11 = I * d.delta1 + 0.5 * sys.kappa_tot3;
    const cplx m12 = I * sys.g;
    const cplx m21 = I * sys.g;
    const cplx m22 = I * d.delta + 0.5 * sys.kappa_tot2;
    const cplx det = m11 * m22 - m12 * m21;
    if (std::abs(det) == 0.0)
        throw NumericalError("steady-state system matrix is singular");
    const cplx rhs = -I * std::sqrt(sys.kappa_ext3) * alpha_in;
    return {m22 * rhs / det, -m21 * rhs / det};
}

double langevin_residual(const TwoModeSystem& sys, double omega_p, cplx alpha_in,
                         const ModeAmplitudes& amps)
{
    const Detunings d = detunings(sys, omega_p);
    const cplx ra = (-I * d.delta1 - 0.5 * sys.kappa_tot3) * amps.a - I * sys.g * amps.b
                    - I * std::sqrt(sys.kappa_ext3) * alpha_in;
    const cplx rb = (-I * d.delta - 0.5 * sys.kappa_tot2) * amps.b - I * sys.g * amps.a;
    return std::max(std::abs(ra), std::abs(rb));
}

cplx output_field(cplx alpha_in, cplx a, double kappa_ext3)
{
    return alpha_in - I * std::sqrt(kappa_ext3) * a;
}

cplx reflection_numeric(const TwoModeSystem& sys, double omega_p)
{
    const cplx alpha_in{1.0, 0.0};
    const ModeAmplitudes amps = steady_amplitudes(sys, omega_p, alpha_in);
    return output_field(alpha_in, amps.a, sys.kappa_ext3) / alpha_in;
}

cplx reflection_closed_form(const TwoModeSystem& sys, double omega_p)
{
    const Detunings d = detunings(sys, omega_p);
    const cplx partner = d.delta - 0.5 * I * sys.kappa_tot2;
    const cplx probed = d.delta + d.delta2 - 0.5 * I * sys.kappa_tot3;
    const cplx denom = partner * probed - sys.g * sys.g;
    return 1.0 + 2.0 * I * (0.5 * sys.kappa_ext3 * partner) / denom;
}

std::array<cplx, 2> dressed_roots(const TwoModeSystem& sys)
{
    // (d - i k2/2)(d + D2 - i k3/2) - g^2 = 0 as a quadratic in d.
    const double delta2 = detunings(sys, sys.omega3_shifted).delta2;
    const cplx p = -0.5 * I * sys.kappa_tot2;
    const cplx q = delta2 - 0.5 * I * sys.kappa_tot3;
    const cplx mean = -0.5 * (p + q);
    const cplx half_gap = std::sqrt(0.25 * (q - p) * (q - p) + sys.g * sys.g);
    return {mean - half_gap, mean + half_gap};
}

std::array<double, 2> dressed_frequencies(const TwoModeSystem& sys)
{
    // d = w3 - w_p - D2  =>  w_p = w3 - D2 - d
    const double delta2 = detunings(sys, sys.omega3_shifted).delta2;
    const auto roots = dressed_roots(sys);
    std::array<double, 2> w{sys.omega3_shifted - delta2 - roots[0].real(),
                            sys.omega3_shifted - delta2 - roots[1].real()};
    std::sort(w.begin(), w.end());
    return w;
}

std::vector<double> Spectrum::magnitude() const
{
    std::vector<double> m(r_c.size());
    std::transform(r_c.begin(), r_c.end(), m.begin(), [](cplx r) { return std::abs(r); });
    return m;
}

std::vector<double> linspace(double start, double stop, std::size_t count)
{
    std::vector<double> v(count);
    if (count == 1) {
        v[0] = start;
        return v;
    }
    const double step = (stop - start) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i)
        v[i] = start + step * static_cast<double>(i);
    v.back() = stop;
    return v;
}

Spectrum spectrum_sweep(const TwoModeSystem& sys, std::span<const double> grid, unsigned threads)
{
    sys.validate();
    if (grid.empty())
        throw ConfigError("spectrum sweep needs a nonempty probe grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw ConfigError("probe grid must be strictly increasing");

    Spectrum s;
    s.probe_grid.assign(grid.begin(), grid.end());
    s.r_c.resize(grid.size());
    s.metadata.system = sys;
    s.metadata.sweep = "closed-form reflection over " + std::to_string(grid.size()) + " probe points";
    parallel_for(grid.size(), threads, [&](std::size_t i) { s.r_c[i] = reflection_closed_form(sys, grid[i]); });
    return s;
}

std::vector<Extremum> find_dips(const Spectrum& spectrum)
{
    const auto mag = spectrum.magnitude();
    return local_minima(spectrum.probe_grid, mag);
}

std::array<Extremum, 2> deepest_dip_pair(const Spectrum& spectrum)
{
    auto dips = find_dips(spectrum);
    if (dips.size() < 2)
        throw InsufficientPeaksError("spectrum does not resolve two dips");
    std::partial_sort(dips.begin(), dips.begin() + 2, dips.end(),
                      [](const Extremum& l, const Extremum& r) { return l.y < r.y; });
    std::array<Extremum, 2> pair{dips[0], dips[1]};
    if (pair[0].x > pair[1].x)
        std::swap(pair[0], pair[1]);
    return pair;
}

SplittingMap splitting_map(const TwoModeSystem& sys, std::span<const double> omega_mod_grid,
                           std::span<const double> probe_grid, unsigned threads)
{
    sys.validate();
    SplittingMap map;
    map.omega_mod_grid.assign(omega_mod_grid.begin(), omega_mod_grid.end());
    map.probe_grid.assign(probe_grid.begin(), probe_grid.end());
    map.abs_rc.resize(omega_mod_grid.size() * probe_grid.size());
    const std::size_t np = probe_grid.size();
    parallel_for(omega_mod_grid.size(), threads, [&](std::size_t i) {
        TwoModeSystem s = sys;
        s.omega_mod = omega_mod_grid[i];
        for (std::size_t j = 0; j < np; ++j)
            map.abs_rc[i * np + j] = std::abs(reflection_closed_form(s, probe_grid[j]));
    });
    return map;
}

SplittingMaps splitting_directions(const TwoModeSystem& probe_lower, const TwoModeSystem& probe_upper,
                                   std::span<const double> omega_mod_grid,
                                   std::span<const double> lower_probe_grid,
                                   std::span<const double> upper_probe_grid, unsigned threads)
{
    if (probe_lower.conversion != -1 || probe_upper.conversion != 1)
        throw ConfigError("splitting views need the lower mode converted upward and the upper mode downward");
    return {splitting_map(probe_lower, omega_mod_grid, lower_probe_grid, threads),
            splitting_map(probe_upper, omega_mod_grid, upper_probe_grid, threads)};
}

double partner_branch_slope(const TwoModeSystem& sys)
{
    // Partner resonance d = 0  <=>  w_p = w2 + conversion * w_mod.
    return static_cast<double>(sys.conversion);
}

} // namespace paramode
