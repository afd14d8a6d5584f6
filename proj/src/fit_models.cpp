#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "paramode/errors.hpp"
#include "paramode/fitting.hpp"

namespace paramode {
namespace {

constexpr cplx I{0.0, 1.0};
constexpr double inf = std::numeric_limits<double>::infinity();

double grid_center(const Spectrum& s)
{
    if (s.probe_grid.empty())
        throw ConfigError("spectrum is empty");
    return 0.5 * (s.probe_grid.front() + s.probe_grid.back());
}

} // namespace

// Single mode ---------------------------------------------------------------

cplx single_mode_reflection(const SingleModeParams& p, double omega_p)
{
    return 1.0 + I * p.kappa_ext / ((p.omega_r - omega_p) - 0.5 * I * p.kappa_tot);
}

double single_mode_magnitude(const SingleModeParams& p, double omega_p)
{
    return std::abs(single_mode_reflection(p, omega_p));
}

SingleModeFit fit_single_mode(const Spectrum& spectrum, const SingleModeParams& theta0,
                              const SingleModeOptions& options)
{
    // Fit the resonance as an offset from the grid centre so all three
    // parameters share the scale of a linewidth.
    const double ref = grid_center(spectrum);
    const auto& grid = spectrum.probe_grid;

    FitProblem prob;
    prob.model = ModelKind::single_mode;
    prob.x = grid;
    if (options.use_phase) {
        for (cplx r : spectrum.r_c) {
            prob.y.push_back(r.real());
            prob.y.push_back(r.imag());
        }
    } else {
        prob.y = spectrum.magnitude();
    }
    prob.predict = [&grid, ref, phase = options.use_phase](std::span<const double> th) {
        const SingleModeParams p{ref + th[0], th[1], th[2]};
        std::vector<double> out;
        out.reserve(grid.size() * (phase ? 2 : 1));
        for (double w : grid) {
            const cplx r = single_mode_reflection(p, w);
            if (phase) {
                out.push_back(r.real());
                out.push_back(r.imag());
            } else {
                out.push_back(std::abs(r));
            }
        }
        return out;
    };
    prob.theta0 = {theta0.omega_r - ref, theta0.kappa_tot, theta0.kappa_ext};
    prob.lower = {-inf, 0.0, 0.0};
    prob.upper = {inf, inf, inf};
    const double kscale = std::max(theta0.kappa_tot, 1.0);
    prob.scale = {kscale, kscale, kscale};

    FitResult res = least_squares(prob);
    SingleModeParams best{ref + res.theta[0], res.theta[1], res.theta[2]};
    // Report the physical (under-coupled or over-coupled) branch with
    // kappa_ext <= kappa_tot.
    if (best.kappa_ext > best.kappa_tot && !options.use_phase) {
        best.kappa_ext = best.kappa_tot - best.kappa_ext;
    }
    res.theta = {best.omega_r, best.kappa_tot, best.kappa_ext};

    SingleModeFit fit;
    fit.params = best;
    fit.mirror = {best.omega_r, best.kappa_tot, best.kappa_tot - best.kappa_ext};
    const auto pred = prob.predict(std::vector<double>{fit.mirror.omega_r - ref, fit.mirror.kappa_tot,
                                                       fit.mirror.kappa_ext});
    double ss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        ss += (pred[i] - prob.y[i]) * (pred[i] - prob.y[i]);
    fit.mirror_residual_norm = ss;
    fit.result = std::move(res);
    return fit;
}

// Lambda ----------------------------------------------------------------------

double lambda_magnitude(const LambdaFixed& fixed, const LambdaParams& p, double omega_p)
{
    TwoModeSystem sys;
    sys.kappa_tot2 = fixed.kappa_tot2;
    sys.kappa_tot3 = fixed.kappa_tot3;
    sys.kappa_ext3 = fixed.kappa_ext3;
    sys.g = p.g;
    sys.omega3_shifted = p.omega3_shifted;
    // Only D2 enters the closed form; place the partner so that it is met.
    sys.omega_mod = 0.0;
    sys.omega2_shifted = p.omega3_shifted - p.delta2;
    return std::abs(reflection_closed_form(sys, omega_p));
}

LambdaFit fit_lambda(const Spectrum& spectrum, const LambdaFixed& fixed, const LambdaParams& theta0,
                     const LambdaOptions& options)
{
    const double ref = grid_center(spectrum);
    const auto& grid = spectrum.probe_grid;
    const bool scaled = options.fit_amplitude_scale;

    FitProblem prob;
    prob.model = ModelKind::lambda;
    prob.x = grid;
    prob.y = spectrum.magnitude();
    prob.predict = [&grid, &fixed, ref, scaled](std::span<const double> th) {
        const LambdaParams p{th[0], th[1], ref + th[2]};
        const double amp = scaled ? th[3] : 1.0;
        std::vector<double> out(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            out[i] = amp * lambda_magnitude(fixed, p, grid[i]);
        return out;
    };
    prob.theta0 = {std::abs(theta0.g), theta0.delta2, theta0.omega3_shifted - ref};
    prob.lower = {0.0, -inf, -inf};
    prob.upper = {inf, inf, inf};
    const double kscale = std::max(fixed.kappa_tot3, 1.0);
    prob.scale = {kscale, kscale, kscale};
    if (scaled) {
        double guess = 1.0;
        // Far-detuned points of a passive Lambda response sit at |r_c| = 1.
        guess = std::max(prob.y.front(), prob.y.back());
        prob.theta0.push_back(guess > 0.0 ? guess : 1.0);
        prob.lower.push_back(0.0);
        prob.upper.push_back(inf);
        prob.scale.push_back(1.0);
    }

    FitResult res = least_squares(prob);
    LambdaFit fit;
    fit.params = {std::abs(res.theta[0]), res.theta[1], ref + res.theta[2]};
    fit.amplitude_scale = scaled ? res.theta[3] : 1.0;
    res.theta[0] = fit.params.g;
    res.theta[2] = fit.params.omega3_shifted;
    if (fit.params.g < 0.5 * fixed.kappa_tot3)
        res.warnings.push_back("unresolved splitting: fitted g is below kappa_tot3 / 2, parameters are weakly identified");
    fit.result = std::move(res);
    return fit;
}

// Flux arch -------------------------------------------------------------------

DeviceParams ArchFit::device() const
{
    DeviceParams d;
    d.critical_current = critical_current;
    d.asymmetry = asymmetry;
    for (const auto& [n, v] : lc)
        d.modes[n] = {v.inductance, v.capacitance, 0.0, 0.0};
    return d;
}

namespace {

// (L_n, C_n) in the ratio gauge for a mode resonating at omega_top at
// integer flux, where L_s = Phi0 / (4 pi I_c) regardless of d.
InductorCapacitor lc_from_top(double omega_top, double critical_current, double ratio)
{
    DeviceParams junction;
    junction.critical_current = critical_current;
    return calibrate_lc(omega_top, 0.0, ratio, junction);
}

} // namespace

ArchFit fit_flux_arch(const std::vector<ArchSamples>& data, const ArchGuess& theta0, double ratio_hint)
{
    if (data.size() < 2)
        throw ConfigError("flux-arch fit needs at least two modes");
    if (!(ratio_hint > 0.0))
        throw ConfigError("ratio_hint must be positive");
    double phi_min = inf, phi_max = -inf;
    for (const auto& m : data) {
        if (m.phi.size() != m.omega.size())
            throw ConfigError("mode " + std::to_string(m.mode) + ": flux and frequency lengths differ");
        if (m.phi.size() < 4)
            throw ConfigError("mode " + std::to_string(m.mode) + ": flux-arch fit needs at least four flux points");
        if (!theta0.omega_zero_flux.contains(m.mode))
            throw ConfigError("mode " + std::to_string(m.mode) + ": no initial zero-flux frequency");
        for (double p : m.phi) {
            phi_min = std::min(phi_min, p);
            phi_max = std::max(phi_max, p);
        }
    }

    FitProblem prob;
    prob.model = ModelKind::flux_arch;
    for (const auto& m : data) {
        prob.x.insert(prob.x.end(), m.phi.begin(), m.phi.end());
        prob.y.insert(prob.y.end(), m.omega.begin(), m.omega.end());
    }
    prob.predict = [&data, ratio_hint](std::span<const double> th) {
        DeviceParams dev;
        dev.critical_current = th[0];
        dev.asymmetry = th[1];
        for (std::size_t k = 0; k < data.size(); ++k) {
            const auto lc = lc_from_top(th[2 + k], th[0], ratio_hint);
            dev.modes[data[k].mode] = {lc.inductance, lc.capacitance, 0.0, 0.0};
        }
        std::vector<double> out;
        for (const auto& m : data)
            for (double p : m.phi)
                out.push_back(mode_frequency(m.mode, p, dev));
        return out;
    };
    prob.theta0 = {theta0.critical_current, theta0.asymmetry};
    // d enters only as d^2 and its derivative vanishes at d = 0, so a bound
    // there would trap the search; the sign is dropped after the fit.
    prob.lower = {1e-6 * theta0.critical_current, -1.0};
    prob.upper = {inf, 1.0};
    for (const auto& m : data) {
        prob.theta0.push_back(theta0.omega_zero_flux.at(m.mode));
        prob.lower.push_back(0.0);
        prob.upper.push_back(inf);
    }
    // Frequencies span GHz; weight to relative residuals.
    prob.weights.resize(prob.y.size());
    for (std::size_t i = 0; i < prob.y.size(); ++i)
        prob.weights[i] = 1.0 / prob.y[i];
    prob.scale.assign(prob.theta0.size(), 0.0);
    prob.scale[1] = 0.1;

    // Stage 1: arch tops alone with the junction held at its guess. This
    // places every mode on its data before the junction is released.
    FitProblem tops = prob;
    const double ic0 = theta0.critical_current, d0 = theta0.asymmetry;
    tops.predict = [full = prob.predict, ic0, d0](std::span<const double> th) {
        std::vector<double> t{ic0, d0};
        t.insert(t.end(), th.begin(), th.end());
        return full(t);
    };
    tops.theta0.assign(prob.theta0.begin() + 2, prob.theta0.end());
    tops.lower.assign(prob.lower.begin() + 2, prob.lower.end());
    tops.upper.assign(prob.upper.begin() + 2, prob.upper.end());
    tops.scale.assign(prob.scale.begin() + 2, prob.scale.end());
    const FitResult staged = least_squares(tops);
    std::copy(staged.theta.begin(), staged.theta.end(), prob.theta0.begin() + 2);

    FitResult res = least_squares(prob);
    res.initial_residual_norm = staged.initial_residual_norm;
    if (phi_max - phi_min < 0.1)
        res.warnings.push_back("flux span below 0.1 flux quantum: junction asymmetry is weakly constrained");

    ArchFit fit;
    fit.critical_current = res.theta[0];
    res.theta[1] = std::abs(res.theta[1]);
    fit.asymmetry = res.theta[1];
    fit.ratio_hint = ratio_hint;
    for (std::size_t k = 0; k < data.size(); ++k) {
        const auto lc = lc_from_top(res.theta[2 + k], res.theta[0], ratio_hint);
        fit.omega_zero_flux[data[k].mode] = res.theta[2 + k];
        fit.omega_short[data[k].mode] = 1.0 / std::sqrt(lc.inductance * lc.capacitance);
        fit.lc[data[k].mode] = lc;
    }
    fit.result = std::move(res);
    return fit;
}

// Scaling ---------------------------------------------------------------------

ScalingFit fit_scaling(std::span<const double> x, std::span<const double> y, int order)
{
    if (order != 1 && order != 2)
        throw ConfigError("scaling fit order must be 1 or 2");
    if (x.size() != y.size())
        throw ConfigError("scaling fit: x and y lengths differ");
    if (x.size() < static_cast<std::size_t>(order) + 2)
        throw ConfigError("scaling fit needs at least order + 2 points");
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); }))
        throw NumericalError("scaling fit is rank deficient: all abscissae are equal");

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double basis = order == 1 ? x[i] : x[i] * x[i];
        sxx += basis * basis;
        sxy += basis * y[i];
        syy += y[i] * y[i];
    }
    ScalingFit fit;
    fit.order = order;
    fit.coefficient = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double basis = order == 1 ? x[i] : x[i] * x[i];
        const double e = y[i] - fit.coefficient * basis;
        ss += e * e;
    }
    fit.residual_norm = ss;
    fit.relative_residual = syy > 0.0 ? std::sqrt(ss / syy) : 0.0;
    fit.standard_error = std::sqrt(ss / static_cast<double>(x.size() - 1) / sxx);
    return fit;
}

} // namespace paramode
