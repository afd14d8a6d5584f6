#include "paramode/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "paramode/core_model.hpp"
#include "paramode/errors.hpp"
#include "paramode/units.hpp"

namespace paramode {
namespace {

constexpr cplx I{0.0, 1.0};

// Detunings and coupling in force during one schedule state.
struct Coefficients {
    cplx decay_a; // -i D1 - k3/2
    cplx decay_b; // -i d - k2/2
    cplx coupling; // -i g
    cplx drive;    // -i sqrt(ke)
};

Coefficients coefficients(const TwoModeSystem& sys, const ModulationSchedule& schedule, double omega_p, bool on)
{
    TwoModeSystem s = sys;
    if (!on) {
        s.omega3_shifted -= schedule.shift3_on;
        s.omega2_shifted -= schedule.shift2_on;
    }
    const Detunings d = detunings(s, omega_p);
    const double g = on ? schedule.g_on : 0.0;
    return {-I * d.delta1 - 0.5 * s.kappa_tot3, -I * d.delta - 0.5 * s.kappa_tot2, -I * g,
            -I * std::sqrt(s.kappa_ext3)};
}

void validate_dynamics_system(const TwoModeSystem& sys)
{
    if (!(sys.kappa_tot3 >= 0.0) || !(sys.kappa_tot2 >= 0.0) || !(sys.kappa_ext3 >= 0.0))
        throw ConfigError("loss rates must be non-negative");
    if (!(sys.kappa_ext3 <= sys.kappa_tot3))
        throw ConfigError("kappa_ext3 exceeds kappa_tot3");
    if (sys.conversion != 1 && sys.conversion != -1)
        throw ConfigError("conversion must be +1 or -1");
}

std::string format_seconds(double t)
{
    std::ostringstream os;
    os << to_ns(t) << " ns";
    return os.str();
}

} // namespace

void DriveSpec::validate() const
{
    if (!(omega_p > 0.0))
        throw ConfigError("drive carrier frequency must be positive");
    if (const auto* g = std::get_if<GaussianEnvelope>(&envelope); g && !(g->tau > 0.0))
        throw ConfigError("gaussian envelope width must be positive");
}

double DriveSpec::peak_amplitude() const
{
    return std::sqrt(dbm_to_photon_flux(power_dbm, omega_p));
}

double DriveSpec::envelope_at(double t) const
{
    if (const auto* g = std::get_if<GaussianEnvelope>(&envelope)) {
        const double u = (t - g->t0) / g->tau;
        return std::exp(-u * u);
    }
    return 1.0;
}

double DriveSpec::bandwidth() const
{
    if (const auto* g = std::get_if<GaussianEnvelope>(&envelope))
        return 2.0 / g->tau;
    return 0.0;
}

void ModulationSchedule::validate(double t_begin, double t_end) const
{
    if (segments.empty())
        throw ConfigError("modulation schedule has no segments");
    if (!(g_on >= 0.0))
        throw ConfigError("schedule coupling g_on must be non-negative");
    if (segments.front().t_start > t_begin || segments.back().t_end < t_end)
        throw ConfigError("modulation schedule does not cover the integration window");
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& s = segments[i];
        if (!(s.t_end >= s.t_start))
            throw ConfigError("schedule segment " + std::to_string(i) + " ends before it starts");
        if (i > 0 && s.t_start != segments[i - 1].t_end)
            throw ConfigError("schedule segments " + std::to_string(i - 1) + " and " + std::to_string(i)
                              + " are not contiguous");
    }
}

ModulationSchedule ModulationSchedule::always_on(double t_begin, double t_end, double g_on, double shift3_on,
                                                 double shift2_on)
{
    return {{{t_begin, t_end, true}}, g_on, shift3_on, shift2_on};
}

double max_rate(const TwoModeSystem& sys, const ModulationSchedule& schedule, const DriveSpec& drive)
{
    double rate = std::max({sys.kappa_tot3, sys.kappa_tot2, schedule.g_on, drive.bandwidth()});
    for (bool on : {true, false}) {
        TwoModeSystem s = sys;
        if (!on) {
            s.omega3_shifted -= schedule.shift3_on;
            s.omega2_shifted -= schedule.shift2_on;
        }
        const Detunings d = detunings(s, drive.omega_p);
        rate = std::max({rate, std::abs(d.delta1), std::abs(d.delta2), std::abs(d.delta)});
    }
    return rate;
}

double max_step(const TwoModeSystem& sys, const ModulationSchedule& schedule, const DriveSpec& drive)
{
    return two_pi / (50.0 * max_rate(sys, schedule, drive));
}

double default_step(const TwoModeSystem& sys, const ModulationSchedule& schedule, const DriveSpec& drive)
{
    return two_pi / (100.0 * max_rate(sys, schedule, drive));
}

TimeTrace integrate(const TwoModeSystem& sys, const ModulationSchedule& schedule, const DriveSpec& drive,
                    TimeSpan span, double dt, InitialState init)
{
    validate_dynamics_system(sys);
    drive.validate();
    if (!(span.t_end > span.t_begin))
        throw ConfigError("integration window must have positive length");
    schedule.validate(span.t_begin, span.t_end);
    if (!(dt > 0.0))
        throw ConfigError("time step must be positive");
    const double ceiling = max_step(sys, schedule, drive);
    if (dt > ceiling * (1.0 + 1e-12))
        throw NumericalError("time step " + format_seconds(dt) + " exceeds the resolution limit "
                             + format_seconds(ceiling));

    const auto steps = static_cast<std::size_t>(std::ceil((span.t_end - span.t_begin) / dt - 1e-9));
    const std::size_t samples = steps + 1;
    auto snap = [&](double t) {
        const double k = std::round((t - span.t_begin) / dt);
        return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(steps)));
    };

    // Snap segment boundaries to the grid and mark each step on or off.
    std::vector<char> step_on(steps, 1);
    ModulationSchedule snapped = schedule;
    std::vector<std::size_t> boundaries{0};
    for (std::size_t i = 0; i < schedule.segments.size(); ++i) {
        const auto& seg = schedule.segments[i];
        const std::size_t i0 = i == 0 ? 0 : snap(seg.t_start);
        const std::size_t i1 = i + 1 == schedule.segments.size() ? steps : snap(seg.t_end);
        for (std::size_t k = i0; k < i1; ++k)
            step_on[k] = seg.on ? 1 : 0;
        snapped.segments[i].t_start = span.t_begin + static_cast<double>(i0) * dt;
        snapped.segments[i].t_end = span.t_begin + static_cast<double>(i1) * dt;
    }
    for (std::size_t k = 1; k < steps; ++k)
        if (step_on[k] != step_on[k - 1])
            boundaries.push_back(k);
    boundaries.push_back(steps);

    const Coefficients c_on = coefficients(sys, schedule, drive.omega_p, true);
    const Coefficients c_off = coefficients(sys, schedule, drive.omega_p, false);

    TimeTrace tr;
    tr.t.resize(samples);
    tr.a.resize(samples);
    tr.b.resize(samples);
    tr.alpha_in.resize(samples);
    tr.alpha_out.resize(samples);
    tr.v_out.resize(samples);

    cplx a = init.a;
    cplx b = init.b;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = span.t_begin + static_cast<double>(k) * dt;
        const cplx in = drive.alpha_in(t);
        tr.t[k] = t;
        tr.a[k] = a;
        tr.b[k] = b;
        tr.alpha_in[k] = in;
        tr.alpha_out[k] = output_field(in, a, sys.kappa_ext3);
        tr.v_out[k] = std::abs(tr.alpha_out[k]);
        if (k == steps)
            break;

        const Coefficients& c = step_on[k] ? c_on : c_off;
        auto da = [&](cplx x, cplx y, cplx drv) { return c.decay_a * x + c.coupling * y + c.drive * drv; };
        auto db = [&](cplx x, cplx y) { return c.decay_b * y + c.coupling * x; };

        const cplx in_mid = drive.alpha_in(t + 0.5 * dt);
        const cplx in_end = drive.alpha_in(t + dt);
        const cplx ka1 = da(a, b, in);
        const cplx kb1 = db(a, b);
        const cplx a2 = a + 0.5 * dt * ka1, b2 = b + 0.5 * dt * kb1;
        const cplx ka2 = da(a2, b2, in_mid);
        const cplx kb2 = db(a2, b2);
        const cplx a3 = a + 0.5 * dt * ka2, b3 = b + 0.5 * dt * kb2;
        const cplx ka3 = da(a3, b3, in_mid);
        const cplx kb3 = db(a3, b3);
        const cplx a4 = a + dt * ka3, b4 = b + dt * kb3;
        const cplx ka4 = da(a4, b4, in_end);
        const cplx kb4 = db(a4, b4);
        a += dt / 6.0 * (ka1 + 2.0 * ka2 + 2.0 * ka3 + ka4);
        b += dt / 6.0 * (kb1 + 2.0 * kb2 + 2.0 * kb3 + kb4);
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag()) || !std::isfinite(b.real())
            || !std::isfinite(b.imag()))
            throw NumericalError("non-finite mode amplitude at t = " + format_seconds(t + dt));
    }

    tr.metadata.system = sys;
    tr.metadata.schedule = std::move(snapped);
    tr.metadata.drive = drive;
    tr.metadata.dt = dt;
    tr.metadata.boundaries = std::move(boundaries);
    return tr;
}

TimeTrace memory_sequence(const TwoModeSystem& sys, const DriveSpec& drive, double g_on, double t_off,
                          double t_s, TimeSpan span, double dt, MotionalShifts shifts)
{
    if (!(t_s >= 0.0))
        throw ConfigError("storage time must be non-negative");
    if (!(t_off > span.t_begin) || t_off + t_s > span.t_end)
        throw ConfigError("storage window [t_off, t_off + t_s] must lie inside the integration window");
    ModulationSchedule schedule;
    schedule.g_on = g_on;
    schedule.shift3_on = shifts.shift3;
    schedule.shift2_on = shifts.shift2;
    schedule.segments.push_back({span.t_begin, t_off, true});
    if (t_s > 0.0)
        schedule.segments.push_back({t_off, t_off + t_s, false});
    schedule.segments.push_back({t_off + t_s, span.t_end, true});
    return integrate(sys, schedule, drive, span, dt);
}

double simpson(const std::vector<double>& y, double dt, std::size_t first, std::size_t last)
{
    const std::size_t n = last - first;
    if (n == 0)
        return 0.0;
    if (n == 1)
        return 0.5 * dt * (y[first] + y[last]);
    auto s38 = [&](std::size_t i) { return 3.0 * dt / 8.0 * (y[i] + 3.0 * y[i + 1] + 3.0 * y[i + 2] + y[i + 3]); };
    std::size_t even_end = last;
    double tail = 0.0;
    if (n % 2 == 1) {
        even_end = last - 3;
        tail = s38(even_end);
    }
    double sum = 0.0;
    for (std::size_t i = first; i < even_end; i += 2)
        sum += y[i] + 4.0 * y[i + 1] + y[i + 2];
    return dt / 3.0 * sum + tail;
}

EnergyLedger energy_balance(const TimeTrace& trace, const TwoModeSystem& sys)
{
    const std::size_t n = trace.size();
    if (n < 2)
        throw ConfigError("energy balance needs at least two samples");
    std::vector<double> in(n), out(n), loss(n);
    const double internal3 = sys.kappa_tot3 - sys.kappa_ext3;
    for (std::size_t i = 0; i < n; ++i) {
        in[i] = std::norm(trace.alpha_in[i]);
        out[i] = std::norm(trace.alpha_out[i]);
        loss[i] = internal3 * std::norm(trace.a[i]) + sys.kappa_tot2 * std::norm(trace.b[i]);
    }
    std::vector<std::size_t> cuts = trace.metadata.boundaries;
    if (cuts.size() < 2)
        cuts = {0, n - 1};

    EnergyLedger e;
    const double dt = trace.metadata.dt;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        e.in_energy += simpson(in, dt, cuts[k], cuts[k + 1]);
        e.out_energy += simpson(out, dt, cuts[k], cuts[k + 1]);
        e.dissipated += simpson(loss, dt, cuts[k], cuts[k + 1]);
    }
    e.stored_change = std::norm(trace.a.back()) + std::norm(trace.b.back()) - std::norm(trace.a.front())
                      - std::norm(trace.b.front());
    e.residual = e.in_energy - e.out_energy - e.dissipated - e.stored_change;
    return e;
}

BeatMetrics beating_metrics(const TimeTrace& trace, TimeWindow window)
{
    if (trace.size() < 3)
        throw ConfigError("trace too short for beat analysis");
    if (window.t_begin < trace.t.front() || window.t_end > trace.t.back() || !(window.t_end > window.t_begin))
        throw ConfigError("beat window must lie inside the trace");

    const auto lo = static_cast<std::size_t>(std::lower_bound(trace.t.begin(), trace.t.end(), window.t_begin)
                                             - trace.t.begin());
    const auto hi = static_cast<std::size_t>(std::upper_bound(trace.t.begin(), trace.t.end(), window.t_end)
                                             - trace.t.begin());
    std::span<const double> t(trace.t.data() + lo, hi - lo);
    std::span<const double> v(trace.v_out.data() + lo, hi - lo);
    const auto peaks = local_maxima(t, v);
    if (peaks.size() < 2)
        throw InsufficientPeaksError("fewer than two output maxima in the beat window; beating is unresolved");

    BeatMetrics m;
    m.beat_period = (peaks.back().x - peaks.front().x) / static_cast<double>(peaks.size() - 1);
    m.first_peak_time = peaks.front().x;
    m.first_peak_value = peaks.front().y;

    double vmax = peaks.front().y;
    double vmin = vmax;
    for (std::size_t i = lo; i < hi; ++i) {
        if (trace.t[i] < m.first_peak_time || trace.t[i] > m.first_peak_time + m.beat_period)
            continue;
        vmax = std::max(vmax, trace.v_out[i]);
        vmin = std::min(vmin, trace.v_out[i]);
    }
    m.visibility = (vmax - vmin) / (vmax + vmin);

    double t_store = window.t_begin;
    double t_retrieve = window.t_begin;
    const auto& segs = trace.metadata.schedule.segments;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (!segs[i].on && segs[i].t_end > segs[i].t_start) {
            t_store = segs[i].t_start;
            t_retrieve = segs[i].t_end;
            break;
        }
    }
    const double dt = trace.metadata.dt;
    std::vector<double> in(trace.size()), out(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        in[i] = std::norm(trace.alpha_in[i]);
        out[i] = std::norm(trace.alpha_out[i]);
    }
    auto index_of = [&](double time) {
        return static_cast<std::size_t>(
            std::lower_bound(trace.t.begin(), trace.t.end(), time - 0.5 * dt) - trace.t.begin());
    };
    const double e_in = simpson(in, dt, 0, trace.size() - 1);
    if (!(e_in > 0.0))
        throw NumericalError("trace carries no input energy");
    const std::size_t is = std::min(index_of(t_store), trace.size() - 1);
    const std::size_t ir = std::min(index_of(t_retrieve), trace.size() - 1);
    m.stored_fraction = (std::norm(trace.a[is]) + std::norm(trace.b[is])) / e_in;
    m.retrieved_fraction = simpson(out, dt, ir, trace.size() - 1) / e_in;
    return m;
}

} // namespace paramode
