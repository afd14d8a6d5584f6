#pragma once

// Time-domain Langevin dynamics of the two-mode system in the fixed
// rotating frame of the probe carrier. The parametric coupling and the
// motional shifts follow a piecewise-constant on/off schedule.

#include <complex>
#include <cstddef>
#include <variant>
#include <vector>

#include "paramode/steady_state.hpp"

namespace paramode {

struct ContinuousWave {};

/// exp(-(t - t0)^2 / tau^2) amplitude envelope.
struct GaussianEnvelope {
    double t0 = 0.0;
    double tau = 0.0;
};

struct DriveSpec {
    double omega_p = 0.0;   ///< carrier, rad/s
    double power_dbm = 0.0; ///< peak power
    std::variant<ContinuousWave, GaussianEnvelope> envelope;

    void validate() const;
    /// sqrt(photon flux) at peak power.
    double peak_amplitude() const;
    /// Envelope value in [0, 1].
    double envelope_at(double t) const;
    cplx alpha_in(double t) const { return {peak_amplitude() * envelope_at(t), 0.0}; }
    /// Fastest rate of the envelope, used to bound the step size.
    double bandwidth() const;
};

struct ScheduleSegment {
    double t_start = 0.0;
    double t_end = 0.0;
    bool on = true;
};

struct ModulationSchedule {
    std::vector<ScheduleSegment> segments;
    double g_on = 0.0;
    double shift3_on = 0.0; ///< motional shift of the probed mode while on
    double shift2_on = 0.0; ///< motional shift of the partner while on

    /// Contiguous, ordered, non-overlapping segments covering [t_begin, t_end].
    void validate(double t_begin, double t_end) const;

    static ModulationSchedule always_on(double t_begin, double t_end, double g_on,
                                        double shift3_on = 0.0, double shift2_on = 0.0);
};

struct TimeSpan {
    double t_begin = 0.0;
    double t_end = 0.0;
};

struct InitialState {
    cplx a{};
    cplx b{};
};

struct TraceMetadata {
    TwoModeSystem system;
    ModulationSchedule schedule; ///< boundaries snapped to the time grid
    DriveSpec drive;
    double dt = 0.0;
    /// Sample indices at which the schedule switches, ascending, including
    /// 0 and the final index.
    std::vector<std::size_t> boundaries;
};

struct TimeTrace {
    std::vector<double> t;
    std::vector<cplx> a;
    std::vector<cplx> b;
    std::vector<cplx> alpha_in;
    std::vector<cplx> alpha_out;
    std::vector<double> v_out; ///< |alpha_out| in arbitrary units
    TraceMetadata metadata;

    std::size_t size() const { return t.size(); }
};

/// Largest rate (rad/s) among detunings, coupling, losses and drive bandwidth.
double max_rate(const TwoModeSystem& sys, const ModulationSchedule& schedule, const DriveSpec& drive);
/// Step-size ceiling: 2 pi / (50 max_rate).
double max_step(const TwoModeSystem& sys, const ModulationSchedule& schedule, const DriveSpec& drive);
/// Default step: 2 pi / (100 max_rate).
double default_step(const TwoModeSystem& sys, const ModulationSchedule& schedule, const DriveSpec& drive);

/// Classical RK4 integration of the Langevin equations on a uniform grid.
/// The frequencies in `sys` are the modulation-on values; while the
/// schedule is off, g = 0 and the schedule's shifts are subtracted. The g
/// field of `sys` is ignored in favour of schedule.g_on.
TimeTrace integrate(const TwoModeSystem& sys, const ModulationSchedule& schedule, const DriveSpec& drive,
                    TimeSpan span, double dt, InitialState init = {});

struct MotionalShifts {
    double shift3 = 0.0;
    double shift2 = 0.0;
};

/// On -> off during [t_off, t_off + t_s] -> on, then integrate.
TimeTrace memory_sequence(const TwoModeSystem& sys, const DriveSpec& drive, double g_on, double t_off,
                          double t_s, TimeSpan span, double dt, MotionalShifts shifts = {});

struct TimeWindow {
    double t_begin = 0.0;
    double t_end = 0.0;
};

struct BeatMetrics {
    double beat_period = 0.0;        ///< s
    double visibility = 0.0;         ///< (max - min) / (max + min) over one period
    double stored_fraction = 0.0;    ///< (|a|^2 + |b|^2) at storage start / input energy
    double retrieved_fraction = 0.0; ///< output energy after retrieval / input energy
    double first_peak_time = 0.0;
    double first_peak_value = 0.0;
};

/// Beat analysis of v_out inside `window`. Storage start is the first off
/// segment of the trace's schedule (or the window start when none), and
/// retrieval is the start of the last on segment following it.
BeatMetrics beating_metrics(const TimeTrace& trace, TimeWindow window);

struct EnergyLedger {
    double in_energy = 0.0;
    double out_energy = 0.0;
    double dissipated = 0.0;
    double stored_change = 0.0; ///< (|a|^2 + |b|^2) at end minus start
    double residual = 0.0;      ///< in - out - dissipated - stored_change
};

/// Photon-number bookkeeping of a trace by composite Simpson quadrature,
/// applied piecewise between schedule boundaries.
EnergyLedger energy_balance(const TimeTrace& trace, const TwoModeSystem& sys);

/// Composite Simpson quadrature of uniformly sampled values (3/8 rule on
/// the last panel when the interval count is odd).
double simpson(const std::vector<double>& y, double dt, std::size_t first, std::size_t last);

} // namespace paramode
