#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "paramode/errors.hpp"

using namespace paramode;
using fixtures::rel_diff;

namespace {

DeviceParams junction(double ic, double d)
{
    DeviceParams dev;
    dev.critical_current = ic;
    dev.asymmetry = d;
    dev.modes[3] = {1e-9, 1e-12, mhz(5.0), mhz(2.0)};
    return dev;
}

// Second derivative of the mode frequency by a five-point stencil.
double second_derivative(int n, double phi, const DeviceParams& dev, double h)
{
    const auto f = [&](double p) { return mode_frequency(n, p, dev); };
    return (-f(phi + 2 * h) + 16 * f(phi + h) - 30 * f(phi) + 16 * f(phi - h) - f(phi - 2 * h)) / (12 * h * h);
}

} // namespace

TEST_CASE("squid inductance at zero flux is Phi0 / (4 pi I_c)")
{
    for (double d : {0.0, 0.1, 0.5, 1.0}) {
        const DeviceParams dev = junction(1e-6, d);
        CHECK(squid_inductance(0.0, dev) == doctest::Approx(flux_quantum / (4 * pi * 1e-6)).epsilon(1e-15));
    }
}

TEST_CASE("squid inductance is flux independent for a fully asymmetric SQUID")
{
    const DeviceParams dev = junction(2e-6, 1.0);
    const double ref = flux_quantum / (4 * pi * 2e-6);
    for (double phi : {-0.7, -0.25, 0.1, 0.33, 0.5, 0.9})
        CHECK(rel_diff(squid_inductance(phi, dev), ref) < 1e-14);
}

TEST_CASE("squid inductance at the operating point matches direct evaluation")
{
    // 30-digit evaluation of the formula.
    const double oracle = 3.1873602543750502298e-10;
    CHECK(rel_diff(squid_inductance(0.33, junction(1e-6, 0.1)), oracle) < 1e-13);
}

TEST_CASE("squid inductance is even, periodic and minimal at integer flux")
{
    const DeviceParams dev = junction(1e-6, 0.1);
    for (double phi : {0.05, 0.2, 0.33, 0.47}) {
        CHECK(rel_diff(squid_inductance(phi, dev), squid_inductance(-phi, dev)) < 1e-14);
        CHECK(rel_diff(squid_inductance(phi, dev), squid_inductance(phi + 1.0, dev)) < 1e-12);
        CHECK(squid_inductance(phi, dev) > squid_inductance(0.0, dev));
    }
}

TEST_CASE("symmetric SQUID at half flux is rejected")
{
    const DeviceParams dev = junction(1e-6, 0.0);
    CHECK_THROWS_AS(squid_inductance(0.5, dev), NumericalError);
    CHECK_THROWS_AS(squid_inductance(-1.5, dev), NumericalError);
    CHECK_NOTHROW(squid_inductance(0.49, dev));
}

TEST_CASE("mode frequency approaches 1/sqrt(LC) when the SQUID is a short")
{
    DeviceParams dev = junction(1.0, 0.1); // 1 A: L_s ~ 1e-16 H
    const auto& m = dev.mode(3);
    const double short_limit = 1.0 / std::sqrt(m.inductance * m.capacitance);
    CHECK(rel_diff(mode_frequency(3, 0.33, dev), short_limit) < 1e-6);
}

TEST_CASE("calibrated device reproduces the quoted bias frequencies")
{
    const DeviceParams dev = fixtures::reference_device();
    CHECK(rel_diff(mode_frequency(2, 0.33, dev), ghz(4.0614)) < 1e-12);
    CHECK(rel_diff(mode_frequency(3, 0.33, dev), ghz(5.7284)) < 1e-12);
    CHECK(rel_diff(mode_frequency(4, 0.33, dev), ghz(7.4203)) < 1e-12);
    for (const auto& [n, m] : dev.modes)
        CHECK(m.inductance / m.capacitance == doctest::Approx(default_ratio_hint).epsilon(1e-12));
}

TEST_CASE("mode frequency is even, periodic and decreasing on [0, 0.5)")
{
    const DeviceParams dev = fixtures::reference_device();
    for (double phi : {0.1, 0.33, 0.45}) {
        CHECK(mode_frequency(3, phi, dev) == mode_frequency(3, -phi, dev));
        CHECK(rel_diff(mode_frequency(3, phi, dev), mode_frequency(3, 1.0 - phi, dev)) < 1e-13);
    }
    double prev = mode_frequency(3, 0.0, dev);
    for (int k = 1; k < 50; ++k) {
        const double w = mode_frequency(3, 0.01 * k, dev);
        CHECK(w < prev);
        prev = w;
    }
}

TEST_CASE("calibrate_lc inverts mode_frequency")
{
    DeviceParams dev = junction(1e-6, 0.1);
    for (double f : {4.0, 5.7284, 7.9}) {
        for (double phi : {0.0, 0.2, 0.33}) {
            const auto lc = calibrate_lc(ghz(f), phi, 1000.0, dev);
            dev.modes[3] = {lc.inductance, lc.capacitance, 1.0, 1.0};
            CHECK(rel_diff(mode_frequency(3, phi, dev), ghz(f)) < 1e-12);
            CHECK(lc.inductance / lc.capacitance == doctest::Approx(1000.0).epsilon(1e-12));
        }
    }
    const auto lc = calibrate_lc(ghz(5.7284), 0.33, default_ratio_hint, dev);
    dev.modes[3] = {lc.inductance * 1.01, lc.capacitance, 1.0, 1.0};
    CHECK(mode_frequency(3, 0.33, dev) < ghz(5.7284));
    CHECK_THROWS_AS(calibrate_lc(0.0, 0.33, 1.0, dev), ConfigError);
}

TEST_CASE("motional average without modulation is the static frequency")
{
    const DeviceParams dev = fixtures::reference_device();
    const FluxOperatingPoint op{0.33, 0.0, 0.0};
    CHECK(motional_average(3, op, dev) == mode_frequency(3, 0.33, dev));
    CHECK(motional_shift(2, op, dev) == 0.0);
}

TEST_CASE("motional shift follows the small-amplitude curvature law")
{
    const DeviceParams dev = fixtures::reference_device();
    for (int n : {2, 3}) {
        const double curvature = second_derivative(n, 0.33, dev, 1e-3);
        for (double dphi : {0.001, 0.0025, 0.005}) {
            const FluxOperatingPoint op{0.33, dphi, ghz(1.664)};
            const double taylor = 0.25 * dphi * dphi * curvature;
            CHECK(rel_diff(motional_shift(n, op, dev), taylor) < 1e-3);
        }
    }
}

TEST_CASE("motional shift is quadratic at small amplitude")
{
    const DeviceParams dev = fixtures::reference_device();
    double prev_err = 1.0;
    for (double dphi : {0.02, 0.01, 0.005, 0.0025, 0.00125}) {
        const double s1 = motional_shift(3, {0.33, dphi, 1.0}, dev);
        const double s2 = motional_shift(3, {0.33, 2 * dphi, 1.0}, dev);
        const double err = std::abs(s2 / s1 - 4.0);
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err < 1e-3);
}

TEST_CASE("motional average quadrature is converged")
{
    const DeviceParams dev = fixtures::reference_device();
    const FluxOperatingPoint op{0.33, 0.02, ghz(1.664)};
    const double a = motional_average(3, op, dev, 256);
    const double b = motional_average(3, op, dev, 512);
    CHECK(rel_diff(a, b) < 1e-9);
    CHECK_THROWS_AS(motional_average(3, op, dev, 32), ConfigError);
}

TEST_CASE("operating point invariants")
{
    CHECK_THROWS_AS((FluxOperatingPoint{0.33, -0.01, 1.0}.validate()), ConfigError);
    CHECK_THROWS_AS((FluxOperatingPoint{0.33, 0.01, 0.0}.validate()), ConfigError);
    CHECK_NOTHROW((FluxOperatingPoint{0.33, 0.0, 0.0}.validate()));
}

TEST_CASE("coupling law is linear")
{
    const CouplingLaw law{ghz(1.0)};
    CHECK(coupling_strength(0.0, law) == 0.0);
    CHECK(coupling_strength(0.02, law) == 2.0 * coupling_strength(0.01, law));
    CHECK(to_mhz(coupling_strength(0.0066, law)) == doctest::Approx(6.6).epsilon(1e-12));
    CHECK_THROWS_AS(coupling_strength(-1e-3, law), ConfigError);
    CHECK_THROWS_AS((CouplingLaw{-1.0}.validate()), ConfigError);
}

TEST_CASE("probe power converts to photon flux")
{
    const double w = ghz(5.728);
    // 30-digit evaluation of 10^((P - 30)/10) / (hbar w).
    CHECK(rel_diff(dbm_to_photon_flux(-102.0, w), 16624207902.340264742) < 1e-13);
    CHECK(rel_diff(dbm_to_photon_flux(-92.0, w), 10.0 * dbm_to_photon_flux(-102.0, w)) < 1e-14);
    CHECK(rel_diff(dbm_to_photon_flux(-102.0, w) / dbm_to_photon_flux(-117.0, w), std::pow(10.0, 1.5)) < 1e-14);
    CHECK_THROWS_AS(dbm_to_photon_flux(-102.0, 0.0), ConfigError);
}

TEST_CASE("quoted frequencies select the (2,3) pair")
{
    const double margin = selectivity_margin(ghz(4.0614), ghz(5.7284), ghz(7.4203));
    CHECK(to_mhz(margin) == doctest::Approx(-24.9).epsilon(1e-9));
    for (double k : {4.6461, 6.8857, 8.3224})
        CHECK(std::abs(margin) > mhz(k));
}

TEST_CASE("device invariants are enforced")
{
    DeviceParams dev = fixtures::reference_device();
    CHECK_NOTHROW(dev.validate());
    DeviceParams bad = dev;
    bad.critical_current = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = dev;
    bad.asymmetry = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = dev;
    bad.modes[3].kappa_ext = bad.modes[3].kappa_tot * 1.01;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = dev;
    bad.modes[2].capacitance = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(dev.mode(7), ConfigError);
}
