#pragma once

// Parameter extraction: a bounded Levenberg-Marquardt least-squares core
// and the four forward models used in the analysis (single-mode dip,
// Lambda-type split spectrum, flux arch, through-origin scaling laws).

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paramode/core_model.hpp"
#include "paramode/steady_state.hpp"

namespace paramode {

enum class ModelKind { single_mode, lambda, flux_arch, polynomial };

std::string to_string(ModelKind kind);

struct FitProblem {
    ModelKind model = ModelKind::polynomial;
    std::vector<double> x; ///< abscissae (informational; the model closes over what it needs)
    std::vector<double> y; ///< observations
    /// Model prediction for every observation, same length as y.
    std::function<std::vector<double>(std::span<const double>)> predict;
    std::vector<double> theta0;
    std::vector<double> lower; ///< empty means unbounded
    std::vector<double> upper;
    std::vector<double> weights; ///< empty means unit weights
    /// Typical parameter magnitudes, used for the finite-difference step
    /// when a parameter is near zero. Empty means 1.
    std::vector<double> scale;

    void validate() const;
};

struct FitResult {
    std::vector<double> theta;
    double residual_norm = 0.0; ///< final weighted sum of squares
    double initial_residual_norm = 0.0;
    std::vector<std::vector<double>> covariance;
    int iterations = 0;
    bool converged = false;
    std::vector<std::string> warnings;

    std::vector<double> standard_errors() const;
};

struct LeastSquaresOptions {
    int max_iterations = 200;
    double step_tolerance = 1e-10;  ///< relative step norm
    double fd_relative_step = 1e-6; ///< central-difference step
};

/// Damped Gauss-Newton with Marquardt scaling and box projection.
/// Never throws on non-convergence; reports converged = false instead.
FitResult least_squares(const FitProblem& problem, const LeastSquaresOptions& options = {});

// Single-mode dip ------------------------------------------------------------

struct SingleModeParams {
    double omega_r = 0.0;
    double kappa_tot = 0.0;
    double kappa_ext = 0.0;
};

/// |1 + i ke / (w_r - w_p - i kt/2)|.
double single_mode_magnitude(const SingleModeParams& p, double omega_p);
cplx single_mode_reflection(const SingleModeParams& p, double omega_p);

struct SingleModeFit {
    SingleModeParams params;
    /// kappa_ext -> kappa_tot - kappa_ext mirror, indistinguishable from |r_c|.
    SingleModeParams mirror;
    double mirror_residual_norm = 0.0;
    FitResult result; ///< theta = (w_r, kt, ke)
};

struct SingleModeOptions {
    bool use_phase = false; ///< fit Re/Im instead of |r_c| (lifts the mirror degeneracy)
};

SingleModeFit fit_single_mode(const Spectrum& spectrum, const SingleModeParams& theta0,
                              const SingleModeOptions& options = {});

// Lambda-type split spectrum -------------------------------------------------

struct LambdaFixed {
    double kappa_tot2 = 0.0;
    double kappa_tot3 = 0.0;
    double kappa_ext3 = 0.0;
};

struct LambdaParams {
    double g = 0.0;
    double delta2 = 0.0;
    double omega3_shifted = 0.0;
};

struct LambdaOptions {
    bool fit_amplitude_scale = false; ///< floats an overall |r_c| scale factor
};

struct LambdaFit {
    LambdaParams params;
    double amplitude_scale = 1.0;
    FitResult result; ///< theta = (g, D2, w3[, scale])
};

/// |Eq. 5| as a function of probe frequency for given params.
double lambda_magnitude(const LambdaFixed& fixed, const LambdaParams& p, double omega_p);

LambdaFit fit_lambda(const Spectrum& spectrum, const LambdaFixed& fixed, const LambdaParams& theta0,
                     const LambdaOptions& options = {});

// Flux arch ------------------------------------------------------------------

struct ArchSamples {
    int mode = 0;
    std::vector<double> phi;   ///< flux, units of Phi0
    std::vector<double> omega; ///< rad/s
};

struct ArchGuess {
    double critical_current = 0.0;
    double asymmetry = 0.0;
    std::map<int, double> omega_zero_flux; ///< per-mode frequency at integer flux (arch top)
};

struct ArchFit {
    double critical_current = 0.0;
    double asymmetry = 0.0;
    std::map<int, InductorCapacitor> lc;
    std::map<int, double> omega_zero_flux;
    std::map<int, double> omega_short; ///< 1/sqrt(L_n C_n)
    double ratio_hint = default_ratio_hint; ///< gauge: L_n / C_n held at this value
    FitResult result; ///< theta = (I_c, d, zero-flux frequency per mode ascending)

    /// Device with the fitted junction and (L_n, C_n); losses left at zero.
    DeviceParams device() const;
};

/// Joint fit of 1/sqrt(C_n (L_n + L_s(phi))) across modes sharing (I_c, d).
/// Each mode is parametrized by its frequency at integer flux with L_n/C_n
/// pinned to ratio_hint, which removes the (sL_n, C_n/s, I_c/s) degeneracy.
ArchFit fit_flux_arch(const std::vector<ArchSamples>& data, const ArchGuess& theta0,
                      double ratio_hint = default_ratio_hint);

// Scaling laws ---------------------------------------------------------------

struct ScalingFit {
    int order = 1;
    double coefficient = 0.0; ///< y = c x^order
    double standard_error = 0.0;
    double residual_norm = 0.0;     ///< sum of squares
    double relative_residual = 0.0; ///< sqrt(SS_res / sum y^2)
};

/// Through-origin fit y = c x (order 1) or y = c x^2 (order 2).
ScalingFit fit_scaling(std::span<const double> x, std::span<const double> y, int order);

} // namespace paramode
