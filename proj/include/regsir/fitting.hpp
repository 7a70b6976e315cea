#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "regsir/params.hpp"
#include "regsir/solver.hpp"

namespace regsir {

// Daily incidence with contiguous dates. smoothed is the 7-day centered
// moving average, NaN where the full window does not fit. raw is >= 0
// after cumulative differencing and clamping.
struct IncidenceSeries {
    std::vector<std::string> dates; // ISO-8601, contiguous daily
    std::vector<double> raw;
    std::vector<double> smoothed;
    std::string region;
    double population = 0.0;   // persons; 0 when unknown
    int clamped_negatives = 0; // negative daily values set to 0 on load
    int filled_gaps = 0;       // missing dates inserted as zero on load

    std::size_t size() const { return raw.size(); }
};

enum class IncidenceFormat { daily, cumulative };

// Parse a CSV with header columns `date` (ISO-8601) and `cases`.
// Cumulative input is differenced to daily (the first row seeds the
// baseline). Negative daily values are clamped to 0 and counted; missing
// dates are filled with zeros and counted. Throws InvalidInputError with
// the offending row number on parse failures, and on an empty series.
IncidenceSeries load_incidence(const std::string& path, IncidenceFormat format);

// Centered moving average, window odd and >= 1. Entries where the full
// window does not fit are NaN. Linear and shift-equivariant.
std::vector<double> moving_average(const std::vector<double>& x, int window);

enum class LossSpace { linear, log };

// Per-parameter [lo, hi] boxes in the order gamma, alpha, K, u, I0, beta0.
using FitBounds = std::array<std::array<double, 2>, 6>;

// Brackets typical daily-resolution epidemic fits with wide margins.
FitBounds default_fit_bounds();

struct FitProblem {
    IncidenceSeries data;
    double S_tilde = 0.0;       // rescaled population, fixed (not fitted)
    int window_start = 0;       // inclusive day indices into data
    int window_end = 0;         // inclusive; window length must be >= 30
    FitBounds bounds = default_fit_bounds();
    LossSpace loss_space = LossSpace::linear;

    void validate() const; // throws InvalidInputError
};

struct FitOptions {
    int seeds = 16;            // random multi-starts, log-uniform in bounds
    std::uint64_t rng_seed = 20200311;
    int restarts = 2;          // simplex restarts per start, at best point
    long max_evals_per_start = 20000;
    // Optional explicit starts evaluated before the random ones.
    std::vector<FitParams> initial_guesses;
};

struct FitResult {
    FitParams params;   // gamma, alpha, K, u and init I0, beta0
    double loss = 0.0;  // residual sum of squares in the chosen loss space
    double rms_error = 0.0; // linear-space rms at params, cases/day
    long iterations = 0;    // total objective evaluations
    bool converged = false; // any start met the simplex-diameter criterion
    int restarts_used = 0;
};

// Daily outputs y(0..days) of the normalized model
//     I' = (S~ b - gamma) I,  b' = -alpha (b - K/(1 + u I)),
//     y = S~ b I
// via the adaptive integrator and sample_daily. Throws NumericalError
// (carrying how far it got) on divergence.
std::vector<double> simulate_fit_output(const FitParams& fp, double S_tilde,
                                        int days,
                                        const IntegratorConfig& cfg = {});

// Public loss path: sum over the window of squared residuals between the
// 7-day-smoothed model output and the 7-day-smoothed data, in
// problem.loss_space. Both sides receive the same smoothing so the
// estimator is unbiased for noiseless data. Diverging parameters receive
// a graded penalty (larger the earlier the blow-up) instead of throwing.
double fit_loss(const FitProblem& problem, const FitParams& fp);

// Linear-space rms (cases/day) of the same residuals.
double fit_rms(const FitProblem& problem, const FitParams& fp);

// Multi-start bounded simplex descent over log-parameters. Deterministic
// for a fixed FitOptions.rng_seed. Aborts with NumericalError if the
// sensitivity rank at the best-loss start is below 6 (unidentifiable
// configuration) or if every start diverges.
FitResult fit(const FitProblem& problem, const FitOptions& options = {});

} // namespace regsir
