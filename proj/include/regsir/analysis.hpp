#pragma once

#include <array>
#include <complex>
#include <optional>
#include <vector>

#include "regsir/contact_law.hpp"
#include "regsir/params.hpp"
#include "regsir/solver.hpp"

namespace regsir {

// Sampled verification of the structural hypotheses on (g, h):
//   a1: both maps finite on a log grid over [1e-8, 1e8] (continuity proxy;
//       the margin is the largest adjacent-sample relative jump),
//   a2: h strictly decreasing and positive (margin: smallest normalized
//       decrement),
//   a3: g strictly increasing and nonnegative (margin: smallest normalized
//       increment),
//   a4: g(gamma/c_s) strictly interior to image(h) (signed relative
//       clearance).
struct AssumptionReport {
    bool a1, a2, a3, a4;
    double a1_margin, a2_margin, a3_margin, a4_margin;
};

AssumptionReport check_assumptions(const ContactRateLaw& law,
                                   const EpidemicParams& p, double c_s);

enum class Stability { exp_stable, exp_unstable, marginal };

// A steady state of the fast subsystem at frozen c_s, with its two
// Jacobian eigenvalues. classification uses margin 1e-10 on real parts.
struct SteadyStateInfo {
    enum class Kind { disease_free, endemic };
    Kind kind;
    double I;
    double beta;
    std::array<std::complex<double>, 2> eigenvalues;
    Stability classification;
};

// (0, g_inverse(h(0))), present iff h(0) is attainable by g. Eigenvalues
// are analytic from the upper-triangular Jacobian:
// {c_s * beta_d - gamma, -alpha * g'(beta_d)}.
std::optional<SteadyStateInfo> disease_free_state(const ContactRateLaw& law,
                                                  const EpidemicParams& p,
                                                  double c_s);

// (h_inverse(g(gamma/c_s))/u, gamma/c_s), present iff A4 holds. Eigenvalues
// solve lambda^2 + alpha g'(beta_e) lambda - c_s I_e alpha u h'(u I_e) = 0.
std::optional<SteadyStateInfo> endemic_state(const ContactRateLaw& law,
                                             const EpidemicParams& p,
                                             double c_s);

// Basic reproduction number b * S0 / gamma.
double r0(double b, double S0, double gamma);

// Lyapunov certificate for the fast subsystem in (p = ln I, beta)
// coordinates, normalized so that along the flow
//     Vdot = (c_s beta - gamma) * (g(gamma/c_s) - g(beta)) <= 0:
//     V = int_{p_e}^{p} (h(u e^{p_e}) - h(u e^{q})) dq
//         + (c_s beta - gamma)^2 / (2 alpha c_s).
// The integral is closed-form for the saturating law and adaptive-Simpson
// quadrature (tol 1e-10) otherwise. Throws AssumptionError if A4 fails.
struct LyapunovSample {
    double p, beta;
    double V, Vdot;
};

LyapunovSample lyapunov(double p, double beta, const ContactRateLaw& law,
                        const EpidemicParams& p_model, double c_s);

// Step experiment: start at the endemic point for u_before, switch the
// perception gain to u_after at t = 0, integrate the fast subsystem to
// `horizon` days. settle_time is the first time after which
// |beta - gamma/c_s| stays within the 1% band (NaN if it never settles).
struct AdaptationResult {
    Trajectory traj;            // fast trajectory (I, beta, c_s) at u_after
    bool endemic_after_exists;  // A4 under u_after
    double sup_beta_deviation;  // sup_t |beta(t) - gamma/c_s|
    double settle_time;
    double terminal_beta_error; // |beta(T) - gamma/c_s|
    double terminal_I;
    double I_e_after;           // endemic infectives under u_after (NaN if absent)
};

AdaptationResult adaptation_experiment(const EpidemicParams& p,
                                       const ContactRateLaw& law, double c_s,
                                       double u_before, double u_after,
                                       double horizon,
                                       const IntegratorConfig& cfg = {});

// Fold-change experiment: for each base gain u_bar, start at its endemic
// point and apply the fold u -> q * u_bar at t = 0. Reports the sup-norm
// difference of the two beta trajectories and of the scaled infectives
// u_bar_1 * I_1 vs u_bar_2 * I_2 (both are invariants of the fold).
struct FcdResult {
    double sup_beta_diff;
    double sup_scaled_I_diff;
};

FcdResult fcd_experiment(const EpidemicParams& p, const ContactRateLaw& law,
                         double c_s, double q, double u_bar_1, double u_bar_2,
                         double horizon, const IntegratorConfig& cfg = {});

// Gain placing the endemic infectives at I_star: u = h_inverse(g(gamma/c_s))
// / I_star. Throws AssumptionError if A4 fails (the level is unreachable).
double assign_u(double I_star, const ContactRateLaw& law,
                const EpidemicParams& p, double c_s);

// Reduced-vs-full comparison at several rescaling magnitudes. c_tilde is
// held at p.c_tilde(); each sweep point rebuilds c = c_tilde * eps, starts
// the full model on the quasi-steady manifold at rescaled susceptibles
// S0_rescaled, and integrates both systems over the slow window
// tau in [0, T_slow] (t in [0, T_slow/eps] days). Reported errors are sup
// absolute deviations at the accepted full-model steps outside an initial
// boundary layer of width 5/min(alpha, gamma) days, with S compared in
// rescaled units (eps * S vs S_bar).
struct TikhonovPoint {
    double epsilon;
    double err_S, err_I, err_beta;
};

std::vector<TikhonovPoint> tikhonov_sweep(const EpidemicParams& p,
                                          const ContactRateLaw& law,
                                          double S0_rescaled,
                                          const std::vector<double>& epsilons,
                                          double T_slow,
                                          const IntegratorConfig& cfg = {});

// Numerical local identifiability of the normalized output model: the
// sensitivity matrix of daily outputs w.r.t. (gamma, alpha, K, u, I0,
// beta0), columns scaled by the parameter values, central differences with
// relative step 1e-6, simulated on a fixed RK4 grid so the output is
// smooth in the parameters. rank counts singular values above
// 1e-8 * sigma_max. augment_c_tilde appends an unscaled c_tilde column.
struct IdentifiabilityResult {
    int rank;
    std::vector<double> singular_values;
};

IdentifiabilityResult identifiability_rank(const FitParams& fp, double S_tilde,
                                           int horizon_days,
                                           bool augment_c_tilde = false);

} // namespace regsir
