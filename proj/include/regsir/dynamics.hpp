#pragma once

#include "regsir/contact_law.hpp"
#include "regsir/params.hpp"

namespace regsir {

// Right-hand side of the full system
//     S' = -c beta S I,  I' = c beta S I - gamma I,  R' = gamma I,
//     beta' = -alpha (g(beta) - h(u I)).
// The infection flux is evaluated as ((c * S) * beta) * I in exactly this
// association, so rescaling (S, c) -> (eps*S, c/eps) with eps a power of
// two reproduces S', I', R' bit for bit.
FullState rhs_full(const FullState& x, const EpidemicParams& p,
                   const ContactRateLaw& law);

// Fast subsystem at frozen c_s = c * S:
//     I' = (c_s beta - gamma) I,  beta' = -alpha (g(beta) - h(u I)).
// The c_s slot of the returned derivative is 0.
FastState rhs_fast(const FastState& x, const EpidemicParams& p,
                   const ContactRateLaw& law);

// Fast subsystem in p = ln I coordinates:
//     p' = c_s beta - gamma,  beta' = -alpha (g(beta) - h(u e^p)).
// Well defined for all real p; use for trajectories spanning many decades
// of I.
LogFastState rhs_log_fast(const LogFastState& x, const EpidemicParams& p,
                          const ContactRateLaw& law);

// Reduced slow flow for rescaled susceptibles S_bar on slow time tau:
//     dS_bar/dtau = -(gamma/u) * h_inverse(g(gamma / (c_tilde * S_bar)))
// when A4 holds at S_bar, and 0 otherwise (the slow flow freezes once the
// quasi-steady infectives level hits the boundary of the feedback image).
double rhs_slow(double S_bar, const EpidemicParams& p,
                const ContactRateLaw& law);

// Closed-form solutions of the reduced slow flow for the saturating law
// h(x) = K/(1+x), g = id, where the flow is affine:
//     S~(t) = S_star + (S~(0) - S_star) * exp(-c_tilde K eps t / u),
//     S_star = gamma / (c_tilde K).
// Times are in original days (tau = eps * t).
double monod_slow_susceptibles(double t, double s0_rescaled,
                               const EpidemicParams& p, double K);

// Quasi-steady infectives consistent with the closed-form S~(t):
//     I(t) = (c_tilde S~(t) K / gamma - 1) / u,
// i.e. the endemic level of the frozen fast subsystem at c_s = c_tilde S~.
double monod_slow_infectives(double t, double s0_rescaled,
                             const EpidemicParams& p, double K);

// S_star = gamma / (c_tilde K): the rescaled susceptible level at which
// the quasi-steady infectives hit zero and the slow flow stops.
double monod_s_star(const EpidemicParams& p, double K);

// Daily measured output (incidence inflow) y = c_s * beta * I, with
// c_s = c_tilde * S_tilde.
double measured_output(double c_tilde, double s_tilde, double beta, double I);

} // namespace regsir
