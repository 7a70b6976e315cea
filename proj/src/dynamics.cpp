#include "regsir/dynamics.hpp"

#include <cmath>

namespace regsir {

void EpidemicParams::validate() const {
    const bool rates_ok = std::isfinite(c) && c > 0.0 && std::isfinite(gamma) &&
                          gamma > 0.0 && std::isfinite(alpha) && alpha > 0.0 &&
                          std::isfinite(u) && u > 0.0;
    if (!rates_ok) {
        throw InvalidInputError(
            "EpidemicParams: c, gamma, alpha, u must be finite and positive");
    }
    if (!(std::isfinite(epsilon) && epsilon > 0.0 && epsilon <= 1.0)) {
        throw InvalidInputError("EpidemicParams: epsilon must be in (0, 1]");
    }
}

FullState rhs_full(const FullState& x, const EpidemicParams& p,
                   const ContactRateLaw& law) {
    // Association ((c*S)*beta)*I makes the flux invariant bit for bit
    // under (S, c) -> (eps*S, c/eps) for power-of-two eps.
    const double flux = ((p.c * x.S) * x.beta) * x.I;
    const double removal = p.gamma * x.I;
    FullState d;
    d.S = -flux;
    d.I = flux - removal;
    d.R = removal;
    d.beta = -p.alpha * (law.g(x.beta) - law.h(p.u * x.I));
    return d;
}

FastState rhs_fast(const FastState& x, const EpidemicParams& p,
                   const ContactRateLaw& law) {
    FastState d;
    d.I = (x.c_s * x.beta - p.gamma) * x.I;
    d.beta = -p.alpha * (law.g(x.beta) - law.h(p.u * x.I));
    d.c_s = 0.0;
    return d;
}

LogFastState rhs_log_fast(const LogFastState& x, const EpidemicParams& p,
                          const ContactRateLaw& law) {
    LogFastState d;
    d.p = x.c_s * x.beta - p.gamma;
    d.beta = -p.alpha * (law.g(x.beta) - law.h(p.u * std::exp(x.p)));
    d.c_s = 0.0;
    return d;
}

double rhs_slow(double S_bar, const EpidemicParams& p,
                const ContactRateLaw& law) {
    if (!(S_bar > 0.0)) {
        return 0.0;
    }
    const double c_s = p.c_tilde() * S_bar;
    const A4Check a4 = check_a4(law, p.gamma, c_s);
    if (!a4.holds) {
        // Quasi-steady infectives sit on the boundary of image(h); the
        // slow drift stops.
        return 0.0;
    }
    const double hv = law.invert_h(law.g(p.gamma / c_s));
    return -(p.gamma / p.u) * hv;
}

double monod_s_star(const EpidemicParams& p, double K) {
    return p.gamma / (p.c_tilde() * K);
}

double monod_slow_susceptibles(double t, double s0_rescaled,
                               const EpidemicParams& p, double K) {
    const double s_star = monod_s_star(p, K);
    const double rate = p.c_tilde() * K * p.epsilon / p.u;
    return s_star + (s0_rescaled - s_star) * std::exp(-rate * t);
}

double monod_slow_infectives(double t, double s0_rescaled,
                             const EpidemicParams& p, double K) {
    const double s = monod_slow_susceptibles(t, s0_rescaled, p, K);
    return (p.c_tilde() * s * K / p.gamma - 1.0) / p.u;
}

double measured_output(double c_tilde, double s_tilde, double beta, double I) {
    return ((c_tilde * s_tilde) * beta) * I;
}

} // namespace regsir
