#pragma once

#include "regsir/errors.hpp"

namespace regsir {

// Model constants in original (per-person) units. c_tilde = c / epsilon
// is always derived on demand so c_tilde * epsilon == c cannot drift.
struct EpidemicParams {
    double c;       // intrinsic infection rate, 1/(person * day)
    double gamma;   // removal rate, 1/day
    double alpha;   // contact-rate relaxation rate, 1/day
    double u;       // incidence perception gain, 1/person
    double epsilon; // population rescaling S~ = epsilon * S, dimensionless

    double c_tilde() const { return c / epsilon; }

    // Throws InvalidInputError unless every rate is finite and positive
    // and 0 < epsilon <= 1.
    void validate() const;
};

// Full system state (S, I, R, beta). R is integrated explicitly so the
// conservation law d(S+I+R)/dt = 0 can be checked numerically.
struct FullState {
    double S, I, R, beta;
};

// Fast-subsystem state. c_s = c * S is frozen on the fast timescale and
// is carried in the state so a fast trajectory is self-describing.
struct FastState {
    double I, beta, c_s;
};

// Log-transformed fast state, p = ln I. Same frozen c_s convention.
struct LogFastState {
    double p, beta, c_s;
};

// Parameter vector of the normalized output model fitted to incidence
// data: rates (gamma, alpha), saturating-law level K, perception gain u,
// and the initial state (I0, beta0). The rescaled population S_tilde is
// a known constant, not part of the vector.
struct FitParams {
    double gamma, alpha, K, u, I0, beta0;
};

} // namespace regsir
