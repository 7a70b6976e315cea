#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "regsir/errors.hpp"

namespace regsir {

// Generic autonomous-or-not RHS: writes dy/dt for state y at time t.
// Dimension is fixed by the initial condition passed to integrate().
using Rhs = std::function<void(double t, const double* y, double* dydt)>;

enum class Method {
    rk4_fixed,      // classic RK4, uniform grid
    rk45_adaptive,  // embedded 5(4) pair, PI-free standard step control
};

struct IntegratorConfig {
    Method method = Method::rk45_adaptive;
    double dt = 0.1;     // fixed step; initial step when adaptive
    double rtol = 1e-8;  // relative tolerance (adaptive)
    double atol = 1e-10; // absolute tolerance (adaptive)
    long max_steps = 2000000;
    // Smallest admissible state value. Components dipping below the floor
    // by at most atol are clamped to it; larger violations reject the
    // step (adaptive halves; fixed-step treats it as divergence). Set to
    // -infinity for states with no positivity meaning (e.g. log
    // coordinates).
    double positivity_floor = 0.0;

    void validate() const; // throws InvalidInputError
};

// Dense solution record. times are strictly increasing; states and derivs
// are aligned with times (derivs holds the RHS at each sample, which is
// what cubic Hermite interpolation needs). For the adaptive method the
// nodes are the accepted steps; for the fixed method they are the uniform
// grid.
struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<std::vector<double>> derivs;
    std::string method;  // "rk4" | "rk45"
    double rtol = 0.0;
    double atol = 0.0;
    std::string rhs_id;  // caller-supplied label, for output metadata

    std::size_t dim() const { return states.empty() ? 0 : states.front().size(); }

    // Cubic Hermite interpolation between the bracketing nodes; exact at
    // nodes. t must lie within [times.front(), times.back()].
    std::vector<double> interpolate(double t) const;
    // Derivative of the same interpolant.
    std::vector<double> interpolate_derivative(double t) const;
};

// Integrate rhs from t0 to t1 (t1 > t0). Throws NumericalError on
// non-finite states, step-size underflow, or exceeding max_steps; the
// exception carries the last good time reached.
Trajectory integrate(const Rhs& rhs, const std::vector<double>& y0,
                     double t0, double t1, const IntegratorConfig& cfg,
                     const std::string& rhs_id = "");

// Resample a trajectory at integer days ceil(t0), ..., floor(t1) via the
// trajectory's own Hermite interpolant. Node-coincident days reproduce
// node states exactly.
Trajectory sample_daily(const Trajectory& traj);

} // namespace regsir
