#include "regsir/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace regsir {

namespace {

// Dormand-Prince 5(4) tableau. E* are (5th - 4th)-order weight gaps used
// for the embedded error estimate.
constexpr double kC2 = 1.0 / 5.0, kC3 = 3.0 / 10.0, kC4 = 4.0 / 5.0,
                 kC5 = 8.0 / 9.0;
constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0,
                 kA53 = 64448.0 / 6561.0, kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0,
                 kA63 = 46732.0 / 5247.0, kA64 = 49.0 / 176.0,
                 kA65 = -5103.0 / 18656.0;
constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                 kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
constexpr double kE1 = kB1 - 5179.0 / 57600.0;
constexpr double kE3 = kB3 - 7571.0 / 16695.0;
constexpr double kE4 = kB4 - 393.0 / 640.0;
constexpr double kE5 = kB5 + 92097.0 / 339200.0;
constexpr double kE6 = kB6 - 187.0 / 2100.0;
constexpr double kE7 = -1.0 / 40.0;

bool all_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

void check_rhs_finite(const std::vector<double>& dydt, double t) {
    if (!all_finite(dydt)) {
        throw NumericalError("integrate: rhs produced a non-finite value", t);
    }
}

// RMS of the componentwise error scaled by atol + rtol * max(|y|, |ynew|).
double error_norm(const std::vector<double>& err, const std::vector<double>& y,
                  const std::vector<double>& ynew, double rtol, double atol) {
    double acc = 0.0;
    for (std::size_t i = 0; i < err.size(); ++i) {
        const double sc =
            atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        const double r = err[i] / sc;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(err.size()));
}

enum class FloorOutcome { ok, clamped, reject };

// Positivity handling: dips below the floor by at most atol are clamped;
// larger dips reject the step.
FloorOutcome apply_floor(std::vector<double>& y, double floor, double atol) {
    FloorOutcome out = FloorOutcome::ok;
    for (double& x : y) {
        if (x < floor) {
            if (floor - x <= atol) {
                x = floor;
                out = FloorOutcome::clamped;
            } else {
                return FloorOutcome::reject;
            }
        }
    }
    return out;
}

void push_node(Trajectory& tr, double t, const std::vector<double>& y,
               const std::vector<double>& dydt) {
    tr.times.push_back(t);
    tr.states.push_back(y);
    tr.derivs.push_back(dydt);
}

Trajectory integrate_rk4(const Rhs& rhs, const std::vector<double>& y0,
                         double t0, double t1, const IntegratorConfig& cfg,
                         const std::string& rhs_id) {
    const double span = t1 - t0;
    const long n = std::max(1L, static_cast<long>(std::ceil(span / cfg.dt - 1e-9)));
    if (n > cfg.max_steps) {
        throw NumericalError("integrate: fixed grid exceeds max_steps", t0);
    }
    const double h = span / static_cast<double>(n);
    const std::size_t dim = y0.size();
    std::vector<double> y = y0, k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim),
                        ynew(dim);

    Trajectory tr;
    tr.method = "rk4";
    tr.rtol = cfg.rtol;
    tr.atol = cfg.atol;
    tr.rhs_id = rhs_id;
    rhs(t0, y.data(), k1.data());
    check_rhs_finite(k1, t0);
    push_node(tr, t0, y, k1);

    for (long step = 0; step < n; ++step) {
        const double t = t0 + h * static_cast<double>(step);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        rhs(t + 0.5 * h, tmp.data(), k2.data());
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        rhs(t + 0.5 * h, tmp.data(), k3.data());
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + h * k3[i];
        rhs(t + h, tmp.data(), k4.data());
        for (std::size_t i = 0; i < dim; ++i) {
            ynew[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if (!all_finite(ynew)) {
            throw NumericalError("integrate: state diverged (rk4)", t);
        }
        if (apply_floor(ynew, cfg.positivity_floor, cfg.atol) ==
            FloorOutcome::reject) {
            throw NumericalError(
                "integrate: positivity violation beyond atol on fixed grid", t);
        }
        const double tnew = (step + 1 == n) ? t1 : t0 + h * static_cast<double>(step + 1);
        y = ynew;
        rhs(tnew, y.data(), k1.data());
        check_rhs_finite(k1, tnew);
        push_node(tr, tnew, y, k1);
    }
    return tr;
}

Trajectory integrate_rk45(const Rhs& rhs, const std::vector<double>& y0,
                          double t0, double t1, const IntegratorConfig& cfg,
                          const std::string& rhs_id) {
    const std::size_t dim = y0.size();
    std::vector<double> y = y0, k1(dim), k2(dim), k3(dim), k4(dim), k5(dim),
                        k6(dim), k7(dim), tmp(dim), ynew(dim), yerr(dim);

    Trajectory tr;
    tr.method = "rk45";
    tr.rtol = cfg.rtol;
    tr.atol = cfg.atol;
    tr.rhs_id = rhs_id;
    rhs(t0, y.data(), k1.data());
    check_rhs_finite(k1, t0);
    push_node(tr, t0, y, k1);

    double t = t0;
    double h = std::min(cfg.dt, t1 - t0);
    for (long attempts = 0;; ++attempts) {
        if (t >= t1) break;
        if (attempts >= cfg.max_steps) {
            throw NumericalError("integrate: max_steps exceeded", t);
        }
        if (h < 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0)) {
            throw NumericalError("integrate: step size underflow", t);
        }
        h = std::min(h, t1 - t);

        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + h * kA21 * k1[i];
        rhs(t + kC2 * h, tmp.data(), k2.data());
        for (std::size_t i = 0; i < dim; ++i)
            tmp[i] = y[i] + h * (kA31 * k1[i] + kA32 * k2[i]);
        rhs(t + kC3 * h, tmp.data(), k3.data());
        for (std::size_t i = 0; i < dim; ++i)
            tmp[i] = y[i] + h * (kA41 * k1[i] + kA42 * k2[i] + kA43 * k3[i]);
        rhs(t + kC4 * h, tmp.data(), k4.data());
        for (std::size_t i = 0; i < dim; ++i)
            tmp[i] = y[i] + h * (kA51 * k1[i] + kA52 * k2[i] + kA53 * k3[i] +
                                 kA54 * k4[i]);
        rhs(t + kC5 * h, tmp.data(), k5.data());
        for (std::size_t i = 0; i < dim; ++i)
            tmp[i] = y[i] + h * (kA61 * k1[i] + kA62 * k2[i] + kA63 * k3[i] +
                                 kA64 * k4[i] + kA65 * k5[i]);
        rhs(t + h, tmp.data(), k6.data());
        for (std::size_t i = 0; i < dim; ++i)
            ynew[i] = y[i] + h * (kB1 * k1[i] + kB3 * k3[i] + kB4 * k4[i] +
                                  kB5 * k5[i] + kB6 * k6[i]);
        rhs(t + h, ynew.data(), k7.data()); // FSAL stage
        for (std::size_t i = 0; i < dim; ++i)
            yerr[i] = h * (kE1 * k1[i] + kE3 * k3[i] + kE4 * k4[i] +
                           kE5 * k5[i] + kE6 * k6[i] + kE7 * k7[i]);

        double err = std::numeric_limits<double>::infinity();
        if (all_finite(ynew) && all_finite(k7) && all_finite(yerr)) {
            err = error_norm(yerr, y, ynew, cfg.rtol, cfg.atol);
        }
        if (!std::isfinite(err)) {
            h *= 0.2;
            continue;
        }
        if (err <= 1.0) {
            const FloorOutcome fo =
                apply_floor(ynew, cfg.positivity_floor, cfg.atol);
            if (fo == FloorOutcome::reject) {
                h *= 0.5;
                continue;
            }
            t = (t + h >= t1) ? t1 : t + h;
            y = ynew;
            if (fo == FloorOutcome::clamped) {
                rhs(t, y.data(), k7.data()); // FSAL invalidated by clamping
                check_rhs_finite(k7, t);
            }
            k1 = k7;
            push_node(tr, t, y, k1);
        }
        const double shrink_grow =
            std::clamp(0.9 * std::pow(std::max(err, 1e-300), -0.2), 0.2, 5.0);
        h *= shrink_grow;
    }
    return tr;
}

} // namespace

void IntegratorConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidInputError("IntegratorConfig: dt must be positive");
    }
    if (!(rtol > 0.0) || !(atol > 0.0)) {
        throw InvalidInputError("IntegratorConfig: tolerances must be positive");
    }
    if (max_steps <= 0) {
        throw InvalidInputError("IntegratorConfig: max_steps must be positive");
    }
}

Trajectory integrate(const Rhs& rhs, const std::vector<double>& y0, double t0,
                     double t1, const IntegratorConfig& cfg,
                     const std::string& rhs_id) {
    cfg.validate();
    if (y0.empty()) {
        throw InvalidInputError("integrate: empty initial state");
    }
    if (!all_finite(y0)) {
        throw InvalidInputError("integrate: non-finite initial state");
    }
    if (!(t1 > t0)) {
        throw InvalidInputError("integrate: need t1 > t0");
    }
    if (cfg.method == Method::rk4_fixed) {
        return integrate_rk4(rhs, y0, t0, t1, cfg, rhs_id);
    }
    return integrate_rk45(rhs, y0, t0, t1, cfg, rhs_id);
}

namespace {

// Bracket index k with times[k] <= t <= times[k+1]; exact hits on the
// right node evaluate with s = 1, which reproduces the node bit for bit.
std::size_t bracket(const std::vector<double>& times, double t) {
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t k = static_cast<std::size_t>(it - times.begin());
    if (k == 0) return 0;
    if (k >= times.size()) return times.size() - 2;
    return k - 1;
}

} // namespace

std::vector<double> Trajectory::interpolate(double t) const {
    if (times.size() < 1) {
        throw InvalidInputError("Trajectory::interpolate: empty trajectory");
    }
    const double slack =
        1e-12 * std::max(1.0, std::abs(times.back()) + std::abs(times.front()));
    if (t < times.front() - slack || t > times.back() + slack) {
        throw InvalidInputError("Trajectory::interpolate: t outside range");
    }
    t = std::clamp(t, times.front(), times.back());
    if (times.size() == 1) return states.front();

    const std::size_t k = bracket(times, t);
    const double hstep = times[k + 1] - times[k];
    const double s = (t - times[k]) / hstep;
    const double s2 = s * s;
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s2 * (3.0 - 2.0 * s);
    const double h11 = s2 * (s - 1.0);
    std::vector<double> out(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        out[i] = h00 * states[k][i] + hstep * h10 * derivs[k][i] +
                 h01 * states[k + 1][i] + hstep * h11 * derivs[k + 1][i];
    }
    return out;
}

std::vector<double> Trajectory::interpolate_derivative(double t) const {
    if (times.size() < 2) {
        throw InvalidInputError(
            "Trajectory::interpolate_derivative: need two nodes");
    }
    const double slack =
        1e-12 * std::max(1.0, std::abs(times.back()) + std::abs(times.front()));
    if (t < times.front() - slack || t > times.back() + slack) {
        throw InvalidInputError(
            "Trajectory::interpolate_derivative: t outside range");
    }
    t = std::clamp(t, times.front(), times.back());
    const std::size_t k = bracket(times, t);
    const double hstep = times[k + 1] - times[k];
    const double s = (t - times[k]) / hstep;
    const double d00 = (6.0 * s * s - 6.0 * s) / hstep;
    const double d10 = 3.0 * s * s - 4.0 * s + 1.0;
    const double d01 = -d00;
    const double d11 = 3.0 * s * s - 2.0 * s;
    std::vector<double> out(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        out[i] = d00 * states[k][i] + d10 * derivs[k][i] +
                 d01 * states[k + 1][i] + d11 * derivs[k + 1][i];
    }
    return out;
}

Trajectory sample_daily(const Trajectory& traj) {
    if (traj.times.empty()) {
        throw InvalidInputError("sample_daily: empty trajectory");
    }
    const double t0 = traj.times.front();
    const double t1 = traj.times.back();
    const long d0 = static_cast<long>(std::ceil(t0 - 1e-12));
    const long d1 = static_cast<long>(std::floor(t1 + 1e-12));
    if (d1 < d0) {
        throw InvalidInputError("sample_daily: no integer day in range");
    }
    Trajectory out;
    out.method = traj.method;
    out.rtol = traj.rtol;
    out.atol = traj.atol;
    out.rhs_id = traj.rhs_id;
    for (long d = d0; d <= d1; ++d) {
        const double t = static_cast<double>(d);
        out.times.push_back(t);
        out.states.push_back(traj.interpolate(t));
        if (traj.times.size() >= 2) {
            out.derivs.push_back(traj.interpolate_derivative(t));
        } else {
            out.derivs.push_back(traj.derivs.front());
        }
    }
    return out;
}

} // namespace regsir
