#include "regsir/analysis.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

#include "regsir/dynamics.hpp"

namespace regsir {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

Stability classify(const std::array<std::complex<double>, 2>& eig) {
    constexpr double margin = 1e-10;
    bool any_pos = false, all_neg = true;
    for (const auto& l : eig) {
        if (l.real() > margin) any_pos = true;
        if (!(l.real() < -margin)) all_neg = false;
    }
    if (any_pos) return Stability::exp_unstable;
    if (all_neg) return Stability::exp_stable;
    return Stability::marginal;
}

Rhs make_fast_rhs(const EpidemicParams& p, const ContactRateLaw& law) {
    return [p, law](double, const double* y, double* d) {
        const FastState x{y[0], y[1], y[2]};
        const FastState dx = rhs_fast(x, p, law);
        d[0] = dx.I;
        d[1] = dx.beta;
        d[2] = dx.c_s;
    };
}

// Adaptive Simpson with absolute tolerance, recursion depth capped.
double simpson_rec(const ScalarFn& f, double a, double fa, double b, double fb,
                   double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const ScalarFn& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b);
    const double m = 0.5 * (a + b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, 50);
}

// Numerically stable ln(1 + u * e^p) = softplus(ln u + p).
double log1p_u_exp(double u, double p) {
    const double z = std::log(u) + p;
    if (z > 36.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

} // namespace

AssumptionReport check_assumptions(const ContactRateLaw& law,
                                   const EpidemicParams& p, double c_s) {
    if (!(c_s > 0.0)) {
        throw InvalidInputError("check_assumptions: c_s must be positive");
    }
    // Log grid over [1e-8, 1e8], 10 points per decade.
    constexpr int kPerDecade = 10;
    constexpr int kDecades = 16;
    constexpr int n = kPerDecade * kDecades + 1;
    std::vector<double> gs(n), hs(n);
    for (int i = 0; i < n; ++i) {
        const double x =
            std::pow(10.0, -8.0 + static_cast<double>(i) / kPerDecade);
        gs[i] = law.g(x);
        hs[i] = law.h(x);
    }

    AssumptionReport r{};
    r.a1 = true;
    r.a1_margin = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(gs[i]) || !std::isfinite(hs[i])) r.a1 = false;
    }
    for (int i = 0; i + 1 < n; ++i) {
        const double jg = std::abs(gs[i + 1] - gs[i]) /
                          (std::abs(gs[i]) + std::abs(gs[i + 1]) + 1e-300);
        const double jh = std::abs(hs[i + 1] - hs[i]) /
                          (std::abs(hs[i]) + std::abs(hs[i + 1]) + 1e-300);
        r.a1_margin = std::max({r.a1_margin, jg, jh});
    }

    r.a2 = true;
    r.a2_margin = kInf;
    for (int i = 0; i < n; ++i) {
        if (!(hs[i] > 0.0)) r.a2 = false;
    }
    for (int i = 0; i + 1 < n; ++i) {
        const double dec = (hs[i] - hs[i + 1]) / std::max(std::abs(hs[i]), 1e-300);
        if (!(dec > 0.0)) r.a2 = false;
        r.a2_margin = std::min(r.a2_margin, dec);
    }

    r.a3 = true;
    r.a3_margin = kInf;
    for (int i = 0; i < n; ++i) {
        if (gs[i] < 0.0) r.a3 = false;
    }
    for (int i = 0; i + 1 < n; ++i) {
        const double inc = (gs[i + 1] - gs[i]) /
                           std::max({std::abs(gs[i]), std::abs(gs[i + 1]), 1e-300});
        if (!(inc > 0.0)) r.a3 = false;
        r.a3_margin = std::min(r.a3_margin, inc);
    }

    const A4Check a4 = check_a4(law, p.gamma, c_s);
    r.a4 = a4.holds;
    r.a4_margin = a4.margin;
    return r;
}

std::optional<SteadyStateInfo> disease_free_state(const ContactRateLaw& law,
                                                  const EpidemicParams& p,
                                                  double c_s) {
    double beta_d;
    try {
        beta_d = law.invert_g(law.h(0.0));
    } catch (const AssumptionError&) {
        return std::nullopt; // h(0) not attainable by g
    }
    SteadyStateInfo info;
    info.kind = SteadyStateInfo::Kind::disease_free;
    info.I = 0.0;
    info.beta = beta_d;
    // Jacobian is upper triangular at I = 0: eigenvalues on the diagonal.
    info.eigenvalues = {std::complex<double>(c_s * beta_d - p.gamma, 0.0),
                        std::complex<double>(-p.alpha * law.eval_dg(beta_d), 0.0)};
    info.classification = classify(info.eigenvalues);
    return info;
}

std::optional<SteadyStateInfo> endemic_state(const ContactRateLaw& law,
                                             const EpidemicParams& p,
                                             double c_s) {
    const A4Check a4 = check_a4(law, p.gamma, c_s);
    if (!a4.holds) return std::nullopt;
    const double beta_e = p.gamma / c_s;
    const double uIe = law.invert_h(law.g(beta_e));
    const double I_e = uIe / p.u;

    // lambda^2 + b lambda + c = 0 with b = alpha g'(beta_e),
    // c = -c_s I_e alpha u h'(u I_e) > 0 since h decreases.
    const double b = p.alpha * law.eval_dg(beta_e);
    const double c = -c_s * I_e * p.alpha * p.u * law.eval_dh(uIe);
    const double disc = b * b - 4.0 * c;
    std::array<std::complex<double>, 2> eig;
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        eig = {std::complex<double>(0.5 * (-b + root), 0.0),
               std::complex<double>(0.5 * (-b - root), 0.0)};
    } else {
        const double im = 0.5 * std::sqrt(-disc);
        eig = {std::complex<double>(-0.5 * b, im),
               std::complex<double>(-0.5 * b, -im)};
    }

    SteadyStateInfo info;
    info.kind = SteadyStateInfo::Kind::endemic;
    info.I = I_e;
    info.beta = beta_e;
    info.eigenvalues = eig;
    info.classification = classify(eig);
    return info;
}

double r0(double b, double S0, double gamma) {
    if (!(b > 0.0) || !(S0 > 0.0) || !(gamma > 0.0)) {
        throw InvalidInputError("r0: inputs must be positive");
    }
    return b * S0 / gamma;
}

LyapunovSample lyapunov(double p, double beta, const ContactRateLaw& law,
                        const EpidemicParams& p_model, double c_s) {
    const A4Check a4 = check_a4(law, p_model.gamma, c_s);
    if (!a4.holds) {
        throw AssumptionError("lyapunov: A4 fails, endemic state absent");
    }
    const double u = p_model.u;
    const double beta_e = p_model.gamma / c_s;
    const double uIe = law.invert_h(law.g(beta_e));
    const double p_e = std::log(uIe / u);
    const double h_pe = law.h(uIe);

    double integral;
    if (law.descriptor == "monod") {
        // h(u e^q) = K/(1 + u e^q); antiderivative of h(u e^q) in q is
        // K (q - ln(1 + u e^q)).
        const double K = law.h(0.0);
        const double at_p = p - log1p_u_exp(u, p);
        const double at_pe = p_e - log1p_u_exp(u, p_e);
        integral = h_pe * (p - p_e) - K * (at_p - at_pe);
    } else {
        const ScalarFn f = [&](double q) { return h_pe - law.h(u * std::exp(q)); };
        integral = adaptive_simpson(f, p_e, p, 1e-10);
    }

    // The quadratic term carries 1/(alpha c_s) so that along the fast flow
    //   Vdot = (c_s beta - gamma) (g(gamma/c_s) - g(beta)) <= 0
    // holds exactly: d/dt of the term is (c_s beta - gamma) beta' / alpha,
    // and beta' = -alpha (g(beta) - g(gamma/c_s)) at quasi-steady h-level.
    const double resid = c_s * beta - p_model.gamma;
    const double quad = resid * resid / (2.0 * p_model.alpha * c_s);

    LyapunovSample s;
    s.p = p;
    s.beta = beta;
    s.V = integral + quad;
    s.Vdot = resid * (law.g(beta_e) - law.g(beta));
    return s;
}

AdaptationResult adaptation_experiment(const EpidemicParams& p,
                                       const ContactRateLaw& law, double c_s,
                                       double u_before, double u_after,
                                       double horizon,
                                       const IntegratorConfig& cfg) {
    if (!(u_before > 0.0) || !(u_after > 0.0) || !(horizon > 0.0)) {
        throw InvalidInputError(
            "adaptation_experiment: gains and horizon must be positive");
    }
    const A4Check a4 = check_a4(law, p.gamma, c_s);
    if (!a4.holds) {
        throw AssumptionError("adaptation_experiment: A4 fails before the step");
    }
    const double beta_e = p.gamma / c_s;
    const double uIe = law.invert_h(law.g(beta_e));

    EpidemicParams p_after = p;
    p_after.u = u_after;
    const std::vector<double> x0 = {uIe / u_before, beta_e, c_s};
    Trajectory tr = integrate(make_fast_rhs(p_after, law), x0, 0.0, horizon,
                              cfg, "fast");

    AdaptationResult out;
    out.endemic_after_exists = a4.holds; // A4 does not involve u
    out.I_e_after = uIe / u_after;
    out.sup_beta_deviation = 0.0;
    const double band = 0.01 * beta_e;
    std::size_t last_outside = tr.times.size(); // sentinel: never outside
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const double dev = std::abs(tr.states[i][1] - beta_e);
        out.sup_beta_deviation = std::max(out.sup_beta_deviation, dev);
        if (dev > band) last_outside = i;
    }
    if (last_outside == tr.times.size()) {
        out.settle_time = 0.0; // never left the band
    } else if (last_outside + 1 < tr.times.size()) {
        out.settle_time = tr.times[last_outside + 1];
    } else {
        out.settle_time = kNaN; // still outside at the horizon
    }
    out.terminal_beta_error = std::abs(tr.states.back()[1] - beta_e);
    out.terminal_I = tr.states.back()[0];
    out.traj = std::move(tr);
    return out;
}

FcdResult fcd_experiment(const EpidemicParams& p, const ContactRateLaw& law,
                         double c_s, double q, double u_bar_1, double u_bar_2,
                         double horizon, const IntegratorConfig& cfg) {
    if (!(q > 0.0) || !(u_bar_1 > 0.0) || !(u_bar_2 > 0.0) ||
        !(horizon > 0.0)) {
        throw InvalidInputError("fcd_experiment: inputs must be positive");
    }
    const A4Check a4 = check_a4(law, p.gamma, c_s);
    if (!a4.holds) {
        throw AssumptionError("fcd_experiment: A4 fails");
    }
    const double beta_e = p.gamma / c_s;
    const double uIe = law.invert_h(law.g(beta_e));

    auto run = [&](double u_bar) {
        EpidemicParams pq = p;
        pq.u = q * u_bar;
        const std::vector<double> x0 = {uIe / u_bar, beta_e, c_s};
        return sample_daily(
            integrate(make_fast_rhs(pq, law), x0, 0.0, horizon, cfg, "fast"));
    };
    const Trajectory t1 = run(u_bar_1);
    const Trajectory t2 = run(u_bar_2);

    FcdResult out{0.0, 0.0};
    for (std::size_t i = 0; i < t1.times.size(); ++i) {
        out.sup_beta_diff = std::max(
            out.sup_beta_diff, std::abs(t1.states[i][1] - t2.states[i][1]));
        out.sup_scaled_I_diff =
            std::max(out.sup_scaled_I_diff,
                     std::abs(u_bar_1 * t1.states[i][0] -
                              u_bar_2 * t2.states[i][0]));
    }
    return out;
}

double assign_u(double I_star, const ContactRateLaw& law,
                const EpidemicParams& p, double c_s) {
    if (!(I_star > 0.0)) {
        throw InvalidInputError("assign_u: I_star must be positive");
    }
    const A4Check a4 = check_a4(law, p.gamma, c_s);
    if (!a4.holds) {
        throw AssumptionError("assign_u: A4 fails, level unreachable");
    }
    return law.invert_h(law.g(p.gamma / c_s)) / I_star;
}

std::vector<TikhonovPoint> tikhonov_sweep(const EpidemicParams& p,
                                          const ContactRateLaw& law,
                                          double S0_rescaled,
                                          const std::vector<double>& epsilons,
                                          double T_slow,
                                          const IntegratorConfig& cfg) {
    if (!(S0_rescaled > 0.0) || !(T_slow > 0.0)) {
        throw InvalidInputError("tikhonov_sweep: S0 and T_slow must be positive");
    }
    const double c_tilde = p.c_tilde();

    // Reduced slow solution, shared across sweep points.
    IntegratorConfig slow_cfg;
    slow_cfg.rtol = 1e-11;
    slow_cfg.atol = 1e-14;
    slow_cfg.dt = T_slow / 1000.0;
    const Rhs slow = [&p, &law](double, const double* y, double* d) {
        d[0] = rhs_slow(y[0], p, law);
    };
    const Trajectory red =
        integrate(slow, {S0_rescaled}, 0.0, T_slow, slow_cfg, "slow");

    auto qss = [&](double s_bar) {
        const double cs = c_tilde * s_bar;
        const A4Check a4 = check_a4(law, p.gamma, cs);
        if (!a4.holds) {
            throw AssumptionError(
                "tikhonov_sweep: A4 fails along the slow solution");
        }
        const double beta = p.gamma / cs;
        const double I = law.invert_h(law.g(beta)) / p.u;
        return std::pair<double, double>(I, beta);
    };
    qss(S0_rescaled);
    qss(red.states.back()[0]);

    const double t_layer = 5.0 / std::min(p.alpha, p.gamma);
    std::vector<TikhonovPoint> out;
    for (const double eps : epsilons) {
        if (!(eps > 0.0 && eps < 1.0)) {
            throw InvalidInputError("tikhonov_sweep: epsilon must be in (0, 1)");
        }
        EpidemicParams pe = p;
        pe.epsilon = eps;
        pe.c = c_tilde * eps;

        const auto [I0, b0] = qss(S0_rescaled);
        const std::vector<double> x0 = {S0_rescaled / eps, I0, 0.0, b0};
        const Rhs full = [&pe, &law](double, const double* y, double* d) {
            const FullState x{y[0], y[1], y[2], y[3]};
            const FullState dx = rhs_full(x, pe, law);
            d[0] = dx.S;
            d[1] = dx.I;
            d[2] = dx.R;
            d[3] = dx.beta;
        };
        const Trajectory tr =
            integrate(full, x0, 0.0, T_slow / eps, cfg, "full");

        TikhonovPoint pt{eps, 0.0, 0.0, 0.0};
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            const double t = tr.times[i];
            if (t < t_layer) continue;
            const double tau = eps * t;
            const double s_bar =
                red.interpolate(std::min(tau, T_slow))[0];
            const auto [Iq, bq] = qss(s_bar);
            pt.err_S = std::max(pt.err_S, std::abs(eps * tr.states[i][0] - s_bar));
            pt.err_I = std::max(pt.err_I, std::abs(tr.states[i][1] - Iq));
            pt.err_beta = std::max(pt.err_beta, std::abs(tr.states[i][3] - bq));
        }
        out.push_back(pt);
    }
    return out;
}

namespace {

// Daily outputs of the normalized model at parameter vector theta =
// (gamma, alpha, K, u, I0, beta0 [, c_tilde]) on a fixed RK4 grid, so the
// map theta -> y is smooth enough for finite differences.
std::vector<double> identifiability_outputs(const std::vector<double>& theta,
                                            double S_tilde, int horizon_days) {
    const double gamma = theta[0], alpha = theta[1], K = theta[2],
                 u = theta[3], I0 = theta[4], beta0 = theta[5];
    const double c_tilde = theta.size() > 6 ? theta[6] : 1.0;
    const ContactRateLaw law = make_monod(K);
    EpidemicParams p{};
    p.c = c_tilde;
    p.gamma = gamma;
    p.alpha = alpha;
    p.u = u;
    p.epsilon = 1.0;
    const double c_s = c_tilde * S_tilde;

    IntegratorConfig cfg;
    cfg.method = Method::rk4_fixed;
    cfg.dt = 0.25;
    const Trajectory tr = sample_daily(integrate(
        make_fast_rhs(p, law), {I0, beta0, c_s},
        0.0, std::max(1, horizon_days), cfg, "fast"));

    std::vector<double> y;
    y.reserve(static_cast<std::size_t>(horizon_days) + 1);
    for (std::size_t i = 0;
         i < tr.times.size() && tr.times[i] <= horizon_days + 0.5; ++i) {
        y.push_back(measured_output(c_tilde, S_tilde, tr.states[i][1],
                                    tr.states[i][0]));
    }
    return y;
}

} // namespace

IdentifiabilityResult identifiability_rank(const FitParams& fp, double S_tilde,
                                           int horizon_days,
                                           bool augment_c_tilde) {
    if (!(fp.gamma > 0.0) || !(fp.alpha > 0.0) || !(fp.K > 0.0) ||
        !(fp.u > 0.0) || !(fp.I0 > 0.0) || !(fp.beta0 > 0.0) ||
        !(S_tilde > 0.0) || horizon_days < 0) {
        throw InvalidInputError("identifiability_rank: inputs must be positive");
    }
    std::vector<double> theta = {fp.gamma, fp.alpha, fp.K,
                                 fp.u,     fp.I0,    fp.beta0};
    if (augment_c_tilde) theta.push_back(1.0);

    const int rows = horizon_days + 1;
    const int cols = static_cast<int>(theta.size());
    Eigen::MatrixXd J(rows, cols);
    for (int j = 0; j < cols; ++j) {
        const double delta = 1e-6 * theta[j];
        std::vector<double> tp = theta, tm = theta;
        tp[j] += delta;
        tm[j] -= delta;
        const std::vector<double> yp =
            identifiability_outputs(tp, S_tilde, horizon_days);
        const std::vector<double> ym =
            identifiability_outputs(tm, S_tilde, horizon_days);
        for (int i = 0; i < rows; ++i) {
            // Column scaled by theta_j: d y / d ln theta_j.
            J(i, j) = theta[j] * (yp[i] - ym[i]) / (2.0 * delta);
        }
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    const Eigen::VectorXd sv = svd.singularValues();
    IdentifiabilityResult res;
    res.singular_values.assign(sv.data(), sv.data() + sv.size());
    const double smax = res.singular_values.empty() ? 0.0
                                                    : res.singular_values.front();
    res.rank = 0;
    for (const double s : res.singular_values) {
        if (s > 1e-8 * smax) ++res.rank;
    }
    return res;
}

} // namespace regsir
