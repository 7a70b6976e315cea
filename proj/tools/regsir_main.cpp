#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "regsir/analysis.hpp"
#include "regsir/contact_law.hpp"
#include "regsir/dynamics.hpp"
#include "regsir/errors.hpp"
#include "regsir/fitting.hpp"
#include "regsir/params.hpp"
#include "regsir/solver.hpp"

using nlohmann::json;
using namespace regsir;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Full double precision so emitted files support exact oracle diffs.
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json load_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw InvalidInputError("cannot open params file '" + path + "'");
    }
    try {
        json j;
        f >> j;
        return j;
    } catch (const json::exception& e) {
        throw InvalidInputError("bad JSON in '" + path + "': " + e.what());
    }
}

double need_num(const json& j, const std::string& key) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw InvalidInputError("params: missing numeric field '" + key + "'");
    }
    return j[key].get<double>();
}

double opt_num(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) {
        throw InvalidInputError("params: field '" + key + "' must be numeric");
    }
    return j[key].get<double>();
}

IntegratorConfig config_from_json(const json& j) {
    IntegratorConfig cfg;
    cfg.dt = opt_num(j, "dt", cfg.dt);
    cfg.rtol = opt_num(j, "rtol", cfg.rtol);
    cfg.atol = opt_num(j, "atol", cfg.atol);
    cfg.max_steps = static_cast<long>(opt_num(
        j, "max_steps", static_cast<double>(cfg.max_steps)));
    cfg.positivity_floor =
        opt_num(j, "positivity_floor", cfg.positivity_floor);
    if (j.contains("method")) {
        const std::string m = j["method"].get<std::string>();
        if (m == "rk4") {
            cfg.method = Method::rk4_fixed;
        } else if (m == "rk45") {
            cfg.method = Method::rk45_adaptive;
        } else {
            throw InvalidInputError("params: method must be 'rk4' or 'rk45'");
        }
    }
    return cfg;
}

ContactRateLaw law_from_json(const json& j) {
    const std::string name =
        j.contains("law") ? j["law"].get<std::string>() : "monod";
    if (name != "monod") {
        throw InvalidInputError("params: only the 'monod' law is built in");
    }
    return make_monod(need_num(j, "K"));
}

struct OutputTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void write_table(const OutputTable& t, const std::string& out_path,
                 const std::string& format, const std::string& model) {
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) {
            throw InvalidInputError("cannot open output '" + out_path + "'");
        }
        os = &file;
    }
    if (format == "json") {
        json j;
        j["model"] = model;
        j["columns"] = t.columns;
        j["rows"] = t.rows;
        *os << j.dump(2) << "\n";
    } else {
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            *os << (i ? "," : "") << t.columns[i];
        }
        *os << "\n";
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                *os << (i ? "," : "") << fmt(row[i]);
            }
            *os << "\n";
        }
    }
    if (!out_path.empty() && !file) {
        throw InvalidInputError("write failed for '" + out_path + "'");
    }
}

Rhs wrap_full(const EpidemicParams& p, const ContactRateLaw& law) {
    return [p, law](double, const double* y, double* d) {
        const FullState x{y[0], y[1], y[2], y[3]};
        const FullState dx = rhs_full(x, p, law);
        d[0] = dx.S;
        d[1] = dx.I;
        d[2] = dx.R;
        d[3] = dx.beta;
    };
}

Rhs wrap_fast(const EpidemicParams& p, const ContactRateLaw& law) {
    return [p, law](double, const double* y, double* d) {
        const FastState x{y[0], y[1], y[2]};
        const FastState dx = rhs_fast(x, p, law);
        d[0] = dx.I;
        d[1] = dx.beta;
        d[2] = dx.c_s;
    };
}

// Daily nodes of a trajectory, or the bare initial state at horizon 0.
Trajectory run_daily(const Rhs& rhs, const std::vector<double>& x0,
                     double horizon, const IntegratorConfig& cfg,
                     const std::string& id) {
    if (horizon == 0.0) {
        Trajectory tr;
        tr.times = {0.0};
        tr.states = {x0};
        std::vector<double> d(x0.size());
        rhs(0.0, x0.data(), d.data());
        tr.derivs = {d};
        tr.method = cfg.method == Method::rk4_fixed ? "rk4" : "rk45";
        tr.rhs_id = id;
        return tr;
    }
    return sample_daily(integrate(rhs, x0, 0.0, horizon, cfg, id));
}

int cmd_simulate(const std::string& model, const std::string& params_path,
                 const std::string& out_path, const std::string& format,
                 double horizon) {
    const json j = load_json_file(params_path);
    const IntegratorConfig cfg = config_from_json(j);
    OutputTable t;

    if (model == "full") {
        const ContactRateLaw law = law_from_json(j);
        EpidemicParams p{need_num(j, "c"), need_num(j, "gamma"),
                         need_num(j, "alpha"), need_num(j, "u"),
                         opt_num(j, "epsilon", 1.0)};
        p.validate();
        const std::vector<double> x0 = {need_num(j, "S0"), need_num(j, "I0"),
                                        opt_num(j, "R0", 0.0),
                                        need_num(j, "beta0")};
        const Trajectory tr = run_daily(wrap_full(p, law), x0, horizon, cfg, "full");
        t.columns = {"t", "S", "I", "R", "beta", "sir_total", "y"};
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            const auto& s = tr.states[i];
            t.rows.push_back({tr.times[i], s[0], s[1], s[2], s[3],
                              s[0] + s[1] + s[2],
                              ((p.c * s[0]) * s[3]) * s[1]});
        }
    } else if (model == "fast") {
        const ContactRateLaw law = law_from_json(j);
        EpidemicParams p{1.0, need_num(j, "gamma"), need_num(j, "alpha"),
                         need_num(j, "u"), 1.0};
        p.validate();
        const double c_s = need_num(j, "c_s");
        const std::vector<double> x0 = {need_num(j, "I0"),
                                        need_num(j, "beta0"), c_s};
        const Trajectory tr = run_daily(wrap_fast(p, law), x0, horizon, cfg, "fast");
        t.columns = {"t", "I", "beta", "y"};
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            const auto& s = tr.states[i];
            t.rows.push_back({tr.times[i], s[0], s[1], (c_s * s[1]) * s[0]});
        }
    } else if (model == "log-fast") {
        const ContactRateLaw law = law_from_json(j);
        EpidemicParams p{1.0, need_num(j, "gamma"), need_num(j, "alpha"),
                         need_num(j, "u"), 1.0};
        p.validate();
        const double c_s = need_num(j, "c_s");
        const double p0 = j.contains("p0") ? need_num(j, "p0")
                                           : std::log(need_num(j, "I0"));
        IntegratorConfig lcfg = cfg;
        if (!j.contains("positivity_floor")) {
            lcfg.positivity_floor = kNegInf; // p = ln I may be negative
        }
        const Rhs rhs = [p, law](double, const double* y, double* d) {
            const LogFastState x{y[0], y[1], y[2]};
            const LogFastState dx = rhs_log_fast(x, p, law);
            d[0] = dx.p;
            d[1] = dx.beta;
            d[2] = dx.c_s;
        };
        const Trajectory tr =
            run_daily(rhs, {p0, need_num(j, "beta0"), c_s}, horizon, lcfg,
                      "log-fast");
        t.columns = {"t", "p", "beta", "I", "y"};
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            const auto& s = tr.states[i];
            const double I = std::exp(s[0]);
            t.rows.push_back({tr.times[i], s[0], s[1], I, (c_s * s[1]) * I});
        }
    } else if (model == "slow" || model == "closed-form-monod") {
        const ContactRateLaw law = law_from_json(j);
        EpidemicParams p{};
        p.gamma = need_num(j, "gamma");
        p.alpha = opt_num(j, "alpha", 1.0);
        p.u = need_num(j, "u");
        p.epsilon = need_num(j, "epsilon");
        p.c = j.contains("c") ? need_num(j, "c")
                              : need_num(j, "c_tilde") * p.epsilon;
        p.validate();
        const double s0 = need_num(j, "S0_rescaled");
        if (model == "closed-form-monod") {
            const double K = need_num(j, "K");
            t.columns = {"t", "tau", "S_rescaled", "I"};
            for (long d = 0; d <= static_cast<long>(std::floor(horizon + 1e-12));
                 ++d) {
                const double td = static_cast<double>(d);
                t.rows.push_back({td, p.epsilon * td,
                                  monod_slow_susceptibles(td, s0, p, K),
                                  monod_slow_infectives(td, s0, p, K)});
            }
        } else {
            const Rhs rhs = [&p, &law](double, const double* y, double* d) {
                d[0] = rhs_slow(y[0], p, law);
            };
            IntegratorConfig scfg = cfg;
            scfg.dt = std::min(cfg.dt, std::max(p.epsilon * horizon / 100.0,
                                                1e-12));
            Trajectory tr;
            if (horizon > 0.0) {
                tr = integrate(rhs, {s0}, 0.0, p.epsilon * horizon, scfg,
                               "slow");
            }
            t.columns = {"t", "tau", "S_rescaled", "I_qss", "beta_qss"};
            for (long d = 0; d <= static_cast<long>(std::floor(horizon + 1e-12));
                 ++d) {
                const double td = static_cast<double>(d);
                const double tau = std::min(p.epsilon * td,
                                            horizon > 0.0 ? tr.times.back() : 0.0);
                const double sb =
                    horizon > 0.0 ? tr.interpolate(tau)[0] : s0;
                const double cs = p.c_tilde() * sb;
                double iq = std::numeric_limits<double>::quiet_NaN();
                double bq = std::numeric_limits<double>::quiet_NaN();
                if (check_a4(law, p.gamma, cs).holds) {
                    bq = p.gamma / cs;
                    iq = law.invert_h(law.g(bq)) / p.u;
                }
                t.rows.push_back({td, p.epsilon * td, sb, iq, bq});
            }
        }
    } else {
        throw InvalidInputError(
            "model must be one of full, fast, log-fast, slow, "
            "closed-form-monod");
    }

    write_table(t, out_path, format, model);
    return 0;
}

json eig_json(const std::array<std::complex<double>, 2>& eig) {
    return json::array({json::array({eig[0].real(), eig[0].imag()}),
                        json::array({eig[1].real(), eig[1].imag()})});
}

std::string stability_name(Stability s) {
    switch (s) {
        case Stability::exp_stable: return "exp-stable";
        case Stability::exp_unstable: return "exp-unstable";
        default: return "marginal";
    }
}

int cmd_analyze(const std::string& params_path, const std::string& out_path) {
    const json j = load_json_file(params_path);
    const ContactRateLaw law = law_from_json(j);
    EpidemicParams p{1.0, need_num(j, "gamma"), need_num(j, "alpha"),
                     need_num(j, "u"), 1.0};
    p.validate();
    const double c_s = need_num(j, "c_s");

    json out;
    const AssumptionReport ar = check_assumptions(law, p, c_s);
    out["assumptions"] = {{"a1", ar.a1},
                          {"a2", ar.a2},
                          {"a3", ar.a3},
                          {"a4", ar.a4},
                          {"margins",
                           {{"a1", ar.a1_margin},
                            {"a2", ar.a2_margin},
                            {"a3", ar.a3_margin},
                            {"a4", ar.a4_margin}}}};

    const auto dfs = disease_free_state(law, p, c_s);
    if (dfs) {
        out["disease_free"] = {{"present", true},
                               {"I", dfs->I},
                               {"beta", dfs->beta},
                               {"eigenvalues", eig_json(dfs->eigenvalues)},
                               {"classification",
                                stability_name(dfs->classification)}};
        out["r0_at_disease_free"] = r0(dfs->beta, c_s, p.gamma);
    } else {
        out["disease_free"] = {{"present", false}};
    }

    const auto es = endemic_state(law, p, c_s);
    if (es) {
        out["endemic"] = {{"present", true},
                          {"I", es->I},
                          {"beta", es->beta},
                          {"eigenvalues", eig_json(es->eigenvalues)},
                          {"classification",
                           stability_name(es->classification)}};
    } else {
        out["endemic"] = {{"present", false}};
    }

    // Lyapunov spot check on a deterministic grid around the endemic point.
    if (es) {
        const double p_e = std::log(es->I);
        double min_V = std::numeric_limits<double>::infinity();
        double max_Vdot = -std::numeric_limits<double>::infinity();
        int n = 0;
        for (int a = 0; a < 10; ++a) {
            for (int b = 0; b < 10; ++b) {
                const double pp =
                    p_e + (-1.0 + 2.0 * a / 9.0) * std::log(10.0);
                const double bb = es->beta * (0.5 + 1.5 * b / 9.0);
                const LyapunovSample ls = lyapunov(pp, bb, law, p, c_s);
                min_V = std::min(min_V, ls.V);
                max_Vdot = std::max(max_Vdot, ls.Vdot);
                ++n;
            }
        }
        out["lyapunov_spot_check"] = {{"available", true},
                                      {"points", n},
                                      {"min_V", min_V},
                                      {"max_Vdot", max_Vdot}};
    } else {
        out["lyapunov_spot_check"] = {{"available", false}};
    }

    // Nullclines and a normalized vector-field grid in (I, beta), for
    // phase-plane plotting. The I-nullcline of the interior flow is the
    // horizontal line beta = gamma/c_s; the beta-nullcline is
    // beta = g^{-1}(h(u I)).
    const double I_ref = es ? es->I : 1.0e3;
    const double beta_ref = es ? es->beta : p.gamma / c_s;
    json inull = json::array();
    json bnull = json::array();
    for (int k = 0; k <= 80; ++k) {
        const double I = I_ref * std::pow(10.0, -2.0 + 4.0 * k / 80.0);
        inull.push_back(json::array({I, p.gamma / c_s}));
        try {
            bnull.push_back(json::array({I, law.invert_g(law.h(p.u * I))}));
        } catch (const AssumptionError&) {
            // h(uI) outside image(g); skip the sample
        }
    }
    out["nullclines"] = {{"I_nullcline", inull}, {"beta_nullcline", bnull}};

    json field = json::array();
    for (int a = 0; a < 15; ++a) {
        for (int b = 0; b < 15; ++b) {
            const double I = I_ref * std::pow(10.0, -1.5 + 3.0 * a / 14.0);
            const double bb = beta_ref * (0.25 + 2.0 * b / 14.0);
            const double dp = c_s * bb - p.gamma;
            const double db = -p.alpha * (law.g(bb) - law.h(p.u * I));
            const double norm = std::hypot(dp, db);
            field.push_back({{"I", I},
                             {"beta", bb},
                             {"dp_dt", dp},
                             {"dbeta_dt", db},
                             {"unit",
                              json::array({norm > 0.0 ? dp / norm : 0.0,
                                           norm > 0.0 ? db / norm : 0.0})}});
        }
    }
    out["vector_field"] = field;

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) {
            throw InvalidInputError("cannot open output '" + out_path + "'");
        }
        os = &file;
    }
    *os << out.dump(2) << "\n";
    return 0;
}

FitBounds bounds_from_json(const json& j) {
    FitBounds b = default_fit_bounds();
    if (!j.contains("bounds")) return b;
    const json& jb = j["bounds"];
    const std::array<std::string, 6> names = {"gamma", "alpha", "K",
                                              "u",     "I0",    "beta0"};
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (jb.contains(names[i])) {
            const json& pair = jb[names[i]];
            if (!pair.is_array() || pair.size() != 2) {
                throw InvalidInputError("params: bounds." + names[i] +
                                        " must be [lo, hi]");
            }
            b[i] = {pair[0].get<double>(), pair[1].get<double>()};
        }
    }
    return b;
}

int cmd_fit(const std::string& params_path, const std::string& data_path,
            bool cumulative, const std::string& out_path,
            std::uint64_t seed) {
    const json j = load_json_file(params_path);
    FitProblem prob;
    prob.data = load_incidence(data_path, cumulative
                                              ? IncidenceFormat::cumulative
                                              : IncidenceFormat::daily);
    if (j.contains("region")) prob.data.region = j["region"].get<std::string>();
    prob.data.population = opt_num(j, "population", prob.data.population);
    prob.S_tilde = need_num(j, "S_tilde");
    prob.window_start = 0;
    prob.window_end = static_cast<int>(prob.data.size()) - 1;
    if (j.contains("window")) {
        const json& w = j["window"];
        if (!w.is_array() || w.size() != 2) {
            throw InvalidInputError("params: window must be [start, end]");
        }
        prob.window_start = w[0].get<int>();
        prob.window_end = w[1].get<int>();
    }
    prob.bounds = bounds_from_json(j);
    if (j.contains("loss_space")) {
        const std::string ls = j["loss_space"].get<std::string>();
        if (ls == "log") {
            prob.loss_space = LossSpace::log;
        } else if (ls == "linear") {
            prob.loss_space = LossSpace::linear;
        } else {
            throw InvalidInputError("params: loss_space must be linear|log");
        }
    }

    FitOptions opts;
    opts.seeds = static_cast<int>(opt_num(j, "seeds", opts.seeds));
    opts.restarts = static_cast<int>(opt_num(j, "restarts", opts.restarts));
    opts.max_evals_per_start = static_cast<int>(
        opt_num(j, "max_evals", opts.max_evals_per_start));
    opts.rng_seed = seed;

    const FitResult r = fit(prob, opts);

    json out;
    out["params"] = {{"gamma", r.params.gamma}, {"alpha", r.params.alpha},
                     {"K", r.params.K},         {"u", r.params.u},
                     {"I0", r.params.I0},       {"beta0", r.params.beta0}};
    out["loss"] = r.loss;
    out["rms_error"] = r.rms_error;
    out["iterations"] = r.iterations;
    out["converged"] = r.converged;
    out["restarts_used"] = r.restarts_used;
    out["window"] = json::array({prob.window_start, prob.window_end});
    out["loss_space"] =
        prob.loss_space == LossSpace::log ? "log" : "linear";
    out["S_tilde"] = prob.S_tilde;
    out["seeds"] = opts.seeds;
    out["rng_seed"] = opts.rng_seed;
    out["data"] = {{"path", data_path},
                   {"days", prob.data.size()},
                   {"clamped_negatives", prob.data.clamped_negatives},
                   {"filled_gaps", prob.data.filled_gaps}};

    if (out_path.empty()) {
        std::cout << out.dump(2) << "\n";
        return 0;
    }
    {
        std::ofstream f(out_path + ".json");
        if (!f) {
            throw InvalidInputError("cannot open output '" + out_path +
                                    ".json'");
        }
        f << out.dump(2) << "\n";
    }
    // Fitted daily curve aligned to the data dates, for overlay plots.
    const int n = static_cast<int>(prob.data.size());
    std::vector<double> curve;
    try {
        curve = simulate_fit_output(r.params, prob.S_tilde, n - 1);
    } catch (const NumericalError&) {
        curve = simulate_fit_output(r.params, prob.S_tilde, prob.window_end);
    }
    {
        std::ofstream f(out_path + "_curve.csv");
        if (!f) {
            throw InvalidInputError("cannot open output '" + out_path +
                                    "_curve.csv'");
        }
        f << "date,cases,smoothed,fitted\n";
        for (int d = 0; d < n; ++d) {
            f << prob.data.dates[static_cast<std::size_t>(d)] << ","
              << fmt(prob.data.raw[static_cast<std::size_t>(d)]) << ","
              << fmt(prob.data.smoothed[static_cast<std::size_t>(d)]) << ","
              << (d < static_cast<int>(curve.size())
                      ? fmt(curve[static_cast<std::size_t>(d)])
                      : "nan")
              << "\n";
        }
    }
    return 0;
}

int cmd_sweep(const std::string& params_path, const std::string& populations,
              const std::string& out_path, const std::string& format,
              double horizon) {
    const json j = load_json_file(params_path);
    const ContactRateLaw law = law_from_json(j);
    const IntegratorConfig cfg = config_from_json(j);
    const double cs_const = need_num(j, "cs_const");
    const double gamma = need_num(j, "gamma");
    const double alpha = need_num(j, "alpha");
    const double u = need_num(j, "u");
    const double K = need_num(j, "K");
    const double I0 = opt_num(j, "I0", 1.0);
    const double beta0 = opt_num(j, "beta0", K);

    if (populations.empty()) {
        throw InvalidInputError("sweep: --populations is required");
    }
    std::vector<double> Ns;
    {
        std::stringstream ss(populations);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(tok, &pos);
                if (pos != tok.size() || !(v > 0.0)) throw std::invalid_argument("");
                Ns.push_back(v);
            } catch (const std::exception&) {
                throw InvalidInputError("sweep: bad population '" + tok + "'");
            }
        }
    }
    if (Ns.empty()) {
        throw InvalidInputError("sweep: empty population list");
    }

    OutputTable summary;
    summary.columns = {"population",  "c",         "epsilon",
                       "terminal_I",  "qss_fixed", "dev_fixed",
                       "qss_tracking", "dev_tracking"};
    for (const double N : Ns) {
        EpidemicParams p{cs_const / N, gamma, alpha, u, 1.0 / N};
        p.validate();
        const std::vector<double> x0 = {N, I0, 0.0, beta0};
        const Trajectory tr = run_daily(wrap_full(p, law), x0, horizon, cfg,
                                        "full");
        if (!out_path.empty()) {
            OutputTable t;
            t.columns = {"t", "S", "I", "R", "beta", "sir_total", "y"};
            for (std::size_t i = 0; i < tr.times.size(); ++i) {
                const auto& s = tr.states[i];
                t.rows.push_back({tr.times[i], s[0], s[1], s[2], s[3],
                                  s[0] + s[1] + s[2],
                                  ((p.c * s[0]) * s[3]) * s[1]});
            }
            write_table(t, out_path + "_N" + fmt(N) + ".csv", format, "full");
        }
        const auto& last = tr.states.back();
        const double I_term = last[1];
        const double qss_fixed = (cs_const * K / gamma - 1.0) / u;
        const double cs_term = p.c * last[0];
        const double qss_track =
            check_a4(law, gamma, cs_term).holds
                ? law.invert_h(law.g(gamma / cs_term)) / u
                : 0.0;
        summary.rows.push_back(
            {N, p.c, p.epsilon, I_term, qss_fixed,
             (I_term - qss_fixed) / qss_fixed, qss_track,
             qss_track > 0.0
                 ? (I_term - qss_track) / qss_track
                 : std::numeric_limits<double>::quiet_NaN()});
    }
    write_table(summary, out_path.empty() ? "" : out_path + "_summary.csv",
                format, "sweep");
    return 0;
}

int cmd_assign(const std::string& params_path, double istar,
               const std::string& out_path) {
    const json j = load_json_file(params_path);
    const ContactRateLaw law = law_from_json(j);
    EpidemicParams p{1.0, need_num(j, "gamma"), need_num(j, "alpha"),
                     opt_num(j, "u", 1.0), 1.0};
    p.validate();
    const double c_s = need_num(j, "c_s");
    const double u = assign_u(istar, law, p, c_s);

    EpidemicParams pu = p;
    pu.u = u;
    const auto es = endemic_state(law, pu, c_s);
    if (!es) {
        throw AssumptionError("assign: endemic state vanished on round trip");
    }
    json out;
    out["u"] = u;
    out["I_star"] = istar;
    out["endemic"] = {{"I", es->I},
                      {"beta", es->beta},
                      {"classification", stability_name(es->classification)}};
    out["round_trip_relative_error"] = (es->I - istar) / istar;

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) {
            throw InvalidInputError("cannot open output '" + out_path + "'");
        }
        os = &file;
    }
    *os << out.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and estimation toolkit for a regulated "
                 "epidemic model with adaptive contact-rate feedback"};
    app.require_subcommand(1);

    std::string model = "fast", params_path, data_path, out_path,
                format = "csv", populations;
    bool cumulative = false;
    std::uint64_t seed = 20200311;
    double horizon = 200.0, istar = 0.0;

    CLI::App* sim = app.add_subcommand("simulate", "Integrate a model and "
                                                   "emit daily samples");
    sim->add_option("--model", model,
                    "full | fast | log-fast | slow | closed-form-monod");
    sim->add_option("--params", params_path, "JSON parameter file")
        ->required();
    sim->add_option("--out", out_path, "output path (default stdout)");
    sim->add_option("--format", format, "csv | json");
    sim->add_option("--horizon", horizon, "days to simulate");
    sim->add_option("--seed", seed, "random seed (unused, accepted)");

    CLI::App* ana = app.add_subcommand("analyze", "Steady states, stability, "
                                                  "assumptions, phase plane");
    ana->add_option("--params", params_path, "JSON parameter file")
        ->required();
    ana->add_option("--out", out_path, "output path (default stdout)");
    ana->add_option("--seed", seed, "random seed (unused, accepted)");

    CLI::App* fitc = app.add_subcommand("fit", "Estimate parameters from a "
                                               "daily-incidence CSV");
    fitc->add_option("--params", params_path, "JSON parameter file")
        ->required();
    fitc->add_option("--data", data_path, "incidence CSV")->required();
    fitc->add_flag("--cumulative", cumulative,
                   "difference a cumulative series");
    fitc->add_option("--out", out_path,
                     "output prefix: writes <out>.json and <out>_curve.csv");
    fitc->add_option("--seed", seed, "multi-start RNG seed");

    CLI::App* swp = app.add_subcommand("sweep", "Population sweep at fixed "
                                                "c*S(0)");
    swp->add_option("--params", params_path, "JSON parameter file")
        ->required();
    swp->add_option("--populations", populations, "comma-separated sizes")
        ->required();
    swp->add_option("--out", out_path, "output prefix");
    swp->add_option("--format", format, "csv | json");
    swp->add_option("--horizon", horizon, "days to simulate");
    swp->add_option("--seed", seed, "random seed (unused, accepted)");

    CLI::App* asg = app.add_subcommand("assign", "Perception gain placing "
                                                 "the endemic level at I*");
    asg->add_option("--params", params_path, "JSON parameter file")
        ->required();
    asg->add_option("--istar", istar, "target endemic infectives")
        ->required();
    asg->add_option("--out", out_path, "output path (default stdout)");
    asg->add_option("--seed", seed, "random seed (unused, accepted)");

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            app.exit(e);
            return 2;
        }
        if (format != "csv" && format != "json") {
            throw InvalidInputError("--format must be csv or json");
        }
        if (horizon < 0.0 || !std::isfinite(horizon)) {
            throw InvalidInputError("--horizon must be nonnegative");
        }
        if (app.got_subcommand(sim)) {
            return cmd_simulate(model, params_path, out_path, format, horizon);
        }
        if (app.got_subcommand(ana)) {
            return cmd_analyze(params_path, out_path);
        }
        if (app.got_subcommand(fitc)) {
            return cmd_fit(params_path, data_path, cumulative, out_path, seed);
        }
        if (app.got_subcommand(swp)) {
            return cmd_sweep(params_path, populations, out_path, format,
                             horizon);
        }
        return cmd_assign(params_path, istar, out_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const json::exception& e) {
        std::cerr << "error: invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
