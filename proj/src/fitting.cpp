#include "regsir/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "regsir/analysis.hpp"
#include "regsir/contact_law.hpp"
#include "regsir/dynamics.hpp"
#include "regsir/nelder_mead.hpp"

namespace regsir {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
// Base magnitude of the divergence penalty; graded upward the earlier a
// simulation blows up so the simplex can descend toward feasibility.
constexpr double kPenaltyBase = 1e250;

// Days since 1970-01-01 for a proleptic Gregorian date.
long days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long yy = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = static_cast<int>(yy) + (m <= 2);
}

std::string format_date(long days) {
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
    return buf;
}

long parse_date(const std::string& s, std::size_t row) {
    int y;
    unsigned m, d;
    if (s.size() != 10 ||
        std::sscanf(s.c_str(), "%4d-%2u-%2u", &y, &m, &d) != 3 || m < 1 ||
        m > 12 || d < 1 || d > 31) {
        throw InvalidInputError("load_incidence: row " + std::to_string(row) +
                                ": bad date '" + s + "'");
    }
    return days_from_civil(y, m, d);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        // trim ASCII whitespace
        const auto b = tok.find_first_not_of(" \t");
        const auto e = tok.find_last_not_of(" \t");
        out.push_back(b == std::string::npos ? "" : tok.substr(b, e - b + 1));
    }
    return out;
}

} // namespace

IncidenceSeries load_incidence(const std::string& path,
                               IncidenceFormat format) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidInputError("load_incidence: cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw InvalidInputError("load_incidence: empty file '" + path + "'");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_csv(line);
    std::size_t date_col = header.size(), cases_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "date") date_col = i;
        if (header[i] == "cases") cases_col = i;
    }
    if (date_col >= header.size() || cases_col >= header.size()) {
        throw InvalidInputError(
            "load_incidence: header must contain 'date' and 'cases' columns");
    }

    std::vector<long> days;
    std::vector<double> counts;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv(line);
        if (f.size() <= std::max(date_col, cases_col)) {
            throw InvalidInputError("load_incidence: row " +
                                    std::to_string(row) + ": too few columns");
        }
        const long d = parse_date(f[date_col], row);
        double v;
        try {
            std::size_t pos = 0;
            v = std::stod(f[cases_col], &pos);
            if (pos != f[cases_col].size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw InvalidInputError("load_incidence: row " +
                                    std::to_string(row) + ": bad count '" +
                                    f[cases_col] + "'");
        }
        if (!days.empty() && d <= days.back()) {
            throw InvalidInputError("load_incidence: row " +
                                    std::to_string(row) +
                                    ": dates must strictly increase");
        }
        days.push_back(d);
        counts.push_back(v);
    }
    if (days.empty()) {
        throw InvalidInputError("load_incidence: no data rows in '" + path +
                                "'");
    }

    IncidenceSeries s;
    // Gap-fill to a contiguous daily axis. Cumulative series repeat the
    // previous total on a missing day (no new cases); daily series get 0.
    std::vector<long> full_days;
    std::vector<double> full_counts;
    for (std::size_t i = 0; i < days.size(); ++i) {
        if (i > 0) {
            for (long d = days[i - 1] + 1; d < days[i]; ++d) {
                full_days.push_back(d);
                full_counts.push_back(
                    format == IncidenceFormat::cumulative ? full_counts.back()
                                                          : 0.0);
                ++s.filled_gaps;
            }
        }
        full_days.push_back(days[i]);
        full_counts.push_back(counts[i]);
    }

    if (format == IncidenceFormat::cumulative) {
        if (full_days.size() < 2) {
            throw InvalidInputError(
                "load_incidence: cumulative series needs at least two rows");
        }
        for (std::size_t i = 1; i < full_days.size(); ++i) {
            double diff = full_counts[i] - full_counts[i - 1];
            if (diff < 0.0) {
                diff = 0.0;
                ++s.clamped_negatives;
            }
            s.dates.push_back(format_date(full_days[i]));
            s.raw.push_back(diff);
        }
    } else {
        for (std::size_t i = 0; i < full_days.size(); ++i) {
            double v = full_counts[i];
            if (v < 0.0) {
                v = 0.0;
                ++s.clamped_negatives;
            }
            s.dates.push_back(format_date(full_days[i]));
            s.raw.push_back(v);
        }
    }
    s.smoothed = moving_average(s.raw, 7);
    return s;
}

std::vector<double> moving_average(const std::vector<double>& x, int window) {
    if (window < 1 || window % 2 == 0) {
        throw InvalidInputError("moving_average: window must be odd and >= 1");
    }
    const int half = window / 2;
    const int n = static_cast<int>(x.size());
    std::vector<double> out(x.size(), kNaN);
    for (int i = half; i < n - half; ++i) {
        double acc = 0.0;
        for (int j = i - half; j <= i + half; ++j) acc += x[j];
        out[i] = acc / static_cast<double>(window);
    }
    return out;
}

FitBounds default_fit_bounds() {
    return FitBounds{{{0.01, 1.0},
                      {0.001, 1.0},
                      {1e-4, 1.0},
                      {1e-7, 1e-1},
                      {1.0, 1e6},
                      {1e-5, 1.0}}};
}

void FitProblem::validate() const {
    if (data.size() == 0) {
        throw InvalidInputError("FitProblem: empty data");
    }
    if (!(S_tilde > 0.0) || !std::isfinite(S_tilde)) {
        throw InvalidInputError("FitProblem: S_tilde must be positive");
    }
    const int n = static_cast<int>(data.size());
    if (window_start < 0 || window_end >= n || window_start > window_end) {
        throw InvalidInputError("FitProblem: window outside data span");
    }
    if (window_end - window_start + 1 < 30) {
        throw InvalidInputError("FitProblem: window must contain >= 30 days");
    }
    for (const auto& b : bounds) {
        if (!(b[0] > 0.0) || !(b[1] > b[0]) || !std::isfinite(b[1])) {
            throw InvalidInputError(
                "FitProblem: bounds must be positive with lo < hi");
        }
    }
}

std::vector<double> simulate_fit_output(const FitParams& fp, double S_tilde,
                                        int days, const IntegratorConfig& cfg) {
    if (!(fp.gamma > 0.0) || !(fp.alpha > 0.0) || !(fp.K > 0.0) ||
        !(fp.u > 0.0) || fp.I0 < 0.0 || fp.beta0 < 0.0 || !(S_tilde > 0.0) ||
        days < 0) {
        throw InvalidInputError("simulate_fit_output: invalid inputs");
    }
    const ContactRateLaw law = make_monod(fp.K);
    EpidemicParams p{};
    p.c = 1.0;
    p.gamma = fp.gamma;
    p.alpha = fp.alpha;
    p.u = fp.u;
    p.epsilon = 1.0;
    const Rhs rhs = [p, law](double, const double* y, double* d) {
        const FastState x{y[0], y[1], y[2]};
        const FastState dx = rhs_fast(x, p, law);
        d[0] = dx.I;
        d[1] = dx.beta;
        d[2] = dx.c_s;
    };
    std::vector<double> y;
    y.reserve(static_cast<std::size_t>(days) + 1);
    if (days == 0) {
        y.push_back(measured_output(1.0, S_tilde, fp.beta0, fp.I0));
        return y;
    }
    const Trajectory tr = sample_daily(integrate(
        rhs, {fp.I0, fp.beta0, S_tilde}, 0.0, static_cast<double>(days), cfg,
        "fit-model"));
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        y.push_back(measured_output(1.0, S_tilde, tr.states[i][1],
                                    tr.states[i][0]));
    }
    return y;
}

namespace {

// Non-throwing simulation: returns the day count actually reached so the
// loss can grade divergence penalties.
struct PartialSim {
    std::vector<double> y;
    int days_reached;
    bool complete;
};

PartialSim simulate_partial(const FitParams& fp, double S_tilde, int days,
                            const IntegratorConfig& cfg) {
    try {
        PartialSim s{simulate_fit_output(fp, S_tilde, days, cfg), days, true};
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            if (!std::isfinite(s.y[i])) {
                s.complete = false;
                s.days_reached = static_cast<int>(i);
                break;
            }
        }
        return s;
    } catch (const NumericalError& e) {
        const int reached =
            std::isnan(e.last_t)
                ? 0
                : std::max(0, static_cast<int>(std::floor(e.last_t)));
        return PartialSim{{}, std::min(reached, days), false};
    }
}

IntegratorConfig fit_sim_config() {
    IntegratorConfig cfg;
    cfg.dt = 0.5;
    cfg.max_steps = 200000;
    return cfg;
}

struct LossBreakdown {
    double loss;
    double rms_linear;
    int residual_days;
};

LossBreakdown loss_breakdown(const FitProblem& problem, const FitParams& fp) {
    const int days = problem.window_end;
    const PartialSim sim =
        simulate_partial(fp, problem.S_tilde, days, fit_sim_config());
    if (!sim.complete) {
        const double pen =
            kPenaltyBase * (1.0 + static_cast<double>(days - sim.days_reached));
        return LossBreakdown{pen, kNaN, 0};
    }
    // Both sides receive the same centered smoothing so noiseless data is
    // fitted without bias.
    const std::vector<double> model_sm = moving_average(sim.y, 7);
    double acc = 0.0, acc_lin = 0.0;
    int count = 0, count_lin = 0;
    for (int d = problem.window_start; d <= problem.window_end; ++d) {
        const double ym = model_sm[static_cast<std::size_t>(d)];
        const double yd = problem.data.smoothed[static_cast<std::size_t>(d)];
        if (!std::isfinite(ym) || !std::isfinite(yd)) continue;
        const double r_lin = ym - yd;
        acc_lin += r_lin * r_lin;
        ++count_lin;
        if (problem.loss_space == LossSpace::log) {
            if (yd <= 0.0) continue;
            const double r = std::log(std::max(ym, 1e-300)) - std::log(yd);
            acc += r * r;
        } else {
            acc += r_lin * r_lin;
        }
        ++count;
    }
    if (count == 0 || count_lin == 0) {
        throw InvalidInputError(
            "fit: no usable residual days in the window (smoothing removed "
            "them all)");
    }
    return LossBreakdown{acc, std::sqrt(acc_lin / count_lin), count};
}

} // namespace

double fit_loss(const FitProblem& problem, const FitParams& fp) {
    return loss_breakdown(problem, fp).loss;
}

double fit_rms(const FitProblem& problem, const FitParams& fp) {
    return loss_breakdown(problem, fp).rms_linear;
}

namespace {

// Reflective fold of z into [lo, hi]: tent map with period 2*(hi - lo).
double fold_into(double z, double lo, double hi) {
    const double w = hi - lo;
    double m = std::fmod(z - lo, 2.0 * w);
    if (m < 0.0) m += 2.0 * w;
    return lo + (m <= w ? m : 2.0 * w - m);
}

} // namespace

FitResult fit(const FitProblem& problem, const FitOptions& options) {
    problem.validate();
    if (options.seeds < 1 && options.initial_guesses.empty()) {
        throw InvalidInputError("fit: need at least one start");
    }

    std::array<double, 6> llo{}, lhi{};
    for (int j = 0; j < 6; ++j) {
        llo[j] = std::log(problem.bounds[j][0]);
        lhi[j] = std::log(problem.bounds[j][1]);
    }
    auto fold = [&](const std::vector<double>& z) {
        std::array<double, 6> x{};
        for (int j = 0; j < 6; ++j) {
            x[j] = std::isfinite(z[j]) ? fold_into(z[j], llo[j], lhi[j])
                                       : llo[j];
        }
        return x;
    };
    auto to_params = [&](const std::vector<double>& z) {
        const std::array<double, 6> x = fold(z);
        std::array<double, 6> v{};
        for (int j = 0; j < 6; ++j) {
            // exp(log(hi)) can land one ulp outside the box; clamp so the
            // bounds invariant holds exactly.
            v[j] = std::clamp(std::exp(x[j]), problem.bounds[j][0],
                              problem.bounds[j][1]);
        }
        return FitParams{v[0], v[1], v[2], v[3], v[4], v[5]};
    };

    long total_evals = 0;
    auto objective = [&](const std::vector<double>& z) {
        ++total_evals;
        return fit_loss(problem, to_params(z));
    };

    // Assemble starts: explicit guesses first, then log-uniform draws.
    std::vector<std::vector<double>> starts;
    for (const FitParams& g : options.initial_guesses) {
        starts.push_back({std::log(g.gamma), std::log(g.alpha), std::log(g.K),
                          std::log(g.u), std::log(g.I0), std::log(g.beta0)});
    }
    std::mt19937_64 rng(options.rng_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < options.seeds; ++k) {
        std::vector<double> z(6);
        for (int j = 0; j < 6; ++j) {
            z[j] = llo[j] + unit(rng) * (lhi[j] - llo[j]);
        }
        starts.push_back(std::move(z));
    }

    // Identifiability guard at the best-loss start: a rank-deficient
    // sensitivity matrix there means the data cannot pin six parameters.
    std::size_t best_start = 0;
    {
        double best = kInf;
        for (std::size_t i = 0; i < starts.size(); ++i) {
            const double f = fit_loss(problem, to_params(starts[i]));
            if (f < best) {
                best = f;
                best_start = i;
            }
        }
        if (best >= kPenaltyBase) {
            throw NumericalError(
                "fit: every start diverges; widen bounds or shrink the window");
        }
        const IdentifiabilityResult ir = identifiability_rank(
            to_params(starts[best_start]), problem.S_tilde, problem.window_end);
        if (ir.rank < 6) {
            throw NumericalError(
                "fit: sensitivity rank " + std::to_string(ir.rank) +
                " < 6 at the best seed; the six parameters are not jointly "
                "identifiable from this window");
        }
    }

    NelderMeadOptions nm;
    nm.max_evals = options.max_evals_per_start;
    nm.xtol_rel = 1e-10;
    nm.init_scale = 0.5;

    double best_f = kInf;
    std::vector<double> best_z;
    bool best_converged = false;
    int restarts_used = 0;
    for (const std::vector<double>& z0 : starts) {
        NelderMeadResult r = nelder_mead(objective, z0, nm);
        // Restart at the incumbent with a fresh simplex while it helps.
        for (int k = 0; k < options.restarts && !r.converged; ++k) {
            const NelderMeadResult r2 = nelder_mead(objective, r.x, nm);
            ++restarts_used;
            if (!(r2.f < r.f * (1.0 - 1e-12))) {
                if (r2.f < r.f) r = r2;
                break;
            }
            r = r2;
        }
        if (r.f < best_f) {
            best_f = r.f;
            best_z = r.x;
            best_converged = r.converged;
        }
    }

    if (best_f >= kPenaltyBase || best_z.empty()) {
        throw NumericalError("fit: all multi-starts diverged");
    }

    FitResult res;
    res.params = to_params(best_z);
    // Re-evaluated through the public path; bit-identical to the internal
    // objective because it is the same code on the same folded point.
    res.loss = fit_loss(problem, res.params);
    res.rms_error = fit_rms(problem, res.params);
    res.iterations = total_evals;
    res.converged = best_converged;
    res.restarts_used = restarts_used;
    return res;
}

} // namespace regsir
