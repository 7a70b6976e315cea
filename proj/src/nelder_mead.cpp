#include "regsir/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "regsir/errors.hpp"

namespace regsir {

namespace {

struct Vertex {
    std::vector<double> x;
    double f;
};

double rel_diameter(const std::vector<Vertex>& simplex) {
    const std::vector<double>& best = simplex.front().x;
    double d = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i) {
        for (std::size_t k = 0; k < best.size(); ++k) {
            d = std::max(d, std::abs(simplex[i].x[k] - best[k]) /
                                std::max(1.0, std::abs(best[k])));
        }
    }
    return d;
}

} // namespace

NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::vector<double>& x0, const NelderMeadOptions& opt) {
    const std::size_t n = x0.size();
    if (n == 0) {
        throw InvalidInputError("nelder_mead: empty start point");
    }
    // Dimension-adaptive coefficients (reflection, expansion, contraction,
    // shrink); they reduce to the classic values at n = 2.
    const double nd = static_cast<double>(n);
    const double rho = 1.0;
    const double chi = 1.0 + 2.0 / nd;
    const double gam = 0.75 - 0.5 / nd;
    const double sig = 1.0 - 1.0 / nd;

    long evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        const double f = objective(x);
        return std::isnan(f) ? std::numeric_limits<double>::infinity() : f;
    };

    std::vector<Vertex> sx(n + 1);
    sx[0] = {x0, eval(x0)};
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> v = x0;
        v[j] += opt.init_scale * std::max(std::abs(x0[j]), 0.1);
        sx[j + 1] = {std::move(v), 0.0};
        sx[j + 1].f = eval(sx[j + 1].x);
    }

    auto order = [&]() {
        std::stable_sort(sx.begin(), sx.end(),
                         [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    };
    order();

    bool converged = false;
    while (evals < opt.max_evals) {
        if (rel_diameter(sx) < opt.xtol_rel) {
            converged = true;
            break;
        }
        // Centroid of all but the worst vertex.
        std::vector<double> c(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) c[k] += sx[i].x[k];
        }
        for (double& v : c) v /= nd;
        const Vertex& worst = sx[n];

        auto combine = [&](double coef) {
            std::vector<double> x(n);
            for (std::size_t k = 0; k < n; ++k) {
                x[k] = c[k] + coef * (c[k] - worst.x[k]);
            }
            return x;
        };

        std::vector<double> xr = combine(rho);
        const double fr = eval(xr);
        if (fr < sx[0].f) {
            std::vector<double> xe = combine(rho * chi);
            const double fe = eval(xe);
            if (fe < fr) {
                sx[n] = {std::move(xe), fe};
            } else {
                sx[n] = {std::move(xr), fr};
            }
        } else if (fr < sx[n - 1].f) {
            sx[n] = {std::move(xr), fr};
        } else {
            bool shrink = false;
            if (fr < worst.f) {
                std::vector<double> xc = combine(rho * gam);
                const double fc = eval(xc);
                if (fc <= fr) {
                    sx[n] = {std::move(xc), fc};
                } else {
                    shrink = true;
                }
            } else {
                std::vector<double> xc = combine(-gam);
                const double fc = eval(xc);
                if (fc < worst.f) {
                    sx[n] = {std::move(xc), fc};
                } else {
                    shrink = true;
                }
            }
            if (shrink) {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t k = 0; k < n; ++k) {
                        sx[i].x[k] = sx[0].x[k] + sig * (sx[i].x[k] - sx[0].x[k]);
                    }
                    sx[i].f = eval(sx[i].x);
                }
            }
        }
        order();
    }

    NelderMeadResult res;
    res.x = sx[0].x;
    res.f = sx[0].f;
    res.evals = evals;
    res.converged = converged;
    return res;
}

} // namespace regsir
