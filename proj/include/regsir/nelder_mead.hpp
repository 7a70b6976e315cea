#pragma once

#include <functional>
#include <vector>

namespace regsir {

// Derivative-free simplex descent (Nelder-Mead with dimension-adaptive
// expansion/contraction coefficients). Unconstrained: callers impose
// bounds inside the objective (the fitting module folds log-coordinates
// back into the box). Deterministic for fixed inputs.
struct NelderMeadOptions {
    long max_evals = 20000;
    // Converged when the relative simplex diameter
    //   max_i max_k |x_i[k] - x_best[k]| / max(1, |x_best[k]|)
    // falls below this.
    double xtol_rel = 1e-10;
    // Initial simplex: vertex j displaces coordinate j by
    // init_scale * max(|x0[j]|, 0.1).
    double init_scale = 0.1;
};

struct NelderMeadResult {
    std::vector<double> x;
    double f;
    long evals;
    bool converged;
};

NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::vector<double>& x0, const NelderMeadOptions& opt = {});

} // namespace regsir
