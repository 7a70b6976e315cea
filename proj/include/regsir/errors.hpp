#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace regsir {

// Error taxonomy shared by the library and the CLI. exit_code() is the
// process exit status the CLI maps each class to: 2 invalid input,
// 3 numerical failure, 4 model-assumption violation.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
    virtual int exit_code() const { return 1; }
};

// Malformed files, out-of-range parameters, impossible configurations.
struct InvalidInputError : Error {
    using Error::Error;
    int exit_code() const override { return 2; }
};

// Step-size underflow, divergence, exhausted iteration budgets,
// rank-deficient fits. last_t records how far an integration got before
// failing (NaN when not applicable); fitting uses it to grade penalties.
struct NumericalError : Error {
    explicit NumericalError(const std::string& msg,
                            double t = std::nan(""))
        : Error(msg), last_t(t) {}
    int exit_code() const override { return 3; }
    double last_t;
};

// A structural hypothesis of the model (monotonicity, interiority of the
// feedback image, existence of a steady state) fails for the given inputs.
struct AssumptionError : Error {
    using Error::Error;
    int exit_code() const override { return 4; }
};

} // namespace regsir
