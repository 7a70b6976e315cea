#pragma once

#include <functional>
#include <string>

#include "regsir/errors.hpp"

namespace regsir {

using ScalarFn = std::function<double(double)>;

// Relative interiority margin used everywhere a value must sit strictly
// inside the image of h: a target y is accepted only if it clears each
// endpoint by |endpoint| * kInteriorMargin (absolute kInteriorMargin when
// the endpoint is 0). Boundary coincidence is rejected.
inline constexpr double kInteriorMargin = 1e-12;

// Monotone pair (g, h) closing the contact-rate feedback loop
//     beta' = -alpha * (g(beta) - h(u * I)).
// Requirements: g strictly increasing and nonnegative on [0, inf);
// h strictly decreasing and strictly positive on [0, inf). The argument
// of h is the dimensionless perceived incidence u*I.
//
// dg/dh and the inverses are optional: when absent, derivatives fall back
// to central differences and inverses to bracketing bisection on
// [0, domain_hi]. Laws with analytic closed forms should supply them.
struct ContactRateLaw {
    ScalarFn g;
    ScalarFn h;
    ScalarFn dg;        // may be empty -> finite differences
    ScalarFn dh;        // may be empty -> finite differences
    ScalarFn g_inverse; // may be empty -> bisection
    ScalarFn h_inverse; // may be empty -> bisection
    double g_domain_hi = 1e12; // bisection bracket limit for g
    double h_domain_hi = 1e12; // bisection bracket limit for h
    std::string descriptor = "custom";

    double eval_dg(double x) const;
    double eval_dh(double x) const;

    // Inverse of g on [0, g_domain_hi]. Throws AssumptionError when y is
    // outside the attainable range.
    double invert_g(double y) const;
    // Inverse of h on [0, h_domain_hi], same error contract.
    double invert_h(double y) const;

    // Infimum of h over [0, h_domain_hi]; lower edge of the image of h.
    double h_floor() const;
};

// Saturating decreasing response h(x) = K / (1 + x) with identity g.
// h(0) = K, image (0, K]; all derivatives and inverses are analytic.
ContactRateLaw make_monod(double K);

// Solve f(x) = y for monotone f on [0, hi] by bisection, to relative
// tolerance kInteriorMargin on x. `increasing` declares the sense of
// monotonicity. Throws AssumptionError when y is not bracketed.
double bisect_inverse(const ScalarFn& f, double y, double hi, bool increasing);

// A4 interiority test: does g(gamma / c_s) lie strictly inside the image
// of h, with relative margin kInteriorMargin? `margin` is the signed
// relative clearance from the nearest image endpoint (negative when the
// test fails). A4 is what makes the endemic state exist.
struct A4Check {
    bool holds;
    double margin;
};
A4Check check_a4(const ContactRateLaw& law, double gamma, double c_s);

} // namespace regsir
