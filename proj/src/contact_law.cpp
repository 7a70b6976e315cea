#include "regsir/contact_law.hpp"

#include <cmath>

namespace regsir {

namespace {

// Central difference with relative step; used only when a law carries no
// analytic derivative.
double fd_derivative(const ScalarFn& f, double x) {
    const double h = 1e-7 * (1.0 + std::abs(x));
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

} // namespace

double ContactRateLaw::eval_dg(double x) const {
    return dg ? dg(x) : fd_derivative(g, x);
}

double ContactRateLaw::eval_dh(double x) const {
    return dh ? dh(x) : fd_derivative(h, x);
}

double bisect_inverse(const ScalarFn& f, double y, double hi, bool increasing) {
    if (!std::isfinite(y) || !(hi > 0.0)) {
        throw AssumptionError("bisect_inverse: non-finite target or empty domain");
    }
    double lo = 0.0;
    double flo = f(lo);
    double fhi = f(hi);
    // Orient so the bracket test is flo <= y <= fhi.
    if (!increasing) {
        std::swap(flo, fhi);
    }
    const bool bracketed = (flo <= y && y <= fhi);
    if (!bracketed) {
        throw AssumptionError("bisect_inverse: target outside attainable range");
    }
    double a = lo, b = hi;
    // 200 halvings push the interval below any representable relative
    // tolerance; the loop exits early on the width test.
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (a + b);
        const double fm = f(mid);
        const bool go_right = increasing ? (fm < y) : (fm > y);
        if (go_right) {
            a = mid;
        } else {
            b = mid;
        }
        if (b - a <= kInteriorMargin * std::max(1.0, std::abs(a))) {
            break;
        }
    }
    return 0.5 * (a + b);
}

double ContactRateLaw::invert_g(double y) const {
    if (g_inverse) {
        return g_inverse(y);
    }
    return bisect_inverse(g, y, g_domain_hi, /*increasing=*/true);
}

double ContactRateLaw::invert_h(double y) const {
    if (h_inverse) {
        return h_inverse(y);
    }
    return bisect_inverse(h, y, h_domain_hi, /*increasing=*/false);
}

double ContactRateLaw::h_floor() const {
    return h(h_domain_hi);
}

ContactRateLaw make_monod(double K) {
    if (!(K > 0.0) || !std::isfinite(K)) {
        throw InvalidInputError("make_monod: K must be positive and finite");
    }
    ContactRateLaw law;
    law.g = [](double b) { return b; };
    law.h = [K](double x) { return K / (1.0 + x); };
    law.dg = [](double) { return 1.0; };
    law.dh = [K](double x) {
        const double d = 1.0 + x;
        return -K / (d * d);
    };
    law.g_inverse = [](double y) {
        if (y < 0.0) {
            throw AssumptionError("monod g_inverse: negative target");
        }
        return y;
    };
    law.h_inverse = [K](double y) {
        if (!(y > 0.0) || y > K) {
            throw AssumptionError("monod h_inverse: target outside (0, K]");
        }
        return K / y - 1.0;
    };
    law.descriptor = "monod";
    return law;
}

A4Check check_a4(const ContactRateLaw& law, double gamma, double c_s) {
    if (!(gamma > 0.0) || !(c_s > 0.0)) {
        throw InvalidInputError("check_a4: gamma and c_s must be positive");
    }
    const double v = law.g(gamma / c_s);
    const double hi = law.h(0.0);    // supremum of image(h)
    const double lo = law.h_floor(); // infimum of image(h)
    // Each endpoint must be cleared by 1e-12 relative to itself; boundary
    // coincidence therefore fails (endemic and disease-free merge there).
    A4Check out;
    out.holds = (hi - v > kInteriorMargin * std::abs(hi)) &&
                (v - lo > kInteriorMargin * std::abs(lo));
    const double scale = std::max(std::abs(hi), 1e-300);
    out.margin = std::min(hi - v, v - lo) / scale;
    return out;
}

} // namespace regsir
