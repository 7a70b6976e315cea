#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "regsir/analysis.hpp"
#include "regsir/contact_law.hpp"
#include "regsir/dynamics.hpp"
#include "regsir/errors.hpp"
#include "regsir/params.hpp"

using namespace regsir;

namespace {

const ContactRateLaw kMonod = make_monod(0.0229);
const EpidemicParams kDesk{1.0, 0.091, 0.0679, 8e-4, 1.0};
constexpr double kCs = 17.5392;

// structurally identical to the Monod law but without the closed-form tag,
// to force the quadrature route
ContactRateLaw untagged_monod(double K) {
    ContactRateLaw law = make_monod(K);
    law.descriptor = "custom";
    return law;
}

} // namespace

TEST_CASE("assumption report for the Monod law") {
    const AssumptionReport ar = check_assumptions(kMonod, kDesk, kCs);
    CHECK(ar.a1);
    CHECK(ar.a2);
    CHECK(ar.a3);
    CHECK(ar.a4);
    CHECK(ar.a4_margin > 0.0);
    // push the set point outside the feedback image: only A4 breaks
    const AssumptionReport bad = check_assumptions(kMonod, kDesk, 1.0);
    CHECK(bad.a1);
    CHECK(bad.a2);
    CHECK(bad.a3);
    CHECK_FALSE(bad.a4);
}

TEST_CASE("disease-free state and its spectrum") {
    const auto dfe = disease_free_state(kMonod, kDesk, kCs);
    REQUIRE(dfe.has_value());
    CHECK(dfe->I == 0.0);
    CHECK(dfe->beta == doctest::Approx(0.0229).epsilon(1e-12));
    // upper-triangular Jacobian: eigenvalues c_s*K - gamma and -alpha
    std::vector<double> re = {dfe->eigenvalues[0].real(),
                              dfe->eigenvalues[1].real()};
    std::sort(re.begin(), re.end());
    CHECK(re[1] == doctest::Approx(kCs * 0.0229 - 0.091).epsilon(1e-12));
    CHECK(re[0] == doctest::Approx(-0.0679).epsilon(1e-12));
    // reference values for this instance
    CHECK(re[1] == doctest::Approx(0.3106).epsilon(2e-4));
    CHECK(dfe->classification == Stability::exp_unstable);
}

TEST_CASE("disease-free state is stable below the sustaining threshold") {
    // c_s K < gamma: no endemic state, stable extinction
    const double cs_small = 3.0;
    CHECK_FALSE(endemic_state(kMonod, kDesk, cs_small).has_value());
    const auto dfe = disease_free_state(kMonod, kDesk, cs_small);
    REQUIRE(dfe.has_value());
    CHECK(dfe->classification == Stability::exp_stable);
}

TEST_CASE("endemic state values and stability") {
    const auto es = endemic_state(kMonod, kDesk, kCs);
    REQUIRE(es.has_value());
    CHECK(es->beta == doctest::Approx(0.091 / kCs).epsilon(1e-14));
    const double I_e = (kCs * 0.0229 / 0.091 - 1.0) / 8e-4;
    CHECK(es->I == doctest::Approx(I_e).epsilon(1e-12));
    CHECK(es->classification == Stability::exp_stable);
    for (const auto& ev : es->eigenvalues) {
        CHECK(ev.real() < 0.0);
    }
    // the regulated level depends on gamma/c_s only, not on u
    EpidemicParams p2 = kDesk;
    p2.u = 5e-3;
    const auto es2 = endemic_state(kMonod, p2, kCs);
    REQUIRE(es2.has_value());
    CHECK(es2->beta == doctest::Approx(es->beta).epsilon(1e-14));
    CHECK(es2->I == doctest::Approx(es->I * 8e-4 / 5e-3).epsilon(1e-12));
}

TEST_CASE("endemic spectrum has negative real parts across random draws") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> un(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const double gamma = 0.02 * std::pow(25.0, un(rng));
        const double alpha = 0.005 * std::pow(100.0, un(rng));
        const double K = 5e-3 * std::pow(100.0, un(rng));
        const double m = 1.5 * std::pow(33.0, un(rng));
        const double u = 1e-5 * std::pow(1000.0, un(rng));
        const double c_s = m * gamma / K;
        const ContactRateLaw law = make_monod(K);
        const EpidemicParams p{1.0, gamma, alpha, u, 1.0};
        const auto es = endemic_state(law, p, c_s);
        REQUIRE(es.has_value());
        CHECK(es->eigenvalues[0].real() < 0.0);
        CHECK(es->eigenvalues[1].real() < 0.0);
        CHECK(es->classification == Stability::exp_stable);
    }
}

TEST_CASE("analytic Jacobian spectrum matches finite differences") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> un(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const double gamma = 0.03 + 0.3 * un(rng);
        const double alpha = 0.01 + 0.4 * un(rng);
        const double K = 0.01 + 0.2 * un(rng);
        const double m = 1.5 + 10.0 * un(rng);
        const double u = 1e-4 * std::pow(100.0, un(rng));
        const double c_s = m * gamma / K;
        const ContactRateLaw law = make_monod(K);
        const EpidemicParams p{1.0, gamma, alpha, u, 1.0};

        for (const bool at_dfe : {true, false}) {
            const auto st = at_dfe ? disease_free_state(law, p, c_s)
                                   : endemic_state(law, p, c_s);
            REQUIRE(st.has_value());
            // central differences of the planar vector field
            const double I0 = st->I, b0 = st->beta;
            const double dI = 1e-6 * (1.0 + std::fabs(I0));
            const double db = 1e-6 * (1.0 + std::fabs(b0));
            const auto f = [&](double I, double b) {
                return rhs_fast({I, b, c_s}, p, law);
            };
            const double j11 = (f(I0 + dI, b0).I - f(I0 - dI, b0).I) / (2 * dI);
            const double j12 = (f(I0, b0 + db).I - f(I0, b0 - db).I) / (2 * db);
            const double j21 =
                (f(I0 + dI, b0).beta - f(I0 - dI, b0).beta) / (2 * dI);
            const double j22 =
                (f(I0, b0 + db).beta - f(I0, b0 - db).beta) / (2 * db);
            const double tr = j11 + j22;
            const double det = j11 * j22 - j12 * j21;
            const double disc = tr * tr / 4.0 - det;
            std::array<std::complex<double>, 2> fd;
            if (disc >= 0.0) {
                fd = {std::complex<double>(tr / 2.0 + std::sqrt(disc), 0.0),
                      std::complex<double>(tr / 2.0 - std::sqrt(disc), 0.0)};
            } else {
                fd = {std::complex<double>(tr / 2.0, std::sqrt(-disc)),
                      std::complex<double>(tr / 2.0, -std::sqrt(-disc))};
            }
            auto ana = st->eigenvalues;
            auto by_real = [](const std::complex<double>& a,
                              const std::complex<double>& b) {
                return a.real() != b.real() ? a.real() < b.real()
                                            : a.imag() < b.imag();
            };
            std::sort(ana.begin(), ana.end(), by_real);
            std::sort(fd.begin(), fd.end(), by_real);
            const double scale =
                std::max({std::abs(ana[0]), std::abs(ana[1]), 1e-12});
            CHECK(std::abs(ana[0] - fd[0]) / scale <= 1e-6);
            CHECK(std::abs(ana[1] - fd[1]) / scale <= 1e-6);
        }
    }
}

TEST_CASE("outbreak threshold") {
    CHECK(r0(0.0229, kCs, 0.091) ==
          doctest::Approx(kCs * 0.0229 / 0.091).epsilon(1e-14));
    CHECK(r0(0.0229, kCs, 0.091) > 1.0);
    CHECK(r0(0.0229, 3.0, 0.091) < 1.0);
}

TEST_CASE("energy function vanishes only at the endemic point") {
    const auto es = endemic_state(kMonod, kDesk, kCs);
    REQUIRE(es.has_value());
    const double p_e = std::log(es->I);
    const LyapunovSample at_eq = lyapunov(p_e, es->beta, kMonod, kDesk, kCs);
    CHECK(std::fabs(at_eq.V) <= 1e-14);
    CHECK(std::fabs(at_eq.Vdot) <= 1e-14);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> un(-1.0, 1.0);
    for (int k = 0; k < 10000; ++k) {
        const double p = p_e + 3.0 * un(rng);
        const double beta = es->beta * std::pow(10.0, 0.5 * un(rng));
        const LyapunovSample s = lyapunov(p, beta, kMonod, kDesk, kCs);
        CHECK(s.V >= 0.0);
        CHECK(s.Vdot <= 1e-12);
        if (std::fabs(p - p_e) > 1e-3) {
            CHECK(s.V > 0.0);
        }
    }
}

TEST_CASE("closed-form energy agrees with quadrature") {
    const ContactRateLaw law = untagged_monod(0.0229);
    const auto es = endemic_state(kMonod, kDesk, kCs);
    REQUIRE(es.has_value());
    const double p_e = std::log(es->I);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> un(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const double p = p_e + 4.0 * un(rng);
        const double beta = es->beta * std::pow(10.0, 0.6 * un(rng));
        const LyapunovSample closed = lyapunov(p, beta, kMonod, kDesk, kCs);
        const LyapunovSample quad = lyapunov(p, beta, law, kDesk, kCs);
        CHECK(quad.V ==
              doctest::Approx(closed.V).epsilon(1e-9).scale(1.0));
        CHECK(quad.Vdot == doctest::Approx(closed.Vdot).epsilon(1e-12));
    }
}

TEST_CASE("no input step means no response") {
    const AdaptationResult r =
        adaptation_experiment(kDesk, kMonod, kCs, 8e-4, 8e-4, 60.0);
    CHECK(r.endemic_after_exists);
    CHECK(r.sup_beta_deviation <= 1e-9);
    CHECK(r.settle_time == 0.0);
    CHECK(r.terminal_beta_error <= 1e-9);
}

TEST_CASE("regulated level is restored after an input step") {
    IntegratorConfig cfg;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-13;
    const AdaptationResult r =
        adaptation_experiment(kDesk, kMonod, kCs, 8e-4, 8e-3, 400.0, cfg);
    CHECK(r.endemic_after_exists);
    CHECK(r.sup_beta_deviation > 1e-4); // the step is actually visible
    CHECK(std::isfinite(r.settle_time));
    CHECK(r.settle_time > 0.0);
    CHECK(r.terminal_beta_error <= 1e-6);
    CHECK(r.terminal_I ==
          doctest::Approx(r.I_e_after).epsilon(1e-3));
}

TEST_CASE("equal fold steps from different levels coincide exactly") {
    const FcdResult r =
        fcd_experiment(kDesk, kMonod, kCs, 4.0, 1e-3, 1e-3, 100.0);
    CHECK(r.sup_beta_diff == 0.0);
    CHECK(r.sup_scaled_I_diff == 0.0);
}

TEST_CASE("fold-change response is level-independent") {
    IntegratorConfig cfg;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-13;
    const FcdResult r =
        fcd_experiment(kDesk, kMonod, kCs, 2.0, 1e-4, 1e-2, 100.0, cfg);
    CHECK(r.sup_beta_diff <= 1e-8);
    CHECK(r.sup_scaled_I_diff <= 1e-8);
}

TEST_CASE("perception gain placement round trips") {
    for (double istar : {100.0, 4267.0, 2e5}) {
        const double u = assign_u(istar, kMonod, kDesk, kCs);
        CHECK(u > 0.0);
        EpidemicParams p = kDesk;
        p.u = u;
        const auto es = endemic_state(kMonod, p, kCs);
        REQUIRE(es.has_value());
        CHECK(es->I == doctest::Approx(istar).epsilon(1e-12));
    }
    // unreachable target: set point outside the feedback image
    CHECK_THROWS_AS((void)assign_u(100.0, kMonod, kDesk, 1.0),
                    AssumptionError);
}

TEST_CASE("reduced model error shrinks with the scale separation") {
    EpidemicParams p{1e-4, 0.091, 0.0679, 8e-4, 1e-4}; // c_tilde = 1
    const std::vector<double> eps = {2e-4, 1e-4};
    // T_slow chosen so even the largest-epsilon run (horizon T_slow/eps
    // = 250 days) extends well past the ~74-day initial transient that
    // the error sups exclude.
    const std::vector<TikhonovPoint> pts =
        tikhonov_sweep(p, kMonod, 8.0, eps, 0.05);
    REQUIRE(pts.size() == 2);
    for (const auto& q : pts) {
        CHECK(std::isfinite(q.err_S));
        CHECK(q.err_S > 0.0);
        CHECK(q.err_I > 0.0);
        CHECK(q.err_beta > 0.0);
    }
    // halving epsilon reduces every component error
    CHECK(pts[1].err_S < pts[0].err_S);
    CHECK(pts[1].err_I < pts[0].err_I);
    CHECK(pts[1].err_beta < pts[0].err_beta);
}

TEST_CASE("sensitivity rank collapses without dynamics") {
    const FitParams fp{0.071, 0.0575, 0.0104, 0.8e-4, 400.0, 0.0104};
    const IdentifiabilityResult r = identifiability_rank(fp, 19.45, 0);
    CHECK(r.rank <= 2);
}

TEST_CASE("all six parameters are visible in a dynamic window") {
    const FitParams fp{0.071, 0.0575, 0.0104, 0.8e-4, 400.0, 0.0104};
    const IdentifiabilityResult r = identifiability_rank(fp, 19.45, 200);
    CHECK(r.rank == 6);
    REQUIRE(r.singular_values.size() == 6);
    CHECK(r.singular_values[5] / r.singular_values[0] > 1e-8);
}
