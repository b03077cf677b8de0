#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ned/dichotomy.hpp"
#include "ned/errors.hpp"
#include "ned/gallery.hpp"
#include "support.hpp"

using namespace ned;

namespace {

const DichotomyClaim* find_claim(const GalleryEntry& e, Kind k, TimeDomain d, ProjectionKind p = ProjectionKind::Zero) {
    for (const auto& c : e.claims)
        if (c.certificate.kind == k && c.certificate.domain == d && c.certificate.projection == p) return &c;
    return nullptr;
}

std::vector<std::pair<double, double>> pairs(double lo, double hi, double step) {
    std::vector<std::pair<double, double>> out;
    for (double s = lo; s <= hi; s += step)
        for (double t = s; t <= hi; t += step) out.emplace_back(t, s);
    return out;
}

}  // namespace

TEST_CASE("barreira (1,2) claims") {
    const auto e = make_barreira(1, 2);
    const auto* ii = find_claim(e, Kind::II, TimeDomain::Plus);
    REQUIRE(ii);
    CHECK(ii->certificate.stable == ExponentPair{3, 2});
    CHECK(ii->certificate.M == doctest::Approx(std::exp(2.0)));
    const auto* i = find_claim(e, Kind::I, TimeDomain::Plus);
    REQUIRE(i);
    CHECK(i->certificate.stable == ExponentPair{1, 2});
}

TEST_CASE("barreira bound e^{2a - (b+a)(t-s) + 2at} on t >= s >= 0") {
    const double a = 1, b = 2;
    const auto p = make_barreira(a, b).process;
    for (auto [t, s] : pairs(0, 30, 0.37))
        CHECK(p.log_scalar(t, s) <= 2 * a - (b + a) * (t - s) + 2 * a * t + 1e-12);
}

TEST_CASE("barreira with b < a has no b > a claims") {
    const auto e = make_barreira(2, 1);
    CHECK(e.claims.size() == 2);
    CHECK(find_claim(e, Kind::I, TimeDomain::Plus) == nullptr);
    CHECK(find_claim(e, Kind::II, TimeDomain::Full) == nullptr);
    CHECK_THROWS_AS(make_barreira(0, 1), ArgumentError);
}

TEST_CASE("barreira coefficient is the derivative of the exponent") {
    for (double t = -5; t <= 5; t += 0.7) {
        const double h = 1e-5;
        const double d = (barreira_exponent(1, 2, t + h, 0) - barreira_exponent(1, 2, t - h, 0)) / (2 * h);
        CHECK(d == doctest::Approx(barreira_coefficient(1, 2, t)).epsilon(1e-8));
    }
}

TEST_CASE("sign switch: bound, values and claims") {
    const auto e = make_sign_switch();
    for (auto [t, s] : pairs(-15, 15, 0.43)) CHECK(e.process.log_scalar(t, s) <= -(t - s) + 2 * std::abs(t) + 1e-12);
    CHECK(propagate(e.process, 2.0, 1.0, 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
    CHECK(propagate(e.process, 0.0, 0.0, 1.0) == 1.0);
    const auto* i = find_claim(e, Kind::I, TimeDomain::Full);
    REQUIRE(i);
    CHECK_FALSE(i->holds);
    CHECK(e.rejection_windows.size() == 3);
}

TEST_CASE("smooth limits: M_eps bound on sampled pairs, NEDI claim false") {
    const double eps = 0.1;
    const auto e = make_smooth_limits(1.0, eps);
    const auto* ii = find_claim(e, Kind::II, TimeDomain::Full);
    REQUIRE(ii);
    CHECK(ii->holds);
    CHECK(ii->certificate.stable == ExponentPair{1 - eps, 2});
    const double lnM = std::log(ii->certificate.M);
    // exact integral of tanh
    for (auto [t, s] : pairs(-12, 12, 0.5)) {
        const double ex = std::log(std::cosh(t)) - std::log(std::cosh(s));
        CHECK(ex <= lnM - (1 - eps) * (t - s) + 2 * std::abs(t) + 1e-12);
    }
    const auto* i = find_claim(e, Kind::I, TimeDomain::Full);
    REQUIRE(i);
    CHECK_FALSE(i->holds);
    CHECK_THROWS_AS(make_smooth_limits(1.0, 1.5), ArgumentError);
}

TEST_CASE("smooth limits: coefficient limits through the propagator") {
    const auto p = make_smooth_limits(1.0).process;
    // short steps approximate exp(f(t) h); f(0) = 0, f(+-10) ~ +-1
    const double h = 1e-3;
    CHECK(std::log(p.matrix(h / 2, -h / 2)(0, 0)) / h == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(std::log(p.matrix(10 + h / 2, 10 - h / 2)(0, 0)) / h == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(std::log(p.matrix(-10 + h / 2, -10 - h / 2)(0, 0)) / h == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("factorial steps") {
    const auto e = make_factorial_steps(4);
    const auto& p = e.process;
    CHECK(propagate(p, 1.0, 0.5, 1.0) == 1.0);
    CHECK(propagate(p, 6.0, 2.0, 1.0) == doctest::Approx(std::exp(4.0)).epsilon(1e-14));
    for (auto [t, s] : pairs(0, 120, 1.7)) CHECK(p.log_scalar(t, s) <= (t - s) + 1e-12);
    CHECK(factorial_step_coefficient(0.5) == 0.0);
    CHECK(factorial_step_coefficient(1.5) == -1.0);
    CHECK(factorial_step_coefficient(3.0) == 1.0);
    CHECK(factorial_step_coefficient(10.0) == -3.0);
    CHECK_THROWS_AS(p.matrix(1.0, -1.0), ArgumentError);
    CHECK_THROWS_AS(make_factorial_steps(1), ArgumentError);
}

TEST_CASE("piecewise barreira exponent pair") {
    const auto e = make_piecewise_barreira(1.5, 3, 0.2, 0.45);
    const auto* ii = find_claim(e, Kind::II, TimeDomain::Full);
    REQUIRE(ii);
    CHECK(ii->certificate.stable.rate == doctest::Approx(0.25));
    CHECK(ii->certificate.stable.growth == doctest::Approx(3.0));
    CHECK(propagate(e.process, 1.2, 1.2, 2.0) == 2.0);
}

TEST_CASE("holding gallery claims pass on their canonical grids") {
    for (const auto& name : gallery_names()) {
        const auto e = gallery_entry(name);
        for (const auto& c : e.claims) {
            if (!c.holds) continue;
            const auto r = check_certificate(e.process, c.certificate, e.canonical_grid.restricted(c.certificate.domain));
            INFO(name, " ", to_string(c.certificate.kind), " ", to_string(c.certificate.domain));
            CHECK(r.max_violation <= 1e-9);
        }
    }
}

TEST_CASE("unknown gallery entry") { CHECK_THROWS_AS(gallery_entry("nope"), ArgumentError); }
