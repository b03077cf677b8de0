#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "ned/dichotomy.hpp"
#include "ned/errors.hpp"
#include "ned/gallery.hpp"
#include "ned/parabolic.hpp"
#include "support.hpp"

using namespace ned;

namespace {

DiscreteLaplacian dirichlet(int N) { return discretize(Grid1D{1.0, N}, BoundaryCondition{}); }

CoefficientField constant_g(double c) {
    return CoefficientField::separable([c](double) { return c; }, [c](double t, double s) { return c * (t - s); });
}

CoefficientField barreira_g() {
    return CoefficientField::separable([](double t) { return barreira_coefficient(1, 2, t); },
                                       [](double t, double s) { return barreira_exponent(1, 2, t, s); });
}

double max_abs(const Eigen::MatrixXd& M) { return M.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("dirichlet laplacian N=3") {
    const auto D = dirichlet(3);
    Eigen::MatrixXd ref(3, 3);
    ref << -2, 1, 0, 1, -2, 1, 0, 1, -2;
    ref *= 16;
    CHECK(max_abs(D.A - ref) <= 1e-12);
    CHECK(D.lambda1() == doctest::Approx(-9.3725830020304792192).epsilon(1e-14));
    CHECK(D.eigenvalues(1) == doctest::Approx(-32).epsilon(1e-14));
    CHECK(dirichlet_eigenvalue(1, Grid1D{1.0, 3}) == doctest::Approx(-16 * (2 - std::sqrt(2.0))));
}

TEST_CASE("dirichlet N=31 eigenvalues") {
    const auto D = dirichlet(31);
    CHECK(D.lambda1() == doctest::Approx(-9.8616797753407769706).epsilon(1e-13));
    CHECK(D.eigenvalues(1) == doctest::Approx(-39.35174573418404019).epsilon(1e-13));
}

TEST_CASE("first eigenvalue decreases toward -pi^2") {
    double prev = 0;
    for (int N : {3, 7, 15, 31}) {
        const double l = dirichlet(N).lambda1();
        CHECK(l < prev);
        CHECK(l > -M_PI * M_PI);
        prev = l;
    }
    CHECK(std::abs(prev + M_PI * M_PI) < 0.01);
}

TEST_CASE("neumann and robin") {
    for (int N : {3, 8, 20}) {
        const auto D = discretize(Grid1D{1.0, N}, BoundaryCondition{BoundaryKind::Neumann, 0});
        CHECK((D.A.rowwise().sum()).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(std::abs(D.lambda1()) <= 1e-9);
        const Eigen::MatrixXd S = D.symmetrized();
        CHECK(max_abs(S - S.transpose()) <= 1e-9 * max_abs(S));
    }
    const auto R = discretize(Grid1D{1.0, 10}, BoundaryCondition{BoundaryKind::Robin, 1.0});
    CHECK(R.lambda1() < 0);
    CHECK_THROWS_AS(discretize(Grid1D{1.0, 0}, BoundaryCondition{}), ArgumentError);
}

TEST_CASE("pure diffusion") {
    const auto D = dirichlet(7);
    const auto p = pde_process(D, constant_g(0));
    CHECK(max_abs(p.matrix(1.3, 0.2) - (D.A * 1.1).exp()) <= 1e-10);
    const Eigen::VectorXd e1 = D.modes.col(0);
    const Eigen::VectorXd y = p.apply(0.7, 0.2, e1);
    CHECK((y - std::exp(D.lambda1() * 0.5) * e1).norm() <= 1e-10);
}

TEST_CASE("separable coefficient factors") {
    const auto D = dirichlet(15);
    const auto p = pde_process(D, barreira_g());
    for (auto [t, s] : std::vector<std::pair<double, double>>{{1, 0}, {3.5, 0.5}, {0, -4}}) {
        const Eigen::MatrixXd ref = D.exp(t - s) * std::exp(barreira_exponent(1, 2, t, s));
        CHECK(max_abs(p.matrix(t, s) - ref) <= 1e-10 * std::max(1.0, max_abs(ref)));
        for (int k = 0; k < 3; ++k) {
            const Eigen::VectorXd m = D.modes.col(k);
            const double f = p.apply(t, s, m).dot(m) / m.dot(m);
            const double lead = std::exp(D.lambda1() * (t - s) + barreira_exponent(1, 2, t, s));
            const double ref_k = std::exp(D.eigenvalues(k) * (t - s) + barreira_exponent(1, 2, t, s));
            CHECK(std::abs(f - ref_k) <= 1e-10 * lead);
        }
    }
}

TEST_CASE("spatially varying coefficient matches a dense exponential") {
    const auto D = dirichlet(31);
    const auto a = CoefficientField::general([](double, double x) { return std::sin(M_PI * x); });
    const auto p = pde_process(D, a);
    Eigen::MatrixXd G = D.A;
    for (int i = 0; i < D.size(); ++i) G(i, i) += std::sin(M_PI * D.x[i]);
    const Eigen::MatrixXd ref = G.exp();
    CHECK(max_abs(p.matrix(1, 0) - ref) <= 1e-8);
    CHECK(p.matrix(1, 0).minCoeff() >= 0);
}

TEST_CASE("nonnegative exponential") {
    const auto D = dirichlet(9);
    const Eigen::MatrixXd E = nonnegative_expm(D.A, 0.3);
    CHECK(E.minCoeff() >= 0);
    CHECK(max_abs(E - (D.A * 0.3).exp()) <= 1e-12);
}

TEST_CASE("variation of constants") {
    const auto D = dirichlet(7);
    const Eigen::VectorXd u0 = Eigen::VectorXd::LinSpaced(D.size(), 0.1, 1.0);
    const std::vector<double> times{0.25, 0.5, 1.0, 2.0};
    const auto zero = [&](double) { return Eigen::VectorXd::Zero(D.size()).eval(); };
    CHECK(variation_of_constants_check(D, constant_g(0), zero, 0, times, u0).residual <= 1e-10);
    const auto one = [&](double) { return Eigen::VectorXd::Ones(D.size()).eval(); };
    CHECK(variation_of_constants_check(D, constant_g(0), one, 0, times, u0).residual <= 1e-8);
    const auto decay = [&](double t) { return (std::exp(-t) * Eigen::VectorXd::Ones(D.size())).eval(); };
    CHECK(variation_of_constants_check(D, constant_g(-1), decay, 0, times, u0).residual <= 1e-8);
    CHECK(variation_of_constants_check(D, barreira_g(), decay, 0, times, u0).residual <= 1e-8);
    CHECK_THROWS_AS(variation_of_constants_check(D, constant_g(0), one, 1, {0.5}, u0), ArgumentError);
}

TEST_CASE("closed-form forcing solution") {
    // a = 0, b = 1: u(t) = e^{At}u0 + A^{-1}(e^{At} - I)1
    const auto D = dirichlet(5);
    const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(D.size());
    const Eigen::MatrixXd E = D.exp(1.0);
    const Eigen::VectorXd exact = D.A.fullPivLu().solve((E - Eigen::MatrixXd::Identity(D.size(), D.size())) *
                                                         Eigen::VectorXd::Ones(D.size()));
    const auto one = [&](double) { return Eigen::VectorXd::Ones(D.size()).eval(); };
    const Flow f = semilinear_flow(D, constant_g(0), [](double, double, double) { return 0.0; },
                                   [](double, double) { return 1.0; });
    CHECK((f.advance(1.0, 0.0, u0) - exact).lpNorm<Eigen::Infinity>() <= 1e-5);
    CHECK(variation_of_constants_check(D, constant_g(0), one, 0, {1.0}, u0).residual <= 1e-8);
}

TEST_CASE("principal bundle of pure diffusion") {
    const auto D = dirichlet(3);
    const auto p = pde_process(D, constant_g(0));
    const auto B = principal_bundle(p, 0, 4, 0.05);
    REQUIRE(!B.e.empty());
    Eigen::VectorXd sine = D.modes.col(0).cwiseAbs();
    sine.normalize();
    for (const auto& e : B.e) CHECK((e - sine).norm() <= 1e-8);
    for (double lc : B.log_c) CHECK(lc == doctest::Approx(D.lambda1() * 0.05).epsilon(1e-8));
    const double gap = D.lambda1() - D.eigenvalues(1);
    CHECK(gap == doctest::Approx(22.627416997969522));
    CHECK(test::close_rel(B.nu_sep, gap, 0.10));
}

TEST_CASE("separable coefficient leaves the bundle direction fixed") {
    const auto D = dirichlet(7);
    const auto B = principal_bundle(pde_process(D, barreira_g()), 0, 4, 0.05);
    for (std::size_t k = 1; k < B.e.size(); ++k) CHECK((B.e[k] - B.e[0]).norm() <= 1e-8);
}

TEST_CASE("transfer of a scalar certificate") {
    const auto D = dirichlet(31);
    const auto g = barreira_g();
    const auto p = pde_process(D, g);
    const auto B = principal_bundle(p, 0, 20, 0.05);
    DichotomyCertificate sc;
    sc.kind = Kind::II;
    sc.domain = TimeDomain::Plus;
    sc.M = std::exp(2.0);
    sc.stable = {3, 2};
    const auto tr = scalar_to_pde_transfer(sc, D, g, B);
    CHECK(tr.predicted.stable.rate == doctest::Approx(3 + 9.8616797753407769706));
    CHECK(tr.predicted.stable.growth == 2);
    CHECK(check_certificate(p, tr.predicted, GridSpec::horizon(TimeDomain::Plus, 20, 0.5)).max_violation <= 1e-6);

    DichotomyCertificate u;
    u.kind = Kind::II;
    u.domain = TimeDomain::Full;
    u.stable = {1, 0};
    const auto c1 = constant_g(-1);
    const auto tu = scalar_to_pde_transfer(u, D, c1, principal_bundle(pde_process(D, c1), 0, 4, 0.05));
    CHECK(tu.predicted.stable.rate == doctest::Approx(1 + 9.8616797753407769706));
    CHECK(tu.predicted.stable.growth == 0);

    const auto gen = CoefficientField::general([](double, double x) { return x; });
    CHECK_THROWS_AS(scalar_to_pde_transfer(sc, D, gen, B), InapplicableError);
}

TEST_CASE("adjoint process") {
    const auto D = dirichlet(7);
    const auto p = pde_process(D, barreira_g());
    const auto q = adjoint_process(p);
    const auto qq = adjoint_process(q);
    for (auto [t, s] : std::vector<std::pair<double, double>>{{1, 0}, {2, -1}, {0.5, 0.25}}) {
        CHECK(max_abs(q.matrix(t, s) - p.matrix(-s, -t).transpose()) <= 1e-12 * max_abs(p.matrix(-s, -t)));
        CHECK(max_abs(qq.matrix(t, s) - p.matrix(t, s)) <= 1e-12 * max_abs(p.matrix(t, s)));
        CHECK(test::close_rel(operator_norm(q, t, s), operator_norm(p, -s, -t), 1e-12));
    }
    const auto sym = pde_process(D, constant_g(-0.5));
    const auto symq = adjoint_process(sym);
    CHECK(max_abs(symq.matrix(1.5, 0.5) - sym.matrix(1.5, 0.5)) <= 1e-12);
}

TEST_CASE("attractor demo without forcing") {
    const auto D = dirichlet(7);
    ParabolicDemoConfig cfg;
    cfg.scalar.kind = Kind::II;
    cfg.scalar.domain = TimeDomain::Full;
    cfg.scalar.M = std::exp(2.0);
    cfg.scalar.stable = {3, 2};
    cfg.lambda = -1;
    cfg.K = 4;
    cfg.seeds = 3;
    const auto r = parabolic_attractor_demo(D, barreira_g(), [](double) { return 0.0; }, cfg);
    for (const auto& [t, cloud] : r.sections.sections) {
        REQUIRE(cloud.size() == 1);
        CHECK(cloud[0].lpNorm<Eigen::Infinity>() <= 1e-6);
    }
    CHECK(r.containment.min_margin >= -1e-6);
    CHECK(r.bnorm == 0);
}
