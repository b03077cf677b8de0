#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ned/errors.hpp"
#include "ned/gallery.hpp"
#include "ned/parallel.hpp"
#include "ned/process.hpp"
#include "support.hpp"

using namespace ned;
using ned::test::close_rel;
constexpr double pi = std::numbers::pi;

TEST_CASE("barreira propagate and norm match the 40-digit oracle") {
    const auto p = make_barreira(1, 2).process;
    CHECK(close_rel(propagate(p, pi, 0.0, 1.0), 8.069951757030459923920503e-5, 1e-13));
    CHECK(close_rel(operator_norm(p, pi, 0.0), 8.069951757030459923920503e-5, 1e-13));
    CHECK(close_rel(std::exp(log_operator_norm(p, pi, 0.0)), 8.069951757030459923920503e-5, 1e-13));
}

TEST_CASE("identity cases") {
    const auto p = make_barreira(1, 2).process;
    CHECK(propagate(p, 1.5, 1.5, 3.0) == 3.0);
    CHECK(operator_norm(p, 1.5, 1.5) == 1.0);
    const auto q = test::diagonal(-1, 1);
    Eigen::Vector2d x(0.3, -2);
    CHECK((propagate(q, 2.0, 2.0, x) - x).norm() == 0.0);
}

TEST_CASE("sign switch: S0(1,-1)1 = e^{s+t} = 1") {
    const auto p = make_sign_switch().process;
    CHECK(close_rel(propagate(p, 1.0, -1.0, 1.0), 1.0, 1e-15));
    CHECK(close_rel(propagate(p, 2.0, -0.5, 1.0), std::exp(1.5), 1e-14));
}

TEST_CASE("diagonal process norm at t-s=1 is e") {
    const auto p = test::diagonal(-1, 1);
    CHECK(close_rel(operator_norm(p, 1.0, 0.0), std::exp(1.0), 1e-14));
}

TEST_CASE("dual of the diagonal process swaps the rates") {
    const auto d = dual_process(test::diagonal(-1, 1));
    const Eigen::MatrixXd D = d.matrix(1.3, 0.2);
    CHECK(close_rel(D(0, 0), std::exp(1.1), 1e-14));
    CHECK(close_rel(D(1, 1), std::exp(-1.1), 1e-14));
    CHECK(std::abs(D(0, 1)) + std::abs(D(1, 0)) == 0.0);
}

TEST_CASE("scalar barreira dual: T(t,s) = S(s,t)") {
    const auto d = dual_process(make_barreira(1, 2).process);
    // T(pi,0) = S(0,pi) = e^{3 pi}
    CHECK(close_rel(operator_norm(d, pi, 0.0), 12391.64780791669748150654, 1e-13));
    CHECK(close_rel(d.matrix(0.0, pi)(0, 0), 8.069951757030459923920503e-5, 1e-13));
}

TEST_CASE("dual of dual reproduces the process on sampled pairs") {
    std::mt19937_64 rng(7);
    Eigen::MatrixXd V(2, 2);
    V << 1, 0.4, -0.3, 1;
    const auto p = planted_process(TimeDomain::Full, V, {0.0}, {{-2, -1}, {0.5, 1.5}}, {false, true});
    const auto dd = dual_process(dual_process(p));
    std::uniform_real_distribution<double> U(-3, 3);
    double worst = 0;
    for (int k = 0; k < 50; ++k) {
        const double t = U(rng), s = U(rng);
        const Eigen::VectorXd x = test::random_vector(rng, 2);
        const Eigen::VectorXd a = propagate(p, t, s, x), b = propagate(dd, t, s, x);
        worst = std::max(worst, (a - b).norm() / (1 + a.norm()));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("dual of a non-invertible process is a contract error") {
    EvolutionProcess p(1, TimeDomain::Full, false, Backend::ClosedForm,
                       [](double t, double s) { return Eigen::MatrixXd::Constant(1, 1, std::exp(s - t)); });
    CHECK_THROWS_AS(dual_process(p), ContractError);
    CHECK_THROWS_AS(p.matrix(0.0, 1.0), ArgumentError);
}

TEST_CASE("domain and direction errors") {
    const auto p = make_factorial_steps(4).process;
    CHECK_THROWS_AS(p.matrix(1.0, -1.0), ArgumentError);
    const auto q = make_barreira(1, 2).process;
    CHECK_THROWS_AS(operator_norm(q, 0.0, 1.0), ArgumentError);
    CHECK_THROWS_AS(q.matrix(std::nan(""), 0.0), ArgumentError);
}

TEST_CASE("constant process on grid {0,1,2}: six exact samples") {
    const auto p = test::exponential(-2);
    auto g = GridSpec::from_mesh({0, 1, 2});
    g.unstable = false;
    const auto ng = sample_norm_grid(p, nullptr, g);
    REQUIRE(ng.samples.size() == 6);
    for (const auto& s : ng.samples) CHECK(s.log_norm == doctest::Approx(-2 * (s.t - s.s)).epsilon(1e-15));
}

TEST_CASE("barreira on [0,10] step 0.5: 231 finite samples") {
    const auto p = make_barreira(1, 2).process;
    const auto ng = sample_norm_grid(p, nullptr, GridSpec::uniform(0, 10, 0.5));
    CHECK(ng.samples.size() == 231);
    CHECK(ng.poisoned.empty());
    for (const auto& s : ng.samples) CHECK(std::isfinite(s.log_norm));
}

TEST_CASE("empty grid gives an empty norm grid") {
    const auto ng = sample_norm_grid(test::exponential(-1), nullptr, GridSpec{});
    CHECK(ng.samples.empty());
    CHECK(ng.poisoned.empty());
}

TEST_CASE("grids always contain 0 when they straddle it") {
    const auto g = GridSpec::uniform(-1.3, 2.1, 0.7);
    CHECK(std::find(g.mesh.begin(), g.mesh.end(), 0.0) != g.mesh.end());
    CHECK(std::is_sorted(g.mesh.begin(), g.mesh.end()));
}

TEST_CASE("blow-up becomes poison markers, not an abort") {
    const auto p = test::diagonal(40.0, -1.0);
    const auto ng = sample_norm_grid(p, nullptr, GridSpec::uniform(0, 10, 1));
    CHECK(!ng.poisoned.empty());
    CHECK(!ng.samples.empty());
    for (const auto& s : ng.samples) CHECK(s.log_norm <= std::log(1e150));
}

TEST_CASE("closed-form scalar logs stay exact beyond the overflow guard") {
    const auto p = test::exponential(40.0);
    CHECK(log_operator_norm(p, 10.0, 0.0) == 400.0);
}

TEST_CASE("cocycle residual: closed-form and integrated backends") {
    std::vector<double> times;
    for (double t = -4; t <= 4; t += 0.5) times.push_back(t);
    Eigen::VectorXd x1 = Eigen::VectorXd::Constant(1, 0.7);
    CHECK(cocycle_residual(make_barreira(1, 2).process, times, x1) <= 1e-9);
    CHECK(cocycle_residual(make_sign_switch().process, times, x1) <= 1e-9);
    const auto ode = make_smooth_limits(1.0).process;
    CHECK(cocycle_residual(ode, times, x1) <= 10 * ode.tolerance());
    Eigen::MatrixXd A(2, 2);
    A << -1, 2, 0.5, -0.3;
    const auto pc = piecewise_constant_process(TimeDomain::Full, {-1.0, 1.0}, {A, -A, A.transpose()});
    CHECK(cocycle_residual(pc, times, Eigen::Vector2d(1, -0.5)) <= 1e-9);
}

TEST_CASE("invertibility: S(s,t)S(t,s)x = x") {
    std::mt19937_64 rng(11);
    Eigen::MatrixXd A(2, 2);
    A << 0.2, 1, -1, -0.4;
    const auto pc = piecewise_constant_process(TimeDomain::Full, {0.0}, {A, 2 * A});
    const auto ode = EvolutionProcess::linear_ode(2, TimeDomain::Full, [A](double) { return A; });
    for (const auto* p : {&pc, &ode}) {
        double worst = 0;
        for (int k = 0; k < 20; ++k) {
            std::uniform_real_distribution<double> U(-2, 2);
            const double t = U(rng), s = U(rng);
            const Eigen::VectorXd x = test::random_vector(rng, 2);
            worst = std::max(worst, (propagate(*p, s, t, propagate(*p, t, s, x)) - x).norm());
        }
        CHECK(worst <= 100 * p->tolerance());
    }
}

TEST_CASE("integrated constant ODE agrees with the matrix exponential") {
    Eigen::MatrixXd A(2, 2);
    A << -1, 0.5, 0, -3;
    const auto ode = EvolutionProcess::linear_ode(2, TimeDomain::Full, [A](double) { return A; });
    const auto pc = piecewise_constant_process(TimeDomain::Full, {}, {A});
    const Eigen::MatrixXd a = ode.matrix(7.5, -2.0), b = pc.matrix(7.5, -2.0);
    CHECK(((a - b).cwiseAbs().array() <= 1e-9 * b.cwiseAbs().array() + 1e-300).all());
}

TEST_CASE("deep decay keeps relative accuracy in the integrated backend") {
    const auto ode = make_smooth_limits(1.0).process;
    // int_{-40}^{0.75} tanh = ln cosh(0.75) - ln cosh(40)
    const double exact = std::log(std::cosh(0.75)) - std::log(std::cosh(40.0));
    CHECK(log_operator_norm(ode, 0.75, -40.0) == doctest::Approx(exact).epsilon(1e-8));
}

TEST_CASE("planted split evaluator matches the projected product where it is accurate") {
    Eigen::MatrixXd V(2, 2);
    V << 1, 0.5, 0.2, 1;
    const auto p = planted_process(TimeDomain::Full, V, {0.0}, {{-2, -1}, {1, 1}}, {false, true});
    const auto fam = p.split_family();
    REQUIRE(fam);
    const ProjectionFamily copy = *fam;
    for (auto [t, s] : {std::pair{1.0, -1.0}, std::pair{0.5, 0.0}}) {
        const Eigen::MatrixXd prod = p.matrix(t, s) * fam->stable(s);
        CHECK((prod - p.split(t, s, Part::Stable)).norm() <= 1e-13 * (1 + prod.norm()));
        CHECK(log_operator_norm(p, t, s, &copy) == doctest::Approx(std::log(spectral_norm(prod))));
    }
    // far out the product cancels; the split keeps the e^{-40} scale
    const double l = log_operator_norm(p, 20.0, -20.0, &copy, Part::Stable);
    CHECK(l == doctest::Approx(-60.0 + std::log(spectral_norm(V * Eigen::Vector2d(1, 0).asDiagonal() *
                                                              V.inverse()))).epsilon(1e-12));
}

TEST_CASE("projection identities are shared by copies and paired by duality") {
    const auto P = ProjectionFamily::zero(2);
    const auto Q = P;
    CHECK(P.identity() == Q.identity());
    const auto D = P.dual();
    CHECK(D.kind() == ProjectionKind::Identity);
    CHECK(D.dual().identity() == P.identity());
    CHECK(ProjectionFamily::zero(2).identity() != P.identity());
}

TEST_CASE("spectral norm: closed forms for small sizes, power iteration for larger") {
    std::mt19937_64 rng(3);
    for (int n : {2, 3, 5, 8}) {
        Eigen::MatrixXd A(n, n);
        for (int i = 0; i < n * n; ++i) A.data()[i] = std::normal_distribution<double>()(rng);
        const double exact = Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()(0);
        CHECK(spectral_norm(A) == doctest::Approx(exact).epsilon(1e-11));
    }
}

TEST_CASE("grid sampling is independent of the worker count") {
    const auto p = make_smooth_limits(1.0).process;
    const auto g = GridSpec::uniform(-5, 5, 0.5);
    set_thread_count(1);
    const auto a = sample_norm_grid(p, nullptr, g);
    set_thread_count(4);
    const auto b = sample_norm_grid(p, nullptr, g);
    set_thread_count(0);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i].log_norm == b.samples[i].log_norm);
}
