#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ned/errors.hpp"
#include "ned/io.hpp"
#include "ned/parabolic.hpp"
#include "support.hpp"

using namespace ned;

namespace {

DichotomyCertificate sample_cert() {
    DichotomyCertificate c;
    c.kind = Kind::I;
    c.domain = TimeDomain::Plus;
    c.M = 2.5;
    c.stable = {3, 1};
    return c;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("certificate round trip") {
    const auto c = sample_cert();
    const Json j = to_json(c);
    CHECK(j["kind"] == "I");
    CHECK(j["stable"]["alpha"] == 3.0);
    CHECK(j["unstable"].is_null());
    const auto back = certificate_from_json(Json::parse(j.dump()));
    CHECK(same_bounds(back, c));
    CHECK(back.kind == c.kind);
    CHECK(back.domain == c.domain);
}

TEST_CASE("converted certificates keep their source through a file") {
    const auto c = sample_cert();
    const auto d = convert_halfline(c);
    const auto parsed = certificate_from_json(Json::parse(to_json(d).dump()));
    REQUIRE(parsed.converted_from);
    const auto back = convert_halfline(parsed);
    CHECK(same_bounds(back, c));
    CHECK(back.kind == Kind::I);
}

TEST_CASE("malformed certificates") {
    CHECK_THROWS_AS(certificate_from_json(Json::parse(R"({"kind":"I"})")), ArgumentError);
    CHECK_THROWS_AS(certificate_from_json(Json::parse(
                        R"({"kind":"I","domain":"plus","M":0.5,"stable":{"alpha":1,"delta":0}})")),
                    ArgumentError);
    CHECK_THROWS_AS(certificate_from_json(Json::parse(
                        R"({"kind":"II","domain":"full","M":1,"stable":{"alpha":1,"delta":0},
                            "unstable":{"beta":1,"nu":0},"projection":"explicit"})")),
                    ArgumentError);
}

TEST_CASE("robustness report json") {
    auto r = robustness_constants(1, 1, 0.2, 0.1);
    Json j = to_json(r);
    CHECK(j["omega_tilde"].get<double>() == doctest::Approx(0.74963323143579375334));
    CHECK(j["admissible"] == true);
    CHECK(j["bound_constant"].is_null());
    r.L = 1.5;
    CHECK(to_json(r)["bound_constant"].get<double>() == doctest::Approx(r.bound_constant()));
}

TEST_CASE("csv headers") {
    const auto p = test::exponential(-2);
    const auto g = sample_norm_grid(p, nullptr, GridSpec::horizon(TimeDomain::Plus, 2, 0.5));
    std::ostringstream a, b;
    write_norm_grid_csv(a, g);
    CHECK(first_line(a.str()) == "t,s,log_norm,part");
    write_frontier_csv(b, fit_bounds(g, Kind::II, Part::Stable, {1, 2, 3}));
    CHECK(first_line(b.str()) == "alpha,delta,lnM");

    DichotomyCertificate c;
    c.kind = Kind::II;
    c.domain = TimeDomain::Minus;
    c.stable = {1, 0};
    std::ostringstream e;
    write_envelope_csv(e, pullback_envelope(c, 0, 1), {-1.0, 0.0});
    CHECK(e.str() == "t,R\n-1,1\n0,1\n");

    OmegaResult r;
    r.t = 0;
    r.kept.push_back({-1, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 2), 0});
    std::ostringstream cl;
    write_cloud_csv(cl, {r});
    CHECK(cl.str() == "t,x1,x2,cluster_id\n0,1,2,0\n");
}

TEST_CASE("process backends from json") {
    const auto cf = process_from_json(Json::parse(R"({"backend":"closed-form","gallery":"barreira","params":{"a":1,"b":2}})"));
    CHECK(cf.gallery);
    CHECK(cf.process.log_scalar(M_PI, 0) == doctest::Approx(std::log(8.069951757030459923920503e-5)));

    const auto pl = process_from_json(Json::parse(
        R"({"backend":"piecewise-closed-form","dimension":2,"domain":"full","breaks":[0],
            "V":[[1,0.5],[0.2,1]],"rates":[[-3,-1],[1.5,1.5]],"unstable":[false,true]})"));
    REQUIRE(pl.family);
    CHECK(pl.family->kind() == ProjectionKind::Explicit);
    CHECK(pl.process.dimension() == 2);

    const auto pw = process_from_json(Json::parse(
        R"({"backend":"piecewise-closed-form","dimension":1,"breaks":[0],"generators":[[[-1]],[[-2]]]})"));
    CHECK(pw.process.matrix(1, -1)(0, 0) == doctest::Approx(std::exp(-3.0)));

    const auto in = process_from_json(Json::parse(R"({"backend":"integrated","dimension":2,"A":[[-1,0],[0,2]]})"));
    CHECK(in.process.matrix(1, 0)(1, 1) == doctest::Approx(std::exp(2.0)).epsilon(1e-8));

    const auto pd = process_from_json(Json::parse(
        R"({"backend":"discretized-pde","N":3,"bc":"dirichlet","a":{"form":"constant","value":-1}})"));
    CHECK(pd.process.dimension() == 3);
    CHECK(operator_norm(pd.process, 1, 0) ==
          doctest::Approx(std::exp(-1 - 16 * (2 - std::sqrt(2.0)))).epsilon(1e-8));

    CHECK_THROWS_AS(process_from_json(Json::parse(R"({"backend":"closed-form","gallery":"nope"})")), ArgumentError);
    CHECK_THROWS_AS(process_from_json(Json::parse(R"({"backend":"warp"})")), ArgumentError);
    CHECK_THROWS_AS(process_from_json(Json::parse(R"({"backend":"integrated","dimension":3,"A":[[-1,0],[0,2]]})")),
                    ArgumentError);
}

TEST_CASE("named coefficients") {
    const auto b = coefficient_from_json(Json::parse(R"({"form":"barreira","a":1,"b":2})"));
    CHECK(b.g(1.0) == doctest::Approx(-2 - std::sin(1.0)));
    CHECK(b.integral(M_PI, 0) == doctest::Approx(std::log(8.069951757030459923920503e-5)));
    const auto c = coefficient_from_json(Json::parse(R"({"form":"constant","value":-3})"));
    CHECK(c.integral(2, 0) == doctest::Approx(-6));
    CHECK_THROWS_AS(coefficient_from_json(Json::parse(R"({"form":"cubic"})")), ArgumentError);
}
