#include "ned/gallery.hpp"

#include <cmath>
#include <map>

#include "ned/errors.hpp"

namespace ned {

namespace {

DichotomyClaim claim(Kind k, TimeDomain d, double M, ExponentPair stable, ProjectionKind proj,
                     bool holds, std::string note = {}) {
    DichotomyClaim c;
    c.certificate.kind = k;
    c.certificate.domain = d;
    c.certificate.M = M;
    c.certificate.stable = stable;
    c.certificate.projection = proj;
    if (proj == ProjectionKind::Identity) c.certificate.unstable = stable;
    c.holds = holds;
    c.note = std::move(note);
    return c;
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

double barreira_exponent(double a, double b, double t, double s) {
    return -b * (t - s) + a * t * std::cos(t) - a * s * std::cos(s) - a * std::sin(t) +
           a * std::sin(s);
}

double barreira_coefficient(double a, double b, double t) { return -b - a * t * std::sin(t); }

GalleryEntry make_barreira(double a, double b) {
    if (!(a > 0) || !(b > 0)) throw ArgumentError("make_barreira: a and b must be positive");
    auto p = EvolutionProcess::scalar_exponent(
        TimeDomain::Full, [a, b](double t, double s) { return barreira_exponent(a, b, t, s); },
        Backend::ClosedForm, "barreira");
    GalleryEntry e{"barreira", p, {}, GridSpec::uniform(-40, 40, 0.25), {}, {{"a", a}, {"b", b}}};
    const double M = std::exp(2 * a);
    const auto Z = ProjectionKind::Zero;
    e.claims.push_back(claim(Kind::II, TimeDomain::Plus, M, {b + a, 2 * a}, Z, true));
    e.claims.push_back(claim(Kind::I, TimeDomain::Minus, M, {b + a, 2 * a}, Z, true));
    if (b > a) {
        e.claims.push_back(claim(Kind::I, TimeDomain::Plus, M, {b - a, 2 * a}, Z, true));
        e.claims.push_back(claim(Kind::II, TimeDomain::Minus, M, {b - a, 2 * a}, Z, true));
        e.claims.push_back(claim(Kind::I, TimeDomain::Full, M, {b - a, 2 * a}, Z, true));
        e.claims.push_back(claim(Kind::II, TimeDomain::Full, M, {b - a, 2 * a}, Z, true));
    }
    return e;
}

GalleryEntry make_sign_switch() {
    auto p = EvolutionProcess::scalar_exponent(
        TimeDomain::Full, [](double t, double s) { return std::abs(t) - std::abs(s); },
        Backend::PiecewiseClosedForm, "sign_switch");
    GalleryEntry e{"sign_switch", p, {}, GridSpec::uniform(-40, 40, 0.25),
                   nested_windows(TimeDomain::Full, {5, 10, 20}, 0.25), {}};
    for (auto proj : {ProjectionKind::Zero, ProjectionKind::Identity}) {
        e.claims.push_back(claim(Kind::II, TimeDomain::Full, 1.0, {1, 2}, proj, true));
        e.claims.push_back(claim(Kind::I, TimeDomain::Full, 1.0, {1, 2}, proj, false,
                                 "no NEDI on the line"));
    }
    return e;
}

double smooth_limit_k(const std::vector<double>& mesh, double scale, double eps) {
    // G(x) = int_0^x |tanh(r/L) - sgn r| dr, signed so that int_s^t = G(t) - G(s)
    auto G = [scale](double x) {
        const double v = scale * std::log(2.0) - scale * std::log1p(std::exp(-2.0 * std::abs(x) / scale));
        return x >= 0 ? v : -v;
    };
    double k = 0.0;
    for (double s : mesh)
        for (double t : mesh)
            if (t >= s) k = std::max(k, G(t) - G(s) - eps * (t - s));
    return k;
}

GalleryEntry make_smooth_limits(double scale, double eps) {
    if (!(scale > 0)) throw ArgumentError("make_smooth_limits: scale must be positive");
    if (!(eps > 0) || !(eps < 1)) throw ArgumentError("make_smooth_limits: eps must lie in (0,1)");
    auto p = EvolutionProcess::linear_ode(
        1, TimeDomain::Full,
        [scale](double t) {
            Eigen::MatrixXd m(1, 1);
            m(0, 0) = std::tanh(t / scale);
            return m;
        },
        IntegratorOptions{}, "smooth_limits");
    GridSpec grid = GridSpec::uniform(-40, 40, 0.25);
    GalleryEntry e{"smooth_limits", p, {}, grid,
                   nested_windows(TimeDomain::Full, {5, 10, 20}, 0.25),
                   {{"scale", scale}, {"eps", eps}}};
    const double M = std::exp(smooth_limit_k(grid.mesh, scale, eps));
    for (auto proj : {ProjectionKind::Zero, ProjectionKind::Identity}) {
        e.claims.push_back(claim(Kind::II, TimeDomain::Full, M, {1 - eps, 2}, proj, true,
                                 "M_eps computed on the canonical grid"));
        e.claims.push_back(claim(Kind::I, TimeDomain::Full, 1.0, {1 - eps, 2}, proj, false,
                                 "no NEDI on the line"));
    }
    return e;
}

double factorial_step_coefficient(double t) {
    if (t <= 1.0) return 0.0;
    int n = 1;
    double lo = 1.0;
    for (;;) {
        const double hi = lo * (n + 1);
        if (t <= hi) return n % 2 == 0 ? 1.0 : -static_cast<double>(n);
        lo = hi;
        ++n;
    }
}

double factorial_step_integral(double t, int max_n) {
    if (t < 0) throw ArgumentError("factorial steps live on R+");
    if (t > factorial(max_n + 1)) throw ArgumentError("time beyond the last factorial block");
    double acc = 0.0;
    double lo = 1.0;
    for (int n = 1; n <= max_n && t > lo; ++n) {
        const double hi = lo * (n + 1);
        const double g = n % 2 == 0 ? 1.0 : -static_cast<double>(n);
        acc += g * (std::min(t, hi) - lo);
        lo = hi;
    }
    return acc;
}

GalleryEntry make_factorial_steps(int max_n) {
    if (max_n < 2 || max_n > 17) throw ArgumentError("make_factorial_steps: maxN must lie in [2,17]");
    auto p = EvolutionProcess::scalar_exponent(
        TimeDomain::Plus,
        [max_n](double t, double s) {
            return factorial_step_integral(t, max_n) - factorial_step_integral(s, max_n);
        },
        Backend::PiecewiseClosedForm, "factorial_steps");
    // block endpoints plus eight interior points per block
    std::vector<double> mesh{0.0, 0.5, 1.0};
    double lo = 1.0;
    for (int n = 1; n <= max_n; ++n) {
        const double hi = lo * (n + 1);
        for (int k = 1; k <= 8; ++k) mesh.push_back(lo + (hi - lo) * k / 8.0);
        lo = hi;
    }
    GalleryEntry e{"factorial_steps", p, {}, GridSpec::from_mesh(mesh), {},
                   {{"maxN", static_cast<double>(max_n)}}};
    // Rejection windows end on even blocks, where the norms grow.
    for (int n = 2; n <= max_n; n += 2) {
        const double end = factorial(n + 1);
        e.rejection_windows.push_back(e.canonical_grid.window(0.0, end));
    }
    e.claims.push_back(claim(Kind::II, TimeDomain::Plus, 1.0, {1, 2}, ProjectionKind::Zero, true));
    e.claims.push_back(claim(Kind::I, TimeDomain::Plus, 1.0, {1, 2}, ProjectionKind::Zero, false,
                             "no NEDI on R+"));
    return e;
}

GalleryEntry make_piecewise_barreira(double a, double b, double c, double d) {
    if (!(a > 0 && b > 0 && c > 0 && d > 0))
        throw ArgumentError("make_piecewise_barreira: parameters must be positive");
    if (!(b > a) || !(d > c)) throw ArgumentError("make_piecewise_barreira: needs b > a and d > c");
    // Phi(t) = int_0^t f
    auto Phi = [a, b, c, d](double t) {
        if (t >= 0) return -b * t + a * (t * std::cos(t) - std::sin(t));
        return -d * t + c * (t * std::cos(t) - std::sin(t));
    };
    auto p = EvolutionProcess::scalar_exponent(
        TimeDomain::Full, [Phi](double t, double s) { return Phi(t) - Phi(s); },
        Backend::PiecewiseClosedForm, "piecewise_barreira");
    GalleryEntry e{"piecewise_barreira", p, {}, GridSpec::uniform(-40, 40, 0.25), {},
                   {{"a", a}, {"b", b}, {"c", c}, {"d", d}}};
    const double delta = std::max(2 * a, 2 * c);
    const double M = std::exp(2 * (a + c));
    e.claims.push_back(claim(Kind::II, TimeDomain::Full, M, {std::min(b + a, d - c), delta},
                             ProjectionKind::Zero, true));
    e.claims.push_back(claim(Kind::I, TimeDomain::Full, M, {std::min(b - a, d + c), delta},
                             ProjectionKind::Zero, true));
    return e;
}

std::vector<std::string> gallery_names() {
    return {"barreira", "sign_switch", "smooth_limits", "factorial_steps", "piecewise_barreira"};
}

GalleryEntry gallery_entry(const std::string& name,
                           const std::vector<std::pair<std::string, double>>& params) {
    std::map<std::string, double> p(params.begin(), params.end());
    auto get = [&](const char* k, double dflt) {
        auto it = p.find(k);
        return it == p.end() ? dflt : it->second;
    };
    if (name == "barreira") return make_barreira(get("a", 1), get("b", 2));
    if (name == "sign_switch") return make_sign_switch();
    if (name == "smooth_limits") return make_smooth_limits(get("scale", 1), get("eps", 0.1));
    if (name == "factorial_steps") return make_factorial_steps(static_cast<int>(get("maxN", 4)));
    if (name == "piecewise_barreira")
        return make_piecewise_barreira(get("a", 1), get("b", 2.5), get("c", 0.2), get("d", 3));
    throw ArgumentError("unknown gallery entry '" + name + "'");
}

}  // namespace ned
