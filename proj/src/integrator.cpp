#include "ned/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ned/errors.hpp"

namespace ned {

namespace {

// Dormand-Prince tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& x, const Eigen::VectorXd& xn,
                  const IntegratorOptions& o) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = o.atol + o.rtol * std::max(std::abs(x[i]), std::abs(xn[i]));
        const double r = err[i] / sc;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(err.size(), 1)));
}

double initial_step(const Rhs& f, double t0, const Eigen::VectorXd& x, const Eigen::VectorXd& k1,
                    double dir, const IntegratorOptions& o) {
    Eigen::VectorXd sc = (o.atol + o.rtol * x.array().abs()).matrix();
    const double d0 = (x.array() / sc.array()).matrix().norm() / std::sqrt(double(x.size()));
    const double d1 = (k1.array() / sc.array()).matrix().norm() / std::sqrt(double(x.size()));
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    Eigen::VectorXd x1 = x + dir * h0 * k1;
    Eigen::VectorXd k2(x.size());
    f(t0 + dir * h0, x1, k2);
    const double d2 =
        ((k2 - k1).array() / sc.array()).matrix().norm() / std::sqrt(double(x.size())) / h0;
    const double m = std::max(d1, d2);
    const double h1 = (m <= 1e-15) ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 1.0 / 5.0);
    return std::min(100 * h0, h1);
}

}  // namespace

Eigen::VectorXd integrate(const Rhs& f, double t0, double t1, Eigen::VectorXd x,
                          const IntegratorOptions& o, IntegrationStats* stats) {
    if (t0 == t1) return x;
    if (!x.allFinite()) throw NumericError("integrate: non-finite initial state");
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    const Eigen::Index n = x.size();
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), xt(n), xn(n), err(n);
    f(t0, x, k1);
    double h = o.initial_step > 0 ? o.initial_step : initial_step(f, t0, x, k1, dir, o);
    if (o.max_step > 0) h = std::min(h, o.max_step);
    h = std::min(h, span);
    double t = t0;
    long steps = 0;
    IntegrationStats local;
    while (dir * (t1 - t) > 0) {
        if (++steps > o.max_steps) throw NumericError("integrate: step budget exhausted");
        const double remaining = std::abs(t1 - t);
        bool last = false;
        if (h >= remaining) {
            h = remaining;
            last = true;
        }
        const double hmin = 1e-14 * std::max(1.0, std::abs(t));
        if (h < hmin) {
            std::ostringstream os;
            os << "integrate: step-size underflow at t=" << t;
            throw NumericError(os.str());
        }
        const double hs = dir * h;
        xt = x + hs * (a21 * k1);
        f(t + c2 * hs, xt, k2);
        xt = x + hs * (a31 * k1 + a32 * k2);
        f(t + c3 * hs, xt, k3);
        xt = x + hs * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + c4 * hs, xt, k4);
        xt = x + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + c5 * hs, xt, k5);
        xt = x + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + hs, xt, k6);
        xn = x + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        f(t + hs, xn, k7);
        err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double en = xn.allFinite() ? error_norm(err, x, xn, o) : HUGE_VAL;
        if (en <= 1.0) {
            t = last ? t1 : t + hs;
            x = xn;
            k1 = k7;
            ++local.accepted;
            if (x.norm() > o.overflow_guard) {
                std::ostringstream os;
                os << "finite escape: state norm exceeded " << o.overflow_guard << " near t=" << t;
                throw FiniteEscapeError(os.str(), t);
            }
            const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
            h *= fac;
        } else {
            ++local.rejected;
            if (!std::isfinite(en)) {
                h *= 0.1;
            } else {
                h *= std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9);
            }
        }
        if (o.max_step > 0) h = std::min(h, o.max_step);
    }
    if (stats) {
        stats->accepted += local.accepted;
        stats->rejected += local.rejected;
    }
    return x;
}

std::vector<Eigen::VectorXd> integrate_samples(const Rhs& f, double t0, const Eigen::VectorXd& x0,
                                               const std::vector<double>& times,
                                               const IntegratorOptions& opts) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(times.size());
    Eigen::VectorXd x = x0;
    double t = t0;
    for (double tk : times) {
        if (tk < t) throw ArgumentError("integrate_samples: output times must be increasing");
        x = integrate(f, t, tk, x, opts);
        t = tk;
        out.push_back(x);
    }
    return out;
}

}  // namespace ned
