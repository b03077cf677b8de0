#include "ned/parabolic.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "ned/errors.hpp"

namespace ned {

void Grid1D::validate() const {
    if (!(L > 0)) throw ArgumentError("Grid1D: L must be positive");
    if (N < 2) throw ArgumentError("Grid1D: N must be >= 2");
}

std::string to_string(BoundaryKind k) {
    switch (k) {
        case BoundaryKind::Dirichlet: return "dirichlet";
        case BoundaryKind::Neumann: return "neumann";
        case BoundaryKind::Robin: return "robin";
    }
    return "?";
}

BoundaryKind parse_boundary(const std::string& s) {
    if (s == "dirichlet") return BoundaryKind::Dirichlet;
    if (s == "neumann") return BoundaryKind::Neumann;
    if (s == "robin") return BoundaryKind::Robin;
    throw ArgumentError("unknown boundary condition '" + s + "'");
}

Eigen::MatrixXd DiscreteLaplacian::symmetrized() const {
    const Eigen::VectorXd r = weight.cwiseSqrt();
    return r.asDiagonal() * A * r.cwiseInverse().asDiagonal();
}

Eigen::MatrixXd DiscreteLaplacian::exp(double tau) const {
    return modes * (eigenvalues * tau).array().exp().matrix().asDiagonal() * modes_inv;
}

DiscreteLaplacian discretize(const Grid1D& grid, const BoundaryCondition& bc) {
    grid.validate();
    if (bc.kind == BoundaryKind::Robin && !(bc.robin_alpha >= 0))
        throw ArgumentError("discretize: Robin coefficient must be >= 0");
    DiscreteLaplacian L;
    L.grid = grid;
    L.bc = bc;
    const double h = grid.h(), ih2 = 1.0 / (h * h);
    const bool dirichlet = bc.kind == BoundaryKind::Dirichlet;
    const int n = dirichlet ? grid.N : grid.N + 2;
    L.A = Eigen::MatrixXd::Zero(n, n);
    L.weight = Eigen::VectorXd::Ones(n);
    for (int i = 0; i < n; ++i) {
        L.x.push_back(dirichlet ? (i + 1) * h : i * h);
        L.A(i, i) = -2 * ih2;
        if (i > 0) L.A(i, i - 1) = ih2;
        if (i + 1 < n) L.A(i, i + 1) = ih2;
    }
    if (!dirichlet) {
        // ghost points: u_{-1} = u_1 - 2 h alpha u_0, and likewise at x = L
        const double a0 = bc.kind == BoundaryKind::Robin ? bc.robin_alpha : 0.0;
        L.A(0, 0) = -(2 + 2 * h * a0) * ih2;
        L.A(0, 1) = 2 * ih2;
        L.A(n - 1, n - 1) = -(2 + 2 * h * a0) * ih2;
        L.A(n - 1, n - 2) = 2 * ih2;
        L.weight(0) = 0.5;
        L.weight(n - 1) = 0.5;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L.symmetrized());
    if (es.info() != Eigen::Success) throw NumericError("discretize: eigendecomposition failed");
    Eigen::MatrixXd Q = es.eigenvectors().rowwise().reverse();
    L.eigenvalues = es.eigenvalues().reverse();
    if (Q.col(0).sum() < 0) Q.col(0) *= -1;
    const Eigen::VectorXd r = L.weight.cwiseSqrt();
    L.modes = r.cwiseInverse().asDiagonal() * Q;
    L.modes_inv = Q.transpose() * r.asDiagonal();
    return L;
}

double dirichlet_eigenvalue(int k, const Grid1D& grid) {
    const double h = grid.h();
    const double s = std::sin(k * M_PI * h / (2 * grid.L));
    return -4 * s * s / (h * h);
}

CoefficientField CoefficientField::separable(std::function<double(double)> g,
                                             std::function<double(double, double)> integral) {
    CoefficientField f;
    f.a = [g](double t, double) { return g(t); };
    f.g = std::move(g);
    f.g_integral = std::move(integral);
    return f;
}

CoefficientField CoefficientField::general(std::function<double(double, double)> a) {
    CoefficientField f;
    f.a = std::move(a);
    return f;
}

Eigen::MatrixXd nonnegative_expm(const Eigen::MatrixXd& A, double tau) {
    const int n = static_cast<int>(A.rows());
    const double c = A.diagonal().cwiseAbs().maxCoeff();
    Eigen::MatrixXd B = (A + c * Eigen::MatrixXd::Identity(n, n)) * tau;
    const double nb = B.cwiseAbs().colwise().sum().maxCoeff();
    int sq = 0;
    if (nb > 0.5) sq = static_cast<int>(std::ceil(std::log2(nb / 0.5)));
    B /= std::ldexp(1.0, sq);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n), term = sum;
    for (int k = 1; k < 40; ++k) {
        term = term * B / k;
        sum += term;
        if (term.cwiseAbs().maxCoeff() <= 1e-18 * sum.cwiseAbs().maxCoeff()) break;
    }
    sum *= std::exp(-c * tau / std::ldexp(1.0, sq));
    for (int i = 0; i < sq; ++i) sum = sum * sum;
    return sum;
}

namespace {

double gl7(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 7>::integrate(f, a, b);
}

struct Stepper {
    DiscreteLaplacian L;
    CoefficientField a;
    PdeOptions o;
    Eigen::MatrixXd Eh, Ed;

    Stepper(const DiscreteLaplacian& lap, const CoefficientField& f, const PdeOptions& opts)
        : L(lap), a(f), o(opts) {
        if (!(o.dt > 0)) throw ArgumentError("pde_process: dt must be positive");
        if (!a.a) throw ArgumentError("pde_process: missing coefficient field");
        Eh = nonnegative_expm(L.A, o.dt / 2);
        Ed = Eh * Eh;
    }

    Eigen::VectorXd reaction(double t0, double t1) const {
        const int n = L.size();
        if (a.is_separable()) {
            const double I = a.g_integral ? a.g_integral(t1, t0) : gl7(a.g, t0, t1);
            return Eigen::VectorXd::Constant(n, std::exp(I));
        }
        Eigen::VectorXd r(n);
        for (int i = 0; i < n; ++i) {
            const double xi = L.x[i];
            r(i) = std::exp(gl7([&](double t) { return a.a(t, xi); }, t0, t1));
        }
        return r;
    }

    std::pair<long, double> steps(double t, double s) const {
        const double tau = t - s;
        long n = static_cast<long>(std::floor(tau / o.dt + 1e-9));
        double rem = tau - n * o.dt;
        if (rem < 1e-12 * std::max(1.0, tau)) rem = 0;
        return {n, rem};
    }

    template <class Mat, class Half>
    Mat run(double t, double s, Mat U, Half half_rem) const {
        auto [n, rem] = steps(t, s);
        if (n > 0) {
            U = Eh * U;
            for (long k = 0; k < n; ++k) {
                U = reaction(s + k * o.dt, s + (k + 1) * o.dt).asDiagonal() * U;
                U = (k + 1 == n ? Eh : Ed) * U;
            }
        }
        if (rem > 0) {
            const double t0 = s + n * o.dt;
            U = half_rem(rem / 2, U);
            U = reaction(t0, t).asDiagonal() * U;
            U = half_rem(rem / 2, U);
        }
        return U;
    }

    Eigen::MatrixXd matrix(double t, double s) const {
        const int n = L.size();
        return run(t, s, Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n)),
                   [this](double tau, const Eigen::MatrixXd& U) -> Eigen::MatrixXd {
                       return nonnegative_expm(L.A, tau) * U;
                   });
    }

    Eigen::VectorXd apply(double t, double s, const Eigen::VectorXd& x) const {
        return run(t, s, x, [this](double tau, const Eigen::VectorXd& v) -> Eigen::VectorXd {
            return L.modes * ((L.eigenvalues * tau).array().exp().matrix().cwiseProduct(L.modes_inv * v));
        });
    }
};

}  // namespace

EvolutionProcess pde_process(const DiscreteLaplacian& Ah, const CoefficientField& a, const PdeOptions& opts) {
    auto st = std::make_shared<const Stepper>(Ah, a, opts);
    EvolutionProcess p(Ah.size(), opts.domain, false, Backend::DiscretizedPde,
                       [st](double t, double s) { return st->matrix(t, s); }, "pde");
    p.set_apply([st](double t, double s, const Eigen::VectorXd& x) { return st->apply(t, s, x); });
    p.set_sweep(true).set_tolerance(1e-10);
    return p;
}

EvolutionProcess adjoint_process(const EvolutionProcess& p) {
    TimeDomain d = p.domain();
    if (d == TimeDomain::Plus)
        d = TimeDomain::Minus;
    else if (d == TimeDomain::Minus)
        d = TimeDomain::Plus;
    EvolutionProcess q(p.dimension(), d, p.invertible(), p.backend(),
                       [p](double t, double s) -> Eigen::MatrixXd { return p.matrix(-s, -t).transpose(); },
                       p.name().empty() ? std::string("adjoint") : "adjoint(" + p.name() + ")");
    q.set_sweep(p.prefers_sweep()).set_tolerance(p.tolerance());
    return q;
}

VocReport variation_of_constants_check(const DiscreteLaplacian& Ah, const CoefficientField& a,
                                       const std::function<Eigen::VectorXd(double)>& b, double s,
                                       const std::vector<double>& times, const Eigen::VectorXd& u0,
                                       const PdeOptions& opts) {
    if (times.empty()) throw ArgumentError("variation_of_constants_check: empty time grid");
    for (std::size_t k = 0; k < times.size(); ++k)
        if (times[k] < s || (k && !(times[k] > times[k - 1])))
            throw ArgumentError("variation_of_constants_check: times must increase from s");
    if (u0.size() != Ah.size()) throw ArgumentError("variation_of_constants_check: dimension mismatch");
    const int n = Ah.size();
    Eigen::VectorXd xs = Eigen::Map<const Eigen::VectorXd>(Ah.x.data(), n);
    Rhs rhs = [&](double t, const Eigen::VectorXd& u, Eigen::VectorXd& du) {
        Eigen::VectorXd av(n);
        for (int i = 0; i < n; ++i) av(i) = a.a(t, xs(i));
        du = Ah.A * u + av.cwiseProduct(u) + b(t);
    };
    IntegratorOptions io;
    io.rtol = 1e-12;
    io.atol = 1e-15;
    const auto direct = integrate_samples(rhs, s, u0, times, io);

    const Stepper st(Ah, a, opts);
    using G = boost::math::quadrature::gauss<double, 7>;
    std::vector<double> nodes, wts;
    for (std::size_t i = 0; i < G::abscissa().size(); ++i) {
        const double x = G::abscissa()[i], w = G::weights()[i];
        nodes.push_back(x);
        wts.push_back(w);
        if (x != 0) {
            nodes.push_back(-x);
            wts.push_back(w);
        }
    }
    VocReport rep;
    rep.times = times;
    Eigen::VectorXd y = u0;
    double now = s;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        const double len = t - now;
        if (len > 0) {
            // pieces graded geometrically toward t, where S(t, r) b(r) varies fastest
            std::vector<double> cuts{t};
            double d = std::min(len, 1e-7);
            while (t - d > now) {
                cuts.push_back(t - d);
                d = std::min(2 * d, d + 0.05);
            }
            cuts.push_back(now);
            std::reverse(cuts.begin(), cuts.end());
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
            for (std::size_t j = 1; j < cuts.size(); ++j) {
                const double lo = cuts[j - 1], hi = cuts[j];
                acc = st.apply(hi, lo, acc);
                const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
                for (std::size_t q = 0; q < nodes.size(); ++q) {
                    const double r = mid + half * nodes[q];
                    acc += half * wts[q] * st.apply(hi, r, b(r));
                }
            }
            y = st.apply(t, now, y) + acc;
        }
        now = t;
        rep.residual = std::max(rep.residual, (y - direct[k]).lpNorm<Eigen::Infinity>());
    }
    return rep;
}

double PrincipalBundle::log_cocycle(std::size_t j, std::size_t i) const {
    if (j < i) throw ArgumentError("log_cocycle: needs j >= i");
    double s = 0;
    for (std::size_t k = i; k < j; ++k) s += log_c[k];
    return s;
}

Eigen::MatrixXd PrincipalBundle::Q1(std::size_t k) const {
    return e[k] * e_star[k].transpose() / e_star[k].dot(e[k]);
}

PrincipalBundle principal_bundle(const EvolutionProcess& p, double t0, double horizon, double stride,
                                 int warmup) {
    if (!(stride > 0) || !(horizon >= stride)) throw ArgumentError("principal_bundle: needs horizon >= stride > 0");
    if (warmup < 0) throw ArgumentError("principal_bundle: warmup must be >= 0");
    const int windows = static_cast<int>(std::llround(horizon / stride));
    const double W = warmup * stride;
    const double start = contains(p.domain(), t0 - W) ? t0 - W : t0;
    const int lead = static_cast<int>(std::llround((t0 - start) / stride)) + (start == t0 ? warmup : 0);
    const double tail_end = start + (lead + windows + warmup) * stride;
    const int tail = contains(p.domain(), tail_end) ? warmup : 0;
    const int m = lead + windows + tail;
    std::vector<double> tau(m + 1);
    for (int k = 0; k <= m; ++k) tau[k] = start + k * stride;
    std::vector<Eigen::MatrixXd> P(m);
    PrincipalBundle B;
    B.min_entry = std::numeric_limits<double>::infinity();
    for (int k = 0; k < m; ++k) {
        P[k] = p.matrix(tau[k + 1], tau[k]);
        const double mn = P[k].minCoeff();
        B.min_entry = std::min(B.min_entry, mn);
        if (mn < -1e-14 * P[k].cwiseAbs().maxCoeff())
            throw ContractError("principal_bundle: propagator has negative entries");
    }
    const int n = p.dimension();
    std::vector<Eigen::VectorXd> fwd(m + 1), bwd(m + 1);
    std::vector<double> logc(m);
    fwd[0] = Eigen::VectorXd::Ones(n).normalized();
    for (int k = 0; k < m; ++k) {
        Eigen::VectorXd w = P[k] * fwd[k];
        logc[k] = std::log(w.norm());
        fwd[k + 1] = w.normalized();
    }
    bwd[m] = Eigen::VectorXd::Ones(n).normalized();
    for (int k = m - 1; k >= 0; --k) bwd[k] = (P[k].transpose() * bwd[k + 1]).normalized();
    for (int k = lead; k <= lead + windows; ++k) {
        B.times.push_back(tau[k]);
        B.e.push_back(fwd[k]);
        B.e_star.push_back(bwd[k]);
        if (k < lead + windows) B.log_c.push_back(logc[k]);
    }
    const std::size_t R = B.times.size();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    B.C1 = B.C2 = 0;
    std::vector<Eigen::MatrixXd> Q2(R);
    for (std::size_t k = 0; k < R; ++k) {
        const Eigen::MatrixXd q1 = B.Q1(k);
        Q2[k] = I - q1;
        B.C1 = std::max(B.C1, spectral_norm(q1));
        B.C2 = std::max(B.C2, spectral_norm(Q2[k]));
    }
    std::vector<std::pair<double, double>> pts;  // (tau, ln r)
    for (std::size_t i = 0; i + 1 < R; ++i) {
        Eigen::MatrixXd G = Q2[i];
        for (std::size_t j = i + 1; j < R; ++j) {
            G = P[lead + j - 1] * G;
            const double r = spectral_norm(G) / std::exp(B.log_cocycle(j, i));
            // below this the ratio is rounding noise
            if (!(r > 1e-10)) break;
            pts.emplace_back(B.times[j] - B.times[i], std::log(r));
        }
    }
    B.fit_samples = pts.size();
    if (pts.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto [x, y] : pts) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double N = static_cast<double>(pts.size());
        const double den = N * sxx - sx * sx;
        B.nu_sep = den > 1e-12 * N * sxx ? -(N * sxy - sx * sy) / den : -sy / sx;
    } else if (pts.size() == 1 && pts[0].first > 0) {
        B.nu_sep = -pts[0].second / pts[0].first;
    }
    B.M_sep = 1.0;
    for (auto [x, y] : pts) B.M_sep = std::max(B.M_sep, std::exp(y + B.nu_sep * x));
    return B;
}

TransferResult scalar_to_pde_transfer(const DichotomyCertificate& scalar, const DiscreteLaplacian& Ah,
                                      const CoefficientField& a, const PrincipalBundle& bundle) {
    if (!a.is_separable()) throw InapplicableError("scalar_to_pde_transfer: coefficient is not separable");
    if (scalar.kind != Kind::II || scalar.projection != ProjectionKind::Zero)
        throw ContractError("scalar_to_pde_transfer: needs a NEDII certificate with zero projection");
    scalar.validate();
    TransferResult r;
    r.lambda1 = Ah.lambda1();
    r.C = bundle.separation_constant();
    r.predicted.kind = Kind::II;
    r.predicted.domain = scalar.domain;
    r.predicted.projection = ProjectionKind::Zero;
    r.predicted.M = scalar.M * r.C;
    r.predicted.stable = {scalar.stable.rate + std::abs(r.lambda1), scalar.stable.growth};
    return r;
}

Flow semilinear_flow(const DiscreteLaplacian& Ah, const CoefficientField& a,
                     std::function<double(double, double, double)> nonlinearity,
                     std::function<double(double, double)> b, const PdeOptions& opts) {
    if (!(opts.dt > 0)) throw ArgumentError("semilinear_flow: dt must be positive");
    auto Eh = std::make_shared<const Eigen::MatrixXd>(nonnegative_expm(Ah.A, opts.dt / 2));
    auto L = std::make_shared<const DiscreteLaplacian>(Ah);
    Flow f;
    f.dimension = Ah.size();
    const double dt = opts.dt;
    f.advance = [=](double t, double s, const Eigen::VectorXd& x0) -> Eigen::VectorXd {
        if (t < s) throw ArgumentError("semilinear_flow integrates forward only");
        const int n = L->size();
        Eigen::VectorXd u = x0;
        auto rhs = [&](double tt, int i, double v) {
            return a.a(tt, L->x[i]) * v + nonlinearity(tt, L->x[i], v) + b(tt, L->x[i]);
        };
        auto react = [&](double t0, double h) {
            for (int i = 0; i < n; ++i) {
                double v = u(i);
                const double stiff = std::abs(a.a(t0, L->x[i])) + 3 * v * v;
                const int sub = std::max(1, static_cast<int>(std::ceil(h * stiff / 0.5)));
                const double k = h / sub;
                for (int j = 0; j < sub; ++j) {
                    const double tt = t0 + j * k;
                    const double k1 = rhs(tt, i, v);
                    const double k2 = rhs(tt + k / 2, i, v + k / 2 * k1);
                    const double k3 = rhs(tt + k / 2, i, v + k / 2 * k2);
                    const double k4 = rhs(tt + k, i, v + k * k3);
                    v += k / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
                }
                u(i) = v;
            }
        };
        double now = s;
        while (now < t) {
            double h = std::min(dt, t - now);
            if (t - now - h < 1e-12) h = t - now;
            if (h == dt) {
                u = *Eh * u;
                react(now, h);
                u = *Eh * u;
            } else {
                const Eigen::MatrixXd E = nonnegative_expm(L->A, h / 2);
                u = E * u;
                react(now, h);
                u = E * u;
            }
            now += h;
            if (!u.allFinite()) throw NumericError("semilinear_flow: non-finite state");
            if (u.lpNorm<Eigen::Infinity>() > 1e150) throw FiniteEscapeError("semilinear_flow: blow-up", now);
        }
        return u;
    };
    return f;
}

ParabolicDemoReport parabolic_attractor_demo(const DiscreteLaplacian& Ah, const CoefficientField& a,
                                             std::function<double(double)> b_time,
                                             const ParabolicDemoConfig& cfg, const PdeOptions& opts) {
    if (!a.is_separable()) throw InapplicableError("parabolic_attractor_demo: needs a separable coefficient");
    if (cfg.times.empty()) throw ArgumentError("parabolic_attractor_demo: empty time list");
    ParabolicDemoReport rep;
    const double tmin = *std::min_element(cfg.times.begin(), cfg.times.end());
    const double deep = tmin - std::ldexp(1.0, cfg.K);
    for (double r = deep; r <= 0; r += 0.01)
        if (b_time(r) < 0) throw ContractError("parabolic_attractor_demo: b must be nonnegative");

    PdeOptions po = opts;
    po.domain = TimeDomain::Full;
    const EvolutionProcess Sa = pde_process(Ah, a, po);
    if (Sa.matrix(tmin + 0.5, tmin).minCoeff() < 0)
        throw ContractError("parabolic_attractor_demo: propagator is not order preserving");

    const double l1 = Ah.lambda1();
    rep.C_inf = 1.0;
    for (double tau = 0; tau <= 40; tau += tau < 2 ? 0.01 : 0.5) {
        const Eigen::MatrixXd E = Ah.exp(tau);
        rep.C_inf = std::max(rep.C_inf, std::exp(-l1 * tau) * E.cwiseAbs().rowwise().sum().maxCoeff());
    }
    DichotomyCertificate sup = cfg.scalar;
    sup.M = cfg.scalar.M * rep.C_inf;
    sup.stable.rate = cfg.scalar.stable.rate + std::abs(l1);
    const double eta = cfg.lambda * sup.stable.growth;
    for (double r = deep; r <= 0; r += 0.01)
        rep.bnorm = std::max(rep.bnorm, std::exp(-eta * std::abs(r)) * std::abs(b_time(r)));
    rep.envelope = pullback_envelope(sup, cfg.lambda, rep.bnorm, true);

    const Flow flow = semilinear_flow(
        Ah, a, [](double, double, double u) { return -u * u * u; },
        [b_time](double t, double) { return b_time(t); }, po);
    OmegaOptions oo;
    oo.seeds_per_time = cfg.seeds;
    oo.cluster_eps = cfg.cluster_eps;
    oo.seed = cfg.seed;
    oo.norm = StateNorm::Max;
    const UniverseFamily U{cfg.gamma, cfg.seed_radius, true, StateNorm::Max};
    for (double t : cfg.times) {
        const OmegaResult r = simulate_pullback_omega(flow, t, pullback_schedule(t, cfg.K), U, oo);
        rep.sections.sections[t] = r.cloud;
        rep.poisoned += r.poisoned;
    }
    rep.containment = verify_containment(rep.sections, rep.envelope, StateNorm::Max);
    return rep;
}

}  // namespace ned
