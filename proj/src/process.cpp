#include "ned/process.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "ned/errors.hpp"
#include "ned/parallel.hpp"

namespace ned {

namespace {

constexpr double kGuard = 1e150;
const double kLogGuard = std::log(kGuard);

std::string fmt_time(double t) {
    std::ostringstream os;
    os.precision(17);
    os << t;
    return os.str();
}

// Largest eigenvalue of a symmetric 3x3 matrix (trigonometric solution).
double sym3_max_eig(const Eigen::Matrix3d& A) {
    const double p1 = A(0, 1) * A(0, 1) + A(0, 2) * A(0, 2) + A(1, 2) * A(1, 2);
    const double q = A.trace() / 3.0;
    if (p1 == 0.0) return std::max({A(0, 0), A(1, 1), A(2, 2)});
    const double p2 = (A(0, 0) - q) * (A(0, 0) - q) + (A(1, 1) - q) * (A(1, 1) - q) +
                      (A(2, 2) - q) * (A(2, 2) - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    const Eigen::Matrix3d B = (A - q * Eigen::Matrix3d::Identity()) / p;
    const double r = std::clamp(B.determinant() / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    return q + 2.0 * p * std::cos(phi);
}

double power_iteration_norm(const Eigen::MatrixXd& S) {
    const Eigen::MatrixXd G = S.transpose() * S;
    const Eigen::Index n = G.cols();
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Eigen::VectorXd w = G * v;
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        const double next = v.dot(w);
        v = w / nw;
        if (it > 0 && std::abs(next - lambda) <= 1e-12 * std::abs(next)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    // Rayleigh quotient of the final iterate
    lambda = std::max(lambda, v.dot(G * v));
    return std::sqrt(std::max(lambda, 0.0));
}

}  // namespace

std::string to_string(Backend b) {
    switch (b) {
        case Backend::ClosedForm: return "closed-form-exponent";
        case Backend::PiecewiseClosedForm: return "piecewise-closed-form";
        case Backend::Integrated: return "numerically-integrated";
        case Backend::DiscretizedPde: return "discretized-pde";
    }
    return "closed-form-exponent";
}

Backend parse_backend(const std::string& s) {
    if (s == "closed-form-exponent" || s == "closed-form") return Backend::ClosedForm;
    if (s == "piecewise-closed-form") return Backend::PiecewiseClosedForm;
    if (s == "numerically-integrated" || s == "integrated") return Backend::Integrated;
    if (s == "discretized-pde") return Backend::DiscretizedPde;
    throw ArgumentError("unknown backend '" + s + "'");
}

std::string to_string(Part p) { return p == Part::Stable ? "stable" : "unstable"; }

EvolutionProcess::EvolutionProcess(int dimension, TimeDomain domain, bool invertible,
                                   Backend backend, MatrixFn matrix, std::string name)
    : dim_(dimension),
      domain_(domain),
      invertible_(invertible),
      backend_(backend),
      name_(std::move(name)),
      matrix_(std::move(matrix)) {
    if (dim_ < 1) throw ArgumentError("process dimension must be positive");
    if (!matrix_) throw ArgumentError("process needs a matrix evaluator");
}

EvolutionProcess EvolutionProcess::scalar_exponent(TimeDomain domain, LogScalarFn exponent,
                                                   Backend backend, std::string name) {
    auto E = exponent;
    EvolutionProcess p(
        1, domain, true, backend,
        [E](double t, double s) {
            Eigen::MatrixXd m(1, 1);
            m(0, 0) = std::exp(E(t, s));
            return m;
        },
        std::move(name));
    p.log_scalar_ = std::move(exponent);
    return p;
}

EvolutionProcess EvolutionProcess::linear_ode(int dimension, TimeDomain domain,
                                              std::function<Eigen::MatrixXd(double)> A,
                                              const IntegratorOptions& opts, std::string name) {
    const int n = dimension;
    auto rhs = [A, n](double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
        const Eigen::MatrixXd At = A(t);
        Eigen::Map<const Eigen::MatrixXd> X(x.data(), n, n);
        Eigen::Map<Eigen::MatrixXd> dX(dx.data(), n, n);
        dX.noalias() = At * X;
    };
    // Unit-length chunks restarted from the identity keep the error relative: a single
    // integration would let atol swamp propagators that decay far below 1.
    auto chunks = [](double s, double t) {
        std::vector<double> c{s};
        const double dir = t >= s ? 1.0 : -1.0;
        for (double u = s + dir; dir * (t - u) > 1e-12; u += dir) c.push_back(u);
        c.push_back(t);
        return c;
    };
    EvolutionProcess p(
        n, domain, true, Backend::Integrated,
        [rhs, n, opts, chunks](double t, double s) {
            const auto c = chunks(s, t);
            Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
            for (std::size_t k = 1; k < c.size(); ++k) {
                Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(
                    Eigen::MatrixXd::Identity(n, n).eval().data(), n * n);
                x = integrate(rhs, c[k - 1], c[k], x, opts);
                M = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n) * M;
                if (!(M.norm() <= opts.overflow_guard))
                    throw FiniteEscapeError("fundamental matrix crossed the overflow guard", c[k]);
            }
            return M;
        },
        std::move(name));
    p.tolerance_ = opts.rtol;
    p.sweep_ = true;
    p.apply_ = [A, opts, chunks](double t, double s, const Eigen::VectorXd& x0) {
        auto f = [&A](double tt, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
            dx.noalias() = A(tt) * x;
        };
        const auto c = chunks(s, t);
        Eigen::VectorXd x = x0;
        double scale = 1.0;
        for (std::size_t k = 1; k < c.size(); ++k) {
            const double r = x.norm();
            if (r == 0) return x;
            x = integrate(f, c[k - 1], c[k], Eigen::VectorXd(x / r), opts);
            scale *= r;
            if (!(scale * x.norm() <= opts.overflow_guard))
                throw FiniteEscapeError("state crossed the overflow guard", c[k]);
        }
        return Eigen::VectorXd(scale * x);
    };
    return p;
}

void EvolutionProcess::validate(double t, double s) const {
    if (!std::isfinite(t) || !std::isfinite(s)) throw ArgumentError("non-finite time argument");
    if (!contains(domain_, t) || !contains(domain_, s))
        throw ArgumentError("time pair (" + fmt_time(t) + "," + fmt_time(s) +
                            ") outside domain " + to_string(domain_));
    if (t < s && !invertible_) throw ArgumentError("t < s requires an invertible process");
}

Eigen::MatrixXd EvolutionProcess::matrix(double t, double s) const {
    validate(t, s);
    if (t == s) return Eigen::MatrixXd::Identity(dim_, dim_);
    return matrix_(t, s);
}

Eigen::VectorXd EvolutionProcess::apply(double t, double s, const Eigen::VectorXd& x) const {
    validate(t, s);
    if (x.size() != dim_) throw ArgumentError("state dimension mismatch");
    if (t == s) return x;
    if (apply_) return apply_(t, s, x);
    return matrix_(t, s) * x;
}

double EvolutionProcess::log_scalar(double t, double s) const {
    if (!log_scalar_) throw ContractError("process has no closed-form log evaluator");
    validate(t, s);
    if (t == s) return 0.0;
    return log_scalar_(t, s);
}

EvolutionProcess& EvolutionProcess::set_tolerance(double tol) {
    tolerance_ = tol;
    return *this;
}
EvolutionProcess& EvolutionProcess::set_apply(ApplyFn fn) {
    apply_ = std::move(fn);
    return *this;
}
EvolutionProcess& EvolutionProcess::set_sweep(bool on) {
    sweep_ = on;
    return *this;
}
EvolutionProcess& EvolutionProcess::set_name(std::string name) {
    name_ = std::move(name);
    return *this;
}

EvolutionProcess& EvolutionProcess::set_split(std::shared_ptr<const ProjectionFamily> family,
                                              SplitFn fn) {
    if (!family || !fn) throw ArgumentError("set_split: needs a family and an evaluator");
    split_family_ = std::move(family);
    split_ = std::move(fn);
    return *this;
}

Eigen::MatrixXd EvolutionProcess::split(double t, double s, Part part) const {
    if (!split_) throw ContractError("process has no split evaluator");
    validate(t, s);
    return split_(t, s, part);
}

std::string to_string(ProjectionKind k) {
    switch (k) {
        case ProjectionKind::Zero: return "zero";
        case ProjectionKind::Identity: return "identity";
        case ProjectionKind::Explicit: return "explicit";
    }
    return "zero";
}

ProjectionKind parse_projection(const std::string& s) {
    if (s == "zero") return ProjectionKind::Zero;
    if (s == "identity") return ProjectionKind::Identity;
    if (s == "explicit") return ProjectionKind::Explicit;
    throw ArgumentError("unknown projection kind '" + s + "'");
}

ProjectionFamily ProjectionFamily::zero(int dim) {
    return {ProjectionKind::Zero, dim, [dim](double) { return Eigen::MatrixXd::Zero(dim, dim); }};
}

ProjectionFamily ProjectionFamily::identity(int dim) {
    return {ProjectionKind::Identity, dim,
            [dim](double) { return Eigen::MatrixXd::Identity(dim, dim); }};
}

ProjectionFamily ProjectionFamily::from_function(int dim,
                                                 std::function<Eigen::MatrixXd(double)> unstable) {
    return {ProjectionKind::Explicit, dim, std::move(unstable)};
}

ProjectionFamily ProjectionFamily::of_kind(ProjectionKind k, int dim) {
    if (k == ProjectionKind::Zero) return zero(dim);
    if (k == ProjectionKind::Identity) return identity(dim);
    throw ArgumentError("explicit projections need a function");
}

Eigen::MatrixXd ProjectionFamily::unstable(double t) const { return fn_(t); }

Eigen::MatrixXd ProjectionFamily::stable(double t) const {
    return Eigen::MatrixXd::Identity(dim_, dim_) - fn_(t);
}

ProjectionFamily ProjectionFamily::dual() const {
    ProjectionFamily d = [&] {
        if (kind_ == ProjectionKind::Zero) return identity(dim_);
        if (kind_ == ProjectionKind::Identity) return zero(dim_);
        auto f = fn_;
        const int n = dim_;
        return from_function(n, [f, n](double t) {
            return Eigen::MatrixXd((Eigen::MatrixXd::Identity(n, n) - f(t)).transpose());
        });
    }();
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    if (id_->dual_strong) {
        d.id_ = id_->dual_strong;
    } else if (auto back = id_->dual_weak.lock()) {
        d.id_ = back;
    } else {
        id_->dual_strong = d.id_;
        d.id_->dual_weak = id_;
    }
    return d;
}

double idempotence_residual(const ProjectionFamily& P, const std::vector<double>& times) {
    double r = 0.0;
    for (double t : times) {
        const Eigen::MatrixXd U = P.unstable(t);
        r = std::max(r, (U * U - U).norm());
    }
    return r;
}

double invariance_residual(const ProjectionFamily& P, const EvolutionProcess& p,
                           const std::vector<std::pair<double, double>>& pairs) {
    double r = 0.0;
    for (auto [t, s] : pairs) {
        const Eigen::MatrixXd S = p.matrix(t, s);
        const double scale = 1.0 + S.norm();
        r = std::max(r, (P.unstable(t) * S - S * P.unstable(s)).norm() / scale);
    }
    return r;
}

GridSpec GridSpec::uniform(double lo, double hi, double step) {
    if (!(step > 0) || hi < lo) throw ArgumentError("grid needs lo <= hi and step > 0");
    GridSpec g;
    const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) {
        double v = lo + static_cast<double>(i) * step;
        if (std::abs(v) < 1e-12 * step) v = 0.0;
        g.mesh.push_back(v);
    }
    if (g.mesh.back() < hi - 1e-12 * std::max(1.0, std::abs(hi))) g.mesh.push_back(hi);
    if (lo < 0 && hi > 0) g.mesh.push_back(0.0);
    std::sort(g.mesh.begin(), g.mesh.end());
    g.mesh.erase(std::unique(g.mesh.begin(), g.mesh.end()), g.mesh.end());
    return g;
}

GridSpec GridSpec::from_mesh(std::vector<double> mesh) {
    GridSpec g;
    std::sort(mesh.begin(), mesh.end());
    mesh.erase(std::unique(mesh.begin(), mesh.end()), mesh.end());
    g.mesh = std::move(mesh);
    return g;
}

GridSpec GridSpec::horizon(TimeDomain d, double h, double step) {
    switch (d) {
        case TimeDomain::Full: return uniform(-h, h, step);
        case TimeDomain::Plus: return uniform(0.0, h, step);
        case TimeDomain::Minus: return uniform(-h, 0.0, step);
    }
    return uniform(-h, h, step);
}

GridSpec GridSpec::restricted(TimeDomain d) const {
    GridSpec g = *this;
    g.mesh.clear();
    for (double v : mesh)
        if (contains(d, v)) g.mesh.push_back(v);
    return g;
}

GridSpec GridSpec::window(double lo, double hi) const {
    GridSpec g = *this;
    g.mesh.clear();
    for (double v : mesh)
        if (v >= lo && v <= hi) g.mesh.push_back(v);
    return g;
}

std::vector<NormSample> NormGrid::part(Part p) const {
    std::vector<NormSample> out;
    for (const auto& s : samples)
        if (s.part == p) out.push_back(s);
    return out;
}

double spectral_norm(const Eigen::MatrixXd& S) {
    if (S.size() == 0) return 0.0;
    if (!S.allFinite()) return std::numeric_limits<double>::infinity();
    if (S.size() == 1) return std::abs(S(0, 0));
    const double scale = S.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    const Eigen::MatrixXd A = S / scale;
    if (A.rows() == 2 && A.cols() == 2) {
        const double a = A(0, 0), b = A(0, 1), c = A(1, 0), d = A(1, 1);
        const double s1 = std::hypot(a + d, c - b);
        const double s2 = std::hypot(a - d, b + c);
        return scale * 0.5 * (s1 + s2);
    }
    if (A.cols() <= 3 && A.rows() <= 3) {
        const Eigen::MatrixXd G = A.transpose() * A;
        double lmax;
        if (G.cols() == 1) {
            lmax = G(0, 0);
        } else if (G.cols() == 2) {
            const double tr = G(0, 0) + G(1, 1);
            const double diff = G(0, 0) - G(1, 1);
            lmax = 0.5 * (tr + std::sqrt(diff * diff + 4.0 * G(0, 1) * G(1, 0)));
        } else {
            lmax = sym3_max_eig(G);
        }
        return scale * std::sqrt(std::max(lmax, 0.0));
    }
    return scale * power_iteration_norm(A);
}

Eigen::VectorXd propagate(const EvolutionProcess& p, double t, double s, const Eigen::VectorXd& x) {
    Eigen::VectorXd y = p.apply(t, s, x);
    if (!y.allFinite() || y.norm() > kGuard) {
        // locate the crossing of the guard along [s, t] by bisection
        double lo = s, hi = t;
        for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo + hi);
            Eigen::VectorXd ym;
            bool over = true;
            try {
                ym = p.apply(mid, s, x);
                over = !ym.allFinite() || ym.norm() > kGuard;
            } catch (const FiniteEscapeError&) {
                over = true;
            }
            (over ? hi : lo) = mid;
        }
        throw FiniteEscapeError("finite escape: |S(t,s)x| exceeded the overflow guard", hi);
    }
    return y;
}

double propagate(const EvolutionProcess& p, double t, double s, double x) {
    Eigen::VectorXd v(1);
    v[0] = x;
    return propagate(p, t, s, v)[0];
}

namespace {

void check_direction(const EvolutionProcess& p, double t, double s, Part part) {
    if (part == Part::Stable && t < s) throw ArgumentError("stable part needs t >= s");
    if (part == Part::Unstable) {
        if (t > s) throw ArgumentError("unstable part needs t <= s");
        if (t < s && !p.invertible()) throw ArgumentError("unstable part needs an invertible process");
    }
}

Eigen::MatrixXd part_projection(const ProjectionFamily* proj, Part part, double s, int dim) {
    if (!proj) return Eigen::MatrixXd::Identity(dim, dim);
    return part == Part::Stable ? proj->stable(s) : proj->unstable(s);
}

}  // namespace

double log_operator_norm(const EvolutionProcess& p, double t, double s,
                         const ProjectionFamily* proj, Part part) {
    check_direction(p, t, s, part);
    if (proj && p.split_family() && proj->identity() == p.split_family()->identity()) {
        const double n = spectral_norm(p.split(t, s, part));
        if (!std::isfinite(n) || n > kGuard)
            throw FiniteEscapeError("finite escape: operator norm exceeded the overflow guard", t);
        return std::log(n);
    }
    if (p.has_log_scalar()) {
        const double pi = part_projection(proj, part, s, 1)(0, 0);
        if (pi == 0.0) return -std::numeric_limits<double>::infinity();
        return p.log_scalar(t, s) + std::log(std::abs(pi));
    }
    const Eigen::MatrixXd S = p.matrix(t, s);
    const double n = spectral_norm(S * part_projection(proj, part, s, p.dimension()));
    if (!std::isfinite(n) || spectral_norm(S) > kGuard)
        throw FiniteEscapeError("finite escape: operator norm exceeded the overflow guard", t);
    return std::log(n);
}

double operator_norm(const EvolutionProcess& p, double t, double s, const ProjectionFamily* proj,
                     Part part) {
    const double ln = log_operator_norm(p, t, s, proj, part);
    if (ln > kLogGuard)
        throw FiniteEscapeError("finite escape: operator norm exceeded the overflow guard", t);
    return std::exp(ln);
}

EvolutionProcess dual_process(const EvolutionProcess& p) {
    if (!p.invertible()) throw ContractError("dual_process needs an invertible process");
    auto base = p;
    EvolutionProcess d(
        p.dimension(), p.domain(), true, p.backend(),
        [base](double t, double s) { return Eigen::MatrixXd(base.matrix(s, t).transpose()); },
        "dual(" + p.name() + ")");
    d.set_tolerance(p.tolerance()).set_sweep(p.prefers_sweep());
    if (p.has_log_scalar()) {
        d = EvolutionProcess::scalar_exponent(
            p.domain(), [base](double t, double s) { return base.log_scalar(s, t); },
            p.backend(), "dual(" + p.name() + ")");
        d.set_tolerance(p.tolerance());
    }
    if (p.split_family()) {
        auto fam = std::make_shared<const ProjectionFamily>(p.split_family()->dual());
        d.set_split(fam, [base](double t, double s, Part part) -> Eigen::MatrixXd {
            const Part other = part == Part::Stable ? Part::Unstable : Part::Stable;
            return base.split(s, t, other).transpose();
        });
    }
    return d;
}

namespace {

struct Column {
    std::vector<NormSample> samples;
    std::vector<PoisonedSample> poisoned;
    std::size_t vacuous = 0;
};

void record(Column& col, const EvolutionProcess& p, double t, double s, Part part,
            const std::function<double()>& eval) {
    (void)p;
    try {
        const double ln = eval();
        if (ln == -std::numeric_limits<double>::infinity()) {
            ++col.vacuous;
        } else if (!std::isfinite(ln) || ln > kLogGuard * 100) {
            col.poisoned.push_back({t, s, part, "non-finite norm"});
        } else {
            col.samples.push_back({t, s, ln, part});
        }
    } catch (const NumericError& e) {
        col.poisoned.push_back({t, s, part, e.what()});
    }
}

}  // namespace

NormGrid sample_norm_grid(const EvolutionProcess& p, const ProjectionFamily* proj,
                          const GridSpec& grid) {
    NormGrid out;
    std::vector<double> mesh;
    for (double v : grid.mesh)
        if (contains(p.domain(), v)) mesh.push_back(v);
    if (mesh.size() != grid.mesh.size())
        throw ArgumentError("grid mesh leaves the process domain " + to_string(p.domain()));
    const std::size_t n = mesh.size();
    const bool do_stable = grid.stable && (!proj || proj->has_stable_part());
    const bool do_unstable =
        grid.unstable && proj && proj->has_unstable_part() && p.invertible();
    const int dim = p.dimension();
    const bool sweep = p.prefers_sweep() && !p.has_log_scalar();

    std::vector<Column> stable_cols(n), unstable_cols(n);
    // Consecutive-mesh propagators for the sweep path.
    std::vector<Eigen::MatrixXd> fwd, bwd;
    std::vector<bool> fwd_bad, bwd_bad;
    if (sweep && n > 1) {
        fwd.resize(n - 1);
        fwd_bad.assign(n - 1, false);
        if (do_unstable) {
            bwd.resize(n - 1);
            bwd_bad.assign(n - 1, false);
        }
        parallel_for(n - 1, [&](std::size_t i) {
            try {
                fwd[i] = p.matrix(mesh[i + 1], mesh[i]);
            } catch (const NumericError&) {
                fwd_bad[i] = true;
            }
            if (do_unstable) {
                try {
                    bwd[i] = p.matrix(mesh[i], mesh[i + 1]);
                } catch (const NumericError&) {
                    bwd_bad[i] = true;
                }
            }
        });
    }

    parallel_for(n, [&](std::size_t j) {
        const double s = mesh[j];
        if (do_stable) {
            Column& col = stable_cols[j];
            const Eigen::MatrixXd Ps = part_projection(proj, Part::Stable, s, dim);
            Eigen::MatrixXd X = Eigen::MatrixXd::Identity(dim, dim);
            bool broken = false;
            for (std::size_t i = j; i < n; ++i) {
                const double t = mesh[i];
                if (t - s > grid.max_gap) break;
                if (!sweep) {
                    record(col, p, t, s, Part::Stable,
                           [&] { return log_operator_norm(p, t, s, proj, Part::Stable); });
                    continue;
                }
                if (i > j) {
                    if (broken || fwd_bad[i - 1]) {
                        broken = true;
                    } else {
                        X = fwd[i - 1] * X;
                        if (!X.allFinite() || X.cwiseAbs().maxCoeff() > kGuard) broken = true;
                    }
                }
                if (broken) {
                    col.poisoned.push_back({t, s, Part::Stable, "overflow guard"});
                    continue;
                }
                record(col, p, t, s, Part::Stable,
                       [&] { return std::log(spectral_norm(X * Ps)); });
            }
        }
        if (do_unstable) {
            Column& col = unstable_cols[j];
            const Eigen::MatrixXd Pu = part_projection(proj, Part::Unstable, s, dim);
            Eigen::MatrixXd X = Eigen::MatrixXd::Identity(dim, dim);
            bool broken = false;
            for (std::size_t k = 0; k <= j; ++k) {
                const std::size_t i = j - k;
                const double t = mesh[i];
                if (s - t > grid.max_gap) break;
                if (!sweep) {
                    record(col, p, t, s, Part::Unstable,
                           [&] { return log_operator_norm(p, t, s, proj, Part::Unstable); });
                    continue;
                }
                if (i < j) {
                    if (broken || bwd_bad[i]) {
                        broken = true;
                    } else {
                        X = bwd[i] * X;
                        if (!X.allFinite() || X.cwiseAbs().maxCoeff() > kGuard) broken = true;
                    }
                }
                if (broken) {
                    col.poisoned.push_back({t, s, Part::Unstable, "overflow guard"});
                    continue;
                }
                record(col, p, t, s, Part::Unstable,
                       [&] { return std::log(spectral_norm(X * Pu)); });
            }
        }
    });

    for (auto* cols : {&stable_cols, &unstable_cols}) {
        for (auto& c : *cols) {
            out.samples.insert(out.samples.end(), c.samples.begin(), c.samples.end());
            out.poisoned.insert(out.poisoned.end(), c.poisoned.begin(), c.poisoned.end());
            out.vacuous += c.vacuous;
        }
    }
    return out;
}

double cocycle_residual(const EvolutionProcess& p, const std::vector<double>& times,
                        const Eigen::VectorXd& x) {
    double r = 0.0;
    const double scale = 1.0 + x.norm();
    for (std::size_t i = 0; i < times.size(); ++i)
        for (std::size_t k = 0; k <= i; ++k)
            for (std::size_t j = 0; j <= k; ++j) {
                const double t = times[i], tau = times[k], s = times[j];
                const Eigen::VectorXd a = p.apply(t, tau, p.apply(tau, s, x));
                const Eigen::VectorXd b = p.apply(t, s, x);
                r = std::max(r, (a - b).norm() / scale);
            }
    return r;
}

namespace {

std::size_t piece_of(const std::vector<double>& breaks, double t) {
    return static_cast<std::size_t>(std::upper_bound(breaks.begin(), breaks.end(), t) - breaks.begin());
}

// Ordered cut points from s to t (inclusive) at the breaks in between.
std::vector<double> cuts_between(const std::vector<double>& breaks, double s, double t) {
    std::vector<double> c{s};
    if (t >= s) {
        for (double b : breaks)
            if (b > s && b < t) c.push_back(b);
    } else {
        for (auto it = breaks.rbegin(); it != breaks.rend(); ++it)
            if (*it < s && *it > t) c.push_back(*it);
    }
    c.push_back(t);
    return c;
}

void check_breaks(const std::vector<double>& breaks, std::size_t pieces) {
    for (std::size_t i = 1; i < breaks.size(); ++i)
        if (!(breaks[i] > breaks[i - 1])) throw ArgumentError("breaks must be strictly ascending");
    if (pieces != breaks.size() + 1) throw ArgumentError("need one piece more than breaks");
}

}  // namespace

EvolutionProcess planted_process(TimeDomain d, const Eigen::MatrixXd& V, std::vector<double> breaks,
                                 std::vector<std::vector<double>> rates, std::vector<bool> unstable,
                                 std::string name) {
    const int n = static_cast<int>(V.rows());
    if (V.cols() != n || n == 0) throw ArgumentError("planted_process: V must be square");
    if (static_cast<int>(rates.size()) != n || static_cast<int>(unstable.size()) != n)
        throw ArgumentError("planted_process: one rate list and flag per mode");
    for (const auto& r : rates) check_breaks(breaks, r.size());
    Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
    if (!lu.isInvertible()) throw ArgumentError("planted_process: V must be invertible");
    const Eigen::MatrixXd Vi = lu.inverse();
    auto phi = [breaks, rates](int i, double t, double s) {
        const auto c = cuts_between(breaks, s, t);
        double acc = 0;
        for (std::size_t k = 1; k < c.size(); ++k)
            acc += rates[i][piece_of(breaks, 0.5 * (c[k - 1] + c[k]))] * (c[k] - c[k - 1]);
        return acc;
    };
    auto build = [V, Vi, phi, n](double t, double s, const std::vector<double>& mask) {
        Eigen::VectorXd g(n);
        for (int i = 0; i < n; ++i) g(i) = mask[i] == 0 ? 0.0 : std::exp(phi(i, t, s));
        return Eigen::MatrixXd(V * g.asDiagonal() * Vi);
    };
    std::vector<double> all(n, 1.0), um(n), sm(n);
    Eigen::VectorXd pu(n);
    for (int i = 0; i < n; ++i) {
        um[i] = unstable[i] ? 1.0 : 0.0;
        sm[i] = 1.0 - um[i];
        pu(i) = um[i];
    }
    EvolutionProcess p(n, d, true, Backend::PiecewiseClosedForm,
                       [build, all](double t, double s) { return build(t, s, all); }, std::move(name));
    const Eigen::MatrixXd Pu = V * pu.asDiagonal() * Vi;
    auto fam = std::make_shared<const ProjectionFamily>(
        ProjectionFamily::from_function(n, [Pu](double) { return Pu; }));
    p.set_split(fam, [build, um, sm](double t, double s, Part part) {
        return build(t, s, part == Part::Stable ? sm : um);
    });
    p.set_tolerance(1e-13);
    return p;
}

EvolutionProcess piecewise_constant_process(TimeDomain d, std::vector<double> breaks,
                                            std::vector<Eigen::MatrixXd> generators, std::string name) {
    check_breaks(breaks, generators.size());
    const int n = static_cast<int>(generators.front().rows());
    for (const auto& A : generators)
        if (A.rows() != n || A.cols() != n) throw ArgumentError("piecewise_constant_process: generator shape");
    return EvolutionProcess(
               n, d, true, Backend::PiecewiseClosedForm,
               [breaks, generators, n](double t, double s) {
                   const auto c = cuts_between(breaks, s, t);
                   Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
                   for (std::size_t k = 1; k < c.size(); ++k) {
                       const auto& A = generators[piece_of(breaks, 0.5 * (c[k - 1] + c[k]))];
                       M = Eigen::MatrixXd((A * (c[k] - c[k - 1])).exp()) * M;
                   }
                   return M;
               },
               std::move(name))
        .set_tolerance(1e-12);
}

}  // namespace ned
