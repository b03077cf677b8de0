#include "ned/attractor.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numeric>
#include <random>

#include "ned/errors.hpp"
#include "ned/parallel.hpp"

namespace ned {

double state_norm(const Eigen::VectorXd& x, StateNorm n) {
    return n == StateNorm::Max ? x.lpNorm<Eigen::Infinity>() : x.norm();
}

WeightedFunction WeightedFunction::scalar(std::function<double(double)> f, double eta, TimeDomain d) {
    WeightedFunction w;
    w.evaluator = [f = std::move(f)](double t) {
        Eigen::VectorXd v(1);
        v(0) = f(t);
        return v;
    };
    w.eta = eta;
    w.domain = d;
    return w;
}

double WeightedFunction::magnitude(double t) const { return state_norm(evaluator(t), norm); }

double weighted_norm(const WeightedFunction& b, const std::vector<double>& mesh, double eta) {
    double best = 0;
    for (double r : mesh) {
        if (!contains(b.domain, r)) throw ArgumentError("weighted_norm: grid leaves the function domain");
        best = std::max(best, std::exp(-eta * std::abs(r)) * b.magnitude(r));
    }
    return best;
}

double weighted_norm(const WeightedFunction& b, const std::vector<double>& mesh) {
    return weighted_norm(b, mesh, b.eta);
}

void SetFamily::validate() const {
    for (const auto& [t, c] : sections)
        if (c.empty()) throw ArgumentError("SetFamily: empty section");
}

double RadiusEnvelope::admissibility_norm(const std::vector<double>& mesh) const {
    double best = 0;
    for (double t : mesh) {
        if (!contains(domain, t)) continue;
        const double r = evaluator(t);
        best = std::max(best, std::exp(-admissible_exponent() * std::abs(t)) * (squared ? r * r : r));
    }
    return best;
}

namespace {

// Adaptive Gauss-Kronrod over unit pieces.
double quad(const std::function<double(double)>& f, double a, double b, double* err_out = nullptr) {
    using boost::math::quadrature::gauss_kronrod;
    if (a == b) return 0.0;
    const double sign = b > a ? 1.0 : -1.0;
    const double lo = std::min(a, b), hi = std::max(a, b);
    const int pieces = std::max(1, static_cast<int>(std::ceil(hi - lo)));
    const double w = (hi - lo) / pieces;
    double sum = 0, err = 0;
    for (int i = 0; i < pieces; ++i) {
        const double x0 = lo + i * w, x1 = i + 1 == pieces ? hi : lo + (i + 1) * w;
        double e = 0;
        sum += gauss_kronrod<double, 31>::integrate(f, x0, x1, 15, 1e-14, &e);
        err += e;
    }
    if (err_out) *err_out = err;
    return sign * sum;
}

void require_zero_projection(const DichotomyCertificate& c, const char* who) {
    if (c.projection != ProjectionKind::Zero)
        throw ContractError(std::string(who) + ": needs a certificate with zero unstable projection");
    c.validate();
}

std::vector<double> uniform_vec(std::mt19937_64& rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = u(rng);
    return v;
}

Eigen::VectorXd to_vec(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

WitnessReport check_dissipativity(const DissipativitySpec& spec, const SampleBox& box,
                                  std::size_t samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(box.t_lo, box.t_hi);
    WitnessReport r;
    r.note = "sampled check of the dissipativity inequality; not a proof of the global bound";
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = ut(rng);
        if (!contains(spec.b.domain, t)) continue;
        const Eigen::VectorXd x = to_vec(uniform_vec(rng, spec.dimension, -box.x_radius, box.x_radius));
        const double lhs = 2 * spec.field(t, x).dot(x);
        const double rhs = spec.a(t) * x.squaredNorm() + spec.b.magnitude(t);
        ++r.samples;
        const double v = lhs - rhs;
        if (v > 1e-12 * (1 + std::abs(rhs))) {
            ++r.violations;
            r.max_violation = std::max(r.max_violation, v);
        }
    }
    return r;
}

WitnessReport check_cooperative(const CooperativeSpec& spec, const SampleBox& box,
                                std::size_t samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(box.t_lo, box.t_hi);
    std::uniform_int_distribution<int> ui(0, spec.dimension - 1);
    WitnessReport r;
    r.note = "sampled check of quasimonotonicity, b >= 0, boundary and comparison conditions";
    auto bad = [&](double v) {
        if (v > 1e-12) {
            ++r.violations;
            r.max_violation = std::max(r.max_violation, v);
        }
    };
    for (std::size_t k = 0; k < samples; ++k) {
        const double t = ut(rng);
        const Eigen::MatrixXd A = spec.A(t);
        const Eigen::VectorXd b = spec.b(t);
        Eigen::VectorXd x = to_vec(uniform_vec(rng, spec.dimension, 0, box.x_radius));
        ++r.samples;
        for (int i = 0; i < spec.dimension; ++i) {
            bad(-b(i));
            for (int j = 0; j < spec.dimension; ++j)
                if (i != j) bad(-A(i, j));
        }
        const Eigen::VectorXd f = spec.field(t, x);
        const Eigen::VectorXd bound = A * x + b;
        for (int i = 0; i < spec.dimension; ++i) bad((f(i) - bound(i)) / (1 + std::abs(bound(i))));
        const int i = ui(rng);
        x(i) = 0;
        bad(-spec.field(t, x)(i));
    }
    return r;
}

EvolutionProcess comparison_process(std::function<double(double)> a, TimeDomain domain,
                                    std::function<double(double, double)> log_T) {
    if (log_T)
        return EvolutionProcess::scalar_exponent(domain, std::move(log_T), Backend::ClosedForm,
                                                 "comparison");
    return EvolutionProcess::scalar_exponent(
               domain, [a = std::move(a)](double t, double s) { return quad(a, s, t); },
               Backend::Integrated, "comparison")
        .set_tolerance(1e-12);
}

double comparison_bound(const EvolutionProcess& T, const DichotomyCertificate& certT,
                        const WeightedFunction& b, double t, double s, double x0sq) {
    if (T.dimension() != 1) throw ArgumentError("comparison_bound: T must be scalar");
    if (certT.kind != Kind::II) throw ContractError("comparison_bound: needs a NEDII certificate");
    require_zero_projection(certT, "comparison_bound");
    if (t < s) throw ArgumentError("comparison_bound: needs t >= s");
    auto logT = [&](double tt, double ss) {
        return T.has_log_scalar() ? T.log_scalar(tt, ss) : std::log(T.matrix(tt, ss)(0, 0));
    };
    double err = 0;
    const double integral =
        quad([&](double tau) { return std::exp(logT(t, tau)) * b.magnitude(tau); }, s, t, &err);
    if (!std::isfinite(integral) || err > 1e-10 * (1 + std::abs(integral)))
        throw NumericError("comparison_bound: quadrature did not converge");
    return std::exp(logT(t, s)) * x0sq + integral;
}

RadiusEnvelope pullback_envelope(const DichotomyCertificate& cert, double lambda, double bnorm,
                                 bool cooperative) {
    if (cert.kind != Kind::II) throw ContractError("pullback_envelope: needs a NEDII certificate");
    if (!contains(cert.domain, TimeDomain::Minus))
        throw ContractError("pullback_envelope: certificate must cover R-");
    require_zero_projection(cert, "pullback_envelope");
    if (!(bnorm >= 0)) throw ArgumentError("pullback_envelope: bnorm must be >= 0");
    const double a = cert.stable.rate, d = cert.stable.growth;
    if (!(a - d * lambda > 0)) throw InapplicableError("pullback_envelope: needs alpha > delta lambda");
    RadiusEnvelope e;
    e.M = cert.M;
    e.rate = a;
    e.growth = d;
    e.lambda = lambda;
    e.bnorm = bnorm;
    e.squared = !cooperative;
    e.domain = TimeDomain::Minus;
    const double k = cert.M / (a - d * lambda) * bnorm;
    e.evaluator = [k, lambda, d, cooperative](double t) {
        if (t > 0) throw ArgumentError("pullback envelope lives on R-");
        const double v = k * std::exp((lambda + 1) * d * std::abs(t));
        return cooperative ? v : std::sqrt(v);
    };
    return e;
}

double pullback_radius(const DichotomyCertificate& cert, double lambda, double bnorm, double t) {
    return pullback_envelope(cert, lambda, bnorm)(t);
}

ForwardCase forward_case(double eta, double beta, double nu, double tol) {
    if (nu <= 0) return ForwardCase::Above;
    const double crit = -beta / nu;
    if (std::abs(eta - crit) <= tol) return ForwardCase::Critical;
    return eta > crit ? ForwardCase::Above : ForwardCase::Below;
}

RadiusEnvelope pullback_envelope_line(const DichotomyCertificate& minus, const DichotomyCertificate& plus,
                                      double lambda, double eta, double bnorm_minus, double bnorm_plus) {
    RadiusEnvelope e = pullback_envelope(minus, lambda, bnorm_minus);
    if (plus.kind != Kind::II || !contains(plus.domain, TimeDomain::Plus))
        throw ContractError("pullback_envelope_line: needs a NEDII certificate on R+");
    require_zero_projection(plus, "pullback_envelope_line");
    const double b = plus.stable.rate, n = plus.stable.growth;
    if (forward_case(eta, b, n) != ForwardCase::Above)
        throw InapplicableError("pullback_envelope_line: only eta > -beta/nu is supported");
    auto left = e.evaluator;
    const double km = minus.M / (minus.stable.rate - minus.stable.growth * lambda) * bnorm_minus;
    const double kp = plus.M / (b + n * eta) * bnorm_plus;
    const double Mp = plus.M;
    e.domain = TimeDomain::Full;
    // For t > 0 the R- contribution is carried forward by T(t,0) <= M e^{(nu-beta)t}.
    e.evaluator = [left, km, kp, Mp, b, n, eta](double t) {
        if (t <= 0) return left(t);
        return std::sqrt(kp * std::exp((eta + 1) * n * t) + Mp * std::exp((n - b) * t) * km);
    };
    return e;
}

double forward_bound(const DichotomyCertificate& cert, double eta, double bnorm, double t, double s,
                     double x0sq) {
    if (cert.kind != Kind::II || !contains(cert.domain, TimeDomain::Plus))
        throw ContractError("forward_bound: needs a NEDII certificate on R+");
    require_zero_projection(cert, "forward_bound");
    if (!(t >= s && s >= 0)) throw ArgumentError("forward_bound: needs t >= s >= 0");
    const double M = cert.M, b = cert.stable.rate, n = cert.stable.growth;
    const double hom = M * std::exp((n - b) * t + b * s) * x0sq;
    switch (forward_case(eta, b, n)) {
        case ForwardCase::Above:
            return hom + M / (b + n * eta) * bnorm * std::exp((eta + 1) * n * std::abs(t));
        case ForwardCase::Critical:
            return hom + M * bnorm * std::exp((n - b) * t) * t;
        case ForwardCase::Below:
            return hom - M * bnorm / (b + eta * n) * std::exp((n - b) * t) * std::exp(n * (eta + 1) * s);
    }
    return hom;
}

ForwardAttractor forward_attractor_radius(const DichotomyCertificate& cert, double eta, double bnorm) {
    if (cert.kind != Kind::I || !contains(cert.domain, TimeDomain::Plus))
        throw ContractError("forward_attractor_radius: needs a NEDI certificate on R+");
    require_zero_projection(cert, "forward_attractor_radius");
    if (eta > -1 + 1e-12) throw InapplicableError("forward_attractor_radius: needs eta <= -1");
    if (eta < -1 - 1e-12) return {true, 0.0};
    return {false, std::sqrt(cert.M / cert.stable.rate * bnorm)};
}

ForwardAttractor forward_attractor_radius_line(const DichotomyCertificate& cert, double lambda,
                                               double bnorm) {
    if (cert.kind != Kind::II || cert.domain != TimeDomain::Full)
        throw ContractError("forward_attractor_radius_line: needs a NEDII certificate on R");
    require_zero_projection(cert, "forward_attractor_radius_line");
    const double a = cert.stable.rate, d = cert.stable.growth;
    if (!(a > d)) throw InapplicableError("forward_attractor_radius_line: needs alpha > delta");
    if (lambda > -1 + 1e-12 || (d > 0 && lambda <= -a / d))
        throw InapplicableError("forward_attractor_radius_line: needs lambda in (-alpha/delta, -1]");
    if (lambda < -1 - 1e-12) return {true, 0.0};
    return {false, std::sqrt(cert.M * bnorm / (a - d))};
}

Flow ode_flow(const Field& f, int dimension, const IntegratorOptions& opts) {
    Flow fl;
    fl.dimension = dimension;
    Rhs rhs = [f](double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) { dx = f(t, x); };
    fl.advance = [rhs, opts](double t, double s, const Eigen::VectorXd& x) {
        return integrate(rhs, s, t, x, opts);
    };
    return fl;
}

double UniverseFamily::radius(double s) const { return C * std::exp(gamma * std::abs(s)); }

namespace {

Eigen::VectorXd draw_seed(std::mt19937_64& rng, int n, const UniverseFamily& u, double s) {
    const double R = u.radius(s);
    if (u.nonnegative) return to_vec(uniform_vec(rng, n, 0, R));
    if (u.norm == StateNorm::Max) return to_vec(uniform_vec(rng, n, -R, R));
    std::normal_distribution<double> g(0, 1);
    std::uniform_real_distribution<double> uu(0, 1);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = g(rng);
    const double nx = x.norm();
    if (nx == 0) return Eigen::VectorXd::Zero(n);
    return x / nx * R * std::pow(uu(rng), 1.0 / n);
}

int find(std::vector<int>& p, int i) {
    while (p[i] != i) i = p[i] = p[p[i]];
    return i;
}

}  // namespace

std::pair<std::vector<int>, Cloud> cluster_points(const Cloud& pts, double eps, StateNorm norm) {
    const int n = static_cast<int>(pts.size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (state_norm(pts[i] - pts[j], norm) <= eps) {
                const int a = find(parent, i), b = find(parent, j);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
    std::vector<int> ids(n), label(n, -1);
    Cloud reps;
    std::vector<int> counts;
    for (int i = 0; i < n; ++i) {
        const int root = find(parent, i);
        if (label[root] < 0) {
            label[root] = static_cast<int>(reps.size());
            reps.push_back(Eigen::VectorXd::Zero(pts[i].size()));
            counts.push_back(0);
        }
        ids[i] = label[root];
        reps[ids[i]] += pts[i];
        ++counts[ids[i]];
    }
    for (std::size_t c = 0; c < reps.size(); ++c) reps[c] /= counts[c];
    return {ids, reps};
}

double hausdorff_semidistance(const Cloud& A, const Cloud& B, StateNorm norm) {
    if (A.empty() || B.empty()) throw ArgumentError("hausdorff_semidistance: empty cloud");
    double worst = 0;
    for (const auto& a : A) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& b : B) best = std::min(best, state_norm(a - b, norm));
        worst = std::max(worst, best);
    }
    return worst;
}

double hausdorff_distance(const Cloud& A, const Cloud& B, StateNorm norm) {
    return std::max(hausdorff_semidistance(A, B, norm), hausdorff_semidistance(B, A, norm));
}

std::vector<double> pullback_schedule(double t, int K) {
    if (K < 0) throw ArgumentError("pullback_schedule: K must be >= 0");
    std::vector<double> s;
    for (int k = 0; k <= K; ++k) s.push_back(t - std::ldexp(1.0, k));
    return s;
}

namespace {

void finish(OmegaResult& r, const std::vector<std::vector<Trajectory>>& per_entry, std::size_t first_kept,
            const OmegaOptions& opts) {
    Cloud ends;
    for (std::size_t k = first_kept; k < per_entry.size(); ++k)
        for (const auto& tr : per_entry[k]) {
            r.kept.push_back(tr);
            ends.push_back(tr.end);
        }
    if (ends.empty()) throw NumericError("omega-limit simulation: every kept trajectory was poisoned");
    auto [ids, reps] = cluster_points(ends, opts.cluster_eps, opts.norm);
    for (std::size_t i = 0; i < ids.size(); ++i) r.kept[i].cluster = ids[i];
    r.cloud = reps;
    for (std::size_t k = first_kept; k < per_entry.size(); ++k) {
        Cloud c;
        for (const auto& tr : per_entry[k]) c.push_back(tr.end);
        if (!c.empty()) r.depth_clouds.push_back(cluster_points(c, opts.cluster_eps, opts.norm).second);
    }
    if (r.depth_clouds.size() >= 2) {
        r.last_depth_distance = hausdorff_distance(r.depth_clouds[r.depth_clouds.size() - 2],
                                                   r.depth_clouds.back(), opts.norm);
        r.converged = r.last_depth_distance <= opts.cluster_eps;
    }
}

std::size_t first_kept(std::size_t n, double burn_in) {
    if (!(burn_in >= 0 && burn_in < 1)) throw ArgumentError("burn-in fraction must lie in [0,1)");
    return static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(n)));
}

}  // namespace

OmegaResult simulate_pullback_omega(const Flow& flow, double t, const std::vector<double>& schedule,
                                    const UniverseFamily& seeds, const OmegaOptions& opts) {
    if (schedule.empty()) throw ArgumentError("simulate_pullback_omega: empty schedule");
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        if (schedule[k] > t) throw ArgumentError("simulate_pullback_omega: schedule entries must be <= t");
        if (k && !(schedule[k] < schedule[k - 1]))
            throw ArgumentError("simulate_pullback_omega: schedule must be strictly decreasing");
    }
    if (opts.seeds_per_time == 0) throw ArgumentError("simulate_pullback_omega: needs seeds");
    std::mt19937_64 rng(opts.seed);
    const std::size_t m = opts.seeds_per_time, n = schedule.size();
    std::vector<Eigen::VectorXd> starts;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < m; ++i) starts.push_back(draw_seed(rng, flow.dimension, seeds, schedule[k]));
    std::vector<std::optional<Eigen::VectorXd>> ends(n * m);
    std::vector<std::string> why(n * m);
    parallel_for(n * m, [&](std::size_t j) {
        try {
            ends[j] = flow.advance(t, schedule[j / m], starts[j]);
        } catch (const NumericError& e) {
            why[j] = e.what();
        }
    });
    OmegaResult r;
    r.t = t;
    std::vector<std::vector<Trajectory>> per(n);
    for (std::size_t j = 0; j < n * m; ++j) {
        if (!ends[j]) {
            ++r.poisoned;
            r.poison_reasons.push_back(why[j]);
            continue;
        }
        per[j / m].push_back({schedule[j / m], starts[j], *ends[j], -1});
    }
    finish(r, per, first_kept(n, opts.burn_in), opts);
    return r;
}

OmegaResult simulate_forward_omega(const Flow& flow, const Cloud& B, double tau,
                                   const std::vector<double>& horizons, const OmegaOptions& opts) {
    if (B.empty()) throw ArgumentError("simulate_forward_omega: empty initial cloud");
    if (horizons.empty()) throw ArgumentError("simulate_forward_omega: empty horizon schedule");
    for (std::size_t k = 0; k < horizons.size(); ++k)
        if (horizons[k] < 0 || (k && !(horizons[k] > horizons[k - 1])))
            throw ArgumentError("simulate_forward_omega: horizons must be nonnegative and increasing");
    const std::size_t n = horizons.size(), m = B.size();
    std::vector<std::vector<std::optional<Eigen::VectorXd>>> states(m, std::vector<std::optional<Eigen::VectorXd>>(n));
    std::vector<std::string> why(m);
    parallel_for(m, [&](std::size_t i) {
        try {
            Eigen::VectorXd x = B[i];
            double now = tau;
            for (std::size_t k = 0; k < n; ++k) {
                x = flow.advance(tau + horizons[k], now, x);
                now = tau + horizons[k];
                states[i][k] = x;
            }
        } catch (const NumericError& e) {
            why[i] = e.what();
        }
    });
    OmegaResult r;
    r.t = tau + horizons.back();
    std::vector<std::vector<Trajectory>> per(n);
    for (std::size_t i = 0; i < m; ++i) {
        if (!why[i].empty()) {
            ++r.poisoned;
            r.poison_reasons.push_back(why[i]);
            continue;
        }
        for (std::size_t k = 0; k < n; ++k) per[k].push_back({tau + horizons[k], B[i], *states[i][k], -1});
    }
    finish(r, per, first_kept(n, opts.burn_in), opts);
    return r;
}

ContainmentReport verify_containment(const SetFamily& family, const RadiusEnvelope& envelope,
                                     StateNorm norm) {
    family.validate();
    ContainmentReport r;
    r.min_margin = std::numeric_limits<double>::infinity();
    for (const auto& [t, cloud] : family.sections) {
        double worst = 0;
        for (const auto& x : cloud) worst = std::max(worst, state_norm(x, norm));
        const double m = envelope(t) - worst;
        r.margins.emplace_back(t, m);
        r.min_margin = std::min(r.min_margin, m);
    }
    if (r.margins.empty()) r.min_margin = 0;
    return r;
}

MembershipReport universe_membership(const SetFamily& family, double gamma, StateNorm norm) {
    family.validate();
    if (family.sections.empty()) throw ArgumentError("universe_membership: no sections");
    double H = 0;
    for (const auto& [t, c] : family.sections) H = std::max(H, std::abs(t));
    double C = 0, Ch = 0;
    for (const auto& [t, cloud] : family.sections)
        for (const auto& x : cloud) {
            const double v = std::exp(-gamma * std::abs(t)) * state_norm(x, norm);
            C = std::max(C, v);
            if (std::abs(t) <= H / 2) Ch = std::max(Ch, v);
        }
    MembershipReport r;
    r.C_half = Ch;
    r.growth_factor = Ch > 0 ? C / Ch : (C > 0 ? std::numeric_limits<double>::infinity() : 1.0);
    r.flagged = r.growth_factor >= std::exp(1.0);
    if (!r.flagged && std::isfinite(C)) r.C = C;
    return r;
}

double gamma0(double lambda, double delta) { return 0.5 * (1 + lambda) * delta; }

CoincidenceReport attractor_coincidence(const Flow& flow, double gamma_0,
                                        const std::vector<double>& gammas, double gamma_limit,
                                        const std::vector<double>& times, int K, double C,
                                        const OmegaOptions& opts) {
    for (double g : gammas)
        if (!(g > gamma_0 && g < gamma_limit))
            throw InapplicableError("attractor_coincidence: needs gamma0 < gamma < the universe limit");
    if (times.empty()) throw ArgumentError("attractor_coincidence: empty time grid");
    CoincidenceReport r;
    auto run = [&](double g) {
        SetFamily fam;
        for (double t : times)
            fam.sections[t] =
                simulate_pullback_omega(flow, t, pullback_schedule(t, K), UniverseFamily{g, C, false, opts.norm}, opts)
                    .cloud;
        r.sections[g] = fam;
        return fam;
    };
    const SetFamily base = run(gamma_0);
    for (double g : gammas) {
        const SetFamily fam = run(g);
        double d = 0;
        for (double t : times)
            d = std::max(d, hausdorff_distance(fam.sections.at(t), base.sections.at(t), opts.norm));
        r.gammas.push_back(g);
        r.distances.push_back(d);
    }
    return r;
}

OrderReport check_order_preservation(const Flow& flow, double s, const std::vector<double>& times,
                                     std::size_t pairs, double radius, std::uint64_t seed) {
    for (std::size_t k = 0; k < times.size(); ++k)
        if (times[k] < s || (k && !(times[k] > times[k - 1])))
            throw ArgumentError("check_order_preservation: times must be increasing and >= s");
    std::mt19937_64 rng(seed);
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> init;
    for (std::size_t p = 0; p < pairs; ++p) {
        Eigen::VectorXd x = to_vec(uniform_vec(rng, flow.dimension, -radius, radius));
        Eigen::VectorXd y = x + to_vec(uniform_vec(rng, flow.dimension, 0, radius));
        init.emplace_back(x, y);
    }
    std::vector<double> worst(pairs, -std::numeric_limits<double>::infinity());
    std::vector<std::size_t> bad(pairs, 0);
    parallel_for(pairs, [&](std::size_t p) {
        Eigen::VectorXd x = init[p].first, y = init[p].second;
        double now = s;
        for (double t : times) {
            x = flow.advance(t, now, x);
            y = flow.advance(t, now, y);
            now = t;
            const double w = (x - y).maxCoeff();
            worst[p] = std::max(worst[p], w);
            if (w > 0) ++bad[p];
        }
    });
    OrderReport r;
    r.pairs = pairs;
    r.worst = pairs ? *std::max_element(worst.begin(), worst.end()) : 0.0;
    for (auto b : bad) r.violations += b ? 1 : 0;
    return r;
}

}  // namespace ned
