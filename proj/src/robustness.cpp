#include "ned/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ned/errors.hpp"
#include "ned/parallel.hpp"

namespace ned {

bool RobustnessReport::admissible() const {
    return flags.radical_nonnegative && flags.log_argument_positive && flags.rho_below_one &&
           flags.M1_positive && flags.M2_positive && flags.upsilon_below_omega;
}

double RobustnessReport::w_positive() const {
    if (w_sign_flipped > 0) return w_sign_flipped;
    if (w_as_written > 0) return w_as_written;
    return std::numeric_limits<double>::quiet_NaN();
}

double RobustnessReport::bound_constant() const {
    if (!L) throw ContractError("bound constant needs the growth constant L");
    return M_hat * M_hat * std::exp(2 * omega_tilde) * std::max(*L, *L * *L);
}

RobustnessReport robustness_constants(double M, double omega, double upsilon, double eps) {
    if (!(M >= 1)) throw ArgumentError("robustness_constants: M must be >= 1");
    if (!(omega > 0)) throw ArgumentError("robustness_constants: omega must be positive");
    if (!(upsilon >= 0)) throw ArgumentError("robustness_constants: upsilon must be >= 0");
    if (!(eps >= 0)) throw ArgumentError("robustness_constants: eps must be >= 0");
    RobustnessReport r;
    r.M = M;
    r.omega = omega;
    r.upsilon = upsilon;
    r.eps = eps;
    const double sh = std::sinh(omega);
    const double ch = std::cosh(omega);
    // cosh^2 - 1 - 2 eps sinh = sinh (sinh - 2 eps)
    const double radicand = sh * (sh - 2 * eps);
    r.flags.radical_nonnegative = radicand >= 0;
    const double q = 1 - 2 * eps / sh;  // radicand / sinh^2
    const double root_ratio = std::sqrt(q);
    const double denom = ch + sh * root_ratio;
    const double arg = (1 + 2 * eps * sh) / denom;  // cosh - sqrt(radicand)
    r.flags.log_argument_positive = arg > 0;
    // ln(cosh + sqrt(radicand)) = omega + ln(1 - 2 eps e^{-omega} / (1 + root_ratio))
    r.beta_tilde = omega + std::log1p(-2 * eps * std::exp(-omega) / (1 + root_ratio));
    r.omega_tilde = r.beta_tilde - std::log1p(2 * eps * sh);
    const double one_minus_ew = -std::expm1(-omega);
    r.rho = eps * (1 + std::exp(-omega)) / one_minus_ew;
    r.flags.rho_below_one = r.rho < 1;
    const double b1 = 1 - eps * std::exp(-omega) / -std::expm1(-omega - r.omega_tilde);
    const double b2 = 1 - eps * std::exp(-r.beta_tilde) / -std::expm1(-omega - r.beta_tilde);
    r.M1 = 1 / b1;
    r.M2 = 1 / b2;
    r.flags.M1_positive = b1 > 0;
    r.flags.M2_positive = b2 > 0;
    r.flags.upsilon_below_omega = upsilon < omega;
    r.M_hat = M * (1 + eps / ((1 - r.rho) * one_minus_ew)) * std::max(r.M1, r.M2);
    r.w_as_written = r.omega_tilde - omega;
    r.w_sign_flipped = omega - r.omega_tilde;
    r.flipped_is_positive = r.w_sign_flipped > 0;
    return r;
}

GridSpec band_grid(double lo, double hi, double step) {
    GridSpec g = GridSpec::uniform(lo, hi, step);
    g.unstable = false;
    g.max_gap = 1.0 + 1e-12;
    return g;
}

namespace {

double golden_max(const std::function<double(double)>& f, double a, double b, int iters = 60) {
    const double r = (std::sqrt(5.0) - 1) / 2;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters && b - a > 1e-13; ++i) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return (a + b) / 2;
}

SupResult band_sup(const std::function<double(double, double)>& value, TimeDomain domain,
                   const GridSpec& band) {
    SupResult r;
    const auto& mesh = band.mesh;
    const std::size_t n = mesh.size();
    struct Col {
        double best = -1;
        double t = 0, s = 0;
        std::size_t count = 0;
        std::vector<PoisonedSample> bad;
    };
    std::vector<Col> cols(n);
    parallel_for(n, [&](std::size_t j) {
        Col& c = cols[j];
        const double s = mesh[j];
        for (std::size_t i = j; i < n && mesh[i] - s <= band.max_gap; ++i) {
            try {
                const double v = value(mesh[i], s);
                ++c.count;
                if (v > c.best) {
                    c.best = v;
                    c.t = mesh[i];
                    c.s = s;
                }
            } catch (const NumericError& e) {
                c.bad.push_back({mesh[i], s, Part::Stable, e.what()});
            }
        }
    });
    r.grid_value = -1;
    for (const auto& c : cols) {
        r.samples += c.count;
        r.poisoned.insert(r.poisoned.end(), c.bad.begin(), c.bad.end());
        if (c.count && c.best > r.grid_value) {
            r.grid_value = c.best;
            r.t = c.t;
            r.s = c.s;
        }
    }
    if (r.samples == 0) {
        r.grid_value = 0;
        return r;
    }
    r.value = r.grid_value;
    const double step = n > 1 ? (mesh.back() - mesh.front()) / static_cast<double>(n - 1) : 0.0;
    const double gap = std::isfinite(band.max_gap) ? band.max_gap : 1.0;
    if (step > 0) {
        auto safe = [&](double t, double s) {
            if (!contains(domain, t) || !contains(domain, s) || t < s || t - s > gap) return -1.0;
            if (s < mesh.front() || t > mesh.back()) return -1.0;
            try {
                return value(t, s);
            } catch (const NumericError&) {
                return -1.0;
            }
        };
        const double s0 = r.s;
        const double ta = std::max(s0, r.t - step), tb = std::min({s0 + gap, r.t + step, mesh.back()});
        double tr = r.t;
        if (tb > ta) tr = golden_max([&](double t) { return safe(t, s0); }, ta, tb);
        const double sa = std::max({tr - gap, s0 - step, mesh.front()}), sb = std::min(tr, s0 + step);
        double sr = s0;
        if (sb > sa) sr = golden_max([&](double s) { return safe(tr, s); }, sa, sb);
        const double refined = safe(tr, sr);
        r.refinement_residual = refined - r.grid_value;
        if (refined > r.value) {
            r.value = refined;
            r.t = tr;
            r.s = sr;
        }
    }
    return r;
}

}  // namespace

SupResult perturbation_distance(const EvolutionProcess& p, const EvolutionProcess& q,
                                double upsilon, const GridSpec& band) {
    if (p.dimension() != q.dimension()) throw ArgumentError("perturbation_distance: dimension mismatch");
    if (p.domain() != q.domain()) throw ArgumentError("perturbation_distance: domain mismatch");
    return band_sup(
        [&](double t, double s) {
            return std::exp(upsilon * std::abs(s)) * spectral_norm(p.matrix(t, s) - q.matrix(t, s));
        },
        p.domain(), band);
}

SupResult growth_constant(const EvolutionProcess& p, double upsilon, const GridSpec& band) {
    return band_sup(
        [&](double t, double s) {
            return std::exp(-upsilon * std::abs(t)) * spectral_norm(p.matrix(t, s));
        },
        p.domain(), band);
}

PipelineResult robust_nedii_pipeline(const EvolutionProcess& p, const DichotomyCertificate& cert,
                                     const EvolutionProcess& q, double upsilon, double eps,
                                     const GridSpec& band, const GridSpec& check_grid,
                                     const std::optional<DichotomyCertificate>& nedi_cert) {
    if (!p.invertible() || !q.invertible())
        throw ContractError("robust_nedii_pipeline: processes must be invertible");
    if (cert.kind != Kind::II) throw ContractError("robust_nedii_pipeline: needs a NEDII certificate");
    PipelineResult res;
    if (nedi_cert) res.nedi_route_applicable = nedi_cert->omega() > nedi_cert->upsilon();
    const double w = cert.omega();
    if (!(w > upsilon)) {
        res.reason = "omega <= upsilon: the NEDII hypothesis fails";
        return res;
    }
    const EvolutionProcess pd = dual_process(p);
    const EvolutionProcess qd = dual_process(q);
    res.distance = perturbation_distance(pd, qd, upsilon, band).value;
    if (!(res.distance < eps)) {
        res.reason = "dual perturbation distance is not below eps";
        return res;
    }
    res.constants = robustness_constants(cert.M, w, upsilon, eps);
    res.constants.L = growth_constant(qd, upsilon, band).value;
    if (!res.constants.admissible()) {
        res.reason = "robustness constants are inadmissible";
        return res;
    }
    const double rate = res.constants.w_positive();
    const double C = res.constants.bound_constant();
    const ExponentPair pair{rate, 2 * upsilon};

    DichotomyCertificate dual = dual_certificate(cert);
    dual.M = C;
    dual.stable = pair;
    if (dual.unstable) dual.unstable = pair;
    DichotomyCertificate primal = cert;
    primal.converted_from.reset();
    primal.M = C;
    primal.stable = pair;
    if (primal.unstable) primal.unstable = pair;

    res.projections_validated = cert.projection != ProjectionKind::Explicit;
    res.dual_violation = check_certificate(qd, dual, check_grid).max_violation;
    res.primal_violation = check_certificate(q, primal, check_grid).max_violation;
    res.dual_of_q = dual;
    res.primal_of_q = primal;
    res.applicable = true;
    return res;
}

}  // namespace ned
