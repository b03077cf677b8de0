#include "ned/dichotomy.hpp"

#include <algorithm>
#include <cmath>

#include "ned/errors.hpp"
#include "ned/parallel.hpp"

namespace ned {

namespace {

double anchor(Kind k, double t, double s) { return k == Kind::II ? std::abs(t) : std::abs(s); }

double cross(const std::pair<double, double>& o, const std::pair<double, double>& a,
             const std::pair<double, double>& b) {
    return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
}

std::vector<std::pair<double, double>> curve_points(const std::vector<NormSample>& samples,
                                                    Kind kind, Part part, double rate) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(samples.size());
    for (const auto& x : samples) {
        if (x.part != part) continue;
        const double gap = part == Part::Stable ? x.t - x.s : x.s - x.t;
        pts.emplace_back(anchor(kind, x.t, x.s), x.log_norm + rate * gap);
    }
    return pts;
}

std::vector<double> rate_grid(double lo, double hi, double step) {
    std::vector<double> out;
    const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

std::vector<NormSample> in_window(const std::vector<NormSample>& all, double lo, double hi) {
    std::vector<NormSample> out;
    for (const auto& x : all)
        if (x.t >= lo && x.t <= hi && x.s >= lo && x.s <= hi) out.push_back(x);
    return out;
}

// Minimal ln M over the box for one part, given the part's samples.
WindowEvidence box_minimum(const std::vector<NormSample>& samples, Kind kind, Part part,
                           const RejectionOptions& o) {
    WindowEvidence best{0, 0, std::numeric_limits<double>::infinity(), o.alpha_min, 0, 0};
    const auto rates = rate_grid(o.alpha_min, o.alpha_max, o.resolution);
    const auto growths = rate_grid(0.0, o.delta_max, o.resolution);
    std::vector<WindowEvidence> per_rate(rates.size(), best);
    parallel_for(rates.size(), [&](std::size_t i) {
        const BoundCurve c = BoundCurve::build(curve_points(samples, kind, part, rates[i]));
        WindowEvidence w = best;
        for (double d : growths) {
            const double v = c.min_lnM(d);
            if (v < w.min_lnM) {
                w.min_lnM = v;
                w.rate = rates[i];
                w.growth = d;
            }
        }
        per_rate[i] = w;
    });
    for (const auto& w : per_rate)
        if (w.min_lnM < best.min_lnM) best = w;
    return best;
}

WindowEvidence window_minimum(const std::vector<NormSample>& samples, Kind kind, bool stable,
                              bool unstable, const RejectionOptions& o) {
    WindowEvidence w{0, 0, 0.0, o.alpha_min, 0.0, samples.size()};
    bool first = true;
    for (Part part : {Part::Stable, Part::Unstable}) {
        if ((part == Part::Stable && !stable) || (part == Part::Unstable && !unstable)) continue;
        const WindowEvidence b = box_minimum(samples, kind, part, o);
        // parts have independent exponents, so the joint minimum is the max of the minima
        if (first || b.min_lnM > w.min_lnM) {
            w.min_lnM = b.min_lnM;
            w.rate = b.rate;
            w.growth = b.growth;
        }
        first = false;
    }
    w.samples = samples.size();
    return w;
}

}  // namespace

BoundCurve BoundCurve::build(std::vector<std::pair<double, double>> pts) {
    BoundCurve c;
    if (pts.empty()) return c;
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.first < b.first || (a.first == b.first && a.second > b.second);
    });
    std::vector<std::pair<double, double>> uniq;
    for (const auto& p : pts)
        if (uniq.empty() || p.first != uniq.back().first) uniq.push_back(p);
    std::vector<std::pair<double, double>> hull;
    for (const auto& p : uniq) {
        while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) >= 0)
            hull.pop_back();
        hull.push_back(p);
    }
    // Only vertices left of the highest one can maximise y - delta a for delta >= 0.
    std::size_t top = 0;
    for (std::size_t i = 1; i < hull.size(); ++i)
        if (hull[i].second > hull[top].second) top = i;
    hull.resize(top + 1);
    c.hull_ = std::move(hull);
    return c;
}

double BoundCurve::min_lnM(double delta) const {
    double m = 0.0;
    for (const auto& [a, y] : hull_) m = std::max(m, y - delta * a);
    return m;
}

std::optional<double> BoundCurve::min_delta(double budget) const {
    double d = 0.0;
    for (const auto& [a, y] : hull_) {
        if (a == 0.0) {
            if (y > budget) return std::nullopt;
        } else {
            d = std::max(d, (y - budget) / a);
        }
    }
    return d;
}

std::vector<double> BoundCurve::breakpoints() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < hull_.size(); ++i) {
        const double slope =
            (hull_[i].second - hull_[i - 1].second) / (hull_[i].first - hull_[i - 1].first);
        if (slope > 0) out.push_back(slope);
    }
    std::sort(out.begin(), out.end());
    return out;
}

BoundCurve bound_curve(const NormGrid& grid, Kind kind, Part part, double rate) {
    return BoundCurve::build(curve_points(grid.samples, kind, part, rate));
}

ParetoFrontier fit_bounds(const NormGrid& grid, Kind kind, Part part,
                          const std::vector<double>& alphas, const FitOptions& opts) {
    if (grid.samples.empty()) {
        if (!grid.poisoned.empty()) throw DataError("fit_bounds: every sample is poisoned");
        throw ArgumentError("fit_bounds: empty norm grid");
    }
    for (std::size_t i = 1; i < alphas.size(); ++i)
        if (!(alphas[i] > alphas[i - 1]))
            throw ArgumentError("fit_bounds: alpha grid must be strictly increasing");
    ParetoFrontier f{kind, part, opts, 0, {}};
    for (const auto& x : grid.samples)
        if (x.part == part) ++f.samples;
    if (f.samples == 0) throw ArgumentError("fit_bounds: no samples for the requested part");
    f.entries.resize(alphas.size());
    parallel_for(alphas.size(), [&](std::size_t i) {
        const double a = alphas[i];
        FrontierEntry e{a, 0.0, 0.0, true, bound_curve(grid, kind, part, a)};
        const auto d = e.curve.min_delta(opts.lnM_max);
        if (d && *d <= opts.delta_max) {
            e.delta = *d;
            e.lnM = e.curve.min_lnM(*d);
        } else {
            e.feasible = false;
            e.delta = opts.delta_max;
            e.lnM = e.curve.min_lnM(opts.delta_max);
        }
        f.entries[i] = std::move(e);
    });
    return f;
}

CheckReport check_certificate(const NormGrid& grid, const DichotomyCertificate& cert) {
    CheckReport r;
    r.poisoned = grid.poisoned;
    const double lnM = std::log(cert.M);
    for (const auto& x : grid.samples) {
        if (!contains(cert.domain, x.t) || !contains(cert.domain, x.s)) continue;
        const double a = anchor(cert.kind, x.t, x.s);
        double bound;
        if (x.part == Part::Stable) {
            bound = lnM + cert.stable.growth * a - cert.stable.rate * (x.t - x.s);
        } else {
            if (!cert.unstable) continue;
            bound = lnM + cert.unstable->growth * a + cert.unstable->rate * (x.t - x.s);
        }
        const double v = x.log_norm - bound;
        ++r.samples;
        if (v > r.max_violation) {
            r.max_violation = v;
            r.worst_t = x.t;
            r.worst_s = x.s;
            r.worst_part = x.part;
        }
    }
    return r;
}

CheckReport check_certificate(const EvolutionProcess& p, const DichotomyCertificate& cert,
                              const GridSpec& grid) {
    if (!contains(p.domain(), cert.domain))
        throw ArgumentError("certificate domain is not inside the process domain");
    const ProjectionFamily proj = cert.projections(p.dimension());
    // keep the caller's family object so exact split evaluators are recognised
    const ProjectionFamily* use =
        cert.projection == ProjectionKind::Explicit && cert.family ? cert.family.get() : &proj;
    const NormGrid samples = sample_norm_grid(p, use, grid.restricted(cert.domain));
    return check_certificate(samples, cert);
}

DichotomyCertificate convert_halfline(const DichotomyCertificate& cert) {
    if (!is_half_line(cert.domain))
        throw ArgumentError("convert_halfline: conversion applies to half-line certificates only");
    if (cert.converted_from && cert.converted_from->kind == swapped(cert.kind)) {
        DichotomyCertificate back = *cert.converted_from;
        return back;
    }
    DichotomyCertificate out = cert;
    out.kind = swapped(cert.kind);
    DichotomyCertificate source = cert;
    source.converted_from.reset();
    out.converted_from = std::make_shared<const DichotomyCertificate>(std::move(source));
    // Stable rates gain delta going I->II on R+ and II->I on R-; unstable rates lose nu.
    const bool adds = (cert.domain == TimeDomain::Plus) == (cert.kind == Kind::I);
    const double ds = cert.stable.growth;
    out.stable.rate = adds ? cert.stable.rate + ds : cert.stable.rate - ds;
    if (cert.unstable) {
        const double nu = cert.unstable->growth;
        out.unstable->rate = adds ? cert.unstable->rate - nu : cert.unstable->rate + nu;
        if (!(out.unstable->rate > 0))
            throw InapplicableError("convert_halfline: converted unstable rate is not positive");
    }
    if (cert.projection == ProjectionKind::Identity) {
        out.stable = *out.unstable;
    } else if (!(out.stable.rate > 0)) {
        throw InapplicableError("convert_halfline: converted stable rate is not positive");
    }
    return out;
}

DichotomyCertificate unify_exponents(const DichotomyCertificate& cert) {
    if (!is_half_line(cert.domain))
        throw ArgumentError("unify_exponents: needs a half-line certificate");
    const double w = cert.omega();
    const double u = cert.upsilon();
    if (!(w > u)) throw InapplicableError("unify_exponents: needs omega > upsilon");
    DichotomyCertificate out = cert;
    out.kind = swapped(cert.kind);
    out.converted_from.reset();
    out.stable = {w - u, u};
    if (cert.unstable) out.unstable = ExponentPair{w - u, u};
    return out;
}

DichotomyCertificate dual_certificate(const DichotomyCertificate& cert) {
    DichotomyCertificate out = cert;
    out.kind = swapped(cert.kind);
    out.converted_from.reset();
    switch (cert.projection) {
        case ProjectionKind::Zero:
            out.projection = ProjectionKind::Identity;
            out.unstable = cert.stable;
            out.stable = cert.stable;
            break;
        case ProjectionKind::Identity:
            out.projection = ProjectionKind::Zero;
            out.stable = cert.unstable ? *cert.unstable : cert.stable;
            out.unstable.reset();
            break;
        case ProjectionKind::Explicit:
            if (!cert.unstable) throw ArgumentError("explicit projection needs an unstable pair");
            out.stable = *cert.unstable;
            out.unstable = cert.stable;
            if (cert.family) out.family = std::make_shared<const ProjectionFamily>(cert.family->dual());
            break;
    }
    return out;
}

bool RejectionSeries::strictly_increasing() const {
    for (std::size_t i = 1; i < windows.size(); ++i)
        if (!(windows[i].min_lnM > windows[i - 1].min_lnM)) return false;
    return !windows.empty();
}

double RejectionSeries::growth() const {
    if (windows.size() < 2) return 0.0;
    return windows.back().min_lnM - windows.front().min_lnM;
}

bool RejectionSeries::rejects(double threshold) const {
    if (windows.size() < 2) return false;
    for (std::size_t i = 1; i < windows.size(); ++i)
        if (windows[i].min_lnM < windows[i - 1].min_lnM) return false;
    return growth() >= threshold;
}

RejectionSeries min_lnM_evidence(const EvolutionProcess& p, const ProjectionFamily* proj,
                                 const std::vector<GridSpec>& windows, Kind kind,
                                 const RejectionOptions& opts) {
    RejectionSeries r;
    r.kind = kind;
    r.projection = proj ? proj->kind() : ProjectionKind::Zero;
    const bool stable = !proj || proj->has_stable_part();
    const bool unstable = proj && proj->has_unstable_part();
    for (const auto& w : windows) {
        const NormGrid g = sample_norm_grid(p, proj, w);
        WindowEvidence e = window_minimum(g.samples, kind, stable, unstable, opts);
        e.lo = w.mesh.empty() ? 0.0 : w.mesh.front();
        e.hi = w.mesh.empty() ? 0.0 : w.mesh.back();
        r.windows.push_back(e);
    }
    return r;
}

std::vector<RejectionSeries> nedi_rejection_evidence(const EvolutionProcess& p,
                                                     const std::vector<GridSpec>& windows,
                                                     const std::vector<ProjectionKind>& kinds,
                                                     const RejectionOptions& opts) {
    if (p.dimension() != 1) throw ContractError("nedi_rejection_evidence: scalar processes only");
    for (std::size_t i = 1; i < windows.size(); ++i) {
        const auto& a = windows[i - 1].mesh;
        const auto& b = windows[i].mesh;
        if (a.empty() || b.empty() || b.front() > a.front() || b.back() < a.back() ||
            (b.front() == a.front() && b.back() == a.back()))
            throw ArgumentError("nedi_rejection_evidence: windows must be strictly nested");
    }
    std::vector<RejectionSeries> out;
    for (ProjectionKind k : kinds) {
        const ProjectionFamily proj = ProjectionFamily::of_kind(k, 1);
        out.push_back(min_lnM_evidence(p, &proj, windows, Kind::I, opts));
    }
    return out;
}

std::vector<GridSpec> nested_windows(TimeDomain d, const std::vector<double>& horizons,
                                     double step) {
    std::vector<GridSpec> out;
    for (double h : horizons) out.push_back(GridSpec::horizon(d, h, step));
    return out;
}

std::optional<DichotomyCertificate> certificate_from_fits(const ParetoFrontier* stable,
                                                          const ParetoFrontier* unstable,
                                                          Kind kind, TimeDomain domain,
                                                          const ProjectionFamily& proj) {
    auto pick = [](const ParetoFrontier& f) -> std::optional<FrontierEntry> {
        std::optional<FrontierEntry> best;
        for (const auto& e : f.entries) {
            if (!e.feasible) continue;
            if (!best || e.alpha - e.delta > best->alpha - best->delta + 1e-9) best = e;
        }
        return best;
    };
    DichotomyCertificate c;
    c.kind = kind;
    c.domain = domain;
    c.projection = proj.kind();
    if (proj.kind() == ProjectionKind::Explicit) c.family = std::make_shared<const ProjectionFamily>(proj);
    double lnM = 0.0;
    std::optional<FrontierEntry> s, u;
    if (stable) {
        s = pick(*stable);
        if (!s) return std::nullopt;
        lnM = std::max(lnM, s->lnM);
    }
    if (unstable) {
        u = pick(*unstable);
        if (!u) return std::nullopt;
        lnM = std::max(lnM, u->lnM);
    }
    if (!s && !u) return std::nullopt;
    if (u) c.unstable = ExponentPair{u->alpha, u->delta};
    c.stable = s ? ExponentPair{s->alpha, s->delta} : *c.unstable;
    c.M = std::exp(lnM);
    return c;
}

Classification classify(const EvolutionProcess& p, const ProjectionFamily& proj, TimeDomain domain,
                        const GridSpec& grid, const ClassifyOptions& opts) {
    Classification out;
    const GridSpec g = grid.restricted(domain);
    if (g.mesh.empty()) throw ArgumentError("classify: grid has no points in the domain");
    const NormGrid samples = sample_norm_grid(p, &proj, g);
    if (samples.samples.empty()) throw DataError("classify: no usable samples");
    double extent = 0.0;
    for (double v : g.mesh) extent = std::max(extent, std::abs(v));
    const bool has_stable = proj.has_stable_part();
    const bool has_unstable = proj.has_unstable_part() && p.invertible();

    for (Kind k : {Kind::I, Kind::II}) {
        RejectionSeries r;
        r.kind = k;
        r.projection = proj.kind();
        for (double f : opts.window_fractions) {
            const double lo = domain == TimeDomain::Plus ? 0.0 : -f * extent;
            const double hi = domain == TimeDomain::Minus ? 0.0 : f * extent;
            WindowEvidence e = window_minimum(in_window(samples.samples, lo, hi), k, has_stable,
                                              has_unstable, opts.reject);
            e.lo = lo;
            e.hi = hi;
            r.windows.push_back(e);
        }
        const bool rejected = r.rejects(opts.rejection_threshold);
        if (k == Kind::I) {
            out.evidence_I = r;
            out.rejected_I = rejected;
        } else {
            out.evidence_II = r;
            out.rejected_II = rejected;
        }
    }

    std::vector<double> alphas = opts.alphas;
    if (alphas.empty()) alphas = rate_grid(0.1, opts.fit.delta_max, 0.1);

    struct Candidate {
        Kind kind;
        std::optional<ParetoFrontier> s, u;
        std::optional<DichotomyCertificate> cert;
    };
    std::vector<Candidate> cands;
    for (Kind k : {Kind::II, Kind::I}) {
        if ((k == Kind::I && out.rejected_I) || (k == Kind::II && out.rejected_II)) continue;
        Candidate c{k, std::nullopt, std::nullopt, std::nullopt};
        if (has_stable) c.s = fit_bounds(samples, k, Part::Stable, alphas, opts.fit);
        if (has_unstable) c.u = fit_bounds(samples, k, Part::Unstable, alphas, opts.fit);
        c.cert = certificate_from_fits(c.s ? &*c.s : nullptr, c.u ? &*c.u : nullptr, k, domain, proj);
        cands.push_back(std::move(c));
    }
    const Candidate* chosen = nullptr;
    for (const auto& c : cands) {
        if (!c.cert) continue;
        if (!chosen) {
            chosen = &c;
            continue;
        }
        const double a = c.cert->omega() - c.cert->upsilon();
        const double b = chosen->cert->omega() - chosen->cert->upsilon();
        if (a > b + 1e-9) chosen = &c;
    }
    if (chosen) {
        out.kind = chosen->kind;
        out.certificate = chosen->cert;
        out.stable = chosen->s;
        out.unstable = chosen->u;
    }
    return out;
}

}  // namespace ned
