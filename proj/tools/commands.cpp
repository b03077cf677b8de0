#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "ned/attractor.hpp"
#include "ned/dichotomy.hpp"
#include "ned/errors.hpp"
#include "ned/gallery.hpp"
#include "ned/io.hpp"
#include "ned/parabolic.hpp"
#include "ned/robustness.hpp"

namespace ned::cli {

std::vector<double> parse_range(const std::string& spec) {
    std::vector<double> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ArgumentError("bad range '" + spec + "' (expected start:stop:step)");
        }
    }
    if (parts.size() != 3) throw ArgumentError("bad range '" + spec + "' (expected start:stop:step)");
    const double a = parts[0], b = parts[1], h = parts[2];
    if (!(h > 0) || b < a) throw ArgumentError("range needs step > 0 and stop >= start");
    std::vector<double> out;
    for (long k = 0;; ++k) {
        const double v = a + k * h;
        if (v > b + 1e-12) break;
        out.push_back(std::min(v, b));
    }
    return out;
}

namespace {

std::vector<double> parse_list(const std::string& spec) {
    if (spec.find(':') != std::string::npos) return parse_range(spec);
    std::vector<double> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ArgumentError("bad number '" + item + "' in list");
        }
    }
    return out;
}

std::vector<double> times_from_json(const Json& j) {
    if (j.is_string()) return parse_list(j.get<std::string>());
    return j.get<std::vector<double>>();
}

std::string stem(const std::string& out) {
    const auto slash = out.find_last_of('/');
    const auto dot = out.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out;
    return out.substr(0, dot);
}

void emit(const Json& j, const std::string& out) {
    if (out.empty()) {
        std::cout << j.dump(2) << '\n';
        return;
    }
    write_json_file(out, j);
    write_meta_sidecar(out);
}

template <class Writer>
void emit_csv(const std::string& out, Writer&& w) {
    std::ostringstream os;
    w(os);
    if (out.empty()) {
        std::cout << os.str();
        return;
    }
    write_text_file(out, os.str());
    write_meta_sidecar(out);
}

// --process file or --gallery name with --param key=value
struct ProcessSource {
    std::string file, gallery;
    std::vector<std::string> params;

    void add(CLI::App* c) {
        c->add_option("--process", file, "Process configuration JSON");
        c->add_option("--gallery", gallery, "Gallery entry name instead of a process file");
        c->add_option("--param", params, "Gallery parameter key=value (repeatable)");
    }
    LoadedProcess load() const {
        if (!file.empty() && !gallery.empty()) throw ArgumentError("give --process or --gallery, not both");
        if (!file.empty()) return process_from_json(read_json_file(file));
        if (gallery.empty()) throw ArgumentError("a process is required (--process or --gallery)");
        std::vector<std::pair<std::string, double>> kv;
        for (const auto& p : params) {
            const auto eq = p.find('=');
            if (eq == std::string::npos) throw ArgumentError("--param expects key=value, got '" + p + "'");
            kv.emplace_back(p.substr(0, eq), std::stod(p.substr(eq + 1)));
        }
        auto e = std::make_shared<const GalleryEntry>(gallery_entry(gallery, kv));
        return {e->process, {}, e};
    }
};

struct GridOptions {
    std::string side = "full";
    double horizon = 0, step = 0;

    void add(CLI::App* c, const char* side_default) {
        side = side_default;
        c->add_option("--side", side, "Time domain: full|plus|minus")->capture_default_str();
        c->add_option("--horizon", horizon, "Grid horizon (default: gallery canonical grid or 40)");
        c->add_option("--step", step, "Grid step (default 0.25)");
    }
    TimeDomain domain() const { return parse_domain(side); }
    GridSpec grid(const LoadedProcess& lp) const {
        const TimeDomain d = domain();
        if (horizon == 0 && step == 0 && lp.gallery) return lp.gallery->canonical_grid.restricted(d);
        const double h = horizon > 0 ? horizon : 40.0, st = step > 0 ? step : 0.25;
        if (!(h > 0) || !(st > 0)) throw ArgumentError("horizon and step must be positive");
        return GridSpec::horizon(d, h, st).restricted(lp.process.domain());
    }
};

ProjectionFamily projection_for(const LoadedProcess& lp, ProjectionKind k) {
    if (k != ProjectionKind::Explicit) return ProjectionFamily::of_kind(k, lp.process.dimension());
    if (!lp.family) throw ArgumentError("explicit projection needs a process that defines one (planted modes)");
    return *lp.family;
}

// ---------------------------------------------------------------- gallery

void add_gallery(CLI::App& app, std::function<int()>& action) {
    auto* g = app.add_subcommand("gallery", "List or evaluate the built-in example processes");
    g->require_subcommand(1);
    auto* list = g->add_subcommand("list", "Table of entries and their documented claims");
    auto json_out = std::make_shared<std::string>();
    list->add_option("--json", *json_out, "Also write the claims as JSON");
    list->callback([&action, json_out] {
        action = [json_out] {
            Json all = Json::array();
            std::cout << std::left << std::setw(20) << "entry" << std::setw(6) << "kind" << std::setw(7)
                      << "side" << std::setw(12) << "M" << std::setw(8) << "rate" << std::setw(8) << "growth"
                      << std::setw(10) << "proj" << "holds\n";
            for (const auto& name : gallery_names()) {
                const auto e = gallery_entry(name);
                Json je = {{"name", name}, {"parameters", Json::object()}, {"claims", Json::array()}};
                for (const auto& [k, v] : e.parameters) je["parameters"][k] = v;
                for (const auto& c : e.claims) {
                    const auto& cert = c.certificate;
                    std::cout << std::setw(20) << name << std::setw(6) << to_string(cert.kind) << std::setw(7)
                              << to_string(cert.domain) << std::setw(12) << std::setprecision(6) << cert.M
                              << std::setw(8) << cert.stable.rate << std::setw(8) << cert.stable.growth
                              << std::setw(10) << to_string(cert.projection) << (c.holds ? "yes" : "no")
                              << '\n';
                    je["claims"].push_back(to_json(c));
                }
                all.push_back(je);
            }
            if (!json_out->empty()) emit(all, *json_out);
            return Ok;
        };
    });

    auto* ev = g->add_subcommand("eval", "Check every claim of one entry");
    struct EvalOpts {
        std::string name, out;
        std::vector<std::string> params;
        double tol = 1e-9;
    };
    auto o = std::make_shared<EvalOpts>();
    ev->add_option("name", o->name, "Entry name")->required();
    ev->add_option("--param", o->params, "Parameter key=value (repeatable)");
    ev->add_option("--tol", o->tol, "Violation tolerance for holding claims")->capture_default_str();
    ev->add_option("--out", o->out, "Report JSON path (stdout when omitted)");
    ev->callback([&action, o] {
        action = [o] {
            if (!(o->tol > 0)) throw ArgumentError("--tol must be positive");
            ProcessSource src;
            src.gallery = o->name;
            src.params = o->params;
            const auto lp = src.load();
            const auto& e = *lp.gallery;
            Json rep = {{"name", e.name}, {"parameters", Json::object()}, {"claims", Json::array()}};
            for (const auto& [k, v] : e.parameters) rep["parameters"][k] = v;
            bool all_ok = true;
            for (const auto& c : e.claims) {
                Json jc = to_json(c);
                if (c.holds) {
                    const auto r = check_certificate(e.process, c.certificate,
                                                     e.canonical_grid.restricted(c.certificate.domain));
                    jc["check"] = to_json(r);
                    jc["verified"] = r.holds(o->tol);
                    all_ok = all_ok && r.holds(o->tol);
                } else if (!e.rejection_windows.empty()) {
                    const auto proj = ProjectionFamily::of_kind(c.certificate.projection, e.process.dimension());
                    const auto ev = min_lnM_evidence(e.process, &proj, e.rejection_windows, c.certificate.kind);
                    jc["rejection"] = to_json(ev);
                    jc["verified"] = ev.rejects();
                    all_ok = all_ok && ev.rejects();
                } else {
                    jc["verified"] = nullptr;
                }
                rep["claims"].push_back(jc);
            }
            rep["all_verified"] = all_ok;
            emit(rep, o->out);
            return all_ok ? Ok : ValidationFailure;
        };
    });
}

// ---------------------------------------------------------------- classify

void add_classify(CLI::App& app, std::function<int()>& action) {
    auto* c = app.add_subcommand("classify", "Fit exponent frontiers and pick a certificate");
    struct Opts {
        ProcessSource src;
        GridOptions grid;
        std::string kind, projection = "zero", alpha_grid, out;
        double delta_max = 8, lnM_max = 8;
    };
    auto o = std::make_shared<Opts>();
    o->src.add(c);
    o->grid.add(c, "full");
    c->add_option("--kind", o->kind, "I or II; omitted runs the full classifier");
    c->add_option("--projection", o->projection, "zero|identity|explicit")->capture_default_str();
    c->add_option("--alpha-grid", o->alpha_grid, "Exponent grid start:stop:step");
    c->add_option("--delta-max", o->delta_max, "Largest growth exponent")->capture_default_str();
    c->add_option("--lnM-max", o->lnM_max, "ln M budget")->capture_default_str();
    c->add_option("--out", o->out, "Frontier CSV (kind given) or classification JSON");
    c->callback([&action, o] {
        action = [o] {
            const auto lp = o->src.load();
            const auto proj = projection_for(lp, parse_projection(o->projection));
            const GridSpec grid = o->grid.grid(lp);
            const TimeDomain d = o->grid.domain();
            FitOptions fo;
            fo.delta_max = o->delta_max;
            fo.lnM_max = o->lnM_max;
            if (!(fo.delta_max > 0) || !(fo.lnM_max > 0)) throw ArgumentError("fit limits must be positive");
            std::vector<double> alphas;
            if (!o->alpha_grid.empty()) alphas = parse_range(o->alpha_grid);

            if (o->kind.empty()) {
                ClassifyOptions co;
                co.alphas = alphas;
                co.fit = fo;
                const auto cls = classify(lp.process, proj, d, grid, co);
                emit(to_json(cls), o->out);
                return cls.kind ? Ok : ValidationFailure;
            }
            if (alphas.empty()) alphas = parse_range("0.1:" + std::to_string(fo.delta_max) + ":0.1");
            const Kind k = parse_kind(o->kind);
            const NormGrid ng = sample_norm_grid(lp.process, &proj, grid);
            std::optional<ParetoFrontier> st, un;
            if (proj.has_stable_part()) st = fit_bounds(ng, k, Part::Stable, alphas, fo);
            if (proj.has_unstable_part()) un = fit_bounds(ng, k, Part::Unstable, alphas, fo);
            const auto cert = certificate_from_fits(st ? &*st : nullptr, un ? &*un : nullptr, k, d, proj);
            const std::string base = o->out.empty() ? std::string() : stem(o->out);
            const ParetoFrontier& shown = st ? *st : *un;
            emit_csv(o->out, [&](std::ostream& os) { write_frontier_csv(os, shown); });
            if (st && un && !o->out.empty())
                emit_csv(base + ".unstable.csv", [&](std::ostream& os) { write_frontier_csv(os, *un); });
            const Json jc = cert ? to_json(*cert) : Json(nullptr);
            if (o->out.empty())
                std::cout << jc.dump(2) << '\n';
            else
                emit(jc, base + ".certificate.json");
            std::cerr << ng.samples.size() << " samples, " << ng.poisoned.size() << " poisoned\n";
            if (!cert) {
                std::cerr << "no feasible certificate of kind " << o->kind << '\n';
                return ValidationFailure;
            }
            return Ok;
        };
    });
}

// ---------------------------------------------------------------- check / convert

void add_check(CLI::App& app, std::function<int()>& action) {
    auto* c = app.add_subcommand("check", "Check a certificate against a process on a grid");
    struct Opts {
        ProcessSource src;
        GridOptions grid;
        std::string cert, out;
        double tol = 1e-9;
    };
    auto o = std::make_shared<Opts>();
    o->src.add(c);
    o->grid.add(c, "full");
    c->add_option("--certificate", o->cert, "Certificate JSON")->required();
    c->add_option("--tol", o->tol, "Allowed violation")->capture_default_str();
    c->add_option("--out", o->out, "Report JSON path (stdout when omitted)");
    c->callback([&action, o] {
        action = [o] {
            if (!(o->tol > 0)) throw ArgumentError("--tol must be positive");
            const auto lp = o->src.load();
            const auto cert = certificate_from_json(read_json_file(o->cert), lp.family);
            GridOptions g = o->grid;
            if (g.side == "full") g.side = to_string(cert.domain);
            const auto r = check_certificate(lp.process, cert, g.grid(lp));
            Json j = to_json(r);
            j["certificate"] = to_json(cert);
            j["tolerance"] = o->tol;
            j["holds"] = r.holds(o->tol);
            emit(j, o->out);
            return r.holds(o->tol) ? Ok : ValidationFailure;
        };
    });
}

void add_convert(CLI::App& app, std::function<int()>& action) {
    auto* c = app.add_subcommand("convert", "Convert a half-line certificate between kinds I and II");
    struct Opts {
        std::string cert, out;
        bool unify = false;
    };
    auto o = std::make_shared<Opts>();
    c->add_option("--certificate", o->cert, "Certificate JSON")->required();
    c->add_flag("--unify", o->unify, "Also collapse the exponents to a common pair");
    c->add_option("--out", o->out, "Converted certificate JSON (stdout when omitted)");
    c->callback([&action, o] {
        action = [o] {
            auto cert = convert_halfline(certificate_from_json(read_json_file(o->cert)));
            if (o->unify) cert = unify_exponents(cert);
            emit(to_json(cert), o->out);
            return Ok;
        };
    });
}

// ---------------------------------------------------------------- reject

void add_reject(CLI::App& app, std::function<int()>& action) {
    auto* c = app.add_subcommand("reject", "Window evidence that a dichotomy kind fails");
    struct Opts {
        ProcessSource src;
        std::string side = "full", windows, projections = "zero,identity", kind = "I", out;
        double step = 0.25;
        RejectionOptions ro{0.05, 4.0, 4.0, 0.05};
    };
    auto o = std::make_shared<Opts>();
    o->src.add(c);
    c->add_option("--side", o->side, "full|plus|minus")->capture_default_str();
    c->add_option("--windows", o->windows, "Window horizons, comma list or start:stop:step");
    c->add_option("--step", o->step, "Window mesh step")->capture_default_str();
    c->add_option("--projection", o->projections, "Comma list of zero|identity")->capture_default_str();
    c->add_option("--kind", o->kind, "Kind to reject")->capture_default_str();
    c->add_option("--alpha-max", o->ro.alpha_max, "Exponent box upper end")->capture_default_str();
    c->add_option("--delta-max", o->ro.delta_max, "Growth box upper end")->capture_default_str();
    c->add_option("--resolution", o->ro.resolution, "Box resolution")->capture_default_str();
    c->add_option("--out", o->out, "Evidence JSON (stdout when omitted)");
    c->callback([&action, o] {
        action = [o] {
            const auto lp = o->src.load();
            std::vector<GridSpec> windows;
            if (!o->windows.empty()) {
                if (!(o->step > 0)) throw ArgumentError("--step must be positive");
                windows = nested_windows(parse_domain(o->side), parse_list(o->windows), o->step);
            } else if (lp.gallery && !lp.gallery->rejection_windows.empty()) {
                windows = lp.gallery->rejection_windows;
            } else {
                throw ArgumentError("--windows is required for this process");
            }
            std::vector<ProjectionKind> kinds;
            std::stringstream ss(o->projections);
            std::string item;
            while (std::getline(ss, item, ',')) kinds.push_back(parse_projection(item));
            const Kind k = parse_kind(o->kind);
            Json rep = {{"kind", to_string(k)}, {"series", Json::array()}};
            bool all = true;
            for (auto pk : kinds) {
                const auto proj = projection_for(lp, pk);
                const auto s = min_lnM_evidence(lp.process, &proj, windows, k, o->ro);
                all = all && s.rejects();
                rep["series"].push_back(to_json(s));
            }
            rep["rejected"] = all;
            emit(rep, o->out);
            return Ok;
        };
    });
}

// ---------------------------------------------------------------- robustness

void add_robustness(CLI::App& app, std::function<int()>& action) {
    auto* c = app.add_subcommand("robustness", "Robustness constants, or the full perturbation pipeline");
    struct Opts {
        double M = 0, omega = 0, upsilon = 0, eps = 0, L = 0;
        bool haveL = false;
        ProcessSource p;
        std::string perturbed, cert, nedi_cert, out;
        double band_lo = -10, band_hi = 10, band_step = 0.01, horizon = 10, step = 0.25;
    };
    auto o = std::make_shared<Opts>();
    c->add_option("--M", o->M, "Dichotomy constant M >= 1");
    c->add_option("--omega", o->omega, "min(alpha, beta)");
    c->add_option("--upsilon", o->upsilon, "max(delta, nu)");
    c->add_option("--eps", o->eps, "Perturbation size");
    auto* Lopt = c->add_option("--L", o->L, "Growth constant for the bound constant");
    o->p.add(c);
    c->add_option("--perturbed", o->perturbed, "Perturbed process JSON (pipeline mode)");
    c->add_option("--certificate", o->cert, "NEDII certificate of the unperturbed process");
    c->add_option("--nedi-certificate", o->nedi_cert, "Optional NEDI certificate for the comparison route");
    c->add_option("--band-lo", o->band_lo)->capture_default_str();
    c->add_option("--band-hi", o->band_hi)->capture_default_str();
    c->add_option("--band-step", o->band_step)->capture_default_str();
    c->add_option("--horizon", o->horizon, "Check grid horizon")->capture_default_str();
    c->add_option("--step", o->step, "Check grid step")->capture_default_str();
    c->add_option("--out", o->out, "Report JSON (stdout when omitted)");
    c->callback([&action, o, Lopt] {
        o->haveL = Lopt->count() > 0;
        action = [o] {
            if (o->perturbed.empty()) {
                auto r = robustness_constants(o->M, o->omega, o->upsilon, o->eps);
                if (o->haveL) r.L = o->L;
                emit(to_json(r), o->out);
                return r.admissible() ? Ok : ValidationFailure;
            }
            const auto lp = o->p.load();
            const auto lq = process_from_json(read_json_file(o->perturbed));
            if (o->cert.empty()) throw ArgumentError("pipeline mode needs --certificate");
            const auto cert = certificate_from_json(read_json_file(o->cert), lp.family);
            std::optional<DichotomyCertificate> nedi;
            if (!o->nedi_cert.empty()) nedi = certificate_from_json(read_json_file(o->nedi_cert), lp.family);
            const auto band = band_grid(o->band_lo, o->band_hi, o->band_step);
            const auto check = GridSpec::horizon(cert.domain, o->horizon, o->step);
            const auto r = robust_nedii_pipeline(lp.process, cert, lq.process, o->upsilon, o->eps, band,
                                                 check, nedi);
            emit(to_json(r), o->out);
            return r.applicable ? Ok : ValidationFailure;
        };
    });
}

// ---------------------------------------------------------------- attract

struct FieldModel {
    Field f;
    int dim = 1;
    bool cooperative = false;
};

double forcing(const Json& j, double t) {
    const double c0 = j.value("c0", 0.0), k = j.value("decay", 0.0);
    return c0 * std::exp(-k * (j.value("absolute", true) ? std::abs(t) : t));
}

FieldModel field_from_json(const Json& j) {
    const std::string form = j.value("form", std::string());
    FieldModel m;
    if (form == "affine" || form == "cooperative_linear") {
        Eigen::MatrixXd A;
        Eigen::VectorXd b;
        if (j.contains("A")) {
            const auto rows = j["A"].get<std::vector<std::vector<double>>>();
            A.resize(rows.size(), rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (rows[i].size() != rows.size()) throw ArgumentError("A must be square");
                for (std::size_t k = 0; k < rows.size(); ++k) A(i, k) = rows[i][k];
            }
            const auto bv = j.value("b", std::vector<double>(rows.size(), 0.0));
            if (bv.size() != rows.size()) throw ArgumentError("b has the wrong length");
            b = Eigen::Map<const Eigen::VectorXd>(bv.data(), bv.size());
        } else {
            A = Eigen::MatrixXd::Constant(1, 1, j.value("a", -1.0));
            b = Eigen::VectorXd::Constant(1, j.value("c", 0.0));
        }
        m.dim = static_cast<int>(A.rows());
        m.cooperative = form == "cooperative_linear";
        if (m.cooperative)
            for (int i = 0; i < m.dim; ++i)
                for (int k = 0; k < m.dim; ++k)
                    if (i != k && A(i, k) < 0) throw ArgumentError("cooperative_linear needs A_ij >= 0 off the diagonal");
        m.f = [A, b](double, const Eigen::VectorXd& x) { return Eigen::VectorXd(A * x + b); };
        return m;
    }
    if (form == "cubic_barreira") {
        const double a = j.value("a", 1.0), bb = j.value("b", 2.0);
        m.f = [a, bb, j](double t, const Eigen::VectorXd& x) {
            Eigen::VectorXd d(1);
            d(0) = 0.5 * barreira_coefficient(a, bb, t) * x(0) - x(0) * x(0) * x(0) + forcing(j, t);
            return d;
        };
        return m;
    }
    if (form == "linear_forced") {
        const auto coef = coefficient_from_json(j.at("coefficient"));
        m.f = [coef, j](double t, const Eigen::VectorXd& x) {
            Eigen::VectorXd d(1);
            d(0) = coef.g(t) * x(0) + forcing(j, t);
            return d;
        };
        return m;
    }
    if (form == "periodic") {
        const double r = j.value("rate", 1.0), amp = j.value("amplitude", 1.0), w = j.value("frequency", 1.0);
        m.f = [r, amp, w](double t, const Eigen::VectorXd& x) {
            Eigen::VectorXd d(1);
            d(0) = -r * x(0) + amp * std::sin(w * t);
            return d;
        };
        return m;
    }
    throw ArgumentError("unknown field form '" + form +
                        "' (affine|cubic_barreira|cooperative_linear|linear_forced|periodic)");
}

void add_attract(CLI::App& app, Shared& shared, std::function<int()>& action) {
    auto* c = app.add_subcommand("attract", "Simulate pullback or forward omega-limits and envelopes");
    struct Opts {
        std::string config, out;
    };
    auto o = std::make_shared<Opts>();
    c->add_option("--config", o->config, "Attractor config JSON")->required();
    c->add_option("--out", o->out, "Cloud CSV path")->required();
    c->callback([&action, &shared, o] {
        action = [o, &shared] {
            const Json cfg = read_json_file(o->config);
            const FieldModel fm = field_from_json(cfg.at("field"));
            IntegratorOptions io;
            io.rtol = cfg.value("rtol", 1e-10);
            io.atol = cfg.value("atol", 1e-12);
            const Flow flow = ode_flow(fm.f, fm.dim, io);
            OmegaOptions oo;
            oo.seeds_per_time = cfg.value("seeds_per_time", std::size_t{16});
            oo.cluster_eps = cfg.value("cluster_eps", 1e-4);
            oo.burn_in = cfg.value("burn_in", 0.5);
            oo.seed = cfg.value("seed", shared.seed);
            oo.norm = fm.cooperative ? StateNorm::Max : StateNorm::Euclidean;
            if (!(oo.cluster_eps > 0)) throw ArgumentError("cluster_eps must be positive");

            const std::string mode = cfg.value("mode", std::string("pullback"));
            std::vector<OmegaResult> results;
            SetFamily fam;
            Json rep = {{"mode", mode}, {"sections", Json::array()}};
            std::size_t poisoned = 0;
            if (mode == "pullback") {
                const auto times = times_from_json(cfg.at("times"));
                const int K = cfg.value("K", 8);
                const Json u = cfg.value("universe", Json::object());
                const UniverseFamily U{u.value("gamma", 0.0), u.value("C", 1.0), fm.cooperative, oo.norm};
                for (std::size_t i = 0; i < times.size(); ++i) {
                    OmegaOptions oi = oo;
                    oi.seed = oo.seed + i;
                    results.push_back(simulate_pullback_omega(flow, times[i], pullback_schedule(times[i], K), U, oi));
                }
            } else if (mode == "forward") {
                const double tau = cfg.value("tau", 0.0), rad = cfg.value("ball_radius", 1.0);
                const auto horizons = times_from_json(cfg.at("horizons"));
                const std::size_t pts = cfg.value("points", std::size_t{32});
                std::mt19937_64 rng(oo.seed);
                std::uniform_real_distribution<double> U(-rad, rad);
                Cloud B;
                while (B.size() < pts) {
                    Eigen::VectorXd x(fm.dim);
                    for (int k = 0; k < fm.dim; ++k) x(k) = fm.cooperative ? std::abs(U(rng)) : U(rng);
                    if (state_norm(x, oo.norm) <= rad) B.push_back(x);
                }
                results.push_back(simulate_forward_omega(flow, B, tau, horizons, oo));
            } else {
                throw ArgumentError("mode must be pullback or forward");
            }
            for (const auto& r : results) {
                fam.sections[r.t] = r.cloud;
                poisoned += r.poisoned;
                Json pts = Json::array();
                for (const auto& x : r.cloud) pts.push_back(std::vector<double>(x.data(), x.data() + x.size()));
                rep["sections"].push_back({{"t", r.t}, {"representatives", pts}, {"kept", r.kept.size()},
                                           {"poisoned", r.poisoned}, {"converged", r.converged},
                                           {"last_depth_distance", r.last_depth_distance}});
            }
            rep["poisoned"] = poisoned;
            emit_csv(o->out, [&](std::ostream& os) { write_cloud_csv(os, results); });
            const std::string base = stem(o->out);
            bool contained = true;
            if (cfg.contains("envelope")) {
                const Json& e = cfg["envelope"];
                const auto cert = certificate_from_json(e.at("certificate"));
                const double lambda = e.value("lambda", 0.0), bnorm = e.at("bnorm").get<double>();
                const RadiusEnvelope env = pullback_envelope(cert, lambda, bnorm, fm.cooperative);
                std::vector<double> ts;
                for (const auto& [t, cl] : fam.sections) ts.push_back(t);
                emit_csv(base + ".envelope.csv", [&](std::ostream& os) { write_envelope_csv(os, env, ts); });
                const auto cr = verify_containment(fam, env, oo.norm);
                rep["containment"] = {{"min_margin", cr.min_margin}, {"contained", cr.contained()}};
                contained = cr.contained();
            }
            if (mode == "pullback") {
                const double gamma = cfg.value("universe", Json::object()).value("gamma", 0.0);
                const auto mr = universe_membership(fam, gamma, oo.norm);
                rep["membership"] = {{"C", mr.C ? Json(*mr.C) : Json(nullptr)}, {"C_half", mr.C_half},
                                     {"growth_factor", mr.growth_factor}, {"flagged", mr.flagged}};
            }
            emit(rep, base + ".json");
            return contained ? Ok : ValidationFailure;
        };
    });
}

// ---------------------------------------------------------------- pde

std::function<double(double)> forcing_from_json(const Json& j) {
    const std::string form = j.value("form", std::string("constant"));
    if (form == "constant") {
        const double v = j.value("value", 0.0);
        return [v](double) { return v; };
    }
    if (form == "decay") {
        const double c0 = j.value("c0", 1.0), r = j.value("rate", 0.0);
        return [c0, r](double t) { return c0 * std::exp(-r * std::abs(t)); };
    }
    throw ArgumentError("unknown forcing form '" + form + "' (constant|decay)");
}

void add_pde(CLI::App& app, Shared& shared, std::function<int()>& action) {
    auto* c = app.add_subcommand("pde", "Parabolic transfer and attractor demo on a 1-d grid");
    struct Opts {
        std::string config, out;
    };
    auto o = std::make_shared<Opts>();
    c->add_option("--config", o->config, "PDE demo config JSON")->required();
    c->add_option("--out", o->out, "Section radii CSV path")->required();
    c->callback([&action, &shared, o] {
        action = [o, &shared] {
            const Json cfg = read_json_file(o->config);
            Grid1D grid;
            grid.N = cfg.value("N", 31);
            grid.L = cfg.value("L", 1.0);
            BoundaryCondition bc{parse_boundary(cfg.value("bc", std::string("dirichlet"))), cfg.value("robin_alpha", 0.0)};
            const auto Ah = discretize(grid, bc);
            const auto coef = coefficient_from_json(cfg.at("a"));
            const auto a = CoefficientField::separable(coef.g, coef.integral);
            PdeOptions po;
            po.dt = cfg.value("dt", po.dt);
            if (!(po.dt > 0)) throw ArgumentError("dt must be positive");
            const std::string base = stem(o->out);
            Json rep = {{"N", grid.N}, {"bc", to_string(bc.kind)}, {"lambda1", Ah.lambda1()}};
            int status = Ok;

            if (cfg.contains("transfer")) {
                const Json& t = cfg["transfer"];
                const auto scalar = certificate_from_json(t.at("certificate"));
                PdeOptions tp = po;
                tp.domain = scalar.domain;
                const auto p = pde_process(Ah, a, tp);
                const double t0 = t.value("t0", 0.0), H = t.value("horizon", 20.0);
                const auto bundle = principal_bundle(p, t0, H, t.value("stride", 0.5));
                const auto tr = scalar_to_pde_transfer(scalar, Ah, a, bundle);
                const auto grid_t = GridSpec::uniform(t0, t0 + H, t.value("check_step", 0.5)).restricted(scalar.domain);
                const auto chk = check_certificate(p, tr.predicted, grid_t);
                const double tol = t.value("tol", 1e-6);
                rep["transfer"] = {{"C", tr.C}, {"M_sep", bundle.M_sep}, {"nu_sep", bundle.nu_sep},
                                   {"check", to_json(chk)}, {"holds", chk.holds(tol)}};
                emit(to_json(tr.predicted), base + ".certificate.json");
                if (!chk.holds(tol)) status = ValidationFailure;
            }
            if (cfg.contains("demo")) {
                const Json& d = cfg["demo"];
                ParabolicDemoConfig dc;
                dc.scalar = certificate_from_json(d.at("certificate"));
                dc.lambda = d.value("lambda", 0.0);
                dc.gamma = d.value("gamma", 0.0);
                dc.seed_radius = d.value("seed_radius", 1.0);
                if (d.contains("times")) dc.times = times_from_json(d["times"]);
                dc.K = d.value("K", dc.K);
                dc.seeds = d.value("seeds", dc.seeds);
                dc.seed = d.value("seed", shared.seed);
                const auto demo = parabolic_attractor_demo(Ah, a, forcing_from_json(cfg.value("b", Json::object())), dc, po);
                emit_csv(o->out, [&](std::ostream& os) {
                    os << std::setprecision(17) << "t,R,max_norm\n";
                    for (const auto& [t, cloud] : demo.sections.sections) {
                        double mx = 0;
                        for (const auto& x : cloud) mx = std::max(mx, state_norm(x, StateNorm::Max));
                        os << t << ',' << demo.envelope(t) << ',' << mx << '\n';
                    }
                });
                rep["demo"] = {{"C_inf", demo.C_inf}, {"bnorm", demo.bnorm}, {"poisoned", demo.poisoned},
                               {"min_margin", demo.containment.min_margin},
                               {"contained", demo.containment.contained()}};
                if (!demo.containment.contained()) status = ValidationFailure;
            } else {
                emit_csv(o->out, [](std::ostream& os) { os << "t,R,max_norm\n"; });
            }
            emit(rep, base + ".json");
            return status;
        };
    });
}

}  // namespace

void register_commands(CLI::App& app, Shared& shared, std::function<int()>& action) {
    add_gallery(app, action);
    add_classify(app, action);
    add_check(app, action);
    add_convert(app, action);
    add_reject(app, action);
    add_robustness(app, action);
    add_attract(app, shared, action);
    add_pde(app, shared, action);
}

}  // namespace ned::cli
