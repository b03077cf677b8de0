#include "ned/io.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "ned/errors.hpp"
#include "ned/parabolic.hpp"

namespace ned {

namespace {

Json pair_json(const ExponentPair& p, const char* rate, const char* growth) {
    Json j;
    j[rate] = p.rate;
    j[growth] = p.growth;
    return j;
}

double number(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number())
        throw ArgumentError(std::string("missing numeric field '") + key + "'");
    return j[key].get<double>();
}

double number_or(const Json& j, const char* key, double dflt) {
    return j.contains(key) ? number(j, key) : dflt;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw ArgumentError("matrix must be a non-empty array of rows");
    const auto rows = j.size(), cols = j[0].size();
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw ArgumentError("ragged matrix");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

std::vector<std::pair<std::string, double>> params_of(const Json& j) {
    std::vector<std::pair<std::string, double>> out;
    if (j.contains("params"))
        for (auto it = j["params"].begin(); it != j["params"].end(); ++it)
            out.emplace_back(it.key(), it.value().get<double>());
    return out;
}

Json poisoned_json(const std::vector<PoisonedSample>& ps) {
    Json a = Json::array();
    for (const auto& p : ps) a.push_back({{"t", p.t}, {"s", p.s}, {"part", to_string(p.part)}, {"reason", p.reason}});
    return a;
}

Json frontier_json(const ParetoFrontier& f) {
    Json rows = Json::array();
    for (const auto& e : f.entries)
        rows.push_back({{"alpha", e.alpha}, {"delta", e.delta}, {"lnM", e.lnM}, {"feasible", e.feasible}});
    return {{"kind", to_string(f.kind)}, {"part", to_string(f.part)}, {"samples", f.samples}, {"entries", rows}};
}

std::ostream& csv(std::ostream& os) { return os << std::setprecision(17); }

void check_dimension(const Json& j, int dim) {
    if (j.contains("dimension") && j["dimension"].get<int>() != dim)
        throw ArgumentError("declared dimension does not match the process");
}

}  // namespace

Json to_json(const DichotomyCertificate& c) {
    Json j;
    j["kind"] = to_string(c.kind);
    j["domain"] = to_string(c.domain);
    j["M"] = c.M;
    j["stable"] = pair_json(c.stable, "alpha", "delta");
    j["unstable"] = c.unstable ? pair_json(*c.unstable, "beta", "nu") : Json(nullptr);
    j["projection"] = to_string(c.projection);
    // provenance keeps a converted certificate's inverse conversion exact across files
    if (c.converted_from) j["converted_from"] = to_json(*c.converted_from);
    return j;
}

DichotomyCertificate certificate_from_json(const Json& j, std::shared_ptr<const ProjectionFamily> family) {
    DichotomyCertificate c;
    try {
        c.kind = parse_kind(j.at("kind").get<std::string>());
        c.domain = parse_domain(j.at("domain").get<std::string>());
        c.M = number(j, "M");
        c.stable = {number(j.at("stable"), "alpha"), number(j.at("stable"), "delta")};
        if (j.contains("unstable") && !j["unstable"].is_null())
            c.unstable = ExponentPair{number(j["unstable"], "beta"), number(j["unstable"], "nu")};
        c.projection = parse_projection(j.value("projection", std::string("zero")));
        if (j.contains("converted_from") && !j["converted_from"].is_null())
            c.converted_from = std::make_shared<const DichotomyCertificate>(
                certificate_from_json(j["converted_from"], family));
    } catch (const Json::exception& e) {
        throw ArgumentError(std::string("malformed certificate: ") + e.what());
    }
    if (c.projection == ProjectionKind::Explicit) {
        if (!family) throw ArgumentError("explicit projection needs a process-supplied family");
        c.family = std::move(family);
    }
    c.validate();
    return c;
}

Json to_json(const RobustnessReport& r) {
    Json j;
    j["M"] = r.M;
    j["omega"] = r.omega;
    j["upsilon"] = r.upsilon;
    j["eps"] = r.eps;
    j["omega_tilde"] = r.omega_tilde;
    j["beta_tilde"] = r.beta_tilde;
    j["rho"] = r.rho;
    j["M1"] = r.M1;
    j["M2"] = r.M2;
    j["M_hat"] = r.M_hat;
    j["w_as_written"] = r.w_as_written;
    j["w_sign_flipped"] = r.w_sign_flipped;
    j["flipped_is_positive"] = r.flipped_is_positive;
    j["L"] = r.L ? Json(*r.L) : Json(nullptr);
    j["bound_constant"] = r.L ? Json(r.bound_constant()) : Json(nullptr);
    j["admissible"] = r.admissible();
    j["flags"] = {{"radical_nonnegative", r.flags.radical_nonnegative},
                  {"log_argument_positive", r.flags.log_argument_positive},
                  {"rho_below_one", r.flags.rho_below_one},
                  {"M1_positive", r.flags.M1_positive},
                  {"M2_positive", r.flags.M2_positive},
                  {"upsilon_below_omega", r.flags.upsilon_below_omega}};
    return j;
}

Json to_json(const SupResult& r) {
    return {{"value", r.value}, {"grid_value", r.grid_value}, {"refinement_residual", r.refinement_residual},
            {"t", r.t}, {"s", r.s}, {"samples", r.samples}, {"poisoned", poisoned_json(r.poisoned)}};
}

Json to_json(const PipelineResult& r) {
    Json j;
    j["applicable"] = r.applicable;
    j["reason"] = r.reason;
    j["distance"] = r.distance;
    j["constants"] = to_json(r.constants);
    j["dual_of_q"] = r.dual_of_q ? to_json(*r.dual_of_q) : Json(nullptr);
    j["primal_of_q"] = r.primal_of_q ? to_json(*r.primal_of_q) : Json(nullptr);
    j["dual_violation"] = r.dual_violation;
    j["primal_violation"] = r.primal_violation;
    j["projections_validated"] = r.projections_validated;
    j["nedi_route_applicable"] = r.nedi_route_applicable;
    return j;
}

Json to_json(const CheckReport& r) {
    Json j;
    j["max_violation"] = r.max_violation;
    j["samples"] = r.samples;
    j["worst"] = {{"t", r.worst_t}, {"s", r.worst_s}, {"part", to_string(r.worst_part)}};
    j["poisoned"] = poisoned_json(r.poisoned);
    return j;
}

Json to_json(const RejectionSeries& r) {
    Json w = Json::array();
    for (const auto& e : r.windows)
        w.push_back({{"lo", e.lo}, {"hi", e.hi}, {"min_lnM", e.min_lnM}, {"rate", e.rate},
                     {"growth", e.growth}, {"samples", e.samples}});
    return {{"kind", to_string(r.kind)}, {"projection", to_string(r.projection)}, {"windows", w},
            {"strictly_increasing", r.strictly_increasing()}, {"growth", r.growth()},
            {"rejects", r.rejects()}};
}

Json to_json(const Classification& c) {
    Json j;
    j["kind"] = c.kind ? Json(to_string(*c.kind)) : Json(nullptr);
    j["rejected_I"] = c.rejected_I;
    j["rejected_II"] = c.rejected_II;
    j["evidence_I"] = to_json(c.evidence_I);
    j["evidence_II"] = to_json(c.evidence_II);
    j["certificate"] = c.certificate ? to_json(*c.certificate) : Json(nullptr);
    j["stable"] = c.stable ? frontier_json(*c.stable) : Json(nullptr);
    j["unstable"] = c.unstable ? frontier_json(*c.unstable) : Json(nullptr);
    return j;
}

Json to_json(const DichotomyClaim& c) {
    return {{"certificate", to_json(c.certificate)}, {"holds", c.holds}, {"note", c.note}};
}

void write_frontier_csv(std::ostream& os, const ParetoFrontier& f) {
    csv(os) << "alpha,delta,lnM\n";
    for (const auto& e : f.entries) {
        if (!e.feasible) continue;
        os << e.alpha << ',' << e.delta << ',' << e.lnM << '\n';
    }
}

void write_norm_grid_csv(std::ostream& os, const NormGrid& g) {
    csv(os) << "t,s,log_norm,part\n";
    for (const auto& s : g.samples) os << s.t << ',' << s.s << ',' << s.log_norm << ',' << to_string(s.part) << '\n';
}

void write_cloud_csv(std::ostream& os, const std::vector<OmegaResult>& sections) {
    int n = 0;
    for (const auto& r : sections)
        if (!r.kept.empty()) n = static_cast<int>(r.kept.front().end.size());
    csv(os) << 't';
    for (int i = 1; i <= n; ++i) os << ",x" << i;
    os << ",cluster_id\n";
    for (const auto& r : sections)
        for (const auto& tr : r.kept) {
            os << r.t;
            for (int i = 0; i < n; ++i) os << ',' << tr.end(i);
            os << ',' << tr.cluster << '\n';
        }
}

void write_envelope_csv(std::ostream& os, const RadiusEnvelope& e, const std::vector<double>& times) {
    csv(os) << "t,R\n";
    for (double t : times) os << t << ',' << e(t) << '\n';
}

NamedCoefficient coefficient_from_json(const Json& j) {
    const std::string form = j.value("form", std::string());
    if (form == "constant") {
        const double c = number(j, "value");
        return {[c](double) { return c; }, [c](double t, double s) { return c * (t - s); }};
    }
    if (form == "barreira") {
        const double a = number_or(j, "a", 1), b = number_or(j, "b", 2);
        return {[a, b](double t) { return barreira_coefficient(a, b, t); },
                [a, b](double t, double s) { return barreira_exponent(a, b, t, s); }};
    }
    if (form == "sign_switch")
        return {[](double t) { return t > 0 ? 1.0 : (t < 0 ? -1.0 : 0.0); },
                [](double t, double s) { return std::abs(t) - std::abs(s); }};
    throw ArgumentError("unknown coefficient form '" + form + "' (constant|barreira|sign_switch)");
}

LoadedProcess process_from_json(const Json& j) {
    try {
        const auto backend = parse_backend(j.at("backend").get<std::string>());
        const auto domain = parse_domain(j.value("domain", std::string("full")));
        switch (backend) {
            case Backend::ClosedForm: {
                auto entry = std::make_shared<const GalleryEntry>(
                    gallery_entry(j.at("gallery").get<std::string>(), params_of(j)));
                check_dimension(j, entry->process.dimension());
                if (entry->process.backend() == Backend::Integrated)
                    throw ArgumentError("gallery entry '" + entry->name + "' is integrated, not closed-form");
                return {entry->process, {}, entry};
            }
            case Backend::PiecewiseClosedForm: {
                const auto breaks = j.value("breaks", std::vector<double>{});
                if (j.contains("V")) {
                    auto p = planted_process(domain, matrix_from_json(j["V"]), breaks,
                                             j.at("rates").get<std::vector<std::vector<double>>>(),
                                             j.at("unstable").get<std::vector<bool>>());
                    check_dimension(j, p.dimension());
                    auto fam = p.split_family();
                    return {p, fam, {}};
                }
                if (j.contains("gallery")) {
                    auto entry = std::make_shared<const GalleryEntry>(
                        gallery_entry(j["gallery"].get<std::string>(), params_of(j)));
                    return {entry->process, {}, entry};
                }
                std::vector<Eigen::MatrixXd> gens;
                for (const auto& g : j.at("generators")) gens.push_back(matrix_from_json(g));
                if (gens.empty()) throw ArgumentError("piecewise-closed-form needs generators");
                auto p = piecewise_constant_process(domain, breaks, gens);
                check_dimension(j, p.dimension());
                return {p, {}, {}};
            }
            case Backend::Integrated: {
                if (j.contains("gallery")) {
                    auto entry = std::make_shared<const GalleryEntry>(
                        gallery_entry(j["gallery"].get<std::string>(), params_of(j)));
                    return {entry->process, {}, entry};
                }
                const Eigen::MatrixXd A = matrix_from_json(j.at("A"));
                if (A.rows() != A.cols()) throw ArgumentError("A must be square");
                IntegratorOptions io;
                io.rtol = number_or(j, "rtol", io.rtol);
                io.atol = number_or(j, "atol", io.atol);
                auto p = EvolutionProcess::linear_ode(static_cast<int>(A.rows()), domain,
                                                      [A](double) { return A; }, io, "constant_ode");
                check_dimension(j, p.dimension());
                return {p, {}, {}};
            }
            case Backend::DiscretizedPde: {
                Grid1D grid;
                grid.N = j.value("N", grid.N);
                grid.L = number_or(j, "L", grid.L);
                BoundaryCondition bc;
                bc.kind = parse_boundary(j.value("bc", std::string("dirichlet")));
                bc.robin_alpha = number_or(j, "robin_alpha", 0.0);
                const auto Ah = discretize(grid, bc);
                const auto coef = coefficient_from_json(j.at("a"));
                PdeOptions po;
                po.dt = number_or(j, "dt", po.dt);
                po.domain = domain;
                auto p = pde_process(Ah, CoefficientField::separable(coef.g, coef.integral), po);
                check_dimension(j, p.dimension());
                return {p, {}, {}};
            }
        }
    } catch (const Json::exception& e) {
        throw ArgumentError(std::string("malformed process config: ") + e.what());
    }
    throw ArgumentError("unsupported backend");
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ArgumentError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write '" + path + "'");
    out << text;
}

void write_json_file(const std::string& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

void write_meta_sidecar(const std::string& out, const Json& extra) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ts;
    ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    Json j = {{"artifact", out}, {"created_utc", ts.str()}};
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    write_json_file(out + ".meta.json", j);
}

}  // namespace ned
