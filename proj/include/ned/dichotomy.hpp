#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ned/certificate.hpp"
#include "ned/process.hpp"

namespace ned {

struct FitOptions {
    double delta_max = 8.0;
    // ln M budget for the delta-first objective; without it delta = 0 is always feasible.
    double lnM_max = 8.0;
};

// delta -> minimal ln M at a fixed exponent, represented by the upper convex hull of
// the points (anchor_i, y_i) with y_i = logNorm_i + alpha (t_i - s_i) (stable part).
class BoundCurve {
public:
    static BoundCurve build(std::vector<std::pair<double, double>> points);

    bool empty() const { return hull_.empty(); }
    const std::vector<std::pair<double, double>>& vertices() const { return hull_; }
    // max(0, max_i y_i - delta a_i)
    double min_lnM(double delta) const;
    // Smallest delta >= 0 with min_lnM(delta) <= budget; nullopt when no delta works.
    std::optional<double> min_delta(double budget) const;
    // Breakpoints of the piecewise-linear curve (slopes between hull vertices), ascending.
    std::vector<double> breakpoints() const;

private:
    std::vector<std::pair<double, double>> hull_;
};

struct FrontierEntry {
    double alpha;
    double delta;
    double lnM;
    bool feasible;  // delta <= delta_max and ln M within budget
    BoundCurve curve;
};

struct ParetoFrontier {
    Kind kind;
    Part part;
    FitOptions options;
    std::size_t samples = 0;
    std::vector<FrontierEntry> entries;
};

ParetoFrontier fit_bounds(const NormGrid& grid, Kind kind, Part part,
                          const std::vector<double>& alphas, const FitOptions& opts = {});

// Curve for one exponent without the frontier wrapper.
BoundCurve bound_curve(const NormGrid& grid, Kind kind, Part part, double rate);

struct CheckReport {
    double max_violation = -std::numeric_limits<double>::infinity();
    std::size_t samples = 0;
    std::vector<PoisonedSample> poisoned;
    double worst_t = 0.0;
    double worst_s = 0.0;
    Part worst_part = Part::Stable;
    bool holds(double tol = 0.0) const { return max_violation <= tol; }
};

// Violation of the certificate inequalities on the grid (restricted to cert.domain).
CheckReport check_certificate(const EvolutionProcess& p, const DichotomyCertificate& cert,
                              const GridSpec& grid);
// Same computation on precomputed samples.
CheckReport check_certificate(const NormGrid& grid, const DichotomyCertificate& cert);

DichotomyCertificate convert_halfline(const DichotomyCertificate& cert);
DichotomyCertificate unify_exponents(const DichotomyCertificate& cert);
DichotomyCertificate dual_certificate(const DichotomyCertificate& cert);

struct RejectionOptions {
    double alpha_min = 0.05;
    double alpha_max = 8.0;
    double delta_max = 8.0;
    double resolution = 0.05;
};

struct WindowEvidence {
    double lo;
    double hi;
    double min_lnM;
    double rate;    // minimising alpha (or beta)
    double growth;  // minimising delta (or nu)
    std::size_t samples;
};

struct RejectionSeries {
    Kind kind = Kind::I;
    ProjectionKind projection = ProjectionKind::Zero;
    std::vector<WindowEvidence> windows;

    bool strictly_increasing() const;
    double growth() const;  // last minus first minimal ln M
    // Minimal M grows by at least a factor e^threshold over the windows.
    bool rejects(double threshold = 1.0) const;
};

// Minimal feasible ln M of the given kind over the (rate, growth) box, per window.
RejectionSeries min_lnM_evidence(const EvolutionProcess& p, const ProjectionFamily* proj,
                                 const std::vector<GridSpec>& windows, Kind kind,
                                 const RejectionOptions& opts = {});

std::vector<RejectionSeries> nedi_rejection_evidence(const EvolutionProcess& p,
                                                     const std::vector<GridSpec>& windows,
                                                     const std::vector<ProjectionKind>& kinds,
                                                     const RejectionOptions& opts = {});

// [-T,T], [0,T] or [-T,0] uniform windows, one per horizon.
std::vector<GridSpec> nested_windows(TimeDomain d, const std::vector<double>& horizons,
                                     double step);

struct ClassifyOptions {
    std::vector<double> alphas;  // empty: 0.1 .. delta_max in steps of 0.1
    FitOptions fit;
    RejectionOptions reject;
    std::vector<double> window_fractions{0.25, 0.5, 1.0};
    double rejection_threshold = 1.0;
};

struct Classification {
    std::optional<Kind> kind;
    bool rejected_I = false;
    bool rejected_II = false;
    RejectionSeries evidence_I;
    RejectionSeries evidence_II;
    std::optional<DichotomyCertificate> certificate;
    std::optional<ParetoFrontier> stable;
    std::optional<ParetoFrontier> unstable;
};

Classification classify(const EvolutionProcess& p, const ProjectionFamily& proj, TimeDomain domain,
                        const GridSpec& grid, const ClassifyOptions& opts = {});

// Best certificate of a fixed kind from frontier fits (maximises rate - growth per part).
std::optional<DichotomyCertificate> certificate_from_fits(const ParetoFrontier* stable,
                                                          const ParetoFrontier* unstable,
                                                          Kind kind, TimeDomain domain,
                                                          const ProjectionFamily& proj);

}  // namespace ned
