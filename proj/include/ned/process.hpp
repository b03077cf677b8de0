#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ned/integrator.hpp"
#include "ned/time_domain.hpp"

namespace ned {

enum class Backend { ClosedForm, PiecewiseClosedForm, Integrated, DiscretizedPde };

std::string to_string(Backend b);
Backend parse_backend(const std::string& s);

enum class Part { Stable, Unstable };
std::string to_string(Part p);

class ProjectionFamily;

// Linear evolution process S(t,s) on R^n.
class EvolutionProcess {
public:
    using MatrixFn = std::function<Eigen::MatrixXd(double t, double s)>;
    using LogScalarFn = std::function<double(double t, double s)>;
    using ApplyFn = std::function<Eigen::VectorXd(double t, double s, const Eigen::VectorXd& x)>;
    using SplitFn = std::function<Eigen::MatrixXd(double t, double s, Part part)>;

    EvolutionProcess(int dimension, TimeDomain domain, bool invertible, Backend backend,
                     MatrixFn matrix, std::string name = {});

    // Scalar process S(t,s) = exp(E(t,s)); logs are evaluated in closed form.
    static EvolutionProcess scalar_exponent(TimeDomain domain, LogScalarFn exponent,
                                            Backend backend = Backend::ClosedForm,
                                            std::string name = {});

    // Fundamental matrix of x' = A(t)x, integrated numerically.
    static EvolutionProcess linear_ode(int dimension, TimeDomain domain,
                                       std::function<Eigen::MatrixXd(double)> A,
                                       const IntegratorOptions& opts = {}, std::string name = {});

    int dimension() const { return dim_; }
    TimeDomain domain() const { return domain_; }
    bool invertible() const { return invertible_; }
    Backend backend() const { return backend_; }
    const std::string& name() const { return name_; }
    bool has_log_scalar() const { return static_cast<bool>(log_scalar_); }
    // Accuracy the evaluator is expected to meet (relative).
    double tolerance() const { return tolerance_; }
    // Grid sampling composes consecutive mesh propagators instead of evaluating each pair.
    bool prefers_sweep() const { return sweep_; }

    Eigen::MatrixXd matrix(double t, double s) const;
    Eigen::VectorXd apply(double t, double s, const Eigen::VectorXd& x) const;
    // ln S(t,s) for closed-form scalar processes.
    double log_scalar(double t, double s) const;

    EvolutionProcess& set_tolerance(double tol);
    EvolutionProcess& set_apply(ApplyFn fn);
    EvolutionProcess& set_sweep(bool on);
    EvolutionProcess& set_name(std::string name);
    // Exact S(t,s)Pi(s) for one projection family; norms use it instead of the product,
    // which loses the small part to cancellation when the parts separate strongly.
    EvolutionProcess& set_split(std::shared_ptr<const ProjectionFamily> family, SplitFn fn);
    const std::shared_ptr<const ProjectionFamily>& split_family() const { return split_family_; }
    Eigen::MatrixXd split(double t, double s, Part part) const;

private:
    void validate(double t, double s) const;

    int dim_;
    TimeDomain domain_;
    bool invertible_;
    Backend backend_;
    std::string name_;
    MatrixFn matrix_;
    LogScalarFn log_scalar_;
    ApplyFn apply_;
    std::shared_ptr<const ProjectionFamily> split_family_;
    SplitFn split_;
    double tolerance_ = 1e-14;
    bool sweep_ = false;
};

enum class ProjectionKind { Zero, Identity, Explicit };
std::string to_string(ProjectionKind k);
ProjectionKind parse_projection(const std::string& s);

// Family of unstable projections Pi^u(t); Pi^s(t) = I - Pi^u(t).
class ProjectionFamily {
public:
    static ProjectionFamily zero(int dim);
    static ProjectionFamily identity(int dim);
    static ProjectionFamily from_function(int dim, std::function<Eigen::MatrixXd(double)> unstable);
    static ProjectionFamily of_kind(ProjectionKind k, int dim);

    ProjectionKind kind() const { return kind_; }
    int dimension() const { return dim_; }
    Eigen::MatrixXd unstable(double t) const;
    Eigen::MatrixXd stable(double t) const;
    bool has_stable_part() const { return kind_ != ProjectionKind::Identity; }
    bool has_unstable_part() const { return kind_ != ProjectionKind::Zero; }

    // Projections of the dual process: unstable(t) = stable(t)^T of this family.
    ProjectionFamily dual() const;
    // Shared by copies; a family and its dual have paired identities.
    const void* identity() const { return id_.get(); }

private:
    struct Id {
        std::shared_ptr<Id> dual_strong;
        std::weak_ptr<Id> dual_weak;
    };
    ProjectionFamily(ProjectionKind k, int dim, std::function<Eigen::MatrixXd(double)> f)
        : kind_(k), dim_(dim), fn_(std::move(f)), id_(std::make_shared<Id>()) {}
    ProjectionKind kind_;
    int dim_;
    std::function<Eigen::MatrixXd(double)> fn_;
    std::shared_ptr<Id> id_;
};

double idempotence_residual(const ProjectionFamily& P, const std::vector<double>& times);
double invariance_residual(const ProjectionFamily& P, const EvolutionProcess& p,
                           const std::vector<std::pair<double, double>>& pairs);

// Pairs (t,s) drawn from one time mesh.
struct GridSpec {
    std::vector<double> mesh;  // ascending
    bool stable = true;        // pairs with t >= s
    bool unstable = true;      // pairs with t <= s, used when an unstable part exists
    double max_gap = std::numeric_limits<double>::infinity();  // keep |t - s| <= max_gap

    // Uniform mesh on [lo, hi] that always contains 0 when lo <= 0 <= hi.
    static GridSpec uniform(double lo, double hi, double step);
    static GridSpec from_mesh(std::vector<double> mesh);
    // Uniform mesh over the given horizon on a time domain: [-h,h], [0,h] or [-h,0].
    static GridSpec horizon(TimeDomain d, double horizon, double step);

    GridSpec restricted(TimeDomain d) const;
    GridSpec window(double lo, double hi) const;
};

struct NormSample {
    double t;
    double s;
    double log_norm;
    Part part;
};

struct PoisonedSample {
    double t;
    double s;
    Part part;
    std::string reason;
};

struct NormGrid {
    std::vector<NormSample> samples;
    std::vector<PoisonedSample> poisoned;
    std::size_t vacuous = 0;  // pairs whose projected norm is exactly zero

    std::vector<NormSample> part(Part p) const;
};

double spectral_norm(const Eigen::MatrixXd& S);

// S(t,s) = V diag(e^{Phi_i(t) - Phi_i(s)}) V^{-1}, Phi_i piecewise linear with slope rates[i][j]
// on the j-th piece cut by the ascending breaks. Modes flagged unstable span Pi^u; the process
// carries an exact split evaluator for that family (see split_family()).
EvolutionProcess planted_process(TimeDomain d, const Eigen::MatrixXd& V, std::vector<double> breaks,
                                 std::vector<std::vector<double>> rates, std::vector<bool> unstable,
                                 std::string name = "planted");

// x' = A_j x on the j-th piece cut by the ascending breaks; end pieces extend to infinity.
EvolutionProcess piecewise_constant_process(TimeDomain d, std::vector<double> breaks,
                                            std::vector<Eigen::MatrixXd> generators,
                                            std::string name = "piecewise_constant");

Eigen::VectorXd propagate(const EvolutionProcess& p, double t, double s, const Eigen::VectorXd& x);
double propagate(const EvolutionProcess& p, double t, double s, double x);

// Spectral norm of S(t,s)Pi^s(s) (stable) or S(t,s)Pi^u(s) (unstable); Pi = I without proj.
double operator_norm(const EvolutionProcess& p, double t, double s,
                     const ProjectionFamily* proj = nullptr, Part part = Part::Stable);
// Natural log of operator_norm; exact in log space for closed-form scalar processes.
double log_operator_norm(const EvolutionProcess& p, double t, double s,
                         const ProjectionFamily* proj = nullptr, Part part = Part::Stable);

EvolutionProcess dual_process(const EvolutionProcess& p);

NormGrid sample_norm_grid(const EvolutionProcess& p, const ProjectionFamily* proj,
                          const GridSpec& grid);

// Max over sampled triples t >= tau >= s of |S(t,tau)S(tau,s)x - S(t,s)x| / (1 + |x|).
double cocycle_residual(const EvolutionProcess& p, const std::vector<double>& times,
                        const Eigen::VectorXd& x);

}  // namespace ned
