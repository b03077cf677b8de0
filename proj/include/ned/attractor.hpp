#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ned/certificate.hpp"
#include "ned/integrator.hpp"
#include "ned/process.hpp"
#include "ned/time_domain.hpp"

namespace ned {

// Euclidean for scalar comparisons, max-norm for cooperative systems.
enum class StateNorm { Euclidean, Max };
double state_norm(const Eigen::VectorXd& x, StateNorm n);

using Cloud = std::vector<Eigen::VectorXd>;

struct WeightedFunction {
    std::function<Eigen::VectorXd(double)> evaluator;
    double eta = 0.0;
    TimeDomain domain = TimeDomain::Full;
    StateNorm norm = StateNorm::Euclidean;

    static WeightedFunction scalar(std::function<double(double)> f, double eta,
                                   TimeDomain domain = TimeDomain::Full);
    double magnitude(double t) const;
};

// sup over the mesh of e^{-eta|r|}|b(r)|; finiteness is only grid-certified.
double weighted_norm(const WeightedFunction& b, const std::vector<double>& mesh);
double weighted_norm(const WeightedFunction& b, const std::vector<double>& mesh, double eta);

struct SetFamily {
    std::map<double, Cloud> sections;
    void validate() const;
};

struct RadiusEnvelope {
    double M = 1, rate = 0, growth = 0, lambda = 0, bnorm = 0;
    // true when the bound is on R(t)^2 (Euclidean comparison), false when on R(t)
    bool squared = true;
    TimeDomain domain = TimeDomain::Minus;
    std::function<double(double)> evaluator;

    double operator()(double t) const { return evaluator(t); }
    // Exponent the admissible-pair law assigns to R^2 (or R): (1 + lambda) growth.
    double admissible_exponent() const { return (1 + lambda) * growth; }
    // sup e^{-(1+lambda) growth |t|} R(t)^p over the mesh, p = 2 or 1.
    double admissibility_norm(const std::vector<double>& mesh) const;
};

using Field = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& x)>;

// 2<f(t,x),x> <= a(t)|x|^2 + b(t)
struct DissipativitySpec {
    int dimension = 1;
    Field field;
    std::function<double(double)> a;
    WeightedFunction b;
};

// f(t,x) <= A(t)x + b(t) on the nonnegative cone, with A quasimonotone.
struct CooperativeSpec {
    int dimension = 1;
    Field field;
    std::function<Eigen::MatrixXd(double)> A;
    std::function<Eigen::VectorXd(double)> b;
};

struct SampleBox {
    double t_lo = -10, t_hi = 10;
    double x_radius = 10;
};

struct WitnessReport {
    std::size_t samples = 0;
    std::size_t violations = 0;
    double max_violation = 0;
    std::string note;
    bool holds() const { return violations == 0; }
};

WitnessReport check_dissipativity(const DissipativitySpec& spec, const SampleBox& box,
                                  std::size_t samples, std::uint64_t seed);
WitnessReport check_cooperative(const CooperativeSpec& spec, const SampleBox& box,
                                std::size_t samples, std::uint64_t seed);

// Scalar comparison process T(t,s) = exp(int_s^t a).
EvolutionProcess comparison_process(std::function<double(double)> a, TimeDomain domain,
                                    std::function<double(double, double)> log_T = {});

// T(t,s) x0sq + int_s^t T(t,tau)|b(tau)| dtau by adaptive Gauss-Kronrod quadrature.
double comparison_bound(const EvolutionProcess& T, const DichotomyCertificate& certT,
                        const WeightedFunction& b, double t, double s, double x0sq);

// R(t) = [M/(alpha - delta lambda) bnorm e^{(lambda+1) delta |t|}]^{1/2} on R-.
// cooperative=true drops the square root (max-norm comparison).
RadiusEnvelope pullback_envelope(const DichotomyCertificate& cert, double lambda, double bnorm,
                                 bool cooperative = false);
double pullback_radius(const DichotomyCertificate& cert, double lambda, double bnorm, double t);

// Full-line pullback envelope for eta > -beta/nu on t > 0, R- envelope for t <= 0.
RadiusEnvelope pullback_envelope_line(const DichotomyCertificate& minus, const DichotomyCertificate& plus,
                                      double lambda, double eta, double bnorm_minus, double bnorm_plus);

enum class ForwardCase { Above, Critical, Below };
ForwardCase forward_case(double eta, double beta, double nu, double tol = 1e-12);
double forward_bound(const DichotomyCertificate& cert, double eta, double bnorm, double t,
                     double s, double x0sq);

struct ForwardAttractor {
    bool point = true;
    double radius = 0;
};
// kind I on R+ with zero projection; bnorm = ||b||_{-delta}.
ForwardAttractor forward_attractor_radius(const DichotomyCertificate& cert, double eta, double bnorm);
// R_F = [M bnorm/(alpha - delta)]^{1/2} for a NEDII on the line with alpha > delta.
ForwardAttractor forward_attractor_radius_line(const DichotomyCertificate& cert, double lambda,
                                               double bnorm);

// Nonlinear flow x(t) = advance(t, s, x).
struct Flow {
    int dimension = 1;
    std::function<Eigen::VectorXd(double t, double s, const Eigen::VectorXd& x)> advance;
};
Flow ode_flow(const Field& f, int dimension, const IntegratorOptions& opts = {});

// Seeds drawn from the ball of radius C e^{gamma|s|} (nonnegative box for cooperative).
struct UniverseFamily {
    double gamma = 0;
    double C = 1;
    bool nonnegative = false;
    StateNorm norm = StateNorm::Euclidean;
    double radius(double s) const;
};

struct OmegaOptions {
    std::size_t seeds_per_time = 16;
    double cluster_eps = 1e-4;
    double burn_in = 0.5;  // fraction of the schedule discarded
    std::uint64_t seed = 0;
    StateNorm norm = StateNorm::Euclidean;
};

struct Trajectory {
    double s = 0;
    Eigen::VectorXd start, end;
    int cluster = -1;
};

struct OmegaResult {
    double t = 0;
    Cloud cloud;  // cluster representatives
    std::vector<Trajectory> kept;
    std::size_t poisoned = 0;
    std::vector<std::string> poison_reasons;
    std::vector<Cloud> depth_clouds;  // representatives per kept schedule entry
    double last_depth_distance = 0;
    bool converged = false;
};

std::vector<double> pullback_schedule(double t, int K);

OmegaResult simulate_pullback_omega(const Flow& flow, double t, const std::vector<double>& schedule,
                                    const UniverseFamily& seeds, const OmegaOptions& opts = {});
OmegaResult simulate_forward_omega(const Flow& flow, const Cloud& B, double tau,
                                   const std::vector<double>& horizons, const OmegaOptions& opts = {});

// Single-linkage clustering; returns ids and centroid representatives.
std::pair<std::vector<int>, Cloud> cluster_points(const Cloud& pts, double eps, StateNorm norm);

double hausdorff_semidistance(const Cloud& A, const Cloud& B, StateNorm norm = StateNorm::Euclidean);
double hausdorff_distance(const Cloud& A, const Cloud& B, StateNorm norm = StateNorm::Euclidean);

struct ContainmentReport {
    std::vector<std::pair<double, double>> margins;  // (t, R(t) - max norm)
    double min_margin = 0;
    bool contained() const { return min_margin >= 0; }
};
ContainmentReport verify_containment(const SetFamily& family, const RadiusEnvelope& envelope,
                                     StateNorm norm = StateNorm::Euclidean);

struct MembershipReport {
    std::optional<double> C;
    double C_half = 0;        // witness over |t| <= horizon/2
    double growth_factor = 1;  // C over all sections divided by C_half
    bool flagged = false;     // growth_factor >= e
};
MembershipReport universe_membership(const SetFamily& family, double gamma,
                                     StateNorm norm = StateNorm::Euclidean);

double gamma0(double lambda, double delta);

struct CoincidenceReport {
    std::vector<double> gammas;
    std::vector<double> distances;  // max over t of the Hausdorff distance to the gamma0 sections
    std::map<double, SetFamily> sections;
};
CoincidenceReport attractor_coincidence(const Flow& flow, double gamma_0,
                                        const std::vector<double>& gammas, double gamma_limit,
                                        const std::vector<double>& times, int K, double C,
                                        const OmegaOptions& opts = {});

struct OrderReport {
    std::size_t pairs = 0;
    std::size_t violations = 0;
    double worst = 0;
};
// x_s <= y_s componentwise, checks x(t) <= y(t) at the sampled times.
OrderReport check_order_preservation(const Flow& flow, double s, const std::vector<double>& times,
                                     std::size_t pairs, double radius, std::uint64_t seed);

}  // namespace ned
