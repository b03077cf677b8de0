#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ned/attractor.hpp"
#include "ned/certificate.hpp"
#include "ned/process.hpp"

namespace ned {

struct Grid1D {
    double L = 1.0;
    int N = 31;  // interior points
    double h() const { return L / (N + 1); }
    void validate() const;
};

enum class BoundaryKind { Dirichlet, Neumann, Robin };
std::string to_string(BoundaryKind k);
BoundaryKind parse_boundary(const std::string& s);

struct BoundaryCondition {
    BoundaryKind kind = BoundaryKind::Dirichlet;
    double robin_alpha = 0.0;
};

struct DiscreteLaplacian {
    Grid1D grid;
    BoundaryCondition bc;
    std::vector<double> x;   // node positions
    Eigen::MatrixXd A;       // generator on the nodes
    Eigen::VectorXd weight;  // W A is symmetric for W = diag(weight)
    Eigen::VectorXd eigenvalues;  // descending
    Eigen::MatrixXd modes;        // A = modes diag(eigenvalues) modes_inv
    Eigen::MatrixXd modes_inv;

    int size() const { return static_cast<int>(A.rows()); }
    double lambda1() const { return eigenvalues(0); }
    // W^{1/2} A W^{-1/2}
    Eigen::MatrixXd symmetrized() const;
    // e^{A tau} through the eigendecomposition.
    Eigen::MatrixXd exp(double tau) const;
};

DiscreteLaplacian discretize(const Grid1D& grid, const BoundaryCondition& bc);
// -(2 - 2 cos(k pi h / L)) / h^2
double dirichlet_eigenvalue(int k, const Grid1D& grid);

// a(t,x); separable fields a(t,x) = g(t) carry g and optionally its exact integral.
struct CoefficientField {
    std::function<double(double t, double x)> a;
    std::function<double(double t)> g;
    std::function<double(double t, double s)> g_integral;  // int_s^t g

    bool is_separable() const { return static_cast<bool>(g); }
    static CoefficientField separable(std::function<double(double)> g,
                                      std::function<double(double, double)> integral = {});
    static CoefficientField general(std::function<double(double, double)> a);
};

struct PdeOptions {
    double dt = 1e-3;
    TimeDomain domain = TimeDomain::Full;
};

// Strang splitting: exact nonnegative diffusion factor around a pointwise reaction factor.
EvolutionProcess pde_process(const DiscreteLaplacian& Ah, const CoefficientField& a,
                             const PdeOptions& opts = {});

// S~(t,s) = S(-s,-t)^T
EvolutionProcess adjoint_process(const EvolutionProcess& p);

// Nonnegative e^{A tau} by uniformization: e^{-c tau} e^{(A + cI) tau}, c = max |A_ii|.
Eigen::MatrixXd nonnegative_expm(const Eigen::MatrixXd& A, double tau);

struct VocReport {
    double residual = 0;  // max-norm discrepancy over the time grid
    std::vector<double> times;
};
// Solves u' = A u + a u + b directly and through S_a(t,s)u0 + int_s^t S_a(t,r) b(r) dr.
VocReport variation_of_constants_check(const DiscreteLaplacian& Ah, const CoefficientField& a,
                                       const std::function<Eigen::VectorXd(double)>& b, double s,
                                       const std::vector<double>& times, const Eigen::VectorXd& u0,
                                       const PdeOptions& opts = {});

struct PrincipalBundle {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> e;       // unit positive leading directions
    std::vector<Eigen::VectorXd> e_star;  // adjoint directions
    std::vector<double> log_c;            // ln c(t_{k+1}, t_k)
    double M_sep = 1, nu_sep = 0;
    double C1 = 1, C2 = 1;  // max norms of Q1 and Q2
    std::size_t fit_samples = 0;
    double min_entry = 0;  // smallest propagator entry seen

    double log_cocycle(std::size_t j, std::size_t i) const;  // ln c(t_j, t_i)
    Eigen::MatrixXd Q1(std::size_t k) const;
    double separation_constant() const { return C1 + M_sep * C2; }
};

// Power iteration over windows S(t + stride, t); warmup windows are discarded.
PrincipalBundle principal_bundle(const EvolutionProcess& p, double t0, double horizon, double stride,
                                 int warmup = 20);

struct TransferResult {
    DichotomyCertificate predicted;
    double lambda1 = 0;
    double C = 1;
};
TransferResult scalar_to_pde_transfer(const DichotomyCertificate& scalar, const DiscreteLaplacian& Ah,
                                      const CoefficientField& a, const PrincipalBundle& bundle);

// Splitting flow for u' = A u + a(t,x)u + r(t,x,u) + b(t,x) with a pointwise RK4 reaction.
Flow semilinear_flow(const DiscreteLaplacian& Ah, const CoefficientField& a,
                     std::function<double(double t, double x, double u)> nonlinearity,
                     std::function<double(double t, double x)> b, const PdeOptions& opts = {});

struct ParabolicDemoConfig {
    DichotomyCertificate scalar;   // NEDII on R- for g
    double lambda = 0;
    double gamma = 0;
    double seed_radius = 1;
    std::vector<double> times{-2, -1, 0};
    int K = 4;
    std::size_t seeds = 4;
    std::uint64_t seed = 0;
    double cluster_eps = 1e-4;
};

struct ParabolicDemoReport {
    SetFamily sections;
    RadiusEnvelope envelope;
    ContainmentReport containment;
    double C_inf = 1;  // sup_tau e^{-lambda1 tau} ||e^{A tau}||_inf
    double bnorm = 0;
    std::size_t poisoned = 0;
};

// b(t,x) = b_time(t) >= 0 on every node; nonlinearity -u^3.
ParabolicDemoReport parabolic_attractor_demo(const DiscreteLaplacian& Ah, const CoefficientField& a,
                                             std::function<double(double)> b_time,
                                             const ParabolicDemoConfig& cfg,
                                             const PdeOptions& opts = {});

}  // namespace ned
