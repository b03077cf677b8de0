#pragma once

#include <optional>
#include <string>

#include "ned/certificate.hpp"
#include "ned/dichotomy.hpp"
#include "ned/process.hpp"

namespace ned {

struct RobustnessFlags {
    bool radical_nonnegative = false;  // cosh^2 w - 1 - 2 eps sinh w >= 0
    bool log_argument_positive = false;
    bool rho_below_one = false;
    bool M1_positive = false;
    bool M2_positive = false;
    bool upsilon_below_omega = false;
};

struct RobustnessReport {
    double M = 1, omega = 0, upsilon = 0, eps = 0;
    double omega_tilde = 0, beta_tilde = 0, rho = 0, M1 = 0, M2 = 0, M_hat = 0;
    double w_as_written = 0;   // omega_tilde - omega
    double w_sign_flipped = 0; // omega - omega_tilde
    bool flipped_is_positive = false;
    std::optional<double> L;
    RobustnessFlags flags;

    bool admissible() const;
    // Whichever sign convention of w is positive (NaN when neither is).
    double w_positive() const;
    // M_hat^2 e^{2 omega_tilde} max{L, L^2}, requires L.
    double bound_constant() const;
};

RobustnessReport robustness_constants(double M, double omega, double upsilon, double eps);

struct SupResult {
    double value = 0;        // max(grid, refined)
    double grid_value = 0;
    double refinement_residual = 0;  // refined minus grid maximum
    double t = 0, s = 0;
    std::size_t samples = 0;
    std::vector<PoisonedSample> poisoned;
};

// Band grid 0 <= t - s <= 1 with the default step 0.01.
GridSpec band_grid(double lo, double hi, double step = 0.01);

SupResult perturbation_distance(const EvolutionProcess& p, const EvolutionProcess& q,
                                double upsilon, const GridSpec& band);
SupResult growth_constant(const EvolutionProcess& p, double upsilon, const GridSpec& band);

struct PipelineResult {
    bool applicable = false;
    std::string reason;
    double distance = 0;
    RobustnessReport constants;
    std::optional<DichotomyCertificate> dual_of_q;    // kind I for dual(q)
    std::optional<DichotomyCertificate> primal_of_q;  // kind II for q
    double dual_violation = 0;
    double primal_violation = 0;
    bool projections_validated = false;  // only zero/identity projections carry over
    bool nedi_route_applicable = false;  // robustness of NEDI on p directly (omega > upsilon for kind I)
};

PipelineResult robust_nedii_pipeline(const EvolutionProcess& p, const DichotomyCertificate& cert,
                                     const EvolutionProcess& q, double upsilon, double eps,
                                     const GridSpec& band, const GridSpec& check_grid,
                                     const std::optional<DichotomyCertificate>& nedi_cert = {});

}  // namespace ned
