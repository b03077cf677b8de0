#pragma once

#include <Eigen/Dense>
#include <functional>

namespace ned {

struct IntegratorOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double initial_step = 0.0;  // 0 selects a step automatically
    double max_step = 0.0;      // 0 means unbounded
    long max_steps = 50'000'000;
    double overflow_guard = 1e150;
};

struct IntegrationStats {
    long accepted = 0;
    long rejected = 0;
};

using Rhs = std::function<void(double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx)>;

// Dormand-Prince 5(4) with per-step error control. Integrates backwards when t1 < t0.
// Throws FiniteEscapeError when |x| exceeds the overflow guard and NumericError on
// step-size underflow.
Eigen::VectorXd integrate(const Rhs& f, double t0, double t1, Eigen::VectorXd x,
                          const IntegratorOptions& opts = {}, IntegrationStats* stats = nullptr);

// Integrates through the increasing list of output times, starting at t0 <= times[0].
std::vector<Eigen::VectorXd> integrate_samples(const Rhs& f, double t0, const Eigen::VectorXd& x0,
                                               const std::vector<double>& times,
                                               const IntegratorOptions& opts = {});

}  // namespace ned
