#pragma once

#include <cmath>
#include <random>

#include "ned/process.hpp"

namespace ned::test {

inline bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

// S(t,s) = e^{rate (t-s)}
inline EvolutionProcess exponential(double rate, TimeDomain d = TimeDomain::Full) {
    return EvolutionProcess::scalar_exponent(
        d, [rate](double t, double s) { return rate * (t - s); }, Backend::ClosedForm, "exponential");
}

// diag(e^{r1 (t-s)}, e^{r2 (t-s)})
inline EvolutionProcess diagonal(double r1, double r2) {
    return planted_process(TimeDomain::Full, Eigen::MatrixXd::Identity(2, 2), {}, {{r1}, {r2}},
                           {r1 > 0, r2 > 0}, "diagonal");
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int n, double r = 1.0) {
    std::uniform_real_distribution<double> U(-r, r);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = U(rng);
    return x;
}

}  // namespace ned::test
