#pragma once

#include <string>
#include <vector>

#include "ned/certificate.hpp"
#include "ned/dichotomy.hpp"
#include "ned/process.hpp"

namespace ned {

struct DichotomyClaim {
    DichotomyCertificate certificate;  // documented constants
    bool holds = true;
    std::string note;
};

struct GalleryEntry {
    std::string name;
    EvolutionProcess process;
    std::vector<DichotomyClaim> claims;
    GridSpec canonical_grid;               // used to check holds=true claims
    std::vector<GridSpec> rejection_windows;  // nested windows for holds=false claims
    std::vector<std::pair<std::string, double>> parameters;
};

GalleryEntry make_barreira(double a, double b);
GalleryEntry make_sign_switch();
GalleryEntry make_smooth_limits(double transition_scale, double eps = 0.1);
GalleryEntry make_factorial_steps(int max_n);
GalleryEntry make_piecewise_barreira(double a, double b, double c, double d);

// Exponent of the Barreira-Valls process x' = (-b - a t sin t) x.
double barreira_exponent(double a, double b, double t, double s);
// Coefficient -b - a t sin t.
double barreira_coefficient(double a, double b, double t);
// Step coefficient of the factorial-step process and its integral from 0.
double factorial_step_coefficient(double t);
double factorial_step_integral(double t, int max_n);
// K_eps over the pairs of a mesh: max of int_s^t |f - f0| - eps |t - s|.
double smooth_limit_k(const std::vector<double>& mesh, double scale, double eps);

std::vector<std::string> gallery_names();
// Default-parameter entry by name (barreira, sign_switch, smooth_limits, factorial_steps,
// piecewise_barreira).
GalleryEntry gallery_entry(const std::string& name,
                           const std::vector<std::pair<std::string, double>>& params = {});

}  // namespace ned
