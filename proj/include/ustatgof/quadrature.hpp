#pragma once

#include <functional>

namespace ustatgof {

struct QuadResult {
    double value;
    double error;  // estimated absolute error
};

// 15-point Gauss-Kronrod rule on [a, b] with embedded 7-point Gauss estimate.
QuadResult gauss_kronrod_15(const std::function<double(double)>& f, double a, double b);

// Adaptive bisection of [a, b] until the summed Kronrod error estimate drops
// below abs_tol. Handles integrable endpoint/interior singularities by local
// refinement; throws NonConvergence if the subdivision budget runs out.
double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol = 1e-11);

// Integral over [0, inf) via the rational map t = u/(1-u).
double integrate_half_line(const std::function<double(double)>& f, double abs_tol = 1e-11);

// Integral over (-inf, inf), split at 0.
double integrate_real_line(const std::function<double(double)>& f, double abs_tol = 1e-11);

}  // namespace ustatgof
