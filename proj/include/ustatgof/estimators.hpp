#pragma once

#include <array>
#include <functional>
#include <span>

#include "ustatgof/apd.hpp"
#include "ustatgof/mat.hpp"

namespace ustatgof::est {

enum class Method { ML, MOM };

struct EstimatorResult {
    double mu_hat;
    double sigma_hat;
    Method method;
    int iterations;
    bool converged;
};

// Maximum likelihood fit of (mu, sigma) for EPD_lambda. mu_hat minimizes
// sum |x_i - m|^lambda (closed forms at lambda = 1, 2); sigma_hat is the
// lambda-th root of the mean lambda-th absolute residual power.
EstimatorResult fit_ml(std::span<const double> data, double lambda);

// Method of moments fit: mu_hat is the sample mean, sigma_hat rescales the
// (biased) sample second moment by 3*Gamma(1+1/lambda)/(lambda^{2/lambda}*Gamma(1+3/lambda)).
EstimatorResult fit_mom(std::span<const double> data, double lambda);

// Score in the tested parameters (theta1, theta2) at an H0 point
// (theta1 = 1/2, theta2 = lambda). |y|^lambda ln|y| evaluates to 0 at y = 0.
std::array<double, 2> score_k(double x, const apd::ParamVector& theta);

// Score in the nuisance parameters (mu, sigma): sigma^-1 [|y|^{lambda-1} sign(y), |y|^lambda - 1].
std::array<double, 2> score_u(double x, const apd::ParamVector& theta);

// Influence expansion of a sqrt(n)-consistent estimator of (mu, sigma):
// sqrt(n)(theta_hat_U - theta0_U) = R_U^-1 n^{-1/2} sum r_U(X_i) + o_P(1).
struct InfluenceSpec {
    enum class Label { SCORE_ML, MOM };
    Label label;
    int dim;  // p_U
    std::function<void(double x, const apd::ParamVector& theta, std::span<double> out)> r_u;
    Mat R_u;  // p_U x p_U, symmetric positive definite
};

// ML: r_U is the score itself and R_U the nuisance Fisher information block.
InfluenceSpec influence_ml(double lambda, double sigma0);

// MoM: r_U = R_U g_U with g_U the moment-matching expansion; R_U^-1 is the
// covariance of g_U in closed form.
InfluenceSpec influence_mom(double lambda, double sigma0);

// |t|^p with fast paths for the exponents the Monte Carlo lab hammers on.
inline double pow_abs(double t, double p) {
    t = t < 0.0 ? -t : t;
    if (p == 2.0) return t * t;
    if (p == 1.5) return t * std::sqrt(t);
    if (p == 1.0) return t;
    if (p == 0.5) return std::sqrt(t);
    if (p == 3.0) return t * t * t;
    return std::pow(t, p);
}

}  // namespace ustatgof::est
