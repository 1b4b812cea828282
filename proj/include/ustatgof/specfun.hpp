#pragma once

namespace ustatgof::specfun {

// ln Gamma(x) for x > 0. Lanczos approximation (g = 7, 9 terms), accurate to
// ~1e-15 relative on [1e-3, 1e3].
double ln_gamma(double x);

// psi(x) = d/dx ln Gamma(x), x > 0.
double digamma(double x);

// psi_1(x) = d/dx psi(x), x > 0.
double trigamma(double x);

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

// Chi-square CDF/SF with integer degrees of freedom.
double chi2_cdf(double x, int df);
double chi2_sf(double x, int df);

// Inverse of chi2_cdf in its first argument; p in [0, 1).
double chi2_quantile(double p, int df);

// Survival function of the noncentral chi-square, Poisson-weighted central
// series started at the modal Poisson index and expanded in both directions
// until the neglected weight is below 1e-12.
double noncentral_chi2_sf(double x, int df, double ncp);

}  // namespace ustatgof::specfun
