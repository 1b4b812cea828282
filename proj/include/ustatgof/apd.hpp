#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ustatgof/rng.hpp"

namespace ustatgof::apd {

// Four-parameter point of the asymmetric power distribution APD_lambda(theta),
// with the auxiliary exponent lambda fixed per model. Under the null of the
// exponential power test, theta1 = 1/2 and theta2 = lambda exactly.
struct ParamVector {
    double theta1;  // asymmetry, in (0, 1)
    double theta2;  // tail decay, > 0
    double mu;      // location
    double sigma;   // scale, > 0
    double lambda;  // auxiliary exponent, > 0

    void validate() const;  // throws std::domain_error
    static ParamVector epd_null(double lambda, double mu = 0.0, double sigma = 1.0) {
        return ParamVector{0.5, lambda, mu, sigma, lambda};
    }
};

// Index split of the parameter vector into components fixed by the null
// (theta1, theta2) and components estimated from data (mu, sigma).
// Indices are 0-based.
struct PartitionMask {
    std::vector<int> known;
    std::vector<int> unknown;

    void validate(int p) const;  // throws std::invalid_argument on overlap/gap
    static PartitionMask epd() { return PartitionMask{{0, 1}, {2, 3}}; }
};

// delta_{theta1,theta2} = 2 t1^t2 (1-t1)^t2 / (t1^t2 + (1-t1)^t2).
double delta_coef(double theta1, double theta2);

double apd_log_density(double x, const ParamVector& theta);
double apd_density(double x, const ParamVector& theta);

// E|Y|^a and E[|Y|^a ln|Y|] for Y ~ EPD_lambda(0, 1), closed forms.
double epd_moment_abs(double a, double lambda);
double epd_moment_abs_log(double a, double lambda);

// E[f(Y)] for Y ~ APD with mu = 0, sigma = 1 and the given shape parameters,
// by adaptive quadrature over the two half-lines.
double expect_standard(const ParamVector& theta, const std::function<double(double)>& f,
                       double abs_tol = 1e-11);

// E[f(X)] for X ~ APD_lambda(theta).
double expect(const ParamVector& theta, const std::function<double(double)>& f,
              double abs_tol = 1e-11);

// Upper truncation points for the standardized density: beyond them the
// density is below exp(-60) of its peak scale.
double support_cut_neg(const ParamVector& theta);
double support_cut_pos(const ParamVector& theta);

// Draws APD variates. The probability mass of the negative branch is obtained
// by quadrature of the density once at construction and cached.
class Sampler {
  public:
    explicit Sampler(const ParamVector& theta);

    double operator()(RngStream& rng) const;
    void fill(RngStream& rng, std::span<double> out) const {
        for (double& v : out) v = (*this)(rng);
    }

    double negative_branch_mass() const { return p_neg_; }
    const ParamVector& theta() const { return theta_; }

  private:
    ParamVector theta_;
    double p_neg_;         // P(Y < 0), from quadrature
    double gamma_shape_;   // 1/theta2
    double power_;         // 1/theta2 exponent for the variate transform
    double lam_over_delta_;
};

}  // namespace ustatgof::apd
