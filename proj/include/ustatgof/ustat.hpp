#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ustatgof/apd.hpp"
#include "ustatgof/errors.hpp"
#include "ustatgof/estimators.hpp"
#include "ustatgof/mat.hpp"

namespace ustatgof::ustat {

// Symmetric kernel of degree nu returning d-dimensional values, plus the
// optional degree-1 projection h1 (for nu = 1 the kernel is its own
// projection and h1 may be left empty).
template <typename Obs = double>
struct KernelSpec {
    int degree = 1;
    int out_dim = 1;
    std::function<void(std::span<const Obs>, const apd::ParamVector&, std::span<double>)> h;
    std::function<void(const Obs&, const apd::ParamVector&, std::span<double>)> h1;
};

// Exact subset enumeration is capped at C(n, nu) <= 1e7 ordered tuples;
// incomplete U-statistics are out of scope.
inline constexpr double kEnumerationCap = 1e7;

// C(n, nu)^-1 sum over all strictly increasing nu-tuples of h(...). For
// nu = 1 this is the sample mean of h along the data.
template <typename Obs>
std::vector<double> u_statistic(std::span<const Obs> data, const KernelSpec<Obs>& kernel,
                                const apd::ParamVector& theta) {
    const int nu = kernel.degree;
    const int d = kernel.out_dim;
    const long n = static_cast<long>(data.size());
    if (n < nu) throw SampleTooSmall("u_statistic: sample smaller than kernel degree");

    std::vector<double> acc(static_cast<size_t>(d), 0.0);
    std::vector<double> out(static_cast<size_t>(d), 0.0);
    if (nu == 1) {
        for (const Obs& x : data) {
            std::span<const Obs> one(&x, 1);
            kernel.h(one, theta, out);
            for (int j = 0; j < d; ++j) acc[static_cast<size_t>(j)] += out[static_cast<size_t>(j)];
        }
        for (double& v : acc) v /= static_cast<double>(n);
        return acc;
    }

    double combos = 1.0;
    for (int k = 0; k < nu; ++k) combos *= static_cast<double>(n - k) / (k + 1);
    if (combos > kEnumerationCap)
        throw EnumerationBudget("u_statistic: C(n, nu) exceeds the enumeration cap of 1e7");

    std::vector<long> idx(static_cast<size_t>(nu));
    for (int k = 0; k < nu; ++k) idx[static_cast<size_t>(k)] = k;
    std::vector<Obs> tuple(static_cast<size_t>(nu));
    long count = 0;
    for (;;) {
        for (int k = 0; k < nu; ++k) tuple[static_cast<size_t>(k)] = data[static_cast<size_t>(idx[static_cast<size_t>(k)])];
        kernel.h(tuple, theta, out);
        for (int j = 0; j < d; ++j) acc[static_cast<size_t>(j)] += out[static_cast<size_t>(j)];
        ++count;
        // next strictly increasing tuple
        int k = nu - 1;
        while (k >= 0 && idx[static_cast<size_t>(k)] == n - nu + k) --k;
        if (k < 0) break;
        ++idx[static_cast<size_t>(k)];
        for (int j = k + 1; j < nu; ++j) idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j - 1)] + 1;
    }
    for (double& v : acc) v /= static_cast<double>(count);
    return acc;
}

// Vector-valued function of one univariate observation, already bound to the
// null parameter where needed.
using VecFn = std::function<void(double x, std::span<double> out)>;

// Computes expectations under F(.|theta0) for the plug-in matrices; concrete
// backends integrate against the null density or average Monte Carlo draws.
class ExpectationBackend {
  public:
    virtual ~ExpectationBackend() = default;
    // E[f(X) g(X)^T], dimensions fa x gb.
    virtual Mat outer(const VecFn& f, int fa, const VecFn& g, int gb) const = 0;
    virtual std::vector<double> mean(const VecFn& f, int fa) const = 0;
};

class QuadratureBackend : public ExpectationBackend {
  public:
    QuadratureBackend(const apd::ParamVector& theta0, double abs_tol = 1e-12)
        : theta0_(theta0), tol_(abs_tol) {}
    Mat outer(const VecFn& f, int fa, const VecFn& g, int gb) const override;
    std::vector<double> mean(const VecFn& f, int fa) const override;

  private:
    apd::ParamVector theta0_;
    double tol_;
};

// Averages n_draws samples from the supplied sampler; throws BackendAccuracy
// if any entry's Monte Carlo standard error exceeds max_stderr.
class MonteCarloBackend : public ExpectationBackend {
  public:
    MonteCarloBackend(std::function<double(RngStream&)> sampler, long n_draws, uint64_t seed,
                      double max_stderr)
        : sampler_(std::move(sampler)), n_(n_draws), seed_(seed), max_se_(max_stderr) {}
    Mat outer(const VecFn& f, int fa, const VecFn& g, int gb) const override;
    std::vector<double> mean(const VecFn& f, int fa) const override;

  private:
    std::function<double(RngStream&)> sampler_;
    long n_;
    uint64_t seed_;
    double max_se_;
};

// The six expectation matrices of the plug-in covariance algebra plus the
// derived Sigma (d x d) and drift matrix M (d x p_K).
struct PluginMatrices {
    Mat H, G_U, G_K, J_U, R_U, S_KU;
    Mat Sigma, M;
    int nu = 1;
};

// Sigma = nu^2 {H - G_U R_U^-1 J_U^T - J_U R_U^-1 G_U^T + G_U R_U^-1 G_U^T}.
Mat assemble_sigma(const Mat& H, const Mat& G_U, const Mat& J_U, const Mat& R_U, int nu);

// M = nu (G_K - G_U R_U^-1 S_KU^T).
Mat assemble_drift(const Mat& G_K, const Mat& G_U, const Mat& R_U, const Mat& S_KU, int nu);

// Score-style function of (x, theta) writing a fixed-size vector.
using ScoreFn = std::function<void(double x, const apd::ParamVector& theta, std::span<double> out)>;

// Assembles all expectation matrices under F(.|theta0) and derives Sigma and
// M. The kernel's degree-1 projection, both score blocks and the influence
// function are evaluated at theta0. When use_analytic_RU is set, R_U is taken
// from the influence spec instead of being re-integrated.
PluginMatrices plugin_matrices(const KernelSpec<double>& kernel, const apd::ParamVector& theta0,
                               const ScoreFn& score_K, int pK, const ScoreFn& score_U,
                               const est::InfluenceSpec& influence, const ExpectationBackend& backend,
                               bool use_analytic_RU = true);

enum class SigmaSource { AT_THETA0, AT_THETA_HAT };

struct TestResult {
    double statistic;
    int df;
    double p_value;
    apd::ParamVector theta_hat;
    SigmaSource sigma_source;
};

// statistic = n U_n(theta_hat)^T Sigma^-1 U_n(theta_hat), p-value from the
// central chi-square survival function with df = d.
TestResult test_statistic(std::span<const double> data, const KernelSpec<double>& kernel,
                          const std::function<apd::ParamVector(std::span<const double>)>& fit,
                          const PluginMatrices& matrices,
                          SigmaSource source = SigmaSource::AT_THETA_HAT);

// Asymptotic local power: P{chi2_d(ncp) > chi2_quantile(1 - alpha, d)} with
// ncp = delta_K^T M^T Sigma^-1 M delta_K.
double local_power(const PluginMatrices& matrices, std::span<const double> delta_K, double alpha, int df);
double noncentrality(const PluginMatrices& matrices, std::span<const double> delta_K);

// Full-delta drift matrix M* = nu (G - G_U R_U^-1 S_U^T) over all p parameter
// directions, for score-type estimators (Corollary-style reductions).
Mat full_drift_matrix(const KernelSpec<double>& kernel, const apd::ParamVector& theta0,
                      const std::function<void(double, const apd::ParamVector&, std::span<double>)> score_full,
                      int p, const apd::PartitionMask& partition, const est::InfluenceSpec& influence,
                      const ExpectationBackend& backend);

// Drift vector from the full-delta formula M* delta; checked against the
// reduced form M delta_K, which must agree to 1e-8 (score-type estimators
// have S_UU = R_U, so the delta_U block contributes nothing).
std::vector<double> corollary1_reduction(const Mat& M_full, std::span<const double> delta,
                                         const apd::PartitionMask& partition,
                                         const PluginMatrices& plugin);

}  // namespace ustatgof::ustat
