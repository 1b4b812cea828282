#include "ustatgof/ustat.hpp"

#include <cmath>
#include <stdexcept>

#include "ustatgof/quadrature.hpp"
#include "ustatgof/specfun.hpp"

namespace ustatgof::ustat {

Mat QuadratureBackend::outer(const VecFn& f, int fa, const VecFn& g, int gb) const {
    Mat m(fa, gb);
    std::vector<double> fv(static_cast<size_t>(fa)), gv(static_cast<size_t>(gb));
    for (int i = 0; i < fa; ++i)
        for (int j = 0; j < gb; ++j) {
            m(i, j) = apd::expect(
                theta0_,
                [&](double x) {
                    f(x, fv);
                    g(x, gv);
                    return fv[static_cast<size_t>(i)] * gv[static_cast<size_t>(j)];
                },
                tol_);
        }
    return m;
}

std::vector<double> QuadratureBackend::mean(const VecFn& f, int fa) const {
    std::vector<double> out(static_cast<size_t>(fa));
    std::vector<double> fv(static_cast<size_t>(fa));
    for (int i = 0; i < fa; ++i)
        out[static_cast<size_t>(i)] = apd::expect(
            theta0_,
            [&](double x) {
                f(x, fv);
                return fv[static_cast<size_t>(i)];
            },
            tol_);
    return out;
}

Mat MonteCarloBackend::outer(const VecFn& f, int fa, const VecFn& g, int gb) const {
    Mat sum(fa, gb), sumsq(fa, gb);
    std::vector<double> fv(static_cast<size_t>(fa)), gv(static_cast<size_t>(gb));
    RngStream rng(seed_, 0x6f75746572ULL);
    for (long k = 0; k < n_; ++k) {
        const double x = sampler_(rng);
        f(x, fv);
        g(x, gv);
        for (int i = 0; i < fa; ++i)
            for (int j = 0; j < gb; ++j) {
                const double v = fv[static_cast<size_t>(i)] * gv[static_cast<size_t>(j)];
                sum(i, j) += v;
                sumsq(i, j) += v * v;
            }
    }
    Mat m(fa, gb);
    for (int i = 0; i < fa; ++i)
        for (int j = 0; j < gb; ++j) {
            const double mean = sum(i, j) / static_cast<double>(n_);
            const double var = sumsq(i, j) / static_cast<double>(n_) - mean * mean;
            const double se = std::sqrt(std::max(var, 0.0) / static_cast<double>(n_));
            if (se > max_se_)
                throw BackendAccuracy("MonteCarloBackend: entry standard error exceeds the requested bound");
            m(i, j) = mean;
        }
    return m;
}

std::vector<double> MonteCarloBackend::mean(const VecFn& f, int fa) const {
    std::vector<double> sum(static_cast<size_t>(fa), 0.0), sumsq(static_cast<size_t>(fa), 0.0);
    std::vector<double> fv(static_cast<size_t>(fa));
    RngStream rng(seed_, 0x6d65616eULL);
    for (long k = 0; k < n_; ++k) {
        const double x = sampler_(rng);
        f(x, fv);
        for (int i = 0; i < fa; ++i) {
            sum[static_cast<size_t>(i)] += fv[static_cast<size_t>(i)];
            sumsq[static_cast<size_t>(i)] += fv[static_cast<size_t>(i)] * fv[static_cast<size_t>(i)];
        }
    }
    for (int i = 0; i < fa; ++i) {
        const double mean = sum[static_cast<size_t>(i)] / static_cast<double>(n_);
        const double var = sumsq[static_cast<size_t>(i)] / static_cast<double>(n_) - mean * mean;
        if (std::sqrt(std::max(var, 0.0) / static_cast<double>(n_)) > max_se_)
            throw BackendAccuracy("MonteCarloBackend: entry standard error exceeds the requested bound");
        sum[static_cast<size_t>(i)] = mean;
    }
    return sum;
}

Mat assemble_sigma(const Mat& H, const Mat& G_U, const Mat& J_U, const Mat& R_U, int nu) {
    const Mat Rinv = R_U.cholesky_inverse("R_U");
    const Mat GRi = G_U * Rinv;
    Mat s = H - GRi * J_U.transpose() - (J_U * Rinv) * G_U.transpose() + GRi * G_U.transpose();
    return s.scaled(static_cast<double>(nu) * nu);
}

Mat assemble_drift(const Mat& G_K, const Mat& G_U, const Mat& R_U, const Mat& S_KU, int nu) {
    const Mat Rinv = R_U.cholesky_inverse("R_U");
    return (G_K - (G_U * Rinv) * S_KU.transpose()).scaled(static_cast<double>(nu));
}

PluginMatrices plugin_matrices(const KernelSpec<double>& kernel, const apd::ParamVector& theta0,
                               const ScoreFn& score_K, int pK, const ScoreFn& score_U,
                               const est::InfluenceSpec& influence, const ExpectationBackend& backend,
                               bool use_analytic_RU) {
    const int d = kernel.out_dim;
    const int pU = influence.dim;

    VecFn h1;
    if (kernel.degree == 1) {
        h1 = [&](double x, std::span<double> out) {
            std::span<const double> one(&x, 1);
            kernel.h(one, theta0, out);
        };
    } else {
        if (!kernel.h1) throw std::invalid_argument("plugin_matrices: degree > 1 kernel requires h1");
        h1 = [&](double x, std::span<double> out) { kernel.h1(x, theta0, out); };
    }
    VecFn sK = [&](double x, std::span<double> out) { score_K(x, theta0, out); };
    VecFn sU = [&](double x, std::span<double> out) { score_U(x, theta0, out); };
    VecFn rU = [&](double x, std::span<double> out) { influence.r_u(x, theta0, out); };

    PluginMatrices pm;
    pm.nu = kernel.degree;
    pm.H = backend.outer(h1, d, h1, d);
    pm.G_U = backend.outer(h1, d, sU, pU);
    pm.G_K = backend.outer(h1, d, sK, pK);
    pm.J_U = backend.outer(h1, d, rU, pU);
    pm.S_KU = backend.outer(sK, pK, rU, pU);
    pm.R_U = use_analytic_RU ? influence.R_u : backend.outer(rU, pU, rU, pU);

    pm.H.cholesky("H");  // A2: the degree-1 projection covariance must be PD
    pm.Sigma = assemble_sigma(pm.H, pm.G_U, pm.J_U, pm.R_U, pm.nu);
    pm.M = assemble_drift(pm.G_K, pm.G_U, pm.R_U, pm.S_KU, pm.nu);
    pm.Sigma.cholesky("Sigma");
    return pm;
}

TestResult test_statistic(std::span<const double> data, const KernelSpec<double>& kernel,
                          const std::function<apd::ParamVector(std::span<const double>)>& fit,
                          const PluginMatrices& matrices, SigmaSource source) {
    const apd::ParamVector theta_hat = fit(data);
    const std::vector<double> u = u_statistic(data, kernel, theta_hat);
    const std::vector<double> siu = matrices.Sigma.cholesky_solve(u, "Sigma");
    double quad = 0.0;
    for (size_t i = 0; i < u.size(); ++i) quad += u[i] * siu[i];
    const double stat = static_cast<double>(data.size()) * quad;
    const int df = kernel.out_dim;
    return {stat, df, specfun::noncentral_chi2_sf(stat, df, 0.0), theta_hat, source};
}

double noncentrality(const PluginMatrices& matrices, std::span<const double> delta_K) {
    const std::vector<double> md = matrices.M.mul(delta_K);
    const std::vector<double> x = matrices.Sigma.cholesky_solve(md, "Sigma");
    double ncp = 0.0;
    for (size_t i = 0; i < md.size(); ++i) ncp += md[i] * x[i];
    return ncp;
}

double local_power(const PluginMatrices& matrices, std::span<const double> delta_K, double alpha, int df) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("local_power: alpha must lie in (0, 1)");
    const double crit = specfun::chi2_quantile(1.0 - alpha, df);
    return specfun::noncentral_chi2_sf(crit, df, noncentrality(matrices, delta_K));
}

Mat full_drift_matrix(const KernelSpec<double>& kernel, const apd::ParamVector& theta0,
                      const std::function<void(double, const apd::ParamVector&, std::span<double>)> score_full,
                      int p, const apd::PartitionMask& partition, const est::InfluenceSpec& influence,
                      const ExpectationBackend& backend) {
    partition.validate(p);
    const int d = kernel.out_dim;
    const int pU = influence.dim;
    VecFn h1;
    if (kernel.degree == 1) {
        h1 = [&](double x, std::span<double> out) {
            std::span<const double> one(&x, 1);
            kernel.h(one, theta0, out);
        };
    } else {
        if (!kernel.h1) throw std::invalid_argument("full_drift_matrix: degree > 1 kernel requires h1");
        h1 = [&](double x, std::span<double> out) { kernel.h1(x, theta0, out); };
    }
    VecFn s = [&](double x, std::span<double> out) { score_full(x, theta0, out); };
    VecFn rU = [&](double x, std::span<double> out) { influence.r_u(x, theta0, out); };

    const Mat G = backend.outer(h1, d, s, p);        // d x p
    const Mat S_U = backend.outer(s, p, rU, pU);     // p x p_U
    Mat G_U(d, pU);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < pU; ++j) G_U(i, j) = G(i, partition.unknown[static_cast<size_t>(j)]);
    const Mat Rinv = influence.R_u.cholesky_inverse("R_U");
    return (G - (G_U * Rinv) * S_U.transpose()).scaled(static_cast<double>(kernel.degree));
}

std::vector<double> corollary1_reduction(const Mat& M_full, std::span<const double> delta,
                                         const apd::PartitionMask& partition,
                                         const PluginMatrices& plugin) {
    partition.validate(static_cast<int>(delta.size()));
    const std::vector<double> full = M_full.mul(delta);
    std::vector<double> delta_K(partition.known.size());
    for (size_t j = 0; j < partition.known.size(); ++j)
        delta_K[j] = delta[static_cast<size_t>(partition.known[j])];
    const std::vector<double> reduced = plugin.M.mul(delta_K);
    for (size_t i = 0; i < full.size(); ++i)
        if (std::fabs(full[i] - reduced[i]) > 1e-8)
            throw ReductionViolated(
                "corollary1_reduction: full and reduced drifts disagree; influence is not score-type");
    return full;
}

}  // namespace ustatgof::ustat
