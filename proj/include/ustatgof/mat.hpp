#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "ustatgof/errors.hpp"

namespace ustatgof {

// Dense row-major matrix for the small (<= 4x4) expectation matrices that
// appear in the plug-in covariance algebra. Inversion goes through Cholesky
// only; a failed factorization is surfaced as NotPositiveDefinite, never
// patched with a pseudo-inverse.
class Mat {
  public:
    Mat() = default;
    Mat(int rows, int cols) : r_(rows), c_(cols), a_(static_cast<size_t>(rows) * cols, 0.0) {}
    Mat(int rows, int cols, std::initializer_list<double> vals) : Mat(rows, cols) {
        size_t i = 0;
        for (double v : vals) a_[i++] = v;
    }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static Mat diag(std::span<const double> d) {
        Mat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
        for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
        return m;
    }

    int rows() const { return r_; }
    int cols() const { return c_; }
    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * c_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * c_ + j]; }

    Mat transpose() const {
        Mat t(c_, r_);
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Mat operator*(const Mat& o) const {
        Mat p(r_, o.c_);
        for (int i = 0; i < r_; ++i)
            for (int k = 0; k < c_; ++k) {
                double v = (*this)(i, k);
                if (v == 0.0) continue;
                for (int j = 0; j < o.c_; ++j) p(i, j) += v * o(k, j);
            }
        return p;
    }
    Mat operator+(const Mat& o) const {
        Mat s = *this;
        for (size_t i = 0; i < a_.size(); ++i) s.a_[i] += o.a_[i];
        return s;
    }
    Mat operator-(const Mat& o) const {
        Mat s = *this;
        for (size_t i = 0; i < a_.size(); ++i) s.a_[i] -= o.a_[i];
        return s;
    }
    Mat scaled(double f) const {
        Mat s = *this;
        for (double& v : s.a_) v *= f;
        return s;
    }

    std::vector<double> mul(std::span<const double> x) const {
        std::vector<double> y(static_cast<size_t>(r_), 0.0);
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < c_; ++j) y[static_cast<size_t>(i)] += (*this)(i, j) * x[static_cast<size_t>(j)];
        return y;
    }

    // Lower-triangular Cholesky factor of a symmetric positive definite matrix.
    Mat cholesky(const char* what = "matrix") const {
        Mat L(r_, r_);
        for (int i = 0; i < r_; ++i) {
            for (int j = 0; j <= i; ++j) {
                double s = (*this)(i, j);
                for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
                if (i == j) {
                    if (!(s > 0.0))
                        throw NotPositiveDefinite(std::string(what) + " is not positive definite");
                    L(i, i) = std::sqrt(s);
                } else {
                    L(i, j) = s / L(j, j);
                }
            }
        }
        return L;
    }

    // Solves A x = b with A = this, symmetric positive definite.
    std::vector<double> cholesky_solve(std::span<const double> b, const char* what = "matrix") const {
        Mat L = cholesky(what);
        std::vector<double> y(b.begin(), b.end());
        for (int i = 0; i < r_; ++i) {  // forward: L z = b
            for (int k = 0; k < i; ++k) y[static_cast<size_t>(i)] -= L(i, k) * y[static_cast<size_t>(k)];
            y[static_cast<size_t>(i)] /= L(i, i);
        }
        for (int i = r_ - 1; i >= 0; --i) {  // backward: L^T x = z
            for (int k = i + 1; k < r_; ++k) y[static_cast<size_t>(i)] -= L(k, i) * y[static_cast<size_t>(k)];
            y[static_cast<size_t>(i)] /= L(i, i);
        }
        return y;
    }

    Mat cholesky_inverse(const char* what = "matrix") const {
        Mat inv(r_, r_);
        std::vector<double> e(static_cast<size_t>(r_), 0.0);
        for (int j = 0; j < r_; ++j) {
            e.assign(static_cast<size_t>(r_), 0.0);
            e[static_cast<size_t>(j)] = 1.0;
            std::vector<double> col = cholesky_solve(e, what);
            for (int i = 0; i < r_; ++i) inv(i, j) = col[static_cast<size_t>(i)];
        }
        return inv;
    }

    // x^T A x for symmetric A.
    double quad_form(std::span<const double> x) const {
        double q = 0.0;
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < c_; ++j) q += x[static_cast<size_t>(i)] * (*this)(i, j) * x[static_cast<size_t>(j)];
        return q;
    }

    double max_abs_diff(const Mat& o) const {
        double m = 0.0;
        for (size_t i = 0; i < a_.size(); ++i) m = std::max(m, std::fabs(a_[i] - o.a_[i]));
        return m;
    }

  private:
    int r_ = 0, c_ = 0;
    std::vector<double> a_;
};

}  // namespace ustatgof
