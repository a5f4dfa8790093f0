#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "planck2d/physics.hpp"

namespace planck2d {

struct WeightedMean {
    double mean = 0.0;
    double sigma = 0.0; // standard error of the mean
    double sum_w = 0.0;
};

// Inverse-variance weighted mean. A zero sigma anywhere switches the whole
// estimate to uniform weights with zero reported error (noiseless data).
inline WeightedMean weighted_mean(const std::vector<double>& values,
                                  const std::vector<double>& sigmas) {
    detail::require(values.size() == sigmas.size() && !values.empty(),
                    "weighted_mean: values and sigmas must be equal-length and non-empty");
    bool noiseless = false;
    for (double s : sigmas) {
        detail::require(detail::finite(s) && s >= 0.0, "weighted_mean: sigmas must be >= 0");
        if (s == 0.0) noiseless = true;
    }
    WeightedMean out;
    double num = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        detail::require(detail::finite(values[i]), "weighted_mean: values must be finite");
        const double w = noiseless ? 1.0 : 1.0 / (sigmas[i] * sigmas[i]);
        num += w * values[i];
        out.sum_w += w;
    }
    out.mean = num / out.sum_w;
    out.sigma = noiseless ? 0.0 : std::sqrt(1.0 / out.sum_w);
    return out;
}

// Upper-tail probability P(X >= stat) for a chi-square variable.
inline double chi2_survival(double stat, int dof) {
    detail::require(detail::finite(stat) && stat >= 0.0, "chi2_survival: stat must be >= 0");
    detail::require(dof >= 1, "chi2_survival: dof must be >= 1");
    boost::math::chi_squared dist(static_cast<double>(dof));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

// Solve a (row-major n x n) x = b by Gaussian elimination with partial
// pivoting; sized for the tiny systems used here (n <= ~16).
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b,
                                       std::size_t n) {
    detail::require(a.size() == n * n && b.size() == n, "solve_dense: size mismatch");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (a[piv * n + col] == 0.0)
            throw std::runtime_error("solve_dense: singular matrix");
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
            std::swap(b[piv], b[col]);
        }
        const double d = a[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / d;
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t ri = n; ri-- > 0;) {
        double s = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) s -= a[ri * n + c] * x[c];
        x[ri] = s / a[ri * n + ri];
    }
    return x;
}

// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
// Returns eigenvalues ascending; if vectors != nullptr it receives the
// matching eigenvectors as rows.
inline std::vector<double> sym_eigenvalues(std::vector<double> a, std::size_t n,
                                           std::vector<double>* vectors = nullptr) {
    detail::require(a.size() == n * n && n >= 1, "sym_eigenvalues: size mismatch");
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (off <= 1e-300) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double theta = 0.5 * (aqq - app) / apq;
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k];
                    const double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vpk = v[p * n + k];
                    const double vqk = v[q * n + k];
                    v[p * n + k] = c * vpk - s * vqk;
                    v[q * n + k] = s * vpk + c * vqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a[i * n + i];
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (eig[order[j]] < eig[order[i]]) std::swap(order[i], order[j]);
    std::vector<double> sorted(n);
    std::vector<double> vt(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        sorted[i] = eig[order[i]];
        for (std::size_t k = 0; k < n; ++k) vt[i * n + k] = v[order[i] * n + k];
    }
    if (vectors) *vectors = std::move(vt);
    return sorted;
}

// splitmix64-style stream split: reproducible per-replicate seeds from one
// master seed, stable across platforms.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace planck2d
