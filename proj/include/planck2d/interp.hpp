#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "planck2d/physics.hpp"

namespace planck2d {

namespace detail {

inline void check_knots(const std::vector<double>& x, const std::vector<double>& y,
                        const char* who) {
    require(x.size() == y.size(), std::string(who) + ": x and y sizes differ");
    require(x.size() >= 2, std::string(who) + ": need at least two knots");
    for (std::size_t i = 0; i < x.size(); ++i)
        require(finite(x[i]) && finite(y[i]), std::string(who) + ": knots must be finite");
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        require(x[i] < x[i + 1], std::string(who) + ": x must be strictly increasing");
}

// Largest i with x[i] <= q, clamped to the last interval start.
inline std::size_t interval_index(const std::vector<double>& x, double q) {
    auto it = std::upper_bound(x.begin(), x.end(), q);
    std::size_t i = (it == x.begin()) ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
    return std::min(i, x.size() - 2);
}

inline double sign_of(double v) {
    return (v > 0.0) - (v < 0.0);
}

} // namespace detail

// Piecewise-linear table on strictly increasing knots. Evaluation outside
// the knot range throws; callers decide their own clamping policy.
class LinearTable {
public:
    LinearTable(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        detail::check_knots(x_, y_, "linear table");
    }

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }
    bool contains(double q) const { return q >= x_.front() && q <= x_.back(); }

    double operator()(double q) const {
        if (!(std::isfinite(q) && contains(q)))
            throw std::domain_error("linear table: query outside knot range");
        const std::size_t i = detail::interval_index(x_, q);
        const double t = (q - x_[i]) / (x_[i + 1] - x_[i]);
        return y_[i] + t * (y_[i + 1] - y_[i]);
    }

    const std::vector<double>& knots_x() const { return x_; }
    const std::vector<double>& knots_y() const { return y_; }

private:
    std::vector<double> x_, y_;
};

// Monotone cubic (pchip). Slopes follow the Fritsch-Butland weighted
// harmonic mean with the standard one-sided three-point endpoint rule, so
// interpolation of monotone data stays monotone and never overshoots knots.
class PchipInterpolant {
public:
    PchipInterpolant(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        detail::check_knots(x_, y_, "pchip");
        compute_slopes();
    }

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }
    bool contains(double q) const { return q >= x_.front() && q <= x_.back(); }

    double operator()(double q) const {
        if (!(std::isfinite(q) && contains(q)))
            throw std::domain_error("pchip: query outside knot range");
        const std::size_t i = detail::interval_index(x_, q);
        const double h = x_[i + 1] - x_[i];
        const double t = (q - x_[i]) / h;
        const double t2 = t * t;
        const double t3 = t2 * t;
        const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        const double h10 = t3 - 2.0 * t2 + t;
        const double h01 = -2.0 * t3 + 3.0 * t2;
        const double h11 = t3 - t2;
        return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
    }

    double slope_at_knot(std::size_t i) const { return d_.at(i); }
    const std::vector<double>& knots_x() const { return x_; }
    const std::vector<double>& knots_y() const { return y_; }

private:
    std::vector<double> x_, y_, d_;

    static double edge_slope(double h0, double h1, double del0, double del1) {
        // One-sided three-point estimate, shape-limited.
        double d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
        if (detail::sign_of(d) != detail::sign_of(del0)) {
            d = 0.0;
        } else if (detail::sign_of(del0) != detail::sign_of(del1) &&
                   std::abs(d) > 3.0 * std::abs(del0)) {
            d = 3.0 * del0;
        }
        return d;
    }

    void compute_slopes() {
        const std::size_t n = x_.size();
        d_.assign(n, 0.0);
        if (n == 2) {
            d_[0] = d_[1] = (y_[1] - y_[0]) / (x_[1] - x_[0]);
            return;
        }
        std::vector<double> h(n - 1), del(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            del[i] = (y_[i + 1] - y_[i]) / h[i];
        }
        for (std::size_t k = 1; k + 1 < n; ++k) {
            if (del[k - 1] == 0.0 || del[k] == 0.0 ||
                detail::sign_of(del[k - 1]) != detail::sign_of(del[k])) {
                d_[k] = 0.0;
            } else {
                const double w1 = 2.0 * h[k] + h[k - 1];
                const double w2 = h[k] + 2.0 * h[k - 1];
                d_[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
            }
        }
        d_[0] = edge_slope(h[0], h[1], del[0], del[1]);
        d_[n - 1] = edge_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    }
};

// Linear interpolation over parallel arrays (no copy), throwing outside range.
inline double linear_interp(const std::vector<double>& x, const std::vector<double>& y, double q) {
    detail::check_knots(x, y, "linear_interp");
    if (!(std::isfinite(q) && q >= x.front() && q <= x.back()))
        throw std::domain_error("linear_interp: query outside knot range");
    const std::size_t i = detail::interval_index(x, q);
    const double t = (q - x[i]) / (x[i + 1] - x[i]);
    return y[i] + t * (y[i + 1] - y[i]);
}

} // namespace planck2d
