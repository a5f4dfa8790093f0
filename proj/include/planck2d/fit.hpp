#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "planck2d/dataset.hpp"
#include "planck2d/physics.hpp"
#include "planck2d/stats.hpp"

namespace planck2d {

// Thrown when the fit problem cannot identify all requested parameters
// (message names the degenerate direction).
struct RankDeficiencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class WeightRule { per_curve, inverse_variance, uniform };

inline std::string to_string(WeightRule r) {
    switch (r) {
        case WeightRule::per_curve: return "per_curve";
        case WeightRule::inverse_variance: return "inverse_variance";
        default: return "uniform";
    }
}

struct FitOptions {
    int max_iterations = 200;
    double convergence_tol = 1.0e-10; // relative drop of the weighted SSR
    double damping_init = 1.0e-3;
    WeightRule weight_rule = WeightRule::per_curve;
    double eta_lower = 1.0e-6; // open lower bound of the eta transform
    std::optional<CalibrationParams> initial_params;

    void validate() const {
        detail::require(max_iterations >= 1, "fit options: max_iterations must be >= 1");
        detail::require(detail::finite(convergence_tol) && convergence_tol > 0.0,
                        "fit options: convergence_tol must be positive");
        detail::require(detail::finite(damping_init) && damping_init > 0.0,
                        "fit options: damping_init must be positive");
        detail::require(detail::finite(eta_lower) && eta_lower > 0.0 && eta_lower < 1.0,
                        "fit options: eta_lower must lie in (0, 1)");
        if (initial_params) initial_params->validate();
    }
};

struct FitResult {
    CalibrationParams params;
    double loss_db = 0.0;
    double loss_db_sigma = 0.0;
    std::array<std::array<double, 3>, 3> covariance{}; // (kappa, n_h, eta) order
    std::array<double, 3> sigma{};
    double ssr = 0.0; // weighted
    double sum_weights = 0.0;
    std::size_t n_points = 0;
    bool converged = false;
    int iterations = 0;
    std::array<bool, 3> fitted{true, true, true};
    double fixed_t_mc_k = std::numeric_limits<double>::quiet_NaN();
    bool guess_degraded = false;
    std::vector<std::string> notes;

    double weighted_rms() const {
        return sum_weights > 0.0 ? std::sqrt(ssr / sum_weights) : 0.0;
    }
};

struct InitialGuess {
    CalibrationParams params;
    bool degraded = false;
    std::string note;
};

inline const char* kappa_convention_note() {
    return "kappa convention: detected power = (kappa/z0) * photon-number bracket; "
           "kappa is referenced to the reconstruction point at the attenuator output "
           "and carries the dataset power unit times z0";
}

inline const char* fit1d_convention_note() {
    return "single-curve convention: eta and t_mc are held fixed, not fitted; kappa is "
           "referenced through the assumed transmissivity and n_h is an effective value "
           "absorbing any assumed-vs-true loss mismatch";
}

namespace detail {

struct FitPoint {
    double t_att_k = 0.0;
    double t_mc_k = 0.0;
    double power = 0.0;
    double weight = 1.0;
};

inline std::vector<FitPoint> assemble_points(const SweepDataset& ds, WeightRule rule) {
    std::vector<FitPoint> pts;
    pts.reserve(ds.total_points());
    for (const auto& c : ds.curves) {
        const double w_curve = 1.0 / static_cast<double>(c.points.size());
        for (const auto& p : c.points) {
            FitPoint fp;
            fp.t_att_k = p.t_att_k;
            fp.t_mc_k = c.t_mc_k;
            fp.power = p.power;
            switch (rule) {
                case WeightRule::per_curve: fp.weight = w_curve; break;
                case WeightRule::inverse_variance:
                    require(p.sigma > 0.0,
                            "inverse-variance weighting needs positive sigmas on every point");
                    fp.weight = 1.0 / (p.sigma * p.sigma);
                    break;
                case WeightRule::uniform: fp.weight = 1.0; break;
            }
            pts.push_back(fp);
        }
    }
    return pts;
}

// Bound-enforcing change of variables: kappa = exp(u0), n_h = softplus(u1),
// eta = lo + (1-lo) * sigmoid(u2). The optimizer works unconstrained in u.
struct Reparam {
    double eta_lower = 1.0e-6;

    static double softplus(double x) {
        return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    }
    static double softplus_inv(double y) {
        return y > 30.0 ? y : std::log(std::expm1(y));
    }
    static double sigmoid(double x) {
        return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    }

    std::array<double, 3> to_internal(const CalibrationParams& p) const {
        const double span = 1.0 - eta_lower;
        double frac = (p.eta - eta_lower) / span;
        frac = std::clamp(frac, 1.0e-16, 1.0 - 1.0e-16);
        return {std::log(p.kappa), softplus_inv(std::max(p.n_h, 1.0e-12)),
                std::log(frac / (1.0 - frac))};
    }

    CalibrationParams to_natural(const std::array<double, 3>& u) const {
        CalibrationParams p;
        p.kappa = std::exp(u[0]);
        p.n_h = softplus(u[1]);
        // sigmoid saturates to exactly 1.0 in double for u >~ 38, so the
        // closed upper bound eta = 1 is attainable; the min() guards the
        // one-ulp overshoot of the affine recombination
        p.eta = std::min(1.0, eta_lower + (1.0 - eta_lower) * sigmoid(u[2]));
        return p;
    }

    std::array<double, 3> dnatural_du(const std::array<double, 3>& u,
                                      const CalibrationParams& p) const {
        const double s = sigmoid(u[2]);
        return {p.kappa, sigmoid(u[1]), (1.0 - eta_lower) * s * (1.0 - s)};
    }
};

struct LmProblem {
    std::vector<FitPoint> pts;
    ReceiverConfig cfg;
    Reparam rep;
    std::array<bool, 3> active{true, true, true};
    CalibrationParams pinned; // supplies values for inactive slots

    std::size_t n_active() const {
        std::size_t k = 0;
        for (bool a : active) k += a ? 1 : 0;
        return k;
    }

    CalibrationParams natural(const std::array<double, 3>& u) const {
        CalibrationParams p = rep.to_natural(u);
        if (!active[0]) p.kappa = pinned.kappa;
        if (!active[1]) p.n_h = pinned.n_h;
        if (!active[2]) p.eta = pinned.eta;
        return p;
    }

    double ssr_at(const std::array<double, 3>& u) const {
        try {
            const CalibrationParams p = natural(u);
            double ssr = 0.0;
            for (const auto& fp : pts) {
                const double r = detected_power(p, fp.t_att_k, fp.t_mc_k, cfg) - fp.power;
                ssr += fp.weight * r * r;
            }
            return ssr;
        } catch (const std::invalid_argument&) {
            return std::numeric_limits<double>::infinity(); // step left the domain
        }
    }

    // Weighted residuals r_i = sqrt(w)(model - P) and the internal-space
    // Jacobian (row-major m x n_active).
    void residuals_jacobian(const std::array<double, 3>& u, std::vector<double>& r,
                            std::vector<double>& jac) const {
        const CalibrationParams p = natural(u);
        const auto chain = rep.dnatural_du(u, p);
        const std::size_t k = n_active();
        r.resize(pts.size());
        jac.assign(pts.size() * k, 0.0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto& fp = pts[i];
            const double sw = std::sqrt(fp.weight);
            const double model = detected_power(p, fp.t_att_k, fp.t_mc_k, cfg);
            const auto g = detected_power_gradient(p, fp.t_att_k, fp.t_mc_k, cfg);
            const std::array<double, 3> dnat{g.d_kappa, g.d_n_h, g.d_eta};
            r[i] = sw * (model - fp.power);
            std::size_t col = 0;
            for (std::size_t a = 0; a < 3; ++a) {
                if (!active[a]) continue;
                jac[i * k + col] = sw * dnat[a] * chain[a];
                ++col;
            }
        }
    }

    // Natural-space weighted Jacobian restricted to active columns.
    void natural_jacobian(const CalibrationParams& p, std::vector<double>& jac) const {
        const std::size_t k = n_active();
        jac.assign(pts.size() * k, 0.0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto& fp = pts[i];
            const double sw = std::sqrt(fp.weight);
            const auto g = detected_power_gradient(p, fp.t_att_k, fp.t_mc_k, cfg);
            const std::array<double, 3> dnat{g.d_kappa, g.d_n_h, g.d_eta};
            std::size_t col = 0;
            for (std::size_t a = 0; a < 3; ++a) {
                if (!active[a]) continue;
                jac[i * k + col] = sw * dnat[a];
                ++col;
            }
        }
    }
};

inline void clamp_internal(std::array<double, 3>& u) {
    u[0] = std::clamp(u[0], -700.0, 700.0);
    u[1] = std::clamp(u[1], -745.0, 700.0);
    u[2] = std::clamp(u[2], -745.0, 745.0);
}

struct LmOutcome {
    std::array<double, 3> u{};
    CalibrationParams params;
    double ssr = 0.0;
    bool converged = false;
    int iterations = 0;
};

inline LmOutcome run_lm(const LmProblem& prob, const CalibrationParams& start,
                        const FitOptions& opts) {
    const std::size_t k = prob.n_active();
    LmOutcome out;
    out.u = prob.rep.to_internal(start);
    clamp_internal(out.u);
    out.ssr = prob.ssr_at(out.u);
    detail::require(std::isfinite(out.ssr), "fit: initial parameters give non-finite residuals");

    std::vector<double> r, jac;
    prob.residuals_jacobian(out.u, r, jac);
    double lambda = opts.damping_init;
    std::vector<double> g(k), h(k * k);

    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        out.iterations = iter;
        std::fill(g.begin(), g.end(), 0.0);
        std::fill(h.begin(), h.end(), 0.0);
        for (std::size_t i = 0; i < r.size(); ++i)
            for (std::size_t a = 0; a < k; ++a) {
                g[a] += jac[i * k + a] * r[i];
                for (std::size_t b = a; b < k; ++b)
                    h[a * k + b] += jac[i * k + a] * jac[i * k + b];
            }
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < a; ++b) h[a * k + b] = h[b * k + a];

        double gmax = 0.0;
        for (double v : g) gmax = std::max(gmax, std::abs(v));
        if (gmax == 0.0) {
            out.converged = true;
            break;
        }

        bool accepted = false;
        std::array<double, 3> u_try{};
        double ssr_try = out.ssr;
        for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
            std::vector<double> a_mat = h;
            for (std::size_t d = 0; d < k; ++d)
                a_mat[d * k + d] += lambda * std::max(h[d * k + d], 1.0e-30);
            std::vector<double> rhs(k);
            for (std::size_t d = 0; d < k; ++d) rhs[d] = -g[d];
            std::vector<double> delta;
            try {
                delta = solve_dense(std::move(a_mat), std::move(rhs), k);
            } catch (const std::runtime_error&) {
                lambda *= 10.0;
                continue;
            }
            u_try = out.u;
            std::size_t col = 0;
            for (std::size_t a = 0; a < 3; ++a) {
                if (!prob.active[a]) continue;
                u_try[a] += delta[col++];
            }
            clamp_internal(u_try);
            ssr_try = prob.ssr_at(u_try);
            if (std::isfinite(ssr_try) && ssr_try <= out.ssr)
                accepted = true;
            else
                lambda *= 10.0;
        }
        if (!accepted) break; // uphill at every damping scale: report best iterate

        const double rel =
            (out.ssr - ssr_try) / std::max(out.ssr, std::numeric_limits<double>::min());
        out.u = u_try;
        out.ssr = ssr_try;
        lambda = std::max(lambda / 3.0, 1.0e-14);
        if (rel <= opts.convergence_tol || out.ssr == 0.0) {
            out.converged = true;
            break;
        }
        prob.residuals_jacobian(out.u, r, jac);
    }
    out.params = prob.natural(out.u);
    return out;
}

// Condition check of the column-normalized natural Gram matrix; throws a
// RankDeficiencyError naming the parameters aligned with the null direction.
inline void check_identifiability(const LmProblem& prob, const CalibrationParams& at) {
    const std::size_t k = prob.n_active();
    std::vector<double> jac;
    prob.natural_jacobian(at, jac);
    const std::size_t m = prob.pts.size();
    std::vector<double> h(k * k, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b)
                h[a * k + b] += jac[i * k + a] * jac[i * k + b];

    std::vector<std::string> names;
    {
        const char* all[3] = {"kappa", "n_h", "eta"};
        for (std::size_t a = 0; a < 3; ++a)
            if (prob.active[a]) names.push_back(all[a]);
    }
    std::vector<double> scale(k);
    for (std::size_t a = 0; a < k; ++a) {
        if (h[a * k + a] <= 0.0)
            throw RankDeficiencyError("rank-deficient fit problem: parameter '" + names[a] +
                                      "' has zero sensitivity in this dataset");
        scale[a] = 1.0 / std::sqrt(h[a * k + a]);
    }
    std::vector<double> hn(k * k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) hn[a * k + b] = h[a * k + b] * scale[a] * scale[b];
    std::vector<double> vecs;
    const auto eig = sym_eigenvalues(hn, k, &vecs);
    if (eig.front() <= eig.back() * 1.0e-12) {
        double vmax = 0.0;
        for (std::size_t a = 0; a < k; ++a) vmax = std::max(vmax, std::abs(vecs[a]));
        std::ostringstream msg;
        msg << "rank-deficient fit problem: unidentifiable direction involving";
        for (std::size_t a = 0; a < k; ++a)
            if (std::abs(vecs[a]) >= 0.5 * vmax) msg << " '" << names[a] << "'";
        msg << " (normalized Gram eigenvalue ratio " << eig.front() / eig.back() << ")";
        throw RankDeficiencyError(msg.str());
    }
}

inline FitResult finalize_fit(const LmProblem& prob, const LmOutcome& out,
                              const InitialGuess& guess, double fixed_t_mc_k) {
    FitResult res;
    res.params = out.params;
    res.ssr = out.ssr;
    res.converged = out.converged;
    res.iterations = out.iterations;
    res.n_points = prob.pts.size();
    res.fitted = prob.active;
    res.fixed_t_mc_k = fixed_t_mc_k;
    res.guess_degraded = guess.degraded;
    for (const auto& fp : prob.pts) res.sum_weights += fp.weight;

    const std::size_t k = prob.n_active();
    std::vector<double> jac;
    prob.natural_jacobian(res.params, jac);
    std::vector<double> h(k * k, 0.0);
    for (std::size_t i = 0; i < prob.pts.size(); ++i)
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b)
                h[a * k + b] += jac[i * k + a] * jac[i * k + b];

    const double dof = static_cast<double>(prob.pts.size()) - static_cast<double>(k);
    const double s2 = dof > 0.0 ? res.ssr / dof : 0.0;

    // pseudo-inverse through the eigensystem keeps the covariance PSD even
    // when a direction saturates a bound; columns are equilibrated first so
    // the truncation threshold is invariant under parameter or unit rescaling
    std::vector<double> d(k, 1.0);
    for (std::size_t a = 0; a < k; ++a)
        if (h[a * k + a] > 0.0) d[a] = 1.0 / std::sqrt(h[a * k + a]);
    std::vector<double> hn(k * k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) hn[a * k + b] = h[a * k + b] * d[a] * d[b];
    std::vector<double> vecs;
    const auto eig = sym_eigenvalues(hn, k, &vecs);
    std::vector<double> cov(k * k, 0.0);
    for (std::size_t e = 0; e < k; ++e) {
        if (eig[e] <= eig.back() * 1.0e-14 || eig[e] <= 0.0) continue;
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b)
                cov[a * k + b] += d[a] * vecs[e * k + a] * vecs[e * k + b] * d[b] / eig[e];
    }
    std::array<std::size_t, 3> slot{};
    {
        std::size_t col = 0;
        for (std::size_t a = 0; a < 3; ++a) slot[a] = prob.active[a] ? col++ : 3;
    }
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b)
            res.covariance[a][b] = (slot[a] < 3 && slot[b] < 3)
                                       ? cov[slot[a] * k + slot[b]] * s2
                                       : 0.0;
    for (std::size_t a = 0; a < 3; ++a)
        res.sigma[a] = std::sqrt(std::max(0.0, res.covariance[a][a]));

    res.loss_db = loss_db_from_eta(res.params.eta);
    res.loss_db_sigma =
        prob.active[2] ? 10.0 / std::log(10.0) * res.sigma[2] / res.params.eta : 0.0;

    res.notes.push_back(kappa_convention_note());
    if (guess.degraded && !guess.note.empty()) res.notes.push_back(guess.note);
    return res;
}

struct LinePoints {
    double slope = 0.0;
    double intercept = 0.0;
    double t_lo = 0.0, t_hi = 0.0;
    bool ok = false;
};

inline LinePoints wls_line(const std::vector<const PowerPoint*>& pts) {
    LinePoints line;
    if (pts.size() < 2) return line;
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto* p : pts) {
        const double w = p->sigma > 0.0 ? 1.0 / (p->sigma * p->sigma) : 1.0;
        sw += w;
        sx += w * p->t_att_k;
        sy += w * p->power;
        sxx += w * p->t_att_k * p->t_att_k;
        sxy += w * p->t_att_k * p->power;
    }
    const double det = sw * sxx - sx * sx;
    if (det <= 0.0) return line;
    line.slope = (sw * sxy - sx * sy) / det;
    line.intercept = (sy - line.slope * sx) / sw;
    line.t_lo = pts.front()->t_att_k;
    line.t_hi = pts.back()->t_att_k;
    line.ok = true;
    return line;
}

inline std::vector<const PowerPoint*> linear_region(const PlanckCurve& c, double threshold_k) {
    std::vector<const PowerPoint*> sel;
    for (const auto& p : c.points)
        if (p.t_att_k >= threshold_k) sel.push_back(&p);
    return sel;
}

} // namespace detail

// Seeds the 2D fit from the high-temperature geometry: the lowest curve's
// linear-region slope fixes kappa*eta, adjacent-curve offsets against the
// exact coth difference fix kappa*(1-eta), and the mean bracket residual
// seeds n_h. Falls back to a flagged rough guess when the linear region is
// too thin.
inline InitialGuess initial_guess(const SweepDataset& ds, double eta_lower = 1.0e-6) {
    ds.validate();
    if (ds.curves.size() < 2)
        throw std::invalid_argument(
            "initial_guess: a single-curve dataset cannot seed the 2D fit; use fit_1d");
    const double t_cr = crossover_temperature(ds.receiver.f0_hz);
    const double thr = 2.0 * t_cr;
    const double z0 = ds.receiver.z0_ohm;
    const double f0 = ds.receiver.f0_hz;

    std::vector<detail::LinePoints> lines;
    bool all_ok = true;
    for (const auto& c : ds.curves) {
        const auto sel = detail::linear_region(c, thr);
        detail::LinePoints line = sel.size() >= 3 ? detail::wls_line(sel) : detail::LinePoints{};
        all_ok = all_ok && line.ok;
        lines.push_back(line);
    }

    InitialGuess out;
    const double slope_a = lines.front().ok ? lines.front().slope : 0.0;
    const double a_term = 2.0 * t_cr * slope_a; // (kappa/z0) * eta

    if (!all_ok || a_term <= 0.0) {
        const auto& c0 = ds.curves.front().points;
        const double secant = (c0.back().power - c0.front().power) /
                              (c0.back().t_att_k - c0.front().t_att_k);
        const double a_fallback = std::max(2.0 * t_cr * secant, 1.0e-12);
        out.params.kappa = 2.0 * z0 * a_fallback; // assumes eta = 0.5
        out.params.eta = 0.5;
        out.params.n_h = 10.0;
        out.degraded = true;
        out.note = "initial guess degraded: too few linear-region points (need 3 per curve "
                   "above twice the crossover temperature); seeded with eta = 0.5, n_h = 10";
        return out;
    }

    double b_sum = 0.0;
    for (std::size_t i = 0; i + 1 < ds.curves.size(); ++i) {
        const auto& lo = lines[i];
        const auto& hi = lines[i + 1];
        const double t_ref = 0.5 * (std::max(lo.t_lo, hi.t_lo) + std::min(lo.t_hi, hi.t_hi));
        const double offset = (hi.intercept + hi.slope * t_ref) -
                              (lo.intercept + lo.slope * t_ref);
        const double dcoth = bose_factor(f0, ds.curves[i + 1].t_mc_k) -
                             bose_factor(f0, ds.curves[i].t_mc_k);
        b_sum += 2.0 * offset / dcoth;
    }
    const double b_term = std::max(b_sum / static_cast<double>(ds.curves.size() - 1),
                                   0.0); // (kappa/z0) * (1 - eta), zero for eta = 1

    out.params.eta = std::clamp(a_term / (a_term + b_term), 2.0 * eta_lower, 1.0);
    out.params.kappa = z0 * (a_term + b_term);

    double resid_sum = 0.0;
    std::size_t n = 0;
    for (const auto& c : ds.curves) {
        const double c_mc = bose_factor(f0, c.t_mc_k);
        for (const auto& p : c.points) {
            const double c_att = bose_factor(f0, p.t_att_k);
            resid_sum += p.power * z0 / out.params.kappa - 0.5 * out.params.eta * c_att -
                         0.5 * (1.0 - out.params.eta) * c_mc;
            ++n;
        }
    }
    out.params.n_h = std::max(resid_sum / static_cast<double>(n), 1.0e-9);
    return out;
}

// Singular values (descending) of the column-normalized weighted Jacobian in
// natural parameter space; rank diagnostics for arbitrary datasets.
inline std::array<double, 3> jacobian_singular_values(const SweepDataset& ds,
                                                      const CalibrationParams& at,
                                                      WeightRule rule = WeightRule::per_curve) {
    ds.validate();
    at.validate();
    detail::LmProblem prob{detail::assemble_points(ds, rule), ds.receiver, {}, {true, true, true}, {}};
    std::vector<double> jac;
    prob.natural_jacobian(at, jac);
    std::vector<double> h(9, 0.0);
    for (std::size_t i = 0; i < prob.pts.size(); ++i)
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = 0; b < 3; ++b) h[a * 3 + b] += jac[i * 3 + a] * jac[i * 3 + b];
    std::array<double, 3> scale{};
    for (std::size_t a = 0; a < 3; ++a)
        scale[a] = h[a * 3 + a] > 0.0 ? 1.0 / std::sqrt(h[a * 3 + a]) : 1.0;
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) h[a * 3 + b] *= scale[a] * scale[b];
    const auto eig = sym_eigenvalues(h, 3);
    return {std::sqrt(std::max(0.0, eig[2])), std::sqrt(std::max(0.0, eig[1])),
            std::sqrt(std::max(0.0, eig[0]))};
}

// Weighted natural-space residual Jacobian rows, exposed so tests can check
// the analytic derivatives against finite differences.
inline std::vector<std::array<double, 3>> residual_jacobian(const SweepDataset& ds,
                                                            const CalibrationParams& at,
                                                            WeightRule rule = WeightRule::per_curve) {
    ds.validate();
    at.validate();
    detail::LmProblem prob{detail::assemble_points(ds, rule), ds.receiver, {}, {true, true, true}, {}};
    std::vector<double> jac;
    prob.natural_jacobian(at, jac);
    std::vector<std::array<double, 3>> rows(prob.pts.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        rows[i] = {jac[i * 3 + 0], jac[i * 3 + 1], jac[i * 3 + 2]};
    return rows;
}

// Simultaneous weighted fit of (kappa, n_h, eta) across all curves.
inline FitResult fit_2d(const SweepDataset& ds, const FitOptions& opts = {}) {
    ds.validate();
    opts.validate();
    if (ds.curves.size() < 2)
        throw std::invalid_argument("fit_2d: need at least two curves at distinct T_mc; "
                                    "use fit_1d for a single curve");
    for (const auto& c : ds.curves)
        for (const auto& p : c.points)
            detail::require(detail::finite(p.power), "fit_2d: non-finite power value");

    detail::LmProblem prob{detail::assemble_points(ds, opts.weight_rule), ds.receiver,
                           detail::Reparam{opts.eta_lower}, {true, true, true}, {}};
    InitialGuess guess;
    if (opts.initial_params) {
        guess.params = *opts.initial_params;
    } else {
        guess = initial_guess(ds, opts.eta_lower);
    }
    detail::check_identifiability(prob, guess.params);
    const auto outcome = detail::run_lm(prob, guess.params, opts);
    return detail::finalize_fit(prob, outcome, guess,
                                std::numeric_limits<double>::quiet_NaN());
}

// Conventional single-curve calibration: eta and the environment
// temperature are pinned, only kappa and n_h are fitted.
inline FitResult fit_1d(const PlanckCurve& curve, double fixed_eta, double fixed_t_mc_k,
                        const ReceiverConfig& cfg, const FitOptions& opts = {}) {
    curve.validate();
    cfg.validate();
    opts.validate();
    if (!(std::isfinite(fixed_eta) && fixed_eta > 0.0 && fixed_eta <= 1.0))
        throw std::domain_error("fit_1d: fixed_eta must lie in (0, 1]");
    detail::require(detail::finite(fixed_t_mc_k) && fixed_t_mc_k >= 0.0,
                    "fit_1d: fixed_t_mc must be finite and >= 0");
    detail::require(curve.points.size() >= 3, "fit_1d: needs at least three points");

    SweepDataset wrapper;
    wrapper.receiver = cfg;
    PlanckCurve shifted = curve;
    shifted.t_mc_k = fixed_t_mc_k;
    wrapper.curves.push_back(shifted);

    detail::LmProblem prob{detail::assemble_points(wrapper, opts.weight_rule), cfg,
                           detail::Reparam{opts.eta_lower}, {true, true, false}, {}};
    prob.pinned.eta = fixed_eta;

    InitialGuess guess;
    if (opts.initial_params) {
        guess.params = *opts.initial_params;
    } else {
        const double t_cr = crossover_temperature(cfg.f0_hz);
        const auto sel = detail::linear_region(curve, 2.0 * t_cr);
        const auto line = sel.size() >= 3 ? detail::wls_line(sel) : detail::LinePoints{};
        if (line.ok && line.slope > 0.0) {
            guess.params.kappa = 2.0 * t_cr * cfg.z0_ohm * line.slope / fixed_eta;
            const double c_mc = bose_factor(cfg.f0_hz, fixed_t_mc_k);
            double resid = 0.0;
            for (const auto& p : curve.points)
                resid += p.power * cfg.z0_ohm / guess.params.kappa -
                         0.5 * fixed_eta * bose_factor(cfg.f0_hz, p.t_att_k) -
                         0.5 * (1.0 - fixed_eta) * c_mc;
            guess.params.n_h = std::max(resid / static_cast<double>(curve.points.size()), 1.0e-9);
        } else {
            const auto& ps = curve.points;
            const double secant =
                (ps.back().power - ps.front().power) / (ps.back().t_att_k - ps.front().t_att_k);
            guess.params.kappa =
                std::max(2.0 * t_cr * cfg.z0_ohm * secant / fixed_eta, 1.0e-12);
            guess.params.n_h = 10.0;
            guess.degraded = true;
            guess.note = "initial guess degraded: too few linear-region points; seeded n_h = 10";
        }
    }
    guess.params.eta = fixed_eta;

    detail::check_identifiability(prob, guess.params);
    const auto outcome = detail::run_lm(prob, guess.params, opts);
    FitResult res = detail::finalize_fit(prob, outcome, guess, fixed_t_mc_k);
    res.notes.push_back(fit1d_convention_note());
    return res;
}

} // namespace planck2d
