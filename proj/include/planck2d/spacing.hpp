#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "planck2d/dataset.hpp"
#include "planck2d/physics.hpp"
#include "planck2d/stats.hpp"

namespace planck2d {

struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SpacingEntry {
    std::size_t index = 0; // pair of curves (index, index + 1) in T_mc order
    double t_mc_lo_k = 0.0;
    double t_mc_hi_k = 0.0;
    double delta_p = 0.0; // error-weighted mean vertical offset
    double sigma = 0.0;
    // offset divided by the pair's coth difference: estimates
    // kappa (1 - eta) / (2 z0), a constant when eta is constant
    double coupling = 0.0;
    double coupling_sigma = 0.0;
    std::size_t n_common = 0;
    bool ok = false;
    std::string message;
    // d(coupling)/d(P_cj) * sigma_cj per involved curve (lo negative, hi
    // positive); lets the drift test form exact cross-pair covariances
    std::vector<std::pair<std::size_t, std::vector<double>>> noise_map;
};

struct SpacingResult {
    std::vector<SpacingEntry> entries;
    double threshold_t_cr_multiple = 2.0;
    double t_cr_k = 0.0;
};

// Vertical offsets between adjacent curves over their common linear-region
// support (T_att >= threshold * T_cr), interpolating the denser curve onto
// the sparser one's grid.
inline SpacingResult spacing_analysis(const SweepDataset& ds,
                                      double linear_region_threshold = 2.0) {
    ds.validate();
    detail::require(detail::finite(linear_region_threshold) && linear_region_threshold > 0.0,
                    "spacing_analysis: threshold must be positive");
    detail::require(ds.curves.size() >= 2, "spacing_analysis: need at least two curves");

    SpacingResult out;
    out.threshold_t_cr_multiple = linear_region_threshold;
    out.t_cr_k = crossover_temperature(ds.receiver.f0_hz);
    const double thr = linear_region_threshold * out.t_cr_k;
    const double f0 = ds.receiver.f0_hz;

    // the linear region is a suffix of each curve (T_att strictly increasing)
    const auto suffix_start = [&](const PlanckCurve& c) {
        std::size_t s = c.points.size();
        for (std::size_t i = 0; i < c.points.size(); ++i)
            if (c.points[i].t_att_k >= thr) {
                s = i;
                break;
            }
        return s;
    };

    for (std::size_t pair = 0; pair + 1 < ds.curves.size(); ++pair) {
        const PlanckCurve& lo = ds.curves[pair];
        const PlanckCurve& hi = ds.curves[pair + 1];
        SpacingEntry e;
        e.index = pair;
        e.t_mc_lo_k = lo.t_mc_k;
        e.t_mc_hi_k = hi.t_mc_k;

        const std::size_t lo0 = suffix_start(lo);
        const std::size_t hi0 = suffix_start(hi);
        const std::size_t n_lo = lo.points.size() - lo0;
        const std::size_t n_hi = hi.points.size() - hi0;
        if (n_lo == 0 || n_hi == 0) {
            e.message = "no linear-region points on one of the curves";
            out.entries.push_back(std::move(e));
            continue;
        }

        const bool sparse_is_lo = n_lo <= n_hi;
        const PlanckCurve& sparse = sparse_is_lo ? lo : hi;
        const PlanckCurve& dense = sparse_is_lo ? hi : lo;
        const std::size_t s0 = sparse_is_lo ? lo0 : hi0;
        const std::size_t d0 = sparse_is_lo ? hi0 : lo0;
        const double d_lo_t = dense.points[d0].t_att_k;
        const double d_hi_t = dense.points.back().t_att_k;

        struct Term {
            double offset, var;
            std::size_t sparse_idx;
            std::size_t dense_a, dense_b;
            double ca, cb; // interpolation coefficients on the dense pair
            double sig_sparse, sig_a, sig_b;
        };
        std::vector<Term> terms;
        bool any_zero_sigma = false;
        std::size_t k = d0;
        for (std::size_t j = s0; j < sparse.points.size(); ++j) {
            const double t = sparse.points[j].t_att_k;
            if (t < d_lo_t || t > d_hi_t) continue;
            while (k + 1 < dense.points.size() && dense.points[k + 1].t_att_k < t) ++k;
            std::size_t a = k;
            std::size_t b = std::min(k + 1, dense.points.size() - 1);
            if (a == b) { // exactly at the last dense point
                a = b - 1;
            }
            const double ta = dense.points[a].t_att_k;
            const double tb = dense.points[b].t_att_k;
            const double alpha = (t - ta) / (tb - ta);
            Term term;
            term.sparse_idx = j;
            term.dense_a = a;
            term.dense_b = b;
            term.ca = 1.0 - alpha;
            term.cb = alpha;
            term.sig_sparse = sparse.points[j].sigma;
            term.sig_a = dense.points[a].sigma;
            term.sig_b = dense.points[b].sigma;
            const double dense_val =
                term.ca * dense.points[a].power + term.cb * dense.points[b].power;
            const double sparse_val = sparse.points[j].power;
            term.offset = sparse_is_lo ? dense_val - sparse_val : sparse_val - dense_val;
            term.var = term.sig_sparse * term.sig_sparse +
                       term.ca * term.ca * term.sig_a * term.sig_a +
                       term.cb * term.cb * term.sig_b * term.sig_b;
            if (term.var == 0.0) any_zero_sigma = true;
            terms.push_back(term);
        }
        if (terms.empty()) {
            e.message = "no overlapping linear-region support between the curves";
            out.entries.push_back(std::move(e));
            continue;
        }

        double sum_w = 0.0, num = 0.0, var_mean = 0.0;
        std::vector<double> w(terms.size());
        for (std::size_t j = 0; j < terms.size(); ++j) {
            w[j] = any_zero_sigma ? 1.0 : 1.0 / terms[j].var;
            sum_w += w[j];
            num += w[j] * terms[j].offset;
        }
        for (std::size_t j = 0; j < terms.size(); ++j)
            var_mean += w[j] * w[j] * terms[j].var / (sum_w * sum_w);

        e.delta_p = num / sum_w;
        e.sigma = std::sqrt(var_mean);
        e.n_common = terms.size();
        e.ok = true;

        const double dcoth = bose_factor(f0, hi.t_mc_k) - bose_factor(f0, lo.t_mc_k);
        e.coupling = e.delta_p / dcoth;
        e.coupling_sigma = e.sigma / dcoth;

        // sigma-scaled sensitivities of the coupling to every underlying point
        std::vector<double> sens_lo(lo.points.size(), 0.0);
        std::vector<double> sens_hi(hi.points.size(), 0.0);
        auto& sens_sparse = sparse_is_lo ? sens_lo : sens_hi;
        auto& sens_dense = sparse_is_lo ? sens_hi : sens_lo;
        const double sparse_sign = sparse_is_lo ? -1.0 : 1.0;
        for (std::size_t j = 0; j < terms.size(); ++j) {
            const double base = w[j] / sum_w / dcoth;
            sens_sparse[terms[j].sparse_idx] += sparse_sign * base * terms[j].sig_sparse;
            sens_dense[terms[j].dense_a] += -sparse_sign * base * terms[j].ca * terms[j].sig_a;
            sens_dense[terms[j].dense_b] += -sparse_sign * base * terms[j].cb * terms[j].sig_b;
        }
        e.noise_map.emplace_back(pair, std::move(sens_lo));
        e.noise_map.emplace_back(pair + 1, std::move(sens_hi));
        out.entries.push_back(std::move(e));
    }
    return out;
}

enum class DriftVerdict { constant, drifting };

inline std::string to_string(DriftVerdict v) {
    return v == DriftVerdict::constant ? "constant" : "drifting";
}

struct DriftReport {
    DriftVerdict verdict = DriftVerdict::constant;
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    double mean_coupling = 0.0;
    double p_threshold = 0.05;
};

// Chi-square homogeneity test of the coth-normalized spacings against their
// GLS mean. Raw offsets of a constant-eta dataset are NOT equal (the coth
// differences between successive steps differ), so the test runs on the
// couplings, whose expectation is step-independent. Adjacent pairs share a
// curve, so the covariance is tridiagonal; exact cross terms come from the
// per-point sensitivity maps when present.
inline DriftReport detect_eta_drift(const SpacingResult& sr, double p_threshold = 0.05) {
    detail::require(detail::finite(p_threshold) && p_threshold > 0.0 && p_threshold < 1.0,
                    "detect_eta_drift: p_threshold must lie in (0, 1)");
    std::vector<const SpacingEntry*> use;
    for (const auto& e : sr.entries)
        if (e.ok) use.push_back(&e);
    if (use.size() < 3)
        throw InsufficientDataError(
            "detect_eta_drift: needs at least 3 usable spacing entries, have " +
            std::to_string(use.size()));

    const std::size_t n = use.size();
    std::vector<double> cov(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        detail::require(use[i]->coupling_sigma > 0.0,
                        "detect_eta_drift: spacing uncertainties must be positive");
        cov[i * n + i] = use[i]->coupling_sigma * use[i]->coupling_sigma;
        for (std::size_t j = i + 1; j < n; ++j) {
            double c = 0.0;
            for (const auto& [ci, vi] : use[i]->noise_map)
                for (const auto& [cj, vj] : use[j]->noise_map) {
                    if (ci != cj) continue;
                    const std::size_t m = std::min(vi.size(), vj.size());
                    for (std::size_t k = 0; k < m; ++k) c += vi[k] * vj[k];
                }
            cov[i * n + j] = cov[j * n + i] = c;
        }
    }

    std::vector<double> ones(n, 1.0), vals(n);
    for (std::size_t i = 0; i < n; ++i) vals[i] = use[i]->coupling;
    const auto inv_ones = solve_dense(cov, ones, n);
    const auto inv_vals = solve_dense(cov, vals, n);
    double s11 = 0.0, s1v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s11 += inv_ones[i];
        s1v += inv_vals[i];
    }
    DriftReport rep;
    rep.mean_coupling = s1v / s11;
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) dev[i] = vals[i] - rep.mean_coupling;
    const auto inv_dev = solve_dense(cov, dev, n);
    double stat = 0.0;
    for (std::size_t i = 0; i < n; ++i) stat += dev[i] * inv_dev[i];
    rep.statistic = std::max(0.0, stat);
    rep.dof = static_cast<int>(n) - 1;
    rep.p_value = chi2_survival(rep.statistic, rep.dof);
    rep.p_threshold = p_threshold;
    rep.verdict = rep.p_value < p_threshold ? DriftVerdict::drifting : DriftVerdict::constant;
    return rep;
}

} // namespace planck2d
