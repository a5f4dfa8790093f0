#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "planck2d/dataset.hpp"
#include "planck2d/fit.hpp"

namespace planck2d {

struct FluxLossResult {
    struct PerBias {
        double i_dc_ua = 0.0;
        FitResult fit;
    };
    std::vector<FluxSweepRecord> records; // sorted by bias, source = planck2d
    std::vector<PerBias> fits;            // same order

    bool all_converged() const {
        for (const auto& f : fits)
            if (!f.fit.converged) return false;
        return true;
    }
};

// Full 2D fit per bias point; losses referenced to the zero-bias fit.
inline FluxLossResult flux_loss_sweep(std::vector<std::pair<double, SweepDataset>> datasets,
                                      const FitOptions& opts = {}) {
    detail::require(datasets.size() >= 2, "flux_loss_sweep: need at least two bias points");
    std::sort(datasets.begin(), datasets.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t zero_idx = datasets.size();
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        detail::require(detail::finite(datasets[i].first),
                        "flux_loss_sweep: bias values must be finite");
        if (i > 0)
            detail::require(datasets[i - 1].first < datasets[i].first,
                            "flux_loss_sweep: duplicate bias value");
        if (datasets[i].first == 0.0) zero_idx = i;
    }
    if (zero_idx == datasets.size())
        throw std::invalid_argument(
            "flux_loss_sweep: missing the zero-bias reference dataset (I_dc = 0)");

    FluxLossResult out;
    out.fits.reserve(datasets.size());
    for (auto& [bias, ds] : datasets) {
        FluxLossResult::PerBias pb;
        pb.i_dc_ua = bias;
        pb.fit = fit_2d(ds, opts);
        out.fits.push_back(std::move(pb));
    }
    const FitResult& ref = out.fits[zero_idx].fit;
    for (const auto& pb : out.fits) {
        FluxSweepRecord r;
        r.i_dc_ua = pb.i_dc_ua;
        r.source = SweepSource::planck2d;
        if (pb.i_dc_ua == 0.0) {
            r.delta_loss_db = 0.0; // the reference, by definition
            r.sigma_db = 0.0;
        } else {
            r.delta_loss_db = pb.fit.loss_db - ref.loss_db;
            r.sigma_db = std::hypot(pb.fit.loss_db_sigma, ref.loss_db_sigma);
        }
        out.records.push_back(r);
    }
    return out;
}

// A VNA trace records the transmission excursion delta_tau = -excess loss;
// flip the sign to compare against Planck-side relative losses. Exact zeros
// are kept as +0 so the reference row round-trips byte-identically.
inline std::vector<FluxSweepRecord> loss_from_vna_trace(std::vector<FluxSweepRecord> trace) {
    validate_flux_sweep(trace);
    for (auto& r : trace) {
        detail::require(r.source == SweepSource::vna,
                        "loss_from_vna_trace: records must be VNA-sourced");
        r.delta_loss_db = r.delta_loss_db == 0.0 ? 0.0 : -r.delta_loss_db;
    }
    return trace;
}

struct SweepComparisonPoint {
    double i_dc_ua = 0.0;
    double diff_db = 0.0;  // a minus b
    double sigma_db = 0.0; // combined
    bool dispersion_candidate = false;
};

struct SweepComparison {
    std::vector<SweepComparisonPoint> points;
    double rms_db = 0.0;
    double max_abs_db = 0.0;
    std::size_t n_flagged = 0;
};

// Pointwise difference of two relative-loss sweeps on a's grid, with b
// linearly interpolated where grids do not match exactly. Points beyond 3
// combined sigma are flagged as dispersion candidates.
inline SweepComparison compare_sweeps(const std::vector<FluxSweepRecord>& a,
                                      const std::vector<FluxSweepRecord>& b) {
    validate_flux_sweep(a);
    validate_flux_sweep(b);
    SweepComparison out;
    double ssq = 0.0;
    for (const auto& pa : a) {
        if (pa.i_dc_ua < b.front().i_dc_ua || pa.i_dc_ua > b.back().i_dc_ua) continue;
        // exact grid match if present, else interpolate the neighbours
        double vb = 0.0, sb = 0.0;
        auto it = std::lower_bound(b.begin(), b.end(), pa.i_dc_ua,
                                   [](const FluxSweepRecord& r, double q) {
                                       return r.i_dc_ua < q;
                                   });
        if (it != b.end() && it->i_dc_ua == pa.i_dc_ua) {
            vb = it->delta_loss_db;
            sb = it->sigma_db;
        } else {
            const auto hi = it;
            const auto lo = it - 1;
            const double alpha = (pa.i_dc_ua - lo->i_dc_ua) / (hi->i_dc_ua - lo->i_dc_ua);
            vb = (1.0 - alpha) * lo->delta_loss_db + alpha * hi->delta_loss_db;
            sb = std::hypot((1.0 - alpha) * lo->sigma_db, alpha * hi->sigma_db);
        }
        SweepComparisonPoint pt;
        pt.i_dc_ua = pa.i_dc_ua;
        pt.diff_db = pa.delta_loss_db - vb;
        pt.sigma_db = std::hypot(pa.sigma_db, sb);
        pt.dispersion_candidate =
            pt.sigma_db > 0.0 ? std::abs(pt.diff_db) > 3.0 * pt.sigma_db : pt.diff_db != 0.0;
        if (pt.dispersion_candidate) ++out.n_flagged;
        ssq += pt.diff_db * pt.diff_db;
        out.max_abs_db = std::max(out.max_abs_db, std::abs(pt.diff_db));
        out.points.push_back(pt);
    }
    if (out.points.empty())
        throw std::invalid_argument("compare_sweeps: bias grids do not overlap");
    out.rms_db = std::sqrt(ssq / static_cast<double>(out.points.size()));
    return out;
}

} // namespace planck2d
