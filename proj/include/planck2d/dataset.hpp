#pragma once

#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "planck2d/physics.hpp"

namespace planck2d {

struct PowerPoint {
    double t_att_k = 0.0;
    double power = 0.0;
    double sigma = 0.0; // one-sigma power scatter; 0 marks "not recorded"
};

struct PlanckCurve {
    double t_mc_k = 0.0;
    std::vector<PowerPoint> points;

    void validate() const {
        std::ostringstream tag;
        tag << "curve t_mc=" << t_mc_k << " K";
        detail::require(detail::finite(t_mc_k) && t_mc_k >= 0.0,
                        tag.str() + ": t_mc must be finite and >= 0");
        detail::require(points.size() >= 2, tag.str() + ": needs at least two points");
        for (std::size_t i = 0; i < points.size(); ++i) {
            const PowerPoint& pt = points[i];
            std::ostringstream where;
            where << tag.str() << ", point " << i;
            detail::require(detail::finite(pt.t_att_k) && pt.t_att_k >= 0.0,
                            where.str() + ": t_att must be finite and >= 0");
            detail::require(detail::finite(pt.power), where.str() + ": power must be finite");
            detail::require(detail::finite(pt.sigma) && pt.sigma >= 0.0,
                            where.str() + ": sigma must be finite and >= 0");
            if (i > 0)
                detail::require(points[i - 1].t_att_k < pt.t_att_k,
                                where.str() + ": t_att must be strictly increasing");
        }
    }
};

// One full two-dimensional sweep: several environment temperatures, each
// with its own attenuator-temperature curve, all sharing one receiver.
struct SweepDataset {
    ReceiverConfig receiver;
    std::vector<PlanckCurve> curves;
    std::string power_unit = "(mV)^2";
    std::string provenance;

    void validate() const {
        receiver.validate();
        detail::require(!curves.empty(), "dataset: no curves");
        for (std::size_t c = 0; c < curves.size(); ++c) {
            curves[c].validate();
            if (c > 0) {
                std::ostringstream msg;
                msg << "dataset: curves must be sorted by strictly increasing t_mc ("
                    << curves[c - 1].t_mc_k << " K then " << curves[c].t_mc_k << " K)";
                detail::require(curves[c - 1].t_mc_k < curves[c].t_mc_k, msg.str());
            }
        }
        detail::require(!power_unit.empty(), "dataset: power_unit must be set");
    }

    std::size_t total_points() const {
        std::size_t n = 0;
        for (const auto& c : curves) n += c.points.size();
        return n;
    }

    bool has_sigmas() const {
        for (const auto& c : curves)
            for (const auto& p : c.points)
                if (!(p.sigma > 0.0)) return false;
        return true;
    }
};

enum class SweepSource { planck2d, vna };

inline std::string to_string(SweepSource s) {
    return s == SweepSource::planck2d ? "planck2d" : "vna";
}

inline SweepSource sweep_source_from_string(const std::string& s) {
    if (s == "planck2d") return SweepSource::planck2d;
    if (s == "vna") return SweepSource::vna;
    throw std::invalid_argument("unknown sweep source '" + s + "' (expected planck2d or vna)");
}

// One bias point of a flux sweep: excess loss relative to the zero-bias
// reference (positive = more attenuation).
struct FluxSweepRecord {
    double i_dc_ua = 0.0;
    double delta_loss_db = 0.0;
    double sigma_db = 0.0;
    SweepSource source = SweepSource::planck2d;
};

inline void validate_flux_sweep(const std::vector<FluxSweepRecord>& records) {
    detail::require(records.size() >= 2, "flux sweep: needs at least two bias points");
    for (std::size_t i = 0; i < records.size(); ++i) {
        std::ostringstream where;
        where << "flux sweep record " << i;
        detail::require(detail::finite(records[i].i_dc_ua), where.str() + ": i_dc must be finite");
        detail::require(detail::finite(records[i].delta_loss_db),
                        where.str() + ": delta_loss_db must be finite");
        detail::require(detail::finite(records[i].sigma_db) && records[i].sigma_db >= 0.0,
                        where.str() + ": sigma_db must be finite and >= 0");
        if (i > 0)
            detail::require(records[i - 1].i_dc_ua < records[i].i_dc_ua,
                            where.str() + ": i_dc must be strictly increasing");
    }
}

} // namespace planck2d
