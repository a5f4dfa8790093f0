#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "planck2d/dataset.hpp"
#include "planck2d/fit.hpp"
#include "planck2d/flux.hpp"
#include "planck2d/simulate.hpp"
#include "planck2d/spacing.hpp"
#include "planck2d/tomography.hpp"
#include "planck2d/version.hpp"

namespace planck2d {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------- numbers

// Shortest exact decimal form is not needed; 17 significant digits reproduce
// any double bit-exactly on read-back.
inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_double(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    try {
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(where + ": not a number: '" + text + "'");
    }
}

} // namespace detail

// Accepts plain kelvin ("0.125", "0.125K") or millikelvin ("125mK").
inline double parse_temperature_k(const std::string& text) {
    std::string t = detail::trim(text);
    detail::require(!t.empty(), "temperature: empty value");
    double scale = 1.0;
    if (t.size() >= 2 && (t.compare(t.size() - 2, 2, "mK") == 0 ||
                          t.compare(t.size() - 2, 2, "mk") == 0)) {
        scale = 1.0e-3;
        t = t.substr(0, t.size() - 2);
    } else if (t.back() == 'K' || t.back() == 'k') {
        t = t.substr(0, t.size() - 1);
    }
    return scale * detail::parse_double(t, "temperature");
}

// ---------------------------------------------------------------- hashing

inline std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for hashing: " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw std::runtime_error("digest context allocation failed");
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[65536];
    while (in) {
        in.read(buf, sizeof buf);
        const std::streamsize got = in.gcount();
        if (got > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(got));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

// ------------------------------------------------------------ dataset CSV

inline void write_dataset(const std::filesystem::path& path, const SweepDataset& ds) {
    ds.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "# planck2d dataset v" << dataset_format_version << "\n";
    out << "# temperature_unit = K\n";
    out << "# power_unit = " << ds.power_unit << "\n";
    out << "# f0_hz = " << format_g17(ds.receiver.f0_hz) << "\n";
    out << "# bandwidth_hz = " << format_g17(ds.receiver.bandwidth_hz) << "\n";
    out << "# z0_ohm = " << format_g17(ds.receiver.z0_ohm) << "\n";
    out << "# t_int_s = " << format_g17(ds.receiver.t_int_s) << "\n";
    if (!ds.provenance.empty()) out << "# provenance = " << ds.provenance << "\n";
    out << "# columns = t_mc,t_att,power,sigma_power\n";
    for (const auto& c : ds.curves)
        for (const auto& p : c.points)
            out << format_g17(c.t_mc_k) << ',' << format_g17(p.t_att_k) << ','
                << format_g17(p.power) << ',' << format_g17(p.sigma) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline SweepDataset read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open dataset: " + path.string());
    const std::string where = path.string();
    auto fail = [&](std::size_t line, const std::string& msg) -> void {
        std::ostringstream o;
        o << where << ":" << line << ": " << msg;
        throw std::invalid_argument(o.str());
    };

    SweepDataset ds;
    std::map<std::string, std::string> header;
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    double temp_scale = 0.0; // set once the unit declaration is seen
    PlanckCurve* cur = nullptr;
    std::vector<double> seen_t_mc;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        if (first) {
            const std::string magic = "# planck2d dataset v";
            if (t.rfind(magic, 0) != 0)
                fail(lineno, "not a planck2d dataset file (missing magic header)");
            const std::string ver = detail::trim(t.substr(magic.size()));
            if (ver != std::to_string(dataset_format_version))
                fail(lineno, "unsupported dataset format version " + ver);
            first = false;
            continue;
        }
        if (t[0] == '#') {
            const std::string body = detail::trim(t.substr(1));
            const auto eq = body.find('=');
            if (eq != std::string::npos)
                header[detail::trim(body.substr(0, eq))] = detail::trim(body.substr(eq + 1));
            continue;
        }
        // first data row: the header block is complete, check declarations
        if (temp_scale == 0.0) {
            const auto unit = header.find("temperature_unit");
            if (unit == header.end())
                fail(lineno, "missing temperature_unit declaration in header");
            if (unit->second == "K")
                temp_scale = 1.0;
            else if (unit->second == "mK")
                temp_scale = 1.0e-3;
            else
                fail(lineno, "unknown temperature_unit '" + unit->second + "' (want K or mK)");
            const auto pu = header.find("power_unit");
            if (pu == header.end() || pu->second.empty())
                fail(lineno, "missing power_unit declaration in header");
            ds.power_unit = pu->second;
            for (const char* key : {"f0_hz", "bandwidth_hz", "z0_ohm"})
                if (!header.count(key))
                    fail(lineno, std::string("missing ") + key + " declaration in header");
            ds.receiver.f0_hz = detail::parse_double(header["f0_hz"], where + " f0_hz");
            ds.receiver.bandwidth_hz =
                detail::parse_double(header["bandwidth_hz"], where + " bandwidth_hz");
            ds.receiver.z0_ohm = detail::parse_double(header["z0_ohm"], where + " z0_ohm");
            if (header.count("t_int_s"))
                ds.receiver.t_int_s = detail::parse_double(header["t_int_s"], where + " t_int_s");
            if (header.count("provenance")) ds.provenance = header["provenance"];
        }
        std::vector<std::string> fields;
        std::stringstream ss(t);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 4)
            fail(lineno, "expected 4 comma-separated values (t_mc,t_att,power,sigma_power), got " +
                             std::to_string(fields.size()));
        double vals[4];
        for (int i = 0; i < 4; ++i) {
            try {
                vals[i] = detail::parse_double(fields[i], "field " + std::to_string(i + 1));
            } catch (const std::exception& ex) {
                fail(lineno, ex.what());
            }
        }
        const double t_mc = vals[0] * temp_scale;
        const double t_att = vals[1] * temp_scale;
        if (!cur || cur->t_mc_k != t_mc) {
            for (double prev : seen_t_mc)
                if (prev == t_mc)
                    fail(lineno, "rows of one curve must be contiguous (t_mc repeats earlier value)");
            if (cur && t_mc < cur->t_mc_k)
                fail(lineno, "curves must appear in increasing t_mc order");
            seen_t_mc.push_back(t_mc);
            ds.curves.emplace_back();
            cur = &ds.curves.back();
            cur->t_mc_k = t_mc;
        }
        if (!cur->points.empty() && !(cur->points.back().t_att_k < t_att))
            fail(lineno, "t_att must be strictly increasing within a curve");
        if (!(std::isfinite(vals[2])))
            fail(lineno, "power must be finite");
        if (!(std::isfinite(vals[3]) && vals[3] >= 0.0))
            fail(lineno, "sigma_power must be finite and >= 0");
        cur->points.push_back({t_att, vals[2], vals[3]});
    }
    if (ds.curves.empty())
        throw std::invalid_argument(where + ": no data rows");
    ds.validate();
    return ds;
}

// --------------------------------------------------------- flux sweep CSV

inline void write_flux_records(const std::filesystem::path& path,
                               const std::vector<FluxSweepRecord>& records) {
    validate_flux_sweep(records);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "# planck2d fluxsweep v" << dataset_format_version << "\n";
    out << "# columns = i_dc_ua,delta_loss_db,sigma_db,source\n";
    for (const auto& r : records)
        out << format_g17(r.i_dc_ua) << ',' << format_g17(r.delta_loss_db) << ','
            << format_g17(r.sigma_db) << ',' << to_string(r.source) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::vector<FluxSweepRecord> read_flux_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open flux sweep: " + path.string());
    const std::string where = path.string();
    std::vector<FluxSweepRecord> out;
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        if (first) {
            const std::string magic = "# planck2d fluxsweep v";
            if (t.rfind(magic, 0) != 0)
                throw std::invalid_argument(where + ":1: not a planck2d fluxsweep file");
            first = false;
            continue;
        }
        if (t[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(t);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 4) {
            std::ostringstream o;
            o << where << ":" << lineno << ": expected 4 fields, got " << fields.size();
            throw std::invalid_argument(o.str());
        }
        FluxSweepRecord r;
        r.i_dc_ua = detail::parse_double(fields[0], where + " i_dc_ua");
        r.delta_loss_db = detail::parse_double(fields[1], where + " delta_loss_db");
        r.sigma_db = detail::parse_double(fields[2], where + " sigma_db");
        r.source = sweep_source_from_string(detail::trim(fields[3]));
        out.push_back(r);
    }
    validate_flux_sweep(out);
    return out;
}

// ------------------------------------------------------------ JSON report

inline std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Common head of every report. generated_at is the only field allowed to
// differ between reruns on identical inputs.
inline json report_envelope(const std::string& command, const std::filesystem::path& input) {
    json j;
    j["tool"] = "planck2d";
    j["tool_version"] = version_string;
    j["report_format_version"] = report_format_version;
    j["generated_at"] = utc_timestamp();
    j["command"] = command;
    if (!input.empty()) {
        j["input"] = {{"path", input.string()}, {"sha256", sha256_file(input)}};
    }
    return j;
}

inline json fit_to_json(const FitResult& r, WeightRule rule, const std::string& model) {
    json j;
    j["model"] = model;
    j["params"] = {{"kappa", r.params.kappa}, {"n_h", r.params.n_h}, {"eta", r.params.eta}};
    j["sigma"] = {{"kappa", r.sigma[0]}, {"n_h", r.sigma[1]}, {"eta", r.sigma[2]}};
    j["loss_db"] = r.loss_db;
    j["loss_db_sigma"] = r.loss_db_sigma;
    j["covariance"] = json::array();
    for (const auto& row : r.covariance) j["covariance"].push_back({row[0], row[1], row[2]});
    j["ssr"] = r.ssr;
    j["weighted_rms"] = r.weighted_rms();
    j["n_points"] = r.n_points;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["fitted"] = {{"kappa", r.fitted[0]}, {"n_h", r.fitted[1]}, {"eta", r.fitted[2]}};
    if (std::isfinite(r.fixed_t_mc_k)) j["fixed_t_mc_k"] = r.fixed_t_mc_k;
    if (!r.fitted[2]) j["fixed_eta"] = r.params.eta;
    j["weight_rule"] = to_string(rule);
    j["guess_degraded"] = r.guess_degraded;
    j["notes"] = r.notes;
    return j;
}

inline json spacing_to_json(const SpacingResult& sr) {
    json j;
    j["threshold_t_cr_multiple"] = sr.threshold_t_cr_multiple;
    j["t_cr_k"] = sr.t_cr_k;
    j["entries"] = json::array();
    for (const auto& e : sr.entries) {
        json je;
        je["index"] = e.index;
        je["t_mc_lo_k"] = e.t_mc_lo_k;
        je["t_mc_hi_k"] = e.t_mc_hi_k;
        je["ok"] = e.ok;
        if (!e.ok) {
            je["message"] = e.message;
        } else {
            je["delta_p"] = e.delta_p;
            je["sigma"] = e.sigma;
            je["coupling"] = e.coupling;
            je["coupling_sigma"] = e.coupling_sigma;
            je["n_common"] = e.n_common;
        }
        j["entries"].push_back(je);
    }
    return j;
}

inline json drift_to_json(const DriftReport& d) {
    return json{{"verdict", to_string(d.verdict)}, {"statistic", d.statistic},
                {"dof", d.dof},                    {"p_value", d.p_value},
                {"mean_coupling", d.mean_coupling}, {"p_threshold", d.p_threshold}};
}

inline json flux_records_to_json(const std::vector<FluxSweepRecord>& records) {
    json arr = json::array();
    for (const auto& r : records)
        arr.push_back({{"i_dc_ua", r.i_dc_ua},
                       {"delta_loss_db", r.delta_loss_db},
                       {"sigma_db", r.sigma_db},
                       {"source", to_string(r.source)}});
    return arr;
}

inline json comparison_to_json(const SweepComparison& c) {
    json j;
    j["rms_db"] = c.rms_db;
    j["max_abs_db"] = c.max_abs_db;
    j["n_flagged"] = c.n_flagged;
    j["points"] = json::array();
    for (const auto& p : c.points)
        j["points"].push_back({{"i_dc_ua", p.i_dc_ua},
                               {"diff_db", p.diff_db},
                               {"sigma_db", p.sigma_db},
                               {"dispersion_candidate", p.dispersion_candidate}});
    return j;
}

inline json state_to_json(const GaussianStateSummary& s) {
    return json{{"var_s", s.var_s},
                {"var_a", s.var_a},
                {"squeezing_db", s.squeezing_db},
                {"antisqueezing_db", s.antisqueezing_db},
                {"purity", s.purity},
                {"physical", s.physical}};
}

inline void write_report(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

// --------------------------------------------------------------- plot CSV

inline void write_fit_plot_csv(const std::filesystem::path& path, const SweepDataset& ds,
                               const CalibrationParams& fitted) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "t_mc_k,t_att_k,power_measured,power_fit\n";
    for (const auto& c : ds.curves)
        for (const auto& p : c.points)
            out << format_g17(c.t_mc_k) << ',' << format_g17(p.t_att_k) << ','
                << format_g17(p.power) << ','
                << format_g17(detected_power(fitted, p.t_att_k, c.t_mc_k, ds.receiver)) << "\n";
}

inline void write_spacing_plot_csv(const std::filesystem::path& path, const SpacingResult& sr) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "index,t_mc_lo_k,t_mc_hi_k,delta_p,sigma,coupling,coupling_sigma\n";
    for (const auto& e : sr.entries) {
        if (!e.ok) continue;
        out << e.index << ',' << format_g17(e.t_mc_lo_k) << ',' << format_g17(e.t_mc_hi_k) << ','
            << format_g17(e.delta_p) << ',' << format_g17(e.sigma) << ','
            << format_g17(e.coupling) << ',' << format_g17(e.coupling_sigma) << "\n";
    }
}

inline void write_flux_plot_csv(const std::filesystem::path& path,
                                const std::vector<FluxSweepRecord>& planck,
                                const std::vector<FluxSweepRecord>* vna) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "i_dc_ua,delta_loss_db,sigma_db,source\n";
    for (const auto& r : planck)
        out << format_g17(r.i_dc_ua) << ',' << format_g17(r.delta_loss_db) << ','
            << format_g17(r.sigma_db) << ',' << to_string(r.source) << "\n";
    if (vna)
        for (const auto& r : *vna)
            out << format_g17(r.i_dc_ua) << ',' << format_g17(r.delta_loss_db) << ','
                << format_g17(r.sigma_db) << ',' << to_string(r.source) << "\n";
}

// ------------------------------------------------------------- config JSON

namespace detail {

inline double json_temperature_k(const json& v, const char* what) {
    if (v.is_string()) return parse_temperature_k(v.get<std::string>());
    if (v.is_number()) return v.get<double>();
    throw std::invalid_argument(std::string("config: ") + what +
                                " must be a number (K) or a string like \"125mK\"");
}

} // namespace detail

inline ThermalLoadModel thermal_model_from_json(const json& j) {
    ThermalLoadModel m = default_thermal_model();
    const std::string kind = j.value("kind", "table");
    if (kind == "table") {
        m.coupling = ThermalLoadModel::Coupling::table;
        if (j.contains("t_att_k")) m.table_t_att_k = j.at("t_att_k").get<std::vector<double>>();
        if (j.contains("t_mc_k")) m.table_t_mc_k = j.at("t_mc_k").get<std::vector<double>>();
        if (!m.table_t_mc_k.empty()) m.base_t_mc_k = m.table_t_mc_k.front();
    } else if (kind == "power_law") {
        m.coupling = ThermalLoadModel::Coupling::power_law;
        m.base_t_mc_k = j.value("base_t_mc_k", m.base_t_mc_k);
        m.coeff = j.value("coeff", 0.0);
        m.exponent = j.value("exponent", 2.0);
        m.onset_k = j.value("onset_k", 0.0);
        m.domain_max_k = j.value("domain_max_k", 1.2);
    } else {
        throw std::invalid_argument("config: thermal kind must be 'table' or 'power_law'");
    }
    if (j.contains("base_t_mc_k")) m.base_t_mc_k = j.at("base_t_mc_k").get<double>();
    m.t_att_max_k = j.value("t_att_max_k", m.t_att_max_k);
    m.validate();
    return m;
}

inline SnailModel snail_model_from_json(const json& j) {
    if (j.contains("table")) {
        const auto& t = j.at("table");
        return make_snail_table(t.at("bias_ua").get<std::vector<double>>(),
                                t.at("excess_db").get<std::vector<double>>());
    }
    if (j.contains("polynomial")) {
        const auto& p = j.at("polynomial");
        return make_snail_polynomial(p.at("even_coeffs").get<std::vector<double>>(),
                                     p.at("bias_max_ua").get<double>());
    }
    throw std::invalid_argument("config: snail block needs 'table' or 'polynomial'");
}

struct SimulateConfig {
    CalibrationParams truth;
    ReceiverConfig receiver;
    std::vector<double> t_mc_k;
    int points_per_curve = 20;
    double margin_k = 0.025;
    ThermalLoadModel thermal = default_thermal_model();
    NoiseConfig noise;
    std::string power_unit = "(mV)^2";
    std::optional<SnailModel> snail;
    double i_dc_ua = 0.0;
    // optional drift fixture: scale eta by `factor` for curves above a T_mc
    std::optional<std::pair<double, double>> eta_step; // (above_t_mc_k, factor)
};

inline SimulateConfig load_simulate_config(const json& j) {
    SimulateConfig s;
    const auto& truth = j.at("truth");
    s.truth.kappa = truth.at("kappa").get<double>();
    s.truth.n_h = truth.at("n_h").get<double>();
    if (truth.contains("eta"))
        s.truth.eta = truth.at("eta").get<double>();
    else if (truth.contains("loss_db"))
        s.truth.eta = eta_from_loss_db(truth.at("loss_db").get<double>());
    else
        throw std::invalid_argument("config: truth needs 'eta' or 'loss_db'");
    s.truth.validate();

    if (j.contains("receiver")) {
        const auto& r = j.at("receiver");
        s.receiver.f0_hz = r.value("f0_hz", s.receiver.f0_hz);
        s.receiver.bandwidth_hz = r.value("bandwidth_hz", s.receiver.bandwidth_hz);
        s.receiver.z0_ohm = r.value("z0_ohm", s.receiver.z0_ohm);
        s.receiver.t_int_s = r.value("t_int_s", s.receiver.t_int_s);
        s.receiver.validate();
    }

    const auto& plan = j.at("plan");
    for (const auto& v : plan.at("t_mc"))
        s.t_mc_k.push_back(detail::json_temperature_k(v, "plan.t_mc"));
    s.points_per_curve = plan.value("points_per_curve", 20);
    if (plan.contains("margin"))
        s.margin_k = detail::json_temperature_k(plan.at("margin"), "plan.margin");

    if (j.contains("thermal")) s.thermal = thermal_model_from_json(j.at("thermal"));

    if (j.contains("noise")) {
        const auto& n = j.at("noise");
        const std::string mode = n.value("mode", "radiometer");
        if (mode == "noiseless")
            s.noise.mode = NoiseConfig::Mode::noiseless;
        else if (mode == "radiometer")
            s.noise.mode = NoiseConfig::Mode::radiometer;
        else
            throw std::invalid_argument("config: noise mode must be 'noiseless' or 'radiometer'");
        s.noise.rng_seed = n.value("rng_seed", 0ull);
        s.noise.t_int_s = n.value("t_int_s", 0.0);
        s.noise.temperature_jitter_sigma_k =
            n.value("temperature_jitter_sigma_k", s.noise.temperature_jitter_sigma_k);
    }

    s.power_unit = j.value("power_unit", s.power_unit);
    if (j.contains("snail")) {
        s.snail = snail_model_from_json(j.at("snail"));
        s.i_dc_ua = j.value("i_dc_ua", 0.0);
    }
    if (j.contains("eta_step")) {
        const auto& e = j.at("eta_step");
        s.eta_step = {detail::json_temperature_k(e.at("above_t_mc"), "eta_step.above_t_mc"),
                      e.at("factor").get<double>()};
    }
    return s;
}

// Plans and simulates one dataset from a parsed config, applying the
// optional bias-dependent attenuation and per-curve eta step.
inline SweepDataset build_dataset(const SimulateConfig& sc) {
    const SweepPlan plan =
        plan_sweep(sc.t_mc_k, sc.points_per_curve, sc.margin_k, sc.thermal);
    if (!plan.fully_feasible())
        throw std::invalid_argument("infeasible sweep plan: " + plan.infeasibility_summary());

    CalibrationParams truth = sc.truth;
    if (sc.snail) {
        const double excess = snail_excess_loss(*sc.snail, sc.i_dc_ua);
        truth.eta = truth.eta * std::pow(10.0, -excess / 10.0);
        truth.validate();
    }

    SweepDataset ds;
    if (sc.eta_step) {
        std::vector<double> etas;
        for (const auto& e : plan.entries)
            etas.push_back(e.t_mc_k > sc.eta_step->first ? truth.eta * sc.eta_step->second
                                                           : truth.eta);
        ds = simulate_dataset_with_eta_profile(truth, plan, sc.receiver, sc.noise, etas);
    } else {
        ds = simulate_dataset(truth, plan, sc.receiver, sc.noise);
    }
    ds.power_unit = sc.power_unit;
    return ds;
}

} // namespace planck2d
