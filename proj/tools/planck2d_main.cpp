// planck2d: command-line surface for the two-dimensional Planck
// spectroscopy toolkit. Exit codes: 0 success, 1 runtime failure, 2
// input/config error, 3 fit non-convergence (report still written).

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <planck2d/planck2d.hpp>

namespace fs = std::filesystem;
using planck2d::json;

namespace {

// Relative output paths land under $PLANCK2D_OUT_DIR when it is set; the
// environment variable affects output placement only, never inputs.
fs::path resolve_out(const fs::path& p) {
    fs::path out = p;
    if (out.is_relative()) {
        if (const char* dir = std::getenv("PLANCK2D_OUT_DIR"); dir && *dir)
            out = fs::path(dir) / out;
    }
    if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
    return out;
}

json dataset_summary(const planck2d::SweepDataset& ds) {
    json j;
    j["n_curves"] = ds.curves.size();
    j["n_points"] = ds.total_points();
    j["power_unit"] = ds.power_unit;
    if (!ds.provenance.empty()) j["provenance"] = ds.provenance;
    return j;
}

void print_fit_summary(const planck2d::FitResult& r) {
    std::ostringstream o;
    o.precision(10);
    o << (r.converged ? "converged" : "NOT converged") << " after " << r.iterations
      << " iterations: kappa = " << r.params.kappa << ", n_h = " << r.params.n_h
      << ", eta = " << r.params.eta << " (loss " << r.loss_db << " dB)";
    std::cout << o.str() << "\n";
}

struct SimulateArgs {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

int cmd_simulate(const SimulateArgs& a) {
    std::ifstream in(a.config);
    if (!in) throw std::invalid_argument("cannot open config: " + a.config);
    const json cfg = json::parse(in);
    planck2d::SimulateConfig sc = planck2d::load_simulate_config(cfg);
    if (a.seed_given) sc.noise.rng_seed = a.seed;
    const planck2d::SweepDataset ds = planck2d::build_dataset(sc);
    const fs::path out = resolve_out(a.out);
    planck2d::write_dataset(out, ds);
    std::cout << "wrote " << out.string() << ": " << ds.curves.size() << " curves, "
              << ds.total_points() << " points\n";
    std::ostringstream o;
    o.precision(10);
    o << "truth: kappa = " << sc.truth.kappa << " " << sc.power_unit
      << ", n_h = " << sc.truth.n_h << ", eta = " << sc.truth.eta << " (loss "
      << sc.truth.loss_db() << " dB)";
    std::cout << o.str() << "\n";
    const bool noisy = sc.noise.mode == planck2d::NoiseConfig::Mode::radiometer;
    std::cout << "noise: " << (noisy ? "radiometer" : "noiseless");
    if (noisy) std::cout << ", seed " << sc.noise.rng_seed;
    std::cout << "\n";
    return 0;
}

struct FitArgs {
    std::string dataset;
    std::string out;
    std::string plot;
    planck2d::WeightRule rule = planck2d::WeightRule::per_curve;
    int max_iterations = 200;
    // fit1d only
    double eta_db = 0.0;
    double eta = 0.0;
    bool eta_given = false;
    std::string t_mc;
    std::size_t curve_index = 0;
};

int cmd_fit2d(const FitArgs& a) {
    const planck2d::SweepDataset ds = planck2d::read_dataset(a.dataset);
    planck2d::FitOptions opts;
    opts.weight_rule = a.rule;
    opts.max_iterations = a.max_iterations;
    const planck2d::FitResult r = planck2d::fit_2d(ds, opts);

    json rep = planck2d::report_envelope("fit2d", a.dataset);
    rep["dataset"] = dataset_summary(ds);
    rep["fit"] = planck2d::fit_to_json(r, a.rule, "planck_2d");
    const fs::path out = resolve_out(a.out);
    planck2d::write_report(out, rep);
    if (!a.plot.empty()) planck2d::write_fit_plot_csv(resolve_out(a.plot), ds, r.params);

    print_fit_summary(r);
    std::cout << "report: " << out.string() << "\n";
    if (!r.converged) {
        std::cerr << "fit did not converge within " << a.max_iterations
                  << " iterations; report written with converged = false\n";
        return 3;
    }
    return 0;
}

int cmd_fit1d(const FitArgs& a) {
    const planck2d::SweepDataset ds = planck2d::read_dataset(a.dataset);
    if (a.curve_index >= ds.curves.size()) {
        std::ostringstream o;
        o << "curve index " << a.curve_index << " out of range (dataset has "
          << ds.curves.size() << " curves)";
        throw std::invalid_argument(o.str());
    }
    const planck2d::PlanckCurve& curve = ds.curves[a.curve_index];
    const double fixed_eta = a.eta_given ? a.eta : planck2d::eta_from_loss_db(a.eta_db);

    bool t_mc_defaulted = false;
    double t_mc_k = 0.0;
    if (a.t_mc.empty()) {
        t_mc_k = curve.t_mc_k;
        t_mc_defaulted = true;
    } else {
        t_mc_k = planck2d::parse_temperature_k(a.t_mc);
    }

    planck2d::FitOptions opts;
    opts.weight_rule = a.rule;
    opts.max_iterations = a.max_iterations;
    planck2d::FitResult r = planck2d::fit_1d(curve, fixed_eta, t_mc_k, ds.receiver, opts);
    if (t_mc_defaulted) {
        const std::string note = "t_mc not given; defaulted to the curve's recorded value (" +
                                 planck2d::format_g17(t_mc_k) + " K)";
        r.notes.push_back(note);
        std::cout << "notice: " << note << "\n";
    }

    json rep = planck2d::report_envelope("fit1d", a.dataset);
    rep["dataset"] = dataset_summary(ds);
    rep["curve_index"] = a.curve_index;
    rep["fit"] = planck2d::fit_to_json(r, a.rule, "planck_1d");
    const fs::path out = resolve_out(a.out);
    planck2d::write_report(out, rep);
    if (!a.plot.empty()) {
        // the 1D model evaluates at the pinned environment temperature
        planck2d::SweepDataset one;
        one.receiver = ds.receiver;
        one.power_unit = ds.power_unit;
        one.curves.push_back(curve);
        one.curves[0].t_mc_k = t_mc_k;
        planck2d::write_fit_plot_csv(resolve_out(a.plot), one, r.params);
    }

    print_fit_summary(r);
    std::cout << "report: " << out.string() << "\n";
    if (!r.converged) {
        std::cerr << "fit did not converge within " << a.max_iterations
                  << " iterations; report written with converged = false\n";
        return 3;
    }
    return 0;
}

struct SpacingArgs {
    std::string dataset;
    std::string out;
    std::string plot;
    double threshold = 2.0;
    double p_threshold = 0.05;
};

int cmd_spacing(const SpacingArgs& a) {
    const planck2d::SweepDataset ds = planck2d::read_dataset(a.dataset);
    const planck2d::SpacingResult sr = planck2d::spacing_analysis(ds, a.threshold);

    json rep = planck2d::report_envelope("spacing", a.dataset);
    rep["dataset"] = dataset_summary(ds);
    rep["spacing"] = planck2d::spacing_to_json(sr);
    std::string verdict;
    try {
        const planck2d::DriftReport d = planck2d::detect_eta_drift(sr, a.p_threshold);
        rep["drift"] = planck2d::drift_to_json(d);
        verdict = planck2d::to_string(d.verdict);
    } catch (const planck2d::InsufficientDataError& e) {
        rep["drift"] = json{{"verdict", "insufficient data"}, {"message", e.what()}};
        verdict = "insufficient data";
    }
    const fs::path out = resolve_out(a.out);
    planck2d::write_report(out, rep);
    if (!a.plot.empty()) planck2d::write_spacing_plot_csv(resolve_out(a.plot), sr);

    std::cout << "spacing entries: " << sr.entries.size() << ", drift verdict: " << verdict
              << "\n";
    std::cout << "report: " << out.string() << "\n";
    return 0;
}

struct FluxArgs {
    std::string manifest;
    std::string vna;
    std::string out;
    std::string plot;
    planck2d::WeightRule rule = planck2d::WeightRule::per_curve;
    int max_iterations = 200;
};

int cmd_flux(const FluxArgs& a) {
    std::ifstream in(a.manifest);
    if (!in) throw std::invalid_argument("cannot open manifest: " + a.manifest);
    const json mj = json::parse(in);
    if (!mj.contains("datasets") || !mj.at("datasets").is_array() || mj.at("datasets").empty())
        throw std::invalid_argument("manifest: 'datasets' must be a non-empty array");

    const fs::path base = fs::path(a.manifest).parent_path();
    std::vector<std::pair<double, planck2d::SweepDataset>> data;
    json inputs = json::array();
    for (const auto& d : mj.at("datasets")) {
        const double bias = d.at("i_dc_ua").get<double>();
        fs::path p = d.at("path").get<std::string>();
        if (p.is_relative()) p = base / p;
        planck2d::SweepDataset ds = planck2d::read_dataset(p);
        inputs.push_back(json{{"i_dc_ua", bias},
                              {"path", p.string()},
                              {"sha256", planck2d::sha256_file(p)},
                              {"n_points", ds.total_points()}});
        data.emplace_back(bias, std::move(ds));
    }

    planck2d::FitOptions opts;
    opts.weight_rule = a.rule;
    opts.max_iterations = a.max_iterations;
    const planck2d::FluxLossResult res = planck2d::flux_loss_sweep(std::move(data), opts);

    json rep = planck2d::report_envelope("flux", a.manifest);
    rep["datasets"] = inputs;
    rep["records"] = planck2d::flux_records_to_json(res.records);
    rep["fits"] = json::array();
    for (const auto& f : res.fits)
        rep["fits"].push_back(json{{"i_dc_ua", f.i_dc_ua},
                                   {"fit", planck2d::fit_to_json(f.fit, a.rule, "planck_2d")}});

    std::vector<planck2d::FluxSweepRecord> vna;
    if (!a.vna.empty()) {
        vna = planck2d::loss_from_vna_trace(planck2d::read_flux_records(a.vna));
        rep["vna"] = planck2d::flux_records_to_json(vna);
        const planck2d::SweepComparison cmp = planck2d::compare_sweeps(res.records, vna);
        rep["comparison"] = planck2d::comparison_to_json(cmp);
        std::ostringstream o;
        o.precision(6);
        o << "vs VNA: rms " << cmp.rms_db << " dB, max " << cmp.max_abs_db << " dB, "
          << cmp.n_flagged << " dispersion candidate(s)";
        std::cout << o.str() << "\n";
    }

    const fs::path out = resolve_out(a.out);
    planck2d::write_report(out, rep);
    if (!a.plot.empty())
        planck2d::write_flux_plot_csv(resolve_out(a.plot), res.records,
                                      vna.empty() ? nullptr : &vna);

    std::cout << "flux sweep: " << res.records.size() << " bias points\n";
    std::cout << "report: " << out.string() << "\n";
    if (!res.all_converged()) {
        std::cerr << "one or more per-bias fits did not converge; report written\n";
        return 3;
    }
    return 0;
}

struct ImpactArgs {
    double s_db = 0.0;
    double mu = 1.0;
    double kappa_true = 0.0;
    double kappa_assumed = 0.0;
    std::string out;
};

int cmd_impact(const ImpactArgs& a) {
    const planck2d::GaussianStateSummary input =
        planck2d::GaussianStateSummary::from_levels(a.s_db, a.mu);
    planck2d::CalibrationPair pair;
    pair.cal_true.kappa = a.kappa_true;
    pair.cal_assumed.kappa = a.kappa_assumed;
    const planck2d::GaussianStateSummary seen = planck2d::miscalibrate(input, pair);

    // moment-level self check: forwarding with the true calibration and
    // inverting with the vacuum-anchored assumed one must reproduce the
    // affine map exactly
    const planck2d::ReceiverConfig cfg;
    const double r = pair.ratio();
    planck2d::CalibrationParams ct = pair.cal_true;
    ct.n_h = std::max(1.0, 0.5 / r);
    planck2d::CalibrationParams ca = pair.cal_assumed;
    ca.n_h = r * (0.5 + ct.n_h) - 0.5;
    double max_dev = 0.0;
    for (double v : {input.var_s, input.var_a}) {
        const double pipeline = planck2d::reconstruct_variance(
            planck2d::forward_moment(v, ct, cfg), ca, cfg);
        const double affine = r * v + 0.25 * (1.0 - r);
        max_dev = std::max(max_dev, std::abs(pipeline - affine));
    }

    json rep = planck2d::report_envelope("impact", {});
    rep["input_state"] = planck2d::state_to_json(input);
    rep["calibration"] = json{{"kappa_true", a.kappa_true},
                              {"kappa_assumed", a.kappa_assumed},
                              {"ratio", r}};
    rep["reconstructed_state"] = planck2d::state_to_json(seen);
    rep["moment_oracle"] =
        json{{"max_abs_deviation", max_dev}, {"tolerance", 1e-9}, {"consistent", max_dev <= 1e-9}};
    rep["notes"] = json::array(
        {"variance units: vacuum = 0.25; squeezing level S = -10 log10(var / 0.25)",
         "vacuum anchoring: true and assumed calibrations reproduce the same measured vacuum "
         "moment, so the reconstruction error is var' = r var + 0.25 (1 - r) with "
         "r = kappa_true / kappa_assumed"});
    const fs::path out = resolve_out(a.out);
    planck2d::write_report(out, rep);

    std::ostringstream o;
    o.precision(10);
    o << "reconstructed: S' = " << seen.squeezing_db << " dB, purity = " << seen.purity
      << (seen.physical ? "" : " (unphysical)");
    std::cout << o.str() << "\n";
    std::cout << "report: " << out.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"planck2d: two-dimensional Planck spectroscopy toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("planck2d ") + planck2d::version_string);
    app.footer("Relative output paths are placed under $PLANCK2D_OUT_DIR when it is set.\n"
               "Exit codes: 0 success, 1 runtime failure, 2 input/config error, "
               "3 fit non-convergence.");

    const std::map<std::string, planck2d::WeightRule> rules{
        {"per_curve", planck2d::WeightRule::per_curve},
        {"inverse_variance", planck2d::WeightRule::inverse_variance},
        {"uniform", planck2d::WeightRule::uniform}};

    SimulateArgs sim;
    CLI::App* c_sim = app.add_subcommand("simulate", "Generate a synthetic sweep dataset");
    c_sim->add_option("--config", sim.config, "JSON config (truth, plan, noise)")
        ->required()
        ->check(CLI::ExistingFile);
    c_sim->add_option("--out", sim.out, "Output dataset CSV path")->required();
    CLI::Option* seed_opt =
        c_sim->add_option("--seed", sim.seed, "Override the config RNG seed");

    FitArgs f2;
    f2.out = "fit2d_report.json";
    CLI::App* c_f2 = app.add_subcommand("fit2d", "Joint (kappa, n_h, eta) fit of a 2D sweep");
    c_f2->add_option("dataset", f2.dataset, "Dataset CSV")->required()->check(CLI::ExistingFile);
    c_f2->add_option("--out", f2.out, "Report JSON path")->capture_default_str();
    c_f2->add_option("--plot-data", f2.plot, "Write (t_att, measured, fit) CSV for plotting");
    c_f2->add_option("--weights", f2.rule, "Weighting rule")
        ->transform(CLI::CheckedTransformer(rules, CLI::ignore_case));
    c_f2->add_option("--max-iterations", f2.max_iterations, "Iteration cap")->capture_default_str();

    FitArgs f1;
    f1.out = "fit1d_report.json";
    CLI::App* c_f1 =
        app.add_subcommand("fit1d", "Single-curve (kappa, n_h) fit with pinned eta");
    c_f1->add_option("dataset", f1.dataset, "Dataset CSV")->required()->check(CLI::ExistingFile);
    CLI::Option* eta_db_opt =
        c_f1->add_option("--eta-db", f1.eta_db, "Assumed attenuator loss in dB")->capture_default_str();
    CLI::Option* eta_opt =
        c_f1->add_option("--eta", f1.eta, "Assumed transmissivity in (0, 1]")->excludes(eta_db_opt);
    eta_db_opt->excludes(eta_opt);
    c_f1->add_option("--t-mc", f1.t_mc,
                     "Pinned environment temperature (accepts K or mK suffix); "
                     "defaults to the curve's recorded value");
    c_f1->add_option("--curve-index", f1.curve_index, "Curve to fit (0-based)")->capture_default_str();
    c_f1->add_option("--out", f1.out, "Report JSON path")->capture_default_str();
    c_f1->add_option("--plot-data", f1.plot, "Write (t_att, measured, fit) CSV for plotting");
    c_f1->add_option("--weights", f1.rule, "Weighting rule")
        ->transform(CLI::CheckedTransformer(rules, CLI::ignore_case));
    c_f1->add_option("--max-iterations", f1.max_iterations, "Iteration cap")->capture_default_str();

    SpacingArgs sp;
    sp.out = "spacing_report.json";
    CLI::App* c_sp =
        app.add_subcommand("spacing", "Curve-spacing analysis and transmissivity drift check");
    c_sp->add_option("dataset", sp.dataset, "Dataset CSV")->required()->check(CLI::ExistingFile);
    c_sp->add_option("--threshold", sp.threshold,
                     "Linear-region threshold as a multiple of t_cr")->capture_default_str();
    c_sp->add_option("--p-threshold", sp.p_threshold, "Drift verdict p-value threshold")->capture_default_str();
    c_sp->add_option("--out", sp.out, "Report JSON path")->capture_default_str();
    c_sp->add_option("--plot-data", sp.plot, "Write spacing-table CSV for plotting");

    FluxArgs fx;
    fx.out = "flux_report.json";
    CLI::App* c_fx =
        app.add_subcommand("flux", "Per-bias loss sweep from a manifest of datasets");
    c_fx->add_option("--manifest", fx.manifest,
                     "JSON manifest: {\"datasets\": [{\"i_dc_ua\": ..., \"path\": ...}]}")
        ->required()
        ->check(CLI::ExistingFile);
    c_fx->add_option("--vna", fx.vna, "VNA trace CSV (fluxsweep format) to compare against")
        ->check(CLI::ExistingFile);
    c_fx->add_option("--out", fx.out, "Report JSON path")->capture_default_str();
    c_fx->add_option("--plot-data", fx.plot, "Write loss-vs-bias CSV for plotting");
    c_fx->add_option("--weights", fx.rule, "Weighting rule")
        ->transform(CLI::CheckedTransformer(rules, CLI::ignore_case));
    c_fx->add_option("--max-iterations", fx.max_iterations, "Iteration cap")->capture_default_str();

    ImpactArgs im;
    im.out = "impact_report.json";
    CLI::App* c_im = app.add_subcommand(
        "impact", "Propagate a gain miscalibration onto a squeezed-state reconstruction");
    c_im->add_option("--s-db", im.s_db, "True squeezing level in dB")->required();
    c_im->add_option("--mu", im.mu, "True state purity in (0, 1]")->required();
    c_im->add_option("--kappa-true", im.kappa_true, "Conversion factor from the 2D fit")
        ->required();
    c_im->add_option("--kappa-assumed", im.kappa_assumed, "Conversion factor actually applied")
        ->required();
    c_im->add_option("--out", im.out, "Report JSON path")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(c_sim)) {
            sim.seed_given = seed_opt->count() > 0;
            return cmd_simulate(sim);
        }
        if (app.got_subcommand(c_f2)) return cmd_fit2d(f2);
        if (app.got_subcommand(c_f1)) {
            f1.eta_given = eta_opt->count() > 0;
            return cmd_fit1d(f1);
        }
        if (app.got_subcommand(c_sp)) return cmd_spacing(sp);
        if (app.got_subcommand(c_fx)) return cmd_flux(fx);
        if (app.got_subcommand(c_im)) return cmd_impact(im);
        return 2; // unreachable with require_subcommand(1)
    } catch (const planck2d::RankDeficiencyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const planck2d::InsufficientDataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
