#pragma once

// Command-line front end: simulate, run, trace and pareto subcommands.
// Everything written is data (CSV + JSON); rendering is left to other tools.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stabsel.hpp"

namespace stabsel::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { ok = 0, usage = 2, io = 3, infeasible = 4, internal = 5 };

/// Flags shared by the pipeline subcommands.
struct RunConfig {
    // input: CSV or synthetic
    std::string input;
    std::string response = "y";
    bool header = true;
    Eigen::Index n = 50;
    Eigen::Index p = 500;
    double rho = 0.5;
    std::string beta = "1.5,1.1";
    double noise_sd = 1.0;
    bool standardize = true;
    // grid
    std::size_t grid_length = 100;
    std::optional<double> grid_ratio;
    std::string lambda_file;
    std::size_t folds = 10;
    // resampling
    std::size_t B = 500;
    std::uint64_t seed = 1;
    std::string subsamples = "shared";
    unsigned threads = 1;
    // decisions
    double pi_thr = 0.6;
    std::optional<double> pfer;
    double threshold = kExcellentStability;
    // accuracy
    std::optional<double> holdout;
    std::optional<Eigen::Index> test_n;
    // intervals and cutoff
    std::size_t n_boot = 1000;
    double ci_level = 0.95;
    std::size_t window = 50;
    double eps = 0.01;
    std::string matrix_file;
    std::optional<double> matrix_lambda;

    std::string out = ".";

    bool synthetic() const { return input.empty(); }
};

// ---------------------------------------------------------------------------
// Pipeline

struct PreparedData {
    Dataset train;
    std::optional<Dataset> test;
    std::optional<SyntheticSpec> spec;
};

struct PipelineResult {
    PreparedData data;
    LambdaGrid grid;
    CvResult cv;
    StabilitySelectionRun run;
    std::vector<StabilityReport> curve;
    LambdaChoice lambda_stable;
    std::optional<LambdaChoice> lambda_stable_1sd;
    LambdaChoice choice;
    std::size_t choice_index = 0;
    Diagnostics diag;
};

inline Eigen::VectorXd parse_beta(const std::string& text, Eigen::Index p) {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    std::stringstream ss(text);
    std::string item;
    Eigen::Index j = 0;
    while (std::getline(ss, item, ',')) {
        const auto v = csv::parse_double(item);
        if (!v) throw ParameterError("--beta: cannot parse '" + item + "'");
        if (j >= p) throw ParameterError("--beta has more entries than p");
        beta(j++) = *v;
    }
    return beta;
}

inline SyntheticSpec synthetic_spec(const RunConfig& cfg) {
    SyntheticSpec spec;
    spec.n = cfg.n;
    spec.p = cfg.p;
    spec.rho = cfg.rho;
    spec.beta = parse_beta(cfg.beta, cfg.p);
    spec.noise_sd = cfg.noise_sd;
    spec.seed = cfg.seed;
    spec.validate();
    return spec;
}

inline ResponseColumn response_column(const RunConfig& cfg) {
    if (!cfg.header) {
        std::size_t idx = 0;
        auto [ptr, ec] = std::from_chars(cfg.response.data(), cfg.response.data() + cfg.response.size(), idx);
        if (ec != std::errc{} || ptr != cfg.response.data() + cfg.response.size()) {
            throw ParameterError("--response must be a zero-based column index when --header is false");
        }
        return idx;
    }
    return cfg.response;
}

/// Loads or simulates the data, carves a test split when requested and
/// standardizes the training part; the test part keeps its raw scale.
inline PreparedData prepare_data(const RunConfig& cfg, bool need_test) {
    PreparedData prepared;
    Dataset raw;
    if (cfg.synthetic()) {
        prepared.spec = synthetic_spec(cfg);
        raw = simulate(*prepared.spec);
        if (cfg.holdout) throw ParameterError("--holdout applies to CSV input; use --test-n for synthetic data");
        if (need_test || cfg.test_n) {
            const Eigen::Index count = cfg.test_n.value_or(25);
            prepared.test = simulate_ar1_samples(*prepared.spec, count, rng::derive(cfg.seed, rng::streams::test_set));
        }
    } else {
        if (cfg.test_n) throw ParameterError("--test-n applies to synthetic data; use --holdout FRACTION for CSV input");
        raw = load_csv(cfg.input, response_column(cfg), cfg.header);
        if (cfg.holdout) {
            auto [train, test] = holdout_split(raw, *cfg.holdout, cfg.seed);
            raw = std::move(train);
            prepared.test = std::move(test);
        } else if (need_test) {
            throw ParameterError("no accuracy data for CSV input: pass --holdout FRACTION to carve a test split before subsampling");
        }
    }
    prepared.train = cfg.standardize ? standardize(raw) : raw;
    return prepared;
}

inline LambdaGrid read_lambda_file(const std::string& path) {
    const auto records = csv::parse(csv::read_file(path));
    std::vector<double> values;
    for (const auto& rec : records) {
        for (const auto& field : rec.fields) {
            if (field.empty()) continue;
            const auto v = csv::parse_double(field);
            if (!v) {
                if (values.empty() && &rec == &records.front()) continue; // header
                throw IngestionError(path + ": cannot parse lambda value '" + field + "' at line " + std::to_string(rec.line));
            }
            values.push_back(*v);
        }
    }
    return LambdaGrid::user(std::move(values));
}

inline SubsampleMode subsample_mode(const std::string& name) {
    if (name == "shared") return SubsampleMode::shared;
    if (name == "per-lambda") return SubsampleMode::per_lambda;
    throw ParameterError("--subsamples must be 'shared' or 'per-lambda'");
}

inline PipelineResult run_pipeline(const RunConfig& cfg, bool need_test, bool with_intervals) {
    if (cfg.B < 2) throw ParameterError("--B must be at least 2");
    check_threshold(cfg.pi_thr);
    PipelineResult res;
    res.data = prepare_data(cfg, need_test);
    const Dataset& d = res.data.train;
    require_resamplable(d);

    if (!cfg.lambda_file.empty()) {
        res.grid = read_lambda_file(cfg.lambda_file);
    } else {
        res.grid = make_grid(d, cfg.grid_length, cfg.grid_ratio.value_or(default_grid_ratio(d.n(), d.p())), &res.diag);
    }
    res.cv = cross_validate(d, res.grid, cfg.folds, cfg.seed, resampling_lasso_options(), cfg.threads);

    ResamplingOptions ropt;
    ropt.threads = cfg.threads;
    ropt.retain_fits = need_test;
    ropt.mode = subsample_mode(cfg.subsamples);
    res.run = run_stability_selection(d, res.grid, cfg.B, cfg.seed, ropt);
    for (const auto& issue : res.run.issues) {
        res.diag.warn("lasso did not converge: subsample " + std::to_string(issue.subsample) + ", lambda index " + std::to_string(issue.lambda_index) +
                      " (lambda=" + csv::format(res.grid[issue.lambda_index]) + ") after " + std::to_string(issue.iterations) + " sweeps");
    }

    std::optional<IntervalOptions> intervals;
    if (with_intervals) intervals = IntervalOptions{cfg.ci_level, cfg.n_boot, cfg.seed, cfg.threads};
    res.curve = stability_curve(res.run.matrices, intervals);

    res.lambda_stable = find_lambda_stable(res.curve, cfg.threshold);
    try {
        res.lambda_stable_1sd = find_lambda_stable_1sd(res.curve);
    } catch (const ParameterError& e) {
        res.diag.warn(std::string("lambda_stable-1sd unavailable: ") + e.what());
    }
    if (res.lambda_stable.kind == ChoiceKind::stable) {
        res.choice = res.lambda_stable;
    } else if (res.lambda_stable_1sd) {
        res.diag.warn("no grid value reaches stability " + csv::format(cfg.threshold) + "; using lambda_stable-1sd");
        res.choice = *res.lambda_stable_1sd;
    } else {
        throw ParameterError("no usable regularization value: fewer than two grid points have defined stability");
    }
    for (std::size_t l = 0; l < res.grid.size(); ++l) {
        if (res.grid[l] == *res.choice.lambda) res.choice_index = l;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Output helpers

using nlohmann::json;

inline std::string opt_csv(const std::optional<double>& v) { return v ? csv::format(*v) : "NA"; }
inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline void write_json(const std::filesystem::path& path, const json& j) { csv::write_file(path.string(), j.dump(2) + "\n"); }

inline json config_json(const RunConfig& cfg) {
    json j;
    if (cfg.synthetic()) {
        j["input"] = {{"kind", "synthetic"}, {"n", cfg.n}, {"p", cfg.p}, {"rho", cfg.rho}, {"beta", cfg.beta}, {"noise_sd", cfg.noise_sd}};
    } else {
        j["input"] = {{"kind", "csv"}, {"path", cfg.input}, {"response", cfg.response}, {"header", cfg.header}};
    }
    j["standardize"] = cfg.standardize;
    j["grid"] = {{"length", cfg.grid_length}, {"ratio", opt_json(cfg.grid_ratio)}, {"lambda_file", cfg.lambda_file}, {"folds", cfg.folds}};
    j["B"] = cfg.B;
    j["seed"] = cfg.seed;
    j["subsamples"] = cfg.subsamples;
    j["pi_thr"] = cfg.pi_thr;
    j["pfer"] = opt_json(cfg.pfer);
    j["threshold"] = cfg.threshold;
    j["holdout"] = opt_json(cfg.holdout);
    j["test_n"] = cfg.test_n ? json(*cfg.test_n) : json(nullptr);
    j["n_boot"] = cfg.n_boot;
    j["ci_level"] = cfg.ci_level;
    return j;
}

inline json header_json(const RunConfig& cfg) {
    return {{"schema_version", kSchemaVersion}, {"seed", cfg.seed}};
}

inline json choice_json(const LambdaChoice& c) {
    return {{"kind", to_string(c.kind)}, {"lambda", opt_json(c.lambda)}, {"phi", opt_json(c.phi_at_lambda)}, {"threshold", c.threshold}};
}

inline json set_json(const StableSet& s, const std::vector<std::string>& names, std::optional<double> lambda) {
    json members = json::array();
    for (const auto& m : s.members) members.push_back({{"name", names[m.index]}, {"index", m.index}, {"frequency", m.frequency}});
    json j = {{"rule", to_string(s.rule)}, {"pi_thr", s.pi_thr}, {"members", members}};
    j["lambda"] = opt_json(lambda);
    return j;
}

inline json calibration_json(const CalibrationResult& c) {
    return {{"mode", to_string(c.mode)}, {"pi_thr", c.pi_thr}, {"pfer_bound", c.pfer_bound}, {"q_used", c.q_used}, {"p", c.p}, {"lambda", c.lambda}};
}

inline std::string curve_csv(const std::vector<StabilityReport>& curve) {
    std::string out = "lambda,phi,ci_low,ci_high,band\n";
    for (const auto& r : curve) {
        out += csv::format(r.lambda) + ',' + opt_csv(r.phi) + ',' + opt_csv(r.ci_low) + ',' + opt_csv(r.ci_high) + ',' + to_string(r.band) + '\n';
    }
    return out;
}

inline std::string trace_csv(const ConvergenceTrace& t) {
    std::string out = "t,phi,ci_low,ci_high\n";
    for (std::size_t k = 0; k < t.t_values.size(); ++k) {
        out += std::to_string(t.t_values[k]) + ',' + opt_csv(t.phi_t[k]) + ',' + opt_csv(t.ci_low_t[k]) + ',' + opt_csv(t.ci_high_t[k]) + '\n';
    }
    return out;
}

inline std::string frequencies_csv(const std::vector<SelectionFrequencies>& freqs, const std::vector<std::string>& names) {
    std::string out = "lambda";
    for (const auto& n : names) out += ',' + csv::escape(n);
    out += '\n';
    for (const auto& f : freqs) {
        out += csv::format(f.lambda);
        for (double v : f.freq) out += ',' + csv::format(v);
        out += '\n';
    }
    return out;
}

inline std::string diagnostics_log(const Diagnostics& diag) {
    std::string out;
    for (const auto& w : diag.warnings) out += "warning: " + w + '\n';
    return out;
}

inline std::filesystem::path ensure_out(const RunConfig& cfg) {
    std::filesystem::path dir(cfg.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IngestionError("cannot create output directory '" + cfg.out + "': " + ec.message());
    return dir;
}

inline SelectionRule rule_for(ChoiceKind k) { return k == ChoiceKind::stable ? SelectionRule::stable : SelectionRule::stable_1sd; }

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
    const auto spec = synthetic_spec(cfg);
    const auto dir = ensure_out(cfg);
    const auto d = simulate(spec);
    save_csv(d, (dir / "dataset.csv").string());
    json meta = header_json(cfg);
    meta["spec"] = {{"n", spec.n}, {"p", spec.p}, {"rho", spec.rho}, {"beta", cfg.beta}, {"noise_sd", spec.noise_sd}};
    meta["response"] = "y";
    write_json(dir / "metadata.json", meta);
    log << "wrote " << (dir / "dataset.csv").string() << " (" << d.n() << " x " << d.p() + 1 << ")\n";
    return ok;
}

inline int cmd_run(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
    const auto dir = ensure_out(cfg);
    auto res = run_pipeline(cfg, false, true);
    const auto& names = res.data.train.names;

    std::vector<SelectionFrequencies> freqs;
    freqs.reserve(res.run.matrices.size());
    for (const auto& m : res.run.matrices) freqs.push_back(selection_frequencies(m));
    const auto& chosen = res.run.matrices[res.choice_index];
    const double q = average_selected(chosen);

    json meta = header_json(cfg);
    meta["config"] = config_json(cfg);
    meta["n"] = res.data.train.n();
    meta["p"] = res.data.train.p();
    meta["standardized"] = res.data.train.standardized;
    meta["grid_source"] = to_string(res.grid.source);
    write_json(dir / "metadata.json", meta);

    csv::write_file((dir / "stability_curve.csv").string(), curve_csv(res.curve));
    csv::write_file((dir / "frequencies.csv").string(), frequencies_csv(freqs, names));
    csv::write_file((dir / "selection_matrix.csv").string(), selection_matrix_csv(chosen, names));

    json choices = header_json(cfg);
    choices["lambda_min"] = res.cv.lambda_min;
    choices["lambda_1se"] = res.cv.lambda_1se;
    choices["lambda_stable"] = choice_json(res.lambda_stable);
    choices["lambda_stable_1sd"] = res.lambda_stable_1sd ? choice_json(*res.lambda_stable_1sd) : json(nullptr);
    choices["choice"] = choice_json(res.choice);
    choices["grid_source"] = to_string(res.grid.source);
    write_json(dir / "lambda_choices.json", choices);

    json sel = header_json(cfg);
    sel["mb_best_case"] = set_json(mb_stable_set(freqs, cfg.pi_thr, &res.diag), names, std::nullopt);
    sel["stable"] = set_json(stable_stability_set(freqs[res.choice_index], cfg.pi_thr, rule_for(res.choice.kind)), names, res.choice.lambda);
    write_json(dir / "selection.json", sel);

    int code = ok;
    try {
        const CalibrationTarget target = cfg.pfer ? CalibrationTarget{FixPfer{*cfg.pfer}} : CalibrationTarget{FixThreshold{cfg.pi_thr}};
        json cal = header_json(cfg);
        cal.update(calibration_json(calibrate_pfer(q, chosen.p(), target, chosen.lambda())));
        write_json(dir / "calibration.json", cal);
    } catch (const InfeasibleError& e) {
        res.diag.warn(e.what());
        err << "infeasible calibration: " << e.what() << '\n';
        code = infeasible;
    }
    csv::write_file((dir / "diagnostics.log").string(), diagnostics_log(res.diag));
    log << "lambda choice: " << to_string(res.choice.kind) << " = " << csv::format(*res.choice.lambda) << " (phi = " << opt_csv(res.choice.phi_at_lambda)
        << ")\n";
    return code;
}

inline int cmd_trace(const RunConfig& cfg, std::ostream& log) {
    const auto dir = ensure_out(cfg);
    SelectionMatrix matrix;
    json out = header_json(cfg);
    Diagnostics diag;
    if (!cfg.matrix_file.empty()) {
        auto parsed = parse_selection_matrix_csv(csv::read_file(cfg.matrix_file), cfg.matrix_lambda.value_or(0.0), cfg.matrix_file);
        matrix = std::move(parsed.first);
        if (matrix.B() < 2) throw ParameterError("trace needs B >= 2 rows in the selection matrix");
        out["source"] = cfg.matrix_file;
        out["kind"] = "matrix-file";
    } else {
        auto res = run_pipeline(cfg, false, false);
        matrix = res.run.matrices[res.choice_index];
        out["kind"] = to_string(res.choice.kind);
        diag = res.diag;
    }
    const auto trace = convergence_trace(matrix, cfg.ci_level, cfg.n_boot, cfg.seed, cfg.threads);
    const auto cutoff = suggest_cutoff(trace, cfg.window, cfg.eps);
    csv::write_file((dir / "trace.csv").string(), trace_csv(trace));
    out["lambda"] = matrix.lambda();
    out["B"] = matrix.B();
    out["window"] = cfg.window;
    out["eps"] = cfg.eps;
    out["cutoff"] = cutoff;
    out["phi_final"] = opt_json(trace.phi_t.back());
    write_json(dir / "cutoff.json", out);
    if (!diag.empty()) csv::write_file((dir / "diagnostics.log").string(), diagnostics_log(diag));
    log << "suggested cutoff B* = " << cutoff << '\n';
    return ok;
}

inline int cmd_pareto(const RunConfig& cfg, std::ostream& log) {
    const auto dir = ensure_out(cfg);
    auto res = run_pipeline(cfg, true, false);
    const auto acc = evaluate_mse(res.data.train, res.grid, *res.run.fits, *res.data.test);
    const auto analysis = pareto_analysis(res.curve, acc, res.choice);

    std::vector<char> on_front(res.grid.size(), 0);
    for (const auto& pt : analysis.points) on_front[pt.grid_index] = pt.on_front ? 1 : 0;
    std::string table = "lambda,phi,mse,on_front\n";
    for (std::size_t l = 0; l < res.grid.size(); ++l) {
        table += csv::format(res.grid[l]) + ',' + opt_csv(res.curve[l].phi) + ',' + csv::format(acc.mse[l]) + ',' + (on_front[l] ? "1" : "0") + '\n';
    }
    csv::write_file((dir / "pareto.csv").string(), table);

    json j = header_json(cfg);
    j["lambda_pareto"] = opt_json(analysis.lambda_pareto);
    j["lambda_choice"] = choice_json(res.choice);
    j["lambda_min"] = res.cv.lambda_min;
    j["lambda_1se"] = res.cv.lambda_1se;
    j["n_test"] = acc.n_test;
    json front = json::array();
    for (auto k : analysis.front) front.push_back(analysis.points[k].lambda);
    j["front"] = front;
    if (analysis.corollary1) {
        const auto& c = *analysis.corollary1;
        j["corollary1"] = {{"lambda", c.lambda_stable},
                           {"stable_nondecreasing_before", c.stable_nondecreasing_before},
                           {"loss_nondecreasing_after", c.loss_nondecreasing_after},
                           {"lambda_stable_on_front", c.lambda_stable_on_front},
                           {"max_stability_violation", c.max_stability_violation},
                           {"max_loss_violation", c.max_loss_violation},
                           {"contract_violation", c.contract_violation()}};
    } else {
        j["corollary1"] = nullptr;
    }
    write_json(dir / "pareto.json", j);
    csv::write_file((dir / "diagnostics.log").string(), diagnostics_log(res.diag));
    log << "lambda_pareto = " << opt_csv(analysis.lambda_pareto) << ", " << to_string(res.choice.kind) << " = " << csv::format(*res.choice.lambda) << '\n';
    return ok;
}

// ---------------------------------------------------------------------------
// Entry point

namespace detail {

inline void add_input_flags(CLI::App& app, RunConfig& cfg) {
    app.add_option("--input", cfg.input, "CSV file; omit to simulate synthetic data");
    app.add_option("--response", cfg.response, "Response column: header name, or zero-based index with --header false");
    app.add_option("--header", cfg.header, "Whether the CSV has a header row")->default_str("true");
    app.add_option("--n", cfg.n, "Synthetic sample size")->check(CLI::PositiveNumber);
    app.add_option("--p", cfg.p, "Synthetic predictor count")->check(CLI::PositiveNumber);
    app.add_option("--rho", cfg.rho, "AR(1) correlation in [0, 1)")->check(CLI::Range(0.0, 1.0));
    app.add_option("--beta", cfg.beta, "Leading coefficients, comma separated; the rest are zero");
    app.add_option("--noise-sd", cfg.noise_sd, "Noise standard deviation")->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.seed, "Master seed");
    app.add_option("--out", cfg.out, "Output directory");
}

inline void add_pipeline_flags(CLI::App& app, RunConfig& cfg) {
    add_input_flags(app, cfg);
    app.add_flag("!--no-standardize", cfg.standardize, "Skip column standardization");
    app.add_option("--grid-length", cfg.grid_length, "Number of grid values")->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
    app.add_option("--grid-ratio", cfg.grid_ratio, "Smallest / largest grid value (default 1e-4 if n > p else 1e-2)")->check(CLI::Range(1e-300, 1.0));
    app.add_option("--lambda-file", cfg.lambda_file, "User grid: one value per line");
    app.add_option("--folds", cfg.folds, "Cross-validation folds")->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
    app.add_option("--B", cfg.B, "Number of subsamples");
    app.add_option("--subsamples", cfg.subsamples, "shared | per-lambda")->check(CLI::IsMember({"shared", "per-lambda"}));
    app.add_option("--threads", cfg.threads, "Worker threads (results do not depend on it)")->check(CLI::Range(1u, 1024u));
    app.add_option("--pi-thr", cfg.pi_thr, "Selection threshold in (0.5, 1]");
    app.add_option("--pfer", cfg.pfer, "Target PFER; solves for the threshold");
    app.add_option("--threshold", cfg.threshold, "Stability required for lambda_stable");
    app.add_option("--holdout", cfg.holdout, "Test fraction carved from CSV input before subsampling")->check(CLI::Range(0.0, 1.0));
    app.add_option("--test-n", cfg.test_n, "Synthetic test-set size (default 25)")->check(CLI::PositiveNumber);
    app.add_option("--n-boot", cfg.n_boot, "Bootstrap resamples per interval")->check(CLI::PositiveNumber);
    app.add_option("--ci-level", cfg.ci_level, "Confidence level")->check(CLI::Range(0.0, 1.0));
}

} // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Stability selection with overall-stability based regularization choice"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* sim = app.add_subcommand("simulate", "Write a synthetic AR(1) dataset as CSV");
    detail::add_input_flags(*sim, cfg);
    auto* run_cmd = app.add_subcommand("run", "Stability selection over the grid; curves, choices, sets, calibration");
    detail::add_pipeline_flags(*run_cmd, cfg);
    auto* trace = app.add_subcommand("trace", "Stability over sequential subsampling at the chosen lambda");
    detail::add_pipeline_flags(*trace, cfg);
    trace->add_option("--window", cfg.window, "Cutoff window")->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
    trace->add_option("--eps", cfg.eps, "Cutoff tolerance")->check(CLI::PositiveNumber);
    trace->add_option("--matrix", cfg.matrix_file, "Selection matrix CSV (as written by run) instead of a fresh run");
    trace->add_option("--lambda", cfg.matrix_lambda, "Lambda recorded for --matrix");
    auto* pareto = app.add_subcommand("pareto", "Stability versus held-out accuracy over the grid");
    detail::add_pipeline_flags(*pareto, cfg);

    std::vector<std::string> argv_store{"stabsel"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        log << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp& e) {
        log << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return usage;
    }

    try {
        if (sim->parsed()) return cmd_simulate(cfg, log);
        if (run_cmd->parsed()) return cmd_run(cfg, log, err);
        if (trace->parsed()) return cmd_trace(cfg, log);
        if (pareto->parsed()) return cmd_pareto(cfg, log);
        return usage;
    } catch (const InfeasibleError& e) {
        err << "infeasible calibration: " << e.what() << '\n';
        return infeasible;
    } catch (const ParameterError& e) {
        err << "usage error: " << e.what() << '\n';
        return usage;
    } catch (const GridError& e) {
        err << "usage error: " << e.what() << '\n';
        return usage;
    } catch (const IngestionError& e) {
        err << "I/O error: " << e.what() << '\n';
        return io;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return internal;
    }
}

inline int run(int argc, char** argv, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    return run(std::vector<std::string>(argv + 1, argv + argc), log, err);
}

} // namespace stabsel::cli
