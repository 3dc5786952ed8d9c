// qrep: command-line driver for quantile representations.
#include "quantrep/quantrep.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace quantrep;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kRunSchema = "quantrep.run/1";

/// Parameter settable from the config file and from a flag; flags win.
struct Param {
    std::string key;
    CLI::Option* option = nullptr;
    std::function<void(const json&)> load;
    std::function<void(json&)> store;
};

struct Command {
    CLI::App* app = nullptr;
    std::vector<Param> params;
    std::vector<std::string> required;
    std::string config_path;
    std::string out_dir;

    template <class T>
    CLI::Option* add(const std::string& key, T& var, const std::string& help) {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        auto* opt = app->add_option(flag, var, help)->capture_default_str();
        params.push_back({key, opt, [&var, key](const json& j) { var = j.at(key).get<T>(); },
                          [&var, key](json& j) { j[key] = var; }});
        return opt;
    }

    /// Path parameter that must be set by flag or config.
    CLI::Option* add_path(const std::string& key, std::string& var, const std::string& help) {
        required.push_back(key);
        return add(key, var, help);
    }

    /// Applies config-file values to every parameter not given as a flag and
    /// returns the resolved configuration.
    json resolve(const std::string& name) {
        json file = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ValidationError("cannot open config " + config_path);
            try {
                file = json::parse(in);
            } catch (const json::exception& e) {
                throw ValidationError("config " + config_path + ": " + e.what());
            }
            if (!file.is_object()) throw ValidationError("config must be a JSON object");
            for (const auto& [k, v] : file.items()) {
                const bool known = std::any_of(params.begin(), params.end(), [&](const Param& p) { return p.key == k; });
                if (!known) throw ConfigError("unknown config key '" + k + "' for " + name);
            }
        }
        json resolved;
        resolved["schema"] = kRunSchema;
        resolved["subcommand"] = name;
        for (auto& p : params) {
            if (p.option->count() == 0 && file.contains(p.key)) {
                try {
                    p.load(file);
                } catch (const json::exception& e) {
                    throw ConfigError("config key '" + p.key + "': " + e.what());
                }
            }
            p.store(resolved["params"]);
        }
        for (const auto& key : required) {
            if (resolved["params"][key].get<std::string>().empty()) {
                std::string flag = "--" + key;
                std::replace(flag.begin(), flag.end(), '_', '-');
                throw ValidationError(name + ": " + flag + " is required (flag or config key '" + key + "')");
            }
        }
        return resolved;
    }
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path prepare_out(const std::string& dir, const json& resolved) {
    fs::path out(dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ValidationError("cannot create output directory " + dir + ": " + ec.message());
    write_json(out / "config.json", resolved);
    return out;
}

QuantileGrid make_grid(std::size_t n_anchor, std::size_t n_tau, double lo, double hi) {
    auto g = QuantileGrid::make(n_anchor, n_tau, lo, hi);
    g.validate();
    return g;
}

std::string csv_number(std::optional<double> v) { return v ? detail::format_double(*v) : ""; }

json optional_matrix(const CorrelationMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.dim; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.dim; ++j) row.push_back(m(i, j) ? json(*m(i, j)) : json(nullptr));
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------

struct GenData {
    std::string kind;
    std::uint64_t seed = 0;
    std::size_t n = 200;
    double noise = 0.1;
    std::size_t ood_n = 100;
    std::vector<double> ood_center{8.0, 1.5};
    std::vector<double> centers{0.0, 0.0, 1.0, 1.0};
    std::vector<double> stds{0.1, 0.3, 0.3, 0.11};
    double rotate_deg = 0.0;
    std::vector<double> g_coefficients{1.0, -0.5};
    double g_intercept = 0.2;
    std::string noise_kind = "homoskedastic-gaussian";
    double noise_scale = 1.0;
    double noise_slope = 0.0;
    double feature_low = -3.0;
    double feature_high = 3.0;
    std::string format = "csv";

    void setup(Command& c) {
        c.app->add_option("kind", kind, "two-moons | gaussian-pair | latent")
            ->required()
            ->check(CLI::IsMember({"two-moons", "gaussian-pair", "latent"}));
        c.add("seed", seed, "random seed");
        c.add("n", n, "samples per class (two-moons, gaussian-pair) or in total (latent)");
        c.add("noise", noise, "two-moons noise std");
        c.add("ood_n", ood_n, "two-moons OOD cluster size");
        c.add("ood_center", ood_center, "two-moons OOD cluster center x,y")->delimiter(',')->expected(2);
        c.add("centers", centers, "gaussian-pair centers x0,y0,x1,y1")->delimiter(',')->expected(4);
        c.add("stds", stds, "gaussian-pair stds sx0,sy0,sx1,sy1")->delimiter(',')->expected(4);
        c.add("rotate_deg", rotate_deg, "rotate gaussian-pair features by this angle");
        c.add("g_coefficients", g_coefficients, "latent model coefficients")->delimiter(',');
        c.add("g_intercept", g_intercept, "latent model intercept");
        c.add("noise_kind", noise_kind, "homoskedastic-gaussian | heteroskedastic-gaussian");
        c.add("noise_scale", noise_scale, "latent noise scale");
        c.add("noise_slope", noise_slope, "heteroskedastic noise slope");
        c.add("feature_low", feature_low, "latent feature range low");
        c.add("feature_high", feature_high, "latent feature range high");
        c.add("format", format, "csv | jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    }

    LatentModelSpec latent() const {
        LatentModelSpec s;
        s.g_coefficients = g_coefficients;
        s.g_intercept = g_intercept;
        s.noise_kind = parse_noise_kind(noise_kind);
        s.noise_scale = noise_scale;
        s.noise_slope = noise_slope;
        return s;
    }

    void run(const fs::path& out) const {
        if (format != "csv" && format != "jsonl") throw ConfigError("format must be csv or jsonl");
        if (ood_center.size() != 2) throw ConfigError("ood_center needs 2 values");
        if (centers.size() != 4 || stds.size() != 4) throw ConfigError("centers and stds need 4 values each");
        const auto fmt = format == "jsonl" ? DataFormat::jsonl : DataFormat::csv;
        const std::string ext = format == "jsonl" ? ".jsonl" : ".csv";
        json summary;
        summary["schema"] = kRunSchema;
        if (kind == "two-moons") {
            TwoMoonsConfig cfg;
            cfg.n_per_class = n;
            cfg.noise = noise;
            cfg.ood_n = ood_n;
            cfg.ood_center = {ood_center[0], ood_center[1]};
            cfg.seed = seed;
            auto tm = gen_two_moons(cfg);
            save_dataset(tm.id, (out / ("data" + ext)).string(), fmt);
            save_dataset(tm.ood, (out / ("ood" + ext)).string(), fmt);
            summary["files"] = {"data" + ext, "ood" + ext};
        } else if (kind == "gaussian-pair") {
            const std::array<std::array<double, 2>, 2> c{{{centers[0], centers[1]}, {centers[2], centers[3]}}};
            const std::array<std::array<double, 2>, 2> s{{{stds[0], stds[1]}, {stds[2], stds[3]}}};
            auto ds = gen_gaussian_pair(c, s, n, seed);
            if (rotate_deg != 0.0) ds.features = apply_transform(Transform::orthogonal(radians(rotate_deg)), ds.features);
            save_dataset(ds, (out / ("data" + ext)).string(), fmt);
            summary["files"] = {"data" + ext};
        } else {
            FeatureSampler sampler{feature_low, feature_high};
            auto ds = gen_latent_binary(latent(), n, sampler, seed);
            save_dataset(ds, (out / ("data" + ext)).string(), fmt);
            summary["files"] = {"data" + ext};
        }
        write_json(out / "summary.json", summary);
    }
};

struct FitCommon {
    std::size_t n_anchor = 100;
    std::size_t n_tau = 1000;
    double tau_lo = 0.01;
    double tau_hi = 0.99;
    double l2 = 1e-4;
    std::size_t max_iter = 500;
    double tol = 1e-10;

    void setup(Command& c) {
        c.add("n_anchor", n_anchor, "anchor quantile levels");
        c.add("n_tau", n_tau, "dense quantile levels");
        c.add("tau_lo", tau_lo, "lowest quantile level");
        c.add("tau_hi", tau_hi, "highest quantile level");
        c.add("l2", l2, "L2 penalty of every logistic fit");
        c.add("max_iter", max_iter, "Newton iterations per fit");
        c.add("tol", tol, "gradient tolerance");
    }

    FitConfig fit(std::uint64_t seed) const {
        FitConfig f;
        f.l2_reg = l2;
        f.max_iter = max_iter;
        f.tol = tol;
        f.seed = seed;
        f.validate();
        return f;
    }
};

struct FitQuantile {
    std::string data;
    std::string base_model;
    std::string base = "logistic";
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    bool timings = false;
    FitCommon common;

    void setup(Command& c) {
        c.add_path("data", data, "training dataset (csv or jsonl)");
        c.add("base_model", base_model, "JSON list of base classifiers; fitted when absent");
        c.add("base", base, "logistic | posterior (use the dataset's posterior column)")
            ->check(CLI::IsMember({"logistic", "posterior"}));
        c.add("seed", seed, "random seed");
        c.add("threads", threads, "worker threads for anchor fits");
        common.setup(c);
        c.app->add_flag("--timings", timings, "record wall-clock timings in the manifest");
    }

    void run(const fs::path& out) const {
        using clock = std::chrono::steady_clock;
        const auto t0 = clock::now();
        if (base != "logistic" && base != "posterior") throw ConfigError("base must be logistic or posterior");
        auto ds = load_dataset(data);
        const auto grid = make_grid(common.n_anchor, common.n_tau, common.tau_lo, common.tau_hi);
        QuantileFitOptions opt;
        opt.fit = common.fit(seed);
        opt.threads = threads;
        QuantileModel model;
        double base_seconds = 0.0;
        if (base == "posterior") {
            if (!ds.posterior) throw ValidationError("dataset has no posterior column");
            if (ds.num_classes != 2) throw ValidationError("posterior base needs a binary dataset");
            model = fit_quantile_model(ds, binary_probability_columns(*ds.posterior), grid, opt);
        } else {
            std::vector<LinearClassifier> bases;
            if (!base_model.empty()) {
                std::ifstream in(base_model);
                if (!in) throw ValidationError("cannot open base model " + base_model);
                try {
                    bases = json::parse(in).get<std::vector<LinearClassifier>>();
                } catch (const json::exception& e) {
                    throw ValidationError("base model " + base_model + ": " + e.what());
                }
            } else {
                bases = fit_base_classifiers(ds, opt.fit);
            }
            base_seconds = std::chrono::duration<double>(clock::now() - t0).count();
            model = fit_quantile_model(ds, bases, grid, opt);
            write_json(out / "base.json", json(bases));
        }
        const auto t1 = clock::now();
        save_model(model, out / "model.json");

        auto rep = represent(model, ds.features);
        json manifest;
        manifest["schema"] = kRunSchema;
        manifest["model_file"] = "model.json";
        manifest["seeds"] = {{"fit", seed}};
        manifest["grid"] = {{"n_anchor", common.n_anchor},
                            {"n_tau", common.n_tau},
                            {"tau_lo", common.tau_lo},
                            {"tau_hi", common.tau_hi}};
        manifest["monotonicity_violation_rate"] = monotonicity_violation_rate(rep).aggregate;
        const Matrix base_probs = base == "posterior" ? binary_probability_columns(*ds.posterior)
                                                     : base_probabilities(model_bases(model), ds.features);
        manifest["median_agreement"] = median_agreement(model, ds.features, base_probs);
        std::size_t degenerate = 0;
        for (const auto& c : model.classes) degenerate += static_cast<std::size_t>(std::count(c.degenerate.begin(), c.degenerate.end(), true));
        manifest["degenerate_anchor_fits"] = degenerate;
        if (timings) {
            manifest["timings"] = {{"base_seconds", base_seconds},
                                   {"quantile_seconds", std::chrono::duration<double>(t1 - t0).count() - base_seconds},
                                   {"total_seconds", std::chrono::duration<double>(clock::now() - t0).count()}};
        }
        write_json(out / "manifest.json", manifest);
    }
};

struct OodEval {
    std::string model;
    std::string train;
    std::string id_test;
    std::string ood;
    std::size_t lof_k = 20;
    int random_label_classes = 0;
    std::uint64_t seed = 0;
    FitCommon common;

    void setup(Command& c) {
        c.add("model", model, "quantile model (model.json); not used with random labels");
        c.add_path("train", train, "training dataset (LOF reference)");
        c.add_path("id_test", id_test, "in-distribution test dataset");
        c.add_path("ood", ood, "out-of-distribution dataset");
        c.add("lof_k", lof_k, "LOF neighbours");
        c.add("random_label_classes", random_label_classes, "fit on random pseudo-labels with this many classes (0 = off)");
        c.add("seed", seed, "random seed for pseudo-labels");
        common.setup(c);
    }

    void run(const fs::path& out) const {
        auto tr = load_dataset(train);
        auto id = load_dataset(id_test);
        auto od = load_dataset(ood);
        QuantileModel m;
        if (random_label_classes > 0) {
            m = random_label_quantile_model(tr.features, random_label_classes, common.fit(seed), seed,
                                            make_grid(common.n_anchor, common.n_tau, common.tau_lo, common.tau_hi));
        } else {
            if (model.empty()) throw ValidationError("--model is required unless --random-label-classes is set");
            m = load_model(model);
        }
        auto r = compare_ood_detectors(m, tr.features, id.features, od.features, lof_k);
        json rows = json::array();
        std::string csv = "detector,auroc,tnr_at_tpr95,detection_accuracy\n";
        for (const auto& [name, v] : {std::pair{"baseline", r.baseline}, std::pair{"quantile", r.quantile}}) {
            rows.push_back({{"detector", name},
                            {"auroc", v.auroc},
                            {"tnr_at_tpr95", v.tnr_at_tpr95},
                            {"detection_accuracy", v.detection_accuracy}});
            csv += std::string(name) + "," + detail::format_double(v.auroc) + "," +
                   detail::format_double(v.tnr_at_tpr95) + "," + detail::format_double(v.detection_accuracy) + "\n";
        }
        write_json(out / "ood.json", {{"schema", kRunSchema}, {"lof_k", lof_k}, {"rows", rows}});
        write_text(out / "ood.csv", csv);
    }
};

struct CalibEval {
    std::string model;
    std::string test;
    std::string validation;
    std::string base = "linear";
    std::string corruption = "gaussian-noise";
    std::vector<double> severities{0, 1, 2, 3, 4, 5};
    std::size_t bins = 5;
    std::string binning = "quantile";
    std::uint64_t seed = 0;
    std::vector<double> g_coefficients{1.0, -0.5};
    double g_intercept = 0.2;
    std::string noise_kind = "homoskedastic-gaussian";
    double noise_scale = 1.0;
    double noise_slope = 0.0;

    void setup(Command& c) {
        c.add_path("model", model, "quantile model (model.json)");
        c.add_path("test", test, "clean test dataset");
        c.add("validation", validation, "validation dataset for Platt/isotonic corrections");
        c.add("base", base, "linear (the model's base classifiers) | latent (generator posterior)")
            ->check(CLI::IsMember({"linear", "latent"}));
        c.add("corruption", corruption, "gaussian-noise | feature-scaling | feature-shift");
        c.add("severities", severities, "nondecreasing severities")->delimiter(',');
        c.add("bins", bins, "ECE bins");
        c.add("binning", binning, "quantile | equal-width");
        c.add("seed", seed, "corruption seed");
        c.add("g_coefficients", g_coefficients, "latent model coefficients (base = latent)")->delimiter(',');
        c.add("g_intercept", g_intercept, "latent model intercept");
        c.add("noise_kind", noise_kind, "latent noise kind");
        c.add("noise_scale", noise_scale, "latent noise scale");
        c.add("noise_slope", noise_slope, "latent noise slope");
    }

    void run(const fs::path& out) const {
        auto m = load_model(model);
        auto ts = load_dataset(test);
        std::optional<Dataset> val;
        if (!validation.empty()) val = load_dataset(validation);
        BaseScorer scorer;
        if (base == "latent") {
            LatentModelSpec s;
            s.g_coefficients = g_coefficients;
            s.g_intercept = g_intercept;
            s.noise_kind = parse_noise_kind(noise_kind);
            s.noise_scale = noise_scale;
            s.noise_slope = noise_slope;
            s.validate();
            scorer = latent_oracle_scorer(s);
        } else {
            scorer = linear_base_scorer(model_bases(m));
        }
        SweepConfig cfg;
        cfg.corruption = parse_corruption(corruption);
        cfg.severities = severities;
        cfg.bins = bins;
        cfg.binning = parse_binning(binning);
        cfg.seed = seed;
        auto r = corruption_sweep(m, scorer, ts, cfg, val ? &*val : nullptr);
        std::ostringstream csv;
        write_sweep_csv(csv, r);
        write_text(out / "sweep.csv", csv.str());
        json rows = json::array();
        for (const auto& row : r.rows) {
            rows.push_back({{"severity", row.severity}, {"method", row.method}, {"accuracy", row.accuracy}, {"ece", row.ece}});
        }
        json j{{"schema", kRunSchema}, {"rows", rows}};
        if (r.validation_ece_before) {
            j["validation"] = {{"ece_before", *r.validation_ece_before},
                               {"ece_platt", *r.validation_ece_platt},
                               {"ece_isotonic", *r.validation_ece_isotonic}};
        }
        write_json(out / "calibration.json", j);
    }
};

struct Xcorr {
    std::string model;
    std::string data;

    void setup(Command& c) {
        c.add_path("model", model, "quantile model (model.json)");
        c.add_path("data", data, "training dataset for the raw feature correlation");
    }

    void run(const fs::path& out) const {
        auto m = load_model(model);
        auto ds = load_dataset(data);
        if (ds.dim() != m.dim) throw ValidationError("dataset dimension does not match the model");
        auto coef = coefficient_cross_correlation(m);
        auto raw = raw_feature_correlation(ds.features);
        json pairs = json::array();
        std::string csv = "i,j,raw,coefficient\n";
        for (std::size_t i = 0; i < m.dim; ++i) {
            for (std::size_t j = i + 1; j < m.dim; ++j) {
                pairs.push_back({{"i", i},
                                 {"j", j},
                                 {"raw", raw(i, j) ? json(*raw(i, j)) : json(nullptr)},
                                 {"coefficient", coef(i, j) ? json(*coef(i, j)) : json(nullptr)}});
                csv += std::to_string(i) + "," + std::to_string(j) + "," + csv_number(raw(i, j)) + "," +
                       csv_number(coef(i, j)) + "\n";
            }
        }
        write_json(out / "xcorr.json", {{"schema", kRunSchema},
                                        {"dim", m.dim},
                                        {"coefficient", optional_matrix(coef)},
                                        {"raw", optional_matrix(raw)},
                                        {"pairs", pairs}});
        write_text(out / "xcorr_pairs.csv", csv);
    }
};

struct ShiftMatch {
    std::string model;
    std::string data_t1;
    std::string family = "orthogonal-2d";
    std::uint64_t seed = 0;
    std::string true_angle;
    double angle_step_deg = 1.0;
    double refine_tol_deg = 1e-4;
    double tie_tolerance = 1e-6;
    std::size_t affine_starts = 4;
    FitCommon common;

    void setup(Command& c) {
        c.add_path("model", model, "t0 quantile model (model.json)");
        c.add_path("data_t1", data_t1, "labelled dataset after the shift");
        c.add("family", family, "orthogonal-2d | affine");
        c.add("seed", seed, "search seed");
        c.add("true_angle", true_angle, "known rotation in degrees, copied to the report");
        c.add("angle_step_deg", angle_step_deg, "angle grid step");
        c.add("refine_tol_deg", refine_tol_deg, "golden-section tolerance");
        c.add("tie_tolerance", tie_tolerance, "objective gap counted as a tie");
        c.add("affine_starts", affine_starts, "coordinate-descent starts");
        common.setup(c);
    }

    void run(const fs::path& out) const {
        auto m0 = load_model(model);
        auto t1 = load_dataset(data_t1);
        SearchConfig s;
        s.angle_step_deg = angle_step_deg;
        s.refine_tol_deg = refine_tol_deg;
        s.tie_tolerance = tie_tolerance;
        s.affine_starts = affine_starts;
        s.seed = seed;
        const auto fam = parse_transform_family(family);
        if (m0.grid != make_grid(common.n_anchor, common.n_tau, common.tau_lo, common.tau_hi)) {
            throw ValidationError("grid flags do not match the t0 model's grid");
        }
        auto est = estimate_transform(fam, m0, t1, common.fit(seed), s);
        json ties = json::array();
        for (const auto& c : est.near_ties) ties.push_back({{"inverse", c.inverse}, {"objective", c.objective}});
        json j{{"schema", kRunSchema},
               {"transform", est.transform},
               {"inverse", est.inverse},
               {"objective", est.objective},
               {"ambiguous", est.ambiguous()},
               {"near_ties", ties}};
        std::optional<double> estimated;
        if (fam == TransformFamily::orthogonal_2d) {
            // Forward rotation, with a reflection folded through the model's symmetry axis.
            estimated = wrap_degrees(-equivalent_rotation_deg(est.inverse, m0));
            j["estimated_angle_deg"] = *estimated;
        }
        write_json(out / "transform.json", j);
        write_text(out / "shift_report.csv", "seed,true_angle,estimated_angle,objective\n" + std::to_string(seed) + "," +
                                                 true_angle + "," + csv_number(estimated) + "," +
                                                 detail::format_double(est.objective) + "\n");
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantile representations: data generation, fitting and evaluation"};
    app.require_subcommand(1);

    GenData gen;
    FitQuantile fitq;
    OodEval oode;
    CalibEval cal;
    Xcorr xc;
    ShiftMatch sm;

    // Options bind to members, so commands must not move after setup.
    std::list<std::pair<std::string, Command>> commands;
    auto add = [&](const std::string& name, const std::string& help, auto& impl) {
        auto& c = commands.emplace_back(name, Command{}).second;
        c.app = app.add_subcommand(name, help);
        c.app->add_option("--config", c.config_path, "JSON config; flags override its values");
        c.app->add_option("--out", c.out_dir, "output directory")->required();
        impl.setup(c);
    };
    add("gen-data", "generate a synthetic dataset", gen);
    add("fit-quantile", "fit base classifiers and the quantile model", fitq);
    add("ood-eval", "compare LOF on base logits and on quantile representations", oode);
    add("calib-eval", "ECE under a corruption sweep", cal);
    add("xcorr", "feature cross-correlation from coefficients and from data", xc);
    add("shift-match", "estimate a distribution-shift transform", sm);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        for (auto& [name, c] : commands) {
            if (!c.app->parsed()) continue;
            const json resolved = c.resolve(name);
            const fs::path out = prepare_out(c.out_dir, resolved);
            if (name == "gen-data") gen.run(out);
            else if (name == "fit-quantile") fitq.run(out);
            else if (name == "ood-eval") oode.run(out);
            else if (name == "calib-eval") cal.run(out);
            else if (name == "xcorr") xc.run(out);
            else sm.run(out);
        }
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
