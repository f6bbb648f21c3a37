#include "cli.hpp"

#include "rul/decomposition.hpp"
#include "rul/error.hpp"
#include "rul/evaluation.hpp"
#include "rul/features.hpp"
#include "rul/forest.hpp"
#include "rul/mlp.hpp"
#include "rul/random.hpp"
#include "rul/serialization.hpp"
#include "rul/synthgen.hpp"
#include "rul/telemetry.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace rul::cli {
namespace {

namespace fs = std::filesystem;

constexpr int kConfigVersion = 1;

/// Every knob of the pipeline. One flat namespace so a config file is a
/// plain list of `key = value` lines; command-line flags win over the file.
struct PipelineConfig {
    int version = kConfigVersion;
    fs::path data_dir = "data";
    fs::path output_dir = "out";
    fs::path features_dir; // defaults to <output_dir>/features
    double sample_interval_s = 1.0;
    std::string cleaning = "interpolate";
    bool standardize = true;
    std::vector<double> thresholds{0.99, 0.99999};
    std::string holdout;
    std::uint64_t seed = 42;
    unsigned threads = 0;

    SynthConfig synth;
    ForestConfig forest;
    MlpConfig mlp;
    std::size_t pca_k_rf = 2;
    std::size_t pca_k_nn = 5;

    // train / export
    std::string model = "nn";
    std::vector<std::size_t> hidden{5};
    std::optional<std::size_t> pca_k;
    bool from_raw = false;
    fs::path model_file;
    fs::path pca_file;
    std::string experiment;
    fs::path out_file;

    fs::path features_path() const { return features_dir.empty() ? output_dir / "features" : features_dir; }

    ComparisonConfig comparison() const
    {
        ComparisonConfig c;
        c.cleaning = parse_cleaning_policy(cleaning);
        c.standardize = standardize;
        c.pca_k_rf = pca_k_rf;
        c.pca_k_nn = pca_k_nn;
        c.forest = forest;
        c.mlp = mlp;
        c.holdout_id = holdout;
        c.seed = seed;
        c.threads = threads;
        return c;
    }
};

void ensure_directory(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        fail(ErrorKind::IoError, "cannot create directory " + dir.string());
}

std::string format_fixed(double value, int digits)
{
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << value;
    return s.str();
}

// Engineered features for every experiment, either read back from
// `featurize` output or computed from the raw telemetry.
std::vector<FeatureMatrix> load_features(const PipelineConfig& cfg)
{
    if (cfg.from_raw)
        return prepare_features(load_corpus(cfg.data_dir, cfg.sample_interval_s),
                                parse_cleaning_policy(cfg.cleaning));
    std::vector<FeatureMatrix> out;
    for (const auto& frame : load_corpus(cfg.features_path(), cfg.sample_interval_s))
        out.push_back(as_feature_matrix(frame));
    if (out.empty())
        fail(ErrorKind::EmptyInput, "no engineered CSV files in " + cfg.features_path().string());
    return out;
}

void cmd_synth(const PipelineConfig& cfg, std::ostream& out)
{
    auto synth = cfg.synth;
    synth.seed = cfg.seed;
    synth.sample_interval_s = cfg.sample_interval_s;
    const auto corpus = generate_corpus(synth);
    ensure_directory(cfg.data_dir);
    for (const auto& frame : corpus)
        write_experiment(frame, cfg.data_dir / (frame.experiment_id + ".csv"));
    out << "wrote " << corpus.size() << " experiments x " << synth.rows_per_experiment << " rows to "
        << cfg.data_dir.string() << '\n';
}

void cmd_validate(const PipelineConfig& cfg, std::ostream& out)
{
    const auto corpus = load_corpus(cfg.data_dir, cfg.sample_interval_s);
    if (corpus.empty())
        fail(ErrorKind::EmptyInput, "no CSV files in " + cfg.data_dir.string());
    out << std::left << std::setw(16) << "experiment" << std::right << std::setw(10) << "rows"
        << std::setw(10) << "missing" << std::setw(12) << "non-finite" << std::setw(14)
        << "negative-resp" << '\n';
    std::size_t defects = 0;
    for (const auto& frame : corpus) {
        const auto r = validate_frame(frame);
        out << std::left << std::setw(16) << r.experiment_id << std::right << std::setw(10) << r.row_count
            << std::setw(10) << r.missing_cells << std::setw(12) << r.non_finite_cells << std::setw(14)
            << r.negative_response_rows << '\n';
        defects += r.missing_cells + r.non_finite_cells + r.negative_response_rows;
    }
    out << (defects == 0 ? "corpus is clean\n" : "corpus has " + std::to_string(defects) + " defects\n");
}

void cmd_featurize(const PipelineConfig& cfg, std::ostream& out)
{
    const auto corpus = load_corpus(cfg.data_dir, cfg.sample_interval_s);
    const auto features = prepare_features(corpus, parse_cleaning_policy(cfg.cleaning));
    const auto dir = cfg.features_path();
    ensure_directory(dir);
    for (const auto& f : features)
        write_features(f, dir / (f.experiment_id + ".csv"), cfg.sample_interval_s);
    out << "wrote " << features.size() << " engineered files to " << dir.string() << '\n';
}

void cmd_correlate(const PipelineConfig& cfg, std::ostream& out)
{
    const auto features = load_features(cfg);
    const auto corr = correlation(stack(features));
    ensure_directory(cfg.output_dir);
    const auto path = cfg.out_file.empty() ? cfg.output_dir / "correlation.csv" : cfg.out_file;
    write_correlation(corr, path);
    double lowest = 1.0;
    for (double v : corr.values.data())
        lowest = std::min(lowest, v);
    out << "wrote " << corr.values.rows() << "x" << corr.values.cols() << " correlation matrix to "
        << path.string() << " (min entry " << format_fixed(lowest, 4) << ")\n";
}

void cmd_pca(const PipelineConfig& cfg, std::ostream& out)
{
    auto features = load_features(cfg);
    if (!cfg.holdout.empty())
        std::erase_if(features, [&](const FeatureMatrix& f) { return f.experiment_id == cfg.holdout; });
    const auto model = fit_pca(stack(features), cfg.standardize);
    ensure_directory(cfg.output_dir);
    write_text(cfg.output_dir / "pca_model.json", pca_to_json(model));

    std::ofstream curve(cfg.output_dir / "explained_variance.csv", std::ios::trunc);
    if (!curve)
        fail(ErrorKind::IoError, "cannot write explained_variance.csv");
    curve << "component,eigenvalue,explained_variance_ratio,cumulative_ratio\n";
    const auto cumulative = model.cumulative_ratio();
    for (std::size_t k = 0; k < model.dimension(); ++k)
        curve << k + 1 << ',' << format_double(model.eigenvalues[k]) << ','
              << format_double(model.explained_variance_ratio[k]) << ',' << format_double(cumulative[k])
              << '\n';

    out << "fitted PCA on " << model.fit_rows << " rows (" << (model.standardize ? "standardized" : "raw")
        << ")\n";
    for (double t : cfg.thresholds)
        out << "components for " << format_fixed(t * 100.0, 3) << "% variance: "
            << select_components(model, t) << '\n';
}

struct PreparedSplit {
    SplitPlan split;
    FeatureMatrix train;
    FeatureMatrix test;
    PcaModel pca;
};

PreparedSplit prepare_split(const PipelineConfig& cfg, const Corpus& corpus)
{
    PreparedSplit s;
    const auto holdout = cfg.holdout.empty() ? default_holdout(corpus) : cfg.holdout;
    s.split = split_by_experiment(corpus, holdout);
    const auto features = prepare_features(corpus, parse_cleaning_policy(cfg.cleaning));
    s.train = pool(features, s.split.train_ids);
    s.test = pool(features, s.split.test_ids);
    s.pca = cfg.pca_file.empty() ? fit_pca(s.train, cfg.standardize) : pca_from_json(read_text(cfg.pca_file));
    return s;
}

void cmd_train(const PipelineConfig& cfg, std::ostream& out)
{
    const auto corpus = load_corpus(cfg.data_dir, cfg.sample_interval_s);
    const auto prepared = prepare_split(cfg, corpus);
    ensure_directory(cfg.output_dir);

    EvalReport report;
    std::string document;
    if (cfg.model == "rf") {
        const auto k = cfg.pca_k.value_or(cfg.pca_k_rf);
        const auto x_train = transform(prepared.pca, prepared.train, k);
        auto forest_config = cfg.forest;
        forest_config.seed = derive_seed(cfg.seed, 1);
        const auto start = std::chrono::steady_clock::now();
        const auto model = fit_forest(x_train, prepared.train.response, forest_config, cfg.threads);
        report.training_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.model_name = "RF";
        report.input_dim = k;
        report.train_mse = mse(predict_forest(model, x_train), prepared.train.response);
        report.predicted = predict_forest(model, transform(prepared.pca, prepared.test, k));
        document = forest_to_json(model);
    } else if (cfg.model == "nn") {
        const auto k = cfg.pca_k.value_or(cfg.pca_k_nn);
        const auto x_train = transform(prepared.pca, prepared.train, k);
        auto mlp_config = cfg.mlp;
        mlp_config.hidden_layers = cfg.hidden;
        mlp_config.input_dim = k;
        const auto arch = reference_architectures();
        const auto it = std::find(arch.begin(), arch.end(), cfg.hidden);
        // Same seed stream as `compare` for the reference layouts.
        mlp_config.seed = derive_seed(cfg.seed, 100 + static_cast<std::uint64_t>(it - arch.begin()));
        const auto start = std::chrono::steady_clock::now();
        const auto model = train(init_mlp(mlp_config), x_train, prepared.train.response);
        report.training_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.model_name = mlp_config.label();
        report.input_dim = k;
        report.train_mse = model.history.back();
        report.predicted = predict_mlp(model, transform(prepared.pca, prepared.test, k));
        document = mlp_to_json(model);
    } else {
        fail(ErrorKind::InvalidConfig, "--model must be 'rf' or 'nn', got '" + cfg.model + "'");
    }
    report.actual = prepared.test.response;
    report.test_mse = mse(report.predicted, report.actual);

    const auto slug = model_slug(report.model_name);
    write_text(cfg.output_dir / (slug + ".json"), document);
    if (cfg.pca_file.empty())
        write_text(cfg.output_dir / "pca_model.json", pca_to_json(prepared.pca));
    export_fit_series(report, cfg.output_dir / ("fit_" + slug + ".csv"));
    out << report.model_name << ": train MSE " << format_fixed(report.train_mse, 1) << ", test MSE "
        << format_fixed(report.test_mse, 1) << " on " << prepared.split.test_ids.front() << " ("
        << format_fixed(report.training_seconds, 1) << " s)\n";
}

void cmd_compare(const PipelineConfig& cfg, const CLI::App& app, std::ostream& out)
{
    const auto corpus = load_corpus(cfg.data_dir, cfg.sample_interval_s);
    const auto result = run_comparison(corpus, cfg.comparison());
    ensure_directory(cfg.output_dir);

    const auto table = format_comparison_table(result);
    write_text(cfg.output_dir / "comparison.txt", table);
    write_comparison_csv(result, cfg.output_dir / "comparison.csv");
    write_text(cfg.output_dir / "pca_model.json", pca_to_json(result.pca));
    write_text(cfg.output_dir / "rf.json", forest_to_json(result.forest));
    for (const auto& network : result.networks)
        write_text(cfg.output_dir / (model_slug(network.config.label()) + ".json"), mlp_to_json(network));
    for (const auto& report : result.reports)
        export_fit_series(report, cfg.output_dir / ("fit_" + model_slug(report.model_name) + ".csv"));
    write_text(cfg.output_dir / "run_config.toml", app.config_to_str(true, false));
    out << table;
}

void cmd_export(const PipelineConfig& cfg, std::ostream& out)
{
    if (cfg.model_file.empty())
        fail(ErrorKind::InvalidConfig, "export needs --model-file");
    const auto text = read_text(cfg.model_file);
    const auto pca_path = cfg.pca_file.empty() ? cfg.output_dir / "pca_model.json" : cfg.pca_file;
    const auto pca = pca_from_json(read_text(pca_path));

    const auto corpus = load_corpus(cfg.data_dir, cfg.sample_interval_s);
    const auto id = cfg.experiment.empty()
                        ? (cfg.holdout.empty() ? default_holdout(corpus) : cfg.holdout)
                        : cfg.experiment;
    const auto it = std::find_if(corpus.begin(), corpus.end(),
                                 [&](const TelemetryFrame& f) { return f.experiment_id == id; });
    if (it == corpus.end())
        fail(ErrorKind::UnknownExperiment, "experiment '" + id + "' is not in " + cfg.data_dir.string());
    const auto features = featurize(clean_frame(*it, parse_cleaning_policy(cfg.cleaning)));

    EvalReport report;
    report.actual = features.response;
    const auto kind = model_kind(text);
    if (kind == "random_forest") {
        const auto model = forest_from_json(text);
        report.model_name = "RF";
        report.predicted = predict_forest(model, transform(pca, features, model.input_dim));
    } else if (kind == "mlp") {
        const auto model = mlp_from_json(text);
        report.model_name = model.config.label();
        report.predicted = predict_mlp(model, transform(pca, features, model.config.input_dim));
    } else {
        fail(ErrorKind::SchemaMismatch, cfg.model_file.string() + " is not a forest or network model");
    }
    report.test_mse = mse(report.predicted, report.actual);

    ensure_directory(cfg.output_dir);
    const auto path = cfg.out_file.empty()
                          ? cfg.output_dir / ("fit_" + model_slug(report.model_name) + "_" + id + ".csv")
                          : cfg.out_file;
    export_fit_series(report, path);
    out << "wrote " << report.actual.size() << " rows to " << path.string() << " (MSE "
        << format_fixed(report.test_mse, 1) << ")\n";
}

int exit_code_for(ErrorKind kind)
{
    switch (category_of(kind)) {
    case ErrorCategory::Config: return kConfigError;
    case ErrorCategory::Data: return kDataError;
    case ErrorCategory::Numerical: return kNumericalError;
    case ErrorCategory::Io: return kIoError;
    }
    return kDataError;
}

void add_options(CLI::App& app, PipelineConfig& cfg)
{
    app.set_config("--config", "", "Read options from a flat key = value config file");
    app.add_option("--version", cfg.version, "Config format version")->capture_default_str();
    app.add_option("--data-dir", cfg.data_dir, "Directory of per-experiment telemetry CSVs")
        ->capture_default_str();
    app.add_option("--output-dir", cfg.output_dir, "Directory for reports and models")->capture_default_str();
    app.add_option("--features-dir", cfg.features_dir, "Engineered CSVs (default <output-dir>/features)");
    app.add_option("--sample-interval", cfg.sample_interval_s, "Seconds between telemetry rows")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--cleaning", cfg.cleaning, "Cleaning policy")
        ->capture_default_str()
        ->check(CLI::IsMember({"drop", "interpolate"}));
    app.add_option("--standardize", cfg.standardize, "z-score features before PCA")->capture_default_str();
    app.add_option("--thresholds", cfg.thresholds, "Explained-variance thresholds to report")
        ->delimiter(',')
        ->capture_default_str();
    app.add_option("--holdout", cfg.holdout, "Held-out experiment id (default: last id)");
    app.add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
    app.add_option("--threads", cfg.threads, "Worker threads for tree training (0 = all cores)")
        ->capture_default_str();

    app.add_option("--experiments", cfg.synth.n_experiments, "synth: number of experiments")
        ->capture_default_str();
    app.add_option("--rows", cfg.synth.rows_per_experiment, "synth: rows per experiment")
        ->capture_default_str();
    app.add_option("--latent-factors", cfg.synth.latent_factor_count, "synth: latent load signals")
        ->capture_default_str();
    app.add_option("--noise", cfg.synth.noise_scale, "synth: relative noise level")->capture_default_str();
    app.add_option("--uniform-fraction", cfg.synth.response_uniform_fraction,
                   "synth: share of flights that end near zero remaining time")
        ->capture_default_str();

    app.add_option("--pca-k-rf", cfg.pca_k_rf, "Principal components fed to the forest")->capture_default_str();
    app.add_option("--pca-k-nn", cfg.pca_k_nn, "Principal components fed to the networks")
        ->capture_default_str();
    app.add_option("--rf-trees", cfg.forest.n_trees)->capture_default_str();
    app.add_option("--rf-max-depth", cfg.forest.max_depth)->capture_default_str();
    app.add_option("--rf-min-leaf", cfg.forest.min_samples_leaf)->capture_default_str();
    app.add_option("--rf-features", cfg.forest.feature_subsample, "Features tried per split (0 = all)")
        ->capture_default_str();
    app.add_option("--rf-bootstrap", cfg.forest.bootstrap)->capture_default_str();
    app.add_option("--nn-learning-rate", cfg.mlp.learning_rate)->capture_default_str();
    app.add_option("--nn-momentum", cfg.mlp.momentum)->capture_default_str();
    app.add_option("--nn-batch-size", cfg.mlp.batch_size)->capture_default_str();
    app.add_option("--nn-epochs", cfg.mlp.epochs)->capture_default_str();
    app.add_option("--nn-patience", cfg.mlp.early_stop_patience, "Early-stop patience (0 = off)")
        ->capture_default_str();

    app.add_option("--model", cfg.model, "train: model family")
        ->capture_default_str()
        ->check(CLI::IsMember({"rf", "nn"}));
    app.add_option("--hidden", cfg.hidden, "train: hidden layer widths, e.g. 5,3")
        ->delimiter(',')
        ->capture_default_str();
    app.add_option("--pca-k", cfg.pca_k, "train: override the component count");
    app.add_flag("--from-raw", cfg.from_raw, "correlate/pca: featurize --data-dir instead of reading --features-dir");
    app.add_option("--model-file", cfg.model_file, "export: serialized model");
    app.add_option("--pca-file", cfg.pca_file, "train/export: serialized PCA model");
    app.add_option("--experiment", cfg.experiment, "export: experiment to predict");
    app.add_option("--out", cfg.out_file, "correlate/export: output file");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Remaining flight time prediction from battery telemetry"};
    app.name(args.empty() ? "rul" : fs::path(args.front()).filename().string());
    app.require_subcommand(1);
    app.fallthrough();

    PipelineConfig cfg;
    add_options(app, cfg);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic telemetry corpus into --data-dir");
    auto* validate = app.add_subcommand("validate", "Report data defects per experiment");
    auto* featurize_cmd = app.add_subcommand("featurize", "Write cumulative-AUC feature CSVs");
    auto* correlate = app.add_subcommand("correlate", "Write the predictor correlation matrix");
    auto* pca = app.add_subcommand("pca", "Fit PCA and write the model and explained-variance curve");
    auto* train_cmd = app.add_subcommand("train", "Train one model on the training experiments");
    auto* compare = app.add_subcommand("compare", "Run the forest vs network comparison");
    auto* export_cmd = app.add_subcommand("export", "Write a goodness-of-fit series for a saved model");

    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return e.get_exit_code() == 0 ? kOk : kConfigError;
    }

    try {
        if (cfg.version != kConfigVersion)
            fail(ErrorKind::InvalidConfig, "unsupported config version " + std::to_string(cfg.version));
        if (synth->parsed())
            cmd_synth(cfg, out);
        else if (validate->parsed())
            cmd_validate(cfg, out);
        else if (featurize_cmd->parsed())
            cmd_featurize(cfg, out);
        else if (correlate->parsed())
            cmd_correlate(cfg, out);
        else if (pca->parsed())
            cmd_pca(cfg, out);
        else if (train_cmd->parsed())
            cmd_train(cfg, out);
        else if (compare->parsed())
            cmd_compare(cfg, app, out);
        else if (export_cmd->parsed())
            cmd_export(cfg, out);
        return kOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
}

} // namespace rul::cli
