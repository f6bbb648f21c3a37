#include "rul/evaluation.hpp"

#include "rul/error.hpp"
#include "rul/features.hpp"
#include "rul/numeric.hpp"
#include "rul/random.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace rul {
namespace {

template <typename F>
auto run_stage(const char* stage, F&& body) -> decltype(body())
{
    try {
        return body();
    } catch (const Error& e) {
        if (!e.stage().empty())
            throw;
        throw e.with_stage(stage);
    }
}

template <typename F>
double time_seconds(F&& body)
{
    const auto start = std::chrono::steady_clock::now();
    body();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool same_model_stats(const PcaModel& a, const PcaModel& b)
{
    return a.feature_means == b.feature_means && a.feature_scales == b.feature_scales &&
           a.components == b.components && a.eigenvalues == b.eigenvalues;
}

} // namespace

SplitPlan split_by_experiment(const Corpus& corpus, std::span<const std::string> holdout_ids)
{
    if (holdout_ids.empty())
        fail(ErrorKind::UnknownExperiment, "no holdout experiment given");
    for (const auto& id : holdout_ids) {
        const bool present = std::any_of(corpus.begin(), corpus.end(),
                                         [&](const TelemetryFrame& f) { return f.experiment_id == id; });
        if (!present)
            fail(ErrorKind::UnknownExperiment, "experiment '" + id + "' is not in the corpus");
    }
    SplitPlan plan;
    for (const auto& frame : corpus) {
        const bool held = std::find(holdout_ids.begin(), holdout_ids.end(), frame.experiment_id) !=
                          holdout_ids.end();
        (held ? plan.test_ids : plan.train_ids).push_back(frame.experiment_id);
    }
    if (plan.train_ids.empty())
        fail(ErrorKind::InsufficientData, "every experiment is held out");
    return plan;
}

SplitPlan split_by_experiment(const Corpus& corpus, const std::string& holdout_id)
{
    return split_by_experiment(corpus, std::span(&holdout_id, 1));
}

std::string default_holdout(const Corpus& corpus)
{
    if (corpus.empty())
        fail(ErrorKind::EmptyInput, "empty corpus");
    return std::max_element(corpus.begin(), corpus.end(),
                            [](const auto& a, const auto& b) { return a.experiment_id < b.experiment_id; })
        ->experiment_id;
}

double mse(std::span<const double> predicted, std::span<const double> actual)
{
    if (predicted.size() != actual.size())
        fail(ErrorKind::LengthMismatch, "mse: " + std::to_string(predicted.size()) + " predictions vs " +
                                            std::to_string(actual.size()) + " actuals");
    if (actual.empty())
        fail(ErrorKind::EmptyInput, "mse of empty vectors");
    CompensatedSum acc;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double d = predicted[i] - actual[i];
        acc.add(d * d);
    }
    return acc.value() / static_cast<double>(actual.size());
}

double mean_predictor_mse(std::span<const double> actual)
{
    if (actual.empty())
        fail(ErrorKind::EmptyInput, "variance of an empty vector");
    const double mean = compensated_sum(actual) / static_cast<double>(actual.size());
    return mse(std::vector<double>(actual.size(), mean), actual);
}

std::vector<FeatureMatrix> prepare_features(const Corpus& corpus, CleaningPolicy policy)
{
    std::vector<FeatureMatrix> out;
    out.reserve(corpus.size());
    for (const auto& frame : corpus) {
        const auto cleaned = run_stage("clean", [&] { return clean_frame(frame, policy); });
        out.push_back(run_stage("featurize", [&] { return featurize(cleaned); }));
    }
    return out;
}

FeatureMatrix pool(std::span<const FeatureMatrix> features, std::span<const std::string> ids)
{
    std::vector<FeatureMatrix> parts;
    for (const auto& f : features)
        if (std::find(ids.begin(), ids.end(), f.experiment_id) != ids.end())
            parts.push_back(f);
    return stack(parts);
}

ComparisonResult run_comparison(const Corpus& corpus, const ComparisonConfig& config)
{
    if (corpus.size() < 2)
        fail(ErrorKind::InsufficientData, "comparison needs at least two experiments");

    ComparisonResult result;
    const std::string holdout = config.holdout_id.empty() ? default_holdout(corpus) : config.holdout_id;
    result.split = run_stage("split", [&] { return split_by_experiment(corpus, holdout); });

    const auto features = prepare_features(corpus, config.cleaning);
    const auto train_set = pool(features, result.split.train_ids);
    const auto test_set = pool(features, result.split.test_ids);

    result.pca = run_stage("pca", [&] { return fit_pca(train_set, config.standardize); });

    // Leakage guard: the fitted statistics must be reproducible from the
    // training experiments alone.
    run_stage("leakage-guard", [&] {
        Corpus train_frames;
        for (const auto& frame : corpus)
            if (std::find(result.split.train_ids.begin(), result.split.train_ids.end(),
                          frame.experiment_id) != result.split.train_ids.end())
                train_frames.push_back(frame);
        const auto again = fit_pca(pool(prepare_features(train_frames, config.cleaning),
                                        result.split.train_ids),
                                   config.standardize);
        if (!same_model_stats(again, result.pca))
            fail(ErrorKind::SchemaMismatch, "PCA statistics depend on held-out rows");
        return 0;
    });

    result.baseline_mse = mean_predictor_mse(test_set.response);

    const auto train_rf = run_stage("pca", [&] { return transform(result.pca, train_set, config.pca_k_rf); });
    const auto test_rf = run_stage("pca", [&] { return transform(result.pca, test_set, config.pca_k_rf); });
    const auto train_nn = run_stage("pca", [&] { return transform(result.pca, train_set, config.pca_k_nn); });
    const auto test_nn = run_stage("pca", [&] { return transform(result.pca, test_set, config.pca_k_nn); });

    {
        auto forest_config = config.forest;
        forest_config.seed = derive_seed(config.seed, 1);
        EvalReport report;
        report.model_name = "RF";
        report.input_dim = config.pca_k_rf;
        report.robustness = "Low";
        report.training_seconds = time_seconds([&] {
            result.forest = run_stage("train-rf",
                                      [&] { return fit_forest(train_rf, train_set.response, forest_config, config.threads); });
        });
        report.predicted = predict_forest(result.forest, test_rf);
        report.actual = test_set.response;
        report.test_mse = mse(report.predicted, report.actual);
        report.train_mse = mse(predict_forest(result.forest, train_rf), train_set.response);
        result.reports.push_back(std::move(report));
    }

    for (std::size_t i = 0; i < config.architectures.size(); ++i) {
        auto mlp_config = config.mlp;
        mlp_config.hidden_layers = config.architectures[i];
        mlp_config.input_dim = config.pca_k_nn;
        mlp_config.seed = derive_seed(config.seed, 100 + i);
        EvalReport report;
        report.model_name = mlp_config.label();
        report.input_dim = config.pca_k_nn;
        report.robustness = "High";
        MlpModel trained;
        const std::string stage = "train-" + model_slug(report.model_name);
        report.training_seconds = time_seconds([&] {
            trained = run_stage(stage.c_str(), [&] { return train(init_mlp(mlp_config), train_nn, train_set.response); });
        });
        report.predicted = predict_mlp(trained, test_nn);
        report.actual = test_set.response;
        report.test_mse = mse(report.predicted, report.actual);
        report.train_mse = trained.history.back();
        result.networks.push_back(std::move(trained));
        result.reports.push_back(std::move(report));
    }
    return result;
}

std::string format_comparison_table(const ComparisonResult& result)
{
    std::ostringstream out;
    out << std::left << std::setw(12) << "Model" << std::right << std::setw(16) << "Test MSE"
        << std::setw(16) << "Train MSE" << std::setw(12) << "Time (s)" << std::setw(11) << "Input Dim"
        << std::setw(12) << "Robustness" << '\n';
    out << std::string(79, '-') << '\n';
    for (const auto& r : result.reports) {
        out << std::left << std::setw(12) << r.model_name << std::right << std::fixed
            << std::setprecision(1) << std::setw(16) << r.test_mse << std::setw(16) << r.train_mse
            << std::setprecision(0) << std::setw(12) << r.training_seconds << std::setw(11)
            << r.input_dim << std::setw(12) << r.robustness << '\n';
    }
    out << std::string(79, '-') << '\n';
    out << "mean-predictor baseline (test response variance): " << std::setprecision(1)
        << result.baseline_mse << '\n';
    out << "train: ";
    for (std::size_t i = 0; i < result.split.train_ids.size(); ++i)
        out << (i ? "," : "") << result.split.train_ids[i];
    out << "  test: ";
    for (std::size_t i = 0; i < result.split.test_ids.size(); ++i)
        out << (i ? "," : "") << result.split.test_ids[i];
    out << '\n';
    return out.str();
}

void write_comparison_csv(const ComparisonResult& result, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        fail(ErrorKind::IoError, "cannot write " + path.string());
    out << "Model,Test MSE,Train MSE,Computational Time (s),Input Dim,Robustness\n";
    for (const auto& r : result.reports) {
        char seconds[32];
        std::snprintf(seconds, sizeof seconds, "%.0f", r.training_seconds);
        out << '"' << r.model_name << "\"," << format_double(r.test_mse) << ','
            << format_double(r.train_mse) << ',' << seconds << ',' << r.input_dim << ','
            << r.robustness << '\n';
    }
    if (!out)
        fail(ErrorKind::IoError, "write failed for " + path.string());
}

void export_fit_series(const EvalReport& report, const std::filesystem::path& path)
{
    if (report.actual.size() != report.predicted.size() || report.actual.empty())
        fail(ErrorKind::LengthMismatch, "fit series needs equal, non-empty actual/predicted vectors");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        fail(ErrorKind::IoError, "cannot write " + path.string());
    out << "row,actual_remaining_time_s,predicted_remaining_time_s\n";
    for (std::size_t i = 0; i < report.actual.size(); ++i)
        out << i << ',' << format_double(report.actual[i]) << ','
            << format_double(report.predicted[i]) << '\n';
    if (!out)
        fail(ErrorKind::IoError, "write failed for " + path.string());
}

FitSeries read_fit_series(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorKind::IoError, "cannot open " + path.string());
    FitSeries series;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream cells(line);
        std::string row, actual, predicted;
        std::getline(cells, row, ',');
        std::getline(cells, actual, ',');
        std::getline(cells, predicted, ',');
        series.actual.push_back(std::stod(actual));
        series.predicted.push_back(std::stod(predicted));
    }
    return series;
}

std::string model_slug(const std::string& model_name)
{
    std::string out;
    for (char ch : model_name) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c))
            out.push_back(static_cast<char>(std::tolower(c)));
        else if (!out.empty() && out.back() != '_')
            out.push_back('_');
    }
    while (!out.empty() && out.back() == '_')
        out.pop_back();
    return out;
}

} // namespace rul
