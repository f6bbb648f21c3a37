#pragma once

#include "rul/decomposition.hpp"
#include "rul/forest.hpp"
#include "rul/mlp.hpp"
#include "rul/telemetry.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace rul {

struct SplitPlan {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
};

/// Whole experiments go to one side; nothing is split at row level.
SplitPlan split_by_experiment(const Corpus& corpus, std::span<const std::string> holdout_ids);
SplitPlan split_by_experiment(const Corpus& corpus, const std::string& holdout_id);

/// Lexically last experiment id.
std::string default_holdout(const Corpus& corpus);

double mse(std::span<const double> predicted, std::span<const double> actual);

/// Population variance, i.e. the MSE of always predicting the mean.
double mean_predictor_mse(std::span<const double> actual);

struct EvalReport {
    std::string model_name;
    double test_mse = 0.0;  // seconds^2
    double train_mse = 0.0; // seconds^2
    double training_seconds = 0.0;
    std::size_t input_dim = 0;
    std::string robustness; // "Low" needs heavy reduction, "High" handles more inputs
    std::vector<double> actual;
    std::vector<double> predicted;
};

struct ComparisonConfig {
    CleaningPolicy cleaning = CleaningPolicy::Interpolate;
    bool standardize = true;
    std::size_t pca_k_rf = 2;
    std::size_t pca_k_nn = 5;
    ForestConfig forest;
    MlpConfig mlp; // shared hyper-parameters; hidden_layers/input_dim/seed are overridden
    std::vector<std::vector<std::size_t>> architectures = reference_architectures();
    std::string holdout_id; // empty: lexically last experiment
    std::uint64_t seed = 42;
    unsigned threads = 0;
};

struct ComparisonResult {
    SplitPlan split;
    PcaModel pca;
    ForestModel forest;
    std::vector<MlpModel> networks;
    std::vector<EvalReport> reports; // forest first, then networks in config order
    double baseline_mse = 0.0;       // mean predictor on the test response
};

/// Cleaned, featurized corpus: the input to the modelling stages.
std::vector<FeatureMatrix> prepare_features(const Corpus& corpus, CleaningPolicy policy);

/// Pools the features of the named experiments in corpus order.
FeatureMatrix pool(std::span<const FeatureMatrix> features, std::span<const std::string> ids);

/// clean -> featurize -> PCA fitted on the training experiments only ->
/// random forest on the first `pca_k_rf` scores and one network per
/// architecture on the first `pca_k_nn` scores -> test MSE on the holdout.
/// Errors are rethrown tagged with the failing stage.
ComparisonResult run_comparison(const Corpus& corpus, const ComparisonConfig& config);

std::string format_comparison_table(const ComparisonResult& result);
void write_comparison_csv(const ComparisonResult& result, const std::filesystem::path& path);

/// CSV with columns row, actual_remaining_time_s, predicted_remaining_time_s.
void export_fit_series(const EvalReport& report, const std::filesystem::path& path);

struct FitSeries {
    std::vector<double> actual;
    std::vector<double> predicted;
};
FitSeries read_fit_series(const std::filesystem::path& path);

/// File-system friendly form of a model name ("NN-[5,3]" -> "nn_5_3").
std::string model_slug(const std::string& model_name);

} // namespace rul
