#pragma once

#include "rul/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace rul {

struct ForestConfig {
    std::size_t n_trees = 50;
    std::size_t max_depth = 16;
    std::size_t min_samples_leaf = 5;
    std::size_t feature_subsample = 0; // 0 means "all input features"
    bool bootstrap = true;
    std::uint64_t seed = 0;

    void validate(std::size_t input_dim) const;
};

struct SplitCandidate {
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
};

/// Best variance-reduction split of `rows` (indices into X/y). Thresholds are
/// midpoints between consecutive distinct values; near-equal gains resolve to
/// the lowest feature, then the lowest threshold. Returns nullopt when no
/// split has positive gain while keeping `min_samples_leaf` rows per side.
std::optional<SplitCandidate> best_split(const Matrix& X, std::span<const double> y,
                                         std::span<const std::size_t> rows,
                                         std::span<const std::size_t> candidate_features,
                                         std::size_t min_samples_leaf);

/// Same search over every row of X.
std::optional<SplitCandidate> best_split(const Matrix& X, std::span<const double> y,
                                         std::span<const std::size_t> candidate_features,
                                         std::size_t min_samples_leaf);

/// Relative gain difference below which two splits count as tied.
inline constexpr double kSplitTieTolerance = 1e-10;

struct TreeNode {
    static constexpr std::int32_t kLeaf = -1;

    std::int32_t feature = kLeaf;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0; // mean training target of the node
    std::uint32_t samples = 0;

    bool is_leaf() const noexcept { return feature == kLeaf; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    double predict(std::span<const double> x) const;
    std::size_t depth() const;
    std::size_t leaf_count() const;
};

struct ForestModel {
    ForestConfig config;
    std::size_t input_dim = 0;
    std::vector<RegressionTree> trees;
};

/// Grows one greedy CART tree on the given (possibly repeated) row indices.
RegressionTree grow_tree(const Matrix& X, std::span<const double> y, std::vector<std::size_t> rows,
                         const ForestConfig& config, std::uint64_t tree_seed);

/// Trains `config.n_trees` trees; tree t draws its bootstrap sample and
/// feature subsets from a stream seeded by (seed, t), so the result does not
/// depend on `threads`. `threads == 0` uses the hardware concurrency.
ForestModel fit_forest(const Matrix& X, std::span<const double> y, const ForestConfig& config,
                       unsigned threads = 0);

std::vector<double> predict_forest(const ForestModel& model, const Matrix& X);

} // namespace rul
