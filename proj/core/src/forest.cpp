#include "rul/forest.hpp"

#include "rul/error.hpp"
#include "rul/random.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <utility>

namespace rul {
namespace {

struct Builder {
    const Matrix& X;
    std::span<const double> y;
    const ForestConfig& config;
    std::size_t feature_count;
    Rng rng;
    RegressionTree tree;

    std::vector<std::size_t> candidate_features()
    {
        std::vector<std::size_t> features(X.cols());
        std::iota(features.begin(), features.end(), 0);
        if (feature_count < features.size()) {
            for (std::size_t i = 0; i < feature_count; ++i) {
                const auto j = i + rng.index(features.size() - i);
                std::swap(features[i], features[j]);
            }
            features.resize(feature_count);
            std::sort(features.begin(), features.end());
        }
        return features;
    }

    std::int32_t build(std::vector<std::size_t> rows, std::size_t depth)
    {
        const auto index = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        double sum = 0.0;
        for (auto r : rows)
            sum += y[r];
        tree.nodes[index].value = sum / static_cast<double>(rows.size());
        tree.nodes[index].samples = static_cast<std::uint32_t>(rows.size());

        if (depth >= config.max_depth || rows.size() < 2 * config.min_samples_leaf)
            return index;
        const auto features = candidate_features();
        const auto split = best_split(X, y, rows, features, config.min_samples_leaf);
        if (!split)
            return index;

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (auto r : rows)
            (X(r, split->feature) <= split->threshold ? left : right).push_back(r);
        rows = {};

        const auto l = build(std::move(left), depth + 1);
        const auto r = build(std::move(right), depth + 1);
        auto& node = tree.nodes[index];
        node.feature = static_cast<std::int32_t>(split->feature);
        node.threshold = split->threshold;
        node.left = l;
        node.right = r;
        return index;
    }
};

} // namespace

void ForestConfig::validate(std::size_t input_dim) const
{
    if (n_trees == 0)
        fail(ErrorKind::InvalidConfig, "n_trees must be positive");
    if (max_depth == 0)
        fail(ErrorKind::InvalidConfig, "max_depth must be positive");
    if (min_samples_leaf == 0)
        fail(ErrorKind::InvalidConfig, "min_samples_leaf must be positive");
    if (feature_subsample > input_dim)
        fail(ErrorKind::InvalidConfig, "feature_subsample exceeds the input dimension");
}

std::optional<SplitCandidate> best_split(const Matrix& X, std::span<const double> y,
                                         std::span<const std::size_t> rows,
                                         std::span<const std::size_t> candidate_features,
                                         std::size_t min_samples_leaf)
{
    const std::size_t n = rows.size();
    if (n < 2 || n < 2 * min_samples_leaf)
        return std::nullopt;

    double mean = 0.0;
    for (auto r : rows)
        mean += y[r];
    mean /= static_cast<double>(n);
    double centered_total = 0.0;
    double node_ss = 0.0;
    for (auto r : rows) {
        const double d = y[r] - mean;
        centered_total += d;
        node_ss += d * d;
    }
    const double node_variance = node_ss / static_cast<double>(n);
    if (!(node_variance > 0.0))
        return std::nullopt;
    const double tolerance = kSplitTieTolerance * node_variance;

    std::vector<std::size_t> features(candidate_features.begin(), candidate_features.end());
    std::sort(features.begin(), features.end());

    std::optional<SplitCandidate> best;
    std::vector<std::pair<double, double>> column(n);
    for (auto f : features) {
        for (std::size_t i = 0; i < n; ++i)
            column[i] = {X(rows[i], f), y[rows[i]] - mean};
        std::sort(column.begin(), column.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        if (column.front().first == column.back().first)
            continue;

        double left_sum = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_sum += column[i].second;
            const std::size_t n_left = i + 1;
            const std::size_t n_right = n - n_left;
            if (column[i].first == column[i + 1].first)
                continue;
            if (n_left < min_samples_leaf)
                continue;
            if (n_right < min_samples_leaf)
                break;
            const double right_sum = centered_total - left_sum;
            // Var(y) - nL/n Var(yL) - nR/n Var(yR) on centered targets.
            const double gain = (left_sum * left_sum / static_cast<double>(n_left) +
                                 right_sum * right_sum / static_cast<double>(n_right) -
                                 centered_total * centered_total / static_cast<double>(n)) /
                                static_cast<double>(n);
            const double floor = best ? best->gain : 0.0;
            if (gain > floor + tolerance)
                best = SplitCandidate{f, std::midpoint(column[i].first, column[i + 1].first), gain};
        }
    }
    return best;
}

std::optional<SplitCandidate> best_split(const Matrix& X, std::span<const double> y,
                                         std::span<const std::size_t> candidate_features,
                                         std::size_t min_samples_leaf)
{
    std::vector<std::size_t> rows(X.rows());
    std::iota(rows.begin(), rows.end(), 0);
    return best_split(X, y, rows, candidate_features, min_samples_leaf);
}

double RegressionTree::predict(std::span<const double> x) const
{
    std::size_t i = 0;
    while (!nodes[i].is_leaf())
        i = static_cast<std::size_t>(x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left
                                                                                 : nodes[i].right);
    return nodes[i].value;
}

std::size_t RegressionTree::depth() const
{
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    std::size_t deepest = 0;
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (!nodes[i].is_leaf()) {
            stack.emplace_back(nodes[i].left, d + 1);
            stack.emplace_back(nodes[i].right, d + 1);
        }
    }
    return deepest;
}

std::size_t RegressionTree::leaf_count() const
{
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

RegressionTree grow_tree(const Matrix& X, std::span<const double> y, std::vector<std::size_t> rows,
                         const ForestConfig& config, std::uint64_t tree_seed)
{
    const std::size_t features = config.feature_subsample == 0 ? X.cols() : config.feature_subsample;
    Builder builder{X, y, config, features, Rng(tree_seed), {}};
    builder.build(std::move(rows), 0);
    return std::move(builder.tree);
}

ForestModel fit_forest(const Matrix& X, std::span<const double> y, const ForestConfig& config,
                       unsigned threads)
{
    config.validate(X.cols());
    const std::size_t n = X.rows();
    if (y.size() != n)
        fail(ErrorKind::DimensionMismatch, "X has " + std::to_string(n) + " rows but y has " +
                                               std::to_string(y.size()));
    if (X.cols() == 0 || n < 2 * config.min_samples_leaf)
        fail(ErrorKind::InsufficientData, "forest needs at least 2*min_samples_leaf rows, got " +
                                              std::to_string(n));

    ForestModel model;
    model.config = config;
    model.input_dim = X.cols();
    model.trees.resize(config.n_trees);

    auto train_one = [&](std::size_t t) {
        const auto tree_seed = derive_seed(config.seed, t);
        std::vector<std::size_t> rows(n);
        if (config.bootstrap) {
            Rng sampler(derive_seed(tree_seed, 0xB007));
            for (auto& r : rows)
                r = sampler.index(n);
            std::sort(rows.begin(), rows.end());
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        model.trees[t] = grow_tree(X, y, std::move(rows), config, tree_seed);
    };

    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, config.n_trees));
    if (threads <= 1) {
        for (std::size_t t = 0; t < config.n_trees; ++t)
            train_one(t);
        return model;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> workers;
        for (unsigned w = 0; w < threads; ++w) {
            workers.emplace_back([&, w] {
                try {
                    for (std::size_t t = next++; t < config.n_trees; t = next++)
                        train_one(t);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return model;
}

std::vector<double> predict_forest(const ForestModel& model, const Matrix& X)
{
    if (X.cols() != model.input_dim)
        fail(ErrorKind::DimensionMismatch, "forest expects " + std::to_string(model.input_dim) +
                                               " inputs, got " + std::to_string(X.cols()));
    std::vector<double> out(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) {
        const auto row = X.row(r);
        // Running mean: identical trees reproduce the single-tree value exactly.
        double mean = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t t = 0; t < model.trees.size(); ++t) {
            const double p = model.trees[t].predict(row);
            lo = std::min(lo, p);
            hi = std::max(hi, p);
            mean += (p - mean) / static_cast<double>(t + 1);
        }
        out[r] = std::clamp(mean, lo, hi);
    }
    return out;
}

} // namespace rul
