#include "oracles.hpp"

#include "rul/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rul::oracle {

Matrix covariance(const Matrix& data, bool standardize)
{
    const std::size_t n = data.rows();
    const std::size_t p = data.cols();
    Matrix z(n, p);
    for (std::size_t c = 0; c < p; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            mean += data(r, c);
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            ss += (data(r, c) - mean) * (data(r, c) - mean);
        const double sd = standardize ? std::sqrt(ss / static_cast<double>(n - 1)) : 1.0;
        for (std::size_t r = 0; r < n; ++r)
            z(r, c) = (data(r, c) - mean) / sd;
    }
    Matrix cov(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r)
                s += z(r, i) * z(r, j);
            cov(i, j) = s / static_cast<double>(n - 1);
        }
    return cov;
}

Eigen classical_jacobi(const Matrix& symmetric)
{
    const std::size_t n = symmetric.rows();
    Matrix a = symmetric;
    Matrix v = Matrix::identity(n);
    double scale = 0.0;
    for (double x : a.data())
        scale += x * x;
    scale = std::sqrt(scale);

    for (int iter = 0; iter < 100000; ++iter) {
        std::size_t p = 0, q = 1;
        double largest = -1.0;
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                off += 2.0 * a(i, j) * a(i, j);
                if (std::abs(a(i, j)) > largest) {
                    largest = std::abs(a(i, j));
                    p = i;
                    q = j;
                }
            }
        if (n < 2 || std::sqrt(off) <= 1e-15 * scale || largest == 0.0)
            break;
        // Textbook angle: tan(2 phi) = 2 a_pq / (a_qq - a_pp).
        const double phi = 0.5 * std::atan2(2.0 * a(p, q), a(q, q) - a(p, p));
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        Matrix rotated = a;
        for (std::size_t k = 0; k < n; ++k) {
            rotated(k, p) = c * a(k, p) - s * a(k, q);
            rotated(k, q) = s * a(k, p) + c * a(k, q);
        }
        Matrix b = rotated;
        for (std::size_t k = 0; k < n; ++k) {
            b(p, k) = c * rotated(p, k) - s * rotated(q, k);
            b(q, k) = s * rotated(p, k) + c * rotated(q, k);
        }
        a = b;
        for (std::size_t k = 0; k < n; ++k) {
            const double vp = v(k, p);
            const double vq = v(k, q);
            v(k, p) = c * vp - s * vq;
            v(k, q) = s * vp + c * vq;
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) > a(j, j); });
    Eigen out;
    out.vectors = Matrix(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        out.values.push_back(a(order[r], order[r]));
        for (std::size_t k = 0; k < n; ++k)
            out.vectors(r, k) = v(k, order[r]);
    }
    return out;
}

double axis_distance(std::span<const double> a, std::span<const double> b)
{
    double same = 0.0, flipped = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same = std::max(same, std::abs(a[i] - b[i]));
        flipped = std::max(flipped, std::abs(a[i] + b[i]));
    }
    return std::min(same, flipped);
}

namespace {

double population_variance(const std::vector<double>& v)
{
    double mean = 0.0;
    for (double x : v)
        mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v)
        ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size());
}

} // namespace

OracleSplit exhaustive_split(const Matrix& X, std::span<const double> y, std::span<const std::size_t> rows,
                             std::size_t min_leaf)
{
    OracleSplit best;
    const std::size_t n = rows.size();
    if (n < 2 * min_leaf || n < 2)
        return best;
    std::vector<double> all;
    for (auto r : rows)
        all.push_back(y[r]);
    const double total_var = population_variance(all);
    if (!(total_var > 0.0))
        return best;
    const double tolerance = 1e-10 * total_var;

    for (std::size_t f = 0; f < X.cols(); ++f) {
        std::vector<double> values;
        for (auto r : rows)
            values.push_back(X(r, f));
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            const double threshold = (values[i] + values[i + 1]) / 2.0;
            std::vector<double> left, right;
            for (auto r : rows)
                (X(r, f) <= threshold ? left : right).push_back(y[r]);
            if (left.size() < min_leaf || right.size() < min_leaf)
                continue;
            const double gain = total_var -
                                static_cast<double>(left.size()) / static_cast<double>(n) * population_variance(left) -
                                static_cast<double>(right.size()) / static_cast<double>(n) * population_variance(right);
            const double floor = best.found ? best.gain : 0.0;
            if (gain > floor + tolerance)
                best = {true, f, threshold, gain};
        }
    }
    return best;
}

CartOracle::CartOracle(const Matrix& X, std::span<const double> y, std::size_t max_depth, std::size_t min_leaf)
    : max_depth_(max_depth), min_leaf_(min_leaf)
{
    std::vector<std::size_t> rows(X.rows());
    std::iota(rows.begin(), rows.end(), 0);
    build(X, y, rows, 0);
}

int CartOracle::build(const Matrix& X, std::span<const double> y, const std::vector<std::size_t>& rows,
                      std::size_t depth)
{
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    double sum = 0.0;
    for (auto r : rows)
        sum += y[r];
    nodes_[index].value = sum / static_cast<double>(rows.size());
    if (depth >= max_depth_)
        return index;
    const auto split = exhaustive_split(X, y, rows, min_leaf_);
    if (!split.found)
        return index;
    std::vector<std::size_t> left, right;
    for (auto r : rows)
        (X(r, split.feature) <= split.threshold ? left : right).push_back(r);
    const int l = build(X, y, left, depth + 1);
    const int r = build(X, y, right, depth + 1);
    nodes_[index].leaf = false;
    nodes_[index].feature = split.feature;
    nodes_[index].threshold = split.threshold;
    nodes_[index].left = l;
    nodes_[index].right = r;
    return index;
}

double CartOracle::predict(std::span<const double> x) const
{
    int i = 0;
    while (!nodes_[i].leaf)
        i = x[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
    return nodes_[i].value;
}

MlpGradient finite_difference_gradient(const MlpModel& model, const Matrix& X, std::span<const double> y,
                                       double step)
{
    MlpGradient g;
    MlpModel probe = model;
    auto partial = [&](double& parameter) {
        const double saved = parameter;
        parameter = saved + step;
        const double up = standardized_loss(probe, X, y);
        parameter = saved - step;
        const double down = standardized_loss(probe, X, y);
        parameter = saved;
        return (up - down) / (2.0 * step);
    };
    for (auto& layer : probe.layers) {
        Matrix gw(layer.weights.rows(), layer.weights.cols());
        for (std::size_t i = 0; i < gw.rows(); ++i)
            for (std::size_t j = 0; j < gw.cols(); ++j)
                gw(i, j) = partial(layer.weights(i, j));
        std::vector<double> gb(layer.bias.size());
        for (std::size_t i = 0; i < gb.size(); ++i)
            gb[i] = partial(layer.bias[i]);
        g.weights.push_back(std::move(gw));
        g.biases.push_back(std::move(gb));
    }
    return g;
}

double max_relative_error(const MlpGradient& analytic, const MlpGradient& numeric, double floor)
{
    double worst = 0.0;
    auto check = [&](double a, double n) {
        worst = std::max(worst, std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor}));
    };
    for (std::size_t l = 0; l < analytic.weights.size(); ++l) {
        for (std::size_t i = 0; i < analytic.weights[l].data().size(); ++i)
            check(analytic.weights[l].data()[i], numeric.weights[l].data()[i]);
        for (std::size_t i = 0; i < analytic.biases[l].size(); ++i)
            check(analytic.biases[l][i], numeric.biases[l][i]);
    }
    return worst;
}

Matrix correlated_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed)
{
    Rng rng(seed);
    Matrix mixing(cols, cols);
    for (auto& m : mixing.data())
        m = rng.normal();
    Matrix out(rows, cols);
    std::vector<double> z(cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (auto& v : z)
            v = rng.normal();
        for (std::size_t c = 0; c < cols; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < cols; ++k)
                s += mixing(c, k) * z[k];
            out(r, c) = 10.0 * c + s;
        }
    }
    return out;
}

} // namespace rul::oracle
