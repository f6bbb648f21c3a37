#include "rul/mlp.hpp"

#include "rul/error.hpp"
#include "rul/numeric.hpp"
#include "rul/random.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace rul {
namespace {

// Activations of every layer for one standardized input row.
struct Trace {
    std::vector<std::vector<double>> activations; // [0] is the input
};

double forward_standardized(const MlpModel& model, std::span<const double> z, Trace* trace)
{
    std::vector<double> a(z.begin(), z.end());
    if (trace) {
        trace->activations.clear();
        trace->activations.push_back(a);
    }
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& layer = model.layers[l];
        const bool output = l + 1 == model.layers.size();
        std::vector<double> next(layer.weights.rows());
        for (std::size_t i = 0; i < next.size(); ++i) {
            const auto w = layer.weights.row(i);
            double s = layer.bias[i];
            for (std::size_t j = 0; j < a.size(); ++j)
                s += w[j] * a[j];
            next[i] = output ? s : std::tanh(s);
        }
        a = std::move(next);
        if (trace)
            trace->activations.push_back(a);
    }
    return a.front();
}

std::vector<double> standardize_row(const MlpModel& model, std::span<const double> x)
{
    std::vector<double> z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j)
        z[j] = (x[j] - model.input_scaler.mean[j]) / model.input_scaler.scale[j];
    return z;
}

void check_input(const MlpModel& model, std::size_t cols)
{
    if (cols != model.config.input_dim)
        fail(ErrorKind::DimensionMismatch, "network expects " + std::to_string(model.config.input_dim) +
                                               " inputs, got " + std::to_string(cols));
}

MlpGradient zero_gradient(const MlpModel& model)
{
    MlpGradient g;
    for (const auto& layer : model.layers) {
        g.weights.emplace_back(layer.weights.rows(), layer.weights.cols());
        g.biases.emplace_back(layer.bias.size(), 0.0);
    }
    return g;
}

// Accumulates d(loss)/d(params) for rows [indices] into `g`; loss is the
// mean over `indices.size()` rows.
void accumulate_gradient(const MlpModel& model, const Matrix& X, std::span<const double> y,
                         std::span<const std::size_t> indices, MlpGradient& g)
{
    const double inv_b = 1.0 / static_cast<double>(indices.size());
    Trace trace;
    for (auto r : indices) {
        const auto z = standardize_row(model, X.row(r));
        const double pred = forward_standardized(model, z, &trace);
        const double target = (y[r] - model.target_mean) / model.target_scale;

        std::vector<double> delta{2.0 * (pred - target) * inv_b};
        for (std::size_t l = model.layers.size(); l-- > 0;) {
            const auto& layer = model.layers[l];
            const auto& input = trace.activations[l];
            for (std::size_t i = 0; i < delta.size(); ++i) {
                g.biases[l][i] += delta[i];
                auto gw = g.weights[l].row(i);
                for (std::size_t j = 0; j < input.size(); ++j)
                    gw[j] += delta[i] * input[j];
            }
            if (l == 0)
                break;
            std::vector<double> prev(input.size(), 0.0);
            for (std::size_t i = 0; i < delta.size(); ++i) {
                const auto w = layer.weights.row(i);
                for (std::size_t j = 0; j < input.size(); ++j)
                    prev[j] += w[j] * delta[i];
            }
            // input holds tanh outputs of layer l-1.
            for (std::size_t j = 0; j < prev.size(); ++j)
                prev[j] *= 1.0 - input[j] * input[j];
            delta = std::move(prev);
        }
    }
}

double mse_original_units(const MlpModel& model, const Matrix& X, std::span<const double> y)
{
    CompensatedSum acc;
    for (std::size_t r = 0; r < X.rows(); ++r) {
        const double d = forward(model, X.row(r)) - y[r];
        acc.add(d * d);
    }
    return acc.value() / static_cast<double>(X.rows());
}

} // namespace

void MlpConfig::validate() const
{
    if (hidden_layers.empty())
        fail(ErrorKind::InvalidConfig, "at least one hidden layer is required");
    for (auto width : hidden_layers)
        if (width == 0)
            fail(ErrorKind::InvalidConfig, "hidden layer widths must be positive");
    if (input_dim == 0)
        fail(ErrorKind::InvalidConfig, "input_dim must be positive");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        fail(ErrorKind::InvalidConfig, "learning_rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0))
        fail(ErrorKind::InvalidConfig, "momentum must lie in [0, 1)");
    if (batch_size == 0)
        fail(ErrorKind::InvalidConfig, "batch_size must be positive");
    if (epochs == 0)
        fail(ErrorKind::InvalidConfig, "epochs must be positive");
}

std::string MlpConfig::label() const
{
    std::ostringstream out;
    out << "NN-[";
    for (std::size_t i = 0; i < hidden_layers.size(); ++i)
        out << (i ? "," : "") << hidden_layers[i];
    out << "]";
    return out.str();
}

std::vector<std::vector<std::size_t>> reference_architectures()
{
    return {{3}, {5}, {5, 1}, {5, 3}};
}

std::size_t MlpModel::parameter_count() const
{
    std::size_t count = 0;
    for (const auto& layer : layers)
        count += layer.weights.rows() * layer.weights.cols() + layer.bias.size();
    return count;
}

MlpModel init_mlp(const MlpConfig& config)
{
    config.validate();
    MlpModel model;
    model.config = config;
    model.input_scaler.mean.assign(config.input_dim, 0.0);
    model.input_scaler.scale.assign(config.input_dim, 1.0);

    Rng rng(derive_seed(config.seed, 0));
    std::size_t fan_in = config.input_dim;
    auto widths = config.hidden_layers;
    widths.push_back(1);
    for (auto width : widths) {
        DenseLayer layer{Matrix(width, fan_in), std::vector<double>(width, 0.0)};
        const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (auto& w : layer.weights.data())
            w = scale * rng.normal();
        model.layers.push_back(std::move(layer));
        fan_in = width;
    }
    return model;
}

double forward(const MlpModel& model, std::span<const double> x)
{
    check_input(model, x.size());
    const auto z = standardize_row(model, x);
    return model.target_mean + model.target_scale * forward_standardized(model, z, nullptr);
}

std::vector<double> predict_mlp(const MlpModel& model, const Matrix& X)
{
    check_input(model, X.cols());
    std::vector<double> out(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r)
        out[r] = forward(model, X.row(r));
    return out;
}

double standardized_loss(const MlpModel& model, const Matrix& X, std::span<const double> y)
{
    check_input(model, X.cols());
    if (X.rows() == 0 || y.size() != X.rows())
        fail(ErrorKind::DimensionMismatch, "batch rows and targets differ or are empty");
    double total = 0.0;
    for (std::size_t r = 0; r < X.rows(); ++r) {
        const auto z = standardize_row(model, X.row(r));
        const double d = forward_standardized(model, z, nullptr) -
                         (y[r] - model.target_mean) / model.target_scale;
        total += d * d;
    }
    return total / static_cast<double>(X.rows());
}

MlpGradient gradient(const MlpModel& model, const Matrix& X, std::span<const double> y)
{
    check_input(model, X.cols());
    if (X.rows() == 0 || y.size() != X.rows())
        fail(ErrorKind::DimensionMismatch, "batch rows and targets differ or are empty");
    std::vector<std::size_t> rows(X.rows());
    std::iota(rows.begin(), rows.end(), 0);
    auto g = zero_gradient(model);
    accumulate_gradient(model, X, y, rows, g);
    return g;
}

Scaler fit_scaler(const Matrix& X)
{
    Scaler s;
    const std::size_t n = X.rows();
    for (std::size_t c = 0; c < X.cols(); ++c) {
        CompensatedSum sum;
        for (std::size_t r = 0; r < n; ++r)
            sum.add(X(r, c));
        const double mean = sum.value() / static_cast<double>(n);
        CompensatedSum ss;
        for (std::size_t r = 0; r < n; ++r)
            ss.add((X(r, c) - mean) * (X(r, c) - mean));
        const double sd = n > 1 ? std::sqrt(ss.value() / static_cast<double>(n - 1)) : 0.0;
        s.mean.push_back(mean);
        s.scale.push_back(sd > 0.0 ? sd : 1.0);
    }
    return s;
}

MlpModel train(MlpModel model, const Matrix& X, std::span<const double> y)
{
    const auto& config = model.config;
    check_input(model, X.cols());
    const std::size_t n = X.rows();
    if (n == 0 || y.size() != n)
        fail(ErrorKind::DimensionMismatch, "training rows and targets differ or are empty");

    model.input_scaler = fit_scaler(X);
    {
        Matrix target(n, 1);
        for (std::size_t r = 0; r < n; ++r)
            target(r, 0) = y[r];
        const auto ts = fit_scaler(target);
        model.target_mean = ts.mean[0];
        model.target_scale = ts.scale[0];
    }
    model.history.clear();

    auto velocity = zero_gradient(model);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffler(derive_seed(config.seed, 1));
    const std::size_t batch = std::min(config.batch_size, n);

    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t stale_epochs = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffler.shuffle(order.begin(), order.end());
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t stop = std::min(n, start + batch);
            auto g = zero_gradient(model);
            accumulate_gradient(model, X, y, std::span(order).subspan(start, stop - start), g);
            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                auto w = model.layers[l].weights.data();
                auto vw = velocity.weights[l].data();
                auto gw = g.weights[l].data();
                for (std::size_t i = 0; i < w.size(); ++i) {
                    vw[i] = config.momentum * vw[i] - config.learning_rate * gw[i];
                    w[i] += vw[i];
                }
                auto& b = model.layers[l].bias;
                auto& vb = velocity.biases[l];
                for (std::size_t i = 0; i < b.size(); ++i) {
                    vb[i] = config.momentum * vb[i] - config.learning_rate * g.biases[l][i];
                    b[i] += vb[i];
                }
            }
        }
        const double loss = mse_original_units(model, X, y);
        if (!std::isfinite(loss))
            fail(ErrorKind::NonFiniteLoss, config.label() + " diverged at epoch " + std::to_string(epoch + 1));
        model.history.push_back(loss);

        if (config.early_stop_patience > 0) {
            if (loss < best_loss) {
                best_loss = loss;
                stale_epochs = 0;
            } else if (++stale_epochs >= config.early_stop_patience) {
                break;
            }
        }
    }
    return model;
}

} // namespace rul
