#pragma once

#include "rul/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rul {

struct MlpConfig {
    std::vector<std::size_t> hidden_layers{5};
    std::size_t input_dim = 5;
    double learning_rate = 1e-3;
    double momentum = 0.9;
    std::size_t batch_size = 256;
    std::size_t epochs = 50;
    std::uint64_t seed = 0;
    std::size_t early_stop_patience = 0; // 0 disables

    void validate() const;
    /// "NN-[5,3]" style label.
    std::string label() const;
};

/// The four hidden-layer layouts compared in the model study.
std::vector<std::vector<std::size_t>> reference_architectures();

struct DenseLayer {
    Matrix weights; // out x in
    std::vector<double> bias;
};

/// Per-feature affine scaling: z = (x - mean) / scale.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> scale;
};

struct MlpModel {
    MlpConfig config;
    std::vector<DenseLayer> layers; // hidden layers then the linear output unit
    Scaler input_scaler;
    double target_mean = 0.0;
    double target_scale = 1.0;
    std::vector<double> history; // training MSE per epoch, original units

    std::size_t parameter_count() const;
};

/// Same shapes as the model's layers.
struct MlpGradient {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
};

/// Weights ~ N(0, 1/fan_in), zero biases, identity scalers.
MlpModel init_mlp(const MlpConfig& config);

/// Standardize -> tanh hidden layers -> linear output -> de-standardize.
double forward(const MlpModel& model, std::span<const double> x);

std::vector<double> predict_mlp(const MlpModel& model, const Matrix& X);

/// Mean squared error in standardized target space, the training objective.
double standardized_loss(const MlpModel& model, const Matrix& X, std::span<const double> y);

/// Exact gradient of `standardized_loss` by backpropagation.
MlpGradient gradient(const MlpModel& model, const Matrix& X, std::span<const double> y);

/// Fits the scalers on the training rows, then runs mini-batch gradient
/// descent with classical momentum. Throws NonFiniteLoss on divergence.
MlpModel train(MlpModel model, const Matrix& X, std::span<const double> y);

Scaler fit_scaler(const Matrix& X);

} // namespace rul
