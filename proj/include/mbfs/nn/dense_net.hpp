#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace mbfs::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Activation { relu, identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

// Fully connected feedforward network. weights[l] has shape
// layer_dims[l+1] x layer_dims[l] (row-major); activations[l] is applied to
// the output of layer l.
struct DenseNet {
    std::vector<std::size_t> layer_dims;
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    std::vector<Activation> activations;

    std::size_t num_layers() const { return weights.size(); }
    std::size_t input_dim() const { return layer_dims.front(); }
    std::size_t output_dim() const { return layer_dims.back(); }
    std::size_t num_parameters() const;

    // Throws Error(dimension_mismatch / non_finite) if the invariants fail.
    void validate() const;
};

/// Builds a network with ReLU hidden layers and a linear output layer.
/// Weights are drawn from U(-a, a), a = sqrt(6 / (fan_in + fan_out)); biases
/// start at zero.
DenseNet make_dense_net(const std::vector<std::size_t>& layer_dims, std::mt19937_64& rng);

/// Zero-initialized network with explicit per-layer activations.
DenseNet make_zero_net(const std::vector<std::size_t>& layer_dims,
                       const std::vector<Activation>& activations);

std::vector<double> forward(const DenseNet& net, std::span<const double> input);

// Layer inputs and pre-activations of one batched forward pass; backward
// consumes it.
struct ForwardCache {
    std::vector<Matrix> layer_inputs;
    std::vector<Matrix> pre_activations;
};

/// Rows of `input` are samples. When `cache` is non-null it is filled for a
/// subsequent backward_batch.
Matrix forward_batch(const DenseNet& net, const Matrix& input, ForwardCache* cache = nullptr);

struct GradientTape {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    static GradientTape zeros_like(const DenseNet& net);
    void set_zero();
    GradientTape& operator+=(const GradientTape& other);
    bool all_zero() const;
};

/// Gradient of the scalar loss L whose output gradient is `upstream`, for a
/// single sample. The forward pass is recomputed.
GradientTape backward(const DenseNet& net, std::span<const double> input,
                      std::span<const double> upstream);

/// Accumulates parameter gradients of a batch into `tape`. If `input_grad`
/// is non-null it receives dL/d(input), one row per sample.
void backward_batch(const DenseNet& net, const ForwardCache& cache, const Matrix& upstream,
                    GradientTape& tape, Matrix* input_grad = nullptr);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct OptimizerState {
    std::uint64_t step = 0;
    GradientTape first_moment;
    GradientTape second_moment;
    AdamConfig config;

    static OptimizerState for_net(const DenseNet& net, AdamConfig config = {});
};

/// One bias-corrected Adam update. With `maximize` the parameters move along
/// the gradient instead of against it. Throws Error(non_finite) naming the
/// offending parameter block, leaving `net` and `state` untouched.
void adam_step(DenseNet& net, const GradientTape& tape, OptimizerState& state, bool maximize);

nlohmann::json to_json(const DenseNet& net);
DenseNet dense_net_from_json(const nlohmann::json& doc);

}  // namespace mbfs::nn
