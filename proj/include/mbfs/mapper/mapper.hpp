#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbfs/dataset.hpp"
#include "mbfs/nn/dense_net.hpp"

namespace mbfs::mapper {

using knn::SampleBlock;
using nn::DenseNet;
using nn::Matrix;

enum class HeadKind { gaussian, bernoulli };

std::string to_string(HeadKind kind);
HeadKind head_kind_from_string(const std::string& name);

// Per-column affine map (x - mean) / scale applied before a network.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer identity(std::size_t d);
    static Standardizer fit(const SampleBlock& block);
    Matrix apply(const SampleBlock& block) const;
};

// Per-feature maps f_i : R^{d_i} -> R^r and a shared head q(y | F_w(v), w).
// With m > 1 the head reads [w_1 f_1, ..., w_m f_m, w] (m r + m inputs); with
// m = 1 there is no mask and the head reads f_1 alone.
struct MappingModel {
    std::vector<std::size_t> feature_dims;
    std::size_t map_dim = 1;
    std::vector<DenseNet> map_nets;
    DenseNet head_net;
    HeadKind head_kind = HeadKind::gaussian;
    std::size_t delta = 2;
    double lambda = 0.1;
    std::vector<Standardizer> input_norm;  // one per feature
    double y_mean = 0.0;                   // gaussian head models (y - y_mean) / y_scale
    double y_scale = 1.0;

    std::size_t m() const { return feature_dims.size(); }
    bool masked() const { return m() > 1; }
    std::size_t head_input_dim() const { return masked() ? m() * map_dim + m() : map_dim; }
    std::size_t head_output_dim() const { return head_kind == HeadKind::gaussian ? 2 : 1; }
    void validate() const;
};

struct ModelShape {
    std::vector<std::size_t> feature_dims;
    std::size_t map_dim = 1;
    std::vector<std::size_t> map_hidden{32, 32};
    std::vector<std::size_t> head_hidden{164, 164};
    HeadKind head_kind = HeadKind::gaussian;
    std::size_t delta = 2;
};

MappingModel make_mapping_model(const ModelShape& shape, std::uint64_t seed);

struct MaskVector {
    std::vector<std::uint8_t> bits;
    std::size_t popcount() const;
};

// Uniform over masks with 1..delta+1 ones: popcount c is drawn with weight
// C(m, c), then a uniform c-subset. delta + 1 > m is clamped to m and, when
// `warnings` is given, a message is appended to it.
MaskVector sample_mask(std::size_t m, std::size_t delta, std::mt19937_64& rng,
                       std::vector<std::string>* warnings = nullptr);

// Head output in the original units of y. Gaussian: mean and clamped
// log-variance. Bernoulli: logit.
struct HeadParams {
    HeadKind kind = HeadKind::gaussian;
    double mean = 0.0;
    double log_variance = 0.0;
    double logit = 0.0;

    double variance() const;
    double probability() const;
};

inline constexpr double kLogVarianceMin = -10.0;
inline constexpr double kLogVarianceMax = 10.0;

HeadParams gaussian_params(double mean, double log_variance);
HeadParams bernoulli_params(double logit);

double log_likelihood(const HeadParams& params, double y);
double jeffreys(const HeadParams& a, const HeadParams& b);

/// f_i applied to every row of `x` (n x d_i), giving n x r.
SampleBlock map_feature(const MappingModel& model, std::size_t i, const SampleBlock& x);
std::vector<SampleBlock> map_dataset(const MappingModel& model, const Dataset& data);

/// Surrogate prediction for one sample; `features[i]` is x_i. Dropped blocks
/// are zeroed. For m = 1 the mask is ignored.
HeadParams surrogate_forward(const MappingModel& model, const std::vector<std::vector<double>>& features,
                             const MaskVector& mask);

struct TrainConfig {
    double lambda = 0.1;
    std::size_t batch_size = 256;
    std::size_t iterations = 5000;
    std::size_t delta = 2;
    std::uint64_t seed = 0;
    nn::AdamConfig adam{};
    bool standardize = true;  // fit input and target scaling on the training set

    void validate() const;
};

// Everything random about one iteration: batch rows, masks (one per row, m > 1
// only) and one in-batch permutation per feature.
struct BatchPlan {
    std::vector<std::size_t> rows;
    std::vector<MaskVector> masks;
    std::vector<std::vector<std::size_t>> shuffles;
};

struct Objective {
    double value = 0.0;           // J = mean log-likelihood - lambda R
    double log_likelihood = 0.0;  // mean, original units of y
    double regularizer = 0.0;     // R = sum_i mean_b w_bi |d - D|
};

struct Gradients {
    std::vector<nn::GradientTape> maps;
    nn::GradientTape head;
};

// Evaluates the training objective on one planned batch. When `grads` is
// non-null it receives dJ/dparameters (accumulated from zero).
Objective evaluate_objective(const MappingModel& model, const Dataset& data, const BatchPlan& plan, double lambda,
                             Gradients* grads);

BatchPlan draw_batch_plan(const MappingModel& model, std::size_t n, std::size_t batch_size, std::size_t delta,
                          std::mt19937_64& rng);

struct TrainRecord {
    std::size_t iteration = 0;
    Objective objective;
};

struct TrainResult {
    MappingModel model;
    std::vector<TrainRecord> history;
    std::vector<std::string> warnings;
};

// Gradient ascent on J with one Adam state per network. Throws
// Error(non_finite) naming the iteration and term if J becomes non-finite.
TrainResult train(MappingModel model, const Dataset& data, const TrainConfig& cfg);

nlohmann::json to_json(const MappingModel& model);
MappingModel mapping_model_from_json(const nlohmann::json& doc);

}  // namespace mbfs::mapper
