#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mbfs/ci/ci_test.hpp"
#include "mbfs/harness/roc.hpp"
#include "mbfs/knn/estimators.hpp"
#include "mbfs/mapper/mapper.hpp"
#include "mbfs/markov_blanket/markov_blanket.hpp"
#include "mbfs/synthetic/bullseye.hpp"
#include "mbfs/synthetic/dag.hpp"

namespace mbfs::harness {

// Network shapes and optimiser settings for one mapping fit.
struct MapTraining {
    mapper::ModelShape shape;
    mapper::TrainConfig train;
};

/// Shape for the 2D bullseye: one feature, r = 2, 8 hidden units per layer.
MapTraining bullseye_map_training();
/// Shape for the sphere DAG: r = 1, 32-unit maps, 164-unit head.
MapTraining dag_map_training(const Dataset& data, std::size_t delta);

mapper::TrainResult fit_maps(const Dataset& data, const MapTraining& t, std::uint64_t seed);

struct BullseyeRow {
    double epsilon = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double oracle = 0.0;
    double knn_raw = 0.0;          // k-NN on X
    double knn_r = 0.0;            // k-NN on R
    double knn_nominal = 0.0;      // k-NN on f(X), lambda = 0
    double knn_regularized = 0.0;  // k-NN on f(X), lambda from `maps`
};

// One 2D bullseye draw. With `maps` unset the two mapped columns are NaN.
BullseyeRow run_bullseye_trial(double epsilon, std::size_t n, std::uint64_t seed, const synthetic::Rings& rings,
                               const knn::KnnConfig& kcfg, const std::optional<MapTraining>& maps);

struct RelationOutcome {
    mb::Relation relation;
    double statistic = 0.0;
    double p_value = 1.0;
};

struct RocExperiment {
    std::vector<RelationOutcome> outcomes;
    RocTable by_p_value;    // score = p-value
    RocTable by_statistic;  // score = -statistic
};

// Runs the k-NN CI test on every relation of `dag` with |S| <= delta, on raw
// features or on f_i(X_i) when `model` is given.
RocExperiment run_ci_roc(const Dataset& data, const synthetic::DagSpec& dag, std::size_t delta,
                         const ci::CiConfig& cfg, const mapper::MappingModel* model);

struct CalibrationResult {
    std::size_t trials = 0;
    std::size_t rejections = 0;
    double false_positive_rate = 0.0;
    std::vector<double> p_values;
};

// Gaussian chain X -> Z -> Y (so X and Y are independent given Z); counts
// trials whose CI test rejects at cfg.alpha.
CalibrationResult run_calibration(std::size_t trials, std::size_t n, const ci::CiConfig& cfg, std::uint64_t seed);

}  // namespace mbfs::harness
