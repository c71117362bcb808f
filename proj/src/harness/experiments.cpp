#include "mbfs/harness/experiments.hpp"

#include <cmath>
#include <limits>

#include "mbfs/rng.hpp"
#include "mbfs/synthetic/gaussian.hpp"

namespace mbfs::harness {

MapTraining bullseye_map_training() {
    MapTraining t;
    t.shape.feature_dims = {2};
    t.shape.map_dim = 2;
    t.shape.map_hidden = {8, 8};
    t.shape.head_hidden = {8, 8};
    t.shape.delta = 0;
    t.train.delta = 0;
    return t;
}

MapTraining dag_map_training(const Dataset& data, std::size_t delta) {
    MapTraining t;
    t.shape.feature_dims = data.feature_dims();
    t.shape.map_dim = 1;
    t.shape.map_hidden = {32, 32};
    t.shape.head_hidden = {164, 164};
    t.shape.delta = delta;
    t.train.delta = delta;
    return t;
}

mapper::TrainResult fit_maps(const Dataset& data, const MapTraining& t, std::uint64_t seed) {
    mapper::TrainConfig cfg = t.train;
    cfg.seed = derive_seed(seed, 1);
    return mapper::train(mapper::make_mapping_model(t.shape, derive_seed(seed, 0)), data, cfg);
}

BullseyeRow run_bullseye_trial(double epsilon, std::size_t n, std::uint64_t seed, const synthetic::Rings& rings,
                               const knn::KnnConfig& kcfg, const std::optional<MapTraining>& maps) {
    synthetic::BullseyeConfig bc;
    bc.epsilon = epsilon;
    bc.n = n;
    bc.rings = rings;
    bc.seed = seed;
    const auto d = synthetic::gen_bullseye_2d(bc);

    BullseyeRow row;
    row.epsilon = epsilon;
    row.n = n;
    row.seed = seed;
    row.oracle = synthetic::mi_oracle_bullseye(epsilon, rings);
    row.knn_raw = knn::ksg_mi(d.x, d.y, kcfg);
    row.knn_r = knn::ksg_mi(d.r, d.y, kcfg);
    row.knn_nominal = std::numeric_limits<double>::quiet_NaN();
    row.knn_regularized = std::numeric_limits<double>::quiet_NaN();
    if (maps) {
        const Dataset data{{d.x}, d.y};
        MapTraining nominal = *maps;
        nominal.train.lambda = 0.0;
        const auto f_nom = fit_maps(data, nominal, seed);
        const auto f_reg = fit_maps(data, *maps, seed);
        row.knn_nominal = knn::ksg_mi(mapper::map_feature(f_nom.model, 0, d.x), d.y, kcfg);
        row.knn_regularized = knn::ksg_mi(mapper::map_feature(f_reg.model, 0, d.x), d.y, kcfg);
    }
    return row;
}

RocExperiment run_ci_roc(const Dataset& data, const synthetic::DagSpec& dag, std::size_t delta,
                         const ci::CiConfig& cfg, const mapper::MappingModel* model) {
    data.validate();
    const std::vector<knn::SampleBlock> blocks = model ? mapper::map_dataset(*model, data) : data.features;
    const auto predicate = mb::knn_predicate(blocks, data.y, cfg);
    RocExperiment ex;
    std::vector<bool> labels;
    std::vector<double> p_scores, s_scores;
    for (const auto& rel : mb::relation_suite(dag, delta)) {
        const mb::TestRecord rec = predicate(rel.i, rel.S);
        ex.outcomes.push_back({rel, rec.statistic, rec.p_value});
        labels.push_back(rel.independent);
        p_scores.push_back(rec.p_value);
        s_scores.push_back(-rec.statistic);
    }
    ex.by_p_value = roc_sweep(labels, p_scores);
    ex.by_statistic = roc_sweep(labels, s_scores);
    return ex;
}

CalibrationResult run_calibration(std::size_t trials, std::size_t n, const ci::CiConfig& cfg, std::uint64_t seed) {
    CalibrationResult res;
    res.trials = trials;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto g = synthetic::gen_gaussian_chain(n, 0.8, 0.8, derive_seed(seed, 2 * t));
        ci::CiConfig c = cfg;
        c.seed = derive_seed(seed, 2 * t + 1);
        const auto r = ci::ci_test(g.x, g.y, g.z, c);
        res.p_values.push_back(r.p_value);
        if (!r.independent) ++res.rejections;
    }
    res.false_positive_rate = trials ? static_cast<double>(res.rejections) / static_cast<double>(trials) : 0.0;
    return res;
}

}  // namespace mbfs::harness
