#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "mbfs/error.hpp"
#include "mbfs/knn/estimators.hpp"
#include "mbfs/mapper/mapper.hpp"
#include "mbfs/synthetic/bullseye.hpp"

using namespace mbfs;
using namespace mbfs::mapper;

namespace {

Dataset toy_data(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> a(n * 2), b(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[2 * i] = g(rng);
        a[2 * i + 1] = g(rng);
        b[i] = g(rng);
        y[i] = a[2 * i] * a[2 * i + 1] + 0.5 * b[i] + 0.1 * g(rng);
    }
    return Dataset{{SampleBlock(n, 2, a), SampleBlock::column(b)}, SampleBlock::column(y)};
}

ModelShape tiny_shape(HeadKind kind = HeadKind::gaussian) {
    ModelShape s;
    s.feature_dims = {2, 1};
    s.map_dim = 1;
    s.map_hidden = {3};
    s.head_hidden = {3};
    s.head_kind = kind;
    s.delta = 1;
    return s;
}

// Calls fn(param&) for every scalar parameter of the model, maps first.
template <class Fn>
void for_each_param(MappingModel& model, Fn fn) {
    auto visit = [&](nn::DenseNet& net, int which) {
        for (std::size_t l = 0; l < net.num_layers(); ++l) {
            for (Eigen::Index k = 0; k < net.weights[l].size(); ++k) fn(net.weights[l].data()[k], which, l, true, k);
            for (Eigen::Index k = 0; k < net.biases[l].size(); ++k) fn(net.biases[l].data()[k], which, l, false, k);
        }
    };
    for (std::size_t i = 0; i < model.map_nets.size(); ++i) visit(model.map_nets[i], static_cast<int>(i));
    visit(model.head_net, -1);
}

double grad_at(const Gradients& g, int which, std::size_t l, bool weight, Eigen::Index k) {
    const nn::GradientTape& t = which < 0 ? g.head : g.maps[static_cast<std::size_t>(which)];
    return weight ? t.weights[l].data()[k] : t.biases[l].data()[k];
}

}  // namespace

TEST(SampleMask, TwoFeaturesUniform) {
    std::mt19937_64 rng(1);
    std::map<std::vector<std::uint8_t>, int> counts;
    const int draws = 30000;
    for (int t = 0; t < draws; ++t) ++counts[sample_mask(2, 1, rng).bits];
    ASSERT_EQ(counts.size(), 3u);
    for (const auto& [bits, c] : counts) EXPECT_NEAR(c / double(draws), 1.0 / 3.0, 0.015);
}

TEST(SampleMask, SingleFeatureAlwaysOn) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 10; ++t) EXPECT_EQ(sample_mask(1, 0, rng).bits, (std::vector<std::uint8_t>{1}));
}

TEST(SampleMask, ClampsWithWarning) {
    std::mt19937_64 rng(1);
    std::vector<std::string> warnings;
    const auto w = sample_mask(3, 5, rng, &warnings);
    EXPECT_LE(w.popcount(), 3u);
    EXPECT_GE(w.popcount(), 1u);
    EXPECT_EQ(warnings.size(), 1u);
}

TEST(SampleMask, ChiSquareOverFortyOneMasks) {
    std::mt19937_64 rng(2024);
    std::map<std::vector<std::uint8_t>, int> counts;
    const int draws = 100000;
    for (int t = 0; t < draws; ++t) {
        const auto w = sample_mask(6, 2, rng);
        ASSERT_GE(w.popcount(), 1u);
        ASSERT_LE(w.popcount(), 3u);
        ++counts[w.bits];
    }
    ASSERT_EQ(counts.size(), 41u);
    const double expected = draws / 41.0;
    double chi2 = 0.0;
    for (const auto& [bits, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
    const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(40), chi2));
    EXPECT_GT(p, 0.01) << chi2;
}

TEST(Likelihood, ClosedForms) {
    EXPECT_NEAR(log_likelihood(gaussian_params(0.0, 0.0), 0.0), -0.5 * std::log(2 * M_PI), 1e-12);
    EXPECT_NEAR(log_likelihood(bernoulli_params(0.0), 1.0), std::log(0.5), 1e-12);
    EXPECT_NEAR(log_likelihood(bernoulli_params(0.0), 0.0), std::log(0.5), 1e-12);
    const double best = log_likelihood(gaussian_params(1.3, 0.4), 1.3);
    for (double mu : {1.0, 1.29, 1.31, 2.0}) EXPECT_LT(log_likelihood(gaussian_params(mu, 0.4), 1.3), best);
    EXPECT_TRUE(std::isfinite(log_likelihood(bernoulli_params(800.0), 0.0)));
}

TEST(Likelihood, LogVarianceClamped) {
    EXPECT_EQ(gaussian_params(0.0, 50.0).log_variance, kLogVarianceMax);
    EXPECT_EQ(gaussian_params(0.0, -50.0).log_variance, kLogVarianceMin);
}

TEST(Jeffreys, ClosedForms) {
    EXPECT_DOUBLE_EQ(jeffreys(gaussian_params(0.2, 0.1), gaussian_params(0.2, 0.1)), 0.0);
    EXPECT_NEAR(jeffreys(gaussian_params(0.0, 0.0), gaussian_params(1.0, 0.0)), 0.5, 1e-12);
    EXPECT_NEAR(jeffreys(bernoulli_params(0.0), bernoulli_params(0.0)), 0.0, 1e-12);
    const double l9 = std::log(9.0);
    EXPECT_NEAR(jeffreys(bernoulli_params(l9), bernoulli_params(-l9)), 0.5 * 0.8 * 2.0 * l9, 1e-12);
    // Gaussian variance term: N(0,1) vs N(0,4).
    EXPECT_NEAR(jeffreys(gaussian_params(0.0, 0.0), gaussian_params(0.0, std::log(4.0))), 0.25 * (0.25 + 4 - 2), 1e-12);
}

TEST(Surrogate, ZeroHeadGivesStandardNormal) {
    MappingModel model = make_mapping_model(tiny_shape(), 3);
    for (auto& w : model.head_net.weights) w.setZero();
    for (auto& b : model.head_net.biases) b.setZero();
    const auto p = surrogate_forward(model, {{0.5, -1.0}, {2.0}}, MaskVector{{1, 0}});
    EXPECT_EQ(p.mean, 0.0);
    EXPECT_EQ(p.variance(), 1.0);
}

TEST(Surrogate, DroppedFeatureHasNoInfluence) {
    const MappingModel a = make_mapping_model(tiny_shape(), 4);
    const MappingModel b = a;
    const MaskVector w{{1, 0}};
    const auto pa = surrogate_forward(a, {{0.5, -1.0}, {2.0}}, w);
    const auto pb = surrogate_forward(b, {{0.5, -1.0}, {-7.5}}, w);
    EXPECT_EQ(pa.mean, pb.mean);
    EXPECT_EQ(pa.log_variance, pb.log_variance);
    const auto pc = surrogate_forward(a, {{0.5, -1.0}, {-7.5}}, MaskVector{{1, 1}});
    EXPECT_NE(pa.mean, pc.mean);
}

TEST(Surrogate, AllZeroMaskUsesBiasPathOnly) {
    const MappingModel model = make_mapping_model(tiny_shape(), 5);
    const auto p1 = surrogate_forward(model, {{0.5, -1.0}, {2.0}}, MaskVector{{0, 0}});
    const auto p2 = surrogate_forward(model, {{9.0, 3.0}, {-4.0}}, MaskVector{{0, 0}});
    EXPECT_EQ(p1.mean, p2.mean);
    EXPECT_EQ(model.head_input_dim(), 2u * 1u + 2u);
}

TEST(Surrogate, DimensionMismatch) {
    const MappingModel model = make_mapping_model(tiny_shape(), 5);
    EXPECT_THROW(surrogate_forward(model, {{0.5}, {2.0}}, MaskVector{{1, 1}}), Error);
    EXPECT_THROW(surrogate_forward(model, {{0.5, 1.0}, {2.0}}, MaskVector{{1}}), Error);
}

TEST(Objective, FullFiniteDifferenceGradient) {
    for (HeadKind kind : {HeadKind::gaussian, HeadKind::bernoulli}) {
        Dataset data = toy_data(40, 7);
        if (kind == HeadKind::bernoulli) {
            std::vector<double> y;
            for (double v : data.y.values()) y.push_back(v > 0.0 ? 1.0 : 0.0);
            data.y = SampleBlock::column(y);
        }
        MappingModel model = make_mapping_model(tiny_shape(kind), 11);
        std::mt19937_64 rng(3);
        for (std::size_t trial = 0; trial < 3; ++trial) {
            const BatchPlan plan = draw_batch_plan(model, data.n(), 4, 1, rng);
            Gradients g;
            evaluate_objective(model, data, plan, 0.7, &g);
            const double h = 1e-6;
            std::size_t checked = 0;
            for_each_param(model, [&](double& p, int which, std::size_t l, bool weight, Eigen::Index k) {
                const double keep = p;
                p = keep + h;
                const double up = evaluate_objective(model, data, plan, 0.7, nullptr).value;
                p = keep - h;
                const double down = evaluate_objective(model, data, plan, 0.7, nullptr).value;
                p = keep;
                const double fd = (up - down) / (2 * h);
                const double an = grad_at(g, which, l, weight, k);
                EXPECT_LE(std::abs(fd - an) / std::max(1.0, std::max(std::abs(fd), std::abs(an))), 1e-3)
                    << to_string(kind) << " net " << which << " layer " << l << (weight ? " w" : " b") << k;
                ++checked;
            });
            EXPECT_GT(checked, 30u);
        }
    }
}

TEST(Objective, RegularizerNonNegativeAndZeroWithoutShuffle) {
    const Dataset data = toy_data(64, 8);
    const MappingModel model = make_mapping_model(tiny_shape(), 12);
    std::mt19937_64 rng(1);
    BatchPlan plan = draw_batch_plan(model, data.n(), 16, 1, rng);
    const Objective o = evaluate_objective(model, data, plan, 0.1, nullptr);
    EXPECT_GE(o.regularizer, 0.0);
    EXPECT_NEAR(o.value, o.log_likelihood - 0.1 * o.regularizer, 1e-12);
    for (auto& s : plan.shuffles) std::iota(s.begin(), s.end(), 0);
    EXPECT_NEAR(evaluate_objective(model, data, plan, 0.1, nullptr).regularizer, 0.0, 1e-15);
}

TEST(Train, NoRegularizerLossTrendsDown) {
    const Dataset data = toy_data(1000, 9);
    TrainConfig cfg;
    cfg.lambda = 0.0;
    cfg.iterations = 600;
    cfg.batch_size = 64;
    cfg.delta = 1;
    const auto res = train(make_mapping_model(tiny_shape(), 13), data, cfg);
    ASSERT_EQ(res.history.size(), 600u);
    auto mean_loss = [&](std::size_t from) {
        double s = 0.0;
        for (std::size_t t = from; t < from + 50; ++t) s -= res.history[t].objective.value;
        return s / 50.0;
    };
    EXPECT_LT(mean_loss(550), mean_loss(0));
}

TEST(Train, DeterministicUnderSeed) {
    const Dataset data = toy_data(200, 10);
    TrainConfig cfg;
    cfg.iterations = 30;
    cfg.batch_size = 32;
    cfg.delta = 1;
    cfg.seed = 5;
    const auto a = train(make_mapping_model(tiny_shape(), 1), data, cfg);
    const auto b = train(make_mapping_model(tiny_shape(), 1), data, cfg);
    EXPECT_EQ(to_json(a.model).dump(), to_json(b.model).dump());
}

TEST(Train, BernoulliNeedsBinaryTarget) {
    const Dataset data = toy_data(100, 10);
    TrainConfig cfg;
    cfg.iterations = 5;
    EXPECT_THROW(train(make_mapping_model(tiny_shape(HeadKind::bernoulli), 1), data, cfg), Error);
}

TEST(Train, DeltaClampedWithWarning) {
    const Dataset data = toy_data(100, 10);
    TrainConfig cfg;
    cfg.iterations = 3;
    cfg.batch_size = 16;
    cfg.delta = 4;
    const auto res = train(make_mapping_model(tiny_shape(), 1), data, cfg);
    EXPECT_FALSE(res.warnings.empty());
}

TEST(Checkpoint, RoundTrip) {
    const Dataset data = toy_data(100, 10);
    TrainConfig cfg;
    cfg.iterations = 5;
    cfg.batch_size = 16;
    cfg.delta = 1;
    const auto res = train(make_mapping_model(tiny_shape(), 1), data, cfg);
    const MappingModel back = mapping_model_from_json(nlohmann::json::parse(to_json(res.model).dump()));
    EXPECT_EQ(to_json(back).dump(), to_json(res.model).dump());
    const auto a = map_feature(res.model, 0, data.features[0]);
    const auto b = map_feature(back, 0, data.features[0]);
    EXPECT_EQ(a.values(), b.values());
    const auto j = to_json(res.model);
    for (const char* key : {"feature_dims", "map_dim", "head_kind", "delta", "lambda"}) EXPECT_TRUE(j.contains(key));
}

TEST(Train, BullseyeMapsBeatRawAndShrinkGap) {
    // 2D bullseye, r = 2, hidden width 8: k-NN on f(X) improves on raw X and
    // the gap to the oracle narrows relative to the untrained maps.
    double raw = 0.0, before = 0.0, after = 0.0;
    const int seeds = 5;
    double oracle = 0.0;
    for (int s = 0; s < seeds; ++s) {
        synthetic::BullseyeConfig bc;
        bc.epsilon = 0.3;
        bc.n = 2000;
        bc.rings = synthetic::kWideRings;
        bc.seed = 40 + s;
        const auto d = synthetic::gen_bullseye_2d(bc);
        oracle = synthetic::mi_oracle_bullseye(0.3, synthetic::kWideRings);
        ModelShape shape;
        shape.feature_dims = {2};
        shape.map_dim = 2;
        shape.map_hidden = {8, 8};
        shape.head_hidden = {8, 8};
        shape.delta = 0;
        const MappingModel init = make_mapping_model(shape, 100 + s);
        TrainConfig cfg;
        cfg.delta = 0;
        cfg.iterations = 3000;
        cfg.seed = s;
        const Dataset data{{d.x}, d.y};
        const auto fit = train(init, data, cfg);
        raw += knn::ksg_mi(d.x, d.y, {});
        // The untrained model needs the same input scaling the trainer fits.
        MappingModel init_scaled = init;
        init_scaled.input_norm = fit.model.input_norm;
        before += oracle - knn::ksg_mi(map_feature(init_scaled, 0, d.x), d.y, {});
        after += oracle - knn::ksg_mi(map_feature(fit.model, 0, d.x), d.y, {});
    }
    EXPECT_GT(oracle - after / seeds, raw / seeds);
    EXPECT_LT(after, before);
}
