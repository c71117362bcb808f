#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mbfs/error.hpp"
#include "mbfs/nn/dense_net.hpp"

using namespace mbfs;
using namespace mbfs::nn;

namespace {

DenseNet identity_net(Activation act, Vector bias) {
    DenseNet net = make_zero_net({2, 2}, {act});
    net.weights[0] = Matrix::Identity(2, 2);
    net.biases[0] = bias;
    return net;
}

// Scalar loss sum_o upstream_o * out_o.
double loss(const DenseNet& net, const std::vector<double>& x, const std::vector<double>& up) {
    const auto out = forward(net, x);
    double s = 0.0;
    for (std::size_t o = 0; o < out.size(); ++o) s += up[o] * out[o];
    return s;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace

TEST(DenseNet, IdentityForward) {
    const DenseNet net = identity_net(Activation::identity, Vector::Zero(2));
    const std::vector<double> in{1.0, 2.0};
    EXPECT_EQ(forward(net, in), (std::vector<double>{1.0, 2.0}));
}

TEST(DenseNet, ReluClampsNegative) {
    Vector b(2);
    b << -3.0, 0.0;
    const DenseNet net = identity_net(Activation::relu, b);
    const std::vector<double> in{1.0, 2.0};
    EXPECT_EQ(forward(net, in), (std::vector<double>{0.0, 2.0}));
}

TEST(DenseNet, TwoLayerHandComputed) {
    DenseNet net = make_zero_net({2, 2, 1}, {Activation::relu, Activation::identity});
    net.weights[0].setOnes();
    net.weights[1].setOnes();
    const std::vector<double> in{1.0, 1.0};
    EXPECT_EQ(forward(net, in), (std::vector<double>{4.0}));
}

TEST(DenseNet, ForwardRejectsWrongWidth) {
    const DenseNet net = identity_net(Activation::identity, Vector::Zero(2));
    const std::vector<double> in{1.0, 2.0, 3.0};
    try {
        forward(net, in);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::dimension_mismatch);
    }
}

TEST(DenseNet, ForwardIsPure) {
    std::mt19937_64 rng(3);
    const DenseNet net = make_dense_net({3, 5, 2}, rng);
    const DenseNet copy = net;
    const std::vector<double> in{0.1, -0.2, 0.3};
    const auto a = forward(net, in);
    const auto b = forward(net, in);
    EXPECT_EQ(a, b);
    EXPECT_TRUE(net.weights[0] == copy.weights[0]);
}

TEST(DenseNet, GlorotInitBounds) {
    std::mt19937_64 rng(1);
    const DenseNet net = make_dense_net({10, 20, 1}, rng);
    const double a0 = std::sqrt(6.0 / 30.0), a1 = std::sqrt(6.0 / 21.0);
    EXPECT_LE(net.weights[0].cwiseAbs().maxCoeff(), a0);
    EXPECT_LE(net.weights[1].cwiseAbs().maxCoeff(), a1);
    EXPECT_TRUE(net.biases[0].isZero());
    EXPECT_EQ(net.activations[0], Activation::relu);
    EXPECT_EQ(net.activations[1], Activation::identity);
}

TEST(Backward, LinearDerivative) {
    DenseNet net = make_zero_net({1, 1}, {Activation::identity});
    net.weights[0](0, 0) = 0.7;
    const std::vector<double> x{2.0}, up{1.0};
    const GradientTape g = backward(net, x, up);
    EXPECT_DOUBLE_EQ(g.weights[0](0, 0), 2.0);
    EXPECT_DOUBLE_EQ(g.biases[0](0), 1.0);
}

TEST(Backward, ZeroUpstreamGivesZeroTape) {
    std::mt19937_64 rng(5);
    const DenseNet net = make_dense_net({4, 6, 6, 3}, rng);
    const std::vector<double> x{0.3, -1.0, 2.0, 0.5}, up{0.0, 0.0, 0.0};
    EXPECT_TRUE(backward(net, x, up).all_zero());
}

TEST(Backward, FiniteDifferenceTenNets) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss;
    const double h = 1e-4;
    for (int trial = 0; trial < 10; ++trial) {
        DenseNet net = make_dense_net({3, 7, 5, 2}, rng);
        for (auto& b : net.biases) {
            for (Eigen::Index j = 0; j < b.size(); ++j) b(j) = 0.1 * gauss(rng);
        }
        std::vector<double> x(3), up(2);
        for (auto& v : x) v = gauss(rng);
        for (auto& v : up) v = gauss(rng);
        const GradientTape g = backward(net, x, up);
        for (std::size_t l = 0; l < net.num_layers(); ++l) {
            for (Eigen::Index r = 0; r < net.weights[l].rows(); ++r) {
                for (Eigen::Index c = 0; c < net.weights[l].cols(); ++c) {
                    DenseNet p = net, m = net;
                    p.weights[l](r, c) += h;
                    m.weights[l](r, c) -= h;
                    const double fd = (loss(p, x, up) - loss(m, x, up)) / (2 * h);
                    EXPECT_LE(rel_err(fd, g.weights[l](r, c)), 1e-4) << "layer " << l;
                }
                DenseNet p = net, m = net;
                p.biases[l](r) += h;
                m.biases[l](r) -= h;
                const double fd = (loss(p, x, up) - loss(m, x, up)) / (2 * h);
                EXPECT_LE(rel_err(fd, g.biases[l](r)), 1e-4);
            }
        }
    }
}

TEST(Backward, BatchMatchesPerSampleAndInputGradient) {
    std::mt19937_64 rng(2);
    const DenseNet net = make_dense_net({3, 4, 2}, rng);
    Matrix in(5, 3), up(5, 2);
    std::normal_distribution<double> gauss;
    for (Eigen::Index i = 0; i < in.size(); ++i) in.data()[i] = gauss(rng);
    for (Eigen::Index i = 0; i < up.size(); ++i) up.data()[i] = gauss(rng);
    ForwardCache cache;
    forward_batch(net, in, &cache);
    GradientTape batch = GradientTape::zeros_like(net);
    Matrix din;
    backward_batch(net, cache, up, batch, &din);
    GradientTape sum = GradientTape::zeros_like(net);
    for (Eigen::Index i = 0; i < 5; ++i) {
        const std::vector<double> x(in.row(i).data(), in.row(i).data() + 3);
        const std::vector<double> u(up.row(i).data(), up.row(i).data() + 2);
        sum += backward(net, x, u);
        for (int c = 0; c < 3; ++c) {
            std::vector<double> xp = x, xm = x;
            xp[c] += 1e-5;
            xm[c] -= 1e-5;
            EXPECT_NEAR((loss(net, xp, u) - loss(net, xm, u)) / 2e-5, din(i, c), 1e-6);
        }
    }
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        EXPECT_TRUE(batch.weights[l].isApprox(sum.weights[l], 1e-12));
        EXPECT_TRUE(batch.biases[l].isApprox(sum.biases[l], 1e-12));
    }
}

TEST(Adam, ZeroGradientLeavesParameters) {
    std::mt19937_64 rng(4);
    DenseNet net = make_dense_net({2, 3, 1}, rng);
    const DenseNet before = net;
    OptimizerState st = OptimizerState::for_net(net);
    adam_step(net, GradientTape::zeros_like(net), st, true);
    EXPECT_EQ(st.step, 1u);
    EXPECT_TRUE(net.weights[0] == before.weights[0]);
    EXPECT_TRUE(net.weights[1] == before.weights[1]);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    DenseNet net = make_zero_net({1, 1}, {Activation::identity});
    GradientTape g = GradientTape::zeros_like(net);
    g.weights[0](0, 0) = 0.37;
    g.biases[0](0) = -2.5;
    OptimizerState st = OptimizerState::for_net(net);
    adam_step(net, g, st, true);
    EXPECT_NEAR(net.weights[0](0, 0), 1e-3, 1e-9);
    EXPECT_NEAR(net.biases[0](0), -1e-3, 1e-9);
}

TEST(Adam, ScalarAscentConverges) {
    DenseNet net = make_zero_net({1, 1}, {Activation::identity});
    OptimizerState st = OptimizerState::for_net(net, AdamConfig{0.1, 0.9, 0.999, 1e-8});
    for (int s = 0; s < 200; ++s) {
        GradientTape g = GradientTape::zeros_like(net);
        g.biases[0](0) = -2.0 * (net.biases[0](0) - 3.0);  // d/dw of -(w-3)^2
        adam_step(net, g, st, true);
    }
    EXPECT_LT(std::abs(net.biases[0](0) - 3.0), 1e-2);
    EXPECT_EQ(st.step, 200u);
}

TEST(Adam, NonFiniteGradientNamesBlock) {
    std::mt19937_64 rng(4);
    DenseNet net = make_dense_net({2, 3, 1}, rng);
    const DenseNet before = net;
    GradientTape g = GradientTape::zeros_like(net);
    g.biases[1](0) = std::nan("");
    OptimizerState st = OptimizerState::for_net(net);
    try {
        adam_step(net, g, st, false);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::non_finite);
        EXPECT_NE(std::string(e.what()).find("bias"), std::string::npos) << e.what();
    }
    EXPECT_EQ(st.step, 0u);
    EXPECT_TRUE(net.biases[1] == before.biases[1]);
}

TEST(Adam, Deterministic) {
    auto run = [] {
        std::mt19937_64 rng(8);
        DenseNet net = make_dense_net({2, 4, 1}, rng);
        OptimizerState st = OptimizerState::for_net(net);
        for (int s = 0; s < 20; ++s) {
            const std::vector<double> x{0.5, -0.25}, up{1.0};
            adam_step(net, backward(net, x, up), st, false);
        }
        return net;
    };
    const DenseNet a = run(), b = run();
    for (std::size_t l = 0; l < a.num_layers(); ++l) EXPECT_TRUE(a.weights[l] == b.weights[l]);
}

TEST(Checkpoint, RoundTripIsLossless) {
    std::mt19937_64 rng(6);
    DenseNet net = make_dense_net({3, 4, 2}, rng);
    net.biases[0](1) = 0.1 + 1e-17;
    const DenseNet back = dense_net_from_json(nlohmann::json::parse(to_json(net).dump()));
    EXPECT_EQ(back.layer_dims, net.layer_dims);
    EXPECT_EQ(back.activations, net.activations);
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        EXPECT_TRUE(back.weights[l] == net.weights[l]);
        EXPECT_TRUE(back.biases[l] == net.biases[l]);
    }
    const auto j = to_json(net);
    for (const char* key : {"layer_dims", "activations", "weights", "biases"}) EXPECT_TRUE(j.contains(key));
}

TEST(Checkpoint, RejectsInconsistentShapes) {
    std::mt19937_64 rng(6);
    auto j = to_json(make_dense_net({3, 4, 2}, rng));
    j["layer_dims"] = {3, 5, 2};
    EXPECT_THROW(dense_net_from_json(j), Error);
}
