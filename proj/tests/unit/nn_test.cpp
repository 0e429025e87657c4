#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "aisel/aisel.hpp"
#include "../support/fd.hpp"

using namespace aisel;
using namespace aisel::nn;

namespace {

Matrix row(std::initializer_list<double> v) {
    Matrix m(1, static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) m(0, i++) = x;
    return m;
}

std::vector<LayerSpec> small_mlp() { return {{2, 3, Activation::relu}, {3, 1, Activation::identity}}; }

} // namespace

TEST(InitNetwork, SameSeedGivesIdenticalParameters) {
    EXPECT_TRUE(init_network(small_mlp(), 7) == init_network(small_mlp(), 7));
    EXPECT_FALSE(init_network(small_mlp(), 7) == init_network(small_mlp(), 8));
}

TEST(InitNetwork, BiasesStartAtZero) {
    const auto net = init_network({{16, 8, Activation::leaky_relu}, {8, 4, Activation::tanh}, {4, 3, Activation::softmax}}, 3);
    for (const auto& l : net.layers) EXPECT_EQ(l.bias.cwiseAbs().maxCoeff(), 0.0);
}

TEST(InitNetwork, WeightVarianceNearInverseFanIn) {
    // Uniform on [-a, a] with a = sqrt(3 / fan_in) has variance 1 / fan_in.
    const auto net = init_network({{4, 4, Activation::tanh}}, 1);
    const auto& w = net.layers[0].weights;
    const double mean = w.mean();
    const double var = (w.array() - mean).square().sum() / static_cast<double>(w.size() - 1);
    EXPECT_GT(var, 0.5 * 0.25);
    EXPECT_LT(var, 1.5 * 0.25);

    // A large layer pins the variance much tighter.
    const auto big = init_network({{200, 200, Activation::tanh}}, 2);
    const auto& wb = big.layers[0].weights;
    const double vb = (wb.array() - wb.mean()).square().mean();
    EXPECT_NEAR(vb, 1.0 / 200.0, 0.05 / 200.0);
}

TEST(InitNetwork, RejectsBrokenSpecs) {
    EXPECT_THROW(init_network({}, 0), ShapeError);
    EXPECT_THROW(init_network({{2, 3, Activation::relu}, {4, 1, Activation::identity}}, 0), ShapeError);
    EXPECT_THROW(init_network({{2, 0, Activation::relu}}, 0), ShapeError);
    EXPECT_THROW(init_network({{2, 3, Activation::softmax}, {3, 1, Activation::identity}}, 0), ArgumentError);
}

TEST(Forward, IdentityLayerPassesInputThrough) {
    auto net = zero_network({{3, 3, Activation::identity}});
    net.layers[0].weights = Matrix::Identity(3, 3);
    const Matrix v = row({0.25, -1.5, 7.0});
    EXPECT_EQ(predict(net, v), v);
}

TEST(Forward, SoftmaxOfZeroLogitsIsUniform) {
    const auto net = zero_network({{5, 10, Activation::softmax}});
    const Matrix p = predict(net, Matrix::Random(4, 5));
    for (Eigen::Index i = 0; i < p.size(); ++i) EXPECT_DOUBLE_EQ(p.data()[i], 0.1);
}

TEST(Forward, LeakyReluSlope) {
    auto net = zero_network({{1, 1, Activation::leaky_relu}});
    net.layers[0].weights(0, 0) = 1.0;
    EXPECT_DOUBLE_EQ(predict(net, row({-1.0}))(0, 0), -0.2);
    EXPECT_DOUBLE_EQ(predict(net, row({2.0}))(0, 0), 2.0);
}

TEST(Forward, SoftmaxRowsAreStrictlyPositiveAndSumToOne) {
    const auto net = init_network({{6, 16, Activation::relu}, {16, 4, Activation::softmax}}, 5);
    Engine rng(9);
    Matrix x(50, 6);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = uniform(rng, -20.0, 20.0);
    const Matrix p = predict(net, x);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-12);
        EXPECT_GT(p.row(i).minCoeff(), 0.0);
    }
}

TEST(Forward, RejectsWrongInputWidth) {
    const auto net = init_network(small_mlp(), 0);
    EXPECT_THROW(forward(net, Matrix::Zero(1, 3)), ShapeError);
}

TEST(Backward, ZeroOutputGradientGivesZeroGradients) {
    const auto net = init_network(small_mlp(), 1);
    const auto cache = forward(net, Matrix::Random(4, 2));
    const auto g = backward(net, cache, Matrix::Zero(4, 1));
    for (std::size_t i = 0; i < net.parameter_count(); ++i) EXPECT_EQ(g.parameter(i), 0.0);
    EXPECT_EQ(g.input.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Backward, LinearLayerWeightGradientIsInputOuterOnes) {
    auto net = init_network({{3, 2, Activation::identity}}, 4);
    const Matrix x = row({0.5, -2.0, 3.0});
    const auto g = backward(net, forward(net, x), Matrix::Ones(1, 2));
    for (Eigen::Index i = 0; i < 3; ++i) {
        for (Eigen::Index j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(g.layers[0].d_weights(i, j), x(0, i));
    }
    EXPECT_DOUBLE_EQ(g.layers[0].d_bias(0), 1.0);
    EXPECT_DOUBLE_EQ(g.layers[0].d_bias(1), 1.0);
}

TEST(Backward, StaleCacheIsRejected) {
    auto net = init_network(small_mlp(), 1);
    const auto cache = forward(net, Matrix::Random(2, 2));
    clip_params(net, 0.5);
    EXPECT_THROW(backward(net, cache, Matrix::Ones(2, 1)), ArgumentError);
}

TEST(Backward, MatchesFiniteDifferencesForEveryActivation) {
    for (auto act : {Activation::identity, Activation::relu, Activation::leaky_relu, Activation::tanh,
                     Activation::sigmoid, Activation::softmax}) {
        for (std::uint64_t draw = 0; draw < 5; ++draw) {
            const auto p = check::random_problem({{5, 7, Activation::tanh}, {7, 4, act}}, 3, -1.0, 1.0, draw);
            const auto rep = check::check_gradients(p, 1000, draw);
            EXPECT_LT(rep.max_rel_error, 1e-4) << nn::to_string(act) << " draw " << draw;
            EXPECT_GT(rep.checked, 0u);
        }
    }
}

TEST(Backward, MatchesFiniteDifferencesForCrossEntropyShortcut) {
    for (std::uint64_t draw = 0; draw < 5; ++draw) {
        const auto p = check::random_problem({{6, 8, Activation::relu}, {8, 3, Activation::softmax}}, 4, 0.0, 1.0,
                                               draw, check::FdLoss::cross_entropy);
        EXPECT_LT(check::check_gradients(p, 1000, draw).max_rel_error, 1e-4);
    }
}

TEST(Optimizer, SgdStep) {
    auto net = zero_network({{1, 1, Activation::identity}});
    net.layers[0].weights(0, 0) = 1.0;
    auto g = Gradients::zeros_like(net);
    g.layers[0].d_weights(0, 0) = 2.0;
    auto opt = OptimizerState::make(OptimizerKind::sgd, 0.1);
    step(net, g, opt);
    EXPECT_DOUBLE_EQ(net.layers[0].weights(0, 0), 0.8);
}

TEST(Optimizer, ZeroGradientLeavesSgdParametersUnchanged) {
    auto net = init_network(small_mlp(), 3);
    const auto before = net;
    auto opt = OptimizerState::make(OptimizerKind::sgd, 0.5);
    step(net, Gradients::zeros_like(net), opt);
    EXPECT_TRUE(net == before);
}

TEST(Optimizer, AdamFirstStepHasMagnitudeLearningRate) {
    // t = 1: m = 0.1 g, v = 0.001 g^2, m_hat = g, v_hat = g^2, so the update
    // is lr * g / (|g| + eps) = lr / (1 + eps) for g = 1.
    auto net = zero_network({{1, 1, Activation::identity}});
    net.layers[0].weights(0, 0) = 0.3;
    auto g = Gradients::zeros_like(net);
    g.layers[0].d_weights(0, 0) = 1.0;
    auto opt = OptimizerState::make(OptimizerKind::adam, 1e-3);
    step(net, g, opt);
    const double expected = 0.3 - 1e-3 / (1.0 + 1e-8);
    EXPECT_NEAR(net.layers[0].weights(0, 0), expected, 1e-15);
    EXPECT_NEAR(0.3 - net.layers[0].weights(0, 0), 1e-3, 1e-6);
    EXPECT_EQ(net.layers[0].bias(0), 0.0);
}

TEST(Optimizer, RejectsNonPositiveLearningRate) {
    EXPECT_THROW(OptimizerState::make(OptimizerKind::sgd, 0.0), ArgumentError);
}

TEST(Optimizer, IdenticalRunsAreBitIdentical) {
    auto run = [] {
        auto net = init_network({{4, 6, Activation::relu}, {6, 2, Activation::softmax}}, 11);
        auto opt = OptimizerState::make(OptimizerKind::adam, 1e-2);
        Engine rng(4);
        for (int s = 0; s < 50; ++s) {
            Matrix x(8, 4);
            for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = uniform(rng, -1.0, 1.0);
            std::vector<int> y(8);
            for (auto& v : y) v = static_cast<int>(uniform_index(rng, 2));
            const auto cache = forward(net, x);
            step(net, backward_from_logits(net, cache, loss_cross_entropy(cache.output(), y).grad), opt);
        }
        return net;
    };
    EXPECT_TRUE(run() == run());
}

TEST(Clip, ProjectsOntoBox) {
    auto net = zero_network({{1, 2, Activation::identity}});
    net.layers[0].weights(0, 0) = 0.5;
    net.layers[0].weights(0, 1) = -0.005;
    net.layers[0].bias(0) = -3.0;
    clip_params(net, 0.01);
    EXPECT_EQ(net.layers[0].weights(0, 0), 0.01);
    EXPECT_EQ(net.layers[0].weights(0, 1), -0.005);
    EXPECT_EQ(net.layers[0].bias(0), -0.01);
}

TEST(Clip, IsIdempotentAndNonExpansive) {
    auto a = init_network({{8, 8, Activation::relu}, {8, 1, Activation::identity}}, 2);
    auto b = init_network({{8, 8, Activation::relu}, {8, 1, Activation::identity}}, 3);
    auto sup = [](const Network& x, const Network& y) {
        double m = 0.0;
        for (std::size_t i = 0; i < x.parameter_count(); ++i) m = std::max(m, std::abs(x.parameter(i) - y.parameter(i)));
        return m;
    };
    const double before = sup(a, b);
    clip_params(a, 0.1);
    clip_params(b, 0.1);
    EXPECT_LE(sup(a, b), before);
    EXPECT_LE(a.max_abs_parameter(), 0.1);
    auto again = a;
    clip_params(again, 0.1);
    EXPECT_TRUE(again == a);
    EXPECT_THROW(clip_params(a, 0.0), ArgumentError);
}

TEST(LossMse, Examples) {
    const auto same = loss_mse(row({1.0, 2.0}), row({1.0, 2.0}));
    EXPECT_EQ(same.value, 0.0);
    EXPECT_EQ(same.grad.cwiseAbs().maxCoeff(), 0.0);
    const auto r = loss_mse(row({1.0, 0.0}), row({0.0, 0.0}));
    EXPECT_DOUBLE_EQ(r.value, 1.0);
    EXPECT_DOUBLE_EQ(r.grad(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(r.grad(0, 1), 0.0);
}

TEST(LossMse, GradientMatchesFiniteDifferences) {
    Engine rng(3);
    Matrix p(4, 3), t(4, 3);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        p.data()[i] = uniform(rng, -1.0, 1.0);
        t.data()[i] = uniform(rng, -1.0, 1.0);
    }
    const auto r = loss_mse(p, t);
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        Matrix up = p, dn = p;
        up.data()[i] += h;
        dn.data()[i] -= h;
        const double fd = (loss_mse(up, t).value - loss_mse(dn, t).value) / (2.0 * h);
        EXPECT_LT(check::rel_error(r.grad.data()[i], fd), 1e-6);
    }
}

TEST(LossCrossEntropy, Examples) {
    const std::vector<int> y{1};
    EXPECT_EQ(loss_cross_entropy(row({0.0, 1.0, 0.0}), y).value, 0.0);
    const Matrix uniform10 = Matrix::Constant(1, 10, 0.1);
    EXPECT_NEAR(loss_cross_entropy(uniform10, y).value, std::log(10.0), 1e-12);
    EXPECT_NEAR(loss_cross_entropy(uniform10, y).value, 2.302585, 1e-6);
    EXPECT_THROW(loss_cross_entropy(uniform10, std::vector<int>{10}), ArgumentError);
}

TEST(LossCrossEntropy, LogitGradientMatchesFiniteDifferences) {
    Engine rng(5);
    Matrix z(3, 4);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = uniform(rng, -2.0, 2.0);
    const std::vector<int> y{0, 3, 2};
    auto softmax = [](Matrix m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            m.row(r) = (m.row(r).array() - m.row(r).maxCoeff()).exp().matrix();
            m.row(r) /= m.row(r).sum();
        }
        return m;
    };
    const auto r = loss_cross_entropy(softmax(z), y);
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        Matrix up = z, dn = z;
        up.data()[i] += h;
        dn.data()[i] -= h;
        const double fd = (loss_cross_entropy(softmax(up), y).value - loss_cross_entropy(softmax(dn), y).value) / (2.0 * h);
        EXPECT_LT(check::rel_error(r.grad.data()[i], fd), 1e-5);
    }
}

TEST(Checkpoint, RoundTripIsExact) {
    const auto net = init_network({{5, 4, Activation::leaky_relu}, {4, 3, Activation::softmax}}, 6);
    std::stringstream ss;
    write_checkpoint(ss, net);
    EXPECT_TRUE(read_checkpoint(ss) == net);
}

TEST(Checkpoint, RejectsCorruptInput) {
    std::stringstream bad("XXXX");
    EXPECT_THROW(read_checkpoint(bad), FormatError);
    std::stringstream ss;
    write_checkpoint(ss, init_network(small_mlp(), 1));
    std::string s = ss.str();
    std::stringstream truncated(s.substr(0, s.size() - 3));
    EXPECT_THROW(read_checkpoint(truncated), FormatError);
}
