#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "apple/nn/adam.hpp"
#include "apple/nn/mlp.hpp"
#include "apple/nn/serialize.hpp"

using namespace apple;
using namespace apple::nn;

namespace {

double objective(const Mlp& net, const Vector& x, const Vector& og) { return net.forward(x).dot(og); }

/// Central differences over every parameter and input coordinate.
void expect_gradients_match(Mlp net, const Vector& x, const Vector& og) {
    const auto g = net.backward(x, og);
    auto flat = net.flat_params();
    std::vector<double> analytic;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        analytic.insert(analytic.end(), g.weight[l].data(), g.weight[l].data() + g.weight[l].size());
        analytic.insert(analytic.end(), g.bias[l].data(), g.bias[l].data() + g.bias[l].size());
    }
    ASSERT_EQ(analytic.size(), flat.size());
    const double h = 1e-4;
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const double keep = flat[i];
        flat[i] = keep + h;
        net.set_flat_params(flat);
        const double up = objective(net, x, og);
        flat[i] = keep - h;
        net.set_flat_params(flat);
        const double down = objective(net, x, og);
        flat[i] = keep;
        const double numeric = (up - down) / (2 * h);
        EXPECT_LE(std::abs(numeric - analytic[i]), std::max(1e-6, 1e-4 * std::abs(numeric))) << "param " << i;
    }
    net.set_flat_params(flat);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double numeric = (objective(net, xp, og) - objective(net, xm, og)) / (2 * h);
        EXPECT_LE(std::abs(numeric - g.input(i, 0)), std::max(1e-6, 1e-4 * std::abs(numeric)));
    }
}

Vector random_vector(Rng& rng, int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
    return v;
}

}  // namespace

TEST(Forward, ZeroNetGivesZeros) {
    const Mlp net({5, 8, 3});
    Vector x = Vector::Constant(5, 2.5);
    EXPECT_EQ(net.forward(x), Vector::Zero(3));
}

TEST(Forward, IdentityLayer) {
    Mlp net({3, 3});
    net.layers()[0].weight = Matrix::Identity(3, 3);
    Vector x(3);
    x << 1.5, -2.0, 0.25;
    EXPECT_EQ(net.forward(x), x);
}

TEST(Forward, GoldenOutput) {
    Rng rng(123);
    const auto net = Mlp::he_uniform({4, 5, 3}, rng);
    Vector x(4);
    x << 0.1, -0.2, 0.3, 0.4;
    const Vector y = net.forward(x);
    const std::vector<double> golden = {-0.21088842011958012, -0.15992588692440537, -0.033972009239712192};
    ASSERT_EQ(y.size(), 3);
    for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(y[i], golden[static_cast<std::size_t>(i)]);
}

TEST(Forward, ShapeMismatch) {
    const Mlp net({4, 2});
    EXPECT_THROW((void)net.forward(Vector::Zero(5)), ShapeMismatch);
    EXPECT_THROW((void)net.backward(Vector::Zero(4), Vector::Zero(3)), ShapeMismatch);
}

TEST(Forward, BatchMatchesSingle) {
    Rng rng(5);
    const auto net = Mlp::he_uniform({6, 7, 2}, rng);
    Matrix xs(6, 4);
    for (int c = 0; c < 4; ++c) xs.col(c) = random_vector(rng, 6);
    const Matrix ys = net.forward_batch(xs);
    for (int c = 0; c < 4; ++c) EXPECT_LE((ys.col(c) - net.forward(xs.col(c))).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Backward, LinearByHand) {
    Mlp net({1, 1});
    net.layers()[0].weight(0, 0) = 2.0;
    net.layers()[0].bias[0] = 0.5;
    Vector x(1), og(1);
    x << 3.0;
    og << 1.0;
    const auto g = net.backward(x, og);
    EXPECT_DOUBLE_EQ(g.weight[0](0, 0), 3.0);
    EXPECT_DOUBLE_EQ(g.bias[0][0], 1.0);
    EXPECT_DOUBLE_EQ(g.input(0, 0), 2.0);
}

TEST(Backward, ReluAtZeroHasZeroSubgradient) {
    Mlp net({1, 1, 1});
    net.layers()[0].weight(0, 0) = 1.0;
    net.layers()[1].weight(0, 0) = 1.0;
    Vector x(1), og(1);
    x << 0.0;
    og << 1.0;
    const auto g = net.backward(x, og);
    EXPECT_EQ(g.weight[0](0, 0), 0.0);
    EXPECT_EQ(g.bias[0][0], 0.0);
    EXPECT_EQ(g.input(0, 0), 0.0);
    EXPECT_EQ(g.bias[1][0], 1.0);
}

TEST(Backward, MatchesFiniteDifferences) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        auto net = Mlp::he_uniform({5, 6, 4, 3}, rng);
        for (auto& l : net.layers())
            for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = rng.uniform(-0.2, 0.2);
        expect_gradients_match(net, random_vector(rng, 5), random_vector(rng, 3));
    }
}

TEST(Backward, BatchIsSumOfSamples) {
    Rng rng(4);
    const auto net = Mlp::he_uniform({3, 4, 2}, rng);
    Matrix xs(3, 2), og(2, 2);
    xs.col(0) = random_vector(rng, 3);
    xs.col(1) = random_vector(rng, 3);
    og.col(0) = random_vector(rng, 2);
    og.col(1) = random_vector(rng, 2);
    Mlp::Tape tape;
    (void)net.forward_batch(xs, tape);
    const auto g = net.backward(tape, og);
    auto sum = net.backward(Vector(xs.col(0)), Vector(og.col(0)));
    sum += net.backward(Vector(xs.col(1)), Vector(og.col(1)));
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        EXPECT_LE((g.weight[l] - sum.weight[l]).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE((g.bias[l] - sum.bias[l]).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Adam, ZeroGradientLeavesParameters) {
    Rng rng(1);
    auto net = Mlp::he_uniform({3, 4, 2}, rng);
    const auto before = net;
    AdamState st(net, {});
    for (int i = 0; i < 3; ++i) adam_step(net, net.zero_gradients(), st);
    EXPECT_EQ(net, before);
    EXPECT_EQ(st.step_count, 3);
}

TEST(Adam, FirstStepIsLearningRate) {
    Mlp net({1, 1});
    AdamState st(net, {});
    auto g = net.zero_gradients();
    g.weight[0](0, 0) = 1.0;
    adam_step(net, g, st);
    // m_hat = v_hat = 1 at t = 1.
    EXPECT_DOUBLE_EQ(net.layers()[0].weight(0, 0), -3e-4 / (1.0 + 1e-8));
    EXPECT_EQ(net.layers()[0].bias[0], 0.0);

    ScalarAdam s;
    EXPECT_DOUBLE_EQ(s.step(0.0, 1.0), -3e-4 / (1.0 + 1e-8));
}

TEST(Adam, Deterministic) {
    Rng rng(2);
    const auto net0 = Mlp::he_uniform({3, 4, 2}, rng);
    const auto g = net0.backward(random_vector(rng, 3), random_vector(rng, 2));
    auto a = net0, b = net0;
    AdamState sa(a, {}), sb(b, {});
    adam_step(a, g, sa);
    adam_step(b, g, sb);
    EXPECT_EQ(a, b);
    EXPECT_EQ(sa, sb);
}

TEST(Training, SineRegression) {
    Rng rng(7);
    auto net = Mlp::he_uniform({1, 32, 32, 1}, rng);
    Matrix xs(1, 64), ys(1, 64);
    for (int i = 0; i < 64; ++i) {
        xs(0, i) = -std::numbers::pi + 2 * std::numbers::pi * i / 63.0;
        ys(0, i) = std::sin(xs(0, i));
    }
    auto mse = [&] { return (net.forward_batch(xs) - ys).squaredNorm() / 64.0; };
    const double initial = mse();
    AdamState st(net, {1e-2});
    for (int step = 0; step < 200; ++step) {
        Mlp::Tape tape;
        const Matrix out = net.forward_batch(xs, tape);
        const auto g = net.backward(tape, (2.0 / 64.0) * (out - ys));
        adam_step(net, g, st);
    }
    EXPECT_LE(mse(), 0.1 * initial);
}

TEST(Serialize, RoundTripIsBitwise) {
    Rng rng(9);
    auto net = Mlp::he_uniform({6, 5, 4}, rng);
    AdamState st(net, {});
    adam_step(net, net.backward(random_vector(rng, 6), random_vector(rng, 4)), st);
    const Checkpoint ck{net, st, 17};
    const auto path = std::filesystem::temp_directory_path() / "apple_test_nn_ckpt.json";
    save_checkpoint(path, ck);
    const auto back = load_checkpoint(path);
    std::filesystem::remove(path);
    EXPECT_EQ(back.net, net);
    EXPECT_EQ(back.adam, st);
    EXPECT_EQ(back.global_step, 17);
    const Vector x = random_vector(rng, 6);
    const Vector a = net.forward(x), b = back.net.forward(x);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(a[i], b[i]);
    EXPECT_EQ(mlp_from_json(to_json(net)), net);
}

TEST(Serialize, RejectsBadInput) {
    EXPECT_THROW((void)load_checkpoint("/nonexistent/ckpt.json"), FileNotFound);
    EXPECT_THROW((void)mlp_from_json(nlohmann::json{{"format", "apple-mlp"}, {"version", 99}}), FormatError);
    auto j = to_json(Mlp({2, 2}));
    j["layer_sizes"] = {2, 3};
    EXPECT_THROW((void)mlp_from_json(j), FormatError);
}
