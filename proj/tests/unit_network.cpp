#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "seplab/network.hpp"

using namespace seplab;
using namespace testutil;

namespace {

std::vector<LayerSpec> three_layer(int out) {
    return {{8, Activation::ReLU}, {6, Activation::ReLU},
            {std::size_t(out), Activation::Identity}};
}

}  // namespace

TEST_CASE("init_network") {
    SUBCASE("deterministic per seed") {
        const Network a = init_network(three_layer(3), 5, 42);
        const Network b = init_network(three_layer(3), 5, 42);
        CHECK(a == b);
        const Network c = init_network(three_layer(3), 5, 43);
        CHECK(a.layers[0].weights != c.layers[0].weights);
    }
    SUBCASE("biases start at zero") {
        const Network net = init_network(three_layer(2), 4, 7);
        for (const auto& layer : net.layers)
            for (double b : layer.biases) CHECK(b == 0.0);
    }
    SUBCASE("weights respect the uniform bound") {
        const Network net = init_network(three_layer(2), 4, 7);
        for (const auto& layer : net.layers) {
            const double a = std::sqrt(6.0 / double(layer.in + layer.out));
            for (double w : layer.weights) {
                CHECK(w <= a);
                CHECK(w >= -a);
            }
        }
    }
    SUBCASE("rejects bad specs") {
        CHECK_THROWS_AS(init_network({}, 3, 0), InputError);
        CHECK_THROWS_AS(init_network({{4, Activation::ReLU}}, 3, 0), InputError);
        CHECK_THROWS_AS(init_network({{0, Activation::Identity}}, 3, 0), InputError);
    }
}

TEST_CASE("forward") {
    SUBCASE("zero network gives zero logits") {
        Network net = init_network(three_layer(3), 4, 1);
        for (auto& layer : net.layers) {
            std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
            std::fill(layer.biases.begin(), layer.biases.end(), 0.0);
        }
        const Vector out = logits_eval(net, {0.1, 0.2, 0.3, 0.4});
        for (double v : out) CHECK(v == 0.0);
    }
    SUBCASE("hand-computed single layer") {
        const Network net = linear_net({{1.0, -2.0}}, {0.5});
        const Vector out = logits_eval(net, {1.0, 1.0});
        CHECK(out[0] == doctest::Approx(-0.5));
    }
    SUBCASE("dropout rate 0 makes train and eval identical") {
        Network net = init_network(three_layer(2), 3, 9);
        net.dropout_rate = 0.0;
        RandomStream rng(1);
        const Vector x{0.3, 0.6, 0.9};
        CHECK(forward(net, x, Mode::Train, &rng) == logits_eval(net, x));
    }
    SUBCASE("dimension mismatch rejected") {
        const Network net = init_network(three_layer(2), 3, 9);
        CHECK_THROWS_AS(logits_eval(net, {0.1}), InputError);
    }
    SUBCASE("non-finite parameters produce a numeric error") {
        Network net = linear_net({{1.0}}, {0.0});
        net.layers[0].weights[0] = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(logits_eval(net, {0.5}), NumericError);
    }
}

TEST_CASE("inverted dropout keeps the activation expectation") {
    Network net = init_network({{32, Activation::ReLU}, {1, Activation::Identity}},
                               2, 3);
    net.dropout_rate = 0.4;
    // Make the output the mean of hidden activations so the expectation is easy.
    auto& last = net.layers[1];
    std::fill(last.weights.begin(), last.weights.end(), 1.0 / 32.0);
    std::fill(last.biases.begin(), last.biases.end(), 0.0);

    const Vector x{0.7, 0.4};
    const double eval_out = logits_eval(net, x)[0];
    RandomStream rng(11);
    double mean = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) mean += forward(net, x, Mode::Train, &rng)[0];
    mean /= draws;
    CHECK(mean == doctest::Approx(eval_out).epsilon(0.02));
}

TEST_CASE("backward") {
    SUBCASE("zero upstream gives zero gradients") {
        const Network net = init_network(three_layer(3), 4, 2);
        ForwardTrace trace;
        forward(net, {0.1, 0.2, 0.3, 0.4}, Mode::Eval, nullptr, &trace);
        const auto res = backward(net, trace, {0.0, 0.0, 0.0});
        for (const auto& g : res.param_grads) {
            for (double v : g.dw) CHECK(v == 0.0);
            for (double v : g.db) CHECK(v == 0.0);
        }
        for (double v : res.input_grad) CHECK(v == 0.0);
    }
    SUBCASE("linear net input gradient is W^T upstream") {
        const Network net = linear_net({{1.0, -2.0}, {3.0, 0.5}}, {0.0, 0.0});
        ForwardTrace trace;
        forward(net, {0.2, 0.8}, Mode::Eval, nullptr, &trace);
        const auto res = backward(net, trace, {2.0, -1.0});
        CHECK(res.input_grad[0] == doctest::Approx(2.0 * 1.0 - 1.0 * 3.0));
        CHECK(res.input_grad[1] == doctest::Approx(2.0 * -2.0 - 1.0 * 0.5));
    }
    SUBCASE("architecture mismatch rejected") {
        const Network net = init_network(three_layer(3), 4, 2);
        const Network other = init_network(three_layer(2), 4, 2);
        ForwardTrace trace;
        forward(net, {0.1, 0.2, 0.3, 0.4}, Mode::Eval, nullptr, &trace);
        CHECK_THROWS_AS(backward(other, trace, {0.0, 0.0}), InputError);
    }
}

TEST_CASE("gradient check against central differences") {
    RandomStream rng(6);
    for (int trial = 0; trial < 5; ++trial) {
        const Network net = init_network(three_layer(3), 5, 100 + trial);
        std::vector<Vector> batch;
        for (int b = 0; b < 3; ++b) {
            Vector x(5);
            for (double& v : x) v = rng.uniform();
            batch.push_back(std::move(x));
        }
        const auto report = grad_check(net, batch, 1e-5, 1e-4);
        CHECK(report.passed);
        CHECK(report.max_rel_err < 1e-4);
    }
}

TEST_CASE("a corrupted analytic gradient disagrees with finite differences") {
    Network net = init_network(three_layer(2), 4, 5);
    const Vector x{0.1, 0.2, 0.3, 0.4};
    const Vector upstream{1.0, -0.5};

    ForwardTrace trace;
    forward(net, x, Mode::Eval, nullptr, &trace);
    auto res = backward(net, trace, upstream);

    // Pick a weight whose gradient is clearly nonzero, corrupt it, and check
    // that the finite difference agrees with the original but not the mutant.
    std::size_t li = 0, wi = 0;
    for (std::size_t l = 0; l < res.param_grads.size(); ++l)
        for (std::size_t k = 0; k < res.param_grads[l].dw.size(); ++k)
            if (std::abs(res.param_grads[l].dw[k]) >
                std::abs(res.param_grads[li].dw[wi])) {
                li = l;
                wi = k;
            }
    const double analytic = res.param_grads[li].dw[wi];
    REQUIRE(std::abs(analytic) > 1e-6);
    const double corrupted = analytic * 2.0 + 1.0;

    auto scalar = [&](Network& n) {
        const Vector out = forward(n, x, Mode::Eval, nullptr);
        return upstream[0] * out[0] + upstream[1] * out[1];
    };
    const double step = 1e-5;
    Network work = net;
    work.layers[li].weights[wi] += step;
    const double hi = scalar(work);
    work.layers[li].weights[wi] -= 2.0 * step;
    const double lo = scalar(work);
    const double fd = (hi - lo) / (2.0 * step);

    CHECK(std::abs(fd - analytic) < 1e-4 * std::max(1.0, std::abs(analytic)));
    CHECK(std::abs(fd - corrupted) > 1e-2);
}

TEST_CASE("model save/load") {
    TempDir tmp;
    Network net = init_network(three_layer(3), 6, 77);
    net.dropout_rate = 0.25;

    SUBCASE("round-trip is bit exact") {
        save_model(net, tmp.file("m.bin"));
        const Network back = load_model(tmp.file("m.bin"));
        CHECK(back == net);
        const Vector x{0.1, 0.9, 0.2, 0.8, 0.3, 0.7};
        CHECK(logits_eval(back, x) == logits_eval(net, x));
    }
    SUBCASE("truncated file rejected") {
        save_model(net, tmp.file("m.bin"));
        std::ifstream in(tmp.file("m.bin"), std::ios::binary);
        std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
        bytes.resize(bytes.size() / 2);
        std::ofstream out(tmp.file("trunc.bin"), std::ios::binary);
        out.write(bytes.data(), std::streamsize(bytes.size()));
        out.close();
        CHECK_THROWS_AS(load_model(tmp.file("trunc.bin")), FormatError);
    }
    SUBCASE("bad magic rejected") {
        write_file(tmp.file("bad.bin"), {'N', 'O', 'P', 'E', 0, 0, 0, 0, 1});
        CHECK_THROWS_AS(load_model(tmp.file("bad.bin")), FormatError);
    }
}
