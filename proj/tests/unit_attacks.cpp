#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "seplab/attacks.hpp"

using namespace seplab;
using namespace testutil;

namespace {

Network constant_net(int classes, double value) {
    Network net = linear_net({{0.0, 0.0}}, {value});
    net.layers[0].weights.assign(std::size_t(classes) * 2, 0.0);
    net.layers[0].biases.assign(std::size_t(classes), value);
    net.layers[0].out = std::size_t(classes);
    net.class_count = classes;
    return net;
}

// Binary net with logits (w.x, -w.x).
Network margin_net(const Vector& w) {
    Vector neg(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) neg[i] = -w[i];
    std::vector<std::vector<double>> rows = {std::vector<double>(w.begin(), w.end()),
                                             std::vector<double>(neg.begin(), neg.end())};
    return linear_net(rows, {0.0, 0.0});
}

}  // namespace

TEST_CASE("softmax cross-entropy") {
    const Vector uniform(10, 0.0);
    CHECK(cross_entropy(uniform, 3) == doctest::Approx(std::log(10.0)));
    const Vector confident{50.0, 0.0};
    CHECK(cross_entropy(confident, 1) == doctest::Approx(0.0).epsilon(1e-12));
    const Vector g = cross_entropy_grad({0.0, 0.0}, 1);
    CHECK(g[0] == doctest::Approx(-0.5));
    CHECK(g[1] == doctest::Approx(0.5));
}

TEST_CASE("strict argmax treats ties as misclassification") {
    CHECK(strict_argmax({1.0, 2.0, 0.5}) == 2);
    CHECK(strict_argmax({2.0, 2.0, 0.5}) == 0);
}

TEST_CASE("pgd") {
    SUBCASE("constant net never succeeds and stays feasible") {
        const Network net = constant_net(3, 0.7);
        AttackConfig cfg;
        cfg.epsilon = 0.1;
        // Constant logits tie, so every clean point is already 'misclassified'
        // under the strict rule; success reflects that but the point stays put.
        const auto out = pgd(net, {0.5, 0.5}, 1, cfg);
        CHECK(dist(Metric::Linf, out.adversarial_point, {0.5, 0.5}) <= 0.1 + 1e-12);
        SUBCASE("with a clear winner the attack fails") {
            Network biased = constant_net(3, 0.0);
            biased.layers[0].biases = {1.0, 0.0, 0.0};
            const auto o2 = pgd(biased, {0.5, 0.5}, 1, cfg);
            CHECK_FALSE(o2.success);
        }
    }
    SUBCASE("epsilon 0 returns the input exactly") {
        const Network net = margin_net({1.0, -2.0});
        AttackConfig cfg;
        cfg.epsilon = 0.0;
        const auto out = pgd(net, {0.3, 0.4}, 1, cfg);
        CHECK(out.adversarial_point == Vector{0.3, 0.4});
    }
    SUBCASE("linear model reaches the analytic worst case") {
        const Vector w{1.0, -2.0};
        const Network net = margin_net(w);
        const Vector x{0.5, 0.5};
        REQUIRE(strict_argmax(logits_eval(net, x)) == 2);  // w.x = -0.5 < 0
        AttackConfig cfg;
        cfg.epsilon = 0.1;  // default 10 steps of eps/5
        const auto out = pgd(net, x, 2, cfg);
        const double clean_logit = logits_eval(net, x)[1];
        const double adv_logit = logits_eval(net, out.adversarial_point)[1];
        // ||w||_1 = 3, so the y-logit can drop by at most eps * 3 = 0.3.
        CHECK(clean_logit - adv_logit == doctest::Approx(0.3).epsilon(1e-9));
    }
    SUBCASE("five steps of eps/5 already reach the corner") {
        const Network net = margin_net({1.0, -2.0});
        AttackConfig cfg;
        cfg.epsilon = 0.1;
        cfg.steps = 5;
        const auto out = pgd(net, {0.5, 0.5}, 2, cfg);
        CHECK(logits_eval(net, {0.5, 0.5})[1] -
                  logits_eval(net, out.adversarial_point)[1] ==
              doctest::Approx(0.3).epsilon(1e-9));
    }
    SUBCASE("deterministic given the seed") {
        const Network net = init_network(
            {{8, Activation::ReLU}, {3, Activation::Identity}}, 2, 4);
        AttackConfig cfg;
        cfg.epsilon = 0.2;
        cfg.random_start = true;
        cfg.restarts = 3;
        cfg.seed = 99;
        const auto a = pgd(net, {0.4, 0.6}, 1, cfg);
        const auto b = pgd(net, {0.4, 0.6}, 1, cfg);
        CHECK(a.adversarial_point == b.adversarial_point);
        CHECK(a.loss_achieved == b.loss_achieved);
    }
    SUBCASE("feasibility holds with random starts near the box edge") {
        const Network net = margin_net({3.0, 1.0});
        AttackConfig cfg;
        cfg.epsilon = 0.3;
        cfg.random_start = true;
        cfg.seed = 5;
        const auto out = pgd(net, {0.05, 0.95}, 1, cfg);
        for (double v : out.adversarial_point) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("multi-targeted attack") {
    SUBCASE("constant logits never flip a strict winner") {
        Network net = constant_net(3, 0.0);
        net.layers[0].biases = {1.0, 0.0, 0.0};
        AttackConfig cfg;
        cfg.epsilon = 0.2;
        cfg.steps = 20;
        const auto out = multi_targeted(net, {0.5, 0.5}, 1, cfg);
        CHECK_FALSE(out.success);
    }
    SUBCASE("binary case reduces to margin ascent toward the single target") {
        const Network net = margin_net({1.0, -2.0});
        AttackConfig cfg;
        cfg.epsilon = 0.05;  // not enough to cross: |w.x| = 0.5 > 0.15
        cfg.steps = 20;
        cfg.seed = 3;
        const auto out = multi_targeted(net, {0.5, 0.5}, 2, cfg);
        CHECK_FALSE(out.success);
        // Large enough radius flips it.
        cfg.epsilon = 0.25;
        const auto flip = multi_targeted(net, {0.5, 0.5}, 2, cfg);
        CHECK(flip.success);
        CHECK(strict_argmax(logits_eval(net, flip.adversarial_point)) == 1);
    }
    SUBCASE("deterministic given the seed") {
        const Network net = init_network(
            {{8, Activation::ReLU}, {4, Activation::Identity}}, 3, 8);
        AttackConfig cfg;
        cfg.epsilon = 0.15;
        cfg.steps = 20;
        cfg.seed = 21;
        const auto a = multi_targeted(net, {0.2, 0.5, 0.8}, 2, cfg);
        const auto b = multi_targeted(net, {0.2, 0.5, 0.8}, 2, cfg);
        CHECK(a.adversarial_point == b.adversarial_point);
    }
}

TEST_CASE("adv_accuracy") {
    const Dataset ds = gen_blobs({{0.25, 0.25}, {0.75, 0.75}}, 0.05, 30, 11);
    const Network net = margin_net({1.0, 1.0});
    // w.x > 0 iff x1 + x2 > 0: always; use the bias to split the diagonal.
    Network split = net;
    split.layers[0].biases = {-1.0, 1.0};  // logit1 = x1+x2-1, logit2 = 1-x1-x2
    REQUIRE(clean_accuracy(split, ds) == 0.0);  // labels are 1/2 by blob order
    // Blob 1 sits below the diagonal (sum < 1): logit2 wins there, so swap
    // roles by attacking with the matching label convention.
    Dataset swapped = ds;
    for (auto& y : swapped.labels) y = y == 1 ? 2 : 1;
    REQUIRE(clean_accuracy(split, swapped) == 1.0);

    AttackConfig cfg;
    cfg.epsilon = 0.0;
    SUBCASE("epsilon 0 equals clean accuracy") {
        CHECK(adv_accuracy(split, swapped, cfg, AttackKind::PGD) ==
              clean_accuracy(split, swapped));
    }
    SUBCASE("monotone non-increasing in epsilon, bounded by clean accuracy") {
        double prev = 1.0;
        for (double eps : {0.0, 0.05, 0.1, 0.2, 0.3, 0.5}) {
            AttackConfig c;
            c.epsilon = eps;
            const double adv = adv_accuracy(split, swapped, c, AttackKind::PGD);
            CHECK(adv <= clean_accuracy(split, swapped));
            CHECK(adv <= prev + 1e-12);
            prev = adv;
        }
    }
    SUBCASE("deterministic across repeated runs") {
        AttackConfig c;
        c.epsilon = 0.15;
        c.random_start = true;
        c.seed = 7;
        CHECK(adv_accuracy(split, swapped, c, AttackKind::PGD) ==
              adv_accuracy(split, swapped, c, AttackKind::PGD));
        CHECK(adv_accuracy(split, swapped, c, AttackKind::MT) ==
              adv_accuracy(split, swapped, c, AttackKind::MT));
    }
}
