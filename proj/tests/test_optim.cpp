#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "lsemix/optim.hpp"
#include "lsemix/rng.hpp"

using namespace lsemix;

TEST_CASE("sgd basics") {
    std::vector<double> theta{1.0, -2.0};
    std::vector<double> grad{0.0, 0.0};
    SgdState sgd{0.1};
    sgd_step(sgd, {{theta.data(), grad.data(), 2}});
    CHECK(theta[0] == 1.0);
    CHECK(theta[1] == -2.0);

    theta = {1.0};
    grad = {2.0};
    sgd_step(sgd, {{theta.data(), grad.data(), 1}});
    CHECK(theta[0] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("two sgd steps equal one manual composition") {
    Rng rng(77);
    std::vector<double> theta(8), g1(8), g2(8), manual(8);
    for (int i = 0; i < 8; ++i) {
        theta[i] = rng.uniform(-1.0, 1.0);
        g1[i] = rng.uniform(-1.0, 1.0);
        g2[i] = rng.uniform(-1.0, 1.0);
        manual[i] = theta[i] - 0.05 * g1[i] - 0.05 * g2[i];
    }
    SgdState sgd{0.05};
    sgd_step(sgd, {{theta.data(), g1.data(), 8}});
    sgd_step(sgd, {{theta.data(), g2.data(), 8}});
    for (int i = 0; i < 8; ++i) CHECK(theta[i] == manual[i]);
}

TEST_CASE("adam zero gradient leaves fresh params unchanged") {
    std::vector<double> theta{0.5, -0.5, 2.0};
    std::vector<double> grad{0.0, 0.0, 0.0};
    AdamState adam(0.001, {3});
    adam_step(adam, {{theta.data(), grad.data(), 3}});
    CHECK(theta[0] == 0.5);
    CHECK(theta[1] == -0.5);
    CHECK(theta[2] == 2.0);
    CHECK(adam.t == 1);
}

TEST_CASE("adam first step approximates -lr * sign(g)") {
    for (double g : {1e-3, 0.5, 2.0, -1e-3, -3.0}) {
        std::vector<double> theta{0.0};
        std::vector<double> grad{g};
        const double lr = 0.1;
        AdamState adam(lr, {1});
        adam_step(adam, {{theta.data(), grad.data(), 1}});
        const double sign = g > 0.0 ? 1.0 : -1.0;
        CHECK(std::fabs(theta[0] - (-lr * sign)) <= 1e-6);
    }
}

TEST_CASE("adam matches a hand-rolled reference trace over 10 steps") {
    Rng rng(78);
    const std::size_t n = 6;
    std::vector<double> theta(n), ref(n), m(n, 0.0), v(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        theta[i] = rng.uniform(-1.0, 1.0);
        ref[i] = theta[i];
    }
    const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    AdamState adam(lr, {n});

    Rng gref(79);
    for (int t = 1; t <= 10; ++t) {
        std::vector<double> g(n);
        for (auto& x : g) x = gref.uniform(-2.0, 2.0);

        adam_step(adam, {{theta.data(), g.data(), n}});

        for (std::size_t i = 0; i < n; ++i) {
            m[i] = b1 * m[i] + (1 - b1) * g[i];
            v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
            const double mhat = m[i] / (1 - std::pow(b1, t));
            const double vhat = v[i] / (1 - std::pow(b2, t));
            ref[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
    for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(theta[i] - ref[i]) < 1e-12);
    CHECK(adam.t == 10);
}

TEST_CASE("adam moments stay finite and v nonnegative") {
    Rng rng(80);
    std::vector<double> theta{0.0, 0.0};
    AdamState adam(0.1, {2});
    for (int t = 0; t < 50; ++t) {
        std::vector<double> g{rng.uniform(-100.0, 100.0), rng.uniform(-100.0, 100.0)};
        adam_step(adam, {{theta.data(), g.data(), 2}});
    }
    for (double x : adam.m[0]) CHECK(std::isfinite(x));
    for (double x : adam.v[0]) {
        CHECK(std::isfinite(x));
        CHECK(x >= 0.0);
    }
    CHECK(std::isfinite(theta[0]));
}

TEST_CASE("optimizer determinism") {
    auto run = [](std::uint64_t seed) {
        Rng rng(seed);
        std::vector<double> theta(4);
        for (auto& x : theta) x = rng.uniform(-1.0, 1.0);
        AdamState adam(0.01, {4});
        for (int t = 0; t < 5; ++t) {
            std::vector<double> g(4);
            for (auto& x : g) x = rng.uniform(-1.0, 1.0);
            adam_step(adam, {{theta.data(), g.data(), 4}});
        }
        return theta;
    };
    auto a = run(99), b = run(99);
    for (int i = 0; i < 4; ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("shape mismatches are rejected") {
    std::vector<double> theta{0.0, 0.0};
    std::vector<double> grad{1.0, 1.0};
    AdamState adam(0.01, {3});
    CHECK_THROWS_AS(adam_step(adam, {{theta.data(), grad.data(), 2}}), std::invalid_argument);

    AdamState two(0.01, {2, 2});
    CHECK_THROWS_AS(adam_step(two, {{theta.data(), grad.data(), 2}}), std::invalid_argument);

    SgdState bad{0.0};
    CHECK_THROWS_AS(sgd_step(bad, {{theta.data(), grad.data(), 2}}), std::invalid_argument);
}
