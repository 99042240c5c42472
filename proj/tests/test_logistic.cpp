#include <doctest.h>

#include <cmath>

#include "anx/logistic.hpp"
#include "oracles.hpp"

using namespace anx;
using namespace anx::baseline;

TEST_CASE("sigmoid is stable") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(800.0) == 1.0);
    CHECK(sigmoid(-800.0) == 0.0);
    CHECK(std::isfinite(sigmoid(-1e308)));
}

TEST_CASE("first step from zero has a closed form") {
    Rng rng(2);
    const auto ds = testing::random_real_dataset(rng, 10, 20);
    const LogisticConfig cfg{0.01, 0.3, 1, 0};
    const auto fit = lr_fit(ds, cfg);
    // At w = 0 every sigmoid is 1/2, so the mean gradient is mean((1/2 - y) x).
    std::vector<double> expected(ds.dim, 0.0);
    double expected_bias = 0.0;
    const double n = static_cast<double>(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double r = 0.5 - ds.y[i];
        expected_bias -= 0.3 * r / n;
        for (std::size_t k = 0; k < ds.docs[i].cols.size(); ++k) {
            expected[ds.docs[i].cols[k]] -= 0.3 * r * ds.docs[i].value(k) / n;
        }
    }
    for (std::size_t j = 0; j < ds.dim; ++j) {
        CHECK(fit.model.weights[j] == doctest::Approx(expected[j]).epsilon(1e-12));
    }
    CHECK(fit.model.bias == doctest::Approx(expected_bias).epsilon(1e-12));
    CHECK(fit.loss_log.front() == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("gradient edge cases") {
    Dataset balanced;
    balanced.dim = 2;
    balanced.docs = {{{0}, {}}, {{1}, {}}, {{0, 1}, {}}, {{}, {}}};
    balanced.y = {1, 0, 1, 0};
    LogisticRegressionModel zero;
    zero.weights.assign(2, 0.0);
    CHECK(lr_gradient(zero, balanced).bias == 0.0);

    Rng rng(6);
    const auto ds = testing::random_real_dataset(rng, 8, 12);
    LogisticRegressionModel m;
    for (std::size_t j = 0; j < ds.dim; ++j) {
        m.weights.push_back(rng.normal());
    }
    m.bias = rng.normal();
    m.config.lambda = 0.0;
    const auto g0 = lr_gradient(m, ds);
    m.config.lambda = 0.37;
    const auto g1 = lr_gradient(m, ds);
    for (std::size_t j = 0; j < ds.dim; ++j) {
        CHECK(g1.weights[j] - g0.weights[j] == doctest::Approx(0.37 * m.weights[j]).epsilon(1e-12));
    }
    CHECK(g1.bias == g0.bias);
}

TEST_CASE("gradient matches finite differences") {
    Rng rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        const auto ds = testing::random_real_dataset(rng, 50, 30);
        LogisticRegressionModel m;
        for (std::size_t j = 0; j < ds.dim; ++j) {
            m.weights.push_back(0.5 * rng.normal());
        }
        m.bias = rng.normal();
        m.config.lambda = rng.uniform();
        CHECK(testing::lr_gradient_relative_error(lr_gradient(m, ds), testing::lr_numeric_gradient(m, ds)) < 1e-6);
    }
}

TEST_CASE("separable fixture reaches perfect training accuracy") {
    Dataset ds;
    ds.dim = 2;
    ds.docs = {{{0}, {}}, {{0}, {}}, {{1}, {}}, {{1}, {}}};
    ds.y = {1, 1, 0, 0};
    const auto fit = lr_fit(ds, {0.0, 0.5, 2000, 0});
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK((lr_predict_proba(fit.model, ds.docs[i]) >= 0.5 ? 1 : 0) == ds.y[i]);
    }
    CHECK(fit.loss_log.back() < 0.01);
}

TEST_CASE("loss is non-increasing for a small learning rate") {
    Rng rng(14);
    const auto ds = testing::random_real_dataset(rng, 20, 40);
    const auto fit = lr_fit(ds, {1e-2, 0.05, 300, 0});
    for (std::size_t k = 1; k < fit.loss_log.size(); ++k) {
        CHECK(fit.loss_log[k] <= fit.loss_log[k - 1] + 1e-15);
    }
}

TEST_CASE("heavy regularization collapses weights toward the class prior") {
    Dataset ds;
    ds.dim = 3;
    ds.docs = {{{0}, {}}, {{1}, {}}, {{0, 2}, {}}, {{2}, {}}};
    ds.y = {1, 1, 1, 0};
    const auto fit = lr_fit(ds, {1e3, 1e-3, 50'000, 0});
    double norm = 0.0;
    for (double w : fit.model.weights) {
        norm += w * w;
    }
    CHECK(std::sqrt(norm) < 1e-2);
    for (const auto& d : ds.docs) {
        CHECK(std::fabs(lr_predict_proba(fit.model, d) - 0.75) < 1e-2);
    }
}

TEST_CASE("divergence is detected") {
    Rng rng(1);
    const auto ds = testing::random_real_dataset(rng, 5, 10);
    CHECK_THROWS_AS(lr_fit(ds, {1e6, 0.1, 500, 0}), DivergenceError);
    CHECK_THROWS_AS(lr_fit(ds, {1e-3, 0.0, 5, 0}), std::invalid_argument);
    CHECK_THROWS_AS(lr_fit(ds, {1e-3, 0.1, 0, 0}), std::invalid_argument);
}

TEST_CASE("prediction is pure and the model file is bit exact") {
    Rng rng(5);
    const auto ds = testing::random_real_dataset(rng, 10, 20);
    const auto fit = lr_fit(ds, {1e-3, 0.1, 50, 9});
    CHECK(lr_predict_proba(fit.model, ds.docs[0]) == lr_predict_proba(fit.model, ds.docs[0]));
    const auto text = fit.model.serialize();
    const auto back = LogisticRegressionModel::parse(text);
    CHECK(back == fit.model);
    CHECK(back.serialize() == text);
}
