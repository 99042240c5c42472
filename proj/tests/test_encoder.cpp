#include <doctest.h>

#include <cmath>

#include "anx/encoder.hpp"
#include "grad_check.hpp"

using namespace anx;
using namespace anx::transformer;
using anx::features::TokenSequence;

namespace {

std::vector<TokenSequence> random_batch(Rng& rng, std::size_t n, std::size_t max_len, std::size_t vocab) {
    std::vector<TokenSequence> batch;
    for (std::size_t i = 0; i < n; ++i) {
        TokenSequence s;
        s.ids.push_back(features::kCls);
        const std::size_t len = 1 + rng.below(max_len - 1);
        for (std::size_t t = 0; t < len; ++t) {
            s.ids.push_back(static_cast<std::uint32_t>(features::kNumSpecial + rng.below(vocab - features::kNumSpecial)));
        }
        s.ids.resize(max_len, features::kPad);
        batch.push_back(s);
    }
    return batch;
}

EncoderConfig small_config(double dropout = 0.3) {
    EncoderConfig cfg;
    cfg.vocab_size = 20;
    cfg.d_model = 16;
    cfg.n_heads = 4;
    cfg.n_layers = 2;
    cfg.d_ff = 32;
    cfg.max_len = 10;
    cfg.dropout_p = dropout;
    return cfg;
}

}  // namespace

TEST_CASE("gradient matches central finite differences on the tiny config") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto model = testing::randomized_tiny_model(seed);
        Rng rng(seed + 100);
        const auto batch = random_batch(rng, 4, 6, 12);
        const std::vector<int> labels{0, 1, 1, 0};

        const auto analytic = loss_and_backward(model, batch, labels, false, 0);
        const auto numeric = testing::numeric_gradient(
            model, [&](const EncoderModel& m) { return loss_only(m, batch, labels); });
        CHECK(analytic.loss == doctest::Approx(loss_only(model, batch, labels)).epsilon(1e-12));

        const auto a = analytic.grad.named();
        const auto n = numeric.named();
        for (std::size_t t = 0; t < a.size(); ++t) {
            INFO("tensor " << a[t].first << " seed " << seed);
            CHECK(testing::group_relative_error(*a[t].second, *n[t].second) < 1e-4);
        }
    }
}

TEST_CASE("gradient check with several heads and layers") {
    auto cfg = small_config(0.0);
    auto model = EncoderModel::initialize(cfg, 9);
    Rng rng(5);
    for (auto& [name, m] : model.params.named()) {
        for (Eigen::Index i = 0; i < m->size(); ++i) {
            m->data()[i] += 0.2 * rng.normal();
        }
    }
    const auto batch = random_batch(rng, 3, cfg.max_len, cfg.vocab_size);
    const std::vector<int> labels{1, 0, 1};
    const auto analytic = loss_and_backward(model, batch, labels, false, 0);
    const auto numeric =
        testing::numeric_gradient(model, [&](const EncoderModel& m) { return loss_only(m, batch, labels); });
    const auto a = analytic.grad.named();
    const auto n = numeric.named();
    for (std::size_t t = 0; t < a.size(); ++t) {
        INFO("tensor " << a[t].first);
        CHECK(testing::group_relative_error(*a[t].second, *n[t].second) < 1e-4);
    }
}

TEST_CASE("attention rows sum to one and never touch PAD keys") {
    auto model = EncoderModel::initialize(small_config(), 4);
    Rng rng(8);
    const auto batch = random_batch(rng, 5, 10, 20);
    for (const auto& seq : batch) {
        AttentionMaps maps;
        ForwardOptions opt;
        opt.attention = &maps;
        forward_one(model, seq.ids, opt);
        std::size_t non_pad = 0;
        while (non_pad < seq.ids.size() && seq.ids[non_pad] != features::kPad) {
            ++non_pad;
        }
        REQUIRE(maps.size() == 2);
        for (const auto& layer : maps) {
            REQUIRE(layer.size() == 4);
            for (const auto& probs : layer) {
                CHECK(static_cast<std::size_t>(probs.cols()) == non_pad);
                for (Eigen::Index r = 0; r < probs.rows(); ++r) {
                    CHECK(std::fabs(probs.row(r).sum() - 1.0) < 1e-6);
                }
            }
        }
    }
}

TEST_CASE("all-PAD after CLS attends only to CLS") {
    auto model = EncoderModel::initialize(small_config(), 4);
    TokenSequence seq{std::vector<std::uint32_t>(10, features::kPad)};
    seq.ids[0] = features::kCls;
    AttentionMaps maps;
    ForwardOptions opt;
    opt.attention = &maps;
    const auto logits = forward_one(model, seq.ids, opt);
    CHECK(logits.allFinite());
    for (const auto& layer : maps) {
        for (const auto& probs : layer) {
            REQUIRE(probs.rows() == 1);
            CHECK(probs(0, 0) == 1.0);
        }
    }
}

TEST_CASE("PAD suffix length does not change logits") {
    auto model = testing::randomized_tiny_model(3, 12);
    model.config.max_len = 6;
    TokenSequence a{{features::kCls, 5, 7, features::kPad, features::kPad, features::kPad}};
    TokenSequence b{{features::kCls, 5, 7}};
    TokenSequence c{{features::kCls, 7, 5, features::kPad, features::kPad, features::kPad}};
    const auto la = forward_one(model, a.ids);
    const auto lb = forward_one(model, b.ids);
    const auto lc = forward_one(model, c.ids);
    CHECK((la - lb).norm() == 0.0);
    CHECK((la - lc).norm() > 1e-6);  // order matters through position embeddings
}

TEST_CASE("dropout only in train mode") {
    auto cfg = small_config(0.0);
    auto model = EncoderModel::initialize(cfg, 2);
    model.params.head_weight.setConstant(0.5);
    Rng rng(1);
    const auto batch = random_batch(rng, 3, 10, 20);
    CHECK(forward(model, batch, true, 7) == forward(model, batch, false, 0));

    model.config.dropout_p = 0.3;
    CHECK(forward(model, batch, false, 1) == forward(model, batch, false, 2));
    CHECK(forward(model, batch, true, 1) != forward(model, batch, false, 0));
    CHECK(forward(model, batch, true, 3) == forward(model, batch, true, 3));
}

TEST_CASE("inverted dropout preserves the eval-mode expectation") {
    auto model = testing::randomized_tiny_model(11);
    model.config.dropout_p = 0.3;
    const TokenSequence seq{{features::kCls, 4, 9, 6, features::kPad, features::kPad}};
    const Eigen::RowVectorXd eval = forward_one(model, seq.ids);
    const int n = 10'000;
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(2);
    Eigen::RowVectorXd sum_sq = Eigen::RowVectorXd::Zero(2);
    for (int i = 0; i < n; ++i) {
        ForwardOptions opt{true, splitmix64(static_cast<std::uint64_t>(i)), nullptr};
        const Eigen::RowVectorXd l = forward_one(model, seq.ids, opt);
        sum += l;
        sum_sq += l.cwiseProduct(l);
    }
    const Eigen::RowVectorXd mean = sum / n;
    for (int k = 0; k < 2; ++k) {
        const double var = sum_sq(k) / n - mean(k) * mean(k);
        const double se = std::sqrt(var / n);
        CHECK(std::fabs(mean(k) - eval(k)) <= 3.0 * se);
    }
}

TEST_CASE("loss edge cases") {
    auto model = EncoderModel::initialize(small_config(), 5);
    Rng rng(2);
    const auto batch = random_batch(rng, 4, 10, 20);
    const std::vector<int> labels{0, 1, 0, 1};

    SUBCASE("zero head gives ln 2 and exactly uniform probabilities") {
        const auto lg = loss_and_backward(model, batch, labels, false, 0);
        CHECK(lg.loss == doctest::Approx(std::log(2.0)).epsilon(1e-15));
        const auto p = predict_proba(model, batch);
        for (Eigen::Index r = 0; r < p.rows(); ++r) {
            CHECK(p(r, 0) == 0.5);
            CHECK(p(r, 1) == 0.5);
        }
    }
    SUBCASE("duplicating every example leaves the mean loss unchanged") {
        const auto m = testing::randomized_tiny_model(6, 20);
        Rng r(12);
        const auto batch = random_batch(r, 4, 6, 20);
        auto doubled = batch;
        doubled.insert(doubled.end(), batch.begin(), batch.end());
        std::vector<int> doubled_labels = labels;
        doubled_labels.insert(doubled_labels.end(), labels.begin(), labels.end());
        CHECK(loss_only(m, batch, labels) == doctest::Approx(loss_only(m, doubled, doubled_labels)).epsilon(1e-14));
    }
    SUBCASE("bad labels and shapes are rejected") {
        CHECK_THROWS_AS(loss_and_backward(model, batch, std::vector<int>{0, 1, 2, 0}, false, 0), DataError);
        TokenSequence too_long{std::vector<std::uint32_t>(11, 5)};
        too_long.ids[0] = features::kCls;
        CHECK_THROWS_AS(forward_one(model, too_long.ids), ShapeMismatchError);
        TokenSequence no_cls{{5, 6}};
        CHECK_THROWS_AS(forward_one(model, no_cls.ids), ShapeMismatchError);
        TokenSequence inner_pad{{features::kCls, features::kPad, 6}};
        CHECK_THROWS_AS(forward_one(model, inner_pad.ids), ShapeMismatchError);
    }
}

TEST_CASE("probabilities are normalized and inside (0, 1)") {
    auto model = testing::randomized_tiny_model(21, 12);
    Rng rng(4);
    const auto batch = random_batch(rng, 8, 6, 12);
    const auto p = predict_proba(model, batch);
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
        CHECK(std::fabs(p.row(r).sum() - 1.0) < 1e-9);
        CHECK(p(r, 1) > 0.0);
        CHECK(p(r, 1) < 1.0);
    }
}

TEST_CASE("training contract") {
    auto cfg = small_config(0.3);
    Rng rng(13);
    const auto seqs = random_batch(rng, 12, cfg.max_len, cfg.vocab_size);
    std::vector<int> labels;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        labels.push_back(static_cast<int>(i % 2));
    }

    SUBCASE("lr 0 leaves parameters untouched") {
        const auto init = EncoderModel::initialize(cfg, 1);
        TrainConfig tc;
        tc.learning_rate = 0.0;
        tc.epochs = 3;
        tc.batch_size = 5;
        const auto result = train(init, seqs, labels, tc);
        CHECK(result.model.params == init.params);
        CHECK(result.log.size() == 3);
    }
    SUBCASE("same seed gives identical logs and parameters") {
        TrainConfig tc;
        tc.learning_rate = 1e-3;
        tc.epochs = 4;
        tc.batch_size = 4;
        tc.seed = 77;
        const auto a = train(EncoderModel::initialize(cfg, 1), seqs, labels, tc);
        const auto b = train(EncoderModel::initialize(cfg, 1), seqs, labels, tc);
        CHECK(a.log == b.log);
        CHECK(a.model.params == b.model.params);
        CHECK(a.model.serialize() == b.model.serialize());
        tc.seed = 78;
        const auto c = train(EncoderModel::initialize(cfg, 1), seqs, labels, tc);
        CHECK_FALSE(c.model.params == a.model.params);
    }
    SUBCASE("a single example is memorized") {
        TrainConfig tc;
        tc.learning_rate = 1e-3;
        tc.epochs = 200;
        tc.batch_size = 1;
        const std::vector<TokenSequence> one{seqs[0]};
        const std::vector<int> y{1};
        const auto result = train(EncoderModel::initialize(cfg, 1), one, y, tc);
        CHECK(result.log.front().mean_loss > 0.5);
        CHECK(loss_only(result.model, one, y) < 0.05);
    }
}

TEST_CASE("Adam first step moves each coordinate by lr against the gradient sign") {
    Matrix p = Matrix::Zero(1, 3);
    Matrix g(1, 3);
    g << 2.0, -0.5, 0.0;
    Adam adam(0.1, 0.9, 0.999, 1e-8);
    Matrix* ps[] = {&p};
    const Matrix* gs[] = {&g};
    adam.step(ps, gs);
    CHECK(p(0, 0) == doctest::Approx(-0.1).epsilon(1e-7));
    CHECK(p(0, 1) == doctest::Approx(0.1).epsilon(1e-7));
    CHECK(p(0, 2) == 0.0);
}

TEST_CASE("checkpoint round trip is bit exact") {
    const auto model = testing::randomized_tiny_model(17);
    const std::string text = model.serialize();
    const auto back = EncoderModel::parse(text);
    CHECK(back.config == model.config);
    CHECK(back.params == model.params);
    CHECK(back.serialize() == text);
    CHECK_THROWS_AS(EncoderModel::parse("anx-encoder 2\n"), DataError);
}
