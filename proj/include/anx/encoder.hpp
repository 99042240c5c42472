#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "anx/features.hpp"
#include "anx/util.hpp"

namespace anx::transformer {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct EncoderConfig {
    std::size_t vocab_size{0};
    std::size_t d_model{64};
    std::size_t n_heads{4};
    std::size_t n_layers{2};
    std::size_t d_ff{256};
    std::size_t max_len{128};
    double dropout_p{0.3};
    std::size_t n_classes{2};

    void validate() const;
    bool operator==(const EncoderConfig&) const = default;
};

struct LayerParams {
    Matrix ln1_gain, ln1_bias;  // 1 x d
    Matrix wq, bq, wk, bk, wv, bv, wo, bo;
    Matrix ln2_gain, ln2_bias;
    Matrix w1, b1;  // d x ff, 1 x ff
    Matrix w2, b2;  // ff x d, 1 x d
};

/// Every trainable tensor. Also used as the gradient container.
struct EncoderParams {
    Matrix token_embedding;     // vocab x d
    Matrix position_embedding;  // max_len x d
    std::vector<LayerParams> layers;
    Matrix final_ln_gain, final_ln_bias;
    Matrix head_weight;  // d x classes
    Matrix head_bias;    // 1 x classes

    /// Tensors in checkpoint order, paired with stable names.
    std::vector<std::pair<std::string, Matrix*>> named();
    std::vector<std::pair<std::string, const Matrix*>> named() const;

    /// Same shapes, all zeros.
    EncoderParams zeros_like() const;
    void set_zero();
    bool all_finite() const;
    bool operator==(const EncoderParams& other) const;
};

class ShapeMismatchError : public DataError {
public:
    using DataError::DataError;
};

class NonFiniteLossError : public NumericError {
public:
    NonFiniteLossError(const std::string& what, std::size_t epoch) : NumericError(what), epoch_(epoch) {}
    std::size_t epoch() const { return epoch_; }

private:
    std::size_t epoch_;
};

struct EncoderModel {
    EncoderConfig config;
    EncoderParams params;

    /// Embeddings N(0, 0.1^2), projections N(0, 1/fan_in), layer norms at identity,
    /// classifier head zero so an untrained model outputs exactly 0.5/0.5.
    static EncoderModel initialize(const EncoderConfig& config, std::uint64_t seed);

    std::string serialize() const;
    static EncoderModel parse(std::string_view text);
};

/// Per-layer attention probabilities of one sequence: [layer][head] is an
/// L x L row-stochastic matrix over the non-PAD prefix.
using AttentionMaps = std::vector<std::vector<Matrix>>;

struct ForwardOptions {
    bool train_mode{false};
    std::uint64_t seed{0};  // dropout stream; ignored in eval mode
    AttentionMaps* attention{nullptr};
};

/// Logits for one sequence. Sequences may be shorter than max_len; PAD is only
/// allowed as a suffix and never attended to.
Eigen::RowVectorXd forward_one(const EncoderModel& model, std::span<const std::uint32_t> ids,
                               const ForwardOptions& options = {});

/// Logits for each sequence (rows). Example i in train mode uses dropout
/// stream splitmix64(seed + i).
Matrix forward(const EncoderModel& model, std::span<const features::TokenSequence> batch, bool train_mode,
               std::uint64_t seed);

struct LossAndGrad {
    double loss{0.0};
    EncoderParams grad;
    std::size_t correct{0};
};

/// Mean softmax cross-entropy over the batch and its gradient for every tensor.
LossAndGrad loss_and_backward(const EncoderModel& model, std::span<const features::TokenSequence> batch,
                              std::span<const int> labels, bool train_mode, std::uint64_t seed);

/// Mean cross-entropy only (eval mode), for gradient checking.
double loss_only(const EncoderModel& model, std::span<const features::TokenSequence> batch,
                 std::span<const int> labels);

/// Rows are {P(class 0), P(class 1)} from eval-mode logits.
Matrix predict_proba(const EncoderModel& model, std::span<const features::TokenSequence> batch);

struct TrainConfig {
    double learning_rate{1e-5};
    double adam_beta1{0.9};
    double adam_beta2{0.999};
    double adam_eps{1e-8};
    std::size_t epochs{10};
    std::size_t batch_size{16};
    std::uint64_t seed{0};

    void validate() const;
};

struct EpochLog {
    std::size_t epoch{0};
    double mean_loss{0.0};
    double train_accuracy{0.0};  // from the train-mode forwards of that epoch

    bool operator==(const EpochLog&) const = default;
};

struct TrainResult {
    EncoderModel model;
    std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Mini-batch Adam with bias correction; batches reshuffled per epoch from the seed.
TrainResult train(EncoderModel model, std::span<const features::TokenSequence> sequences,
                  std::span<const int> labels, const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Adam over a fixed list of tensors.
class Adam {
public:
    Adam(double learning_rate, double beta1, double beta2, double eps);

    /// One update of `params` from `grads` (same order and shapes).
    void step(std::span<Matrix* const> params, std::span<const Matrix* const> grads);

    std::size_t steps() const { return t_; }

private:
    double lr_;
    double beta1_;
    double beta2_;
    double eps_;
    std::size_t t_{0};
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
};

}  // namespace anx::transformer
