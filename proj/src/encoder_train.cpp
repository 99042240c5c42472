#include <cmath>
#include <numeric>

#include "anx/encoder.hpp"

namespace anx::transformer {

Adam::Adam(double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(std::span<Matrix* const> params, std::span<const Matrix* const> grads) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("Adam::step: parameter/gradient count mismatch");
    }
    if (m_.empty()) {
        for (const Matrix* p : params) {
            m_.push_back(Matrix::Zero(p->rows(), p->cols()));
            v_.push_back(Matrix::Zero(p->rows(), p->cols()));
        }
    }
    ++t_;
    const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Matrix& g = *grads[i];
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
        const auto m_hat = m_[i].array() / correction1;
        const auto v_hat = v_[i].array() / correction2;
        params[i]->array() -= lr_ * m_hat / (v_hat.sqrt() + eps_);
    }
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("train: learning_rate must be finite and non-negative");
    }
    if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0 && adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
        throw std::invalid_argument("train: Adam betas must lie in (0, 1)");
    }
    if (!(adam_eps > 0.0) || batch_size == 0) {
        throw std::invalid_argument("train: need adam_eps > 0 and batch_size > 0");
    }
}

TrainResult train(EncoderModel model, std::span<const features::TokenSequence> sequences,
                  std::span<const int> labels, const TrainConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    if (sequences.empty() || sequences.size() != labels.size()) {
        throw DataError("train: need a nonempty training set with one label per sequence");
    }
    TrainResult result;
    Adam adam(config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps);

    std::vector<std::size_t> order(sequences.size());
    std::vector<features::TokenSequence> batch_seqs;
    std::vector<int> batch_labels;
    std::uint64_t step = 0;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        Rng shuffler(splitmix64(config.seed ^ splitmix64(epoch + 1)));
        shuffler.shuffle(order);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
            const std::size_t e = std::min(order.size(), b + config.batch_size);
            batch_seqs.clear();
            batch_labels.clear();
            for (std::size_t k = b; k < e; ++k) {
                batch_seqs.push_back(sequences[order[k]]);
                batch_labels.push_back(labels[order[k]]);
            }
            LossAndGrad lg;
            try {
                lg = loss_and_backward(model, batch_seqs, batch_labels, true,
                                       splitmix64(config.seed + 0x51ed270b27ULL * ++step));
            } catch (const NonFiniteLossError&) {
                throw NonFiniteLossError("non-finite loss in epoch " + std::to_string(epoch), epoch);
            }
            if (!std::isfinite(lg.loss)) {
                throw NonFiniteLossError("non-finite loss in epoch " + std::to_string(epoch), epoch);
            }
            loss_sum += lg.loss * static_cast<double>(e - b);
            correct += lg.correct;

            auto params = model.params.named();
            const auto grads = lg.grad.named();
            std::vector<Matrix*> p_ptrs;
            std::vector<const Matrix*> g_ptrs;
            for (std::size_t i = 0; i < params.size(); ++i) {
                p_ptrs.push_back(params[i].second);
                g_ptrs.push_back(grads[i].second);
            }
            adam.step(p_ptrs, g_ptrs);
        }
        if (!model.params.all_finite()) {
            throw NonFiniteLossError("non-finite parameters after epoch " + std::to_string(epoch), epoch);
        }
        EpochLog entry{epoch, loss_sum / static_cast<double>(order.size()),
                       static_cast<double>(correct) / static_cast<double>(order.size())};
        result.log.push_back(entry);
        if (on_epoch) {
            on_epoch(entry);
        }
    }
    result.model = std::move(model);
    return result;
}

}  // namespace anx::transformer
