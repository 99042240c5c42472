#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "anx/encoder.hpp"
#include "anx/features.hpp"
#include "anx/logistic.hpp"
#include "anx/naive_bayes.hpp"

namespace anx {

enum class ModelKind { NaiveBayes, Logistic, Transformer };

std::string_view model_kind_name(ModelKind kind);  // "nb", "lr", "transformer"
ModelKind parse_model_kind(std::string_view name);

/// Contiguous token range [start, start + length).
struct TokenSpan {
    std::size_t start{0};
    std::size_t length{0};

    bool operator==(const TokenSpan&) const = default;
};

class SpanOutOfBoundsError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Keyword-model occlusion: the span's tokens are deleted.
std::vector<std::string> occlude_tokens(std::span<const std::string> tokens, TokenSpan span);

/// Transformer occlusion: span is in token coordinates (sequence position
/// start + 1, after CLS); non-PAD ids in range become MASK, PAD stays PAD.
features::TokenSequence occlude_sequence(const features::TokenSequence& seq, TokenSpan span);

/// A trained text classifier scoring P(AnxietyThenAdhd).
class Classifier {
public:
    virtual ~Classifier() = default;

    virtual ModelKind kind() const = 0;
    virtual const features::Vocabulary& vocabulary() const = 0;

    /// Positive-class probability of `tokens` with `occluded` masked out.
    virtual double score_tokens(std::span<const std::string> tokens, TokenSpan occluded = {}) const = 0;

    double score_text(std::string_view text) const;

    /// Model file: versioned header, vocabulary section, parameter section.
    std::string serialize() const;

protected:
    virtual std::string serialize_parameters() const = 0;
};

class NaiveBayesClassifier final : public Classifier {
public:
    NaiveBayesClassifier(features::Vocabulary vocab, baseline::NaiveBayesModel model);

    ModelKind kind() const override { return ModelKind::NaiveBayes; }
    const features::Vocabulary& vocabulary() const override { return vocab_; }
    double score_tokens(std::span<const std::string> tokens, TokenSpan occluded = {}) const override;
    const baseline::NaiveBayesModel& model() const { return model_; }

protected:
    std::string serialize_parameters() const override { return model_.serialize(); }

private:
    features::Vocabulary vocab_;
    baseline::NaiveBayesModel model_;
};

class LogisticClassifier final : public Classifier {
public:
    LogisticClassifier(features::Vocabulary vocab, baseline::LogisticRegressionModel model, bool binary = true);

    ModelKind kind() const override { return ModelKind::Logistic; }
    const features::Vocabulary& vocabulary() const override { return vocab_; }
    double score_tokens(std::span<const std::string> tokens, TokenSpan occluded = {}) const override;
    const baseline::LogisticRegressionModel& model() const { return model_; }
    bool binary() const { return binary_; }

protected:
    std::string serialize_parameters() const override;

private:
    features::Vocabulary vocab_;
    baseline::LogisticRegressionModel model_;
    bool binary_;
};

class TransformerClassifier final : public Classifier {
public:
    TransformerClassifier(features::Vocabulary vocab, transformer::EncoderModel model);

    ModelKind kind() const override { return ModelKind::Transformer; }
    const features::Vocabulary& vocabulary() const override { return vocab_; }
    double score_tokens(std::span<const std::string> tokens, TokenSpan occluded = {}) const override;
    double score_sequence(const features::TokenSequence& seq) const;
    const transformer::EncoderModel& model() const { return model_; }

protected:
    std::string serialize_parameters() const override { return model_.serialize(); }

private:
    features::Vocabulary vocab_;
    transformer::EncoderModel model_;
};

std::unique_ptr<Classifier> parse_classifier(std::string_view text);

}  // namespace anx
