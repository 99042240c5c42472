#include "anx/classifier.hpp"

#include <algorithm>

namespace anx {

namespace {

constexpr std::string_view kVocabMarker = "--- vocabulary\n";
constexpr std::string_view kParamMarker = "--- parameters\n";

void check_span(std::size_t n, TokenSpan span) {
    if (span.start > n || span.length > n - span.start) {
        throw SpanOutOfBoundsError("span [" + std::to_string(span.start) + ", +" + std::to_string(span.length) +
                                   ") outside " + std::to_string(n) + " tokens");
    }
}

}  // namespace

std::string_view model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::NaiveBayes:
            return "nb";
        case ModelKind::Logistic:
            return "lr";
        case ModelKind::Transformer:
            return "transformer";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "nb") {
        return ModelKind::NaiveBayes;
    }
    if (name == "lr") {
        return ModelKind::Logistic;
    }
    if (name == "transformer") {
        return ModelKind::Transformer;
    }
    throw std::invalid_argument("unknown model kind '" + std::string(name) + "'");
}

std::vector<std::string> occlude_tokens(std::span<const std::string> tokens, TokenSpan span) {
    check_span(tokens.size(), span);
    std::vector<std::string> out;
    out.reserve(tokens.size() - span.length);
    out.insert(out.end(), tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(span.start));
    out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(span.start + span.length), tokens.end());
    return out;
}

features::TokenSequence occlude_sequence(const features::TokenSequence& seq, TokenSpan span) {
    if (seq.ids.empty()) {
        throw SpanOutOfBoundsError("empty sequence");
    }
    check_span(seq.ids.size() - 1, span);
    features::TokenSequence out = seq;
    for (std::size_t k = 0; k < span.length; ++k) {
        auto& id = out.ids[span.start + 1 + k];
        if (id != features::kPad) {
            id = features::kMask;
        }
    }
    return out;
}

double Classifier::score_text(std::string_view text) const {
    const auto tokens = features::tokenize(text);
    return score_tokens(tokens);
}

std::string Classifier::serialize() const {
    std::string out = "anx-model 1 kind=" + std::string(model_kind_name(kind())) + "\n";
    out += kVocabMarker;
    out += vocabulary().serialize();
    out += kParamMarker;
    out += serialize_parameters();
    return out;
}

NaiveBayesClassifier::NaiveBayesClassifier(features::Vocabulary vocab, baseline::NaiveBayesModel model)
    : vocab_(std::move(vocab)), model_(std::move(model)) {
    if (model_.dim != vocab_.feature_dim()) {
        throw DataError("naive bayes model and vocabulary disagree on dimension");
    }
}

double NaiveBayesClassifier::score_tokens(std::span<const std::string> tokens, TokenSpan occluded) const {
    const auto kept = occlude_tokens(tokens, occluded);
    const auto doc = features::to_sparse(features::vectorize(kept, vocab_));
    return baseline::nb_predict_proba(model_, doc)[1];
}

LogisticClassifier::LogisticClassifier(features::Vocabulary vocab, baseline::LogisticRegressionModel model,
                                       bool binary)
    : vocab_(std::move(vocab)), model_(std::move(model)), binary_(binary) {
    if (model_.dim() != vocab_.feature_dim()) {
        throw DataError("logistic model and vocabulary disagree on dimension");
    }
}

double LogisticClassifier::score_tokens(std::span<const std::string> tokens, TokenSpan occluded) const {
    const auto kept = occlude_tokens(tokens, occluded);
    const auto doc = features::to_sparse(features::vectorize(kept, vocab_), binary_);
    return baseline::lr_predict_proba(model_, doc);
}

std::string LogisticClassifier::serialize_parameters() const {
    return std::string("features ") + (binary_ ? "binary" : "counts") + "\n" + model_.serialize();
}

TransformerClassifier::TransformerClassifier(features::Vocabulary vocab, transformer::EncoderModel model)
    : vocab_(std::move(vocab)), model_(std::move(model)) {
    if (model_.config.vocab_size != vocab_.size()) {
        throw DataError("encoder and vocabulary disagree on size");
    }
}

double TransformerClassifier::score_sequence(const features::TokenSequence& seq) const {
    const auto probs = transformer::predict_proba(model_, std::span(&seq, 1));
    return probs(0, 1);
}

double TransformerClassifier::score_tokens(std::span<const std::string> tokens, TokenSpan occluded) const {
    check_span(tokens.size(), occluded);
    features::TokenSequence seq = features::encode(tokens, vocab_, model_.config.max_len);
    // Positions past truncation are not in the sequence; clip the span to it.
    const std::size_t visible = seq.ids.size() - 1;
    if (occluded.start < visible) {
        occluded.length = std::min(occluded.length, visible - occluded.start);
        seq = occlude_sequence(seq, occluded);
    }
    return score_sequence(seq);
}

std::unique_ptr<Classifier> parse_classifier(std::string_view text) {
    const auto header_end = text.find('\n');
    if (header_end == std::string_view::npos) {
        throw DataError("model file: missing header");
    }
    const std::string_view header = text.substr(0, header_end);
    constexpr std::string_view prefix = "anx-model 1 kind=";
    if (header.substr(0, prefix.size()) != prefix) {
        throw DataError("model file: bad header");
    }
    const ModelKind kind = parse_model_kind(header.substr(prefix.size()));
    const std::string_view rest = text.substr(header_end + 1);
    if (rest.substr(0, kVocabMarker.size()) != kVocabMarker) {
        throw DataError("model file: missing vocabulary section");
    }
    const auto param_pos = rest.find(kParamMarker);
    if (param_pos == std::string_view::npos) {
        throw DataError("model file: missing parameter section");
    }
    auto vocab = features::Vocabulary::parse(rest.substr(kVocabMarker.size(), param_pos - kVocabMarker.size()));
    std::string_view params = rest.substr(param_pos + kParamMarker.size());

    switch (kind) {
        case ModelKind::NaiveBayes:
            return std::make_unique<NaiveBayesClassifier>(std::move(vocab), baseline::NaiveBayesModel::parse(params));
        case ModelKind::Logistic: {
            const auto nl = params.find('\n');
            const std::string_view line = params.substr(0, nl);
            bool binary = true;
            if (line == "features counts") {
                binary = false;
            } else if (line != "features binary") {
                throw DataError("model file: bad logistic feature mode");
            }
            return std::make_unique<LogisticClassifier>(
                std::move(vocab), baseline::LogisticRegressionModel::parse(params.substr(nl + 1)), binary);
        }
        case ModelKind::Transformer:
            return std::make_unique<TransformerClassifier>(std::move(vocab),
                                                           transformer::EncoderModel::parse(params));
    }
    throw DataError("model file: unknown kind");
}

}  // namespace anx
