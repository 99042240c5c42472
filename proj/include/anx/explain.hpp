#pragma once

#include <string>
#include <variant>
#include <vector>

#include "anx/classifier.hpp"

namespace anx::explain {

struct SpanDelta {
    TokenSpan span;
    double delta{0.0};
};

/// Occlusion attribution for one post under one model. Deltas are
/// score(original) - score(occluded); positive means the span pushed toward
/// AnxietyThenAdhd.
struct AttributionReport {
    std::string post_id;
    std::string model_id;
    double base_score{0.0};
    std::size_t max_phrase_len{3};
    std::vector<std::string> tokens;
    std::vector<double> token_deltas;     // one per token
    std::vector<SpanDelta> span_deltas;   // every span of length 1..L, by (start, length)
};

using OccludedInput = std::variant<features::FeatureVector, features::TokenSequence>;

/// Keyword kinds delete the span then vectorize; the transformer encodes and
/// replaces the span with MASK.
OccludedInput occlude(std::span<const std::string> tokens, TokenSpan span, ModelKind kind,
                      const features::Vocabulary& vocab, std::size_t max_len = 128);

/// Change in positive-class probability from occluding `span`. Exactly 0 for length 0.
double span_delta(const Classifier& model, std::span<const std::string> tokens, TokenSpan span);

AttributionReport explain(const Classifier& model, std::string post_id, std::string model_id,
                          std::span<const std::string> tokens, std::size_t max_phrase_len = 3);

struct Rendering {
    std::string html;
    std::string tsv;
};

/// Self-contained HTML heatmap plus TSV with columns
/// kind, start, length, text, delta (kind is "token" or "span").
Rendering render(const AttributionReport& report);

}  // namespace anx::explain
