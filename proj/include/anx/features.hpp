#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "anx/cohort.hpp"
#include "anx/sparse.hpp"

namespace anx::features {

inline constexpr std::uint32_t kPad = 0;
inline constexpr std::uint32_t kUnk = 1;
inline constexpr std::uint32_t kMask = 2;
inline constexpr std::uint32_t kCls = 3;
inline constexpr std::uint32_t kNumSpecial = 4;

/// Lowercases ASCII, splits on non-alphanumeric bytes and keeps apostrophes
/// that sit between two word characters. Bytes >= 0x80 count as word characters.
std::vector<std::string> tokenize(std::string_view text);

struct VocabOptions {
    std::size_t min_count{2};
    std::size_t max_size{20'000};  // non-special entries
};

/// Documents a vocabulary may be fitted on. Constructible from a TrainSet, or
/// from raw texts the caller vouches are training-only. There is no path from
/// a TestSet.
class TrainingDocs {
public:
    explicit TrainingDocs(const cohort::TrainSet& train);
    static TrainingDocs from_texts(std::vector<std::string> texts);

    const std::vector<std::string>& texts() const { return texts_; }

private:
    TrainingDocs() = default;
    std::vector<std::string> texts_;
};

class Vocabulary {
public:
    Vocabulary();

    std::size_t size() const { return tokens_.size(); }
    std::size_t min_count() const { return options_.min_count; }
    std::size_t max_size() const { return options_.max_size; }

    /// kUnk for unknown tokens.
    std::uint32_t index_of(std::string_view token) const;
    bool contains(std::string_view token) const;
    const std::string& token(std::uint32_t index) const { return tokens_.at(index); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    /// Columns available to keyword models (non-special entries).
    std::size_t feature_dim() const { return tokens_.size() - kNumSpecial; }

    std::string serialize() const;
    static Vocabulary parse(std::string_view text);

    bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

    friend Vocabulary fit_vocabulary(const TrainingDocs& docs, const VocabOptions& options);

private:
    void add(std::string token);

    VocabOptions options_;
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

class EmptyCorpusError : public DataError {
public:
    using DataError::DataError;
};

/// Tokens with frequency >= min_count, most frequent first, ties lexicographic,
/// capped at max_size.
Vocabulary fit_vocabulary(const TrainingDocs& docs, const VocabOptions& options);
Vocabulary fit_vocabulary(const cohort::TrainSet& train, const VocabOptions& options);

struct FeatureVector {
    std::string doc_id;
    std::vector<std::uint32_t> indices;  // vocabulary ids, strictly increasing
    std::vector<std::uint32_t> counts;   // parallel to indices
};

struct TokenSequence {
    std::vector<std::uint32_t> ids;  // CLS first, PAD suffix, length max_len
};

FeatureVector vectorize(std::span<const std::string> tokens, const Vocabulary& vocab,
                        std::string doc_id = {});
FeatureVector vectorize_text(std::string_view text, const Vocabulary& vocab, std::string doc_id = {});

TokenSequence encode(std::span<const std::string> tokens, const Vocabulary& vocab, std::size_t max_len);
TokenSequence encode_text(std::string_view text, const Vocabulary& vocab, std::size_t max_len);

/// Tokens of a sequence without CLS and PAD; UNK decodes to "<unk>".
std::vector<std::string> decode(const TokenSequence& seq, const Vocabulary& vocab);

/// Feature-column form used by the keyword models (column = vocab id - kNumSpecial).
SparseDoc to_sparse(const FeatureVector& fv, bool binary = true);

Dataset build_dataset(std::span<const cohort::LabeledExample> examples, const Vocabulary& vocab,
                      bool binary = true);

}  // namespace anx::features
