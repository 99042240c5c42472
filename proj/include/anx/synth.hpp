#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "anx/cohort.hpp"

namespace anx::synth {

enum class Mode { UnigramSignal, OrderSignal };

std::string_view mode_name(Mode mode);  // "unigram" or "order"
Mode parse_mode(std::string_view name);

struct SynthSpec {
    Mode mode{Mode::OrderSignal};
    std::size_t users_per_class{200};
    std::size_t posts_min{5};
    std::size_t posts_max{5};
    std::size_t doc_len_min{8};
    std::size_t doc_len_max{12};
    std::size_t vocab_pool{200};    // filler tokens w0..w{n-1}
    std::size_t marker_pairs{2};    // OrderSignal pairs (a_k, b_k)
    std::size_t cue_tokens{4};      // UnigramSignal cues per class
    std::size_t max_marker_gap{0};  // 0: markers anywhere in the document
    double signal_strength{1.0};    // probability a document carries the signal
    std::uint64_t seed{0};
    std::string forum{"anxiety"};

    void validate() const;
};

class InvalidSpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SynthCorpus {
    std::vector<cohort::LabeledExample> examples;
    std::vector<std::size_t> pair;  // matched-pair index of each example
    std::string ground_truth;
};

/// Users come in matched pairs (one per class) with the same post count; each
/// positive post has a negative twin built from the same filler draw.
/// OrderSignal twins are the same token multiset with the marker order
/// swapped, so per-class unigram histograms are identical. UnigramSignal
/// twins differ only in a class-specific cue token.
SynthCorpus generate(const SynthSpec& spec);

/// Train/test split that keeps both users of a matched pair on the same side:
/// the last round(test_fraction * pairs) pairs form the test set. A generic
/// per-user split would separate twins and leave each side with unigram
/// imbalances that cancel across sides, pushing keyword models below chance.
cohort::Split split_by_pair(const SynthCorpus& corpus, double test_fraction);

}  // namespace anx::synth
