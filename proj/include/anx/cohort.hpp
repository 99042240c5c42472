#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "anx/ingest.hpp"
#include "anx/util.hpp"

namespace anx::cohort {

using ingest::Post;
using ingest::UserTimeline;

/// Positive class is AnxietyThenAdhd throughout.
enum class Label { AnxietyOnly = 0, AnxietyThenAdhd = 1 };

std::string_view label_name(Label label);
Label parse_label(std::string_view name);

struct LabeledExample {
    Post post;  // always an anxiety-forum post
    Label label{Label::AnxietyOnly};

    const std::string& author() const { return post.author; }
    int y() const { return label == Label::AnxietyThenAdhd ? 1 : 0; }

    bool operator==(const LabeledExample&) const = default;
};

struct Excluded {
    std::string reason;  // "window", "adhd-first" or "out-of-scope"
};

using LabelOutcome = std::variant<std::vector<LabeledExample>, Excluded>;

/// 183 days.
inline constexpr std::int64_t kDefaultWindowSeconds = 15'811'200;

struct CohortConfig {
    std::string anxiety_forum{"anxiety"};
    std::string adhd_forum{"adhd"};
    std::int64_t window_seconds{kDefaultWindowSeconds};
};

/// Applies the temporal proxy rule to one timeline. Reads only forum names and
/// timestamps of ADHD-forum posts, never their text.
LabelOutcome label_timeline(const UserTimeline& timeline, const CohortConfig& config);

struct Exclusion {
    std::string author;
    std::string reason;
};

struct CohortResult {
    std::vector<LabeledExample> examples;  // author order, then timeline order
    std::vector<Exclusion> exclusions;
};

CohortResult label_all(const ingest::Timelines& timelines, const CohortConfig& config);

class EmptyClassError : public DataError {
public:
    using DataError::DataError;
};

/// Uniformly down-samples the majority class to the minority count.
/// Survivors keep their input order.
std::vector<LabeledExample> balance(std::span<const LabeledExample> examples, std::uint64_t seed);

enum class SplitUnit { ByUser, ByPost };

std::string_view split_unit_name(SplitUnit unit);
SplitUnit parse_split_unit(std::string_view name);

struct SplitSpec {
    double test_fraction{0.33};
    std::uint64_t seed{0};
    SplitUnit unit{SplitUnit::ByUser};
};

enum class Side { Train, Test };

/// Examples tagged with the split side they belong to. Distinct types let
/// training-only APIs refuse test data at compile time.
template <Side S>
struct SplitSet {
    std::vector<LabeledExample> examples;

    std::size_t size() const { return examples.size(); }
    bool empty() const { return examples.empty(); }
};

using TrainSet = SplitSet<Side::Train>;
using TestSet = SplitSet<Side::Test>;

struct Split {
    TrainSet train;
    TestSet test;
};

Split split(std::span<const LabeledExample> examples, const SplitSpec& spec);

/// Balances train and test independently (seed and seed+1).
Split balance_split(const Split& s, std::uint64_t seed);

/// Manifest JSON: seed, spec and example ids per side.
std::string split_manifest(const Split& s, const SplitSpec& spec);

// Labeled-example store: one JSON object per line with the post fields plus label.
std::string serialize_examples(std::span<const LabeledExample> examples);
std::vector<LabeledExample> parse_examples(std::string_view data);

}  // namespace anx::cohort
