#include "anx/cohort.hpp"

#include <algorithm>
#include <limits>
#include <optional>

#include <json.hpp>

namespace anx::cohort {

using json = nlohmann::json;

std::string_view label_name(Label label) {
    return label == Label::AnxietyThenAdhd ? "AnxietyThenAdhd" : "AnxietyOnly";
}

Label parse_label(std::string_view name) {
    if (name == "AnxietyThenAdhd") {
        return Label::AnxietyThenAdhd;
    }
    if (name == "AnxietyOnly") {
        return Label::AnxietyOnly;
    }
    throw DataError("unknown label '" + std::string(name) + "'");
}

LabelOutcome label_timeline(const UserTimeline& timeline, const CohortConfig& config) {
    if (config.window_seconds < 0) {
        throw std::invalid_argument("window_seconds must be non-negative");
    }
    const std::string anxiety = ingest::normalize_forum(config.anxiety_forum);
    const std::string adhd = ingest::normalize_forum(config.adhd_forum);

    std::optional<std::int64_t> first_anxiety;
    std::optional<std::int64_t> first_adhd;
    for (const Post& p : timeline.posts) {
        if (p.forum == anxiety && !first_anxiety) {
            first_anxiety = p.created_at;
        } else if (p.forum == adhd && !first_adhd) {
            first_adhd = p.created_at;
        }
    }

    if (!first_anxiety) {
        return Excluded{"out-of-scope"};
    }

    std::vector<LabeledExample> out;
    if (!first_adhd) {
        for (const Post& p : timeline.posts) {
            if (p.forum == anxiety) {
                out.push_back({p, Label::AnxietyOnly});
            }
        }
        return out;
    }

    if (*first_adhd <= *first_anxiety) {
        return Excluded{"adhd-first"};
    }

    const std::int64_t cutoff = *first_adhd - config.window_seconds;
    for (const Post& p : timeline.posts) {
        if (p.forum == anxiety && p.created_at <= cutoff) {
            out.push_back({p, Label::AnxietyThenAdhd});
        }
    }
    if (out.empty()) {
        return Excluded{"window"};
    }
    return out;
}

CohortResult label_all(const ingest::Timelines& timelines, const CohortConfig& config) {
    CohortResult result;
    for (const auto& [author, timeline] : timelines) {
        LabelOutcome outcome = label_timeline(timeline, config);
        if (auto* ex = std::get_if<std::vector<LabeledExample>>(&outcome)) {
            result.examples.insert(result.examples.end(), ex->begin(), ex->end());
        } else {
            result.exclusions.push_back({author, std::get<Excluded>(outcome).reason});
        }
    }
    return result;
}

std::vector<LabeledExample> balance(std::span<const LabeledExample> examples, std::uint64_t seed) {
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        (examples[i].label == Label::AnxietyThenAdhd ? pos : neg).push_back(i);
    }
    if (pos.empty() || neg.empty()) {
        throw EmptyClassError("balance: a class has zero examples");
    }
    auto& majority = pos.size() > neg.size() ? pos : neg;
    const std::size_t keep = std::min(pos.size(), neg.size());
    if (majority.size() > keep) {
        Rng rng(seed);
        rng.shuffle(majority);
        majority.resize(keep);
    }
    std::vector<std::size_t> chosen = pos;
    chosen.insert(chosen.end(), neg.begin(), neg.end());
    std::sort(chosen.begin(), chosen.end());

    std::vector<LabeledExample> out;
    out.reserve(chosen.size());
    for (std::size_t i : chosen) {
        out.push_back(examples[i]);
    }
    return out;
}

std::string_view split_unit_name(SplitUnit unit) {
    return unit == SplitUnit::ByUser ? "by-user" : "by-post";
}

SplitUnit parse_split_unit(std::string_view name) {
    if (name == "by-user" || name == "ByUser") {
        return SplitUnit::ByUser;
    }
    if (name == "by-post" || name == "ByPost") {
        return SplitUnit::ByPost;
    }
    throw std::invalid_argument("unknown split unit '" + std::string(name) + "'");
}

Split split(std::span<const LabeledExample> examples, const SplitSpec& spec) {
    if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
        throw std::invalid_argument("test_fraction must lie in (0, 1)");
    }
    Split s;
    for (const LabeledExample& ex : examples) {
        const std::string& key = spec.unit == SplitUnit::ByUser ? ex.author() : ex.post.id;
        if (seeded_unit(spec.seed, key) < spec.test_fraction) {
            s.test.examples.push_back(ex);
        } else {
            s.train.examples.push_back(ex);
        }
    }
    return s;
}

Split balance_split(const Split& s, std::uint64_t seed) {
    Split out;
    out.train.examples = balance(s.train.examples, seed);
    out.test.examples = balance(s.test.examples, seed + 1);
    return out;
}

std::string split_manifest(const Split& s, const SplitSpec& spec) {
    json train = json::array();
    for (const auto& ex : s.train.examples) {
        train.push_back(ex.post.id);
    }
    json test = json::array();
    for (const auto& ex : s.test.examples) {
        test.push_back(ex.post.id);
    }
    json manifest = {{"format", "anx-split-manifest"},
                     {"version", 1},
                     {"seed", spec.seed},
                     {"test_fraction", format_double(spec.test_fraction)},
                     {"unit", std::string(split_unit_name(spec.unit))},
                     {"train", std::move(train)},
                     {"test", std::move(test)}};
    return manifest.dump(1) + "\n";
}

std::string serialize_examples(std::span<const LabeledExample> examples) {
    std::string out;
    for (const LabeledExample& ex : examples) {
        json obj = {{"id", ex.post.id},
                    {"author", ex.post.author},
                    {"forum", ex.post.forum},
                    {"created_at", ex.post.created_at},
                    {"text", ex.post.text},
                    {"label", std::string(label_name(ex.label))}};
        out += obj.dump();
        out += '\n';
    }
    return out;
}

std::vector<LabeledExample> parse_examples(std::string_view data) {
    std::vector<LabeledExample> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < data.size()) {
        std::size_t nl = data.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = data.size();
        }
        std::string_view line = data.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            throw DataError("example store line " + std::to_string(line_no) + ": invalid json");
        }
        try {
            LabeledExample ex;
            ex.post = Post{obj.at("id").get<std::string>(), obj.at("author").get<std::string>(),
                           obj.at("forum").get<std::string>(), obj.at("created_at").get<std::int64_t>(),
                           obj.at("text").get<std::string>()};
            ex.label = parse_label(obj.at("label").get<std::string>());
            out.push_back(std::move(ex));
        } catch (const json::exception& e) {
            throw DataError("example store line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace anx::cohort
