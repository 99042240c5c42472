#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace anx::ingest {

/// One archive record as it appears in a dump, after field validation.
struct RawRecord {
    std::string id;
    std::string author;
    std::string forum;  // trimmed, lowercased
    std::int64_t created_at{0};
    std::string title;
    std::string body;

    bool operator==(const RawRecord&) const = default;
};

struct ParseError {
    std::size_t line{0};  // 1-based
    std::string reason;

    bool operator==(const ParseError&) const = default;
};

struct ParseResult {
    std::vector<RawRecord> records;
    std::vector<std::size_t> record_lines;  // parallel to records
    std::vector<ParseError> errors;
};

/// A cleaned post. `text` is title and body joined by a newline.
struct Post {
    std::string id;
    std::string author;
    std::string forum;
    std::int64_t created_at{0};
    std::string text;

    bool operator==(const Post&) const = default;
    auto operator<=>(const Post&) const = default;
};

struct Rejected {
    std::string reason;  // "empty" or "removed"
};

using CleanResult = std::variant<Post, Rejected>;

struct UserTimeline {
    std::string author;
    std::vector<Post> posts;  // ascending by (created_at, id)
};

using Timelines = std::map<std::string, UserTimeline>;

/// Inclusive created_at bounds applied after parsing. Zero means unbounded.
struct DateWindow {
    std::int64_t start{0};
    std::int64_t end{0};

    bool contains(std::int64_t t) const {
        return (start == 0 || t >= start) && (end == 0 || t <= end);
    }
};

std::string normalize_forum(std::string_view name);

/// Parses newline-delimited JSON records with fields
/// `id, author, subreddit, created_utc, title, selftext`.
/// Bad lines become ParseErrors; blank lines are skipped. Output order follows
/// input order regardless of `threads`. Duplicate ids after the first are errors.
ParseResult parse_records(std::string_view data, unsigned threads = 1);

/// Parses one line. `line_no` is used only for error reporting.
std::variant<RawRecord, ParseError> parse_line(std::string_view line, std::size_t line_no);

CleanResult clean(const RawRecord& record);

Timelines build_timelines(std::span<const Post> posts);

bool timeline_order(const Post& a, const Post& b);

// Corpus store: one JSON object per line, keys sorted, fields
// author, created_at, forum, id, text.
std::string serialize_posts(std::span<const Post> posts);
std::vector<Post> parse_posts(std::string_view data);

struct DumpError {
    std::size_t dump{0};  // index into the dump list
    ParseError error;
};

struct IngestSummary {
    std::vector<Post> posts;
    std::vector<DumpError> parse_errors;
    std::size_t rejected_empty{0};
    std::size_t rejected_removed{0};
    std::size_t outside_window{0};
};

/// parse_records + window filter + clean over several dump contents.
/// Duplicate ids across dumps are reported as parse errors of the later dump.
IngestSummary ingest_dumps(std::span<const std::string> dumps, DateWindow window, unsigned threads = 1);

}  // namespace anx::ingest
