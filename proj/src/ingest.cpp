#include "anx/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <unordered_set>

#include <json.hpp>

#include "anx/util.hpp"

namespace anx::ingest {

using json = nlohmann::json;

namespace {

std::vector<std::string_view> split_lines(std::string_view data) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < data.size()) {
        std::size_t nl = data.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = data.size();
        }
        std::string_view line = data.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        lines.push_back(line);
        pos = nl + 1;
    }
    return lines;
}

bool is_blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(), [](char c) {
        return c == ' ' || c == '\t' || c == '\r';
    });
}

std::optional<std::string> string_field(const json& obj, const char* key, bool allow_null,
                                        std::string& reason) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        reason = std::string("missing field ") + key;
        return std::nullopt;
    }
    if (it->is_null() && allow_null) {
        return std::string();
    }
    if (!it->is_string()) {
        reason = std::string("field ") + key + " is not a string";
        return std::nullopt;
    }
    return it->get<std::string>();
}

std::optional<std::int64_t> timestamp_field(const json& obj, std::string& reason) {
    auto it = obj.find("created_utc");
    if (it == obj.end()) {
        reason = "missing field created_utc";
        return std::nullopt;
    }
    if (it->is_number_integer()) {
        return it->get<std::int64_t>();
    }
    if (it->is_number_float()) {
        // Some dumps write integral timestamps as 1581811200.0.
        const double v = it->get<double>();
        if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.0e15) {
            return static_cast<std::int64_t>(v);
        }
    }
    if (it->is_string()) {
        const auto& s = it->get_ref<const std::string&>();
        if (!s.empty() && s.size() <= 18 &&
            std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            return std::stoll(s);
        }
    }
    reason = "non-integer timestamp created_utc";
    return std::nullopt;
}

}  // namespace

std::string normalize_forum(std::string_view name) {
    return to_lower_ascii(trim(name));
}

std::variant<RawRecord, ParseError> parse_line(std::string_view line, std::size_t line_no) {
    if (!is_valid_utf8(line)) {
        return ParseError{line_no, "invalid encoding"};
    }
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded()) {
        return ParseError{line_no, "invalid json"};
    }
    if (!obj.is_object()) {
        return ParseError{line_no, "record is not an object"};
    }

    std::string reason;
    RawRecord rec;

    auto id_it = obj.find("id");
    if (id_it == obj.end()) {
        return ParseError{line_no, "missing field id"};
    }
    if (id_it->is_string()) {
        rec.id = id_it->get<std::string>();
    } else if (id_it->is_number_integer()) {
        rec.id = std::to_string(id_it->get<std::int64_t>());
    } else {
        return ParseError{line_no, "field id is not a string"};
    }
    if (rec.id.empty()) {
        return ParseError{line_no, "empty id"};
    }

    auto author = string_field(obj, "author", false, reason);
    if (!author) {
        return ParseError{line_no, reason};
    }
    auto forum = string_field(obj, "subreddit", false, reason);
    if (!forum) {
        return ParseError{line_no, reason};
    }
    auto created = timestamp_field(obj, reason);
    if (!created) {
        return ParseError{line_no, reason};
    }
    auto title = string_field(obj, "title", true, reason);
    if (!title) {
        return ParseError{line_no, reason};
    }
    auto body = string_field(obj, "selftext", true, reason);
    if (!body) {
        return ParseError{line_no, reason};
    }
    if (*created <= 0) {
        return ParseError{line_no, "created_utc must be positive"};
    }

    rec.author = std::move(*author);
    rec.forum = normalize_forum(*forum);
    rec.created_at = *created;
    rec.title = std::move(*title);
    rec.body = std::move(*body);
    return rec;
}

ParseResult parse_records(std::string_view data, unsigned threads) {
    const auto lines = split_lines(data);
    using Parsed = std::variant<RawRecord, ParseError>;
    std::vector<std::optional<Parsed>> parsed(lines.size());

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            if (!is_blank(lines[i])) {
                parsed[i] = parse_line(lines[i], i + 1);
            }
        }
    };

    threads = std::max(1u, threads);
    if (threads == 1 || lines.size() < 2 * threads) {
        work(0, lines.size());
    } else {
        std::vector<std::future<void>> jobs;
        const std::size_t chunk = (lines.size() + threads - 1) / threads;
        for (std::size_t b = 0; b < lines.size(); b += chunk) {
            jobs.push_back(std::async(std::launch::async, work, b, std::min(lines.size(), b + chunk)));
        }
        for (auto& j : jobs) {
            j.get();
        }
    }

    // Sequential merge keeps output order and duplicate detection independent of threads.
    ParseResult result;
    std::unordered_set<std::string> seen;
    for (auto& p : parsed) {
        if (!p) {
            continue;
        }
        if (auto* rec = std::get_if<RawRecord>(&*p)) {
            if (!seen.insert(rec->id).second) {
                result.errors.push_back(
                    {static_cast<std::size_t>(&p - parsed.data()) + 1, "duplicate id " + rec->id});
                continue;
            }
            result.records.push_back(std::move(*rec));
            result.record_lines.push_back(static_cast<std::size_t>(&p - parsed.data()) + 1);
        } else {
            result.errors.push_back(std::get<ParseError>(*p));
        }
    }
    return result;
}

CleanResult clean(const RawRecord& record) {
    const std::string body = trim(record.body);
    if (body == "[removed]" || body == "[deleted]") {
        return Rejected{"removed"};
    }
    std::string text;
    const bool has_title = !trim(record.title).empty();
    const bool has_body = !body.empty();
    if (has_title && has_body) {
        text = record.title + "\n" + record.body;
    } else if (has_title) {
        text = record.title;
    } else if (has_body) {
        text = record.body;
    }
    if (trim(text).empty()) {
        return Rejected{"empty"};
    }
    return Post{record.id, record.author, record.forum, record.created_at, std::move(text)};
}

bool timeline_order(const Post& a, const Post& b) {
    if (a.created_at != b.created_at) {
        return a.created_at < b.created_at;
    }
    return a.id < b.id;
}

Timelines build_timelines(std::span<const Post> posts) {
    Timelines out;
    for (const Post& p : posts) {
        auto& tl = out[p.author];
        tl.author = p.author;
        tl.posts.push_back(p);
    }
    for (auto& [author, tl] : out) {
        std::sort(tl.posts.begin(), tl.posts.end(), timeline_order);
    }
    return out;
}

std::string serialize_posts(std::span<const Post> posts) {
    std::string out;
    for (const Post& p : posts) {
        json obj = {{"id", p.id},
                    {"author", p.author},
                    {"forum", p.forum},
                    {"created_at", p.created_at},
                    {"text", p.text}};
        out += obj.dump();
        out += '\n';
    }
    return out;
}

std::vector<Post> parse_posts(std::string_view data) {
    std::vector<Post> posts;
    std::size_t line_no = 0;
    for (std::string_view line : split_lines(data)) {
        ++line_no;
        if (is_blank(line)) {
            continue;
        }
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            throw DataError("corpus store line " + std::to_string(line_no) + ": invalid json");
        }
        try {
            posts.push_back(Post{obj.at("id").get<std::string>(), obj.at("author").get<std::string>(),
                                 obj.at("forum").get<std::string>(),
                                 obj.at("created_at").get<std::int64_t>(),
                                 obj.at("text").get<std::string>()});
        } catch (const json::exception& e) {
            throw DataError("corpus store line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return posts;
}

IngestSummary ingest_dumps(std::span<const std::string> dumps, DateWindow window, unsigned threads) {
    IngestSummary summary;
    std::unordered_set<std::string> seen;
    for (std::size_t d = 0; d < dumps.size(); ++d) {
        ParseResult parsed = parse_records(dumps[d], threads);
        for (auto& e : parsed.errors) {
            summary.parse_errors.push_back({d, std::move(e)});
        }
        for (std::size_t r = 0; r < parsed.records.size(); ++r) {
            const RawRecord& rec = parsed.records[r];
            if (!seen.insert(rec.id).second) {
                summary.parse_errors.push_back({d, {parsed.record_lines[r], "duplicate id " + rec.id}});
                continue;
            }
            if (!window.contains(rec.created_at)) {
                ++summary.outside_window;
                continue;
            }
            CleanResult c = clean(rec);
            if (auto* post = std::get_if<Post>(&c)) {
                summary.posts.push_back(std::move(*post));
            } else if (std::get<Rejected>(c).reason == "removed") {
                ++summary.rejected_removed;
            } else {
                ++summary.rejected_empty;
            }
        }
    }
    return summary;
}

}  // namespace anx::ingest
