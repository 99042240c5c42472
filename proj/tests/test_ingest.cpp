#include <doctest.h>

#include <algorithm>
#include <unordered_map>

#include "anx/ingest.hpp"
#include "anx/util.hpp"

using namespace anx;
using namespace anx::ingest;

namespace {

std::string record(const std::string& id, const std::string& author, const std::string& sub, long long t,
                   const std::string& title, const std::string& body) {
    return R"({"id":")" + id + R"(","author":")" + author + R"(","subreddit":")" + sub +
           R"(","created_utc":)" + std::to_string(t) + R"(,"title":")" + title + R"(","selftext":")" + body +
           "\"}";
}

}  // namespace

TEST_CASE("parse_records on a mixed fixture") {
    const std::string data = record("a1", "u1", "Anxiety", 100, "t", "b") + "\n" +
                             record("a2", "u2", "ADHD ", 200, "", "body") + "\n" +
                             R"({"id":"a3","subreddit":"anxiety","created_utc":5,"title":"","selftext":"x"})" +
                             "\n" + record("a4", "u1", "anxiety", 300, "help", "") + "\n";
    const auto result = parse_records(data);
    REQUIRE(result.records.size() == 3);
    REQUIRE(result.errors.size() == 1);
    CHECK(result.records[0].id == "a1");
    CHECK(result.records[1].id == "a2");
    CHECK(result.records[2].id == "a4");
    CHECK(result.records[0].forum == "anxiety");
    CHECK(result.records[1].forum == "adhd");
    CHECK(result.errors[0] == ParseError{3, "missing field author"});
}

TEST_CASE("parse_line error paths") {
    auto err = [](std::string_view line) { return std::get<ParseError>(parse_line(line, 9)).reason; };
    CHECK(err(R"({"id":"x","author":"u","subreddit":"s","created_utc":"soon","title":"","selftext":""})") ==
          "non-integer timestamp created_utc");
    CHECK(err(R"({"id":"x","author":"u","subreddit":"s","created_utc":1.5,"title":"","selftext":""})") ==
          "non-integer timestamp created_utc");
    CHECK(err(R"({"id":"x","author":"u","subreddit":"s","created_utc":0,"title":"","selftext":""})") ==
          "created_utc must be positive");
    CHECK(err("{\"id\":\"x\",\"author\":\"\xff\"}") == "invalid encoding");
    CHECK(err("not json") == "invalid json");
    CHECK(err(R"({"id":"","author":"u","subreddit":"s","created_utc":1,"title":"","selftext":""})") == "empty id");
    CHECK(err(R"({"id":"x","author":"u","subreddit":"s","created_utc":1,"selftext":""})") == "missing field title");

    const auto ok = parse_line(
        R"({"id":"x","author":"u","subreddit":"s","created_utc":"1581811200","title":null,"selftext":"b"})", 1);
    REQUIRE(std::holds_alternative<RawRecord>(ok));
    CHECK(std::get<RawRecord>(ok).created_at == 1581811200);
    CHECK(std::get<RawRecord>(ok).title.empty());
}

TEST_CASE("duplicate ids and blank lines") {
    const std::string data = record("a1", "u1", "anxiety", 1, "t", "b") + "\n\n" +
                             record("a1", "u2", "anxiety", 2, "t", "b") + "\n";
    const auto result = parse_records(data);
    CHECK(result.records.size() == 1);
    REQUIRE(result.errors.size() == 1);
    CHECK(result.errors[0].line == 3);
}

TEST_CASE("clean") {
    RawRecord r{"id", "u", "anxiety", 10, "", "[removed]"};
    CHECK(std::get<Rejected>(clean(r)).reason == "removed");
    r.body = " [deleted] ";
    r.title = "title";
    CHECK(std::get<Rejected>(clean(r)).reason == "removed");
    r = {"id", "u", "anxiety", 10, "help", ""};
    CHECK(std::get<Post>(clean(r)).text == "help");
    r = {"id", "u", "anxiety", 10, "", "   "};
    CHECK(std::get<Rejected>(clean(r)).reason == "empty");
    r = {"id", "u", "anxiety", 10, "title", "body"};
    CHECK(std::get<Post>(clean(r)).text == "title\nbody");
    r = {"id", "u", "anxiety", 10, "", "only body"};
    CHECK(std::get<Post>(clean(r)).text == "only body");
}

TEST_CASE("build_timelines ordering") {
    std::vector<Post> posts{{"b", "u1", "anxiety", 5, "x"}, {"a", "u1", "anxiety", 3, "y"},
                            {"c", "u2", "adhd", 1, "z"},    {"d", "u3", "anxiety", 1, "w"},
                            {"e", "u1", "anxiety", 5, "v"}};
    const auto tl = build_timelines(posts);
    CHECK(tl.size() == 3);
    const auto& u1 = tl.at("u1").posts;
    REQUIRE(u1.size() == 3);
    CHECK(u1[0].created_at == 3);
    CHECK(u1[1].id == "b");  // tie at t=5 broken by id
    CHECK(u1[2].id == "e");
}

TEST_CASE("timelines agree with a brute-force group-by") {
    Rng rng(99);
    std::vector<Post> posts;
    for (int i = 0; i < 10'000; ++i) {
        posts.push_back({"p" + std::to_string(i), "user" + std::to_string(rng.below(100)),
                         rng.below(2) ? "anxiety" : "adhd", static_cast<std::int64_t>(1 + rng.below(1000)), "t"});
    }
    rng.shuffle(posts);
    std::unordered_map<std::string, std::size_t> oracle;
    for (const auto& p : posts) {
        ++oracle[p.author];
    }
    const auto tl = build_timelines(posts);
    CHECK(tl.size() == oracle.size());
    std::size_t total = 0;
    for (const auto& [author, t] : tl) {
        CHECK(t.posts.size() == oracle.at(author));
        CHECK(std::is_sorted(t.posts.begin(), t.posts.end(), timeline_order));
        for (std::size_t k = 1; k < t.posts.size(); ++k) {
            CHECK(timeline_order(t.posts[k - 1], t.posts[k]));  // strict
        }
        total += t.posts.size();
    }
    CHECK(total == posts.size());
}

TEST_CASE("corpus store round trip preserves the post multiset") {
    Rng rng(3);
    std::vector<Post> posts;
    for (int i = 0; i < 200; ++i) {
        std::string text = "line " + std::to_string(rng.below(1000));
        if (i % 3 == 0) {
            text += "\nwith \"quotes\" and \\ and tabs\t and caf\xc3\xa9";
        }
        posts.push_back({"id" + std::to_string(i), "u" + std::to_string(rng.below(20)), "anxiety",
                         static_cast<std::int64_t>(1 + rng.below(1u << 30)), text});
    }
    const std::string bytes = serialize_posts(posts);
    auto back = parse_posts(bytes);
    CHECK(serialize_posts(back) == bytes);
    auto a = posts;
    std::sort(a.begin(), a.end());
    std::sort(back.begin(), back.end());
    CHECK(a == back);
}

TEST_CASE("parsing is independent of thread count") {
    Rng rng(5);
    std::string data;
    for (int i = 0; i < 3000; ++i) {
        if (i % 97 == 0) {
            data += "garbage line\n";
        } else {
            data += record("r" + std::to_string(i % 2900), "u" + std::to_string(rng.below(50)), "Anxiety",
                           static_cast<long long>(1 + rng.below(100000)), "t", "b" + std::to_string(i)) +
                    "\n";
        }
    }
    const auto one = parse_records(data, 1);
    const auto four = parse_records(data, 4);
    CHECK(one.records == four.records);
    CHECK(one.errors == four.errors);
    CHECK_FALSE(one.errors.empty());
}

TEST_CASE("ingest_dumps applies the date window and counts rejections") {
    const std::vector<std::string> dumps{
        record("a", "u", "anxiety", 100, "t", "b") + "\n" + record("b", "u", "anxiety", 200, "", "[removed]") + "\n",
        record("c", "u", "anxiety", 300, "", "") + "\n" + record("d", "u", "anxiety", 5000, "t", "b") + "\n" +
            record("a", "v", "anxiety", 150, "t", "b") + "\n"};
    const auto s = ingest_dumps(dumps, DateWindow{50, 1000});
    CHECK(s.posts.size() == 1);
    CHECK(s.rejected_removed == 1);
    CHECK(s.rejected_empty == 1);
    CHECK(s.outside_window == 1);
    CHECK(s.parse_errors.size() == 1);
}

TEST_CASE("ingest_dumps attributes errors to their dump and line") {
    const std::vector<std::string> dumps{record("a", "u", "anxiety", 100, "t", "b") + "\n",
                                         "garbage\n" + record("a", "v", "anxiety", 150, "t", "b") + "\n"};
    const auto s = ingest_dumps(dumps, DateWindow{});
    REQUIRE(s.parse_errors.size() == 2);
    CHECK(s.parse_errors[0].dump == 1);
    CHECK(s.parse_errors[0].error == ParseError{1, "invalid json"});
    CHECK(s.parse_errors[1].dump == 1);
    CHECK(s.parse_errors[1].error == ParseError{2, "duplicate id a"});
}
