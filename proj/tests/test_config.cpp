#include <doctest.h>

#include "anx/config.hpp"

using anx::Config;
using anx::ConfigError;

TEST_CASE("defaults are available for every key") {
    Config c;
    CHECK(c.real("learning_rate") == 1e-5);
    CHECK(c.real("dropout_p") == 0.3);
    CHECK(c.size("batch_size") == 16);
    CHECK(c.integer("window_seconds") == 183 * 86400);
    CHECK(c.str("split_unit") == "by-user");
    CHECK(c.real_list("grid_nb_alpha") == std::vector<double>{0.01, 0.1, 0.5, 1, 2, 5});
    for (const auto& [key, value] : Config::defaults()) {
        CHECK(c.str(key) == value);
    }
}

TEST_CASE("file values override defaults") {
    Config c;
    c.load_text("# comment\n\nseed = 42\n  epochs=3  \n");
    CHECK(c.unsigned_integer("seed") == 42);
    CHECK(c.size("epochs") == 3);
    CHECK(c.dump().find("epochs = 3\n") != std::string::npos);
}

TEST_CASE("dump lists keys in sorted order and reloads identically") {
    Config c;
    c.set("d_model", "32");
    Config d;
    d.load_text(c.dump());
    CHECK(d.dump() == c.dump());
    CHECK(c.dump().rfind("adam_beta1 = 0.9\n", 0) == 0);
}

TEST_CASE("bad input is rejected") {
    Config c;
    CHECK_THROWS_AS(c.load_text("no_such_key = 1\n"), ConfigError);
    CHECK_THROWS_AS(c.load_text("seed 1\n"), ConfigError);
    c.set("seed", "-1");
    CHECK_THROWS_AS(c.unsigned_integer("seed"), ConfigError);
    c.set("dropout_p", "high");
    CHECK_THROWS_AS(c.real("dropout_p"), ConfigError);
    CHECK_THROWS_AS(c.str("missing"), ConfigError);
}
