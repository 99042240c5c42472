#include "anx/config.hpp"

#include <charconv>
#include <sstream>

#include "anx/util.hpp"

namespace anx {

const std::map<std::string, std::string>& Config::defaults() {
    static const std::map<std::string, std::string> table = {
        // ingest
        {"threads", "1"},
        {"date_start", "0"},
        {"date_end", "0"},
        // cohort
        {"anxiety_forum", "anxiety"},
        {"adhd_forum", "adhd"},
        {"window_seconds", "15811200"},
        {"test_fraction", "0.33"},
        {"split_unit", "by-user"},
        {"validation_fraction", "0.2"},
        // features
        {"min_count", "2"},
        {"max_size", "20000"},
        {"max_len", "128"},
        {"lr_features", "binary"},
        // baselines
        {"nb_alpha", "1"},
        {"lr_lambda", "0.001"},
        {"lr_learning_rate", "0.1"},
        {"lr_epochs", "500"},
        {"grid_nb_alpha", "0.01,0.1,0.5,1,2,5"},
        {"grid_lr_lambda", "0.0001,0.001,0.01,0.1,1"},
        // transformer
        {"d_model", "64"},
        {"n_heads", "4"},
        {"n_layers", "2"},
        {"d_ff", "256"},
        {"dropout_p", "0.3"},
        {"learning_rate", "1e-05"},
        {"adam_beta1", "0.9"},
        {"adam_beta2", "0.999"},
        {"adam_eps", "1e-08"},
        {"epochs", "10"},
        {"batch_size", "16"},
        // evaluation and explanation
        {"threshold", "0.5"},
        {"max_phrase_len", "3"},
        // synthetic corpora
        {"synth_mode", "order"},
        {"synth_users_per_class", "200"},
        {"synth_posts_min", "5"},
        {"synth_posts_max", "5"},
        {"synth_len_min", "8"},
        {"synth_len_max", "12"},
        {"synth_vocab_pool", "200"},
        {"synth_marker_pairs", "2"},
        {"synth_cue_tokens", "4"},
        {"synth_max_marker_gap", "0"},
        {"synth_signal_strength", "1"},
        // global
        {"seed", "0"},
    };
    return table;
}

Config::Config() : values_(defaults()) {}

void Config::load_text(std::string_view text, std::string_view origin) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": expected key = value");
        }
        set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
}

void Config::set(const std::string& key, std::string value) {
    auto it = values_.find(key);
    if (it == values_.end()) {
        throw ConfigError("unknown config key '" + key + "'");
    }
    it->second = std::move(value);
}

const std::string& Config::str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
        throw ConfigError("unknown config key '" + key + "'");
    }
    return it->second;
}

double Config::real(const std::string& key) const {
    try {
        return parse_double(str(key));
    } catch (const DataError&) {
        throw ConfigError("config key '" + key + "' is not a number: " + str(key));
    }
}

std::int64_t Config::integer(const std::string& key) const {
    const std::string& s = str(key);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError("config key '" + key + "' is not an integer: " + s);
    }
    return v;
}

std::uint64_t Config::unsigned_integer(const std::string& key) const {
    const std::string& s = str(key);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError("config key '" + key + "' is not a non-negative integer: " + s);
    }
    return v;
}

std::size_t Config::size(const std::string& key) const {
    return static_cast<std::size_t>(unsigned_integer(key));
}

std::vector<double> Config::real_list(const std::string& key) const {
    std::vector<double> out;
    std::istringstream in(str(key));
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            out.push_back(parse_double(trim(item)));
        } catch (const DataError&) {
            throw ConfigError("config key '" + key + "' has a bad list entry: " + item);
        }
    }
    if (out.empty()) {
        throw ConfigError("config key '" + key + "' is an empty list");
    }
    return out;
}

std::string Config::dump() const {
    std::string out;
    for (const auto& [k, v] : values_) {
        out += k + " = " + v + "\n";
    }
    return out;
}

}  // namespace anx
