#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace anx {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Flat `key = value` configuration. Every key has a built-in default; files
/// and overrides may only set known keys. `#` starts a comment line.
class Config {
public:
    Config();

    static const std::map<std::string, std::string>& defaults();

    void load_text(std::string_view text, std::string_view origin = "config");
    void set(const std::string& key, std::string value);

    const std::string& str(const std::string& key) const;
    double real(const std::string& key) const;
    std::int64_t integer(const std::string& key) const;
    std::uint64_t unsigned_integer(const std::string& key) const;
    std::size_t size(const std::string& key) const;
    std::vector<double> real_list(const std::string& key) const;

    /// Resolved configuration, one `key = value` per line in key order.
    std::string dump() const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace anx
