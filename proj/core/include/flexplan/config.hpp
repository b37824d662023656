#pragma once

#include <map>
#include <optional>
#include <string>

namespace flexplan {

// Key-value configuration: `key = value` lines, '#' comments, blank lines
// ignored. Environment variables named FLEXPLAN_<UPPERCASED_KEY> override
// file values.
class Config {
public:
    Config() = default;

    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }

    // One "k=v k=v ..." line, used to echo the configuration into report headers.
    std::string summary() const;

private:
    std::optional<std::string> lookup(const std::string& key) const;
    std::map<std::string, std::string> values_;
};

}  // namespace flexplan
