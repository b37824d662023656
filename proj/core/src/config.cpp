#include "flexplan/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace flexplan {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string env_name(const std::string& key) {
    std::string name = "FLEXPLAN_";
    for (char c : key) name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return name;
}

}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
        cfg.values_[key] = value;
    }
    return cfg;
}

std::optional<std::string> Config::lookup(const std::string& key) const {
    if (const char* env = std::getenv(env_name(key).c_str())) return std::string(env);
    auto it = values_.find(key);
    if (it != values_.end()) return it->second;
    return std::nullopt;
}

bool Config::has(const std::string& key) const { return lookup(key).has_value(); }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    auto v = lookup(key);
    return v ? *v : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
    auto v = lookup(key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        double d = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument(*v);
        return d;
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "': not a number: " + *v);
    }
}

int Config::get_int(const std::string& key, int fallback) const {
    auto v = lookup(key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        int i = std::stoi(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument(*v);
        return i;
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "': not an integer: " + *v);
    }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto v = lookup(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    throw std::runtime_error("config key '" + key + "': not a boolean: " + *v);
}

std::string Config::summary() const {
    std::string out;
    for (const auto& [k, v] : values_) {
        if (!out.empty()) out += ' ';
        out += k + "=" + v;
    }
    return out;
}

}  // namespace flexplan
