#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "streamforge/errors.hpp"

namespace streamforge {

/// Flat string->string key-value map loaded from the YAML subset the tool
/// supports: `key: value` lines, '#' comments, blank lines. Anything nested
/// (indentation, lists) is rejected rather than half-parsed.
struct ConfigMap {
    std::map<std::string, std::string> values;
    std::string source;  // path or label, used in error messages

    bool has(const std::string& key) const { return values.count(key) > 0; }

    const std::string& get(const std::string& key) const {
        auto it = values.find(key);
        if (it == values.end()) {
            throw ValidationError("missing required key '" + key + "' in " + source);
        }
        return it->second;
    }

    std::string get_or(const std::string& key, const std::string& fallback) const {
        auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }

    std::int64_t get_i64(const std::string& key) const { return parse_i64(key, get(key)); }
    std::int64_t get_i64_or(const std::string& key, std::int64_t fallback) const {
        auto it = values.find(key);
        return it == values.end() ? fallback : parse_i64(key, it->second);
    }

    double get_double(const std::string& key) const { return parse_double(key, get(key)); }
    double get_double_or(const std::string& key, double fallback) const {
        auto it = values.find(key);
        return it == values.end() ? fallback : parse_double(key, it->second);
    }

    void require_only(const std::set<std::string>& allowed) const {
        for (const auto& [k, v] : values) {
            if (!allowed.count(k)) {
                throw ValidationError("unknown key '" + k + "' in " + source);
            }
        }
    }

    std::int64_t parse_i64(const std::string& key, const std::string& raw) const {
        try {
            std::size_t pos = 0;
            long long v = std::stoll(raw, &pos);
            if (pos != raw.size()) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            throw ParseError("key '" + key + "' in " + source + ": '" + raw +
                             "' is not an integer");
        }
    }

    double parse_double(const std::string& key, const std::string& raw) const {
        try {
            std::size_t pos = 0;
            double v = std::stod(raw, &pos);
            if (pos != raw.size()) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            throw ParseError("key '" + key + "' in " + source + ": '" + raw +
                             "' is not a number");
        }
    }
};

namespace detail {

inline std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string strip_inline_comment(const std::string& s) {
    // an unquoted " #" starts a comment, as in YAML scalars
    bool in_quote = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_quote = !in_quote;
        if (!in_quote && s[i] == '#' && (i == 0 || s[i - 1] == ' ' || s[i - 1] == '\t')) {
            return s.substr(0, i);
        }
    }
    return s;
}

inline std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

}  // namespace detail

/// Parses config text in the flat key-value subset. `source` labels errors.
inline ConfigMap parse_component_config(const std::string& text, const std::string& source) {
    ConfigMap cfg;
    cfg.source = source;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string no_comment = detail::strip_inline_comment(line);
        std::string body = detail::strip(no_comment);
        if (body.empty()) continue;
        if (body == "---") continue;  // document marker, tolerated
        if (no_comment[0] == ' ' || no_comment[0] == '\t') {
            throw UnsupportedStructureError(source + ":" + std::to_string(lineno) +
                                            ": indented line; only flat maps are supported");
        }
        if (body[0] == '-') {
            throw UnsupportedStructureError(source + ":" + std::to_string(lineno) +
                                            ": list item; only flat maps are supported");
        }
        std::size_t colon = body.find(':');
        if (colon == std::string::npos || colon == 0) {
            throw ParseError(source + ":" + std::to_string(lineno) + ": expected 'key: value'");
        }
        std::string key = detail::strip(body.substr(0, colon));
        std::string value = detail::unquote(detail::strip(body.substr(colon + 1)));
        if (cfg.values.count(key)) {
            throw ParseError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                             "'");
        }
        cfg.values.emplace(std::move(key), std::move(value));
    }
    return cfg;
}

/// Loads a config file in the flat key-value subset.
inline ConfigMap load_component_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw MissingConfigError("cannot open config file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_component_config(buf.str(), path.string());
}

/// Splits "a,b,c" into trimmed items; empty items are dropped.
inline std::vector<std::string> split_list(const std::string& raw) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(raw);
    while (std::getline(in, item, ',')) {
        std::string t = detail::strip(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

/// Parses "topicA:2,topicB:1" (or "topicA,topicB" with implicit weight 1)
/// into an ordered weight map.
inline std::map<std::string, double> parse_weight_map(const std::string& raw,
                                                      const std::string& source) {
    std::map<std::string, double> out;
    for (const std::string& item : split_list(raw)) {
        std::size_t colon = item.find(':');
        std::string name = colon == std::string::npos ? item : detail::strip(item.substr(0, colon));
        double w = 1.0;
        if (colon != std::string::npos) {
            std::string ws = detail::strip(item.substr(colon + 1));
            try {
                std::size_t pos = 0;
                w = std::stod(ws, &pos);
                if (pos != ws.size()) throw std::invalid_argument(ws);
            } catch (const std::exception&) {
                throw ParseError(source + ": bad weight '" + ws + "' for '" + name + "'");
            }
        }
        if (name.empty() || w <= 0.0) {
            throw ParseError(source + ": bad weight entry '" + item + "'");
        }
        if (out.count(name)) {
            throw ParseError(source + ": duplicate entry '" + name + "'");
        }
        out.emplace(name, w);
    }
    return out;
}

}  // namespace streamforge
