#include "satemis/config.hpp"

#include "satemis/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

namespace satemis::config {
namespace {

std::string trim(const std::string& s) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    auto begin = s.begin();
    auto end = s.end();
    while (begin != end && is_space(static_cast<unsigned char>(*begin))) ++begin;
    while (end != begin && is_space(static_cast<unsigned char>(*(end - 1)))) --end;
    return std::string(begin, end);
}

}  // namespace

KeyValueMap parse_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open config " + path.string());
    }
    KeyValueMap kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        const std::string trimmed = trim(line);
        if (trimmed.empty()) {
            continue;
        }
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": expected key = value");
        }
        const std::string key = trim(trimmed.substr(0, eq));
        if (key.empty()) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": empty key");
        }
        kv[key] = trim(trimmed.substr(eq + 1));
    }
    return kv;
}

std::string get_string(const KeyValueMap& kv, const std::string& key,
                       const std::string& fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

double get_double(const KeyValueMap& kv, const std::string& key, double fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) {
        return fallback;
    }
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) {
            throw std::invalid_argument(it->second);
        }
        return v;
    } catch (const std::exception&) {
        throw ValidationError("config key '" + key + "': bad number '" + it->second + "'");
    }
}

long get_long(const KeyValueMap& kv, const std::string& key, long fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) {
        return fallback;
    }
    try {
        std::size_t pos = 0;
        const long v = std::stol(it->second, &pos);
        if (pos != it->second.size()) {
            throw std::invalid_argument(it->second);
        }
        return v;
    } catch (const std::exception&) {
        throw ValidationError("config key '" + key + "': bad integer '" + it->second +
                              "'");
    }
}

bool get_bool(const KeyValueMap& kv, const std::string& key, bool fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) {
        return fallback;
    }
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ValidationError("config key '" + key + "': bad boolean '" + it->second + "'");
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    for (const char c : text) {
        if (c == ',') {
            if (!item.empty()) out.push_back(item);
            item.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            item += c;
        }
    }
    if (!item.empty()) out.push_back(item);
    return out;
}

}  // namespace satemis::config
