#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace satemis::config {

// Flat key = value document; '#' starts a comment, blank lines are ignored.
// Later assignments win, which is also how command-line overrides layer on
// top of a file.
using KeyValueMap = std::map<std::string, std::string>;

KeyValueMap parse_key_values(const std::filesystem::path& path);

std::string get_string(const KeyValueMap& kv, const std::string& key,
                       const std::string& fallback);
double get_double(const KeyValueMap& kv, const std::string& key, double fallback);
long get_long(const KeyValueMap& kv, const std::string& key, long fallback);
bool get_bool(const KeyValueMap& kv, const std::string& key, bool fallback);
std::vector<std::string> split_list(const std::string& text);

}  // namespace satemis::config
