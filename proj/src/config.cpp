#include "metalr/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace metalr {

namespace {

struct KeyInfo {
  const char* key;
  const char* section;
  const char* fallback;
};

constexpr KeyInfo kKeys[] = {
    {"k", "meta", "16"},
    {"d", "meta", "128"},
    {"preset", "meta", "orthonormal"},
    {"delta", "meta", "1"},
    {"sigma", "meta", "1"},
    {"n_l1", "pool", "65536"},
    {"t_l1", "pool", "8"},
    {"n_h", "pool", "256"},
    {"t_h", "pool", "80"},
    {"n_l2", "pool", "512"},
    {"t_l2", "pool", "40"},
    {"L", "pipeline", "0"},
    {"tau", "pipeline", "0"},
    {"linkage", "pipeline", "average"},
    {"trials", "bench", "10"},
    {"repeats", "bench", "3"},
    {"confidence", "bench", "0.9"},
    {"gamma2_grid", "bench", "0,0.1,0.5,1"},
    {"em_max_iters", "bench", "500"},
    {"em_tol", "bench", "1e-7"},
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Index to_index(const std::string& key, const std::string& text) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) throw ConfigError("key '" + key + "': not an integer: " + text);
  return static_cast<Index>(value);
}

double to_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a number: " + text);
  }
}

}  // namespace

const std::map<std::string, std::string>& Config::section_of() {
  static const std::map<std::string, std::string> table = [] {
    std::map<std::string, std::string> m;
    for (const auto& entry : kKeys) m.emplace(entry.key, entry.section);
    return m;
  }();
  return table;
}

Config::Config() {
  for (const auto& entry : kKeys) values_[entry.key] = entry.fallback;
}

void Config::set(const std::string& key, const std::string& value) {
  if (!section_of().contains(key)) throw ConfigError("unknown config key: " + key);
  values_[key] = value;
}

Config Config::parse(const std::string& text) {
  Config config;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "meta" && section != "pool" && section != "pipeline" && section != "bench")
        throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = section_of().find(key);
    if (it == section_of().end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (section.empty()) throw ConfigError(where + "key '" + key + "' outside any section");
    if (it->second != section) throw ConfigError(where + "key '" + key + "' belongs in [" + it->second + "]");
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    if (value.empty()) throw ConfigError(where + "empty value for '" + key + "'");
    config.values_[key] = value;
  }
  return config;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const std::string& Config::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key: " + key);
  return it->second;
}

Index Config::get_index(const std::string& key) const {
  const auto items = split_list(raw(key));
  if (items.size() != 1) throw ConfigError("key '" + key + "' expects a single integer");
  return to_index(key, items.front());
}

double Config::get_double(const std::string& key) const {
  const auto items = split_list(raw(key));
  if (items.size() != 1) throw ConfigError("key '" + key + "' expects a single number");
  return to_double(key, items.front());
}

std::vector<Index> Config::get_index_list(const std::string& key) const {
  std::vector<Index> out;
  for (const auto& item : split_list(raw(key))) out.push_back(to_index(key, item));
  if (out.empty()) throw ConfigError("key '" + key + "' is empty");
  return out;
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(raw(key))) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError("key '" + key + "' is empty");
  return out;
}

std::string Config::canonical() const {
  std::ostringstream os;
  for (const char* section : {"meta", "pool", "pipeline", "bench"}) {
    os << '[' << section << "]\n";
    for (const auto& entry : kKeys)
      if (std::string(entry.section) == section) os << entry.key << " = " << values_.at(entry.key) << '\n';
  }
  return os.str();
}

std::string Config::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace metalr
