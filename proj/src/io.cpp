#include "crowd/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "crowd/geometry.hpp"

namespace crowd::io {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    if (line[k] == '"') quoted = !quoted;
    if (line[k] == '#' && !quoted) return line.substr(0, k);
  }
  return line;
}

bool try_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

Value parse_value(const std::string& raw, const std::string& where) {
  const std::string v = trim(raw);
  if (v.empty()) throw ConfigError(where + ": missing value");
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') throw ConfigError(where + ": unterminated string");
    return v.substr(1, v.size() - 2);
  }
  if (v.front() == '[') {
    if (v.back() != ']') throw ConfigError(where + ": unterminated array");
    std::vector<double> items;
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      double d;
      if (!try_number(item, d)) throw ConfigError(where + ": array item '" + item + "' is not a number");
      items.push_back(d);
    }
    return items;
  }
  double d;
  if (try_number(v, d)) return d;
  throw ConfigError(where + ": cannot parse value '" + v + "'");
}

bool numeric_cell(const std::string& raw) {
  const std::string s = trim(raw);
  double d;
  return s == "nan" || s == "inf" || s == "-inf" || try_number(s, d);
}

const char* kind_name(const Value& v) {
  switch (v.index()) {
    case 0: return "boolean";
    case 1: return "number";
    case 2: return "string";
    default: return "array";
  }
}

[[noreturn]] void mismatch(const std::string& key, const Value& v, const char* wanted) {
  throw ConfigError("config key '" + key + "' must be a " + wanted + ", got a " + kind_name(v));
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
  Config c;
  c.text_ = text;
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (c.values_.count(full)) throw ConfigError(where + ": duplicate key '" + full + "'");
    c.values_[full] = parse_value(line.substr(eq + 1), where + " (" + full + ")");
  }
  return c;
}

Config Config::load(const std::string& path) {
  return parse(read_text(path), path);
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const double* d = std::get_if<double>(&it->second)) return *d;
  mismatch(key, it->second, "number");
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const double* d = std::get_if<double>(&it->second);
  if (!d) mismatch(key, it->second, "number");
  if (std::floor(*d) != *d || std::abs(*d) > std::numeric_limits<int>::max()) {
    throw ConfigError("config key '" + key + "' must be an integer");
  }
  return static_cast<int>(*d);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const bool* b = std::get_if<bool>(&it->second)) return *b;
  mismatch(key, it->second, "boolean");
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const std::string* s = std::get_if<std::string>(&it->second)) return *s;
  mismatch(key, it->second, "string");
}

std::vector<double> Config::get_array(const std::string& key,
                                      const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const auto* a = std::get_if<std::vector<double>>(&it->second)) return *a;
  if (const double* d = std::get_if<double>(&it->second)) return {*d};
  mismatch(key, it->second, "array");
}

void Config::require_known(const std::vector<std::string>& known) const {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, _] : values_) {
    if (!allowed.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double d;
  if (!try_number(s, d)) throw IoError("cannot parse number '" + s + "'");
  return d;
}

std::string to_csv(const Table& t) {
  if (!t.columns.empty() && static_cast<Eigen::Index>(t.columns.size()) != t.data.cols()) {
    throw IoError("column names do not match the data width");
  }
  std::string out;
  for (const std::string& m : t.meta) out += "# " + m + "\n";
  for (std::size_t k = 0; k < t.columns.size(); ++k) {
    out += (k ? "," : "") + t.columns[k];
  }
  if (!t.columns.empty()) out += "\n";
  for (Eigen::Index r = 0; r < t.data.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.data.cols(); ++c) {
      if (c) out += ',';
      out += format_double(t.data(r, c));
    }
    out += '\n';
  }
  return out;
}

Table from_csv(const std::string& text) {
  Table t;
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      t.meta.push_back(line.size() > 1 && line[1] == ' ' ? line.substr(2) : line.substr(1));
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (rows.empty() && t.columns.empty() &&
        !std::all_of(cells.begin(), cells.end(), numeric_cell)) {
      t.columns = cells;
      continue;
    }
    std::vector<double> row;
    for (const std::string& c : cells) row.push_back(parse_double(c));
    if (!rows.empty() && row.size() != rows.front().size()) throw IoError("ragged CSV row");
    rows.push_back(std::move(row));
  }
  const Eigen::Index nc = rows.empty() ? static_cast<Eigen::Index>(t.columns.size())
                                       : static_cast<Eigen::Index>(rows.front().size());
  t.data.resize(static_cast<Eigen::Index>(rows.size()), nc);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Eigen::Index c = 0; c < nc; ++c) t.data(r, c) = rows[r][c];
  }
  return t;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw IoError("write to '" + path + "' failed");
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_csv(const std::string& path, const Table& t) { write_text(path, to_csv(t)); }

Table read_csv(const std::string& path) { return from_csv(read_text(path)); }

void ensure_directory(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec || !fs::is_directory(path)) {
    throw IoError("cannot create output directory '" + path + "'");
  }
  const fs::path probe = fs::path(path) / ".write_probe";
  {
    std::ofstream f(probe);
    if (!f) throw IoError("output directory '" + path + "' is not writable");
  }
  fs::remove(probe, ec);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["config_path"] = config_path;
  j["config_text"] = config_text;
  j["out_dir"] = out_dir;
  j["seed"] = seed;
  j["runs"] = runs;
  j["threads"] = threads;
  j["quick"] = quick;
  j["format_version"] = format_version;
  return j;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunManifest::hash() const {
  // Results do not depend on the thread count, so neither does the hash.
  nlohmann::json j = to_json();
  j.erase("threads");
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

}  // namespace crowd::io
