#ifndef CROWD_IO_HPP
#define CROWD_IO_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace crowd::io {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Config file: '#' comments, [section] headers, key = value lines. Values are
// booleans, numbers, quoted strings or arrays of numbers. Keys are stored as
// "section.key".
using Value = std::variant<bool, double, std::string, std::vector<double>>;

class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<string>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, Value v) { values_[key] = std::move(v); }

  // Typed access; throws ConfigError naming the key on a type mismatch.
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_array(const std::string& key, const std::vector<double>& fallback) const;

  // Throws ConfigError for keys not in `known`.
  void require_known(const std::vector<std::string>& known) const;

  const std::map<std::string, Value>& values() const { return values_; }
  const std::string& text() const { return text_; }

 private:
  std::map<std::string, Value> values_;
  std::string text_;
};

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

struct Table {
  std::vector<std::string> meta;     // header lines without the leading '# '
  std::vector<std::string> columns;  // empty for a bare matrix
  Eigen::MatrixXd data;
};

std::string to_csv(const Table& t);
Table from_csv(const std::string& text);
void write_csv(const std::string& path, const Table& t);
Table read_csv(const std::string& path);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);
// Creates the directory (and parents); throws IoError when that fails or
// the directory is not writable.
void ensure_directory(const std::string& path);

// nlohmann::json keeps object keys sorted, so dumps are stable.
void write_json(const std::string& path, const nlohmann::json& j);

inline constexpr int kFormatVersion = 1;

struct RunManifest {
  std::string subcommand;
  std::string config_path;
  std::string config_text;
  std::string out_dir;
  std::uint64_t seed = 1;
  int runs = 0;
  int threads = 1;
  bool quick = false;
  int format_version = kFormatVersion;

  nlohmann::json to_json() const;
  // FNV-1a over the compact JSON form without the thread count, 16 hex
  // digits.
  std::string hash() const;
};

std::uint64_t fnv1a(const std::string& bytes);

}  // namespace crowd::io

#endif  // CROWD_IO_HPP
