#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ionsim::io {

// Config / CSV problems carry the offending file, line, and field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// INI-style config: [section] headers, key = value pairs, '#' comments.
// One nesting level only; keys are typed on access.
class Config {
 public:
  static Config load(const std::filesystem::path& path);
  static Config parse(const std::string& text, const std::string& origin);

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key) const;
  int get_int(const std::string& section, const std::string& key) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key) const;
  bool get_bool(const std::string& section, const std::string& key) const;

  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

  void set(const std::string& section, const std::string& key, const std::string& value);

  // Throws ConfigError listing any section/key pair absent from `schema`
  // (map section -> allowed keys). Sections not in the schema are rejected.
  void check_schema(const std::map<std::string, std::vector<std::string>>& schema) const;

  // Canonical text form: sections and keys sorted, one key per line. Parsing
  // the result reproduces the config (round-trip).
  std::string serialize() const;

  const std::string& origin() const { return origin_; }

 private:
  std::string origin_;
  std::map<std::string, std::map<std::string, std::string>> sections_;
  std::map<std::string, std::map<std::string, int>> lines_; // for diagnostics

  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& what) const;
};

std::uint64_t fnv1a64(const std::string& bytes);

struct RunManifest {
  std::string subcommand;
  std::string target; // dataset the output reproduces
  std::uint64_t seed = 0;
  std::string config_hash; // fnv1a64 of the resolved config text, hex
  std::string version;
  std::vector<std::string> outputs;

  std::string to_json() const;
};

// Column-oriented CSV with a '#' header block (title, units, manifest hash).
class CsvWriter {
 public:
  CsvWriter(std::string title, std::vector<std::string> columns,
            std::vector<std::string> units);

  void comment(const std::string& line);
  void row(const std::vector<double>& values);
  void row_mixed(const std::vector<std::string>& values);

  // Serializes with %.12g formatting; includes `manifest_hash` in the header.
  std::string serialize(const std::string& manifest_hash) const;

 private:
  std::string title_;
  std::vector<std::string> columns_, units_, comments_;
  std::vector<std::vector<std::string>> rows_;
};

// Writes via a temp file in the same directory + atomic rename.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

inline constexpr const char* kToolkitVersion = "0.1.0";

} // namespace ionsim::io
