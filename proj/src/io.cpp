#include "ionsim/io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ionsim::io {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

} // namespace

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

Config Config::parse(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
      }
      cfg.sections_[section]; // section may legitimately stay empty
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": key outside any [section]");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    if (cfg.sections_[section].count(key)) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key [" + section +
                        "] " + key);
    }
    cfg.sections_[section][key] = value;
    cfg.lines_[section][key] = lineno;
  }
  return cfg;
}

bool Config::has_section(const std::string& section) const {
  return sections_.count(section) != 0;
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) != 0;
}

void Config::fail(const std::string& section, const std::string& key,
                  const std::string& what) const {
  std::string where = origin_;
  auto sit = lines_.find(section);
  if (sit != lines_.end()) {
    auto kit = sit->second.find(key);
    if (kit != sit->second.end()) where += ":" + std::to_string(kit->second);
  }
  throw ConfigError(where + ": [" + section + "] " + key + ": " + what);
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
  auto sit = sections_.find(section);
  if (sit == sections_.end()) throw ConfigError(origin_ + ": missing section [" + section + "]");
  auto kit = sit->second.find(key);
  if (kit == sit->second.end()) fail(section, key, "missing required key");
  return kit->second;
}

double Config::get_double(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) fail(section, key, "trailing characters in number '" + v + "'");
    return d;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    fail(section, key, "not a number: '" + v + "'");
  }
}

int Config::get_int(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    fail(section, key, "not an integer: '" + v + "'");
  }
  return out;
}

std::uint64_t Config::get_u64(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    fail(section, key, "not an unsigned integer: '" + v + "'");
  }
  return out;
}

bool Config::get_bool(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(section, key, "not a boolean: '" + v + "'");
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? get_string(section, key) : fallback;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  return has(section, key) ? get_bool(section, key) : fallback;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  sections_[section][key] = value;
}

void Config::check_schema(const std::map<std::string, std::vector<std::string>>& schema) const {
  for (const auto& [section, keys] : sections_) {
    auto sit = schema.find(section);
    if (sit == schema.end()) {
      throw ConfigError(origin_ + ": unknown section [" + section + "]");
    }
    for (const auto& [key, value] : keys) {
      (void)value;
      bool known = false;
      for (const auto& allowed : sit->second) {
        if (allowed == key) { known = true; break; }
      }
      if (!known) fail(section, key, "unknown key");
    }
  }
}

std::string Config::serialize() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, keys] : sections_) {
    if (!first) out << "\n";
    first = false;
    out << "[" << section << "]\n";
    for (const auto& [key, value] : keys) out << key << " = " << value << "\n";
  }
  return out.str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["subcommand"] = subcommand;
  j["target"] = target;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["version"] = version;
  j["outputs"] = outputs;
  return j.dump(2) + "\n";
}

CsvWriter::CsvWriter(std::string title, std::vector<std::string> columns,
                     std::vector<std::string> units)
    : title_(std::move(title)), columns_(std::move(columns)), units_(std::move(units)) {
  if (units_.size() != columns_.size()) {
    throw std::invalid_argument("CsvWriter: units/columns size mismatch");
  }
}

void CsvWriter::comment(const std::string& line) { comments_.push_back(line); }

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_.size()) {
    throw std::invalid_argument("CsvWriter: row width mismatch");
  }
  std::vector<std::string> cells;
  cells.reserve(values.size());
  char buf[64];
  for (const double v : values) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    cells.emplace_back(buf);
  }
  rows_.push_back(std::move(cells));
}

void CsvWriter::row_mixed(const std::vector<std::string>& values) {
  if (values.size() != columns_.size()) {
    throw std::invalid_argument("CsvWriter: row width mismatch");
  }
  rows_.push_back(values);
}

std::string CsvWriter::serialize(const std::string& manifest_hash) const {
  std::ostringstream out;
  out << "# " << title_ << "\n";
  for (const auto& c : comments_) out << "# " << c << "\n";
  out << "# config_hash: " << manifest_hash << "\n";
  out << "# units:";
  for (std::size_t i = 0; i < units_.size(); ++i) {
    out << (i ? "," : " ") << (units_[i].empty() ? "-" : units_[i]);
  }
  out << "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
  out << "\n";
  for (const auto& r : rows_) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << "\n";
  }
  return out.str();
}

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  fs::create_directories(dir);
  const fs::path tmp = dir / (path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

} // namespace ionsim::io
