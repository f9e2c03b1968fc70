#include "pulsal/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "pulsal/error.hpp"

namespace pulsal {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("config key '" + key + "': '" + text + "' is not a number");
  }
  return v;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) throw ParseError("config line " + std::to_string(lineno) + ": empty key");
    cfg.set(key, trim(std::string_view(body).substr(eq + 1)));
    cfg.lines_[key] = lineno;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open config " + path.string());
  return parse(in);
}

void KeyValueConfig::set(const std::string& key, std::string value) { entries_[key] = std::move(value); }

std::optional<std::string> KeyValueConfig::text(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> KeyValueConfig::number(const std::string& key) const {
  const auto t = text(key);
  if (!t) return std::nullopt;
  return to_number(key, *t);
}

std::optional<long long> KeyValueConfig::integer(const std::string& key) const {
  const auto t = text(key);
  if (!t) return std::nullopt;
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t->data(), t->data() + t->size(), v);
  if (ec != std::errc() || ptr != t->data() + t->size()) {
    throw ParseError("config key '" + key + "': '" + *t + "' is not an integer");
  }
  return v;
}

std::optional<std::vector<double>> KeyValueConfig::numbers(const std::string& key) const {
  auto t = text(key);
  if (!t) return std::nullopt;
  for (char& c : *t) {
    if (c == ',') c = ' ';
  }
  std::istringstream ss(*t);
  std::vector<double> out;
  std::string item;
  while (ss >> item) out.push_back(to_number(key, item));
  return out;
}

void KeyValueConfig::require_known(const std::set<std::string>& known) const {
  for (const auto& [key, value] : entries_) {
    if (known.count(key) == 0) {
      const auto line = lines_.find(key);
      std::string where = line == lines_.end() ? "" : " (line " + std::to_string(line->second) + ")";
      throw ParseError("unknown config key '" + key + "'" + where);
    }
  }
}

}  // namespace pulsal
