#pragma once

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "game.hpp"

namespace infoshare {

// Instance file format (one item per line, '#' starts a comment):
//
//   [utility]
//   mode = per-path            # or common
//   M = 2000
//   function = coverage        # common mode: coverage | power | log
//   N = 3875                   # coverage;  scale/exponent for power; scale/rate for log
//
//   [paths]
//   # index cost [poi_capacity]
//   1 12.5 3875
//
//   [types]
//   # proportion : w_1 ... w_k
//   0.6 : 0.5 0.5

struct ConfigLine {
  std::size_t number = 0;
  std::string text;
};

/// Section-ordered lines of an INI-like file with comments and blanks removed.
class ConfigDocument {
 public:
  static ConfigDocument parse(std::istream& in) {
    ConfigDocument doc;
    std::string raw;
    std::string current;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
      ++number;
      if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
      const std::string line = trim(raw);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ParseError(number, line, "unterminated section header");
        current = trim(line.substr(1, line.size() - 2));
        if (doc.sections_.count(current)) throw ParseError(number, current, "duplicate section");
        doc.order_.push_back(current);
        doc.sections_[current];
        continue;
      }
      if (current.empty()) throw ParseError(number, line, "content outside any section");
      doc.sections_[current].push_back({number, line});
    }
    return doc;
  }

  static ConfigDocument load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse(in);
  }

  /// Section names in order of first appearance.
  const std::vector<std::string>& section_names() const noexcept { return order_; }

  bool has(const std::string& section) const { return sections_.count(section) != 0; }

  const std::vector<ConfigLine>& lines(const std::string& section) const {
    static const std::vector<ConfigLine> empty;
    auto it = sections_.find(section);
    return it == sections_.end() ? empty : it->second;
  }

  /// key = value pairs of a section, keyed by key, remembering line numbers.
  std::map<std::string, ConfigLine> key_values(const std::string& section) const {
    std::map<std::string, ConfigLine> out;
    for (const auto& l : lines(section)) {
      const auto eq = l.text.find('=');
      if (eq == std::string::npos) throw ParseError(l.number, l.text, "expected key = value");
      const std::string key = trim(l.text.substr(0, eq));
      if (key.empty()) throw ParseError(l.number, l.text, "empty key");
      out[key] = {l.number, trim(l.text.substr(eq + 1))};
    }
    return out;
  }

  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
  }

 private:
  std::map<std::string, std::vector<ConfigLine>> sections_;
  std::vector<std::string> order_;
};

inline double parse_double(std::string_view token, std::size_t line, const std::string& field) {
  double v = 0.0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(line, field, "not a number: '" + std::string(token) + "'");
  }
  return v;
}

inline long long parse_integer(std::string_view token, std::size_t line, const std::string& field) {
  long long v = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(line, field, "not an integer: '" + std::string(token) + "'");
  }
  return v;
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream ss(s);
  std::vector<std::string> out;
  for (std::string t; ss >> t;) out.push_back(t);
  return out;
}

/// Comma-separated list of numbers, e.g. "0.3,0.35,0.4".
inline std::vector<double> parse_double_list(const ConfigLine& l, const std::string& field) {
  std::vector<double> out;
  std::string token;
  std::istringstream ss(l.text);
  while (std::getline(ss, token, ',')) {
    token = ConfigDocument::trim(token);
    if (token.empty()) continue;
    out.push_back(parse_double(token, l.number, field));
  }
  if (out.empty()) throw ParseError(l.number, field, "empty list");
  return out;
}

inline UtilityModel parse_utility(const ConfigDocument& doc, const std::vector<PathSpec>& paths) {
  const auto kv = doc.key_values("utility");
  auto get = [&](const std::string& key) -> const ConfigLine& {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw ParseError(doc.lines("utility").empty() ? 0 : doc.lines("utility").front().number, key,
                       "missing key in [utility]");
    }
    return it->second;
  };
  const auto& mode = get("mode");
  if (mode.text == "per-path") {
    const auto& m = get("M");
    const long long population = parse_integer(m.text, m.number, "M");
    for (const auto& p : paths) {
      if (!p.poi_capacity) {
        throw ParseError(mode.number, "poi_capacity",
                         "per-path mode needs a capacity on path " + std::to_string(p.index));
      }
    }
    try {
      return per_path_from(paths, static_cast<int>(population));
    } catch (const std::invalid_argument& e) {
      throw ParseError(m.number, "M", e.what());
    }
  }
  if (mode.text != "common") throw ParseError(mode.number, "mode", "expected 'common' or 'per-path'");
  std::string function = "coverage";
  if (auto it = kv.find("function"); it != kv.end()) function = it->second.text;
  try {
    if (function == "coverage") {
      const auto& m = get("M");
      const auto& n = get("N");
      return UtilityModel::common_coverage(static_cast<int>(parse_integer(n.text, n.number, "N")),
                                           static_cast<int>(parse_integer(m.text, m.number, "M")));
    }
    if (function == "power") {
      const auto& a = get("scale");
      const auto& p = get("exponent");
      return UtilityModel::common_power(parse_double(a.text, a.number, "scale"),
                                        parse_double(p.text, p.number, "exponent"));
    }
    if (function == "log") {
      const auto& a = get("scale");
      const auto& b = get("rate");
      return UtilityModel::common_log(parse_double(a.text, a.number, "scale"),
                                      parse_double(b.text, b.number, "rate"));
    }
  } catch (const std::invalid_argument& e) {
    throw ParseError(mode.number, function, e.what());
  }
  throw ParseError(kv.at("function").number, "function", "unknown function '" + function + "'");
}

inline GameInstance parse_instance(std::istream& in) {
  const auto doc = ConfigDocument::parse(in);
  for (const char* s : {"paths", "types", "utility"}) {
    if (!doc.has(s)) throw ParseError(0, s, "missing section");
  }

  std::vector<PathSpec> paths;
  for (const auto& l : doc.lines("paths")) {
    const auto tok = split_ws(l.text);
    if (tok.size() < 2 || tok.size() > 3) {
      throw ParseError(l.number, "paths", "expected 'index cost [poi_capacity]'");
    }
    PathSpec p;
    p.index = static_cast<int>(parse_integer(tok[0], l.number, "index"));
    if (p.index != static_cast<int>(paths.size()) + 1) {
      throw ParseError(l.number, "index", "paths must be listed as 1..k in order");
    }
    p.cost = parse_double(tok[1], l.number, "cost");
    if (!(p.cost >= 0.0)) throw ParseError(l.number, "cost", "must be non-negative");
    if (tok.size() == 3) {
      const long long n = parse_integer(tok[2], l.number, "poi_capacity");
      if (n < 1) throw ParseError(l.number, "poi_capacity", "must be a positive integer");
      p.poi_capacity = static_cast<int>(n);
    }
    paths.push_back(p);
  }

  std::vector<UserType> types;
  for (const auto& l : doc.lines("types")) {
    const auto colon = l.text.find(':');
    if (colon == std::string::npos) {
      throw ParseError(l.number, "types", "expected 'proportion : w_1 ... w_k'");
    }
    UserType t;
    t.index = static_cast<int>(types.size()) + 1;
    t.proportion = parse_double(ConfigDocument::trim(l.text.substr(0, colon)), l.number, "proportion");
    for (const auto& w : split_ws(l.text.substr(colon + 1))) {
      t.weights.push_back(parse_double(w, l.number, "weight"));
    }
    if (t.weights.size() != paths.size()) {
      throw ParseError(l.number, "weights",
                       "expected " + std::to_string(paths.size()) + " weights, got " +
                           std::to_string(t.weights.size()));
    }
    types.push_back(std::move(t));
  }

  auto utility = parse_utility(doc, paths);
  try {
    return GameInstance(std::move(paths), std::move(types), std::move(utility));
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, "instance", e.what());
  }
}

inline GameInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file " + path);
  return parse_instance(in);
}

/// Writes a per-path-mode instance in the format read by parse_instance.
inline void write_instance(std::ostream& out, const GameInstance& g) {
  out << std::setprecision(17);
  out << "[utility]\n";
  if (g.utility().mode() == UtilityModel::Mode::per_path) {
    out << "mode = per-path\nM = " << g.utility().population() << "\n";
  } else {
    throw UnsupportedModeError("only per-path instances can be serialized");
  }
  out << "\n[paths]\n";
  for (std::size_t j = 0; j < g.k(); ++j) {
    out << j + 1 << ' ' << g.cost(j) << ' ' << g.utility().capacities()[j] << "\n";
  }
  out << "\n[types]\n";
  for (std::size_t i = 0; i < g.m(); ++i) {
    out << g.eta(i) << " :";
    for (std::size_t j = 0; j < g.k(); ++j) out << ' ' << g.weight(i, j);
    out << "\n";
  }
}

}  // namespace infoshare
