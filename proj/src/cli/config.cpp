#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "srw/cli.hpp"

namespace srw::cli {
namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "dist",  "p",      "q",      "grid",  "checkpoints", "n",       "horizon",
      "paths", "seed",   "workers", "out",  "format",      "alpha",   "config",
      "variance-limit", "classical"};
  return keys;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string normalize_key(std::string key) {
  key.erase(0, key.find_first_not_of('-'));
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x))
    throw UsageError("--" + key + ": not a number: '" + v + "'");
  return x;
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  // accept integral values written in scientific notation, e.g. 1e5
  if (v.find_first_of("eE.") != std::string::npos) {
    const double d = to_double(key, v);
    if (!(d >= 0.0 && d < 1.8e19) || std::floor(d) != d)
      throw UsageError("--" + key + ": not a non-negative integer: '" + v + "'");
    return static_cast<std::uint64_t>(d);
  }
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw UsageError("--" + key + ": not a non-negative integer: '" + v + "'");
  return x;
}

template <class T, class F>
std::vector<T> to_list(const std::string& key, const std::string& v, F convert) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw UsageError("--" + key + ": empty list entry");
    out.push_back(convert(key, item));
  }
  if (out.empty()) throw UsageError("--" + key + ": empty list");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v.empty()) return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError("--" + key + ": expected true or false, got '" + v + "'");
}

}  // namespace

Settings parse_config(std::istream& in) {
  Settings out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = normalize_key(trim(std::string_view(body).substr(0, eq)));
    if (key.empty()) throw UsageError("config line " + std::to_string(lineno) + ": empty key");
    if (!known_keys().count(key))
      throw UsageError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    out[key] = trim(std::string_view(body).substr(eq + 1));
  }
  return out;
}

RunConfig make_run_config(const std::string& command, const Settings& settings) {
  RunConfig c;
  c.command = command;
  for (const auto& [raw_key, v] : settings) {
    const std::string key = normalize_key(raw_key);
    if (!known_keys().count(key)) throw UsageError("unknown setting '" + key + "'");
    if (key == "dist") c.dist = v;
    else if (key == "p") c.p = to_double(key, v);
    else if (key == "q") c.q = to_double(key, v);
    else if (key == "grid") c.grid = to_list<double>(key, v, to_double);
    else if (key == "checkpoints" || key == "n") c.checkpoints = to_list<std::uint64_t>(key, v, to_count);
    else if (key == "horizon") c.horizon = to_count(key, v);
    else if (key == "paths") c.paths = to_count(key, v);
    else if (key == "seed") c.seed = to_count(key, v);
    else if (key == "workers") {
      const auto w = to_count(key, v);
      if (w > 4096) throw UsageError("--workers: at most 4096");
      c.workers = static_cast<unsigned>(w);
    } else if (key == "out") c.out = v;
    else if (key == "format") c.format = v;
    else if (key == "alpha") c.alpha = to_double(key, v);
    else if (key == "variance-limit") c.variance_limit = to_bool(key, v);
    else if (key == "classical") c.classical = to_bool(key, v);
  }
  if (settings.count("checkpoints") && settings.count("n"))
    throw UsageError("give either --checkpoints or --n, not both");
  if (c.format.empty()) c.format = (command == "simulate" || command == "enumerate") ? "csv" : "json";
  if (c.format != "csv" && c.format != "json")
    throw UsageError("--format must be csv or json");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  return c;
}

nlohmann::json RunConfig::echo() const {
  nlohmann::json j;
  j["command"] = command;
  j["dist"] = dist;
  j["p"] = p ? nlohmann::json(*p) : nlohmann::json(nullptr);
  j["q"] = q ? nlohmann::json(*q) : nlohmann::json(nullptr);
  j["grid"] = grid;
  j["checkpoints"] = checkpoints;
  j["horizon"] = horizon ? nlohmann::json(*horizon) : nlohmann::json(nullptr);
  j["paths"] = paths ? nlohmann::json(*paths) : nlohmann::json(nullptr);
  j["seed"] = seed;
  j["format"] = format;
  j["alpha"] = alpha;
  j["variance_limit"] = variance_limit;
  j["classical"] = classical;
  return j;
}

nlohmann::json strip_timing(nlohmann::json report) {
  if (report.is_object()) {
    report.erase("timing");
    for (auto& v : report) v = strip_timing(v);
  } else if (report.is_array()) {
    for (auto& v : report) v = strip_timing(v);
  }
  return report;
}

}  // namespace srw::cli
