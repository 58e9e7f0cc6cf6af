#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "trapscope/cli.hpp"
#include "trapscope/error.hpp"

namespace trapscope {

namespace {

[[noreturn]] void fail(int line, const std::string& message) {
  if (line > 0) throw Error(ErrorKind::ParseError, "config line " + std::to_string(line) + ": " + message);
  throw Error(ErrorKind::ParseError, "config: " + message);
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

double parse_plain_real(const std::string& token, int line) {
  if (token.empty()) fail(line, "missing number");
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || errno == ERANGE || !std::isfinite(x)) {
    fail(line, "not a finite real: '" + token + "'");
  }
  return x;
}

double parse_real(const std::string& raw, int line) {
  std::string token = trim(raw);
  if (token.size() >= 2 && token.compare(token.size() - 2, 2, "pi") == 0) {
    std::string factor = trim(token.substr(0, token.size() - 2));
    if (!factor.empty() && factor.back() == '*') factor = trim(factor.substr(0, factor.size() - 1));
    if (factor.empty() || factor == "+") return std::numbers::pi;
    if (factor == "-") return -std::numbers::pi;
    return parse_plain_real(factor, line) * std::numbers::pi;
  }
  return parse_plain_real(token, line);
}

long long parse_integer(const std::string& raw, int line) {
  const std::string token = trim(raw);
  if (token.empty()) fail(line, "missing integer");
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(token.c_str(), &end, 10);
  if (end != token.c_str() + token.size() || errno == ERANGE) fail(line, "not an integer: '" + token + "'");
  return x;
}

std::vector<double> parse_list(const std::string& raw, int line) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(raw);
  while (std::getline(in, item, ',')) out.push_back(parse_real(item, line));
  if (!raw.empty() && raw.back() == ',') fail(line, "trailing comma");
  if (out.empty()) fail(line, "empty list");
  return out;
}

int to_int(long long x, int line, const char* key) {
  if (x < -2147483647LL || x > 2147483647LL) fail(line, std::string(key) + " out of range");
  return static_cast<int>(x);
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  static const std::set<std::string> kKeys = {"N", "a", "b", "v", "T", "lambda", "M", "substeps", "directions",
                                              "seed", "witness_budget", "witness_horizons", "out"};
  std::map<std::string, std::pair<std::string, int>> entries;

  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail(lineno, "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (!kKeys.contains(key)) fail(lineno, "unknown key '" + key + "'");
    if (value.empty()) fail(lineno, "empty value for '" + key + "'");
    if (!entries.emplace(key, std::make_pair(value, lineno)).second) fail(lineno, "duplicate key '" + key + "'");
  }

  for (const char* required : {"N", "a", "b", "v", "T", "lambda"}) {
    if (!entries.contains(required)) fail(0, std::string("missing required key '") + required + "'");
  }

  RunConfig cfg;
  auto get = [&](const char* key) -> const std::pair<std::string, int>& { return entries.at(key); };
  {
    const auto& [v, l] = get("N");
    cfg.levels = to_int(parse_integer(v, l), l, "N");
  }
  cfg.a = parse_real(get("a").first, get("a").second);
  cfg.b = parse_real(get("b").first, get("b").second);
  cfg.couplings = parse_list(get("v").first, get("v").second);
  cfg.horizon = parse_real(get("T").first, get("T").second);
  cfg.lambda = parse_list(get("lambda").first, get("lambda").second);

  if (entries.contains("M")) {
    const auto& [v, l] = get("M");
    cfg.segments = to_int(parse_integer(v, l), l, "M");
    if (cfg.segments < 8) fail(l, "M must be at least 8");
  }
  if (entries.contains("substeps")) {
    const auto& [v, l] = get("substeps");
    cfg.substeps = to_int(parse_integer(v, l), l, "substeps");
    if (cfg.substeps < 0) fail(l, "substeps must be non-negative (0 = automatic)");
  }
  if (entries.contains("directions")) {
    const auto& [v, l] = get("directions");
    cfg.directions = to_int(parse_integer(v, l), l, "directions");
    if (cfg.directions < 2) fail(l, "directions must be at least 2");
  }
  if (entries.contains("seed")) {
    const auto& [v, l] = get("seed");
    const long long s = parse_integer(v, l);
    if (s < 0) fail(l, "seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (entries.contains("witness_budget")) {
    const auto& [v, l] = get("witness_budget");
    cfg.witness_budget = to_int(parse_integer(v, l), l, "witness_budget");
    if (cfg.witness_budget < 1) fail(l, "witness_budget must be at least 1");
  }
  if (entries.contains("witness_horizons")) {
    const auto& [v, l] = get("witness_horizons");
    cfg.witness_horizons = parse_list(v, l);
    for (double h : cfg.witness_horizons) {
      if (!(h > 0.0)) fail(l, "witness horizons must be positive");
    }
  }
  if (entries.contains("out")) cfg.out = get("out").first;
  if (!(cfg.horizon > 0.0)) fail(get("T").second, "T must be positive");
  return cfg;
}

RunConfig read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

ProblemInstance RunConfig::instance(bool theorem_mode) const {
  auto sys = build_system(levels, a, b, couplings, horizon);
  auto obs = build_observable(lambda, theorem_mode);
  return make_instance(std::move(sys), std::move(obs));
}

CertificateConfig RunConfig::certificate_config(int threads) const {
  CertificateConfig c;
  c.segments = segments;
  c.substeps = substeps;
  c.directions = directions;
  c.seed = seed;
  c.witness_budget = witness_budget;
  c.witness_horizons = witness_horizons;
  c.threads = threads;
  c.tolerances = tolerances;
  return c;
}

int threads_from_environment() {
  const char* raw = std::getenv("TRAPSCOPE_THREADS");
  if (raw == nullptr) return 0;
  const std::string s(raw);
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || s.size() > 6) {
    throw Error(ErrorKind::ParseError, "TRAPSCOPE_THREADS must be a positive integer, got '" + s + "'");
  }
  const int n = std::stoi(s);
  if (n < 1) throw Error(ErrorKind::ParseError, "TRAPSCOPE_THREADS must be a positive integer");
  return n;
}

}  // namespace trapscope
