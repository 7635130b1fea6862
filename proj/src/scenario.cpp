#include "isac/scenario.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace isac {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    fail(ErrorCode::kConfig, "config key '" + key + "': not a number: '" + text + "'");
  }
  return v;
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::kConfig, "config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) fail(ErrorCode::kConfig, "config line " + std::to_string(lineno) + ": empty key");
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_double(key, it->second);
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const double v = parse_double(key, it->second);
  if (v != std::floor(v) || std::abs(v) > 1e9) fail(ErrorCode::kConfig, "config key '" + key + "': not an integer");
  return static_cast<int>(v);
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const char* begin = it->second.c_str();
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(begin, &end, 10);
  if (end == begin || *end != '\0' || errno == ERANGE || it->second[0] == '-') {
    fail(ErrorCode::kConfig, "config key '" + key + "': not an unsigned integer");
  }
  return v;
}

Vec3 Config::get_vec3(const std::string& key, const Vec3& fallback) const {
  if (!has(key)) return fallback;
  const auto v = get_list(key);
  if (v.size() != 3) fail(ErrorCode::kConfig, "config key '" + key + "': expected three comma-separated values");
  return Vec3(v[0], v[1], v[2]);
}

std::vector<double> Config::get_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : get_words(key)) out.push_back(parse_double(key, item));
  return out;
}

std::vector<std::string> Config::get_words(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return {};
  return split(it->second, ',');
}

void Config::check_known(const std::vector<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    bool found = false;
    for (const auto& k : known) found = found || k == key;
    if (!found) fail(ErrorCode::kConfig, "unknown config key '" + key + "'");
  }
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

void Scenario::validate() const {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::kConfig, "invalid scenario: " + what);
  };
  check(M >= 1 && N1 >= 1 && N2 >= 1 && K >= 1, "M, N1, N2, K must be >= 1");
  check(Lp >= 1 && L0 >= 1 && L >= 1, "Lp, L0, L must be >= 1");
  check(lambda > 0 && region_width > 0 && user_radius >= 0, "lambda and A must be positive");
  check(g0 > 0 && alpha > 0 && noise > 0 && sigma_t > 0 && power > 0, "gains, powers and variances must be positive");
  check(Gamma > 0 && Gamma_e > 0 && Gamma_r > 0, "thresholds must be positive");
  check((ris_pos - bs_pos).norm() > 0 && (target_pos - ris_pos).norm() > 0, "nodes must not coincide with the RIS");
}

const std::vector<std::string>& Scenario::config_keys() {
  static const std::vector<std::string> keys = {
      "M",          "N1",         "N2",        "K",          "lambda_m",      "PB_dBm",       "power_budget",
      "Gamma_dB",   "Gamma_e_dB", "Gamma_r_dB", "sigma_dBm", "sigma_t",       "L",            "Lp",
      "L0",         "A_over_lambda", "g0_dB",  "alpha",      "bs_pos",        "ris_pos",      "target_pos",
      "user_center", "user_radius", "seed"};
  return keys;
}

Scenario Scenario::from_config(const Config& cfg) {
  Scenario s;
  s.M = cfg.get_int("M", s.M);
  s.N1 = cfg.get_int("N1", s.N1);
  s.N2 = cfg.get_int("N2", s.N2);
  s.K = cfg.get_int("K", s.K);
  s.lambda = cfg.get_double("lambda_m", s.lambda);
  s.power = dbm_to_watt(cfg.get_double("PB_dBm", 32.0));
  const std::string budget = cfg.get_string("power_budget", "squared");
  if (budget == "squared") {
    s.budget = PowerBudget::kSquared;
  } else if (budget == "literal") {
    s.budget = PowerBudget::kLiteral;
  } else {
    fail(ErrorCode::kConfig, "config key 'power_budget': expected 'squared' or 'literal'");
  }
  s.Gamma = db_to_linear(cfg.get_double("Gamma_dB", 10.0));
  s.Gamma_e = db_to_linear(cfg.get_double("Gamma_e_dB", 0.0));
  s.Gamma_r = db_to_linear(cfg.get_double("Gamma_r_dB", 0.0));
  s.noise = dbm_to_watt(cfg.get_double("sigma_dBm", -90.0));
  s.sigma_t = cfg.get_double("sigma_t", s.sigma_t);
  s.L = cfg.get_int("L", s.L);
  s.Lp = cfg.get_int("Lp", s.Lp);
  s.L0 = cfg.get_int("L0", s.L0);
  s.region_width = cfg.get_double("A_over_lambda", 4.0) * s.lambda;
  s.g0 = db_to_linear(cfg.get_double("g0_dB", -40.0));
  s.alpha = cfg.get_double("alpha", s.alpha);
  s.bs_pos = cfg.get_vec3("bs_pos", s.bs_pos);
  s.ris_pos = cfg.get_vec3("ris_pos", s.ris_pos);
  s.target_pos = cfg.get_vec3("target_pos", s.target_pos);
  s.user_center = cfg.get_vec3("user_center", s.user_center);
  s.user_radius = cfg.get_double("user_radius", s.user_radius);
  s.seed = cfg.get_u64("seed", s.seed);
  s.validate();
  return s;
}

}  // namespace isac
