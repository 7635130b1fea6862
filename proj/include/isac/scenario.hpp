#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "isac/numerics.hpp"

namespace isac {

using Vec3 = Eigen::Vector3d;

/// Flat key=value configuration. Lines starting with '#' and blank lines are ignored.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  Vec3 get_vec3(const std::string& key, const Vec3& fallback) const;
  std::vector<double> get_list(const std::string& key) const;
  std::vector<std::string> get_words(const std::string& key) const;

  /// Throws kConfig naming the first key not in `known`.
  void check_known(const std::vector<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
};

double db_to_linear(double db);
double dbm_to_watt(double dbm);

enum class PowerBudget { kSquared, kLiteral };

/// Physical constants, geometry and thresholds for one experiment point.
struct Scenario {
  int M = 6;
  int N1 = 8;
  int N2 = 8;
  int K = 3;
  double lambda = 0.01;
  Vec3 bs_pos{0.0, 0.0, 3.0};
  Vec3 ris_pos{0.0, 20.0, 3.0};
  Vec3 target_pos{5.0, 20.0, 3.0};
  Vec3 user_center{5.0, 20.0, 0.0};
  double user_radius = 4.0;
  double region_width = 0.04;  // A, side of the square receive region
  int Lp = 6;
  int L0 = 1;
  double g0 = 1e-4;
  double alpha = 2.8;
  double noise = 1e-12;  // sigma^2 in W, shared by users, radar receiver and eavesdropper
  double sigma_t = 1.0;  // RCS standard deviation
  int L = 1024;
  double power = 1.5848931924611136;  // P_B in W
  PowerBudget budget = PowerBudget::kSquared;
  double Gamma = 10.0;
  double Gamma_e = 1.0;
  double Gamma_r = 1.0;
  std::uint64_t seed = 1;

  int N() const { return N1 * N2; }
  int columns() const { return K + M; }
  /// Bound on ||W||_F^2 after applying the budget interpretation.
  double power_bound() const { return budget == PowerBudget::kSquared ? power : power * power; }
  Region region() const { return Region{-region_width / 2, region_width / 2, -region_width / 2, region_width / 2}; }

  void validate() const;
  static Scenario from_config(const Config& cfg);
  static const std::vector<std::string>& config_keys();
};

}  // namespace isac
