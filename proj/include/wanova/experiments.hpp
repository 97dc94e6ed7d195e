#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wanova/errors.hpp"

namespace wanova::experiments {

/// Plain key=value configuration ('#' comments); flags override file values.
class Config {
 public:
  static Config from_file(const std::string& path);
  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::vector<std::string> keys() const;

 private:
  std::map<std::string, std::string> kv_;
};

struct RunResult {
  std::string csv;
  bool ok = true;  // false on a property failure (CLI exit code 1)
};

struct RateReport {
  std::vector<std::pair<std::uint64_t, double>> rms_by_n;
  double slope = 0.0;
  double slope_stderr = 0.0;
};

// One function per subcommand; each returns the full CSV text (header
// comments naming every parameter, then an RFC-4180-style table).
RunResult run_conditions(const Config& cfg);
RunResult run_constant(const Config& cfg);
RunResult run_kernel_check(const Config& cfg);
RunResult run_norm_equiv(const Config& cfg);
RunResult run_anova(const Config& cfg);
RunResult run_converge(const Config& cfg, RateReport* report = nullptr);
RunResult run_price(const Config& cfg);

/// Deterministic double formatting used in all CSV output.
std::string csv_double(double v);

}  // namespace wanova::experiments
