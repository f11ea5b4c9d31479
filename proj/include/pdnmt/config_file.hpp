// Line-oriented "key = value" configuration with '#' comments. Flags
// override file values; any key that no command consumed is rejected, so
// typos never pass silently.
#pragma once

#include <map>
#include <set>
#include <string>

#include "pdnmt/model_config.hpp"
#include "pdnmt/synth.hpp"
#include "pdnmt/training.hpp"

namespace pdnmt {

class ConfigMap {
 public:
  static ConfigMap parse_file(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback);
  int get_int(const std::string& key, int fallback);
  double get_double(const std::string& key, double fallback);
  uint64_t get_u64(const std::string& key, uint64_t fallback);
  bool get_bool(const std::string& key, bool fallback);

  // Throws for any key that was never read.
  void reject_unknown() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
};

// Sub-configuration readers shared by the commands.
ModelConfig model_from_config(ConfigMap& cfg);
TrainingConfig training_from_config(ConfigMap& cfg);
GeneratorConfig generator_from_config(ConfigMap& cfg);

}  // namespace pdnmt
