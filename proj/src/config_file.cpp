#include "pdnmt/config_file.hpp"

#include <fstream>

#include "pdnmt/error.hpp"

namespace pdnmt {

namespace {
std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}
}  // namespace

ConfigMap ConfigMap::parse_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file " + path);
  ConfigMap cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(strfmt("%s:%d: expected 'key = value'", path.c_str(), lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(strfmt("%s:%d: empty key", path.c_str(), lineno));
    if (cfg.values_.count(key))
      throw ConfigError(strfmt("%s:%d: duplicate key '%s'", path.c_str(), lineno, key.c_str()));
    cfg.values_.emplace(key, value);
  }
  return cfg;
}

void ConfigMap::set(const std::string& key, const std::string& value) { values_[key] = value; }

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) {
  consumed_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

int ConfigMap::get_int(const std::string& key, int fallback) {
  consumed_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t used = 0;
    const int v = std::stoi(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(strfmt("config key '%s': expected an integer, got '%s'", key.c_str(),
                             it->second.c_str()));
  }
}

double ConfigMap::get_double(const std::string& key, double fallback) {
  consumed_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(strfmt("config key '%s': expected a number, got '%s'", key.c_str(),
                             it->second.c_str()));
  }
}

uint64_t ConfigMap::get_u64(const std::string& key, uint64_t fallback) {
  consumed_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t used = 0;
    const unsigned long long v = std::stoull(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing junk");
    return static_cast<uint64_t>(v);
  } catch (const std::exception&) {
    throw ConfigError(strfmt("config key '%s': expected an unsigned integer, got '%s'", key.c_str(),
                             it->second.c_str()));
  }
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) {
  consumed_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ConfigError(strfmt("config key '%s': expected true/false, got '%s'", key.c_str(),
                           it->second.c_str()));
}

void ConfigMap::reject_unknown() const {
  for (const auto& [key, value] : values_)
    if (!consumed_.count(key)) throw ConfigError("unknown config key '" + key + "'");
}

ModelConfig model_from_config(ConfigMap& cfg) {
  ModelConfig m;
  m.src_vocab_size = cfg.get_int("model.src_vocab_size", m.src_vocab_size);
  m.tgt_vocab_size = cfg.get_int("model.tgt_vocab_size", m.tgt_vocab_size);
  m.embed_size = cfg.get_int("model.embed_size", m.embed_size);
  m.hidden_size = cfg.get_int("model.hidden_size", m.hidden_size);
  m.mode = reconstructor_mode_from_string(cfg.get_string("model.reconstructor", to_string(m.mode)));
  m.variant = attention_variant_from_string(cfg.get_string("model.attention", to_string(m.variant)));
  m.joint_prediction = cfg.get_bool("model.joint_prediction", m.joint_prediction);
  m.pronoun_vocab_size = cfg.get_int("model.pronoun_vocab_size", m.pronoun_vocab_size);
  return m;
}

TrainingConfig training_from_config(ConfigMap& cfg) {
  TrainingConfig t;
  t.adam.learning_rate = cfg.get_double("train.learning_rate", t.adam.learning_rate);
  t.adam.beta1 = cfg.get_double("train.beta1", t.adam.beta1);
  t.adam.beta2 = cfg.get_double("train.beta2", t.adam.beta2);
  t.adam.epsilon = cfg.get_double("train.epsilon", t.adam.epsilon);
  t.adam.clip_norm = cfg.get_double("train.clip_norm", t.adam.clip_norm);
  t.batch_size = cfg.get_int("train.batch_size", t.batch_size);
  t.max_epochs = cfg.get_int("train.max_epochs", t.max_epochs);
  t.max_steps = cfg.get_int("train.max_steps", t.max_steps);
  t.checkpoint_every = cfg.get_int("train.checkpoint_every", t.checkpoint_every);
  t.eval_every = cfg.get_int("train.eval_every", t.eval_every);
  t.patience = cfg.get_int("train.patience", t.patience);
  return t;
}

GeneratorConfig generator_from_config(ConfigMap& cfg) {
  GeneratorConfig g;
  g.train_size = cfg.get_int("gen.train_size", g.train_size);
  g.dev_size = cfg.get_int("gen.dev_size", g.dev_size);
  g.test_size = cfg.get_int("gen.test_size", g.test_size);
  g.p_drop = cfg.get_double("gen.p_drop", g.p_drop);
  g.p_pronoun_subject = cfg.get_double("gen.p_pronoun_subject", g.p_pronoun_subject);
  g.p_pronoun_object = cfg.get_double("gen.p_pronoun_object", g.p_pronoun_object);
  g.p_time = cfg.get_double("gen.p_time", g.p_time);
  g.p_adverb = cfg.get_double("gen.p_adverb", g.p_adverb);
  g.pronoun_count = cfg.get_int("gen.pronoun_count", g.pronoun_count);
  g.noun_count = cfg.get_int("gen.noun_count", g.noun_count);
  g.verb_count = cfg.get_int("gen.verb_count", g.verb_count);
  g.min_len = cfg.get_int("gen.min_len", g.min_len);
  g.max_len = cfg.get_int("gen.max_len", g.max_len);
  return g;
}

}  // namespace pdnmt
