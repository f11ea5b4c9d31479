#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace pdnmt {

// Token inventory with five reserved entries at fixed ids. Unknown tokens
// resolve to kUnk on lookup.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kDpMarker = 4;

  static const char* pad_token() { return "<pad>"; }
  static const char* bos_token() { return "<s>"; }
  static const char* eos_token() { return "</s>"; }
  static const char* unk_token() { return "<unk>"; }
  static const char* dp_marker_token() { return "#DP#"; }

  Vocabulary();

  // Appends a non-reserved token; duplicates and reserved spellings are
  // rejected.
  int add(const std::string& token);

  int id(const std::string& token) const;
  const std::string& token(int id) const;
  bool contains(const std::string& token) const { return ids_.count(token) > 0; }
  int size() const { return static_cast<int>(tokens_.size()); }

  std::vector<int> encode(const std::vector<std::string>& tokens) const;
  std::vector<std::string> decode(const std::vector<int>& ids) const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  // Collects tokens from token lists in first-seen order.
  static Vocabulary build(const std::vector<std::vector<std::string>>& sentences);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace pdnmt
