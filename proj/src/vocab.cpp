#include "pdnmt/vocab.hpp"

#include <fstream>

#include "pdnmt/error.hpp"

namespace pdnmt {

Vocabulary::Vocabulary() {
  tokens_ = {pad_token(), bos_token(), eos_token(), unk_token(), dp_marker_token()};
  for (int i = 0; i < static_cast<int>(tokens_.size()); ++i) ids_.emplace(tokens_[static_cast<size_t>(i)], i);
}

int Vocabulary::add(const std::string& token) {
  if (token.empty()) throw RuntimeError("vocabulary: empty token");
  if (ids_.count(token)) throw RuntimeError("vocabulary: duplicate token '" + token + "'");
  const int id = size();
  tokens_.push_back(token);
  ids_.emplace(token, id);
  return id;
}

int Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) throw RuntimeError(strfmt("vocabulary: id %d out of range [0, %d)", id, size()));
  return tokens_[static_cast<size_t>(id)];
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

std::vector<std::string> Vocabulary::decode(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw RuntimeError("cannot write vocabulary file " + path);
  for (const auto& t : tokens_) f << t << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw RuntimeError("cannot read vocabulary file " + path);
  Vocabulary v;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (lineno <= 5) {
      if (line != v.tokens_[static_cast<size_t>(lineno - 1)])
        throw RuntimeError(strfmt("%s:%d: expected reserved token '%s', got '%s'", path.c_str(), lineno,
                                  v.tokens_[static_cast<size_t>(lineno - 1)].c_str(), line.c_str()));
      continue;
    }
    if (line.empty()) throw RuntimeError(strfmt("%s:%d: empty token line", path.c_str(), lineno));
    v.add(line);
  }
  if (lineno < 5) throw RuntimeError("vocabulary file " + path + " is missing reserved tokens");
  return v;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& sentences) {
  Vocabulary v;
  for (const auto& sent : sentences)
    for (const auto& tok : sent)
      if (!v.contains(tok)) v.add(tok);
  return v;
}

}  // namespace pdnmt
