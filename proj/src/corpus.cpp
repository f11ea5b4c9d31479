#include "pdnmt/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pdnmt/error.hpp"
#include "pdnmt/vocab.hpp"

namespace pdnmt {

namespace {
std::string lowercase(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}
}  // namespace

bool AnnotatedSentence::has_words() const {
  return std::all_of(dp_entries.begin(), dp_entries.end(),
                     [](const DpEntry& e) { return !e.word.empty(); });
}

std::vector<std::string> AnnotatedSentence::tokens_with_words() const {
  if (!has_words()) throw RuntimeError("annotated sentence has markers without gold words");
  std::vector<std::string> out = tokens;
  for (const auto& e : dp_entries) out[static_cast<size_t>(e.position)] = e.word;
  return out;
}

std::vector<int> AnnotatedSentence::plain_slots() const {
  std::vector<int> slots;
  slots.reserve(dp_entries.size());
  for (size_t i = 0; i < dp_entries.size(); ++i)
    slots.push_back(dp_entries[i].position - static_cast<int>(i));
  return slots;
}

void AnnotatedSentence::validate() const {
  int prev = -1;
  for (const auto& e : dp_entries) {
    if (e.position <= prev) throw RuntimeError("annotated sentence: marker positions not strictly increasing");
    if (e.position < 0 || e.position >= static_cast<int>(tokens.size()))
      throw RuntimeError(strfmt("annotated sentence: marker position %d out of range", e.position));
    if (tokens[static_cast<size_t>(e.position)] != Vocabulary::dp_marker_token())
      throw RuntimeError(strfmt("annotated sentence: position %d does not hold a %s token", e.position,
                                Vocabulary::dp_marker_token()));
    prev = e.position;
  }
  const int markers = static_cast<int>(
      std::count(tokens.begin(), tokens.end(), Vocabulary::dp_marker_token()));
  if (markers != marker_count())
    throw RuntimeError(strfmt("annotated sentence: %d marker tokens but %d entries", markers, marker_count()));
}

bool PronounLexicon::is_pronoun(const std::string& target_token) const {
  const std::string t = lowercase(target_token);
  return map.count(t) > 0 || unmapped.count(t) > 0;
}

void PronounLexicon::validate() const {
  if (map.empty() && unmapped.empty()) throw RuntimeError("pronoun lexicon is empty");
  for (const auto& [k, v] : map) {
    if (k != lowercase(k)) throw RuntimeError("pronoun lexicon key not lowercase: " + k);
    if (v.empty()) throw RuntimeError("pronoun lexicon has empty mapping for: " + k);
  }
}

void PronounLexicon::save(const std::string& path) const {
  std::vector<std::string> keys;
  for (const auto& [k, v] : map) keys.push_back(k);
  for (const auto& k : unmapped) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  std::string out;
  for (const auto& k : keys) {
    auto it = map.find(k);
    out += k;
    out += '\t';
    out += it == map.end() ? "-" : it->second;
    out += '\n';
  }
  write_file_atomic(path, out);
}

PronounLexicon PronounLexicon::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw RuntimeError("cannot read pronoun lexicon " + path);
  PronounLexicon lex;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tgt, src;
    if (!(ss >> tgt >> src))
      throw RuntimeError(strfmt("%s:%d: expected 'target source' pair", path.c_str(), lineno));
    tgt = lowercase(tgt);
    if (src == "-")
      lex.unmapped.insert(tgt);
    else
      lex.map.emplace(tgt, src);
  }
  lex.validate();
  return lex;
}

AnnotatedSentence annotate_from_alignment(const ParallelExample& example, const PronounLexicon& lexicon) {
  if (example.target.empty()) throw RuntimeError("annotate: example has no target tokens");
  if (!example.alignment.has_value()) throw RuntimeError("annotate: example has no alignment");
  lexicon.validate();

  const auto& align = *example.alignment;
  const int src_len = static_cast<int>(example.source.size());
  const int tgt_len = static_cast<int>(example.target.size());

  std::vector<char> tgt_aligned(static_cast<size_t>(tgt_len), 0);
  // rightmost source index aligned to each target index
  std::vector<int> max_src(static_cast<size_t>(tgt_len), -1);
  for (const auto& [i, j] : align) {
    if (i < 0 || i >= src_len || j < 0 || j >= tgt_len)
      throw RuntimeError(strfmt("annotate: alignment pair %d-%d out of range", i, j));
    tgt_aligned[static_cast<size_t>(j)] = 1;
    max_src[static_cast<size_t>(j)] = std::max(max_src[static_cast<size_t>(j)], i);
  }

  struct Pending {
    int slot;
    std::string word;
  };
  std::vector<Pending> pending;
  for (int j = 0; j < tgt_len; ++j) {
    if (tgt_aligned[static_cast<size_t>(j)]) continue;
    const std::string tok = lowercase(example.target[static_cast<size_t>(j)]);
    if (!lexicon.is_pronoun(tok)) continue;
    int slot = 0;
    for (int jj = j - 1; jj >= 0; --jj) {
      if (tgt_aligned[static_cast<size_t>(jj)]) {
        slot = max_src[static_cast<size_t>(jj)] + 1;
        break;
      }
    }
    auto it = lexicon.map.find(tok);
    pending.push_back({slot, it == lexicon.map.end() ? Vocabulary::unk_token() : it->second});
  }
  std::stable_sort(pending.begin(), pending.end(),
                   [](const Pending& a, const Pending& b) { return a.slot < b.slot; });

  AnnotatedSentence out;
  out.tokens = example.source;
  for (size_t m = 0; m < pending.size(); ++m) {
    const int pos = pending[m].slot + static_cast<int>(m);
    out.tokens.insert(out.tokens.begin() + pos, Vocabulary::dp_marker_token());
    out.dp_entries.push_back({pos, pending[m].word});
  }
  out.validate();
  return out;
}

std::pair<std::vector<std::string>, std::vector<DpEntry>> strip_annotation(const AnnotatedSentence& s) {
  s.validate();
  std::vector<std::string> plain;
  plain.reserve(s.tokens.size());
  std::vector<DpEntry> entries;
  size_t next_entry = 0;
  for (size_t i = 0; i < s.tokens.size(); ++i) {
    if (next_entry < s.dp_entries.size() &&
        static_cast<int>(i) == s.dp_entries[next_entry].position) {
      entries.push_back({static_cast<int>(plain.size()), s.dp_entries[next_entry].word});
      ++next_entry;
      continue;
    }
    plain.push_back(s.tokens[i]);
  }
  if (plain.empty()) throw RuntimeError("strip_annotation: sentence consists only of markers");
  return {std::move(plain), std::move(entries)};
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw RuntimeError("cannot write file " + tmp);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw RuntimeError("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw RuntimeError("cannot rename " + tmp + " to " + path);
}

std::vector<std::vector<std::string>> load_tokens(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw RuntimeError("cannot read " + path);
  std::vector<std::vector<std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    auto toks = split_tokens(line);
    if (toks.empty()) throw RuntimeError(strfmt("%s:%d: empty sentence", path.c_str(), lineno));
    if (static_cast<int>(toks.size()) > kMaxSentenceLen)
      throw RuntimeError(strfmt("%s:%d: sentence longer than %d tokens", path.c_str(), lineno, kMaxSentenceLen));
    out.push_back(std::move(toks));
  }
  return out;
}

void save_tokens(const std::string& path, const std::vector<std::vector<std::string>>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    out += join_tokens(s);
    out += '\n';
  }
  write_file_atomic(path, out);
}

Corpus load_corpus(const std::string& src_path, const std::string& tgt_path, const std::string& align_path) {
  auto src = load_tokens(src_path);
  auto tgt = load_tokens(tgt_path);
  if (src.size() != tgt.size())
    throw RuntimeError(strfmt("%s and %s differ in line count (%zu vs %zu)", src_path.c_str(),
                              tgt_path.c_str(), src.size(), tgt.size()));
  Corpus corpus(src.size());
  for (size_t i = 0; i < src.size(); ++i) {
    corpus[i].source = std::move(src[i]);
    corpus[i].target = std::move(tgt[i]);
  }
  if (align_path.empty()) return corpus;

  std::ifstream f(align_path, std::ios::binary);
  if (!f) throw RuntimeError("cannot read " + align_path);
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (lineno > static_cast<int>(corpus.size()))
      throw RuntimeError(strfmt("%s:%d: more alignment lines than sentences", align_path.c_str(), lineno));
    ParallelExample& ex = corpus[static_cast<size_t>(lineno - 1)];
    std::vector<std::pair<int, int>> pairs;
    for (const auto& tok : split_tokens(line)) {
      const size_t dash = tok.find('-');
      int i = -1, j = -1;
      bool ok = dash != std::string::npos && dash > 0 && dash + 1 < tok.size();
      if (ok) {
        try {
          size_t used = 0;
          i = std::stoi(tok.substr(0, dash), &used);
          ok = used == dash;
          size_t used2 = 0;
          j = std::stoi(tok.substr(dash + 1), &used2);
          ok = ok && used2 == tok.size() - dash - 1;
        } catch (const std::exception&) {
          ok = false;
        }
      }
      if (!ok)
        throw RuntimeError(strfmt("%s:%d: malformed alignment token '%s'", align_path.c_str(), lineno,
                                  tok.c_str()));
      if (i < 0 || i >= static_cast<int>(ex.source.size()) || j < 0 ||
          j >= static_cast<int>(ex.target.size()))
        throw RuntimeError(strfmt("%s:%d: alignment pair %d-%d out of range (source %zu, target %zu)",
                                  align_path.c_str(), lineno, i, j, ex.source.size(), ex.target.size()));
      pairs.emplace_back(i, j);
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    ex.alignment = std::move(pairs);
  }
  if (lineno != 0 && lineno != static_cast<int>(corpus.size()))
    throw RuntimeError(strfmt("%s: %d alignment lines for %zu sentences", align_path.c_str(), lineno,
                              corpus.size()));
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& src_path, const std::string& tgt_path,
                 const std::string& align_path) {
  std::string src, tgt, align;
  for (const auto& ex : corpus) {
    src += join_tokens(ex.source);
    src += '\n';
    tgt += join_tokens(ex.target);
    tgt += '\n';
    if (!align_path.empty()) {
      if (ex.alignment.has_value()) {
        std::string line;
        for (const auto& [i, j] : *ex.alignment) {
          if (!line.empty()) line += ' ';
          line += std::to_string(i) + "-" + std::to_string(j);
        }
        align += line;
      }
      align += '\n';
    }
  }
  write_file_atomic(src_path, src);
  write_file_atomic(tgt_path, tgt);
  if (!align_path.empty()) write_file_atomic(align_path, align);
}

std::vector<AnnotatedSentence> load_annotated(const std::string& tokens_path, const std::string& sidecar_path) {
  auto lines = load_tokens(tokens_path);
  std::vector<AnnotatedSentence> out(lines.size());
  for (size_t i = 0; i < lines.size(); ++i) out[i].tokens = std::move(lines[i]);

  std::ifstream f(sidecar_path, std::ios::binary);
  if (!f) throw RuntimeError("cannot read " + sidecar_path);
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    int idx = -1, pos = -1;
    std::string word;
    if (!(ss >> idx >> pos >> word))
      throw RuntimeError(strfmt("%s:%d: expected 'line_index marker_position gold_word'",
                                sidecar_path.c_str(), lineno));
    if (idx < 0 || idx >= static_cast<int>(out.size()))
      throw RuntimeError(strfmt("%s:%d: line_index %d out of range", sidecar_path.c_str(), lineno, idx));
    out[static_cast<size_t>(idx)].dp_entries.push_back({pos, word == "-" ? std::string() : word});
  }
  for (size_t i = 0; i < out.size(); ++i) {
    try {
      out[i].validate();
    } catch (const std::exception& e) {
      throw RuntimeError(strfmt("%s: sentence %zu: %s", tokens_path.c_str(), i, e.what()));
    }
  }
  return out;
}

void save_annotated(const std::vector<AnnotatedSentence>& sentences, const std::string& tokens_path,
                    const std::string& sidecar_path) {
  std::string toks, sidecar;
  for (size_t i = 0; i < sentences.size(); ++i) {
    sentences[i].validate();
    toks += join_tokens(sentences[i].tokens);
    toks += '\n';
    for (const auto& e : sentences[i].dp_entries) {
      sidecar += std::to_string(i);
      sidecar += '\t';
      sidecar += std::to_string(e.position);
      sidecar += '\t';
      sidecar += e.word.empty() ? "-" : e.word;
      sidecar += '\n';
    }
  }
  write_file_atomic(tokens_path, toks);
  write_file_atomic(sidecar_path, sidecar);
}

}  // namespace pdnmt
