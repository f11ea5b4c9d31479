#include "pdnmt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "pdnmt/error.hpp"

namespace pdnmt {

namespace {

std::string fold_case(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

using NgramCounts = std::unordered_map<std::string, int>;

NgramCounts ngram_counts(const std::vector<std::string>& tokens, int n) {
  NgramCounts counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (size_t i = 0; i + static_cast<size_t>(n) <= tokens.size(); ++i) {
    std::string key;
    for (int k = 0; k < n; ++k) {
      if (k) key += '\x1f';
      key += tokens[i + static_cast<size_t>(k)];
    }
    ++counts[key];
  }
  return counts;
}

struct MatchTotals {
  int64_t matched[4] = {0, 0, 0, 0};
  int64_t total[4] = {0, 0, 0, 0};
};

void accumulate(const std::vector<std::string>& hyp, const std::vector<std::string>& ref,
                MatchTotals& mt) {
  for (int n = 1; n <= 4; ++n) {
    const NgramCounts hc = ngram_counts(hyp, n);
    const NgramCounts rc = ngram_counts(ref, n);
    int64_t matched = 0, total = 0;
    for (const auto& [key, count] : hc) {
      total += count;
      auto it = rc.find(key);
      if (it != rc.end()) matched += std::min(count, it->second);
    }
    mt.matched[n - 1] += matched;
    mt.total[n - 1] += total;
  }
}

std::vector<std::string> folded(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(fold_case(t));
  return out;
}

}  // namespace

BleuReport bleu(const std::vector<std::vector<std::string>>& hypotheses,
                const std::vector<std::vector<std::string>>& references) {
  if (hypotheses.size() != references.size())
    throw RuntimeError(strfmt("bleu: %zu hypotheses but %zu references", hypotheses.size(),
                              references.size()));
  BleuReport report;
  MatchTotals mt;
  for (size_t i = 0; i < hypotheses.size(); ++i) {
    const auto hyp = folded(hypotheses[i]);
    const auto ref = folded(references[i]);
    accumulate(hyp, ref, mt);
    report.hyp_length += static_cast<int64_t>(hyp.size());
    report.ref_length += static_cast<int64_t>(ref.size());
  }
  double log_sum = 0.0;
  for (int n = 0; n < 4; ++n) {
    report.precisions[n] =
        mt.total[n] > 0 ? static_cast<double>(mt.matched[n]) / static_cast<double>(mt.total[n]) : 0.0;
    if (report.precisions[n] <= 0.0) report.zero_precision = true;
    else log_sum += 0.25 * std::log(report.precisions[n]);
  }
  report.brevity_penalty =
      report.hyp_length < report.ref_length && report.hyp_length > 0
          ? std::exp(1.0 - static_cast<double>(report.ref_length) / static_cast<double>(report.hyp_length))
          : 1.0;
  report.bleu = report.zero_precision ? 0.0 : 100.0 * report.brevity_penalty * std::exp(log_sum);
  return report;
}

double sentence_bleu_smoothed(const std::vector<std::string>& hypothesis,
                              const std::vector<std::string>& reference) {
  const auto hyp = folded(hypothesis);
  const auto ref = folded(reference);
  MatchTotals mt;
  accumulate(hyp, ref, mt);
  double log_sum = 0.0;
  for (int n = 0; n < 4; ++n) {
    double p;
    if (n == 0) {
      p = mt.total[0] > 0 ? static_cast<double>(mt.matched[0]) / static_cast<double>(mt.total[0]) : 0.0;
      if (p <= 0.0) return 0.0;
    } else {
      // add-one smoothing on orders 2..4
      p = static_cast<double>(mt.matched[n] + 1) / static_cast<double>(mt.total[n] + 1);
    }
    log_sum += 0.25 * std::log(p);
  }
  const double bp = hyp.size() < ref.size() && !hyp.empty()
                        ? std::exp(1.0 - static_cast<double>(ref.size()) / static_cast<double>(hyp.size()))
                        : 1.0;
  return 100.0 * bp * std::exp(log_sum);
}

std::string BleuReport::tsv() const {
  return strfmt("bleu\tp1\tp2\tp3\tp4\tbp\thyp_len\tref_len\tzero_precision\n"
                "%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%lld\t%lld\t%d\n",
                bleu, precisions[0], precisions[1], precisions[2], precisions[3], brevity_penalty,
                static_cast<long long>(hyp_length), static_cast<long long>(ref_length),
                zero_precision ? 1 : 0);
}

std::string BleuReport::summary() const {
  std::string s = strfmt("BLEU = %.2f (p1=%.3f p2=%.3f p3=%.3f p4=%.3f, BP=%.4f, hyp/ref = %lld/%lld)",
                         bleu, precisions[0], precisions[1], precisions[2], precisions[3],
                         brevity_penalty, static_cast<long long>(hyp_length),
                         static_cast<long long>(ref_length));
  if (zero_precision) s += " [zero n-gram precision, score forced to 0]";
  return s;
}

F1Report dp_f1(const std::set<DpItem>& predicted, const std::set<DpItem>& gold, DpMatchMode mode) {
  auto project = [&](const std::set<DpItem>& items) {
    std::set<std::pair<int, int>> out;
    for (const auto& [sent, pos, word] : items) out.emplace(sent, pos);
    return out;
  };
  int64_t tp = 0, pred_count = 0, gold_count = 0;
  if (mode == DpMatchMode::Position) {
    const auto p = project(predicted);
    const auto g = project(gold);
    pred_count = static_cast<int64_t>(p.size());
    gold_count = static_cast<int64_t>(g.size());
    for (const auto& item : p) tp += g.count(item) ? 1 : 0;
  } else {
    pred_count = static_cast<int64_t>(predicted.size());
    gold_count = static_cast<int64_t>(gold.size());
    for (const auto& item : predicted) tp += gold.count(item) ? 1 : 0;
  }
  F1Report r;
  r.tp = tp;
  r.fp = pred_count - tp;
  r.fn = gold_count - tp;
  r.precision = pred_count > 0 ? static_cast<double>(tp) / static_cast<double>(pred_count) : 0.0;
  r.recall = gold_count > 0 ? static_cast<double>(tp) / static_cast<double>(gold_count) : 0.0;
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

std::string F1Report::tsv() const {
  return strfmt("tp\tfp\tfn\tprecision\trecall\tf1\n%lld\t%lld\t%lld\t%.6f\t%.6f\t%.6f\n",
                static_cast<long long>(tp), static_cast<long long>(fp), static_cast<long long>(fn),
                precision, recall, f1);
}

SignTestResult sign_test(const std::vector<double>& scores_a, const std::vector<double>& scores_b) {
  if (scores_a.size() != scores_b.size())
    throw RuntimeError("sign_test: score lists differ in length");
  if (scores_a.empty()) throw RuntimeError("sign_test: empty score lists");

  SignTestResult r;
  for (size_t i = 0; i < scores_a.size(); ++i) {
    if (scores_a[i] > scores_b[i]) ++r.wins_a;
    else if (scores_a[i] < scores_b[i]) ++r.wins_b;
    else ++r.ties;
  }
  const int m = r.wins_a + r.wins_b;
  if (m == 0) {
    r.all_tied = true;
    r.p_value = 1.0;
    return r;
  }
  const int k = std::max(r.wins_a, r.wins_b);
  // Exact binomial upper tail at q = 1/2: sum_{i=k..m} C(m,i) / 2^m.
  double pmf = std::pow(0.5, m);  // P(X = 0)
  double tail = 0.0;
  for (int i = 0; i <= m; ++i) {
    if (i >= k) tail += pmf;
    pmf *= static_cast<double>(m - i) / static_cast<double>(i + 1);
  }
  r.p_value = std::min(1.0, 2.0 * tail);
  return r;
}

}  // namespace pdnmt
