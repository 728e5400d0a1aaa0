// stpipe/metrics.cc
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABILITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "stpipe/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "stpipe/textnorm.h"

#include <json.hpp>

namespace stpipe {

WerScore align_edits(const TokenSequence &hyp, const TokenSequence &ref) {
  const size_t m = ref.size(), n = hyp.size();
  // dp[i][j] = edits aligning ref[0..i) with hyp[0..j). The scratch matrix
  // is reused across calls; verification sweeps run this millions of times.
  static thread_local std::vector<uint32_t> dp;
  dp.resize((m + 1) * (n + 1));
  auto at = [&](size_t i, size_t j) -> uint32_t & { return dp[i * (n + 1) + j]; };
  for (size_t i = 0; i <= m; ++i) at(i, 0) = static_cast<uint32_t>(i);
  for (size_t j = 0; j <= n; ++j) at(0, j) = static_cast<uint32_t>(j);
  for (size_t i = 1; i <= m; ++i) {
    for (size_t j = 1; j <= n; ++j) {
      uint32_t diag = at(i - 1, j - 1) + (ref[i - 1] != hyp[j - 1] ? 1 : 0);
      uint32_t del = at(i - 1, j) + 1;
      uint32_t ins = at(i, j - 1) + 1;
      at(i, j) = std::min({diag, del, ins});
    }
  }

  WerScore out;
  out.ref_tokens = m;
  // Backtrace, preferring match/substitution, then deletion, then insertion.
  size_t i = m, j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      uint32_t diag_cost = ref[i - 1] != hyp[j - 1] ? 1 : 0;
      if (at(i, j) == at(i - 1, j - 1) + diag_cost) {
        out.substitutions += diag_cost;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++out.deletions;
      --i;
      continue;
    }
    ++out.insertions;
    --j;
  }
  out.wer = m == 0 ? static_cast<double>(out.edits())
                   : static_cast<double>(out.edits()) / m;
  return out;
}

WerScore corpus_wer(const std::vector<TokenSequence> &hyp,
                    const std::vector<TokenSequence> &ref) {
  if (hyp.size() != ref.size()) {
    throw AlignmentMismatchError(
        "hypothesis has " + std::to_string(hyp.size()) +
        " sentences, reference has " + std::to_string(ref.size()));
  }
  WerScore total;
  for (size_t s = 0; s < hyp.size(); ++s) {
    WerScore one = align_edits(hyp[s], ref[s]);
    total.substitutions += one.substitutions;
    total.deletions += one.deletions;
    total.insertions += one.insertions;
    total.ref_tokens += one.ref_tokens;
  }
  if (total.ref_tokens == 0) throw EmptyReferenceError();
  total.wer = static_cast<double>(total.edits()) / total.ref_tokens;
  return total;
}

namespace {

// N-grams keyed as tokens joined by an untypeable separator.
void count_ngrams(const TokenSequence &tokens, size_t n,
                  std::unordered_map<std::string, uint32_t> &counts) {
  counts.clear();
  if (tokens.size() < n) return;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (size_t j = 0; j < n; ++j) {
      if (j) key += '\x1f';
      key += tokens[i + j];
    }
    ++counts[key];
  }
}

}  // namespace

BleuScore corpus_bleu(const std::vector<TokenSequence> &hyp,
                      const std::vector<TokenSequence> &ref,
                      bool case_sensitive, bool smooth) {
  if (hyp.size() != ref.size()) {
    throw AlignmentMismatchError(
        "hypothesis has " + std::to_string(hyp.size()) +
        " sentences, reference has " + std::to_string(ref.size()));
  }
  BleuScore out;
  uint64_t matches[4] = {0, 0, 0, 0};
  uint64_t totals[4] = {0, 0, 0, 0};
  std::unordered_map<std::string, uint32_t> hyp_counts, ref_counts;
  for (size_t s = 0; s < hyp.size(); ++s) {
    TokenSequence h = case_sensitive ? hyp[s] : lowercase(hyp[s]);
    TokenSequence r = case_sensitive ? ref[s] : lowercase(ref[s]);
    out.hyp_tokens += h.size();
    out.ref_tokens += r.size();
    for (size_t n = 1; n <= 4; ++n) {
      if (h.size() >= n) totals[n - 1] += h.size() - n + 1;
      count_ngrams(h, n, hyp_counts);
      count_ngrams(r, n, ref_counts);
      for (const auto &[gram, count] : hyp_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) {
          matches[n - 1] += std::min(count, it->second);
        }
      }
    }
  }

  double log_sum = 0.0;
  for (size_t n = 0; n < 4; ++n) {
    uint64_t num = matches[n], den = totals[n];
    if (smooth && n >= 1) {
      num += 1;
      den += 1;
    }
    if (num == 0 || den == 0) {
      out.zero_precision = true;
      out.precisions[n] =
          den == 0 ? 0.0 : static_cast<double>(num) / den;
      continue;
    }
    out.precisions[n] = static_cast<double>(num) / den;
    log_sum += std::log(out.precisions[n]);
  }
  if (out.hyp_tokens > 0 && out.hyp_tokens < out.ref_tokens) {
    out.brevity_penalty =
        std::exp(1.0 - static_cast<double>(out.ref_tokens) / out.hyp_tokens);
  }
  if (out.zero_precision || out.hyp_tokens == 0) {
    out.score = 0.0;
  } else {
    out.score = 100.0 * out.brevity_penalty * std::exp(log_sum / 4.0);
  }
  return out;
}

EvalReport wer_report(const std::vector<TokenSequence> &hyp,
                      const std::vector<TokenSequence> &ref) {
  EvalReport report;
  report.n_sentences = hyp.size();
  report.wer = corpus_wer(hyp, ref);
  return report;
}

EvalReport bleu_report(const std::vector<TokenSequence> &hyp,
                       const std::vector<TokenSequence> &ref,
                       bool case_sensitive, bool smooth) {
  EvalReport report;
  report.n_sentences = hyp.size();
  if (case_sensitive) {
    report.bleu = corpus_bleu(hyp, ref, true, smooth);
  } else {
    report.bleu_lc = corpus_bleu(hyp, ref, false, smooth);
  }
  return report;
}

namespace {

double round2(double v) { return std::round(v * 100.0) / 100.0; }

void put_bleu(nlohmann::ordered_json &doc, const std::string &prefix,
              const BleuScore &b) {
  doc[prefix] = round2(b.score);
  for (size_t n = 0; n < 4; ++n) {
    doc[prefix + "_p" + std::to_string(n + 1)] = b.precisions[n];
  }
  doc[prefix + "_brevity_penalty"] = b.brevity_penalty;
  doc[prefix + "_hyp_tokens"] = b.hyp_tokens;
  doc[prefix + "_ref_tokens"] = b.ref_tokens;
  doc[prefix + "_zero_precision"] = b.zero_precision;
}

}  // namespace

std::string EvalReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["n_sentences"] = n_sentences;
  if (bleu) put_bleu(doc, "bleu", *bleu);
  if (bleu_lc) put_bleu(doc, "bleu_lc", *bleu_lc);
  if (wer) {
    doc["wer"] = wer->wer;
    doc["substitutions"] = wer->substitutions;
    doc["deletions"] = wer->deletions;
    doc["insertions"] = wer->insertions;
    doc["ref_tokens"] = wer->ref_tokens;
  }
  return doc.dump(2) + "\n";
}

std::string EvalReport::to_table() const {
  char buf[128];
  std::ostringstream out;
  auto row = [&](const char *name, const std::string &value) {
    std::snprintf(buf, sizeof(buf), "%-12s %10s\n", name, value.c_str());
    out << buf;
  };
  auto num = [&](double v, const char *fmt = "%.2f") {
    std::snprintf(buf, sizeof(buf), fmt, v);
    return std::string(buf);
  };
  row("sentences", std::to_string(n_sentences));
  if (bleu) row("BLEU", num(bleu->score));
  if (bleu_lc) row("BLEU-lc", num(bleu_lc->score));
  if (wer) {
    row("WER", num(wer->wer, "%.4f"));
    row("sub/del/ins", std::to_string(wer->substitutions) + "/" +
                           std::to_string(wer->deletions) + "/" +
                           std::to_string(wer->insertions));
  }
  return out.str();
}

}  // namespace stpipe
