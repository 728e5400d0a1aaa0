// tests/oracles.cc

#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <unordered_map>

#include "stpipe/utf8.h"

namespace stpipe {
namespace oracles {

namespace {

void edit_search(const std::vector<int> &ref, const std::vector<int> &hyp,
                 size_t i, size_t j, uint32_t cost, uint32_t &best) {
  const size_t m = ref.size(), n = hyp.size();
  const uint32_t remaining_gap =
      static_cast<uint32_t>(std::abs(static_cast<long>(m - i) -
                                     static_cast<long>(n - j)));
  if (cost + remaining_gap >= best) return;
  if (i == m && j == n) {
    best = cost;
    return;
  }
  if (i < m && j < n) {
    edit_search(ref, hyp, i + 1, j + 1, cost + (ref[i] != hyp[j] ? 1 : 0),
                best);
  }
  if (i < m) edit_search(ref, hyp, i + 1, j, cost + 1, best);
  if (j < n) edit_search(ref, hyp, i, j + 1, cost + 1, best);
}

}  // namespace

uint32_t brute_force_edits(const std::vector<int> &ref,
                           const std::vector<int> &hyp) {
  uint32_t best = static_cast<uint32_t>(ref.size() + hyp.size());
  edit_search(ref, hyp, 0, 0, 0, best);
  return best;
}

uint32_t brute_force_edits(const TokenSequence &ref,
                           const TokenSequence &hyp) {
  std::unordered_map<std::string, int> ids;
  auto to_ids = [&](const TokenSequence &tokens) {
    std::vector<int> out;
    for (const std::string &tok : tokens) {
      auto [it, unused] = ids.emplace(tok, static_cast<int>(ids.size()));
      out.push_back(it->second);
    }
    return out;
  };
  std::vector<int> r = to_ids(ref), h = to_ids(hyp);
  return brute_force_edits(r, h);
}

uint32_t independent_edit_dp(const TokenSequence &ref,
                             const TokenSequence &hyp) {
  std::vector<uint32_t> prev(ref.size() + 1), cur(ref.size() + 1);
  for (size_t i = 0; i <= ref.size(); ++i) prev[i] = static_cast<uint32_t>(i);
  for (size_t j = 1; j <= hyp.size(); ++j) {
    cur[0] = static_cast<uint32_t>(j);
    for (size_t i = 1; i <= ref.size(); ++i) {
      uint32_t stay = prev[i - 1] + (hyp[j - 1] == ref[i - 1] ? 0 : 1);
      uint32_t skip_ref = cur[i - 1] + 1;
      uint32_t skip_hyp = prev[i] + 1;
      cur[i] = std::min(stay, std::min(skip_ref, skip_hyp));
    }
    prev.swap(cur);
  }
  return prev[ref.size()];
}

std::string number_words_0_9999(int n) {
  static const char *ones[] = {"",     "one", "two",   "three", "four",
                               "five", "six", "seven", "eight", "nine"};
  static const char *teens[] = {"ten",      "eleven",  "twelve",
                                "thirteen", "fourteen", "fifteen",
                                "sixteen",  "seventeen", "eighteen",
                                "nineteen"};
  static const char *tenties[] = {"",      "",      "twenty", "thirty",
                                  "forty", "fifty", "sixty",  "seventy",
                                  "eighty", "ninety"};
  if (n == 0) return "zero";
  std::string s;
  auto append = [&](const std::string &piece) {
    if (!s.empty()) s += ' ';
    s += piece;
  };
  if (n >= 1000) append(std::string(ones[n / 1000]) + " thousand");
  if (n % 1000 >= 100) append(std::string(ones[(n / 100) % 10]) + " hundred");
  int t = n % 100;
  if (t > 0) {
    if (n >= 100) append("and");
    if (t < 10) {
      append(ones[t]);
    } else if (t < 20) {
      append(teens[t - 10]);
    } else {
      append(tenties[t / 10]);
      if (t % 10) append(ones[t % 10]);
    }
  }
  return s;
}

std::optional<uint64_t> words_to_number(const TokenSequence &words) {
  static const std::map<std::string, uint64_t> small = {
      {"zero", 0},     {"one", 1},        {"two", 2},       {"three", 3},
      {"four", 4},     {"five", 5},       {"six", 6},       {"seven", 7},
      {"eight", 8},    {"nine", 9},       {"ten", 10},      {"eleven", 11},
      {"twelve", 12},  {"thirteen", 13},  {"fourteen", 14}, {"fifteen", 15},
      {"sixteen", 16}, {"seventeen", 17}, {"eighteen", 18}, {"nineteen", 19},
      {"twenty", 20},  {"thirty", 30},    {"forty", 40},    {"fifty", 50},
      {"sixty", 60},   {"seventy", 70},   {"eighty", 80},   {"ninety", 90}};
  if (words.empty()) return std::nullopt;
  uint64_t total = 0, group = 0;
  for (const std::string &w : words) {
    if (w == "and") continue;
    auto it = small.find(w);
    if (it != small.end()) {
      group += it->second;
    } else if (w == "hundred") {
      group *= 100;
    } else if (w == "thousand") {
      total += group * 1000;
      group = 0;
    } else if (w == "million") {
      total += group * 1000000;
      group = 0;
    } else {
      return std::nullopt;
    }
  }
  return total + group;
}

namespace {

using SymbolWord = std::vector<std::string>;

std::map<SymbolWord, int64_t> word_table(
    const std::vector<TokenSequence> &corpus) {
  std::map<std::string, int64_t> freq;
  for (const TokenSequence &sent : corpus) {
    for (const std::string &tok : sent) ++freq[tok];
  }
  std::map<SymbolWord, int64_t> words;
  for (const auto &[word, count] : freq) {
    SymbolWord syms;
    size_t pos = 0;
    while (pos < word.size()) {
      size_t start = pos;
      utf8::decode(word, pos);
      syms.push_back(word.substr(start, pos - start));
    }
    syms.push_back("</w>");
    words[syms] += count;
  }
  return words;
}

std::map<std::pair<std::string, std::string>, int64_t> recount_pairs(
    const std::map<SymbolWord, int64_t> &words) {
  std::map<std::pair<std::string, std::string>, int64_t> counts;
  for (const auto &[syms, freq] : words) {
    for (size_t i = 0; i + 1 < syms.size(); ++i) {
      counts[{syms[i], syms[i + 1]}] += freq;
    }
  }
  return counts;
}

std::map<SymbolWord, int64_t> apply_merge(
    const std::map<SymbolWord, int64_t> &words,
    const std::pair<std::string, std::string> &pair) {
  std::map<SymbolWord, int64_t> next;
  for (const auto &[syms, freq] : words) {
    SymbolWord merged;
    for (size_t i = 0; i < syms.size();) {
      if (i + 1 < syms.size() && syms[i] == pair.first &&
          syms[i + 1] == pair.second) {
        merged.push_back(syms[i] + syms[i + 1]);
        i += 2;
      } else {
        merged.push_back(syms[i]);
        i += 1;
      }
    }
    next[merged] += freq;
  }
  return next;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> brute_force_bpe(
    const std::vector<TokenSequence> &corpus, size_t num_merges) {
  std::map<SymbolWord, int64_t> words = word_table(corpus);
  std::vector<std::pair<std::string, std::string>> merges;
  while (merges.size() < num_merges) {
    auto counts = recount_pairs(words);
    int64_t best_count = 0;
    std::pair<std::string, std::string> best_pair;
    for (const auto &[pair, count] : counts) {
      // std::map iterates pairs in lexicographic order already, so a strict
      // > keeps the lexicographically smallest pair among equals.
      if (count > best_count) {
        best_count = count;
        best_pair = pair;
      }
    }
    if (best_count < 2) break;
    merges.push_back(best_pair);
    words = apply_merge(words, best_pair);
  }
  return merges;
}

std::vector<int64_t> replayed_merge_frequencies(
    const std::vector<TokenSequence> &corpus,
    const std::vector<std::pair<std::string, std::string>> &merges) {
  std::map<SymbolWord, int64_t> words = word_table(corpus);
  std::vector<int64_t> freqs;
  for (const auto &merge : merges) {
    auto counts = recount_pairs(words);
    auto it = counts.find(merge);
    freqs.push_back(it == counts.end() ? 0 : it->second);
    words = apply_merge(words, merge);
  }
  return freqs;
}

// --- modified Kneser-Ney direct evaluation ---

namespace {

constexpr const char *kBos = "<s>";
constexpr const char *kEos = "</s>";
constexpr const char *kUnk = "<unk>";
constexpr double kUnkFloor = 1e-9;

}  // namespace

MknOracle::MknOracle(const std::vector<TokenSequence> &corpus, int order,
                     const std::vector<int> &prune_counts)
    : order_(order) {
  const size_t n = static_cast<size_t>(order);
  std::vector<std::map<Gram, uint64_t>> raw(n);
  for (const TokenSequence &sent : corpus) {
    Gram padded;
    padded.push_back(kBos);
    padded.insert(padded.end(), sent.begin(), sent.end());
    padded.push_back(kEos);
    for (size_t k = 1; k <= n; ++k) {
      for (size_t i = 0; i + k <= padded.size(); ++i) {
        Gram gram(padded.begin() + i, padded.begin() + i + k);
        ++raw[k - 1][gram];
      }
    }
  }

  adjusted_.resize(n);
  adjusted_[n - 1] = raw[n - 1];
  for (size_t k = n - 1; k >= 1; --k) {
    for (const auto &[gram, unused] : raw[k]) {
      Gram tail(gram.begin() + 1, gram.end());
      ++adjusted_[k - 1][tail];
    }
    for (const auto &[gram, count] : raw[k - 1]) {
      if (gram.front() == kBos || !adjusted_[k - 1].count(gram)) {
        adjusted_[k - 1][gram] = count;
      }
    }
    if (k == 1) break;
  }

  // Prune on adjusted counts, then restore prefixes of survivors.
  const auto full = adjusted_;
  for (size_t k = 1; k <= n; ++k) {
    const uint64_t threshold = static_cast<uint64_t>(prune_counts[k - 1]);
    if (threshold == 0) continue;
    for (auto it = adjusted_[k - 1].begin(); it != adjusted_[k - 1].end();) {
      const bool keep =
          (k == 1 && (it->first[0] == kBos || it->first[0] == kEos)) ||
          it->second > threshold;
      it = keep ? std::next(it) : adjusted_[k - 1].erase(it);
    }
  }
  for (size_t k = n; k >= 2; --k) {
    for (const auto &[gram, unused] : adjusted_[k - 1]) {
      Gram prefix(gram.begin(), gram.end() - 1);
      if (!adjusted_[k - 2].count(prefix)) {
        adjusted_[k - 2][prefix] = full[k - 2].at(prefix);
      }
    }
  }

  // Discounts per order from surviving count-of-counts.
  for (size_t k = 1; k <= n; ++k) {
    uint64_t coc[5] = {0, 0, 0, 0, 0};
    for (const auto &[gram, count] : adjusted_[k - 1]) {
      if (k == 1 && gram[0] == kBos) continue;
      if (count <= 4) ++coc[count];
    }
    const uint64_t n1 = coc[1], n2 = coc[2], n3 = coc[3], n4 = coc[4];
    bool degenerate = (n1 == 0 || n2 == 0 || n3 == 0 || n4 == 0);
    double d1 = 0.75, d2 = 0.75, d3 = 0.75;
    if (!degenerate) {
      const double y = static_cast<double>(n1) / (n1 + 2.0 * n2);
      d1 = 1.0 - 2.0 * y * n2 / n1;
      d2 = 2.0 - 3.0 * y * n3 / n2;
      d3 = 3.0 - 4.0 * y * n4 / n3;
      if (!(d1 > 0 && d1 < 1) || !(d2 > 0 && d2 < 2) || !(d3 > 0 && d3 < 3)) {
        degenerate = true;
        d1 = d2 = d3 = 0.75;
      }
    }
    fallback_[k] = degenerate;
    discounts_[k][1] = d1;
    discounts_[k][2] = d2;
    discounts_[k][3] = d3;
  }

  auto discount_of = [&](size_t k, uint64_t count) {
    if (count == 0) return 0.0;
    return discounts_[k][std::min<uint64_t>(count, 3)];
  };

  // Per-context totals and discount masses for orders >= 2, plus the
  // unigram aggregates.
  contexts_.resize(n);
  for (size_t k = 2; k <= n; ++k) {
    for (const auto &[gram, count] : adjusted_[k - 1]) {
      Gram ctx(gram.begin(), gram.end() - 1);
      CtxInfo &info = contexts_[k - 1][ctx];
      info.total += static_cast<double>(count);
      info.discount_mass += discount_of(k, count);
    }
  }
  size_t observed = 0;
  for (const auto &[gram, count] : adjusted_[0]) {
    if (gram[0] == kBos) continue;
    if (order_ == 1) {
      mle_total_ += count;
    } else {
      unigram_total_ += static_cast<double>(count);
      unigram_gamma_ += discount_of(1, count);
      ++observed;
    }
  }
  if (order_ > 1) {
    unigram_gamma_ /= unigram_total_;
    unigram_uniform_ = 1.0 / (observed + 1);
  }
}

double MknOracle::prob_at(const Gram &context, const std::string &word,
                          size_t level) const {
  if (level == 1) {
    Gram unigram = {word};
    auto it = adjusted_[0].find(unigram);
    if (order_ == 1) {
      if (word != kUnk && it != adjusted_[0].end()) {
        return static_cast<double>(it->second) / mle_total_;
      }
      return kUnkFloor;
    }
    if (word != kUnk && it != adjusted_[0].end()) {
      const double d = discounts_[1][std::min<uint64_t>(it->second, 3)];
      return (it->second - d) / unigram_total_ +
             unigram_gamma_ * unigram_uniform_;
    }
    return std::max(unigram_gamma_ * unigram_uniform_, kUnkFloor);
  }
  Gram shorter(context.begin() + 1, context.end());
  auto ctx_it = contexts_[level - 1].find(context);
  if (ctx_it == contexts_[level - 1].end()) {
    return prob_at(shorter, word, level - 1);
  }
  Gram gram = context;
  gram.push_back(word);
  double base = 0.0;
  auto it = adjusted_[level - 1].find(gram);
  if (it != adjusted_[level - 1].end()) {
    const double d = discounts_[level][std::min<uint64_t>(it->second, 3)];
    base = std::max(static_cast<double>(it->second) - d, 0.0) /
           ctx_it->second.total;
  }
  const double gamma = ctx_it->second.discount_mass / ctx_it->second.total;
  return base + gamma * prob_at(shorter, word, level - 1);
}

double MknOracle::cond_prob(const std::vector<std::string> &context,
                            const std::string &word) const {
  Gram ctx = context;
  if (order_ > 1 && ctx.size() > static_cast<size_t>(order_ - 1)) {
    ctx.assign(context.end() - (order_ - 1), context.end());
  } else if (order_ == 1) {
    ctx.clear();
  }
  return prob_at(ctx, word, ctx.size() + 1);
}

double MknOracle::sentence_logp10(const TokenSequence &tokens) const {
  Gram seq;
  seq.push_back(kBos);
  seq.insert(seq.end(), tokens.begin(), tokens.end());
  seq.push_back(kEos);
  double total = 0.0;
  for (size_t j = 1; j < seq.size(); ++j) {
    size_t start = j > static_cast<size_t>(order_ - 1) ? j - (order_ - 1) : 0;
    Gram ctx(seq.begin() + start, seq.begin() + j);
    total += std::log10(cond_prob(ctx, seq[j]));
  }
  return total;
}

std::vector<TokenSequence> best_casings(const RecaserModel &model,
                                        const TokenSequence &lower) {
  std::vector<std::vector<std::string>> alts(lower.size());
  for (size_t i = 0; i < lower.size(); ++i) {
    const auto *forms = model.forms(lower[i]);
    if (forms == nullptr || forms->empty()) {
      alts[i].push_back(lower[i]);
    } else {
      for (const auto &f : *forms) alts[i].push_back(f.form);
    }
  }
  std::vector<TokenSequence> best;
  double best_score = 0.0;
  TokenSequence path(lower.size());
  std::function<void(size_t)> walk = [&](size_t i) {
    if (i == lower.size()) {
      const double s = model.context_lm().sentence_logp10(path);
      if (best.empty() || s > best_score) {
        best.clear();
        best_score = s;
        best.push_back(path);
      } else if (s == best_score) {
        best.push_back(path);
      }
      return;
    }
    for (const std::string &form : alts[i]) {
      path[i] = form;
      walk(i + 1);
    }
  };
  if (lower.empty()) return {TokenSequence{}};
  walk(0);
  return best;
}

}  // namespace oracles
}  // namespace stpipe
