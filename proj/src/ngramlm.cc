// stpipe/ngramlm.cc
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

#include "stpipe/ngramlm.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace stpipe {

namespace {

constexpr double kLogProbBos = -99.0;   // <s> is never predicted
constexpr double kUnkFloor = 1e-9;
constexpr double kFallbackDiscount = 0.75;

struct Discounts {
  double d[4] = {0, 0, 0, 0};  // d[1], d[2], d[3]; d[3] covers counts >= 3
  bool fallback = false;

  double of(uint64_t count) const {
    if (count == 0) return 0.0;
    return d[std::min<uint64_t>(count, 3)];
  }
};

// Three discounts from the count-of-counts, as in modified Kneser-Ney.
// Degenerate statistics (missing count classes or out-of-range values, the
// norm on tiny corpora) fall back to a flat absolute discount so that every
// observed event keeps positive probability.
Discounts estimate_discounts(const std::vector<uint64_t> &count_of_counts) {
  const uint64_t n1 = count_of_counts[1], n2 = count_of_counts[2],
                 n3 = count_of_counts[3], n4 = count_of_counts[4];
  Discounts out;
  if (n1 == 0 || n2 == 0 || n3 == 0 || n4 == 0) {
    out.d[1] = out.d[2] = out.d[3] = kFallbackDiscount;
    out.fallback = true;
    return out;
  }
  const double y = static_cast<double>(n1) / (n1 + 2.0 * n2);
  out.d[1] = 1.0 - 2.0 * y * n2 / n1;
  out.d[2] = 2.0 - 3.0 * y * n3 / n2;
  out.d[3] = 3.0 - 4.0 * y * n4 / n3;
  if (!(out.d[1] > 0 && out.d[1] < 1) || !(out.d[2] > 0 && out.d[2] < 2) ||
      !(out.d[3] > 0 && out.d[3] < 3)) {
    out.d[1] = out.d[2] = out.d[3] = kFallbackDiscount;
    out.fallback = true;
  }
  return out;
}

}  // namespace

NGramModel::Key NGramModel::make_key(const uint32_t *ids, size_t n) {
  Key key(n * 4, '\0');
  std::memcpy(key.data(), ids, n * 4);
  return key;
}

uint32_t NGramModel::intern(const std::string &word) {
  auto it = word_ids_.find(word);
  if (it != word_ids_.end()) return it->second;
  uint32_t id = static_cast<uint32_t>(words_.size());
  words_.push_back(word);
  word_ids_.emplace(word, id);
  return id;
}

uint32_t NGramModel::word_id(const std::string &word) const {
  auto it = word_ids_.find(word);
  return it == word_ids_.end() ? unk_id_ : it->second;
}

const NGramModel::Entry *NGramModel::find(const uint32_t *ids,
                                          size_t n) const {
  const auto &table = tables_[n - 1];
  auto it = table.find(make_key(ids, n));
  return it == table.end() ? nullptr : &it->second;
}

double NGramModel::cond_logp10(const std::vector<uint32_t> &context,
                               uint32_t word) const {
  uint32_t buf[8];
  size_t ctx_len = std::min<size_t>(context.size(), order_ - 1);
  const uint32_t *ctx = context.data() + (context.size() - ctx_len);
  double acc = 0.0;
  while (true) {
    std::copy(ctx, ctx + ctx_len, buf);
    buf[ctx_len] = word;
    if (const Entry *e = find(buf, ctx_len + 1)) return acc + e->logp;
    if (ctx_len == 0) {
      // Word absent even as a unigram: take the unknown-word mass.
      buf[0] = unk_id_;
      const Entry *u = find(buf, 1);
      return acc + (u ? u->logp : kLogProbBos);
    }
    if (const Entry *c = find(ctx, ctx_len)) {
      if (c->has_bow) acc += c->logbow;
    }
    ++ctx;
    --ctx_len;
  }
}

double NGramModel::sentence_logp10(const TokenSequence &tokens) const {
  std::vector<uint32_t> seq;
  seq.reserve(tokens.size() + 2);
  seq.push_back(bos_id_);
  for (const std::string &tok : tokens) seq.push_back(word_id(tok));
  seq.push_back(eos_id_);

  double total = 0.0;
  std::vector<uint32_t> ctx;
  for (size_t j = 1; j < seq.size(); ++j) {
    size_t start = j > static_cast<size_t>(order_ - 1) ? j - (order_ - 1) : 0;
    ctx.assign(seq.begin() + start, seq.begin() + j);
    total += cond_logp10(ctx, seq[j]);
  }
  return total;
}

std::vector<std::pair<std::vector<uint32_t>, NGramModel::Entry>>
NGramModel::entries(int k) const {
  std::vector<std::pair<std::vector<uint32_t>, Entry>> out;
  out.reserve(tables_[k - 1].size());
  for (const auto &[key, entry] : tables_[k - 1]) {
    std::vector<uint32_t> ids(key.size() / 4);
    std::memcpy(ids.data(), key.data(), key.size());
    out.emplace_back(std::move(ids), entry);
  }
  std::sort(out.begin(), out.end(), [this](const auto &a, const auto &b) {
    for (size_t i = 0; i < a.first.size(); ++i) {
      int cmp = words_[a.first[i]].compare(words_[b.first[i]]);
      if (cmp != 0) return cmp < 0;
    }
    return false;
  });
  return out;
}

NGramModel train_lm(const std::vector<TokenSequence> &corpus, int order,
                    const std::vector<int> &prune_counts) {
  if (order < 1 || order > 5) {
    throw std::invalid_argument("LM order must be in [1,5]");
  }
  if (prune_counts.size() != static_cast<size_t>(order)) {
    throw std::invalid_argument("need one prune threshold per order");
  }
  if (corpus.empty()) throw EmptyCorpusError("train_lm given no sentences");

  NGramModel lm;
  lm.order_ = order;
  lm.bos_id_ = lm.intern(NGramModel::kBos);
  lm.eos_id_ = lm.intern(NGramModel::kEos);
  lm.unk_id_ = lm.intern(NGramModel::kUnk);
  lm.tables_.resize(order);
  lm.fallback_.assign(order, false);

  using Key = NGramModel::Key;
  const size_t n = static_cast<size_t>(order);

  // Raw counts, all orders.
  std::vector<std::unordered_map<Key, uint64_t>> raw(n);
  std::vector<uint32_t> seq;
  for (const TokenSequence &sent : corpus) {
    seq.clear();
    seq.push_back(lm.bos_id_);
    for (const std::string &tok : sent) seq.push_back(lm.intern(tok));
    seq.push_back(lm.eos_id_);
    for (size_t k = 1; k <= n; ++k) {
      if (seq.size() < k) continue;
      for (size_t i = 0; i + k <= seq.size(); ++i) {
        ++raw[k - 1][NGramModel::make_key(seq.data() + i, k)];
      }
    }
  }

  // Adjusted counts: continuation counts below the top order; raw counts at
  // the top order and wherever no left extension can exist (<s>-initial).
  std::vector<std::unordered_map<Key, uint64_t>> adjusted(n);
  adjusted[n - 1] = raw[n - 1];
  for (size_t k = n - 1; k >= 1; --k) {
    auto &adj = adjusted[k - 1];
    for (const auto &[key, unused] : raw[k]) {
      adj[key.substr(4)] += 1;
    }
    for (const auto &[key, count] : raw[k - 1]) {
      uint32_t first;
      std::memcpy(&first, key.data(), 4);
      auto it = adj.find(key);
      if (it == adj.end() || it->second == 0 || first == lm.bos_id_) {
        adj[key] = count;
      }
    }
    if (k == 1) break;
  }

  // Count pruning, then restore the prefix of every survivor so stored
  // n-grams always have their context entry.
  const std::vector<std::unordered_map<Key, uint64_t>> adjusted_full =
      adjusted;
  for (size_t k = 1; k <= n; ++k) {
    const uint64_t threshold = static_cast<uint64_t>(prune_counts[k - 1]);
    if (threshold == 0) continue;
    auto &adj = adjusted[k - 1];
    for (auto it = adj.begin(); it != adj.end();) {
      bool protected_sym = false;
      if (k == 1) {
        uint32_t id;
        std::memcpy(&id, it->first.data(), 4);
        protected_sym = (id == lm.bos_id_ || id == lm.eos_id_);
      }
      if (!protected_sym && it->second <= threshold) {
        it = adj.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (size_t k = n; k >= 2; --k) {
    for (const auto &[key, unused] : adjusted[k - 1]) {
      Key prefix = key.substr(0, key.size() - 4);
      auto &lower = adjusted[k - 2];
      if (!lower.count(prefix)) {
        lower[prefix] = adjusted_full[k - 2].at(prefix);
      }
    }
  }

  // --- Unigram level ---
  {
    auto &table = lm.tables_[0];
    if (order == 1) {
      // No lower level to discount into: maximum likelihood.
      uint64_t total = 0;
      for (const auto &[key, count] : adjusted[0]) {
        uint32_t id;
        std::memcpy(&id, key.data(), 4);
        if (id != lm.bos_id_) total += count;
      }
      for (const auto &[key, count] : adjusted[0]) {
        uint32_t id;
        std::memcpy(&id, key.data(), 4);
        NGramModel::Entry e;
        e.logp = (id == lm.bos_id_)
                     ? kLogProbBos
                     : std::log10(static_cast<double>(count) / total);
        table.emplace(key, e);
      }
      NGramModel::Entry unk;
      unk.logp = std::log10(kUnkFloor);
      table.emplace(NGramModel::make_key(&lm.unk_id_, 1), unk);
    } else {
      double mass_total = 0.0;
      size_t observed = 0;
      std::vector<uint64_t> coc(5, 0);
      for (const auto &[key, count] : adjusted[0]) {
        uint32_t id;
        std::memcpy(&id, key.data(), 4);
        if (id == lm.bos_id_) continue;
        mass_total += static_cast<double>(count);
        ++observed;
        if (count <= 4) ++coc[count];
      }
      const Discounts disc = estimate_discounts(coc);
      lm.fallback_[0] = disc.fallback;
      double discounted = 0.0;
      for (const auto &[key, count] : adjusted[0]) {
        uint32_t id;
        std::memcpy(&id, key.data(), 4);
        if (id == lm.bos_id_) continue;
        discounted += disc.of(count);
      }
      // The discounted mass is spread over a uniform base distribution
      // covering the observed events plus the unknown word, whose whole
      // probability comes from that mass.
      const double gamma = discounted / mass_total;
      const double uniform = 1.0 / (observed + 1);
      for (const auto &[key, count] : adjusted[0]) {
        uint32_t id;
        std::memcpy(&id, key.data(), 4);
        NGramModel::Entry e;
        e.logp = (id == lm.bos_id_)
                     ? kLogProbBos
                     : std::log10((count - disc.of(count)) / mass_total +
                                  gamma * uniform);
        table.emplace(key, e);
      }
      NGramModel::Entry unk;
      unk.logp = std::log10(std::max(gamma * uniform, kUnkFloor));
      table.emplace(NGramModel::make_key(&lm.unk_id_, 1), unk);
    }
  }

  // --- Higher orders, bottom-up ---
  for (size_t k = 2; k <= n; ++k) {
    const auto &adj = adjusted[k - 1];
    std::vector<uint64_t> coc(5, 0);
    for (const auto &[key, count] : adj) {
      if (count <= 4) ++coc[count];
    }
    const Discounts disc = estimate_discounts(coc);
    lm.fallback_[k - 1] = disc.fallback;

    struct CtxStats {
      double total = 0.0;
      double discounted = 0.0;
    };
    std::unordered_map<Key, CtxStats> by_ctx;
    for (const auto &[key, count] : adj) {
      CtxStats &s = by_ctx[key.substr(0, key.size() - 4)];
      s.total += static_cast<double>(count);
      s.discounted += disc.of(count);
    }

    // Back-off weight of a context is its discount mass ratio. Prefix
    // closure above guarantees the context entry exists.
    for (const auto &[ctx_key, stats] : by_ctx) {
      auto &lower_table = lm.tables_[k - 2];
      auto it = lower_table.find(ctx_key);
      if (it == lower_table.end()) {
        throw Error("internal: context entry missing during estimation");
      }
      it->second.logbow = std::log10(stats.discounted / stats.total);
      it->second.has_bow = true;
    }

    auto &table = lm.tables_[k - 1];
    std::vector<uint32_t> lower_ctx;
    for (const auto &[key, count] : adj) {
      const CtxStats &s = by_ctx[key.substr(0, key.size() - 4)];
      const double gamma = s.discounted / s.total;
      const double base =
          std::max(static_cast<double>(count) - disc.of(count), 0.0) /
          s.total;
      const size_t len = key.size() / 4;
      lower_ctx.resize(len - 2);
      std::memcpy(lower_ctx.data(), key.data() + 4, (len - 2) * 4);
      uint32_t word;
      std::memcpy(&word, key.data() + (len - 1) * 4, 4);
      const double q_lower = std::pow(10.0, lm.cond_logp10(lower_ctx, word));
      NGramModel::Entry e;
      e.logp = std::log10(base + gamma * q_lower);
      table.emplace(key, e);
    }
  }
  return lm;
}

double score(const NGramModel &lm, const TokenSequence &tokens) {
  return lm.sentence_logp10(tokens);
}

double perplexity(const NGramModel &lm,
                  const std::vector<TokenSequence> &corpus) {
  if (corpus.empty()) throw EmptyCorpusError("perplexity over no sentences");
  double total = 0.0;
  uint64_t events = 0;
  for (const TokenSequence &sent : corpus) {
    total += lm.sentence_logp10(sent);
    events += sent.size() + 1;  // words plus </s>
  }
  return std::pow(10.0, -total / static_cast<double>(events));
}

namespace {

std::string format_logp(double v) {
  if (v == kLogProbBos) return "-99";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.7f", v);
  return buf;
}

}  // namespace

void NGramModel::save_arpa(std::ostream &out) const {
  out << "\\data\\\n";
  for (int k = 1; k <= order_; ++k) {
    out << "ngram " << k << "=" << tables_[k - 1].size() << "\n";
  }
  for (int k = 1; k <= order_; ++k) {
    out << "\n\\" << k << "-grams:\n";
    for (const auto &[ids, entry] : entries(k)) {
      out << format_logp(entry.logp);
      for (size_t i = 0; i < ids.size(); ++i) {
        out << (i == 0 ? '\t' : ' ') << words_[ids[i]];
      }
      if (k < order_) out << '\t' << format_logp(entry.has_bow ? entry.logbow : 0.0);
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

void NGramModel::save_arpa_file(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write ARPA model: " + path);
  save_arpa(out);
}

NGramModel NGramModel::load_arpa(std::istream &in) {
  NGramModel lm;
  lm.bos_id_ = lm.intern(kBos);
  lm.eos_id_ = lm.intern(kEos);
  lm.unk_id_ = lm.intern(kUnk);

  std::string line;
  // Skip anything before the \data\ header, as ARPA readers customarily do.
  bool have_data = false;
  while (std::getline(in, line)) {
    if (line == "\\data\\") {
      have_data = true;
      break;
    }
  }
  if (!have_data) throw ParseError("ARPA file has no \\data\\ section");

  std::vector<size_t> sizes;
  while (std::getline(in, line)) {
    if (line.empty()) break;
    if (line.rfind("ngram ", 0) != 0) {
      throw ParseError("bad ARPA count line: " + line);
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("bad ARPA count line: " + line);
    sizes.push_back(std::stoull(line.substr(eq + 1)));
  }
  if (sizes.empty()) throw ParseError("ARPA \\data\\ section is empty");
  lm.order_ = static_cast<int>(sizes.size());
  lm.tables_.resize(sizes.size());
  lm.fallback_.assign(sizes.size(), false);

  int section = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line == "\\end\\") break;
    if (line[0] == '\\') {
      size_t dash = line.find("-grams:");
      if (dash == std::string::npos) throw ParseError("bad ARPA section: " + line);
      section = std::stoi(line.substr(1, dash - 1));
      if (section < 1 || section > lm.order_) {
        throw ParseError("ARPA section out of range: " + line);
      }
      continue;
    }
    if (section == 0) throw ParseError("ARPA entry before any section");
    std::istringstream ss(line);
    double logp;
    if (!(ss >> logp)) throw ParseError("bad ARPA entry: " + line);
    std::vector<uint32_t> ids;
    std::string word;
    for (int i = 0; i < section; ++i) {
      if (!(ss >> word)) throw ParseError("short ARPA entry: " + line);
      ids.push_back(lm.intern(word));
    }
    Entry e;
    e.logp = logp;
    double bow;
    if (ss >> bow) {
      e.logbow = bow;
      e.has_bow = true;
    }
    lm.tables_[section - 1].emplace(make_key(ids.data(), ids.size()), e);
  }
  return lm;
}

NGramModel NGramModel::load_arpa_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read ARPA model: " + path);
  return load_arpa(in);
}

}  // namespace stpipe
