// stpipe/bpe.cc
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

#include "stpipe/bpe.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>

#include "stpipe/utf8.h"

namespace stpipe {

namespace {

std::string pair_key(const std::string &left, const std::string &right) {
  std::string key;
  key.reserve(left.size() + right.size() + 1);
  key += left;
  key += '\n';  // symbols never contain newlines
  key += right;
  return key;
}

std::vector<std::string> word_to_symbols(const std::string &word) {
  std::vector<std::string> symbols;
  size_t pos = 0;
  while (pos < word.size()) {
    size_t start = pos;
    utf8::decode(word, pos);
    symbols.push_back(word.substr(start, pos - start));
  }
  symbols.push_back(BpeModel::kEndOfWord);
  return symbols;
}

}  // namespace

BpeModel::BpeModel(std::vector<std::pair<std::string, std::string>> merges)
    : merges_(std::move(merges)) {
  for (size_t i = 0; i < merges_.size(); ++i) {
    const auto &[left, right] = merges_[i];
    merge_rank_.emplace(pair_key(left, right), i);
    vocab_.insert(left);
    vocab_.insert(right);
    vocab_.insert(left + right);
  }
}

std::vector<std::string> BpeModel::segment_word(
    const std::string &word) const {
  auto cached = cache_.find(word);
  if (cached != cache_.end()) return cached->second;

  std::vector<std::string> symbols = word_to_symbols(word);
  // Repeatedly apply the earliest-learned merge present in the word; this
  // reproduces replaying the full merge list in order.
  while (symbols.size() > 1) {
    size_t best_rank = merge_rank_.size();
    for (size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = merge_rank_.find(pair_key(symbols[i], symbols[i + 1]));
      if (it != merge_rank_.end() && it->second < best_rank) {
        best_rank = it->second;
      }
    }
    if (best_rank == merge_rank_.size()) break;
    const auto &pair = merges_[best_rank];
    std::vector<std::string> next;
    next.reserve(symbols.size() - 1);
    for (size_t i = 0; i < symbols.size();) {
      if (i + 1 < symbols.size() && symbols[i] == pair.first &&
          symbols[i + 1] == pair.second) {
        next.push_back(symbols[i] + symbols[i + 1]);
        i += 2;
      } else {
        next.push_back(symbols[i]);
        i += 1;
      }
    }
    symbols.swap(next);
  }

  // Drop the end-of-word sentinel and mark non-final subwords.
  std::vector<std::string> out;
  for (std::string &sym : symbols) {
    if (sym == kEndOfWord) continue;
    if (sym.size() > 4 && sym.ends_with(kEndOfWord)) {
      sym.resize(sym.size() - 4);
    }
    out.push_back(std::move(sym));
  }
  for (size_t i = 0; i + 1 < out.size(); ++i) out[i] += kContinuation;
  cache_.emplace(word, out);
  return out;
}

BpeModel learn_bpe(const std::vector<TokenSequence> &corpus,
                   size_t num_merges) {
  // Collect word-type frequencies.
  std::map<std::string, uint64_t> word_freq;
  for (const TokenSequence &sent : corpus) {
    for (const std::string &tok : sent) ++word_freq[tok];
  }
  if (word_freq.empty()) throw EmptyCorpusError("learn_bpe saw no tokens");

  std::vector<std::vector<std::string>> words;
  std::vector<uint64_t> freqs;
  words.reserve(word_freq.size());
  for (const auto &[word, freq] : word_freq) {
    words.push_back(word_to_symbols(word));
    freqs.push_back(freq);
  }

  // Pair statistics plus, per pair, the set of word types containing it.
  std::unordered_map<std::string, int64_t> pair_count;
  std::unordered_map<std::string, std::vector<uint32_t>> pair_words;
  auto add_pair = [&](const std::string &l, const std::string &r,
                      uint32_t word_idx, int64_t freq) {
    std::string key = pair_key(l, r);
    pair_count[key] += freq;
    if (freq > 0) {
      auto &list = pair_words[key];
      if (list.empty() || list.back() != word_idx) list.push_back(word_idx);
    }
  };
  for (uint32_t w = 0; w < words.size(); ++w) {
    const auto &syms = words[w];
    for (size_t i = 0; i + 1 < syms.size(); ++i) {
      add_pair(syms[i], syms[i + 1], w, static_cast<int64_t>(freqs[w]));
    }
  }

  // Max-heap with lazy invalidation; ties break on the lexicographically
  // smallest (left, right) key so learning is reproducible.
  struct HeapEntry {
    int64_t count;
    std::string key;
    bool operator<(const HeapEntry &other) const {
      if (count != other.count) return count < other.count;
      return key > other.key;
    }
  };
  std::priority_queue<HeapEntry> heap;
  for (const auto &[key, count] : pair_count) heap.push({count, key});

  std::vector<std::pair<std::string, std::string>> merges;
  while (merges.size() < num_merges && !heap.empty()) {
    HeapEntry top = heap.top();
    heap.pop();
    auto cur = pair_count.find(top.key);
    if (cur == pair_count.end() || cur->second != top.count) continue;  // stale
    if (top.count < 2) break;  // no pair occurs at least twice

    const size_t sep = top.key.find('\n');
    const std::string left = top.key.substr(0, sep);
    const std::string right = top.key.substr(sep + 1);
    const std::string merged = left + right;
    merges.emplace_back(left, right);

    std::vector<uint32_t> affected = std::move(pair_words[top.key]);
    pair_words.erase(top.key);
    pair_count.erase(top.key);

    std::unordered_map<std::string, int64_t> touched;
    for (uint32_t w : affected) {
      auto &syms = words[w];
      const int64_t freq = static_cast<int64_t>(freqs[w]);
      bool contains = false;
      for (size_t i = 0; i + 1 < syms.size(); ++i) {
        if (syms[i] == left && syms[i + 1] == right) {
          contains = true;
          break;
        }
      }
      if (!contains) continue;  // stale membership from earlier rewrites
      // Retract this word's pair contributions, rewrite, re-add.
      for (size_t i = 0; i + 1 < syms.size(); ++i) {
        std::string key = pair_key(syms[i], syms[i + 1]);
        pair_count[key] -= freq;
        touched.emplace(key, 0);
      }
      std::vector<std::string> next;
      next.reserve(syms.size());
      for (size_t i = 0; i < syms.size();) {
        if (i + 1 < syms.size() && syms[i] == left && syms[i + 1] == right) {
          next.push_back(merged);
          i += 2;
        } else {
          next.push_back(syms[i]);
          i += 1;
        }
      }
      syms.swap(next);
      for (size_t i = 0; i + 1 < syms.size(); ++i) {
        std::string key = pair_key(syms[i], syms[i + 1]);
        pair_count[key] += freq;
        touched.emplace(key, 0);
        auto &list = pair_words[key];
        if (list.empty() || list.back() != w) list.push_back(w);
      }
    }
    for (const auto &[key, unused] : touched) {
      auto it = pair_count.find(key);
      if (it == pair_count.end()) continue;
      if (it->second <= 0) {
        pair_count.erase(it);
        pair_words.erase(key);
      } else {
        heap.push({it->second, key});
      }
    }
  }
  return BpeModel(std::move(merges));
}

TokenSequence apply_bpe(const BpeModel &model, const TokenSequence &tokens) {
  TokenSequence out;
  out.reserve(tokens.size());
  for (const std::string &tok : tokens) {
    for (const std::string &sym : model.segment_word(tok)) {
      out.push_back(sym);
    }
  }
  return out;
}

TokenSequence revert_bpe(const TokenSequence &tokens) {
  TokenSequence out;
  std::string pending;
  for (const std::string &tok : tokens) {
    if (tok.size() >= 2 && tok.ends_with(BpeModel::kContinuation)) {
      pending += tok.substr(0, tok.size() - 2);
    } else {
      out.push_back(pending + tok);
      pending.clear();
    }
  }
  if (!pending.empty()) {
    throw DanglingMarkerError("sequence ends with a continuation-marked token");
  }
  return out;
}

void BpeModel::save(std::ostream &out) const {
  out << "#bpe v1\n";
  for (const auto &[left, right] : merges_) {
    out << left << '\t' << right << '\n';
  }
}

void BpeModel::save_file(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write BPE model: " + path);
  save(out);
}

BpeModel BpeModel::load(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) || line != "#bpe v1") {
    throw ParseError("BPE model missing '#bpe v1' header");
  }
  std::vector<std::pair<std::string, std::string>> merges;
  std::unordered_set<std::string> seen;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError("BPE model line " + std::to_string(line_no) +
                       ": expected left<TAB>right");
    }
    std::string left = line.substr(0, tab);
    std::string right = line.substr(tab + 1);
    if (!seen.insert(pair_key(left, right)).second) {
      throw ParseError("BPE model line " + std::to_string(line_no) +
                       ": duplicate merge pair");
    }
    merges.emplace_back(std::move(left), std::move(right));
  }
  return BpeModel(std::move(merges));
}

BpeModel BpeModel::load_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read BPE model: " + path);
  return load(in);
}

}  // namespace stpipe
