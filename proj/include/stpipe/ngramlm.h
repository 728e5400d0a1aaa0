// stpipe/ngramlm.h
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

#ifndef STPIPE_NGRAMLM_H_
#define STPIPE_NGRAMLM_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "stpipe/types.h"

namespace stpipe {

// Back-off n-gram model with modified Kneser-Ney smoothing.
//
// Estimation, in the order the steps run:
//   1. raw n-gram counts for every order over <s> ... </s> padded sentences;
//   2. adjusted counts: continuation counts (distinct left extensions) below
//      the top order, raw counts at the top order and for <s>-initial grams;
//   3. count pruning: entries whose adjusted count is <= prune_counts[k]
//      are dropped at order k+1, then prefixes of survivors are restored so
//      every stored n-gram keeps its context entry;
//   4. three discounts per order from the count-of-counts of the surviving
//      adjusted counts, falling back to a flat absolute discount of 0.75
//      when the count-of-counts are degenerate;
//   5. interpolated probabilities bottom-up; the back-off weight of a
//      context is its discount mass, which makes every stored context's
//      conditional distribution sum to one exactly.
//
// The unigram level interpolates with a uniform base distribution over the
// observed events plus <unk>, so the unknown word's probability is its
// share of the discounted unigram mass. An order-1 model has no lower level
// to discount into and reduces to maximum likelihood with a tiny <unk>
// floor. Probabilities are log10 throughout, as in ARPA files.
class NGramModel {
 public:
  static constexpr const char *kBos = "<s>";
  static constexpr const char *kEos = "</s>";
  static constexpr const char *kUnk = "<unk>";

  struct Entry {
    double logp = 0.0;
    double logbow = 0.0;  // log10 back-off weight; 0 when absent
    bool has_bow = false;
  };

  NGramModel() = default;

  int order() const { return order_; }

  uint32_t bos_id() const { return bos_id_; }
  uint32_t eos_id() const { return eos_id_; }
  uint32_t unk_id() const { return unk_id_; }

  const std::vector<std::string> &words() const { return words_; }
  // Returns unk_id() for unseen words.
  uint32_t word_id(const std::string &word) const;

  size_t size(int k) const { return tables_[k - 1].size(); }

  // log10 p(word | context) with back-off chaining; context may be any
  // length, only the last order-1 ids are used.
  double cond_logp10(const std::vector<uint32_t> &context,
                     uint32_t word) const;

  // Sentence log10 probability including the </s> event; out-of-vocabulary
  // tokens map to <unk>.
  double sentence_logp10(const TokenSequence &tokens) const;

  // All stored n-grams of order k as (ids, entry) pairs, sorted by word
  // strings. Used for ARPA output and by the verification suite.
  std::vector<std::pair<std::vector<uint32_t>, Entry>> entries(int k) const;

  // True when the MKN discounts at order k were replaced by the 0.75
  // absolute-discount fallback.
  bool used_fallback_discounts(int k) const { return fallback_[k - 1]; }

  void save_arpa(std::ostream &out) const;
  void save_arpa_file(const std::string &path) const;
  static NGramModel load_arpa(std::istream &in);
  static NGramModel load_arpa_file(const std::string &path);

 private:
  friend NGramModel train_lm(const std::vector<TokenSequence> &, int,
                             const std::vector<int> &);

  using Key = std::string;  // ids packed 4 bytes each
  static Key make_key(const uint32_t *ids, size_t n);

  const Entry *find(const uint32_t *ids, size_t n) const;

  int order_ = 0;
  uint32_t bos_id_ = 0, eos_id_ = 0, unk_id_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, uint32_t> word_ids_;
  std::vector<std::unordered_map<Key, Entry>> tables_;
  std::vector<bool> fallback_;

  uint32_t intern(const std::string &word);
};

// Trains a modified Kneser-Ney model. order must lie in [1,5] and
// prune_counts must have one (non-negative) threshold per order.
// Throws EmptyCorpusError when the corpus has no sentences.
NGramModel train_lm(const std::vector<TokenSequence> &corpus, int order,
                    const std::vector<int> &prune_counts);

double score(const NGramModel &lm, const TokenSequence &tokens);

// 10^(-total log10 prob / events); each sentence contributes its token count
// plus one </s> event. Throws EmptyCorpusError on an empty corpus.
double perplexity(const NGramModel &lm,
                  const std::vector<TokenSequence> &corpus);

}  // namespace stpipe

#endif  // STPIPE_NGRAMLM_H_
