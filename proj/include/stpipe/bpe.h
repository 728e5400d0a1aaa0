// stpipe/bpe.h
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

#ifndef STPIPE_BPE_H_
#define STPIPE_BPE_H_

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "stpipe/types.h"

namespace stpipe {

// Byte-pair encoding model: an ordered merge list plus the symbol vocabulary
// it induces. Learning is deterministic; ties between equally frequent pairs
// break lexicographically on (left, right).
class BpeModel {
 public:
  static constexpr const char *kContinuation = "@@";
  static constexpr const char *kEndOfWord = "</w>";

  BpeModel() = default;
  explicit BpeModel(std::vector<std::pair<std::string, std::string>> merges);

  const std::vector<std::pair<std::string, std::string>> &merges() const {
    return merges_;
  }
  const std::unordered_set<std::string> &vocab() const { return vocab_; }

  // Segments one word into subword symbols by replaying the merge list;
  // every subword but the last carries the continuation marker. Results are
  // memoized per word.
  std::vector<std::string> segment_word(const std::string &word) const;

  void save(std::ostream &out) const;
  void save_file(const std::string &path) const;
  static BpeModel load(std::istream &in);
  static BpeModel load_file(const std::string &path);

 private:
  std::vector<std::pair<std::string, std::string>> merges_;
  // Merge pair -> position in the merge list.
  std::unordered_map<std::string, size_t> merge_rank_;
  std::unordered_set<std::string> vocab_;
  mutable std::unordered_map<std::string, std::vector<std::string>> cache_;
};

// Iterative most-frequent-pair merging over word types weighted by corpus
// frequency. Stops after num_merges merges or when no pair occurs twice.
// Throws EmptyCorpusError when the corpus contains no tokens.
BpeModel learn_bpe(const std::vector<TokenSequence> &corpus,
                   size_t num_merges);

TokenSequence apply_bpe(const BpeModel &model, const TokenSequence &tokens);

// Rejoins continuation-marked subwords. Throws DanglingMarkerError when the
// sequence ends with a marked token.
TokenSequence revert_bpe(const TokenSequence &tokens);

}  // namespace stpipe

#endif  // STPIPE_BPE_H_
