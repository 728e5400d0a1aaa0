// stpipe/rerank.h
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

#ifndef STPIPE_RERANK_H_
#define STPIPE_RERANK_H_

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stpipe/nbest.h"
#include "stpipe/ngramlm.h"
#include "stpipe/types.h"

namespace stpipe {

// Which ranks to keep when sampling hypotheses into training data, e.g.
// {1}, {1..10}, or any mixture.
struct SelectionStrategy {
  std::set<int> ranks;

  // "1", "1-10", "1-5,8,20-30"; all ranks must be >= 1.
  static SelectionStrategy parse(const std::string &spec);
  static SelectionStrategy top(int n);
};

// Hypotheses whose rank is in the strategy, in rank order; missing ranks
// are skipped silently.
std::vector<TokenSequence> select(const NBestList &nbest,
                                  const SelectionStrategy &strategy);

// Pairs every selected hypothesis with the utterance's target translation.
// Throws AlignmentMismatchError when the streams disagree in length.
std::vector<std::pair<TokenSequence, TokenSequence>> build_training_pairs(
    const std::vector<NBestList> &nbest_stream,
    const std::vector<TokenSequence> &targets,
    const SelectionStrategy &strategy);

struct RerankWeights {
  double w_orig = 0.0;
  double w_lm = 1.0;

  void validate() const;  // non-negative, not both zero
};

// Sentence log10 probability normalized by predicted events (token count
// plus the sentence-end event, so empty hypotheses stay well-defined).
double normalized_lm_score(const NGramModel &lm, const TokenSequence &tokens);

// Stable re-sort by w_orig * original score + w_lm * normalized LM score,
// with ranks reassigned from 1. A permutation of the input hypotheses;
// w_lm = 0 keeps the input order exactly.
NBestList rerank(const NBestList &nbest, const NGramModel &lm,
                 const RerankWeights &weights);

// The hypothesis with the best length-normalized LM score; ties go to the
// lower original rank. Equivalent to rank 1 of rerank with weights {0, 1}.
TokenSequence pick_best_translation(const NBestList &candidates,
                                    const NGramModel &lm);

}  // namespace stpipe

#endif  // STPIPE_RERANK_H_
