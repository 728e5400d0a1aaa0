// stpipe/rerank.cc
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

#include "stpipe/rerank.h"

#include <algorithm>
#include <numeric>

namespace stpipe {

SelectionStrategy SelectionStrategy::parse(const std::string &spec) {
  SelectionStrategy out;
  size_t pos = 0;
  while (pos < spec.size()) {
    size_t comma = spec.find(',', pos);
    std::string part = spec.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    pos = comma == std::string::npos ? spec.size() : comma + 1;
    if (part.empty()) continue;
    size_t dash = part.find('-');
    try {
      if (dash == std::string::npos) {
        out.ranks.insert(std::stoi(part));
      } else {
        int lo = std::stoi(part.substr(0, dash));
        int hi = std::stoi(part.substr(dash + 1));
        for (int r = lo; r <= hi; ++r) out.ranks.insert(r);
      }
    } catch (const std::exception &) {
      throw ParseError("bad rank selection '" + part + "'");
    }
  }
  if (out.ranks.empty()) throw ParseError("empty rank selection");
  if (*out.ranks.begin() < 1) throw ParseError("ranks must be >= 1");
  return out;
}

SelectionStrategy SelectionStrategy::top(int n) {
  SelectionStrategy out;
  for (int r = 1; r <= n; ++r) out.ranks.insert(r);
  return out;
}

std::vector<TokenSequence> select(const NBestList &nbest,
                                  const SelectionStrategy &strategy) {
  std::vector<TokenSequence> out;
  for (const Hypothesis &hyp : nbest.hypotheses) {
    if (strategy.ranks.count(hyp.rank)) out.push_back(hyp.tokens);
  }
  return out;
}

std::vector<std::pair<TokenSequence, TokenSequence>> build_training_pairs(
    const std::vector<NBestList> &nbest_stream,
    const std::vector<TokenSequence> &targets,
    const SelectionStrategy &strategy) {
  if (nbest_stream.size() != targets.size()) {
    throw AlignmentMismatchError(
        std::to_string(nbest_stream.size()) + " n-best lists vs " +
        std::to_string(targets.size()) + " targets");
  }
  std::vector<std::pair<TokenSequence, TokenSequence>> pairs;
  for (size_t i = 0; i < nbest_stream.size(); ++i) {
    for (TokenSequence &src : select(nbest_stream[i], strategy)) {
      pairs.emplace_back(std::move(src), targets[i]);
    }
  }
  return pairs;
}

void RerankWeights::validate() const {
  if (w_orig < 0 || w_lm < 0) {
    throw std::invalid_argument("rerank weights must be non-negative");
  }
  if (w_orig == 0 && w_lm == 0) {
    throw std::invalid_argument("rerank weights must not both be zero");
  }
}

double normalized_lm_score(const NGramModel &lm,
                           const TokenSequence &tokens) {
  return lm.sentence_logp10(tokens) / (tokens.size() + 1.0);
}

NBestList rerank(const NBestList &nbest, const NGramModel &lm,
                 const RerankWeights &weights) {
  weights.validate();
  std::vector<double> new_score(nbest.hypotheses.size());
  for (size_t i = 0; i < nbest.hypotheses.size(); ++i) {
    const Hypothesis &hyp = nbest.hypotheses[i];
    double lm_part =
        weights.w_lm == 0 ? 0.0 : normalized_lm_score(lm, hyp.tokens);
    new_score[i] = weights.w_orig * hyp.score + weights.w_lm * lm_part;
  }
  std::vector<size_t> order(nbest.hypotheses.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return new_score[a] > new_score[b];
  });

  NBestList out;
  out.utt_id = nbest.utt_id;
  out.hypotheses.reserve(nbest.hypotheses.size());
  for (size_t i = 0; i < order.size(); ++i) {
    Hypothesis hyp;
    hyp.rank = static_cast<int>(i) + 1;
    hyp.score = new_score[order[i]];
    hyp.tokens = nbest.hypotheses[order[i]].tokens;
    out.hypotheses.push_back(std::move(hyp));
  }
  return out;
}

TokenSequence pick_best_translation(const NBestList &candidates,
                                    const NGramModel &lm) {
  const Hypothesis *best = nullptr;
  double best_score = 0.0;
  for (const Hypothesis &hyp : candidates.hypotheses) {
    double s = normalized_lm_score(lm, hyp.tokens);
    if (best == nullptr || s > best_score) {
      best = &hyp;
      best_score = s;
    }
  }
  if (best == nullptr) throw Error("pick_best_translation on an empty list");
  return best->tokens;
}

}  // namespace stpipe
