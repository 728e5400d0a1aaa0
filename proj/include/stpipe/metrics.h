// stpipe/metrics.h
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

#ifndef STPIPE_METRICS_H_
#define STPIPE_METRICS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stpipe/types.h"

namespace stpipe {

struct BleuScore {
  double score = 0.0;  // 0-100 scale
  std::array<double, 4> precisions = {0, 0, 0, 0};
  double brevity_penalty = 1.0;
  uint64_t hyp_tokens = 0;
  uint64_t ref_tokens = 0;
  // Some n-gram order had no match (or no n-grams at all) and smoothing was
  // off; the score is 0 by definition.
  bool zero_precision = false;
};

struct WerScore {
  double wer = 0.0;  // (S+D+I) / reference tokens; can exceed 1
  uint64_t substitutions = 0;
  uint64_t deletions = 0;
  uint64_t insertions = 0;
  uint64_t ref_tokens = 0;

  uint64_t edits() const { return substitutions + deletions + insertions; }
};

// Corpus-level evaluation results; only the metrics that were computed are
// present. Serializes to a flat key-value JSON document and to an aligned
// text table.
struct EvalReport {
  size_t n_sentences = 0;
  std::optional<BleuScore> bleu;     // case-sensitive
  std::optional<BleuScore> bleu_lc;  // case-insensitive
  std::optional<WerScore> wer;

  std::string to_json() const;
  std::string to_table() const;
};

// Minimal-edit alignment of one hypothesis against one reference with unit
// costs; ties prefer substitutions over deletions over insertions.
WerScore align_edits(const TokenSequence &hyp, const TokenSequence &ref);

// Corpus WER: total edits over total reference tokens. Throws
// AlignmentMismatchError on sentence-count mismatch and EmptyReferenceError
// when the references contain no tokens at all.
WerScore corpus_wer(const std::vector<TokenSequence> &hyp,
                    const std::vector<TokenSequence> &ref);

// Corpus BLEU with clipped modified n-gram precisions for n = 1..4 and the
// standard brevity penalty; single reference. With case_sensitive off, both
// sides are lowercased first. smooth enables add-one smoothing on the
// counts for n >= 2; without it any zero precision yields score 0.
BleuScore corpus_bleu(const std::vector<TokenSequence> &hyp,
                      const std::vector<TokenSequence> &ref,
                      bool case_sensitive = true, bool smooth = false);

EvalReport wer_report(const std::vector<TokenSequence> &hyp,
                      const std::vector<TokenSequence> &ref);

EvalReport bleu_report(const std::vector<TokenSequence> &hyp,
                       const std::vector<TokenSequence> &ref,
                       bool case_sensitive = true, bool smooth = false);

}  // namespace stpipe

#endif  // STPIPE_METRICS_H_
