// stpipe/asrsim.h
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

#ifndef STPIPE_ASRSIM_H_
#define STPIPE_ASRSIM_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "stpipe/nbest.h"
#include "stpipe/types.h"

namespace stpipe {

// One confusion-table replacement option.
struct Confusion {
  TokenSequence replacement;
  double weight = 1.0;
};

// Stochastic confusion/noise model standing in for a real recognizer's
// error behaviour. Errors are drawn per token site; substitutions prefer a
// confusion-table match ("stasi" -> "stars he") and otherwise pick a filler
// token. The same keyed draws drive every rank, with higher ranks admitting
// more of them, so lower-ranked hypotheses only ever add errors.
struct NoiseModel {
  double target_wer = 0.0;        // per-token error rate of the top rank
  double sub_share = 0.7;         // substitution / deletion / insertion mix
  double del_share = 0.15;
  double ins_share = 0.15;
  // Source n-gram (space-joined tokens) -> replacement options.
  std::map<std::string, std::vector<Confusion>> confusions;
  TokenSequence filler_vocab;
  uint64_t seed = 0;

  // Throws InvalidNoiseModelError if any invariant is violated.
  void validate() const;
};

// The confusion pairs the toolkit ships with: a couple of recognizer-style
// multi-word confusions plus common English homophones.
std::map<std::string, std::vector<Confusion>> default_confusions();

// "source<TAB>replacement<TAB>weight" per line; weight defaults to 1.
std::map<std::string, std::vector<Confusion>> load_confusions(
    std::istream &in);
std::map<std::string, std::vector<Confusion>> load_confusions_file(
    const std::string &path);

// Deterministic ASR surface form: lowercase, numbers spelled out, then
// punctuation stripped (dotted acronyms split into letters). Idempotent.
TokenSequence to_asr_format(const TokenSequence &tokens);

// n scored hypotheses for one utterance. Rank r errs at per-site rate
// target_wer * (1 + 0.1 * (r - 1)), capped at 0.9; the score is the negated
// count of introduced edits with a -0.01 * rank tie-breaker. Output is a
// pure function of (noise.seed, utt_id, tokens, n).
NBestList generate_nbest(const TokenSequence &tokens, int n,
                         const NoiseModel &noise, const std::string &utt_id);

struct TransformStats {
  size_t sentences = 0;
  size_t empty_outputs = 0;  // lines whose ASR-format text came out empty
};

// Applies to_asr_format + generate_nbest to every input line and streams
// n-best TSV to out. Line i (1-based) gets utt id "<utt_prefix><i:06d>".
// Sentence-parallel over `workers` threads; output bytes do not depend on
// the worker count.
TransformStats transform_corpus(std::istream &in, std::ostream &out,
                                const NoiseModel &noise, int nbest,
                                int workers = 1,
                                const std::string &utt_prefix = "utt-");

}  // namespace stpipe

#endif  // STPIPE_ASRSIM_H_
