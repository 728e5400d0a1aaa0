// stpipe/recase.h
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

#ifndef STPIPE_RECASE_H_
#define STPIPE_RECASE_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "stpipe/ngramlm.h"
#include "stpipe/types.h"

namespace stpipe {

// Case restoration: a table of observed cased forms per lowercase token,
// disambiguated by a cased trigram LM via Viterbi search.
class RecaserModel {
 public:
  struct CasedForm {
    std::string form;
    uint64_t count = 0;
  };

  // Observed forms for a lowercase key, most frequent first; empty when the
  // token was never seen.
  const std::vector<CasedForm> *forms(const std::string &lower) const;

  const NGramModel &context_lm() const { return context_lm_; }

  void save(std::ostream &out) const;
  void save_file(const std::string &path) const;
  static RecaserModel load(std::istream &in);
  static RecaserModel load_file(const std::string &path);

 private:
  friend RecaserModel train_recaser(const std::vector<TokenSequence> &);

  std::unordered_map<std::string, std::vector<CasedForm>> form_table_;
  NGramModel context_lm_;
};

// Tabulates every observed casing per lowercase key and trains the cased
// trigram context model. Throws EmptyCorpusError on an empty corpus.
RecaserModel train_recaser(const std::vector<TokenSequence> &cased_corpus);

// Viterbi over the per-token cased alternatives, scored by the context LM;
// ties keep the first maximum in canonical order, so more frequent forms
// win. Unknown tokens pass through as themselves.
TokenSequence viterbi_casing(const RecaserModel &model,
                             const TokenSequence &tokens);

// viterbi_casing plus an uppercase initial on the first alphabetic token.
// Token count is preserved and lowercasing the output recovers the input.
TokenSequence recase(const RecaserModel &model, const TokenSequence &tokens);

}  // namespace stpipe

#endif  // STPIPE_RECASE_H_
