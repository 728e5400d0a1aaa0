// stpipe/nbest.h
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

#ifndef STPIPE_NBEST_H_
#define STPIPE_NBEST_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "stpipe/types.h"

namespace stpipe {

struct Hypothesis {
  int rank = 0;         // 1-based
  double score = 0.0;   // pseudo log-likelihood; non-increasing with rank
  TokenSequence tokens;
};

// Ranked hypotheses for one utterance. Ranks are contiguous from 1 and
// scores never increase with rank.
struct NBestList {
  std::string utt_id;
  std::vector<Hypothesis> hypotheses;

  // Throws Error if the rank/score invariants do not hold.
  void validate() const;
};

// Shared n-best TSV: one hypothesis per line,
// utt_id<TAB>rank<TAB>score<TAB>space-joined tokens.
void write_nbest(std::ostream &out, const NBestList &list);

// Reads consecutive lines of one utterance; empty optional-like result is
// signalled by returning false. Validates each list.
class NBestReader {
 public:
  explicit NBestReader(std::istream &in) : in_(in) {}

  bool next(NBestList &list);

 private:
  std::istream &in_;
  std::string pending_line_;
  bool has_pending_ = false;
  size_t line_no_ = 0;
};

std::vector<NBestList> read_nbest_file(const std::string &path);
void write_nbest_file(const std::string &path,
                      const std::vector<NBestList> &lists);

}  // namespace stpipe

#endif  // STPIPE_NBEST_H_
