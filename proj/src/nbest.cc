// stpipe/nbest.cc
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

#include "stpipe/nbest.h"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace stpipe {

void NBestList::validate() const {
  if (hypotheses.empty()) {
    throw Error("n-best list '" + utt_id + "' has no hypotheses");
  }
  for (size_t i = 0; i < hypotheses.size(); ++i) {
    if (hypotheses[i].rank != static_cast<int>(i) + 1) {
      throw Error("n-best list '" + utt_id + "' has non-contiguous ranks");
    }
    if (i > 0 && hypotheses[i].score > hypotheses[i - 1].score) {
      throw Error("n-best list '" + utt_id + "' has increasing scores");
    }
  }
}

void write_nbest(std::ostream &out, const NBestList &list) {
  char score_buf[40];
  for (const Hypothesis &hyp : list.hypotheses) {
    std::snprintf(score_buf, sizeof(score_buf), "%.6f", hyp.score);
    out << list.utt_id << '\t' << hyp.rank << '\t' << score_buf << '\t'
        << join_tokens(hyp.tokens) << '\n';
  }
}

bool NBestReader::next(NBestList &list) {
  list.utt_id.clear();
  list.hypotheses.clear();
  std::string line;
  while (true) {
    if (has_pending_) {
      line = pending_line_;
      has_pending_ = false;
    } else if (!std::getline(in_, line)) {
      break;
    }
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::string fields[4];
    size_t start = 0;
    for (int f = 0; f < 3; ++f) {
      size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        throw ParseError("n-best line " + std::to_string(line_no_) +
                         ": expected 4 tab-separated fields");
      }
      fields[f] = line.substr(start, tab - start);
      start = tab + 1;
    }
    fields[3] = line.substr(start);

    if (!list.utt_id.empty() && fields[0] != list.utt_id) {
      pending_line_ = line;
      has_pending_ = true;
      --line_no_;
      break;
    }
    list.utt_id = fields[0];
    Hypothesis hyp;
    try {
      hyp.rank = std::stoi(fields[1]);
      hyp.score = std::stod(fields[2]);
    } catch (const std::exception &) {
      throw ParseError("n-best line " + std::to_string(line_no_) +
                       ": bad rank or score");
    }
    hyp.tokens = split_tokens(fields[3]);
    list.hypotheses.push_back(std::move(hyp));
  }
  if (list.hypotheses.empty()) return false;
  list.validate();
  return true;
}

std::vector<NBestList> read_nbest_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read n-best file: " + path);
  std::vector<NBestList> lists;
  NBestReader reader(in);
  NBestList list;
  while (reader.next(list)) lists.push_back(list);
  return lists;
}

void write_nbest_file(const std::string &path,
                      const std::vector<NBestList> &lists) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write n-best file: " + path);
  for (const NBestList &list : lists) write_nbest(out, list);
}

}  // namespace stpipe
