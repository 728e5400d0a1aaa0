// stpipe/recase.cc
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

#include "stpipe/recase.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "stpipe/textnorm.h"
#include "stpipe/utf8.h"

namespace stpipe {

const std::vector<RecaserModel::CasedForm> *RecaserModel::forms(
    const std::string &lower) const {
  auto it = form_table_.find(lower);
  return it == form_table_.end() ? nullptr : &it->second;
}

RecaserModel train_recaser(const std::vector<TokenSequence> &cased_corpus) {
  if (cased_corpus.empty()) {
    throw EmptyCorpusError("train_recaser given no sentences");
  }
  RecaserModel model;
  std::unordered_map<std::string, std::unordered_map<std::string, uint64_t>>
      counts;
  for (const TokenSequence &sent : cased_corpus) {
    for (const std::string &tok : sent) {
      ++counts[utf8::lowercase(tok)][tok];
    }
  }
  for (auto &[lower, by_form] : counts) {
    std::vector<RecaserModel::CasedForm> forms;
    forms.reserve(by_form.size());
    for (auto &[form, count] : by_form) forms.push_back({form, count});
    std::sort(forms.begin(), forms.end(), [](const auto &a, const auto &b) {
      if (a.count != b.count) return a.count > b.count;
      return a.form < b.form;
    });
    model.form_table_.emplace(lower, std::move(forms));
  }
  model.context_lm_ = train_lm(cased_corpus, 3, {0, 0, 0});
  return model;
}

namespace {

// Uppercases the first letter when the case pair round-trips (so the
// lowercase round-trip invariant survives, e.g. sharp s stays put).
std::string capitalize_initial(const std::string &token) {
  size_t pos = 0;
  utf8::CodePoint first = utf8::decode(token, pos);
  utf8::CodePoint upper = utf8::to_upper(first);
  if (upper == first || utf8::to_lower(upper) != first) return token;
  std::string out;
  utf8::encode(upper, out);
  out += token.substr(pos);
  return out;
}

}  // namespace

TokenSequence viterbi_casing(const RecaserModel &model,
                             const TokenSequence &tokens) {
  const size_t m = tokens.size();
  TokenSequence result;
  if (m > 0) {
    const NGramModel &lm = model.context_lm();

    // Per-token alternatives in canonical order (count desc, form asc);
    // unseen tokens pass through as their own single alternative.
    std::vector<std::vector<std::string>> alts(m);
    std::vector<std::vector<uint32_t>> alt_ids(m);
    for (size_t i = 0; i < m; ++i) {
      const auto *forms = model.forms(tokens[i]);
      if (forms == nullptr || forms->empty()) {
        alts[i].push_back(tokens[i]);
      } else {
        for (const auto &f : *forms) alts[i].push_back(f.form);
      }
      for (const std::string &form : alts[i]) {
        alt_ids[i].push_back(lm.word_id(form));
      }
    }

    // Viterbi with state (choice at i-1, choice at i); ties keep the first
    // maximum in canonical order, so more frequent forms win equal scores.
    const double kWorst = -1e30;
    std::vector<uint32_t> ctx;
    std::vector<double> dp, next_dp;
    std::vector<std::vector<int>> back(m);
    size_t prev_n = 1;  // virtual predecessor at position 0
    dp.assign(alts[0].size(), 0.0);
    for (size_t c = 0; c < alts[0].size(); ++c) {
      ctx = {lm.bos_id()};
      dp[c] = lm.cond_logp10(ctx, alt_ids[0][c]);
    }
    for (size_t i = 1; i < m; ++i) {
      const size_t pn = alts[i - 1].size();
      const size_t cn = alts[i].size();
      next_dp.assign(pn * cn, kWorst);
      back[i].assign(pn * cn, 0);
      for (size_t p = 0; p < pn; ++p) {
        for (size_t c = 0; c < cn; ++c) {
          double best = kWorst;
          int best_pp = 0;
          for (size_t pp = 0; pp < prev_n; ++pp) {
            const double prev_score =
                (i == 1) ? dp[p] : dp[pp * pn + p];
            if (i == 1 && pp > 0) break;
            if (i == 1) {
              ctx = {lm.bos_id(), alt_ids[0][p]};
            } else {
              ctx = {alt_ids[i - 2][pp], alt_ids[i - 1][p]};
            }
            const double s =
                prev_score + lm.cond_logp10(ctx, alt_ids[i][c]);
            if (s > best) {
              best = s;
              best_pp = static_cast<int>(pp);
            }
          }
          next_dp[p * cn + c] = best;
          back[i][p * cn + c] = best_pp;
        }
      }
      dp.swap(next_dp);
      prev_n = pn;
    }

    // Close with the sentence-end event and pick the best final state.
    size_t best_state = 0;
    double best_total = kWorst;
    const size_t last_cn = alts[m - 1].size();
    for (size_t s = 0; s < dp.size(); ++s) {
      if (m == 1) {
        ctx = {lm.bos_id(), alt_ids[0][s]};
      } else {
        const size_t p = s / last_cn, c = s % last_cn;
        ctx = {alt_ids[m - 2][p], alt_ids[m - 1][c]};
      }
      const double total = dp[s] + lm.cond_logp10(ctx, lm.eos_id());
      if (total > best_total) {
        best_total = total;
        best_state = s;
      }
    }

    // Backtrace.
    std::vector<size_t> choice(m, 0);
    if (m == 1) {
      choice[0] = best_state;
    } else {
      size_t state = best_state;
      for (size_t i = m - 1; i >= 1; --i) {
        const size_t cn = alts[i].size();
        choice[i] = state % cn;
        const size_t p = state / cn;
        const size_t pp = static_cast<size_t>(back[i][state]);
        choice[i - 1] = p;
        if (i == 1) break;
        state = pp * alts[i - 1].size() + p;
      }
    }
    result.reserve(m);
    for (size_t i = 0; i < m; ++i) result.push_back(alts[i][choice[i]]);
  }
  return result;
}

TokenSequence recase(const RecaserModel &model, const TokenSequence &tokens) {
  TokenSequence result = viterbi_casing(model, tokens);
  // Sentence-initial capitalization, applied after the search.
  for (std::string &tok : result) {
    size_t pos = 0;
    if (utf8::is_letter(utf8::decode(tok, pos))) {
      tok = capitalize_initial(tok);
      break;
    }
  }
  return result;
}

void RecaserModel::save(std::ostream &out) const {
  out << "#recase v1\n";
  std::map<std::string, const std::vector<CasedForm> *> sorted;
  for (const auto &[lower, forms] : form_table_) sorted[lower] = &forms;
  for (const auto &[lower, forms] : sorted) {
    for (const CasedForm &f : *forms) {
      out << lower << '\t' << f.form << '\t' << f.count << '\n';
    }
  }
  out << "#arpa\n";
  context_lm_.save_arpa(out);
}

void RecaserModel::save_file(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write recaser model: " + path);
  save(out);
}

RecaserModel RecaserModel::load(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) || line != "#recase v1") {
    throw ParseError("recaser model missing '#recase v1' header");
  }
  RecaserModel model;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line == "#arpa") break;
    if (line.empty()) continue;
    size_t t1 = line.find('\t');
    size_t t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw ParseError("recaser model line " + std::to_string(line_no) +
                       ": expected lower<TAB>cased<TAB>count");
    }
    CasedForm f;
    f.form = line.substr(t1 + 1, t2 - t1 - 1);
    try {
      f.count = std::stoull(line.substr(t2 + 1));
    } catch (const std::exception &) {
      throw ParseError("recaser model line " + std::to_string(line_no) +
                       ": bad count");
    }
    model.form_table_[line.substr(0, t1)].push_back(std::move(f));
  }
  for (auto &[lower, forms] : model.form_table_) {
    std::sort(forms.begin(), forms.end(), [](const auto &a, const auto &b) {
      if (a.count != b.count) return a.count > b.count;
      return a.form < b.form;
    });
  }
  model.context_lm_ = NGramModel::load_arpa(in);
  return model;
}

RecaserModel RecaserModel::load_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read recaser model: " + path);
  return RecaserModel::load(in);
}

}  // namespace stpipe
