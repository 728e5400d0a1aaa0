// stpipe/asrsim.cc
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

#include "stpipe/asrsim.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "stpipe/rng.h"
#include "stpipe/textnorm.h"

namespace stpipe {

namespace {

constexpr size_t kMaxConfusionSpan = 5;
constexpr double kRankEscalation = 0.1;
constexpr double kRateCap = 0.9;

}  // namespace

void NoiseModel::validate() const {
  if (!(target_wer >= 0.0 && target_wer < 1.0)) {
    throw InvalidNoiseModelError("target_wer must lie in [0,1)");
  }
  if (sub_share < 0 || del_share < 0 || ins_share < 0) {
    throw InvalidNoiseModelError("error mix shares must be non-negative");
  }
  if (std::abs(sub_share + del_share + ins_share - 1.0) > 1e-9) {
    throw InvalidNoiseModelError("error mix must sum to 1");
  }
  for (const auto &[source, options] : confusions) {
    if (options.empty()) {
      throw InvalidNoiseModelError("confusion '" + source + "' has no options");
    }
    for (const Confusion &c : options) {
      if (c.weight <= 0) {
        throw InvalidNoiseModelError("confusion '" + source +
                                     "' has a non-positive weight");
      }
      if (c.replacement.empty()) {
        throw InvalidNoiseModelError("confusion '" + source +
                                     "' has an empty replacement");
      }
    }
  }
  if (target_wer > 0.0 && filler_vocab.empty()) {
    throw InvalidNoiseModelError("non-zero noise needs a filler vocabulary");
  }
}

std::map<std::string, std::vector<Confusion>> default_confusions() {
  static const std::pair<const char *, const char *> kPairs[] = {
      {"stasi", "stars he"}, {"e u", "you"},
      {"there", "their"},    {"their", "there"},
      {"to", "two"},         {"two", "to"},
      {"too", "to"},         {"for", "four"},
      {"four", "for"},       {"know", "no"},
      {"no", "know"},        {"right", "write"},
      {"write", "right"},    {"hear", "here"},
      {"here", "hear"},      {"whether", "weather"},
      {"weather", "whether"}, {"sea", "see"},
      {"see", "sea"},        {"one", "won"},
      {"won", "one"},        {"where", "wear"},
  };
  std::map<std::string, std::vector<Confusion>> table;
  for (const auto &[src, repl] : kPairs) {
    table[src].push_back({split_tokens(repl), 1.0});
  }
  return table;
}

std::map<std::string, std::vector<Confusion>> load_confusions(
    std::istream &in) {
  std::map<std::string, std::vector<Confusion>> table;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    size_t t1 = line.find('\t');
    if (t1 == std::string::npos) {
      throw ParseError("confusion table line " + std::to_string(line_no) +
                       ": expected source<TAB>replacement[<TAB>weight]");
    }
    size_t t2 = line.find('\t', t1 + 1);
    std::string source = line.substr(0, t1);
    std::string repl =
        t2 == std::string::npos ? line.substr(t1 + 1)
                                : line.substr(t1 + 1, t2 - t1 - 1);
    double weight = 1.0;
    if (t2 != std::string::npos) {
      try {
        weight = std::stod(line.substr(t2 + 1));
      } catch (const std::exception &) {
        throw ParseError("confusion table line " + std::to_string(line_no) +
                         ": bad weight");
      }
    }
    Confusion c;
    c.replacement = split_tokens(repl);
    c.weight = weight;
    table[join_tokens(split_tokens(source))].push_back(std::move(c));
  }
  return table;
}

std::map<std::string, std::vector<Confusion>> load_confusions_file(
    const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read confusion table: " + path);
  return load_confusions(in);
}

TokenSequence to_asr_format(const TokenSequence &tokens) {
  return strip_punct(verbalize_numbers(lowercase(tokens)));
}

namespace {

enum class ErrorType { kSubstitute, kDelete, kInsert };

// One error opportunity: a span of clean tokens, usually length one, or a
// whole confusion-table source match. All random decisions for a site are
// drawn once, keyed by (seed, utt_id, site index), and shared by every
// rank; rank r merely admits sites whose error draw falls under its rate.
// Error sets therefore grow with rank and edit counts never decrease.
struct Site {
  size_t begin = 0;
  size_t length = 1;
  const std::vector<Confusion> *options = nullptr;

  double error_draw = 0.0;
  ErrorType type = ErrorType::kSubstitute;
  double option_draw = 0.0;
  uint64_t filler_pick = 0;
  uint64_t filler_salt = 0;
};

std::vector<Site> plan_sites(const TokenSequence &tokens,
                             const NoiseModel &noise,
                             const std::string &utt_id) {
  const uint64_t base =
      Rng::mix(noise.seed, Rng::hash_string(utt_id));
  std::vector<Site> sites;
  size_t i = 0;
  std::string joined;
  while (i < tokens.size()) {
    Site site;
    site.begin = i;
    // Longest confusion-source match wins the site.
    const size_t max_span = std::min(kMaxConfusionSpan, tokens.size() - i);
    for (size_t span = max_span; span >= 1; --span) {
      joined.clear();
      for (size_t j = 0; j < span; ++j) {
        if (j) joined += ' ';
        joined += tokens[i + j];
      }
      auto it = noise.confusions.find(joined);
      if (it != noise.confusions.end()) {
        site.length = span;
        site.options = &it->second;
        break;
      }
    }
    Rng rng(Rng::mix(base, sites.size()));
    site.error_draw = rng.uniform();
    const double type_draw = rng.uniform();
    if (type_draw < noise.sub_share) {
      site.type = ErrorType::kSubstitute;
    } else if (type_draw < noise.sub_share + noise.del_share) {
      site.type = ErrorType::kDelete;
    } else {
      site.type = ErrorType::kInsert;
    }
    site.option_draw = rng.uniform();
    site.filler_pick = rng.next();
    site.filler_salt = rng.next();
    sites.push_back(site);
    i += site.length;
  }
  return sites;
}

const Confusion &pick_option(const std::vector<Confusion> &options,
                             double draw) {
  double total = 0.0;
  for (const Confusion &c : options) total += c.weight;
  double at = draw * total;
  for (const Confusion &c : options) {
    at -= c.weight;
    if (at < 0) return c;
  }
  return options.back();
}

// A filler differing from `avoid` when the vocabulary allows it.
const std::string &pick_filler(const TokenSequence &vocab, uint64_t pick,
                               uint64_t salt, const std::string &avoid) {
  const std::string &first = vocab[pick % vocab.size()];
  if (first != avoid || vocab.size() == 1) return first;
  const std::string &second = vocab[salt % vocab.size()];
  return second != avoid ? second : first;
}

}  // namespace

NBestList generate_nbest(const TokenSequence &tokens, int n,
                         const NoiseModel &noise, const std::string &utt_id) {
  if (n < 1) throw std::invalid_argument("n-best size must be positive");
  noise.validate();

  const std::vector<Site> sites = plan_sites(tokens, noise, utt_id);

  NBestList list;
  list.utt_id = utt_id;
  list.hypotheses.reserve(n);
  for (int rank = 1; rank <= n; ++rank) {
    double rate = noise.target_wer * (1.0 + kRankEscalation * (rank - 1));
    rate = std::max(noise.target_wer, std::min(rate, kRateCap));

    Hypothesis hyp;
    hyp.rank = rank;
    size_t edits = 0;
    for (const Site &site : sites) {
      const bool errs = site.error_draw < rate;
      if (!errs) {
        for (size_t j = 0; j < site.length; ++j) {
          hyp.tokens.push_back(tokens[site.begin + j]);
        }
        continue;
      }
      switch (site.type) {
        case ErrorType::kSubstitute:
          if (site.options != nullptr) {
            const Confusion &c = pick_option(*site.options, site.option_draw);
            for (const std::string &tok : c.replacement) {
              hyp.tokens.push_back(tok);
            }
            edits += std::max(site.length, c.replacement.size());
          } else {
            hyp.tokens.push_back(pick_filler(noise.filler_vocab,
                                             site.filler_pick,
                                             site.filler_salt,
                                             tokens[site.begin]));
            edits += site.length;  // length is 1 here
          }
          break;
        case ErrorType::kDelete:
          edits += site.length;
          break;
        case ErrorType::kInsert:
          hyp.tokens.push_back(pick_filler(noise.filler_vocab,
                                           site.filler_pick, site.filler_salt,
                                           std::string()));
          for (size_t j = 0; j < site.length; ++j) {
            hyp.tokens.push_back(tokens[site.begin + j]);
          }
          edits += 1;
          break;
      }
    }
    hyp.score = -static_cast<double>(edits) - 0.01 * rank;
    list.hypotheses.push_back(std::move(hyp));
  }
  list.validate();
  return list;
}

TransformStats transform_corpus(std::istream &in, std::ostream &out,
                                const NoiseModel &noise, int nbest,
                                int workers, const std::string &utt_prefix) {
  noise.validate();
  if (nbest < 1) throw std::invalid_argument("n-best size must be positive");
  if (workers < 1) workers = 1;

  TransformStats stats;
  const size_t batch_size = static_cast<size_t>(workers) * 64;
  std::vector<std::string> lines;
  std::vector<std::string> results;
  std::vector<char> came_out_empty;
  size_t next_line_no = 1;

  auto process_batch = [&]() {
    results.assign(lines.size(), {});
    came_out_empty.assign(lines.size(), 0);
    auto work = [&](size_t begin, size_t end) {
      std::ostringstream buf;
      for (size_t i = begin; i < end; ++i) {
        buf.str({});
        char utt[64];
        std::snprintf(utt, sizeof(utt), "%s%06zu", utt_prefix.c_str(),
                      next_line_no + i);
        TokenSequence clean = split_tokens(lines[i]);
        TokenSequence asr = to_asr_format(clean);
        came_out_empty[i] = asr.empty() && !clean.empty();
        write_nbest(buf, generate_nbest(asr, nbest, noise, utt));
        results[i] = buf.str();
      }
    };
    if (workers == 1 || lines.size() < 2) {
      work(0, lines.size());
    } else {
      std::vector<std::thread> threads;
      const size_t chunk = (lines.size() + workers - 1) / workers;
      for (int w = 0; w < workers; ++w) {
        size_t begin = std::min(lines.size(), w * chunk);
        size_t end = std::min(lines.size(), begin + chunk);
        if (begin < end) threads.emplace_back(work, begin, end);
      }
      for (std::thread &t : threads) t.join();
    }
    for (size_t i = 0; i < lines.size(); ++i) {
      if (came_out_empty[i]) ++stats.empty_outputs;
      out << results[i];
    }
    stats.sentences += lines.size();
    next_line_no += lines.size();
    lines.clear();
  };

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
    if (lines.size() >= batch_size) process_batch();
  }
  process_batch();
  return stats;
}

}  // namespace stpipe
