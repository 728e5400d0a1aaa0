// stpipe/corpus.cc
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

#include "stpipe/corpus.h"

#include <fstream>

namespace stpipe {

std::vector<std::string> read_lines(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_lines(const std::string &path,
                 const std::vector<std::string> &lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  for (const std::string &line : lines) out << line << '\n';
}

void read_parallel(const ParallelCorpus &corpus,
                   const std::function<void(const std::string &,
                                            const std::string &)> &fn) {
  std::ifstream src(corpus.source_path, std::ios::binary);
  if (!src) throw Error("cannot read file: " + corpus.source_path);
  std::ifstream tgt(corpus.target_path, std::ios::binary);
  if (!tgt) throw Error("cannot read file: " + corpus.target_path);

  std::string s, t;
  size_t line_no = 0;
  while (true) {
    bool have_s = static_cast<bool>(std::getline(src, s));
    bool have_t = static_cast<bool>(std::getline(tgt, t));
    ++line_no;
    if (have_s != have_t) {
      throw AlignmentMismatchError("corpus '" + corpus.name + "' (" +
                                   corpus.source_path + ", " +
                                   corpus.target_path +
                                   ") diverges at line " +
                                   std::to_string(line_no));
    }
    if (!have_s) break;
    if (!s.empty() && s.back() == '\r') s.pop_back();
    if (!t.empty() && t.back() == '\r') t.pop_back();
    fn(s, t);
  }
}

std::vector<std::pair<std::string, std::string>> read_parallel_pairs(
    const ParallelCorpus &corpus) {
  std::vector<std::pair<std::string, std::string>> pairs;
  read_parallel(corpus, [&](const std::string &s, const std::string &t) {
    pairs.emplace_back(s, t);
  });
  return pairs;
}

void write_parallel(
    const ParallelCorpus &corpus,
    const std::vector<std::pair<std::string, std::string>> &pairs) {
  std::ofstream src(corpus.source_path, std::ios::binary);
  if (!src) throw Error("cannot write file: " + corpus.source_path);
  std::ofstream tgt(corpus.target_path, std::ios::binary);
  if (!tgt) throw Error("cannot write file: " + corpus.target_path);
  for (const auto &[s, t] : pairs) {
    src << s << '\n';
    tgt << t << '\n';
  }
}

size_t mix_corpora(const std::vector<std::pair<ParallelCorpus, int>> &parts,
                   const ParallelCorpus &out) {
  if (parts.empty()) throw std::invalid_argument("mix_corpora needs parts");
  std::ofstream src(out.source_path, std::ios::binary);
  if (!src) throw Error("cannot write file: " + out.source_path);
  std::ofstream tgt(out.target_path, std::ios::binary);
  if (!tgt) throw Error("cannot write file: " + out.target_path);

  size_t total = 0;
  for (const auto &[part, repeat] : parts) {
    if (repeat < 1) throw std::invalid_argument("repeat must be positive");
    for (int r = 0; r < repeat; ++r) {
      read_parallel(part, [&](const std::string &s, const std::string &t) {
        src << s << '\n';
        tgt << t << '\n';
        ++total;
      });
    }
  }
  return total;
}

}  // namespace stpipe
