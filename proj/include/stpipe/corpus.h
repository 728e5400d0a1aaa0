// stpipe/corpus.h
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

#ifndef STPIPE_CORPUS_H_
#define STPIPE_CORPUS_H_

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "stpipe/types.h"

namespace stpipe {

// A line-aligned source/target file pair, one sentence per line.
struct ParallelCorpus {
  std::string source_path;
  std::string target_path;
  std::string name;  // label such as "ted-asr-top10"
};

// Reads a text file into lines; tolerates CRLF, requires the file to exist.
std::vector<std::string> read_lines(const std::string &path);

// Writes lines LF-terminated.
void write_lines(const std::string &path,
                 const std::vector<std::string> &lines);

// Streams sentence pairs in order. Throws AlignmentMismatchError naming the
// first offending line (min(len) + 1) when the files disagree in length.
void read_parallel(const ParallelCorpus &corpus,
                   const std::function<void(const std::string &source,
                                            const std::string &target)> &fn);

std::vector<std::pair<std::string, std::string>> read_parallel_pairs(
    const ParallelCorpus &corpus);

void write_parallel(const ParallelCorpus &corpus,
                    const std::vector<std::pair<std::string, std::string>>
                        &pairs);

// Concatenates corpora into out, each part repeated `repeat` times; the
// oversampling knob for in-domain data. Returns total line count.
size_t mix_corpora(
    const std::vector<std::pair<ParallelCorpus, int>> &parts,
    const ParallelCorpus &out);

}  // namespace stpipe

#endif  // STPIPE_CORPUS_H_
