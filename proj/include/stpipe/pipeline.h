// stpipe/pipeline.h
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

#ifndef STPIPE_PIPELINE_H_
#define STPIPE_PIPELINE_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stpipe/metrics.h"
#include "stpipe/types.h"

namespace stpipe {

// One stage descriptor: a contractual name plus stage parameters.
// Stage names and their artifact kinds:
//   normalize            text -> text    punctuation normalization + tokenize
//   asr-format           text -> text    deterministic ASR surface form
//   noise                text -> nbest   (or text when nbest=1, emit="text")
//   bpe-learn            text -> text    side artifact bpe.model
//   bpe-apply            text -> text
//   select               nbest -> text   expands the carried target side
//   rerank               nbest -> nbest
//   translate-external   text -> text
//   revert-bpe           text -> text
//   recase               text -> text
//   evaluate             text -> text    side artifacts report.json/.txt
struct StageConfig {
  std::string name;
  nlohmann::json params;

  // Missing keys yield the fallback.
  std::string str(const std::string &key, const std::string &fallback = "") const;
  double num(const std::string &key, double fallback) const;
  bool flag(const std::string &key, bool fallback) const;
};

struct PipelineConfig {
  std::string input;                  // source text, one sentence per line
  std::optional<std::string> target;  // line-aligned target side
  uint64_t seed = 0;
  bool copy_inputs = false;  // copy instead of symlink into the run dir
  std::vector<StageConfig> stages;

  static PipelineConfig from_json(const nlohmann::json &doc);
  static PipelineConfig load_file(const std::string &path);

  // Checks stage names and that each stage's input kind matches its
  // predecessor's output kind. Throws ParseError on violations.
  void validate() const;
};

struct StageRecord {
  int index = 0;
  std::string name;
  size_t rows_in = 0;
  size_t rows_out = 0;
  size_t rows_dropped = 0;
  std::map<std::string, std::string> outputs;  // run-dir-relative -> sha256
};

// Deterministic run record: input hashes, config snapshot, per-stage row
// counts and artifact hashes. Wall-clock durations go to a separate
// timings.txt sidecar so two identical runs produce identical manifests.
struct Manifest {
  std::string version;
  nlohmann::ordered_json config_snapshot;
  std::map<std::string, std::string> input_hashes;
  std::vector<StageRecord> stages;
  std::optional<std::string> failed_stage;

  nlohmann::ordered_json to_json() const;
};

struct RunResult {
  std::string run_dir;
  Manifest manifest;
  std::vector<EvalReport> reports;
};

// Executes the stage chain, writing artifacts under
// run_dir/<index>-<name>/, then manifest.json (atomically) and timings.txt.
// The first failing stage aborts the run; the manifest still records the
// stages that completed. Fully deterministic given config + seed.
RunResult run_pipeline(const PipelineConfig &config,
                       const std::string &run_dir);

}  // namespace stpipe

#endif  // STPIPE_PIPELINE_H_
