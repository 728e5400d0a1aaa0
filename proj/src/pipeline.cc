// stpipe/pipeline.cc
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

#include "stpipe/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "stpipe/asrsim.h"
#include "stpipe/bpe.h"
#include "stpipe/corpus.h"
#include "stpipe/nbest.h"
#include "stpipe/ngramlm.h"
#include "stpipe/recase.h"
#include "stpipe/rerank.h"
#include "stpipe/sha256.h"
#include "stpipe/subprocess.h"
#include "stpipe/textnorm.h"
#include "stpipe/version.h"

namespace fs = std::filesystem;

namespace stpipe {

std::string StageConfig::str(const std::string &key,
                             const std::string &fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  return it->get<std::string>();
}

double StageConfig::num(const std::string &key, double fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  return it->get<double>();
}

bool StageConfig::flag(const std::string &key, bool fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  return it->get<bool>();
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json &doc) {
  PipelineConfig cfg;
  if (!doc.contains("input")) throw ParseError("config needs an 'input' key");
  cfg.input = doc.at("input").get<std::string>();
  if (doc.contains("target")) {
    cfg.target = doc.at("target").get<std::string>();
  }
  if (doc.contains("seed")) cfg.seed = doc.at("seed").get<uint64_t>();
  if (doc.contains("copy_inputs")) {
    cfg.copy_inputs = doc.at("copy_inputs").get<bool>();
  }
  if (!doc.contains("stages") || !doc.at("stages").is_array()) {
    throw ParseError("config needs a 'stages' array");
  }
  for (const auto &stage : doc.at("stages")) {
    StageConfig sc;
    if (!stage.contains("name")) throw ParseError("stage without a name");
    sc.name = stage.at("name").get<std::string>();
    sc.params = stage;
    sc.params.erase("name");
    cfg.stages.push_back(std::move(sc));
  }
  cfg.validate();
  return cfg;
}

PipelineConfig PipelineConfig::load_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError("config " + path + ": " + e.what());
  }
  return from_json(doc);
}

namespace {

enum class Kind { kText, kNBest };

struct StageIo {
  Kind in;
  Kind out;
};

StageIo stage_io(const StageConfig &stage) {
  const std::string &n = stage.name;
  if (n == "normalize" || n == "asr-format" || n == "bpe-learn" ||
      n == "bpe-apply" || n == "translate-external" || n == "revert-bpe" ||
      n == "recase" || n == "evaluate") {
    return {Kind::kText, Kind::kText};
  }
  if (n == "noise") {
    const bool as_text = stage.str("emit", "nbest") == "text";
    return {Kind::kText, as_text ? Kind::kText : Kind::kNBest};
  }
  if (n == "select") return {Kind::kNBest, Kind::kText};
  if (n == "rerank") return {Kind::kNBest, Kind::kNBest};
  throw ParseError("unknown stage '" + n + "'");
}

}  // namespace

void PipelineConfig::validate() const {
  if (stages.empty()) throw ParseError("config has no stages");
  Kind current = Kind::kText;
  for (const StageConfig &stage : stages) {
    StageIo io = stage_io(stage);
    if (io.in != current) {
      throw ParseError("stage '" + stage.name +
                       "' expects a different input kind than its "
                       "predecessor produces");
    }
    if (stage.name == "noise" && stage.str("emit", "nbest") == "text" &&
        stage.num("nbest", 1) != 1) {
      throw ParseError("noise stage can only emit text when nbest is 1");
    }
    current = io.out;
  }
}

nlohmann::ordered_json Manifest::to_json() const {
  nlohmann::ordered_json doc;
  doc["version"] = version;
  doc["config"] = config_snapshot;
  doc["inputs"] = input_hashes;
  doc["stages"] = nlohmann::ordered_json::array();
  for (const StageRecord &s : stages) {
    nlohmann::ordered_json rec;
    rec["index"] = s.index;
    rec["name"] = s.name;
    rec["rows_in"] = s.rows_in;
    rec["rows_out"] = s.rows_out;
    if (s.rows_dropped > 0) rec["rows_dropped"] = s.rows_dropped;
    rec["outputs"] = s.outputs;
    doc["stages"].push_back(rec);
  }
  if (failed_stage) doc["failed_stage"] = *failed_stage;
  return doc;
}

namespace {

// Mutable run state threaded through the stages.
struct RunState {
  std::string source_path;  // current primary artifact
  Kind kind = Kind::kText;
  std::optional<std::string> target_path;
  std::string last_bpe_model;
  uint64_t seed = 0;
};

size_t count_lines(const std::string &path) {
  return read_lines(path).size();
}

std::vector<TokenSequence> load_token_lines(const std::string &path) {
  std::vector<TokenSequence> out;
  for (const std::string &line : read_lines(path)) {
    out.push_back(split_tokens(line));
  }
  return out;
}

void map_lines(const std::string &in_path, const std::string &out_path,
               const std::function<std::string(const std::string &)> &fn) {
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + in_path);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + out_path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out << fn(line) << '\n';
  }
}

NoiseModel noise_from_stage(const StageConfig &stage, uint64_t seed,
                            const std::vector<std::string> &corpus_lines) {
  NoiseModel noise;
  noise.target_wer = stage.num("wer", 0.0);
  noise.sub_share = stage.num("sub_share", 0.7);
  noise.del_share = stage.num("del_share", 0.15);
  noise.ins_share = stage.num("ins_share", 0.15);
  noise.seed = seed;
  const std::string table = stage.str("confusions", "default");
  if (table == "default") {
    noise.confusions = default_confusions();
  } else if (table != "none") {
    noise.confusions = load_confusions_file(table);
  }
  // Filler vocabulary: the corpus's own most common surface forms.
  std::map<std::string, uint64_t> freq;
  for (const std::string &line : corpus_lines) {
    for (const std::string &tok : split_tokens(line)) ++freq[tok];
  }
  std::vector<std::pair<uint64_t, std::string>> ranked;
  for (const auto &[tok, count] : freq) ranked.emplace_back(count, tok);
  std::sort(ranked.begin(), ranked.end(), [](const auto &a, const auto &b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  const size_t keep = std::min<size_t>(ranked.size(), 200);
  for (size_t i = 0; i < keep; ++i) {
    noise.filler_vocab.push_back(ranked[i].second);
  }
  noise.validate();
  return noise;
}

}  // namespace

RunResult run_pipeline(const PipelineConfig &config,
                       const std::string &run_dir) {
  config.validate();
  fs::create_directories(run_dir);

  RunResult result;
  result.run_dir = run_dir;
  Manifest &manifest = result.manifest;
  manifest.version = kVersion;
  {
    nlohmann::ordered_json snapshot;
    snapshot["input"] = config.input;
    if (config.target) snapshot["target"] = *config.target;
    snapshot["seed"] = config.seed;
    snapshot["copy_inputs"] = config.copy_inputs;
    snapshot["stages"] = nlohmann::ordered_json::array();
    for (const StageConfig &s : config.stages) {
      nlohmann::ordered_json st = s.params;
      st["name"] = s.name;
      snapshot["stages"].push_back(st);
    }
    manifest.config_snapshot = snapshot;
  }

  manifest.input_hashes[config.input] = sha256_file_hex(config.input);
  if (config.target) {
    manifest.input_hashes[*config.target] = sha256_file_hex(*config.target);
  }

  // Materialize inputs into the run dir per the config flag.
  {
    fs::path inputs_dir = fs::path(run_dir) / "inputs";
    fs::create_directories(inputs_dir);
    auto materialize = [&](const std::string &path) {
      fs::path dst = inputs_dir / fs::path(path).filename();
      std::error_code ec;
      fs::remove(dst, ec);
      if (config.copy_inputs) {
        fs::copy_file(path, dst, fs::copy_options::overwrite_existing);
      } else {
        fs::create_symlink(fs::absolute(path), dst, ec);
        // Symlinks may be unsupported; fall back to a copy.
        if (ec) fs::copy_file(path, dst, fs::copy_options::overwrite_existing);
      }
    };
    materialize(config.input);
    if (config.target) materialize(*config.target);
  }

  RunState state;
  state.source_path = config.input;
  state.target_path = config.target;
  state.seed = config.seed;

  std::ofstream timings(fs::path(run_dir) / "timings.txt");
  const auto run_start = std::chrono::steady_clock::now();

  auto finalize_manifest = [&]() {
    const fs::path manifest_path = fs::path(run_dir) / "manifest.json";
    const fs::path tmp = fs::path(run_dir) / "manifest.json.tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      out << manifest.to_json().dump(2) << "\n";
    }
    fs::rename(tmp, manifest_path);
    const auto total = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - run_start)
                           .count();
    timings << "total\t" << total << "s\n";
  };

  for (size_t idx = 0; idx < config.stages.size(); ++idx) {
    const StageConfig &stage = config.stages[idx];
    char dir_name[64];
    std::snprintf(dir_name, sizeof(dir_name), "%02zu-%s", idx + 1,
                  stage.name.c_str());
    const fs::path stage_dir = fs::path(run_dir) / dir_name;
    fs::create_directories(stage_dir);

    StageRecord record;
    record.index = static_cast<int>(idx) + 1;
    record.name = stage.name;
    record.rows_in = count_lines(state.source_path);

    const auto stage_start = std::chrono::steady_clock::now();
    try {
      const std::string out_ext =
          stage_io(stage).out == Kind::kNBest ? ".nbest" : ".txt";
      const std::string out_path = (stage_dir / ("out" + out_ext)).string();

      if (stage.name == "normalize") {
        map_lines(state.source_path, out_path, [](const std::string &line) {
          return join_tokens(tokenize(normalize_punct(line)));
        });
        state.source_path = out_path;
      } else if (stage.name == "asr-format") {
        if (state.target_path) {
          // Lines whose transform comes out empty are recognizer failures;
          // drop them on both sides and account for them.
          std::vector<std::string> src = read_lines(state.source_path);
          std::vector<std::string> tgt = read_lines(*state.target_path);
          if (src.size() != tgt.size()) {
            throw AlignmentMismatchError(
                "source/target line counts diverge before asr-format");
          }
          std::ofstream src_out(out_path, std::ios::binary);
          const std::string tgt_path = (stage_dir / "target.txt").string();
          std::ofstream tgt_out(tgt_path, std::ios::binary);
          for (size_t i = 0; i < src.size(); ++i) {
            TokenSequence asr = to_asr_format(split_tokens(src[i]));
            if (asr.empty() && !split_tokens(src[i]).empty()) {
              ++record.rows_dropped;
              continue;
            }
            src_out << join_tokens(asr) << '\n';
            tgt_out << tgt[i] << '\n';
          }
          state.source_path = out_path;
          state.target_path = tgt_path;
        } else {
          map_lines(state.source_path, out_path, [](const std::string &line) {
            return join_tokens(to_asr_format(split_tokens(line)));
          });
          state.source_path = out_path;
        }
      } else if (stage.name == "noise") {
        std::vector<std::string> lines = read_lines(state.source_path);
        NoiseModel noise = noise_from_stage(stage, state.seed, lines);
        const int nbest = static_cast<int>(stage.num("nbest", 1));
        const int workers = static_cast<int>(stage.num("workers", 1));
        const bool as_text = stage.str("emit", "nbest") == "text";
        const std::string nbest_path =
            as_text ? (stage_dir / "out.nbest").string() : out_path;
        {
          std::ifstream in(state.source_path, std::ios::binary);
          std::ofstream out(nbest_path, std::ios::binary);
          transform_corpus(in, out, noise, nbest, workers);
        }
        if (as_text) {
          std::ofstream out(out_path, std::ios::binary);
          for (const NBestList &list : read_nbest_file(nbest_path)) {
            out << join_tokens(list.hypotheses.front().tokens) << '\n';
          }
        }
        state.source_path = out_path;
        state.kind = as_text ? Kind::kText : Kind::kNBest;
      } else if (stage.name == "bpe-learn") {
        std::vector<TokenSequence> corpus = load_token_lines(state.source_path);
        if (state.target_path && stage.flag("include_target", true)) {
          for (TokenSequence &sent : load_token_lines(*state.target_path)) {
            corpus.push_back(std::move(sent));
          }
        }
        if (stage.params.contains("extra_inputs")) {
          for (const auto &extra : stage.params.at("extra_inputs")) {
            for (TokenSequence &sent :
                 load_token_lines(extra.get<std::string>())) {
              corpus.push_back(std::move(sent));
            }
          }
        }
        const size_t merges = static_cast<size_t>(stage.num("merges", 37000));
        BpeModel model = learn_bpe(corpus, merges);
        const std::string model_path = (stage_dir / "bpe.model").string();
        model.save_file(model_path);
        state.last_bpe_model = model_path;
        fs::copy_file(state.source_path, out_path,
                      fs::copy_options::overwrite_existing);
        state.source_path = out_path;
      } else if (stage.name == "bpe-apply") {
        std::string model_path = stage.str("model", "");
        if (model_path.empty()) model_path = state.last_bpe_model;
        if (model_path.empty()) {
          throw ParseError("bpe-apply has no model (no prior bpe-learn)");
        }
        BpeModel model = BpeModel::load_file(model_path);
        map_lines(state.source_path, out_path, [&](const std::string &line) {
          return join_tokens(apply_bpe(model, split_tokens(line)));
        });
        state.source_path = out_path;
        if (state.target_path && stage.flag("apply_to_target", true)) {
          const std::string tgt_path = (stage_dir / "target.txt").string();
          map_lines(*state.target_path, tgt_path,
                    [&](const std::string &line) {
                      return join_tokens(apply_bpe(model, split_tokens(line)));
                    });
          state.target_path = tgt_path;
        }
      } else if (stage.name == "select") {
        SelectionStrategy strategy =
            SelectionStrategy::parse(stage.str("ranks", "1"));
        std::ifstream in(state.source_path, std::ios::binary);
        NBestReader reader(in);
        std::ofstream out(out_path, std::ios::binary);
        std::optional<std::vector<std::string>> targets;
        std::unique_ptr<std::ofstream> tgt_out;
        std::string tgt_path;
        if (state.target_path) {
          targets = read_lines(*state.target_path);
          tgt_path = (stage_dir / "target.txt").string();
          tgt_out = std::make_unique<std::ofstream>(tgt_path,
                                                    std::ios::binary);
        }
        NBestList list;
        size_t utt = 0, rows = 0;
        while (reader.next(list)) {
          for (const TokenSequence &hyp : select(list, strategy)) {
            out << join_tokens(hyp) << '\n';
            ++rows;
            if (targets) {
              if (utt >= targets->size()) {
                throw AlignmentMismatchError(
                    "more n-best lists than target lines");
              }
              *tgt_out << (*targets)[utt] << '\n';
            }
          }
          ++utt;
        }
        if (targets && utt != targets->size()) {
          throw AlignmentMismatchError(
              std::to_string(utt) + " n-best lists vs " +
              std::to_string(targets->size()) + " target lines");
        }
        state.source_path = out_path;
        state.kind = Kind::kText;
        if (targets) state.target_path = tgt_path;
        record.rows_out = rows;
      } else if (stage.name == "rerank") {
        const std::string lm_path = stage.str("lm", "");
        if (lm_path.empty()) throw ParseError("rerank needs an 'lm' model");
        NGramModel lm = NGramModel::load_arpa_file(lm_path);
        RerankWeights weights;
        weights.w_orig = stage.num("w_orig", 0.0);
        weights.w_lm = stage.num("w_lm", 1.0);
        std::ifstream in(state.source_path, std::ios::binary);
        NBestReader reader(in);
        std::ofstream out(out_path, std::ios::binary);
        NBestList list;
        while (reader.next(list)) {
          write_nbest(out, rerank(list, lm, weights));
        }
        state.source_path = out_path;
      } else if (stage.name == "translate-external") {
        const std::string command = stage.str("command", "");
        if (command.empty()) {
          throw ParseError("translate-external needs a 'command'");
        }
        std::vector<std::string> output = translate_external(
            read_lines(state.source_path), command, stage_dir.string(),
            stage.num("timeout_s", 0.0));
        write_lines(out_path, output);
        state.source_path = out_path;
      } else if (stage.name == "revert-bpe") {
        map_lines(state.source_path, out_path, [](const std::string &line) {
          return join_tokens(revert_bpe(split_tokens(line)));
        });
        state.source_path = out_path;
      } else if (stage.name == "recase") {
        const std::string model_path = stage.str("model", "");
        if (model_path.empty()) throw ParseError("recase needs a 'model'");
        RecaserModel model = RecaserModel::load_file(model_path);
        map_lines(state.source_path, out_path, [&](const std::string &line) {
          return join_tokens(recase(model, split_tokens(line)));
        });
        state.source_path = out_path;
      } else if (stage.name == "evaluate") {
        std::string ref_path = stage.str("reference", "target");
        if (ref_path == "target") {
          if (!state.target_path) {
            throw ParseError("evaluate has no reference (no target side)");
          }
          ref_path = *state.target_path;
        }
        std::vector<TokenSequence> hyp = load_token_lines(state.source_path);
        std::vector<TokenSequence> ref = load_token_lines(ref_path);
        EvalReport report;
        report.n_sentences = hyp.size();
        const bool smooth = stage.flag("smooth", false);
        std::vector<std::string> metrics = {"bleu"};
        if (stage.params.contains("metrics")) {
          metrics.clear();
          for (const auto &metric : stage.params.at("metrics")) {
            metrics.push_back(metric.get<std::string>());
          }
        }
        for (const std::string &metric : metrics) {
          if (metric == "bleu") {
            report.bleu = corpus_bleu(hyp, ref, true, smooth);
          } else if (metric == "bleu-lc") {
            report.bleu_lc = corpus_bleu(hyp, ref, false, smooth);
          } else if (metric == "wer") {
            report.wer = corpus_wer(hyp, ref);
          } else {
            throw ParseError("unknown metric '" + metric + "'");
          }
        }
        {
          std::ofstream json_out(stage_dir / "report.json", std::ios::binary);
          json_out << report.to_json();
          std::ofstream table_out(stage_dir / "report.txt", std::ios::binary);
          table_out << report.to_table();
        }
        fs::copy_file(state.source_path, out_path,
                      fs::copy_options::overwrite_existing);
        state.source_path = out_path;
        result.reports.push_back(std::move(report));
      } else {
        throw ParseError("unknown stage '" + stage.name + "'");
      }

      if (record.rows_out == 0) record.rows_out = count_lines(out_path);
      for (const auto &entry : fs::directory_iterator(stage_dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string rel =
            fs::relative(entry.path(), run_dir).string();
        record.outputs[rel] = sha256_file_hex(entry.path().string());
      }
      manifest.stages.push_back(record);
      timings << dir_name << '\t'
              << std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - stage_start)
                     .count()
              << "s\n";
    } catch (...) {
      manifest.failed_stage = std::string(dir_name);
      manifest.stages.push_back(record);
      finalize_manifest();
      throw;
    }
  }

  finalize_manifest();
  return result;
}

}  // namespace stpipe
