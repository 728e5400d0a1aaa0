// tools/stpipe.cc
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
//
// Single binary exposing every pipeline component as a subcommand. Text
// subcommands read one sentence per line from stdin (or --in) and write to
// stdout (or --out).

#include <algorithm>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include <CLI11.hpp>

#include "stpipe/asrsim.h"
#include "stpipe/bpe.h"
#include "stpipe/corpus.h"
#include "stpipe/metrics.h"
#include "stpipe/nbest.h"
#include "stpipe/ngramlm.h"
#include "stpipe/pipeline.h"
#include "stpipe/recase.h"
#include "stpipe/rerank.h"
#include "stpipe/textnorm.h"
#include "stpipe/types.h"
#include "stpipe/version.h"

namespace {

using namespace stpipe;

struct IoOptions {
  std::string in_path;
  std::string out_path;
};

void add_io(CLI::App *cmd, IoOptions &io) {
  cmd->add_option("--in", io.in_path, "input file (default: stdin)");
  cmd->add_option("--out", io.out_path, "output file (default: stdout)");
}

// Runs fn over an input/output stream pair resolved from the options.
int with_io(const IoOptions &io,
            const std::function<void(std::istream &, std::ostream &)> &fn) {
  std::ifstream in_file;
  std::ofstream out_file;
  std::istream *in = &std::cin;
  std::ostream *out = &std::cout;
  if (!io.in_path.empty()) {
    in_file.open(io.in_path, std::ios::binary);
    if (!in_file) {
      std::cerr << "error: cannot read " << io.in_path << "\n";
      return 1;
    }
    in = &in_file;
  }
  if (!io.out_path.empty()) {
    out_file.open(io.out_path, std::ios::binary);
    if (!out_file) {
      std::cerr << "error: cannot write " << io.out_path << "\n";
      return 1;
    }
    out = &out_file;
  }
  fn(*in, *out);
  return 0;
}

void map_stream(std::istream &in, std::ostream &out,
                const std::function<std::string(const std::string &)> &fn) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out << fn(line) << '\n';
  }
}

std::vector<TokenSequence> read_token_stream(std::istream &in) {
  std::vector<TokenSequence> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(split_tokens(line));
  }
  return out;
}

std::vector<TokenSequence> read_token_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + path);
  return read_token_stream(in);
}

std::string default_run_dir() {
  std::time_t now = std::time(nullptr);
  char buf[64];
  std::strftime(buf, sizeof(buf), "run/%Y%m%d-%H%M%S", std::localtime(&now));
  return buf;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"text-side speech translation pipeline toolkit"};
  app.require_subcommand(1);
  int rc = 0;

  // --- text normalization ---
  struct {
    IoOptions io;
  } norm;
  auto *cmd_normalize =
      app.add_subcommand("normalize", "normalize punctuation and tokenize");
  add_io(cmd_normalize, norm.io);
  cmd_normalize->callback([&] {
    rc = with_io(norm.io, [](std::istream &in, std::ostream &out) {
      map_stream(in, out, [](const std::string &line) {
        return join_tokens(tokenize(normalize_punct(line)));
      });
    });
  });

  struct {
    IoOptions io;
  } detok;
  auto *cmd_detok = app.add_subcommand("detokenize", "join tokens into text");
  add_io(cmd_detok, detok.io);
  cmd_detok->callback([&] {
    rc = with_io(detok.io, [](std::istream &in, std::ostream &out) {
      map_stream(in, out, [](const std::string &line) {
        return detokenize(split_tokens(line));
      });
    });
  });

  struct {
    IoOptions io;
  } lower;
  auto *cmd_lower = app.add_subcommand("lowercase", "lowercase tokens");
  add_io(cmd_lower, lower.io);
  cmd_lower->callback([&] {
    rc = with_io(lower.io, [](std::istream &in, std::ostream &out) {
      map_stream(in, out, [](const std::string &line) {
        return join_tokens(lowercase(split_tokens(line)));
      });
    });
  });

  struct {
    IoOptions io;
  } strip;
  auto *cmd_strip =
      app.add_subcommand("strip-punct", "remove punctuation tokens");
  add_io(cmd_strip, strip.io);
  cmd_strip->callback([&] {
    rc = with_io(strip.io, [](std::istream &in, std::ostream &out) {
      map_stream(in, out, [](const std::string &line) {
        return join_tokens(strip_punct(split_tokens(line)));
      });
    });
  });

  struct {
    IoOptions io;
  } verb;
  auto *cmd_verb =
      app.add_subcommand("verbalize-numbers", "spell out numeric tokens");
  add_io(cmd_verb, verb.io);
  cmd_verb->callback([&] {
    rc = with_io(verb.io, [](std::istream &in, std::ostream &out) {
      map_stream(in, out, [](const std::string &line) {
        return join_tokens(verbalize_numbers(split_tokens(line)));
      });
    });
  });

  struct {
    IoOptions io;
  } asrfmt;
  auto *cmd_asrfmt = app.add_subcommand(
      "asr-format", "lowercase, spell out numbers, strip punctuation");
  add_io(cmd_asrfmt, asrfmt.io);
  cmd_asrfmt->callback([&] {
    rc = with_io(asrfmt.io, [](std::istream &in, std::ostream &out) {
      map_stream(in, out, [](const std::string &line) {
        return join_tokens(to_asr_format(split_tokens(line)));
      });
    });
  });

  // --- BPE ---
  struct {
    std::vector<std::string> inputs;
    std::string out;
    size_t merges = 37000;
  } bpe_learn_opt;
  auto *cmd_bpe_learn = app.add_subcommand("bpe-learn", "learn a BPE model");
  cmd_bpe_learn->add_option("--in", bpe_learn_opt.inputs, "training text file(s)")
      ->required();
  cmd_bpe_learn->add_option("--out", bpe_learn_opt.out, "model output path")
      ->required();
  cmd_bpe_learn->add_option("--merges", bpe_learn_opt.merges,
                            "merge budget (default 37000)");
  cmd_bpe_learn->callback([&] {
    std::vector<TokenSequence> corpus;
    for (const std::string &path : bpe_learn_opt.inputs) {
      for (TokenSequence &sent : read_token_file(path)) {
        corpus.push_back(std::move(sent));
      }
    }
    learn_bpe(corpus, bpe_learn_opt.merges).save_file(bpe_learn_opt.out);
  });

  struct {
    IoOptions io;
    std::string model;
  } bpe_apply_opt;
  auto *cmd_bpe_apply =
      app.add_subcommand("bpe-apply", "segment text with a BPE model");
  add_io(cmd_bpe_apply, bpe_apply_opt.io);
  cmd_bpe_apply->add_option("--model", bpe_apply_opt.model)->required();
  cmd_bpe_apply->callback([&] {
    BpeModel model = BpeModel::load_file(bpe_apply_opt.model);
    rc = with_io(bpe_apply_opt.io, [&](std::istream &in, std::ostream &out) {
      map_stream(in, out, [&](const std::string &line) {
        return join_tokens(apply_bpe(model, split_tokens(line)));
      });
    });
  });

  struct {
    IoOptions io;
  } bpe_revert_opt;
  auto *cmd_bpe_revert =
      app.add_subcommand("bpe-revert", "undo BPE segmentation");
  add_io(cmd_bpe_revert, bpe_revert_opt.io);
  cmd_bpe_revert->callback([&] {
    rc = with_io(bpe_revert_opt.io, [](std::istream &in, std::ostream &out) {
      map_stream(in, out, [](const std::string &line) {
        return join_tokens(revert_bpe(split_tokens(line)));
      });
    });
  });

  // --- ASR simulation ---
  struct {
    IoOptions io;
    double wer = 0.1;
    int nbest = 1;
    uint64_t seed = 0;
    int workers = 1;
    std::string confusions;
    std::string utt_prefix = "utt-";
  } sim;
  auto *cmd_sim = app.add_subcommand(
      "asr-sim", "simulate ASR n-best lists from clean text");
  add_io(cmd_sim, sim.io);
  cmd_sim->add_option("--wer", sim.wer, "target word error rate");
  cmd_sim->add_option("--nbest", sim.nbest, "hypotheses per utterance");
  cmd_sim->add_option("--seed", sim.seed);
  cmd_sim->add_option("--workers", sim.workers);
  cmd_sim->add_option("--confusions", sim.confusions,
                      "confusion table TSV ('default' or 'none')");
  cmd_sim->add_option("--utt-prefix", sim.utt_prefix);
  cmd_sim->callback([&] {
    rc = with_io(sim.io, [&](std::istream &in, std::ostream &out) {
      // Slurp once: the filler vocabulary comes from the corpus itself.
      std::stringstream buffer;
      buffer << in.rdbuf();
      NoiseModel noise;
      noise.target_wer = sim.wer;
      noise.seed = sim.seed;
      if (sim.confusions.empty() || sim.confusions == "default") {
        noise.confusions = default_confusions();
      } else if (sim.confusions != "none") {
        noise.confusions = load_confusions_file(sim.confusions);
      }
      std::map<std::string, uint64_t> freq;
      {
        std::istringstream scan(buffer.str());
        std::string line;
        while (std::getline(scan, line)) {
          for (const std::string &tok : split_tokens(line)) ++freq[tok];
        }
      }
      std::vector<std::pair<uint64_t, std::string>> ranked;
      for (const auto &[tok, count] : freq) ranked.emplace_back(count, tok);
      std::sort(ranked.begin(), ranked.end(),
                [](const auto &a, const auto &b) {
                  if (a.first != b.first) return a.first > b.first;
                  return a.second < b.second;
                });
      for (size_t i = 0; i < std::min<size_t>(ranked.size(), 200); ++i) {
        noise.filler_vocab.push_back(ranked[i].second);
      }
      std::istringstream replay(buffer.str());
      TransformStats stats = transform_corpus(replay, out, noise, sim.nbest,
                                              sim.workers, sim.utt_prefix);
      std::cerr << stats.sentences << " sentences, " << stats.empty_outputs
                << " empty after formatting\n";
    });
  });

  // --- language model ---
  struct {
    std::string in;
    std::string out;
    int order = 4;
    std::string prune;
  } lm_train_opt;
  auto *cmd_lm_train =
      app.add_subcommand("lm-train", "train a Kneser-Ney n-gram model");
  cmd_lm_train->add_option("--in", lm_train_opt.in, "training text")
      ->required();
  cmd_lm_train->add_option("--out", lm_train_opt.out, "ARPA output")
      ->required();
  cmd_lm_train->add_option("--order", lm_train_opt.order, "n-gram order");
  cmd_lm_train->add_option(
      "--prune", lm_train_opt.prune,
      "count thresholds per order (e.g. 0,0,1,2), or 'heavy' / 'light'");
  cmd_lm_train->callback([&] {
    std::vector<int> prune(lm_train_opt.order, 0);
    if (lm_train_opt.prune == "heavy" || lm_train_opt.prune == "light") {
      // First-pass vs rescoring presets for 4-gram models; shorter orders
      // keep the tail of the schedule.
      const std::vector<int> schedule = lm_train_opt.prune == "heavy"
                                            ? std::vector<int>{0, 0, 1, 2}
                                            : std::vector<int>{0, 0, 0, 1};
      for (int k = 0; k < lm_train_opt.order && k < 4; ++k) {
        prune[k] = schedule[std::min(3, 4 - lm_train_opt.order + k)];
      }
    } else if (!lm_train_opt.prune.empty()) {
      prune.clear();
      std::istringstream ss(lm_train_opt.prune);
      std::string part;
      while (std::getline(ss, part, ',')) prune.push_back(std::stoi(part));
    }
    NGramModel lm =
        train_lm(read_token_file(lm_train_opt.in), lm_train_opt.order, prune);
    lm.save_arpa_file(lm_train_opt.out);
    for (int k = 1; k <= lm.order(); ++k) {
      if (lm.used_fallback_discounts(k)) {
        std::cerr << "note: order " << k
                  << " used fallback discounting (sparse count-of-counts)\n";
      }
    }
  });

  struct {
    IoOptions io;
    std::string model;
  } lm_score_opt;
  auto *cmd_lm_score =
      app.add_subcommand("lm-score", "log10 probability per sentence");
  add_io(cmd_lm_score, lm_score_opt.io);
  cmd_lm_score->add_option("--model", lm_score_opt.model)->required();
  cmd_lm_score->callback([&] {
    NGramModel lm = NGramModel::load_arpa_file(lm_score_opt.model);
    rc = with_io(lm_score_opt.io, [&](std::istream &in, std::ostream &out) {
      char buf[32];
      map_stream(in, out, [&](const std::string &line) {
        std::snprintf(buf, sizeof(buf), "%.6f",
                      score(lm, split_tokens(line)));
        return std::string(buf);
      });
    });
  });

  struct {
    IoOptions io;
    std::string model;
  } lm_ppl_opt;
  auto *cmd_lm_ppl = app.add_subcommand("lm-ppl", "corpus perplexity");
  add_io(cmd_lm_ppl, lm_ppl_opt.io);
  cmd_lm_ppl->add_option("--model", lm_ppl_opt.model)->required();
  cmd_lm_ppl->callback([&] {
    NGramModel lm = NGramModel::load_arpa_file(lm_ppl_opt.model);
    rc = with_io(lm_ppl_opt.io, [&](std::istream &in, std::ostream &out) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4f",
                    perplexity(lm, read_token_stream(in)));
      out << buf << "\n";
    });
  });

  // --- selection and reranking ---
  struct {
    IoOptions io;
    std::string ranks = "1";
    std::string target;
    std::string target_out;
  } select_opt;
  auto *cmd_select =
      app.add_subcommand("select", "pick ranks out of n-best lists");
  add_io(cmd_select, select_opt.io);
  cmd_select->add_option("--ranks", select_opt.ranks, "e.g. 1, 1-10, 1-5,9");
  cmd_select->add_option("--target", select_opt.target,
                         "aligned target file to expand per selection");
  cmd_select->add_option("--target-out", select_opt.target_out);
  cmd_select->callback([&] {
    SelectionStrategy strategy = SelectionStrategy::parse(select_opt.ranks);
    rc = with_io(select_opt.io, [&](std::istream &in, std::ostream &out) {
      std::optional<std::vector<std::string>> targets;
      std::ofstream tgt_out;
      if (!select_opt.target.empty()) {
        targets = read_lines(select_opt.target);
        if (select_opt.target_out.empty()) {
          throw Error("--target requires --target-out");
        }
        tgt_out.open(select_opt.target_out, std::ios::binary);
      }
      NBestReader reader(in);
      NBestList list;
      size_t utt = 0;
      while (reader.next(list)) {
        for (const TokenSequence &hyp : select(list, strategy)) {
          out << join_tokens(hyp) << '\n';
          if (targets) {
            if (utt >= targets->size()) {
              throw AlignmentMismatchError("more n-best lists than targets");
            }
            tgt_out << (*targets)[utt] << '\n';
          }
        }
        ++utt;
      }
      if (targets && utt != targets->size()) {
        throw AlignmentMismatchError(std::to_string(utt) +
                                     " n-best lists vs " +
                                     std::to_string(targets->size()) +
                                     " target lines");
      }
    });
  });

  struct {
    IoOptions io;
    std::string lm;
    double w_orig = 0.0;
    double w_lm = 1.0;
  } rerank_opt;
  auto *cmd_rerank =
      app.add_subcommand("rerank", "re-sort n-best lists by LM score");
  add_io(cmd_rerank, rerank_opt.io);
  cmd_rerank->add_option("--lm", rerank_opt.lm, "ARPA model")->required();
  cmd_rerank->add_option("--w-orig", rerank_opt.w_orig);
  cmd_rerank->add_option("--w-lm", rerank_opt.w_lm);
  cmd_rerank->callback([&] {
    NGramModel lm = NGramModel::load_arpa_file(rerank_opt.lm);
    RerankWeights weights{rerank_opt.w_orig, rerank_opt.w_lm};
    rc = with_io(rerank_opt.io, [&](std::istream &in, std::ostream &out) {
      NBestReader reader(in);
      NBestList list;
      while (reader.next(list)) write_nbest(out, rerank(list, lm, weights));
    });
  });

  struct {
    IoOptions io;
    std::string lm;
  } pick_opt;
  auto *cmd_pick = app.add_subcommand(
      "pick-best", "highest LM-scoring hypothesis per utterance");
  add_io(cmd_pick, pick_opt.io);
  cmd_pick->add_option("--lm", pick_opt.lm, "ARPA model")->required();
  cmd_pick->callback([&] {
    NGramModel lm = NGramModel::load_arpa_file(pick_opt.lm);
    rc = with_io(pick_opt.io, [&](std::istream &in, std::ostream &out) {
      NBestReader reader(in);
      NBestList list;
      while (reader.next(list)) {
        out << join_tokens(pick_best_translation(list, lm)) << '\n';
      }
    });
  });

  // --- recasing ---
  struct {
    std::string in;
    std::string out;
  } recase_train_opt;
  auto *cmd_recase_train =
      app.add_subcommand("recase-train", "train a case-restoration model");
  cmd_recase_train->add_option("--in", recase_train_opt.in, "cased text")
      ->required();
  cmd_recase_train->add_option("--out", recase_train_opt.out)->required();
  cmd_recase_train->callback([&] {
    train_recaser(read_token_file(recase_train_opt.in))
        .save_file(recase_train_opt.out);
  });

  struct {
    IoOptions io;
    std::string model;
  } recase_opt;
  auto *cmd_recase =
      app.add_subcommand("recase", "restore case in lowercase text");
  add_io(cmd_recase, recase_opt.io);
  cmd_recase->add_option("--model", recase_opt.model)->required();
  cmd_recase->callback([&] {
    RecaserModel model = RecaserModel::load_file(recase_opt.model);
    rc = with_io(recase_opt.io, [&](std::istream &in, std::ostream &out) {
      map_stream(in, out, [&](const std::string &line) {
        return join_tokens(recase(model, split_tokens(line)));
      });
    });
  });

  // --- evaluation ---
  struct {
    IoOptions io;
    std::string ref;
    bool lc = false;
    bool smooth = false;
    bool json = false;
  } bleu_opt;
  auto *cmd_bleu = app.add_subcommand("eval-bleu", "corpus BLEU");
  add_io(cmd_bleu, bleu_opt.io);
  cmd_bleu->add_option("--ref", bleu_opt.ref, "reference file")->required();
  cmd_bleu->add_flag("--lc", bleu_opt.lc, "case-insensitive");
  cmd_bleu->add_flag("--smooth", bleu_opt.smooth, "add-one smoothing, n >= 2");
  cmd_bleu->add_flag("--json", bleu_opt.json);
  cmd_bleu->callback([&] {
    rc = with_io(bleu_opt.io, [&](std::istream &in, std::ostream &out) {
      EvalReport report =
          bleu_report(read_token_stream(in), read_token_file(bleu_opt.ref),
                      !bleu_opt.lc, bleu_opt.smooth);
      out << (bleu_opt.json ? report.to_json() : report.to_table());
    });
  });

  struct {
    IoOptions io;
    std::string ref;
    bool json = false;
  } wer_opt;
  auto *cmd_wer = app.add_subcommand("eval-wer", "corpus word error rate");
  add_io(cmd_wer, wer_opt.io);
  cmd_wer->add_option("--ref", wer_opt.ref, "reference file")->required();
  cmd_wer->add_flag("--json", wer_opt.json);
  cmd_wer->callback([&] {
    rc = with_io(wer_opt.io, [&](std::istream &in, std::ostream &out) {
      EvalReport report =
          wer_report(read_token_stream(in), read_token_file(wer_opt.ref));
      out << (wer_opt.json ? report.to_json() : report.to_table());
    });
  });

  // --- pipeline ---
  auto *cmd_pipeline = app.add_subcommand("pipeline", "run a stage chain");
  struct {
    std::string config;
    std::string out;
    uint64_t seed = 0;
    bool seed_set = false;
  } pipe_opt;
  auto *cmd_run = cmd_pipeline->add_subcommand("run", "execute a config");
  cmd_run->add_option("--config", pipe_opt.config)->required();
  cmd_run->add_option("--out", pipe_opt.out, "run directory");
  cmd_run->add_option("--seed", pipe_opt.seed)
      ->each([&](const std::string &) { pipe_opt.seed_set = true; });
  cmd_run->callback([&] {
    PipelineConfig config = PipelineConfig::load_file(pipe_opt.config);
    if (pipe_opt.seed_set) config.seed = pipe_opt.seed;
    const std::string run_dir =
        pipe_opt.out.empty() ? default_run_dir() : pipe_opt.out;
    RunResult result = run_pipeline(config, run_dir);
    std::cout << "run dir: " << result.run_dir << "\n";
    for (const EvalReport &report : result.reports) {
      std::cout << report.to_table();
    }
  });

  // --- toy adapter for translate-external ---
  struct {
    IoOptions io;
    std::string table;
  } dict_opt;
  auto *cmd_dict = app.add_subcommand(
      "dict-adapter", "toy word-lookup translator (adapter protocol)");
  add_io(cmd_dict, dict_opt.io);
  cmd_dict->add_option("--table", dict_opt.table, "TSV source<TAB>target")
      ->required();
  cmd_dict->callback([&] {
    std::unordered_map<std::string, std::string> table;
    for (const std::string &line : read_lines(dict_opt.table)) {
      size_t tab = line.find('\t');
      if (tab == std::string::npos) continue;
      table[line.substr(0, tab)] = line.substr(tab + 1);
    }
    rc = with_io(dict_opt.io, [&](std::istream &in, std::ostream &out) {
      map_stream(in, out, [&](const std::string &line) {
        TokenSequence mapped;
        for (const std::string &tok : split_tokens(line)) {
          auto it = table.find(tok);
          mapped.push_back(it == table.end() ? tok : it->second);
        }
        return join_tokens(mapped);
      });
    });
  });

  auto *cmd_version = app.add_subcommand("version", "print version");
  cmd_version->callback([&] { std::cout << kVersion << "\n"; });

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
