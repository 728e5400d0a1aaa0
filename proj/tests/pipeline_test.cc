// tests/pipeline_test.cc

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "stpipe/corpus.h"
#include "stpipe/pipeline.h"
#include "stpipe/sha256.h"
#include "stpipe/subprocess.h"

using namespace stpipe;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir(const std::string &name) {
  fs::path dir = fs::path(STPIPE_BINARY_DIR) / "test_tmp" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex(std::string(1000000, 'a')) ==
        "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("parallel corpus round trip and mismatch reporting") {
  fs::path dir = tmp_dir("parallel");
  ParallelCorpus corpus{(dir / "a.src").string(), (dir / "a.tgt").string(),
                        "toy"};
  std::vector<std::pair<std::string, std::string>> pairs = {
      {"one line", "eine zeile"},
      {"two lines", "zwei zeilen"},
      {"three", "drei"}};
  write_parallel(corpus, pairs);
  CHECK(read_parallel_pairs(corpus) == pairs);

  // Unequal lengths: offending line is min(len)+1.
  write_lines((dir / "b.src").string(), {"a", "b", "c"});
  write_lines((dir / "b.tgt").string(), {"x"});
  ParallelCorpus bad{(dir / "b.src").string(), (dir / "b.tgt").string(),
                     "bad"};
  try {
    read_parallel_pairs(bad);
    FAIL("expected AlignmentMismatchError");
  } catch (const AlignmentMismatchError &e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("mix_corpora concatenates with repeats") {
  fs::path dir = tmp_dir("mix");
  ParallelCorpus a{(dir / "a.src").string(), (dir / "a.tgt").string(), "a"};
  ParallelCorpus b{(dir / "b.src").string(), (dir / "b.tgt").string(), "b"};
  write_parallel(a, {{"a1", "A1"}, {"a2", "A2"}});
  write_parallel(b, {{"b1", "B1"}});

  ParallelCorpus out{(dir / "out.src").string(), (dir / "out.tgt").string(),
                     "mix"};
  CHECK(mix_corpora({{a, 1}}, out) == 2);
  CHECK(read_parallel_pairs(out) == read_parallel_pairs(a));

  CHECK(mix_corpora({{a, 2}}, out) == 4);
  CHECK(read_lines(out.source_path) ==
        std::vector<std::string>{"a1", "a2", "a1", "a2"});

  CHECK(mix_corpora({{a, 1}, {b, 1}}, out) == 3);
  CHECK(read_lines(out.source_path) ==
        std::vector<std::string>{"a1", "a2", "b1"});
}

TEST_CASE("external adapter protocol") {
  fs::path dir = tmp_dir("adapter");
  std::vector<std::string> input = {"hello world", "good day"};
  CHECK(translate_external(input, "cat", dir.string()) == input);

  CHECK_THROWS_AS(translate_external(input, "head -n 1", dir.string()),
                  AdapterProtocolViolationError);
  CHECK_THROWS_AS(translate_external(input, "exit 3", dir.string()),
                  AdapterFailureError);
  CHECK_THROWS_AS(
      translate_external(input, "sleep 30", dir.string(), 0.2),
      AdapterFailureError);
}

TEST_CASE("config validation catches unknown stages and kind mismatches") {
  nlohmann::json doc = {
      {"input", "x.txt"},
      {"stages", {{{"name", "no-such-stage"}}}},
  };
  CHECK_THROWS_AS(PipelineConfig::from_json(doc), ParseError);

  nlohmann::json mismatch = {
      {"input", "x.txt"},
      {"stages", {{{"name", "normalize"}}, {{"name", "select"}}}},
  };
  CHECK_THROWS_AS(PipelineConfig::from_json(mismatch), ParseError);

  nlohmann::json ok = {
      {"input", "x.txt"},
      {"stages",
       {{{"name", "normalize"}},
        {{"name", "noise"}, {"nbest", 50}, {"wer", 0.2}},
        {{"name", "select"}, {"ranks", "1-10"}}}},
  };
  CHECK_NOTHROW(PipelineConfig::from_json(ok));
}

TEST_CASE("pipeline chain runs, conserves rows and is deterministic") {
  fs::path dir = tmp_dir("run");
  // Already-ASR-format input: the chain must be a no-op and WER vs the
  // input must be zero.
  write_lines((dir / "clean.txt").string(),
              {"because in the summer it rained",
               "the police closed the case",
               "we will see what happens"});

  nlohmann::json doc = {
      {"input", (dir / "clean.txt").string()},
      {"seed", 7},
      {"stages",
       {{{"name", "normalize"}},
        {{"name", "asr-format"}},
        {{"name", "evaluate"},
         {"reference", (dir / "clean.txt").string()},
         {"metrics", {"wer", "bleu"}}}}},
  };
  PipelineConfig config = PipelineConfig::from_json(doc);

  RunResult first = run_pipeline(config, (dir / "run1").string());
  REQUIRE(first.reports.size() == 1);
  REQUIRE(first.reports[0].wer.has_value());
  CHECK(first.reports[0].wer->wer == 0.0);
  CHECK(first.reports[0].bleu->score == doctest::Approx(100.0));
  for (const StageRecord &stage : first.manifest.stages) {
    CHECK(stage.rows_in == 3);
    CHECK(stage.rows_out == 3);
  }

  RunResult second = run_pipeline(config, (dir / "run2").string());
  CHECK(slurp(dir / "run1" / "manifest.json") ==
        slurp(dir / "run2" / "manifest.json"));
  CHECK(slurp(dir / "run1" / "03-evaluate" / "report.json") ==
        slurp(dir / "run2" / "03-evaluate" / "report.json"));

  // Manifest hashes match recomputed artifact hashes.
  for (const StageRecord &stage : first.manifest.stages) {
    for (const auto &[rel, hash] : stage.outputs) {
      CHECK(sha256_file_hex((fs::path(first.run_dir) / rel).string()) == hash);
    }
  }
}

TEST_CASE("noise stage emits n-best lists consumed by select") {
  fs::path dir = tmp_dir("nbest_run");
  write_lines((dir / "src.txt").string(),
              {"the police closed the case",
               "we will see what happens",
               "the committee approved the budget"});
  write_lines((dir / "tgt.txt").string(),
              {"die polizei schloss den fall",
               "wir werden sehen was passiert",
               "der ausschuss genehmigte das budget"});

  nlohmann::json doc = {
      {"input", (dir / "src.txt").string()},
      {"target", (dir / "tgt.txt").string()},
      {"seed", 11},
      {"stages",
       {{{"name", "asr-format"}},
        {{"name", "noise"}, {"nbest", 50}, {"wer", 0.15}},
        {{"name", "select"}, {"ranks", "1-10"}}}},
  };
  RunResult run = run_pipeline(PipelineConfig::from_json(doc),
                               (dir / "run").string());
  const StageRecord &select_stage = run.manifest.stages.back();
  CHECK(select_stage.rows_out == 30);  // 3 utterances x top-10
  CHECK(read_lines((fs::path(run.run_dir) / "03-select" / "out.txt").string())
            .size() == 30);
  CHECK(read_lines(
            (fs::path(run.run_dir) / "03-select" / "target.txt").string())
            .size() == 30);
}

TEST_CASE("failing stage aborts but still writes a manifest") {
  fs::path dir = tmp_dir("fail_run");
  write_lines((dir / "src.txt").string(), {"one line"});
  nlohmann::json doc = {
      {"input", (dir / "src.txt").string()},
      {"stages",
       {{{"name", "normalize"}},
        {{"name", "translate-external"}, {"command", "exit 9"}}}},
  };
  CHECK_THROWS_AS(
      run_pipeline(PipelineConfig::from_json(doc), (dir / "run").string()),
      AdapterFailureError);
  const std::string manifest = slurp(dir / "run" / "manifest.json");
  CHECK(manifest.find("failed_stage") != std::string::npos);
  CHECK(manifest.find("02-translate-external") != std::string::npos);
}
