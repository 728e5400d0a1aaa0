// tests/metrics_test.cc

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.h"
#include "stpipe/metrics.h"
#include "stpipe/rng.h"
#include "stpipe/types.h"

using namespace stpipe;

namespace {

TokenSequence words(const std::string &text) { return split_tokens(text); }

std::vector<TokenSequence> random_sentences(Rng &rng, size_t count,
                                            size_t max_len,
                                            size_t vocab = 6) {
  std::vector<TokenSequence> out;
  for (size_t s = 0; s < count; ++s) {
    TokenSequence sent;
    const size_t len = rng.below(max_len + 1);
    for (size_t i = 0; i < len; ++i) {
      sent.push_back(std::string(1, static_cast<char>('a' + rng.below(vocab))));
    }
    out.push_back(std::move(sent));
  }
  return out;
}

}  // namespace

TEST_CASE("identical corpora have zero WER") {
  std::vector<TokenSequence> corpus = {words("the cat sat"), words("on mat")};
  WerScore score = corpus_wer(corpus, corpus);
  CHECK(score.wer == 0.0);
  CHECK(score.edits() == 0);
}

TEST_CASE("hand-checked alignment: one substitution, one deletion") {
  WerScore score = align_edits(words("a x c"), words("a b c d"));
  CHECK(score.edits() == 2);
  CHECK(score.substitutions == 1);
  CHECK(score.deletions == 1);
  CHECK(score.insertions == 0);
  CHECK(score.wer == doctest::Approx(0.5));
}

TEST_CASE("WER above one through insertions") {
  WerScore score = corpus_wer({words("a b c")}, {words("a")});
  CHECK(score.wer == doctest::Approx(2.0));
  CHECK(score.insertions == 2);
}

TEST_CASE("DP matches exhaustive search and the independent DP") {
  Rng rng(2718);
  for (int round = 0; round < 400; ++round) {
    TokenSequence ref = random_sentences(rng, 1, 6, 3)[0];
    TokenSequence hyp = random_sentences(rng, 1, 6, 3)[0];
    WerScore score = align_edits(hyp, ref);
    CHECK(score.edits() == oracles::brute_force_edits(ref, hyp));
    CHECK(score.edits() == oracles::independent_edit_dp(ref, hyp));
  }
  for (int round = 0; round < 200; ++round) {
    TokenSequence ref = random_sentences(rng, 1, 30, 5)[0];
    TokenSequence hyp = random_sentences(rng, 1, 30, 5)[0];
    CHECK(align_edits(hyp, ref).edits() ==
          oracles::independent_edit_dp(ref, hyp));
  }
}

TEST_CASE("WER input validation") {
  CHECK_THROWS_AS(corpus_wer({words("a")}, {words("a"), words("b")}),
                  AlignmentMismatchError);
  CHECK_THROWS_AS(corpus_wer({words("a")}, {TokenSequence{}}),
                  EmptyReferenceError);
}

TEST_CASE("BLEU hand example") {
  BleuScore bleu = corpus_bleu({words("the cat sat on mat")},
                               {words("the cat sat on the mat")});
  CHECK(bleu.precisions[0] == doctest::Approx(1.0));
  CHECK(bleu.precisions[1] == doctest::Approx(0.75));
  CHECK(bleu.precisions[2] == doctest::Approx(2.0 / 3.0));
  CHECK(bleu.precisions[3] == doctest::Approx(0.5));
  CHECK(bleu.brevity_penalty == doctest::Approx(0.81873).epsilon(1e-4));
  CHECK(bleu.score == doctest::Approx(57.89).epsilon(1e-4));
}

TEST_CASE("identical corpora score 100") {
  std::vector<TokenSequence> corpus = {words("the quick brown fox jumps"),
                                       words("over the lazy dog today")};
  CHECK(corpus_bleu(corpus, corpus).score == doctest::Approx(100.0));
}

TEST_CASE("case-insensitive BLEU ignores exactly the casing") {
  std::vector<TokenSequence> ref = {words("The Cat sat on the Mat here")};
  std::vector<TokenSequence> hyp = {words("the cat sat on the mat here")};
  CHECK(corpus_bleu(hyp, ref, false).score == doctest::Approx(100.0));
  CHECK(corpus_bleu(hyp, ref, true).score < 100.0);
}

TEST_CASE("lowercased scoring equals the lc variant") {
  Rng rng(31);
  for (int round = 0; round < 50; ++round) {
    std::vector<TokenSequence> ref = random_sentences(rng, 4, 8);
    std::vector<TokenSequence> hyp = random_sentences(rng, 4, 8);
    // Sprinkle uppercase.
    for (auto &sent : hyp) {
      for (auto &tok : sent) {
        if (rng.below(3) == 0) tok[0] = static_cast<char>(
            std::toupper(static_cast<unsigned char>(tok[0])));
      }
    }
    auto lower_all = [](std::vector<TokenSequence> v) {
      for (auto &sent : v) {
        for (auto &tok : sent) {
          std::transform(tok.begin(), tok.end(), tok.begin(), [](char c) {
            return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
          });
        }
      }
      return v;
    };
    BleuScore lc = corpus_bleu(hyp, ref, false);
    BleuScore lowered = corpus_bleu(lower_all(hyp), lower_all(ref), true);
    CHECK(lc.score == doctest::Approx(lowered.score).epsilon(1e-12));
  }
}

TEST_CASE("BLEU is invariant under sentence reordering") {
  Rng rng(37);
  std::vector<TokenSequence> ref = random_sentences(rng, 8, 9);
  std::vector<TokenSequence> hyp = random_sentences(rng, 8, 9);
  BleuScore base = corpus_bleu(hyp, ref);
  std::vector<size_t> perm = {5, 2, 7, 0, 3, 6, 1, 4};
  std::vector<TokenSequence> ref_p, hyp_p;
  for (size_t i : perm) {
    ref_p.push_back(ref[i]);
    hyp_p.push_back(hyp[i]);
  }
  BleuScore permuted = corpus_bleu(hyp_p, ref_p);
  CHECK(base.score == doctest::Approx(permuted.score).epsilon(1e-12));
}

TEST_CASE("zero n-gram precision zeroes the score unless smoothed") {
  std::vector<TokenSequence> ref = {words("aa bb cc dd ee")};
  std::vector<TokenSequence> hyp = {words("aa xx cc yy ee")};
  BleuScore strict = corpus_bleu(hyp, ref);
  CHECK(strict.zero_precision);
  CHECK(strict.score == 0.0);
  BleuScore smoothed = corpus_bleu(hyp, ref, true, true);
  CHECK(!smoothed.zero_precision);
  CHECK(smoothed.score > 0.0);
  CHECK(smoothed.score < 100.0);
}

TEST_CASE("BLEU respects bounds and the brevity penalty side") {
  Rng rng(41);
  for (int round = 0; round < 100; ++round) {
    std::vector<TokenSequence> ref = random_sentences(rng, 3, 8);
    std::vector<TokenSequence> hyp = random_sentences(rng, 3, 8);
    BleuScore b = corpus_bleu(hyp, ref);
    CHECK(b.score >= 0.0);
    CHECK(b.score <= 100.0 + 1e-9);
    if (b.hyp_tokens >= b.ref_tokens) CHECK(b.brevity_penalty == 1.0);
  }
}

TEST_CASE("score equals brevity penalty times the precision geomean") {
  Rng rng(53);
  for (int round = 0; round < 50; ++round) {
    std::vector<TokenSequence> ref = random_sentences(rng, 4, 10);
    std::vector<TokenSequence> hyp = random_sentences(rng, 4, 10);
    BleuScore b = corpus_bleu(hyp, ref);
    if (b.zero_precision) continue;
    double geo = 1.0;
    for (double p : b.precisions) geo *= p;
    CHECK(b.score == doctest::Approx(100.0 * b.brevity_penalty *
                                     std::pow(geo, 0.25))
                         .epsilon(1e-9));
  }
}

TEST_CASE("reports serialize to flat JSON and a table") {
  std::vector<TokenSequence> corpus = {words("a b c d")};
  EvalReport report = bleu_report(corpus, corpus);
  report.wer = corpus_wer(corpus, corpus);
  const std::string json = report.to_json();
  CHECK(json.find("\"bleu\": 100.0") != std::string::npos);
  CHECK(json.find("\"wer\": 0.0") != std::string::npos);
  CHECK(json.find("\"n_sentences\": 1") != std::string::npos);
  const std::string table = report.to_table();
  CHECK(table.find("BLEU") != std::string::npos);
  CHECK(table.find("WER") != std::string::npos);
}
