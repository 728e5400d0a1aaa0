// tests/rerank_test.cc

#include <doctest.h>

#include <algorithm>
#include <map>

#include "stpipe/asrsim.h"
#include "stpipe/rerank.h"
#include "stpipe/rng.h"

using namespace stpipe;

namespace {

NBestList make_list(const std::string &utt,
                    const std::vector<std::string> &sentences) {
  NBestList list;
  list.utt_id = utt;
  for (size_t i = 0; i < sentences.size(); ++i) {
    Hypothesis hyp;
    hyp.rank = static_cast<int>(i) + 1;
    hyp.score = -static_cast<double>(i);
    hyp.tokens = split_tokens(sentences[i]);
    list.hypotheses.push_back(std::move(hyp));
  }
  return list;
}

NBestList simulated_list(Rng &rng, const std::string &utt, int n) {
  static const std::vector<std::string> vocab = {
      "the", "cat", "dog", "sat", "ran", "on", "under", "mat", "tree",
      "a",   "big", "small"};
  NoiseModel noise;
  noise.target_wer = 0.3;
  noise.seed = rng.next();
  noise.filler_vocab = vocab;
  TokenSequence sent;
  const size_t len = 4 + rng.below(6);
  for (size_t i = 0; i < len; ++i) sent.push_back(vocab[rng.below(vocab.size())]);
  return generate_nbest(sent, n, noise, utt);
}

std::multiset<std::string> text_multiset(const NBestList &list) {
  std::multiset<std::string> out;
  for (const Hypothesis &hyp : list.hypotheses) {
    out.insert(join_tokens(hyp.tokens));
  }
  return out;
}

}  // namespace

TEST_CASE("selection strategies") {
  Rng rng(1);
  NBestList list = simulated_list(rng, "u1", 50);
  CHECK(select(list, SelectionStrategy::top(10)).size() == 10);
  CHECK(select(list, SelectionStrategy::top(1)) ==
        std::vector<TokenSequence>{list.hypotheses[0].tokens});
  SelectionStrategy rank60;
  rank60.ranks = {60};
  CHECK(select(list, rank60).empty());
  SelectionStrategy mixture = SelectionStrategy::parse("1-3,10,20-22");
  CHECK(select(list, mixture).size() == 7);
}

TEST_CASE("strategy parsing validates") {
  CHECK(SelectionStrategy::parse("1-10").ranks.size() == 10);
  CHECK_THROWS_AS(SelectionStrategy::parse(""), ParseError);
  CHECK_THROWS_AS(SelectionStrategy::parse("0-3"), ParseError);
  CHECK_THROWS_AS(SelectionStrategy::parse("x"), ParseError);
}

TEST_CASE("training pairs multiply by the selection size") {
  Rng rng(2);
  std::vector<NBestList> lists;
  std::vector<TokenSequence> targets;
  for (int u = 0; u < 100; ++u) {
    lists.push_back(simulated_list(rng, "u" + std::to_string(u), 50));
    targets.push_back({"ziel", std::to_string(u)});
  }
  auto pairs10 = build_training_pairs(lists, targets, SelectionStrategy::top(10));
  CHECK(pairs10.size() == 1000);
  auto pairs1 = build_training_pairs(lists, targets, SelectionStrategy::top(1));
  CHECK(pairs1.size() == targets.size());
  for (size_t u = 0; u < targets.size(); ++u) {
    CHECK(pairs1[u].first == lists[u].hypotheses[0].tokens);
    CHECK(pairs1[u].second == targets[u]);
  }
  targets.pop_back();
  CHECK_THROWS_AS(
      build_training_pairs(lists, targets, SelectionStrategy::top(1)),
      AlignmentMismatchError);
}

TEST_CASE("w_lm = 0 keeps the original order") {
  Rng rng(3);
  NGramModel lm = train_lm({{"the", "cat", "sat"}}, 3, {0, 0, 0});
  for (int round = 0; round < 20; ++round) {
    NBestList list = simulated_list(rng, "u", 25);
    NBestList out = rerank(list, lm, {1.0, 0.0});
    REQUIRE(out.hypotheses.size() == list.hypotheses.size());
    for (size_t i = 0; i < out.hypotheses.size(); ++i) {
      CHECK(out.hypotheses[i].tokens == list.hypotheses[i].tokens);
      CHECK(out.hypotheses[i].rank == static_cast<int>(i) + 1);
    }
  }
}

TEST_CASE("reranking permutes but never changes the hypothesis multiset") {
  Rng rng(4);
  NGramModel lm =
      train_lm({{"the", "cat", "sat"}, {"the", "dog", "ran"}}, 2, {0, 0});
  for (int round = 0; round < 30; ++round) {
    NBestList list = simulated_list(rng, "u", 20);
    NBestList out = rerank(list, lm, {0.3, 1.0});
    CHECK(text_multiset(out) == text_multiset(list));
    for (size_t i = 1; i < out.hypotheses.size(); ++i) {
      CHECK(out.hypotheses[i].score <= out.hypotheses[i - 1].score);
    }
  }
}

TEST_CASE("LM-trained hypothesis is promoted to rank 1") {
  NGramModel lm = train_lm({{"the", "cat", "sat"}}, 3, {0, 0, 0});
  NBestList list = make_list("u", {
                                      "dog tree under big",
                                      "mat ran small a on",
                                      "the cat sat",
                                      "under mat tree dog ran",
                                  });
  NBestList out = rerank(list, lm, {0.0, 1.0});
  CHECK(join_tokens(out.hypotheses[0].tokens) == "the cat sat");
}

TEST_CASE("positive scaling of both weights keeps the order") {
  Rng rng(5);
  NGramModel lm =
      train_lm({{"the", "cat", "sat", "on", "the", "mat"}}, 2, {0, 0});
  for (int round = 0; round < 20; ++round) {
    NBestList list = simulated_list(rng, "u", 15);
    NBestList a = rerank(list, lm, {0.5, 1.0});
    NBestList b = rerank(list, lm, {1.5, 3.0});
    for (size_t i = 0; i < a.hypotheses.size(); ++i) {
      CHECK(a.hypotheses[i].tokens == b.hypotheses[i].tokens);
    }
  }
}

TEST_CASE("pick_best_translation") {
  NGramModel lm = train_lm({{"guten", "tag"}}, 3, {0, 0, 0});
  NBestList single = make_list("u", {"hallo welt"});
  CHECK(pick_best_translation(single, lm) == split_tokens("hallo welt"));

  NBestList same = make_list("u", {"guten tag", "guten tag", "guten tag"});
  CHECK(pick_best_translation(same, lm) == split_tokens("guten tag"));

  // Consistency with rerank under pure LM weights.
  Rng rng(6);
  for (int round = 0; round < 20; ++round) {
    NBestList list = simulated_list(rng, "u", 12);
    CHECK(pick_best_translation(list, lm) ==
          rerank(list, lm, {0.0, 1.0}).hypotheses[0].tokens);
  }
}

TEST_CASE("pick_best matches exhaustive scoring on 1000 simulated lists") {
  Rng rng(9);
  NGramModel lm = train_lm(
      {{"the", "cat", "sat", "on", "the", "mat"}, {"the", "dog", "ran"}}, 3,
      {0, 0, 0});
  for (int round = 0; round < 1000; ++round) {
    NBestList list = simulated_list(rng, "u" + std::to_string(round), 12);
    // Independent exhaustive argmax over every candidate.
    size_t best_idx = 0;
    double best = -1e300;
    for (size_t i = 0; i < list.hypotheses.size(); ++i) {
      const TokenSequence &tokens = list.hypotheses[i].tokens;
      const double s =
          lm.sentence_logp10(tokens) / (tokens.size() + 1.0);
      if (s > best) {
        best = s;
        best_idx = i;
      }
    }
    CHECK(pick_best_translation(list, lm) ==
          list.hypotheses[best_idx].tokens);
  }
}

TEST_CASE("weight validation") {
  NGramModel lm = train_lm({{"a"}}, 1, {0});
  NBestList list = make_list("u", {"a"});
  CHECK_THROWS_AS(rerank(list, lm, {0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(rerank(list, lm, {-1.0, 1.0}), std::invalid_argument);
}
