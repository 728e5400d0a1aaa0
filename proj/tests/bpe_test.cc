// tests/bpe_test.cc

#include <doctest.h>

#include <set>
#include <sstream>

#include "oracles.h"
#include "stpipe/bpe.h"
#include "stpipe/rng.h"

using namespace stpipe;

namespace {

std::vector<TokenSequence> random_corpus(Rng &rng, size_t sentences) {
  static const std::vector<std::string> words = {
      "low",  "lower", "lowest", "new",  "newer", "wide", "wider",
      "ab",   "abc",   "b",      "bond", "über",  "groß", "tiny"};
  std::vector<TokenSequence> corpus;
  for (size_t s = 0; s < sentences; ++s) {
    TokenSequence sent;
    const size_t len = 1 + rng.below(8);
    for (size_t i = 0; i < len; ++i) {
      sent.push_back(words[rng.below(words.size())]);
    }
    corpus.push_back(std::move(sent));
  }
  return corpus;
}

}  // namespace

TEST_CASE("two-merge toy example") {
  BpeModel model = learn_bpe({{"low", "low", "lower"}}, 2);
  REQUIRE(model.merges().size() == 2);
  CHECK(model.merges()[0] == std::pair<std::string, std::string>{"l", "o"});
  CHECK(model.merges()[1] == std::pair<std::string, std::string>{"lo", "w"});
  CHECK(apply_bpe(model, {"lower"}) == TokenSequence{"low@@", "e@@", "r"});
  CHECK(apply_bpe(model, {"low"}) == TokenSequence{"low"});
  CHECK(apply_bpe(model, {}) == TokenSequence{});
}

TEST_CASE("no merges below pair frequency two") {
  CHECK(learn_bpe({{"a"}}, 5).merges().empty());
  // Each pair occurs once only.
  CHECK(learn_bpe({{"ab", "cd"}}, 5).merges().empty());
}

TEST_CASE("merge budget caps the merge list") {
  Rng rng(1);
  std::vector<TokenSequence> corpus = random_corpus(rng, 60);
  CHECK(learn_bpe(corpus, 3).merges().size() == 3);
  CHECK(learn_bpe(corpus, 37000).merges().size() <= 37000);
}

TEST_CASE("empty corpus is an error") {
  CHECK_THROWS_AS(learn_bpe({}, 10), EmptyCorpusError);
  CHECK_THROWS_AS(learn_bpe({{}, {}}, 10), EmptyCorpusError);
}

TEST_CASE("merge lists have no duplicates and concatenate cleanly") {
  Rng rng(19);
  std::vector<TokenSequence> corpus = random_corpus(rng, 40);
  BpeModel model = learn_bpe(corpus, 50);
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto &merge : model.merges()) {
    CHECK(seen.insert(merge).second);
    CHECK(model.vocab().count(merge.first + merge.second) == 1);
  }
}

TEST_CASE("learner agrees with the full-recount reference") {
  Rng rng(7);
  for (int round = 0; round < 20; ++round) {
    std::vector<TokenSequence> corpus = random_corpus(rng, 12);
    const size_t budget = 1 + rng.below(25);
    BpeModel model = learn_bpe(corpus, budget);
    CHECK(model.merges() == oracles::brute_force_bpe(corpus, budget));
  }
}

TEST_CASE("merge frequencies are non-increasing when recounted") {
  Rng rng(13);
  for (int round = 0; round < 10; ++round) {
    std::vector<TokenSequence> corpus = random_corpus(rng, 30);
    BpeModel model = learn_bpe(corpus, 40);
    std::vector<int64_t> freqs =
        oracles::replayed_merge_frequencies(corpus, model.merges());
    for (size_t i = 0; i < freqs.size(); ++i) {
      CHECK(freqs[i] >= 2);
      if (i > 0) CHECK(freqs[i] <= freqs[i - 1]);
    }
  }
}

TEST_CASE("revert undoes apply") {
  Rng rng(21);
  std::vector<TokenSequence> corpus = random_corpus(rng, 80);
  BpeModel model = learn_bpe(corpus, 60);
  for (const TokenSequence &sent : corpus) {
    CHECK(revert_bpe(apply_bpe(model, sent)) == sent);
  }
  // Characters unseen in training pass through and still round-trip.
  CHECK(revert_bpe(apply_bpe(model, {"zzgloxx"})) == TokenSequence{"zzgloxx"});
}

TEST_CASE("revert_bpe basics") {
  CHECK(revert_bpe({"low@@", "e@@", "r"}) == TokenSequence{"lower"});
  CHECK(revert_bpe({"hello"}) == TokenSequence{"hello"});
  CHECK(revert_bpe({}) == TokenSequence{});
  CHECK_THROWS_AS(revert_bpe({"a@@"}), DanglingMarkerError);
  CHECK_THROWS_AS(revert_bpe({"ok", "a@@"}), DanglingMarkerError);
}

TEST_CASE("learning is deterministic and the model file round-trips") {
  Rng rng(3);
  std::vector<TokenSequence> corpus = random_corpus(rng, 50);
  std::string first, second;
  {
    std::ostringstream out;
    learn_bpe(corpus, 30).save(out);
    first = out.str();
  }
  {
    std::ostringstream out;
    learn_bpe(corpus, 30).save(out);
    second = out.str();
  }
  CHECK(first == second);
  CHECK(first.rfind("#bpe v1\n", 0) == 0);

  std::istringstream in(first);
  BpeModel reloaded = BpeModel::load(in);
  CHECK(reloaded.merges() == learn_bpe(corpus, 30).merges());
}

TEST_CASE("model files with bad headers or duplicate pairs are rejected") {
  {
    std::istringstream in("nonsense\n");
    CHECK_THROWS_AS(BpeModel::load(in), ParseError);
  }
  {
    std::istringstream in("#bpe v1\na\tb\na\tb\n");
    CHECK_THROWS_AS(BpeModel::load(in), ParseError);
  }
  {
    std::istringstream in("#bpe v1\nmissing-tab\n");
    CHECK_THROWS_AS(BpeModel::load(in), ParseError);
  }
}
