#include <doctest.h>

#include "longctx/budget.hpp"
#include "support.hpp"

using namespace longctx;
using namespace testsupport;

namespace {

// n whitespace-separated ASCII words -> word_based count of exactly n.
std::string words(std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += " ";
    s += "w" + std::to_string(i % 7);
  }
  return s;
}

}  // namespace

TEST_CASE("count_tokens word_based") {
  TokenCounter c;  // word_based
  CHECK(count_tokens("", c) == 0);
  CHECK(count_tokens("a b c", c) == 3);
  CHECK(count_tokens("  a   b  ", c) == 2);
  // whitespace segments plus CJK characters
  CHECK(count_tokens("\xE4\xBD\xA0\xE5\xA5\xBD", c) == 3);  // 你好: 1 segment + 2
  CHECK(count_tokens("hi \xE4\xBD\xA0\xE5\xA5\xBD", c) == 4);
}

TEST_CASE("count_tokens char_based") {
  TokenCounter c{CountMode::char_based, 4.0};
  CHECK(count_tokens("", c) == 0);
  CHECK(count_tokens(std::string(4000, 'x'), c) == 1000);
  CHECK(count_tokens("abcde", c) == 2);  // ceil(5/4)

  TokenCounter zh{CountMode::char_based, 1.5};
  CHECK(count_tokens("\xE4\xBD\xA0\xE5\xA5\xBD\xE5\x90\x97", zh) == 2);  // ceil(3/1.5)
}

TEST_CASE("per-language counter defaults") {
  CHECK(default_counter(Lang::en, CountMode::char_based).chars_per_token == 4.0);
  CHECK(default_counter(Lang::zh, CountMode::char_based).chars_per_token == 1.5);
  CHECK(default_counter(Lang::en).mode == CountMode::word_based);
}

TEST_CASE("count is monotone under concatenation") {
  TokenCounter word;
  TokenCounter chars{CountMode::char_based, 3.0};
  SeededRng rng(77);
  for (int i = 0; i < 60; ++i) {
    std::string a = synth_doc_en(500 + i, 1 + rng.bounded(3));
    std::string b = synth_doc_zh(900 + i, 1 + rng.bounded(2), 6);
    for (const auto& c : {word, chars}) {
      auto ab = count_tokens(a + b, c);
      CHECK(ab >= count_tokens(a, c));
      CHECK(ab >= count_tokens(b, c));
    }
  }
}

TEST_CASE("counter config round-trips through json") {
  TokenCounter c{CountMode::char_based, 1.5};
  CHECK(counter_from_json(counter_to_json(c)) == c);
  CHECK_THROWS_AS(counter_from_json(nlohmann::json{{"mode", "bogus"}}), ConfigError);
}

TEST_CASE("fit_context discards until the budget holds") {
  TokenCounter c;
  Document gold = make_document("g", words(300), Lang::en);
  std::vector<Document> distractors;
  for (int i = 0; i < 5; ++i)
    distractors.push_back(make_document("d" + std::to_string(i), words(300), Lang::en));

  auto fit = fit_context(gold, distractors, 1000, 0, c, 21);

  // Independent recomputation: every document counts 300, so the kept set
  // must be gold plus exactly two distractors (900 <= 1000 < 1200).
  std::size_t total = 0;
  for (const auto& d : fit.kept) total += count_tokens(d.text, c);
  CHECK(total <= 1000);
  CHECK(fit.kept.size() == 3);
  CHECK(fit.kept[0].id == "g");
  CHECK(fit.dropped == 3);
}

TEST_CASE("fit_context keeps everything when it already fits") {
  TokenCounter c;
  Document gold = make_document("g", words(10), Lang::en);
  std::vector<Document> distractors{make_document("d0", words(10), Lang::en),
                                    make_document("d1", words(10), Lang::en)};
  auto a = fit_context(gold, distractors, 1000, 0, c, 1);
  auto b = fit_context(gold, distractors, 1000, 0, c, 999);  // no randomness consumed
  REQUIRE(a.kept.size() == 3);
  CHECK(a.dropped == 0);
  for (std::size_t i = 0; i < a.kept.size(); ++i) CHECK(a.kept[i].id == b.kept[i].id);
}

TEST_CASE("fit_context rejects an oversized gold document") {
  TokenCounter c;
  Document gold = make_document("g", words(1200), Lang::en);
  CHECK_THROWS_WITH_AS(fit_context(gold, {}, 1000, 0, c, 1),
                       doctest::Contains("gold_too_long"), GoldTooLong);
}

TEST_CASE("fit_context overhead counts against the budget") {
  TokenCounter c;
  Document gold = make_document("g", words(50), Lang::en);
  CHECK_THROWS_AS(fit_context(gold, {}, 60, 20, c, 1), GoldTooLong);
  auto fit = fit_context(gold, {}, 80, 20, c, 1);
  CHECK(fit.total_tokens == 70);
}

TEST_CASE("fit_context properties: gold kept, order preserved, deterministic") {
  TokenCounter c;
  SeededRng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    Document gold = make_document("g", words(20 + rng.bounded(30)), Lang::en);
    std::vector<Document> distractors;
    std::size_t n = 3 + rng.bounded(8);
    for (std::size_t i = 0; i < n; ++i)
      distractors.push_back(
          make_document("d" + std::to_string(i), words(10 + rng.bounded(40)), Lang::en));
    std::size_t budget = 120 + rng.bounded(200);
    std::uint64_t seed = rng.next();

    auto a = fit_context(gold, distractors, budget, 5, c, seed);
    auto b = fit_context(gold, distractors, budget, 5, c, seed);

    REQUIRE(!a.kept.empty());
    CHECK(a.kept[0].id == "g");
    CHECK(a.total_tokens <= budget);
    REQUIRE(a.kept.size() == b.kept.size());
    for (std::size_t i = 0; i < a.kept.size(); ++i) CHECK(a.kept[i].id == b.kept[i].id);

    // surviving distractors keep their input order
    std::size_t last_idx = 0;
    for (std::size_t i = 1; i < a.kept.size(); ++i) {
      std::size_t idx = std::stoul(a.kept[i].id.substr(1));
      if (i > 1) CHECK(idx > last_idx);
      last_idx = idx;
    }
  }
}
