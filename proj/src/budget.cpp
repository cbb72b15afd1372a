#include "longctx/budget.hpp"

#include <cmath>

namespace longctx {

using nlohmann::json;

std::string_view to_string(CountMode m) {
  return m == CountMode::word_based ? "word_based" : "char_based";
}

TokenCounter default_counter(Lang lang, CountMode mode) {
  TokenCounter c;
  c.mode = mode;
  c.chars_per_token = lang == Lang::zh ? 1.5 : 4.0;
  return c;
}

std::size_t count_tokens(std::string_view text, const TokenCounter& counter) {
  if (text.empty()) return 0;
  if (counter.mode == CountMode::char_based) {
    double cpt = counter.chars_per_token > 0 ? counter.chars_per_token : 1.0;
    return static_cast<std::size_t>(
        std::ceil(static_cast<double>(utf8_length(text)) / cpt));
  }
  std::size_t segments = 0;
  std::size_t cjk = 0;
  bool in_segment = false;
  for_each_codepoint(text, [&](char32_t cp, std::size_t, std::size_t) {
    if (is_space_cp(cp)) {
      in_segment = false;
    } else {
      if (!in_segment) {
        ++segments;
        in_segment = true;
      }
      if (is_cjk(cp)) ++cjk;
    }
  });
  return segments + cjk;
}

json counter_to_json(const TokenCounter& c) {
  return json{{"mode", std::string(to_string(c.mode))},
              {"chars_per_token", c.chars_per_token}};
}

TokenCounter counter_from_json(const json& j) {
  TokenCounter c;
  if (j.contains("mode")) {
    auto m = j["mode"].get<std::string>();
    if (m == "word_based") {
      c.mode = CountMode::word_based;
    } else if (m == "char_based") {
      c.mode = CountMode::char_based;
    } else {
      throw ConfigError("unknown counter mode: " + m);
    }
  }
  if (j.contains("chars_per_token"))
    c.chars_per_token = j["chars_per_token"].get<double>();
  if (c.chars_per_token <= 0)
    throw ConfigError("chars_per_token must be positive");
  return c;
}

FitResult fit_context(const Document& gold, const std::vector<Document>& distractors,
                      std::size_t budget, std::size_t overhead,
                      const TokenCounter& counter, std::uint64_t seed) {
  std::size_t gold_count = count_tokens(gold.text, counter);
  if (gold_count + overhead > budget)
    throw GoldTooLong("gold_too_long: gold document " + gold.id + " counts " +
                      std::to_string(gold_count) + " tokens, budget " +
                      std::to_string(budget) + " minus overhead " +
                      std::to_string(overhead));

  std::vector<std::size_t> counts(distractors.size());
  std::size_t total = gold_count + overhead;
  for (std::size_t i = 0; i < distractors.size(); ++i) {
    counts[i] = count_tokens(distractors[i].text, counter);
    total += counts[i];
  }

  std::vector<bool> alive(distractors.size(), true);
  std::size_t n_alive = distractors.size();
  SeededRng rng(seed);
  while (total > budget && n_alive > 0) {
    std::uint64_t pick = rng.bounded(n_alive);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < alive.size(); ++i) {
      if (!alive[i]) continue;
      if (pick == 0) {
        idx = i;
        break;
      }
      --pick;
    }
    alive[idx] = false;
    --n_alive;
    total -= counts[idx];
  }

  FitResult r;
  r.kept.reserve(n_alive + 1);
  r.kept.push_back(gold);
  for (std::size_t i = 0; i < distractors.size(); ++i)
    if (alive[i]) r.kept.push_back(distractors[i]);
  r.total_tokens = total;
  r.dropped = distractors.size() - n_alive;
  return r;
}

}  // namespace longctx
