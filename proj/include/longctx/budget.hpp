#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "longctx/corpus.hpp"

namespace longctx {

enum class CountMode { word_based, char_based };

std::string_view to_string(CountMode m);

/// Auditable token counters. word_based counts whitespace-delimited segments
/// plus CJK characters; char_based counts ceil(char_len / chars_per_token).
/// Neither replicates any model's tokenizer; the counter config is written
/// into every dataset's metadata instead.
struct TokenCounter {
  CountMode mode = CountMode::word_based;
  double chars_per_token = 4.0;  // char_based only

  bool operator==(const TokenCounter&) const = default;
};

/// char_based default: 4 chars/token for en, 1.5 for zh.
TokenCounter default_counter(Lang lang, CountMode mode = CountMode::word_based);

std::size_t count_tokens(std::string_view text, const TokenCounter& counter);

nlohmann::json counter_to_json(const TokenCounter& c);
TokenCounter counter_from_json(const nlohmann::json& j);

struct GoldTooLong : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FitResult {
  /// Gold first, then surviving distractors in their input order.
  std::vector<Document> kept;
  std::size_t total_tokens = 0;  // kept docs + overhead
  std::size_t dropped = 0;
};

/// Discards distractors one at a time, uniformly at random under seed, until
/// total count + overhead fits the budget. Throws GoldTooLong when the gold
/// document plus overhead alone exceeds it. Consumes no randomness when
/// everything already fits.
FitResult fit_context(const Document& gold, const std::vector<Document>& distractors,
                      std::size_t budget, std::size_t overhead,
                      const TokenCounter& counter, std::uint64_t seed);

}  // namespace longctx
