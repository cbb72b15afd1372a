#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace longctx {

inline constexpr const char* kToolVersion = "0.1.0";

/// Fatal configuration or input errors; the CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// UTF-8
//
// All character counts in the toolkit are unicode scalar values. Invalid
// byte sequences are consumed one byte at a time so no input can crash the
// pipeline.

std::size_t utf8_length(std::string_view s);

/// Calls fn(cp, byte_offset, byte_len) for every codepoint.
void for_each_codepoint(std::string_view s,
                        const std::function<void(char32_t, std::size_t, std::size_t)>& fn);

/// Byte offset of every codepoint start, with s.size() appended.
std::vector<std::size_t> codepoint_offsets(std::string_view s);

/// First / last n codepoints, always on a codepoint boundary.
std::string_view utf8_prefix(std::string_view s, std::size_t n_cps);
std::string_view utf8_suffix(std::string_view s, std::size_t n_cps);

std::vector<char32_t> decode_utf8(std::string_view s);

bool is_cjk(char32_t cp);
bool is_unicode_punct(char32_t cp);
bool is_space_cp(char32_t cp);

// ---------------------------------------------------------------------------
// text helpers

/// Collapses whitespace runs (ASCII + NBSP + ideographic space) to a single
/// space and trims both ends.
std::string collapse_whitespace(std::string_view s);

std::string ascii_lower(std::string_view s);

/// ASCII case-insensitive find; needle must already be lowercase.
std::size_t find_ci(std::string_view haystack, std::string_view needle_lower);

std::string_view trim(std::string_view s);

/// Splits after sentence terminators . ! ? 。 ！ ？ (runs of terminators stay
/// attached to the sentence). Views into the input.
std::vector<std::string_view> split_sentences(std::string_view text);

/// Blank-line delimited paragraphs.
std::vector<std::string_view> split_paragraphs(std::string_view text);

/// Whitespace-delimited segments.
std::vector<std::string_view> split_ws(std::string_view text);

// ---------------------------------------------------------------------------
// deterministic RNG
//
// splitmix64 with rejection-sampled bounded draws. Every shuffle and random
// choice in the toolkit goes through this class, so results are bit-identical
// across platforms and standard libraries. Shuffle is Fisher-Yates from the
// top: for i = n-1..1, j = bounded(i+1), swap(v[i], v[j]).

class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  std::uint64_t bounded(std::uint64_t n);  // uniform in [0, n)
  double unit();                           // uniform in [0, 1)

  template <class T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i + 1));
      using std::swap;
      swap(v[i], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

/// Derives a sub-seed; used to give every group/case its own stream.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

std::uint64_t fnv1a64(std::string_view s);

// ---------------------------------------------------------------------------
// io

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

/// Runs fn(0..n-1) on up to max_in_flight worker threads. Callers that need
/// ordered output write into a preallocated slot per index.
void parallel_for_indexed(std::size_t n, int max_in_flight,
                          const std::function<void(std::size_t)>& fn);

}  // namespace longctx
