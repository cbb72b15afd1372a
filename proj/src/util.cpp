#include "longctx/util.hpp"

#include <atomic>
#include <cctype>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace longctx {

namespace {

// Decodes one codepoint starting at s[i]; advances i. Invalid sequences are
// consumed one byte at a time and returned as that byte's value.
char32_t decode_one(std::string_view s, std::size_t& i) {
  unsigned char b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int extra = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    extra = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    extra = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    extra = 3;
    cp = b0 & 0x07;
  } else {
    ++i;
    return b0;
  }
  if (i + extra >= s.size()) {
    ++i;
    return b0;
  }
  for (int k = 1; k <= extra; ++k) {
    unsigned char bk = static_cast<unsigned char>(s[i + k]);
    if ((bk & 0xC0) != 0x80) {
      ++i;
      return b0;
    }
    cp = (cp << 6) | (bk & 0x3F);
  }
  i += 1 + extra;
  return cp;
}

}  // namespace

std::size_t utf8_length(std::string_view s) {
  std::size_t i = 0, n = 0;
  while (i < s.size()) {
    decode_one(s, i);
    ++n;
  }
  return n;
}

void for_each_codepoint(std::string_view s,
                        const std::function<void(char32_t, std::size_t, std::size_t)>& fn) {
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t start = i;
    char32_t cp = decode_one(s, i);
    fn(cp, start, i - start);
  }
}

std::vector<std::size_t> codepoint_offsets(std::string_view s) {
  std::vector<std::size_t> offs;
  offs.reserve(s.size() + 1);
  std::size_t i = 0;
  while (i < s.size()) {
    offs.push_back(i);
    decode_one(s, i);
  }
  offs.push_back(s.size());
  return offs;
}

std::string_view utf8_prefix(std::string_view s, std::size_t n_cps) {
  std::size_t i = 0, n = 0;
  while (i < s.size() && n < n_cps) {
    decode_one(s, i);
    ++n;
  }
  return s.substr(0, i);
}

std::string_view utf8_suffix(std::string_view s, std::size_t n_cps) {
  std::size_t total = utf8_length(s);
  if (n_cps >= total) return s;
  std::size_t skip = total - n_cps;
  std::size_t i = 0, n = 0;
  while (i < s.size() && n < skip) {
    decode_one(s, i);
    ++n;
  }
  return s.substr(i);
}

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) out.push_back(decode_one(s, i));
  return out;
}

bool is_cjk(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) ||    // unified ideographs
         (cp >= 0x3400 && cp <= 0x4DBF) ||    // extension A
         (cp >= 0xF900 && cp <= 0xFAFF) ||    // compatibility ideographs
         (cp >= 0x20000 && cp <= 0x2A6DF);    // extension B
}

bool is_unicode_punct(char32_t cp) {
  if (cp < 0x80) return std::ispunct(static_cast<unsigned char>(cp)) != 0;
  return (cp >= 0x00A1 && cp <= 0x00BF) ||  // inverted marks, guillemets
         (cp >= 0x2000 && cp <= 0x206F) ||  // general punctuation, curly quotes
         (cp >= 0x2E00 && cp <= 0x2E7F) ||  // supplemental punctuation
         (cp >= 0x3000 && cp <= 0x303F) ||  // CJK symbols: 。、「」『』
         (cp >= 0xFE30 && cp <= 0xFE4F) ||  // CJK compatibility forms
         (cp >= 0xFF01 && cp <= 0xFF0F) ||  // fullwidth ！＂＃...／
         (cp >= 0xFF1A && cp <= 0xFF20) ||  // fullwidth ：；＜...＠
         (cp >= 0xFF3B && cp <= 0xFF40) ||  // fullwidth ［＼...｀
         (cp >= 0xFF5B && cp <= 0xFF65);    // fullwidth ｛｜｝～ and halfwidth 。「」
}

bool is_space_cp(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' ||
         cp == '\v' || cp == 0x00A0 || cp == 0x3000;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  bool seen_content = false;
  for_each_codepoint(s, [&](char32_t cp, std::size_t off, std::size_t len) {
    if (is_space_cp(cp)) {
      pending_space = true;
      return;
    }
    if (pending_space && seen_content) out.push_back(' ');
    pending_space = false;
    seen_content = true;
    out.append(s.substr(off, len));
  });
  return out;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::size_t find_ci(std::string_view haystack, std::string_view needle_lower) {
  if (needle_lower.empty()) return 0;
  if (haystack.size() < needle_lower.size()) return std::string_view::npos;
  for (std::size_t i = 0; i + needle_lower.size() <= haystack.size(); ++i) {
    bool hit = true;
    for (std::size_t k = 0; k < needle_lower.size(); ++k) {
      char c = static_cast<char>(std::tolower(static_cast<unsigned char>(haystack[i + k])));
      if (c != needle_lower[k]) {
        hit = false;
        break;
      }
    }
    if (hit) return i;
  }
  return std::string_view::npos;
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  std::size_t e = s.size();
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

namespace {

bool is_sentence_end(char32_t cp) {
  return cp == '.' || cp == '!' || cp == '?' || cp == 0x3002 || cp == 0xFF01 ||
         cp == 0xFF1F;
}

}  // namespace

std::vector<std::string_view> split_sentences(std::string_view text) {
  std::vector<std::string_view> out;
  auto offs = codepoint_offsets(text);
  auto cps = decode_utf8(text);
  std::size_t n = cps.size();
  std::size_t start = 0;  // codepoint index
  std::size_t i = 0;
  while (i < n) {
    if (is_sentence_end(cps[i])) {
      while (i + 1 < n && is_sentence_end(cps[i + 1])) ++i;  // "..." / "?!"
      std::string_view sent = text.substr(offs[start], offs[i + 1] - offs[start]);
      sent = trim(sent);
      if (!sent.empty()) out.push_back(sent);
      ++i;
      start = i;
    } else {
      ++i;
    }
  }
  if (start < n) {
    std::string_view tail = trim(text.substr(offs[start]));
    if (!tail.empty()) out.push_back(tail);
  }
  return out;
}

std::vector<std::string_view> split_paragraphs(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  std::size_t para_start = 0;
  bool in_para = false;
  auto flush = [&](std::size_t end) {
    std::string_view p = trim(text.substr(para_start, end - para_start));
    if (!p.empty()) out.push_back(p);
  };
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = trim(text.substr(pos, eol - pos));
    if (line.empty()) {
      if (in_para) {
        flush(pos);
        in_para = false;
      }
    } else if (!in_para) {
      para_start = pos;
      in_para = true;
    }
    pos = eol + 1;
  }
  if (in_para) flush(text.size());
  return out;
}

std::vector<std::string_view> split_ws(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

std::uint64_t SeededRng::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t SeededRng::bounded(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("SeededRng::bounded: n must be > 0");
  std::uint64_t threshold = (0 - n) % n;  // rejection keeps the draw unbiased
  for (;;) {
    std::uint64_t r = next();
    if (r >= threshold) return r % n;
  }
}

double SeededRng::unit() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a + 0x9E3779B97F4A7C15ull * (b + 0x9E3779B97F4A7C15ull);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write file: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ConfigError("write failed: " + path);
}

void parallel_for_indexed(std::size_t n, int max_in_flight,
                          const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t workers = static_cast<std::size_t>(max_in_flight > 0 ? max_in_flight : 1);
  if (workers > n) workers = n;
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr first_error = nullptr;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t i = cursor.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace longctx
