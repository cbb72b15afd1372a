#include "longctx/genclient.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <unordered_map>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "longctx/util.hpp"

namespace longctx {

using nlohmann::json;

const std::string kAnswerPrefix = "According to the original text";

const std::string kQaPromptTemplate =
    "Document:\n"
    "{document}\n"
    "Please degisn an question answer pair base on the document.\n"
    "The answer of the QA pair must start with \"According to the original text "
    "'......'\", first give the relevant original text in the reference content, "
    "and then answer the question in detail.";

std::string build_qa_prompt(const Document& doc) {
  std::string prompt = kQaPromptTemplate;
  auto slot = prompt.find("{document}");
  prompt.replace(slot, 10, doc.text);
  return prompt;
}

std::string_view to_string(InvalidReason r) {
  switch (r) {
    case InvalidReason::missing_prefix: return "missing_prefix";
    case InvalidReason::empty_span: return "empty_span";
    case InvalidReason::span_not_in_document: return "span_not_in_document";
    case InvalidReason::missing_question: return "missing_question";
  }
  return "unknown";
}

std::string_view to_string(GenFailure f) {
  switch (f) {
    case GenFailure::none: return "none";
    case GenFailure::format: return "format";
    case GenFailure::transport: return "transport";
  }
  return "unknown";
}

namespace {

// Accepted span delimiters; model output mixes ASCII, typographic and CJK
// quotes.
char32_t closing_quote_for(char32_t open) {
  switch (open) {
    case U'\'': return U'\'';
    case U'"': return U'"';
    case 0x2018: return 0x2019;  // ' '
    case 0x201C: return 0x201D;  // " "
    case 0x300C: return 0x300D;  // 「 」
    case 0x300E: return 0x300F;  // 『 』
    default: return 0;
  }
}

std::string lower_collapsed(std::string_view s) {
  return ascii_lower(collapse_whitespace(s));
}

std::size_t lcs_codepoints(const std::vector<char32_t>& a, std::size_t a_off,
                           std::size_t a_len, const std::vector<char32_t>& b) {
  if (a_len == 0 || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a_len; ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[a_off + i - 1] == b[j - 1]) {
        cur[j] = prev[j - 1] + 1;
      } else {
        cur[j] = std::max(prev[j], cur[j - 1]);
      }
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

double span_overlap_ratio(std::string_view span, std::string_view text) {
  std::string span_n = lower_collapsed(span);
  std::string text_n = lower_collapsed(text);
  if (span_n.empty()) return 0.0;
  if (text_n.find(span_n) != std::string::npos) return 1.0;

  std::vector<char32_t> s = decode_utf8(span_n);
  std::vector<char32_t> t = decode_utf8(text_n);
  std::size_t m = s.size();
  if (t.size() <= m)
    return static_cast<double>(lcs_codepoints(t, 0, t.size(), s)) /
           static_cast<double>(m);

  std::unordered_map<char32_t, long> span_count;
  for (char32_t c : s) ++span_count[c];

  // Sliding multiset intersection bounds the LCS from above, so windows that
  // cannot beat the best score skip the quadratic DP.
  std::unordered_map<char32_t, long> win_count;
  long inter = 0;
  auto add = [&](char32_t c) {
    auto it = span_count.find(c);
    long limit = it == span_count.end() ? 0 : it->second;
    if (win_count[c]++ < limit) ++inter;
  };
  auto remove = [&](char32_t c) {
    auto it = span_count.find(c);
    long limit = it == span_count.end() ? 0 : it->second;
    if (--win_count[c] < limit) --inter;
  };

  for (std::size_t i = 0; i < m; ++i) add(t[i]);
  std::size_t best = 0;
  for (std::size_t start = 0;; ++start) {
    if (static_cast<std::size_t>(inter) > best) {
      std::size_t lcs = lcs_codepoints(t, start, m, s);
      best = std::max(best, lcs);
      if (best == m) break;
    }
    if (start + m >= t.size()) break;
    remove(t[start]);
    add(t[start + m]);
  }
  return static_cast<double>(best) / static_cast<double>(m);
}

AnswerCheck validate_answer_format(std::string_view answer,
                                   std::string_view gold_text, double fuzz) {
  AnswerCheck out;
  std::string_view rest = trim(answer);
  if (rest.substr(0, kAnswerPrefix.size()) != kAnswerPrefix) {
    out.reason = InvalidReason::missing_prefix;
    return out;
  }
  rest.remove_prefix(kAnswerPrefix.size());

  // First non-space codepoint must open the quoted span; the span ends at the
  // next matching closer.
  auto cps = decode_utf8(rest);
  auto offs = codepoint_offsets(rest);
  std::size_t open_idx = 0;
  while (open_idx < cps.size() && is_space_cp(cps[open_idx])) ++open_idx;
  if (open_idx == cps.size() || closing_quote_for(cps[open_idx]) == 0) {
    out.reason = InvalidReason::empty_span;
    return out;
  }
  char32_t close = closing_quote_for(cps[open_idx]);
  std::size_t close_idx = cps.size();
  for (std::size_t j = open_idx + 1; j < cps.size(); ++j) {
    if (cps[j] == close) {
      close_idx = j;
      break;
    }
  }
  if (close_idx == cps.size()) {
    out.reason = InvalidReason::empty_span;
    return out;
  }

  std::string span(
      rest.substr(offs[open_idx + 1], offs[close_idx] - offs[open_idx + 1]));
  if (trim(span).empty()) {
    out.reason = InvalidReason::empty_span;
    return out;
  }

  double overlap = span_overlap_ratio(span, gold_text);
  if (overlap < fuzz) {
    out.reason = InvalidReason::span_not_in_document;
    return out;
  }

  // Body: remainder after the quote, minus one leading separator.
  std::string_view body = rest.substr(offs[close_idx + 1]);
  body = trim(body);
  static const std::string_view kSeparators[] = {",", "\xEF\xBC\x8C", "\xE3\x80\x81",
                                                 ":", "\xEF\xBC\x9A", "."};
  for (auto sep : kSeparators) {
    if (body.substr(0, sep.size()) == sep) {
      body.remove_prefix(sep.size());
      body = trim(body);
      break;
    }
  }

  out.valid = true;
  out.span = std::move(span);
  out.body = std::string(body);
  return out;
}

ParsedResponse parse_qa_response(std::string_view response) {
  ParsedResponse out;
  std::size_t q_pos = find_ci(response, "question:");
  std::size_t a_pos = std::string_view::npos;
  if (q_pos != std::string_view::npos) {
    a_pos = find_ci(response.substr(q_pos), "answer:");
    if (a_pos != std::string_view::npos) a_pos += q_pos;
  } else {
    a_pos = find_ci(response, "answer:");
  }

  if (a_pos != std::string_view::npos) {
    out.answer = std::string(trim(response.substr(a_pos + 7)));
    if (q_pos != std::string_view::npos && q_pos < a_pos)
      out.question = std::string(trim(response.substr(q_pos + 9, a_pos - q_pos - 9)));
    return out;
  }

  // Tolerate responses without an explicit Answer marker.
  std::size_t prefix_pos = find_ci(response, "according to the original text");
  if (prefix_pos != std::string_view::npos) {
    out.answer = std::string(trim(response.substr(prefix_pos)));
    std::string_view before = response.substr(0, prefix_pos);
    if (q_pos != std::string_view::npos)
      out.question = std::string(trim(before.substr(q_pos + 9)));
    return out;
  }

  out.answer = std::string(trim(response));
  if (q_pos != std::string_view::npos)
    out.question = std::string(trim(response.substr(q_pos + 9)));
  return out;
}

QaOutcome generate_qa_pair(ChatTransport& transport, const Document& doc,
                           const GenerationPolicy& policy, double fuzz) {
  QaOutcome out;
  std::vector<ChatMessage> messages{{"user", build_qa_prompt(doc)}};
  int max_attempts = std::max(1, policy.max_retries);
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    out.attempts = attempt;
    std::string response;
    try {
      response = transport.complete(policy, messages);
    } catch (const TransportError& e) {
      out.failure = GenFailure::transport;
      out.last_reason = e.what();
      continue;
    }
    ParsedResponse parsed = parse_qa_response(response);
    AnswerCheck check = validate_answer_format(parsed.answer, doc.text, fuzz);
    if (!check.valid) {
      out.failure = GenFailure::format;
      out.last_reason = std::string(to_string(check.reason));
      continue;
    }
    if (trim(parsed.question).empty()) {
      out.failure = GenFailure::format;
      out.last_reason = std::string(to_string(InvalidReason::missing_question));
      continue;
    }
    QAPair pair;
    pair.question = parsed.question;
    pair.paraphrase_span = check.span;
    pair.answer_body = check.body;
    pair.gold_doc_id = doc.id;
    pair.raw_answer = parsed.answer;
    out.pair = std::move(pair);
    out.failure = GenFailure::none;
    out.last_reason.clear();
    return out;
  }
  return out;
}

QaOutcome generate_qa_pair(const Document& doc, const GenerationPolicy& policy,
                           double fuzz) {
  auto transport = make_transport(policy);
  return generate_qa_pair(*transport, doc, policy, fuzz);
}

// ---------------------------------------------------------------------------
// transports

namespace {

std::string concat_user_content(const std::vector<ChatMessage>& messages) {
  std::string all;
  for (const auto& m : messages)
    if (m.role == "user") all += m.content;
  return all;
}

// Deterministic well-formed response for a generation prompt; the span is the
// document's first sentence, so validation always passes at any fuzz.
std::string scripted_qa_response(const std::string& prompt) {
  std::string doc = prompt;
  auto start = prompt.find("Document:\n");
  auto end = prompt.find("\nPlease degisn");
  if (start != std::string::npos && end != std::string::npos && end > start + 10)
    doc = prompt.substr(start + 10, end - start - 10);
  auto sentences = split_sentences(doc);
  std::string span = sentences.empty() ? doc : std::string(sentences.front());
  return "Question: What does the document describe?\nAnswer: According to the "
         "original text '" +
         span + "', the document describes " + span;
}

class MockTransport : public ChatTransport {
 public:
  explicit MockTransport(std::string behavior) : behavior_(std::move(behavior)) {}

  std::string complete(const GenerationPolicy&,
                       const std::vector<ChatMessage>& messages) override {
    std::string name = behavior_;
    std::string rest;
    if (auto colon = behavior_.find(':'); colon != std::string::npos) {
      name = behavior_.substr(0, colon);
      rest = behavior_.substr(colon + 1);
    }
    if (name == "echo") {
      for (auto it = messages.rbegin(); it != messages.rend(); ++it)
        if (it->role == "user") return it->content;
      return "";
    }
    if (name == "fixed") return rest;
    if (name == "qa") return scripted_qa_response(concat_user_content(messages));
    if (name == "qa_flaky") {
      auto [p, seed] = parse_p_seed(rest);
      SeededRng rng(mix_seed(seed, fnv1a64(concat_user_content(messages))));
      if (rng.unit() < p) throw TransportError(0, "injected mock fault");
      return scripted_qa_response(concat_user_content(messages));
    }
    if (name == "flaky") {
      auto [p, seed] = parse_p_seed(rest);
      SeededRng rng(mix_seed(seed, fnv1a64(concat_user_content(messages))));
      if (rng.unit() < p) throw TransportError(0, "injected mock fault");
      return "ok";
    }
    if (name == "random_choice") {
      auto [k, seed] = parse_k_seed(rest);
      SeededRng rng(mix_seed(seed, fnv1a64(concat_user_content(messages))));
      return "Paragraph " + std::to_string(rng.bounded(k) + 1);
    }
    throw ConfigError("unknown mock behavior: " + behavior_);
  }

 private:
  static std::pair<double, std::uint64_t> parse_p_seed(const std::string& rest) {
    try {
      auto colon = rest.find(':');
      double p = std::stod(rest.substr(0, colon));
      std::uint64_t seed = 0;
      if (colon != std::string::npos) seed = std::stoull(rest.substr(colon + 1));
      return {p, seed};
    } catch (const std::exception&) {
      throw ConfigError("mock:flaky expects <p>[:seed], got: " + rest);
    }
  }
  static std::pair<std::uint64_t, std::uint64_t> parse_k_seed(const std::string& rest) {
    try {
      auto colon = rest.find(':');
      std::uint64_t k = std::stoull(rest.substr(0, colon));
      if (k == 0) throw ConfigError("random_choice needs k >= 1");
      std::uint64_t seed = 0;
      if (colon != std::string::npos) seed = std::stoull(rest.substr(colon + 1));
      return {k, seed};
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("mock:random_choice expects <k>[:seed], got: " + rest);
    }
  }

  std::string behavior_;
};

class HttpTransport : public ChatTransport {
 public:
  explicit HttpTransport(std::string base_url) {
    // scheme://host[:port][/base-path]
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos)
      throw ConfigError("endpoint_url must be http(s):// or mock:, got: " + base_url);
    auto path_start = base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
      origin_ = base_url;
    } else {
      origin_ = base_url.substr(0, path_start);
      base_path_ = base_url.substr(path_start);
      while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
    }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (origin_.rfind("https://", 0) == 0)
      throw ConfigError("built without TLS support; use an http:// endpoint");
#endif
  }

  std::string complete(const GenerationPolicy& policy,
                       const std::vector<ChatMessage>& messages) override {
    json body;
    body["model"] = policy.model_name;
    body["temperature"] = policy.temperature;
    auto msgs = json::array();
    for (const auto& m : messages)
      msgs.push_back(json{{"role", m.role}, {"content", m.content}});
    body["messages"] = msgs;

    httplib::Client client(origin_);
    auto timeout_s = static_cast<time_t>(policy.request_timeout_s);
    auto timeout_us =
        static_cast<time_t>((policy.request_timeout_s - static_cast<double>(timeout_s)) * 1e6);
    client.set_connection_timeout(timeout_s, timeout_us);
    client.set_read_timeout(timeout_s, timeout_us);
    client.set_write_timeout(timeout_s, timeout_us);

    httplib::Headers headers;
    if (const char* key = std::getenv("GEN_API_KEY"); key && *key)
      headers.emplace("Authorization", std::string("Bearer ") + key);

    auto res = client.Post(base_path_ + "/chat/completions", headers, body.dump(),
                           "application/json");
    if (!res)
      throw TransportError(0, "transport error: " + httplib::to_string(res.error()));
    if (res->status / 100 != 2) {
      std::string excerpt = res->body.substr(0, 200);
      throw TransportError(res->status, "HTTP " + std::to_string(res->status) +
                                            " from endpoint: " + excerpt);
    }
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") ||
        parsed["choices"].empty() || !parsed["choices"][0].contains("message"))
      throw TransportError(res->status,
                           "malformed chat response: " + res->body.substr(0, 200));
    return parsed["choices"][0]["message"].value("content", std::string{});
  }

 private:
  std::string origin_;
  std::string base_path_;
};

}  // namespace

std::unique_ptr<ChatTransport> make_transport(const GenerationPolicy& policy) {
  const std::string& url = policy.endpoint_url;
  if (url.rfind("mock:", 0) == 0)
    return std::make_unique<MockTransport>(url.substr(5));
  return std::make_unique<HttpTransport>(url);
}

std::string chat_complete(const GenerationPolicy& policy,
                          const std::vector<ChatMessage>& messages) {
  if (messages.empty()) throw ConfigError("chat_complete: messages must be non-empty");
  return make_transport(policy)->complete(policy, messages);
}

}  // namespace longctx
