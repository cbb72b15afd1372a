#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "longctx/corpus.hpp"

namespace longctx {

struct GenerationPolicy {
  std::string endpoint_url;
  std::string model_name = "gpt-4";
  double temperature = 0.7;  // eval runs force 0
  int max_retries = 5;
  double request_timeout_s = 120.0;
  int max_in_flight = 4;
};

struct ChatMessage {
  std::string role;
  std::string content;
};

struct TransportError : std::runtime_error {
  int status;  // HTTP status; 0 = network error or timeout
  TransportError(int status_, const std::string& what)
      : std::runtime_error(what), status(status_) {}
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  /// Returns the first choice's message content; throws TransportError.
  virtual std::string complete(const GenerationPolicy& policy,
                               const std::vector<ChatMessage>& messages) = 0;
};

/// Transport backed by a callable; the building block for scripted tests.
class LambdaTransport : public ChatTransport {
 public:
  using Fn = std::function<std::string(const GenerationPolicy&,
                                       const std::vector<ChatMessage>&)>;
  explicit LambdaTransport(Fn fn) : fn_(std::move(fn)) {}
  std::string complete(const GenerationPolicy& policy,
                       const std::vector<ChatMessage>& messages) override {
    return fn_(policy, messages);
  }

 private:
  Fn fn_;
};

/// http(s):// endpoints speak the chat-completions wire protocol with the
/// GEN_API_KEY bearer token. "mock:<behavior>" endpoints resolve in-process:
///   mock:echo                 returns the last user message
///   mock:fixed:<text>         returns <text>
///   mock:qa                   well-formed QA pair for a generation prompt
///   mock:qa_flaky:<p>[:seed]  like qa, but a transport fault with
///                             probability p per prompt
///   mock:flaky:<p>[:seed]     transport error with probability p, decided
///                             per prompt (hash of prompt and seed), so the
///                             fault schedule is reproducible under any
///                             concurrency
///   mock:random_choice:<k>[:seed]  "Paragraph i", i uniform in [1,k] per prompt
std::unique_ptr<ChatTransport> make_transport(const GenerationPolicy& policy);

/// One-shot convenience wrapper over make_transport.
std::string chat_complete(const GenerationPolicy& policy,
                          const std::vector<ChatMessage>& messages);

// ---------------------------------------------------------------------------
// QA generation

struct QAPair {
  std::string question;
  std::string paraphrase_span;
  std::string answer_body;
  std::string gold_doc_id;
  std::string raw_answer;
};

/// Generation prompt with a {document} slot; byte-stable.
extern const std::string kQaPromptTemplate;
/// Required answer prefix: "According to the original text".
extern const std::string kAnswerPrefix;

std::string build_qa_prompt(const Document& doc);

enum class InvalidReason {
  missing_prefix,
  empty_span,
  span_not_in_document,
  missing_question,
};
std::string_view to_string(InvalidReason r);

struct AnswerCheck {
  bool valid = false;
  InvalidReason reason = InvalidReason::missing_prefix;
  std::string span;
  std::string body;
};

/// Valid iff the answer starts with the required prefix followed by a quoted
/// span (ASCII ' ", curly quotes, or CJK brackets) whose overlap with
/// gold_text reaches fuzz. fuzz = 1.0 demands an exact substring.
AnswerCheck validate_answer_format(std::string_view answer,
                                   std::string_view gold_text, double fuzz);

/// Overlap in [0,1]: the best longest-common-subsequence ratio between the
/// span and any equal-length window of the text, after lowercasing and
/// whitespace collapsing. 1.0 exactly when the span is a substring.
double span_overlap_ratio(std::string_view span, std::string_view text);

enum class GenFailure { none, format, transport };
std::string_view to_string(GenFailure f);

struct QaOutcome {
  std::optional<QAPair> pair;
  int attempts = 0;
  GenFailure failure = GenFailure::none;
  std::string last_reason;
  bool ok() const { return pair.has_value(); }
};

/// Sends the generation prompt and re-validates until a well-formed pair
/// arrives or max_retries attempts are spent. Each attempt reuses the same
/// prompt. Transport failures count against the same bound.
QaOutcome generate_qa_pair(ChatTransport& transport, const Document& doc,
                           const GenerationPolicy& policy, double fuzz);
QaOutcome generate_qa_pair(const Document& doc, const GenerationPolicy& policy,
                           double fuzz);

/// Splits a model response into question and answer via "Question:" /
/// "Answer:" markers (case-insensitive). Exposed for tests.
struct ParsedResponse {
  std::string question;
  std::string answer;
};
ParsedResponse parse_qa_response(std::string_view response);

}  // namespace longctx
