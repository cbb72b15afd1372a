#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "longctx/genclient.hpp"
#include "support.hpp"

using namespace longctx;
using namespace testsupport;

namespace {

// Independent overlap oracle: lowercase + collapse whitespace, then the best
// LCS ratio between the span and any equal-length codepoint window.
std::size_t oracle_lcs(const std::vector<char32_t>& a, const std::vector<char32_t>& b) {
  std::vector<std::vector<std::size_t>> dp(a.size() + 1,
                                           std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      dp[i][j] = a[i - 1] == b[j - 1]
                     ? dp[i - 1][j - 1] + 1
                     : std::max(dp[i - 1][j], dp[i][j - 1]);
  return dp[a.size()][b.size()];
}

double oracle_overlap(std::string_view span, std::string_view text) {
  auto s = decode_utf8(ascii_lower(collapse_whitespace(span)));
  auto t = decode_utf8(ascii_lower(collapse_whitespace(text)));
  if (s.empty()) return 0.0;
  if (t.size() <= s.size())
    return static_cast<double>(oracle_lcs(s, t)) / static_cast<double>(s.size());
  std::size_t best = 0;
  for (std::size_t start = 0; start + s.size() <= t.size(); ++start) {
    std::vector<char32_t> window(t.begin() + start, t.begin() + start + s.size());
    best = std::max(best, oracle_lcs(s, window));
  }
  return static_cast<double>(best) / static_cast<double>(s.size());
}

Document doc_of(const std::string& text) { return make_document("g", text, Lang::en); }

}  // namespace

TEST_CASE("build_qa_prompt substitutes the document slot only") {
  auto p = build_qa_prompt(doc_of("X"));
  CHECK(p.find("Document:\nX\n") != std::string::npos);
  std::string tail = "answer the question in detail.";
  REQUIRE(p.size() >= tail.size());
  CHECK(p.substr(p.size() - tail.size()) == tail);

  auto a = build_qa_prompt(doc_of("AAA"));
  auto b = build_qa_prompt(doc_of("BBB"));
  auto slot_a = a.find("AAA");
  CHECK(a.substr(0, slot_a) == b.substr(0, b.find("BBB")));
  CHECK(a.substr(slot_a + 3) == b.substr(b.find("BBB") + 3));
}

TEST_CASE("generation prompt template matches the golden file") {
  auto golden = read_text_file(std::string(LONGCTX_TEST_DIR) + "/golden/gen_prompt.txt");
  CHECK(kQaPromptTemplate == golden);
}

TEST_CASE("validate_answer_format accepts an exact quoted span") {
  std::string gold = "We looked up and saw that the sky is blue above the hills.";
  auto r = validate_answer_format(
      "According to the original text 'the sky is blue', the answer is blue.", gold, 1.0);
  REQUIRE(r.valid);
  CHECK(r.span == "the sky is blue");
  CHECK(r.body == "the answer is blue.");
}

TEST_CASE("validate_answer_format rejects a missing prefix") {
  auto r = validate_answer_format("The answer is blue.", "the sky is blue", 1.0);
  CHECK(!r.valid);
  CHECK(r.reason == InvalidReason::missing_prefix);
}

TEST_CASE("fuzzy span matching against the overlap oracle") {
  std::string gold = "we know the sky is blue today";
  std::string span = "the sky was blue";
  double oracle = oracle_overlap(span, gold);
  CHECK(oracle == doctest::Approx(0.875));
  CHECK(span_overlap_ratio(span, gold) == doctest::Approx(oracle));

  std::string answer = "According to the original text 'the sky was blue', it is blue.";
  CHECK(validate_answer_format(answer, gold, 0.8).valid);
  auto strict = validate_answer_format(answer, gold, 1.0);
  CHECK(!strict.valid);
  CHECK(strict.reason == InvalidReason::span_not_in_document);
}

TEST_CASE("span_overlap_ratio agrees with the oracle on random inputs") {
  SeededRng rng(17);
  for (int i = 0; i < 40; ++i) {
    std::string text = synth_doc_en(3000 + i, 4, 5);
    std::string span = synth_doc_en(9000 + i, 1, 4);
    if (rng.unit() < 0.4) {
      // plant a mutated copy of the span inside the text
      std::string planted = span;
      if (!planted.empty()) planted[planted.size() / 2] = 'q';
      text += " " + planted;
    }
    CHECK(span_overlap_ratio(span, text) ==
          doctest::Approx(oracle_overlap(span, text)).epsilon(1e-12));
  }
}

TEST_CASE("exact substring always scores 1") {
  std::string text = synth_doc_en(123, 6);
  auto sentences = split_sentences(text);
  REQUIRE(!sentences.empty());
  CHECK(span_overlap_ratio(std::string(sentences[1]), text) == 1.0);
}

TEST_CASE("validate_answer_format quote variants") {
  std::string gold = "clearly the sky is blue here";
  auto curly = validate_answer_format(
      "According to the original text \xE2\x80\x98the sky is blue\xE2\x80\x99, yes.",
      gold, 1.0);
  CHECK(curly.valid);
  auto cjk = validate_answer_format(
      "According to the original text \xE3\x80\x8Cthe sky is blue\xE3\x80\x8D, yes.",
      gold, 1.0);
  CHECK(cjk.valid);
  auto dquote = validate_answer_format(
      "According to the original text \"the sky is blue\", yes.", gold, 1.0);
  CHECK(dquote.valid);
}

TEST_CASE("validate_answer_format reports empty spans") {
  std::string gold = "anything";
  auto none = validate_answer_format("According to the original text , nothing quoted",
                                     gold, 0.5);
  CHECK(!none.valid);
  CHECK(none.reason == InvalidReason::empty_span);
  auto empty = validate_answer_format("According to the original text '', x", gold, 0.5);
  CHECK(!empty.valid);
  CHECK(empty.reason == InvalidReason::empty_span);
}

TEST_CASE("parse_qa_response splits on markers") {
  auto r = parse_qa_response("Question: What color?\nAnswer: According to the "
                             "original text 'x', blue.");
  CHECK(r.question == "What color?");
  CHECK(r.answer.substr(0, 9) == "According");

  auto no_marker = parse_qa_response("According to the original text 'x', blue.");
  CHECK(no_marker.question.empty());
  CHECK(no_marker.answer.substr(0, 9) == "According");

  auto junk = parse_qa_response("no structure at all");
  CHECK(junk.question.empty());
  CHECK(junk.answer == "no structure at all");
}

TEST_CASE("generate_qa_pair happy path revalidates") {
  Document doc = doc_of(synth_doc_en(55, 6));
  ScriptedTransport transport({"<echo-qa>"});
  GenerationPolicy policy;
  policy.endpoint_url = "mock:unused";
  auto out = generate_qa_pair(transport, doc, policy, 0.9);
  REQUIRE(out.ok());
  CHECK(out.attempts == 1);
  CHECK(transport.calls() == 1);
  CHECK(out.pair->gold_doc_id == "g");
  CHECK(!out.pair->question.empty());
  // persisted pairs re-validate
  CHECK(validate_answer_format(out.pair->raw_answer, doc.text, 0.9).valid);
}

TEST_CASE("generate_qa_pair retries malformed output") {
  Document doc = doc_of(synth_doc_en(56, 6));
  ScriptedTransport transport({"garbage with no format", "<echo-qa>"});
  GenerationPolicy policy;
  auto out = generate_qa_pair(transport, doc, policy, 0.9);
  REQUIRE(out.ok());
  CHECK(out.attempts == 2);
  CHECK(transport.calls() == 2);
}

TEST_CASE("generate_qa_pair stops at max_retries on persistent bad format") {
  Document doc = doc_of(synth_doc_en(57, 6));
  ScriptedTransport transport({"still garbage"});
  GenerationPolicy policy;
  policy.max_retries = 5;
  auto out = generate_qa_pair(transport, doc, policy, 0.9);
  CHECK(!out.ok());
  CHECK(out.failure == GenFailure::format);
  CHECK(out.attempts == 5);
  CHECK(transport.calls() == 5);
  CHECK(out.last_reason == "missing_prefix");
}

TEST_CASE("generate_qa_pair surfaces transport failures") {
  Document doc = doc_of(synth_doc_en(58, 6));
  ScriptedTransport flaky_then_ok({"<fail>", "<echo-qa>"});
  GenerationPolicy policy;
  auto out = generate_qa_pair(flaky_then_ok, doc, policy, 0.9);
  REQUIRE(out.ok());
  CHECK(out.attempts == 2);

  ScriptedTransport always_down({"<fail>"});
  auto down = generate_qa_pair(always_down, doc, policy, 0.9);
  CHECK(!down.ok());
  CHECK(down.failure == GenFailure::transport);
  CHECK(always_down.calls() == 5);
}

TEST_CASE("mock transports behave per their url") {
  GenerationPolicy echo;
  echo.endpoint_url = "mock:echo";
  CHECK(chat_complete(echo, {{"user", "hi"}}) == "hi");

  GenerationPolicy fixed;
  fixed.endpoint_url = "mock:fixed:always this";
  CHECK(chat_complete(fixed, {{"user", "x"}}) == "always this");

  GenerationPolicy flaky;
  flaky.endpoint_url = "mock:flaky:1.0";
  for (int i = 0; i < 3; ++i)
    CHECK_THROWS_AS(chat_complete(flaky, {{"user", "p" + std::to_string(i)}}),
                    TransportError);

  GenerationPolicy choice;
  choice.endpoint_url = "mock:random_choice:5:9";
  auto first = chat_complete(choice, {{"user", "q"}});
  CHECK(first.substr(0, 10) == "Paragraph ");
  int n = std::stoi(first.substr(10));
  CHECK(n >= 1);
  CHECK(n <= 5);
  CHECK(chat_complete(choice, {{"user", "q"}}) == first);  // per-prompt determinism

  GenerationPolicy qa;
  qa.endpoint_url = "mock:qa";
  Document doc = doc_of(synth_doc_en(59, 6));
  auto response = chat_complete(qa, {{"user", build_qa_prompt(doc)}});
  auto parsed = parse_qa_response(response);
  CHECK(validate_answer_format(parsed.answer, doc.text, 1.0).valid);

  GenerationPolicy bogus;
  bogus.endpoint_url = "mock:nonsense";
  CHECK_THROWS_AS(chat_complete(bogus, {{"user", "x"}}), ConfigError);
}

TEST_CASE("chat_complete requires messages") {
  GenerationPolicy echo;
  echo.endpoint_url = "mock:echo";
  CHECK_THROWS_AS(chat_complete(echo, {}), ConfigError);
}

TEST_CASE("http transport speaks the chat wire protocol") {
  httplib::Server server;
  std::atomic<int> status_to_send{200};
  std::string last_model;
  server.Post("/v1/chat/completions",
              [&](const httplib::Request& req, httplib::Response& res) {
                auto body = nlohmann::json::parse(req.body);
                last_model = body["model"].get<std::string>();
                std::string user = body["messages"].back()["content"].get<std::string>();
                if (status_to_send != 200) {
                  res.status = status_to_send;
                  res.set_content("backend exploded", "text/plain");
                  return;
                }
                nlohmann::json reply{
                    {"choices",
                     {{{"message", {{"role", "assistant"}, {"content", user}}}}}}};
                res.set_content(reply.dump(), "application/json");
              });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread runner([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  GenerationPolicy policy;
  policy.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  policy.model_name = "test-model";
  policy.max_retries = 1;

  CHECK(chat_complete(policy, {{"user", "hello wire"}}) == "hello wire");
  CHECK(last_model == "test-model");

  status_to_send = 500;
  try {
    chat_complete(policy, {{"user", "boom"}});
    FAIL("expected TransportError");
  } catch (const TransportError& e) {
    CHECK(e.status == 500);
    CHECK(std::string(e.what()).find("500") != std::string::npos);
  }

  server.stop();
  runner.join();
}
