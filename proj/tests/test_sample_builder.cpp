#include <doctest.h>

#include <algorithm>
#include <set>

#include "longctx/sample_builder.hpp"
#include "support.hpp"

using namespace longctx;
using namespace testsupport;

namespace {

QAPair sample_pair() {
  QAPair qa;
  qa.question = "What color is the sky?";
  qa.paraphrase_span = "the sky is blue";
  qa.answer_body = "The sky is blue. It looks blue because of scattering.";
  qa.gold_doc_id = "g";
  qa.raw_answer = "According to the original text 'the sky is blue', " + qa.answer_body;
  return qa;
}

DocGroup small_group(std::size_t n_distractors, std::size_t sentences_per_doc = 6) {
  DocGroup g;
  g.group_id = 0;
  g.gold = make_document("g", synth_doc_en(1, sentences_per_doc), Lang::en);
  for (std::size_t i = 0; i < n_distractors; ++i)
    g.distractors.push_back(
        make_document("d" + std::to_string(i), synth_doc_en(100 + i, sentences_per_doc), Lang::en));
  return g;
}

BuilderConfig mock_builder() {
  BuilderConfig cfg;
  cfg.policy.endpoint_url = "mock:qa";
  cfg.counter = TokenCounter{};
  cfg.fuzz = 0.9;
  return cfg;
}

std::vector<int> serials_in(const std::string& context) {
  std::vector<int> out;
  std::size_t pos = 0;
  while ((pos = context.find("Document [", pos)) != std::string::npos) {
    pos += 10;
    auto end = context.find("]:", pos);
    out.push_back(std::stoi(context.substr(pos, end - pos)));
  }
  return out;
}

}  // namespace

TEST_CASE("assemble_context renders one serial-numbered block per document") {
  std::vector<Document> docs{make_document("a", "only text", Lang::en)};
  auto ctx = assemble_context(docs, 1);
  CHECK(ctx.text == "Document [1]:\nonly text\n\n");
  CHECK(ctx.position_of.at("a") == 1);
}

TEST_CASE("assemble_context is deterministic and a permutation") {
  std::vector<Document> docs;
  for (int i = 0; i < 20; ++i)
    docs.push_back(make_document("id" + std::to_string(i), "text " + std::to_string(i), Lang::en));
  auto a = assemble_context(docs, 99);
  auto b = assemble_context(docs, 99);
  CHECK(a.text == b.text);

  auto serials = serials_in(a.text);
  std::set<int> seen(serials.begin(), serials.end());
  CHECK(serials.size() == 20);
  CHECK(seen.size() == 20);
  CHECK(*seen.begin() == 1);
  CHECK(*seen.rbegin() == 20);

  // same multiset of texts before and after shuffling
  for (const auto& d : docs) CHECK(a.text.find(d.text) != std::string::npos);
}

TEST_CASE("assemble_context rejects duplicate ids") {
  std::vector<Document> docs{make_document("x", "a", Lang::en),
                             make_document("x", "b", Lang::en)};
  CHECK_THROWS_AS(assemble_context(docs, 1), ConfigError);
}

TEST_CASE("assemble_context honors a custom document template") {
  std::vector<Document> docs{make_document("a", "body", Lang::en)};
  auto ctx = assemble_context(docs, 1, "[[{i}]] {text}\n");
  CHECK(ctx.text == "[[1]] body\n");
}

TEST_CASE("render_answer_style paraphrase names the gold document") {
  auto qa = sample_pair();
  auto ans = render_answer_style(qa, 5, qa.question, AnswerStyle::paraphrase);
  CHECK(ans.rfind("According to the original text of document [5] 'the sky is blue'", 0) == 0);
  auto no_index = render_answer_style(qa, 0, qa.question, AnswerStyle::paraphrase);
  CHECK(no_index.rfind("According to the original text 'the sky is blue'", 0) == 0);
}

TEST_CASE("render_answer_style detailed and short") {
  auto qa = sample_pair();
  CHECK(render_answer_style(qa, 3, qa.question, AnswerStyle::detailed) == qa.answer_body);
  CHECK(render_answer_style(qa, 3, qa.question, AnswerStyle::short_form_answer) ==
        "The sky is blue.");
}

TEST_CASE("render_answer_style ziya repeats the question and predicts the index") {
  auto qa = sample_pair();
  auto ans = render_answer_style(qa, 7, qa.question, AnswerStyle::ziya);
  // three parts: question repetition, index prediction, answer summary
  CHECK(ans.rfind(qa.question, 0) == 0);
  CHECK(ans.find("The answer is in document [7].") != std::string::npos);
  auto tail = qa.answer_body;
  CHECK(ans.substr(ans.size() - tail.size()) == tail);
}

TEST_CASE("build_multidoc_sample keeps the whole group under a large budget") {
  auto group = small_group(4);
  auto cfg = mock_builder();
  auto transport = make_transport(cfg.policy);
  auto out = build_multidoc_sample(group, *transport, cfg, 100000, AnswerStyle::paraphrase, 5);
  REQUIRE(out.ok());
  const TrainingSample& s = *out.sample;
  CHECK(s.n_docs == 5);
  CHECK(s.kind == SampleKind::multi_doc);
  CHECK(s.gold_position >= 1);
  CHECK(s.gold_position <= s.n_docs);
  CHECK(s.token_len <= 100000);
  CHECK(s.answer.find("According to the original text of document [" +
                      std::to_string(s.gold_position) + "]") == 0);
  auto serials = serials_in(s.context);
  CHECK(static_cast<int>(serials.size()) == s.n_docs);
}

TEST_CASE("build_multidoc_sample budget forces discards, gold survives") {
  TokenCounter counter;
  DocGroup group;
  group.gold = make_document("g", synth_doc_en(1, 4), Lang::en);
  for (int i = 0; i < 6; ++i)
    group.distractors.push_back(make_document("d" + std::to_string(i),
                                              synth_doc_en(50 + i, 4), Lang::en));
  auto cfg = mock_builder();
  auto transport = make_transport(cfg.policy);

  std::size_t gold_count = count_tokens(group.gold.text, counter);
  std::size_t d_count = count_tokens(group.distractors[0].text, counter);
  // room for gold + two distractors + headers/question slack
  std::size_t budget = gold_count + 2 * d_count + 40;

  auto out = build_multidoc_sample(group, *transport, cfg, budget, AnswerStyle::paraphrase, 5);
  REQUIRE(out.ok());
  CHECK(out.sample->n_docs == 3);
  CHECK(out.sample->context.find(group.gold.text) != std::string::npos);
  CHECK(out.sample->token_len <= budget);
}

TEST_CASE("build_multidoc_sample skips on persistent bad format") {
  auto group = small_group(2);
  auto cfg = mock_builder();
  cfg.policy.endpoint_url = "mock:fixed:never valid";
  auto transport = make_transport(cfg.policy);
  auto out = build_multidoc_sample(group, *transport, cfg, 100000, AnswerStyle::paraphrase, 5);
  CHECK(!out.ok());
  CHECK(out.skip == SkipReason::generation_format);
}

TEST_CASE("build_multidoc_sample skips when gold exceeds the budget") {
  auto group = small_group(2);
  auto cfg = mock_builder();
  auto transport = make_transport(cfg.policy);
  auto out = build_multidoc_sample(group, *transport, cfg, 10, AnswerStyle::paraphrase, 5);
  CHECK(!out.ok());
  CHECK(out.skip == SkipReason::gold_too_long);
}

TEST_CASE("build_singledoc_sample picks a seeded paragraph") {
  std::string text = synth_doc_en(9, 12, 8, 3);  // 4 paragraphs
  Document doc = make_document("p", text, Lang::en);
  auto cfg = mock_builder();
  auto transport = make_transport(cfg.policy);

  auto a = build_singledoc_sample(doc, *transport, cfg, 100000, AnswerStyle::paraphrase, 7);
  auto b = build_singledoc_sample(doc, *transport, cfg, 100000, AnswerStyle::paraphrase, 7);
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK(a.sample->answer == b.sample->answer);
  CHECK(a.sample->n_docs == 1);
  CHECK(a.sample->gold_position == 1);
  CHECK(a.sample->kind == SampleKind::single_doc);
  CHECK(a.sample->context == text);
  CHECK(a.sample->answer.rfind("According to the original text '", 0) == 0);
  CHECK(a.sample->context.find("Document [") == std::string::npos);
}

TEST_CASE("build_singledoc_sample single paragraph is the forced choice") {
  std::string text = synth_doc_en(10, 4);  // one paragraph
  Document doc = make_document("p", text, Lang::en);
  auto cfg = mock_builder();
  auto transport = make_transport(cfg.policy);
  auto out = build_singledoc_sample(doc, *transport, cfg, 100000, AnswerStyle::paraphrase, 3);
  REQUIRE(out.ok());
  // the mock quotes the first sentence of the chosen paragraph
  auto first = std::string(split_sentences(text).front());
  CHECK(out.sample->answer.find(first) != std::string::npos);
}

TEST_CASE("compose_dataset hits the requested cell counts") {
  std::vector<TrainingSample> long_pool;
  auto add_long = [&](SampleKind kind, Lang lang, int n) {
    for (int i = 0; i < n; ++i) {
      TrainingSample s;
      s.kind = kind;
      s.lang = lang;
      s.style = AnswerStyle::paraphrase;
      s.question = "q" + std::to_string(i);
      s.answer = "a";
      s.gold_position = 1;
      s.n_docs = 1;
      long_pool.push_back(std::move(s));
    }
  };
  add_long(SampleKind::multi_doc, Lang::en, 10);
  add_long(SampleKind::multi_doc, Lang::zh, 10);
  add_long(SampleKind::single_doc, Lang::en, 5);
  add_long(SampleKind::single_doc, Lang::zh, 5);
  std::vector<ShortFormSample> short_pool;
  for (int i = 0; i < 8; ++i)
    short_pool.push_back({"sq", "sa", i % 2 ? Lang::en : Lang::zh});

  DatasetMix mix;
  mix.n_long = 10;
  mix.n_short = 4;
  mix.multi_doc_frac = 0.8;
  mix.lang_split = 0.5;

  auto ds = compose_dataset(long_pool, short_pool, mix, 77);
  REQUIRE(ds.samples.size() == 14);
  int multi = 0, single = 0, shortn = 0, en = 0, zh = 0;
  for (const auto& s : ds.samples) {
    if (s.kind == SampleKind::multi_doc) ++multi;
    if (s.kind == SampleKind::single_doc) ++single;
    if (s.kind == SampleKind::short_form) ++shortn;
    if (s.kind != SampleKind::short_form) (s.lang == Lang::en ? en : zh)++;
  }
  CHECK(multi == 8);
  CHECK(single == 2);
  CHECK(shortn == 4);
  CHECK(en == 5);
  CHECK(zh == 5);
}

TEST_CASE("compose_dataset stays within one sample per cell on uneven splits") {
  std::vector<TrainingSample> long_pool;
  for (int i = 0; i < 40; ++i) {
    TrainingSample s;
    s.kind = i % 2 ? SampleKind::multi_doc : SampleKind::single_doc;
    s.lang = i % 4 < 2 ? Lang::en : Lang::zh;
    long_pool.push_back(std::move(s));
  }
  DatasetMix mix;
  mix.n_long = 7;  // 7 * 0.8 and per-language halves are all fractional
  mix.n_short = 0;
  mix.multi_doc_frac = 0.8;
  mix.lang_split = 0.5;
  auto ds = compose_dataset(long_pool, {}, mix, 3);
  REQUIRE(ds.samples.size() == 7);
  std::map<std::pair<SampleKind, Lang>, int> counts;
  for (const auto& s : ds.samples) ++counts[{s.kind, s.lang}];
  int multi = counts[{SampleKind::multi_doc, Lang::en}] +
              counts[{SampleKind::multi_doc, Lang::zh}];
  CHECK(std::abs(multi - 6) <= 1);  // 5.6 rounds within one of the target
  CHECK(std::abs(counts[{SampleKind::multi_doc, Lang::en}] -
                 counts[{SampleKind::multi_doc, Lang::zh}]) <= 1);
}

TEST_CASE("compose_dataset names the insufficient cell") {
  // every cell satisfiable except (single_doc, zh)
  std::vector<TrainingSample> long_pool;
  auto add = [&](SampleKind kind, Lang lang) {
    TrainingSample s;
    s.kind = kind;
    s.lang = lang;
    long_pool.push_back(s);
  };
  add(SampleKind::multi_doc, Lang::en);
  add(SampleKind::multi_doc, Lang::zh);
  add(SampleKind::single_doc, Lang::en);
  DatasetMix mix;
  mix.n_long = 4;
  mix.n_short = 0;
  mix.multi_doc_frac = 0.5;
  mix.lang_split = 0.5;
  CHECK_THROWS_WITH_AS(compose_dataset(long_pool, {}, mix, 1),
                       doctest::Contains("(single_doc, zh)"), ConfigError);
}

TEST_CASE("compose_dataset is deterministic") {
  std::vector<TrainingSample> long_pool;
  for (int i = 0; i < 20; ++i) {
    TrainingSample s;
    s.kind = SampleKind::multi_doc;
    s.lang = Lang::en;
    s.question = "q" + std::to_string(i);
    long_pool.push_back(std::move(s));
  }
  DatasetMix mix;
  mix.n_long = 10;
  mix.n_short = 0;
  mix.multi_doc_frac = 1.0;
  mix.lang_split = 1.0;
  auto a = compose_dataset(long_pool, {}, mix, 5);
  auto b = compose_dataset(long_pool, {}, mix, 5);
  CHECK(a.samples == b.samples);
  auto c = compose_dataset(long_pool, {}, mix, 6);
  bool same_order = true;
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    same_order &= a.samples[i].question == c.samples[i].question;
  CHECK(!same_order);
}

TEST_CASE("emit_jsonl writes header plus samples, byte-stable, round-trips") {
  auto dir = scratch_dir("emit");
  std::vector<TrainingSample> long_pool;
  for (int i = 0; i < 5; ++i) {
    TrainingSample s;
    s.kind = SampleKind::multi_doc;
    s.lang = Lang::en;
    s.style = AnswerStyle::paraphrase;
    s.context = "Document [1]:\nctx" + std::to_string(i) + "\n\n";
    s.question = "q" + std::to_string(i);
    s.answer = "a" + std::to_string(i);
    s.gold_position = 1;
    s.n_docs = 1;
    s.token_len = 12;
    s.seed_trace = {1, 2, 3};
    long_pool.push_back(std::move(s));
  }
  DatasetMix mix;
  mix.n_long = 5;
  mix.n_short = 0;
  mix.multi_doc_frac = 1.0;
  mix.lang_split = 1.0;
  auto ds = compose_dataset(long_pool, {}, mix, 9);

  emit_jsonl(ds, dir / "d.jsonl");
  auto content = read_text_file((dir / "d.jsonl").string());
  CHECK(std::count(content.begin(), content.end(), '\n') == 6);

  emit_jsonl(ds, dir / "d2.jsonl");
  CHECK(content == read_text_file((dir / "d2.jsonl").string()));

  auto loaded = load_dataset_jsonl(dir / "d.jsonl");
  CHECK(loaded == ds);
}

TEST_CASE("load_short_form_jsonl accepts question/answer and alpaca shapes") {
  auto dir = scratch_dir("shortform");
  std::string lines;
  lines += nlohmann::json{{"question", "q1"}, {"answer", "a1"}}.dump() + "\n";
  lines += nlohmann::json{{"instruction", "do it"}, {"input", "with this"}, {"output", "done"}}.dump() + "\n";
  lines += nlohmann::json{{"question", "q3"}, {"answer", "a3"}, {"lang", "zh"}}.dump() + "\n";
  write_file(dir / "s.jsonl", lines);
  auto pool = load_short_form_jsonl(dir / "s.jsonl", Lang::en);
  REQUIRE(pool.size() == 3);
  CHECK(pool[0].question == "q1");
  CHECK(pool[1].question == "do it\nwith this");
  CHECK(pool[1].answer == "done");
  CHECK(pool[2].lang == Lang::zh);
}
