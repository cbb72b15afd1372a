#include "longctx/sample_builder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace longctx {

using nlohmann::json;

std::string_view to_string(AnswerStyle s) {
  switch (s) {
    case AnswerStyle::paraphrase: return "paraphrase";
    case AnswerStyle::short_form_answer: return "short";
    case AnswerStyle::detailed: return "detailed";
    case AnswerStyle::ziya: return "ziya";
  }
  return "unknown";
}

std::optional<AnswerStyle> style_from_string(std::string_view s) {
  if (s == "paraphrase") return AnswerStyle::paraphrase;
  if (s == "short") return AnswerStyle::short_form_answer;
  if (s == "detailed") return AnswerStyle::detailed;
  if (s == "ziya") return AnswerStyle::ziya;
  return std::nullopt;
}

std::string_view to_string(SampleKind k) {
  switch (k) {
    case SampleKind::multi_doc: return "multi_doc";
    case SampleKind::single_doc: return "single_doc";
    case SampleKind::short_form: return "short_form";
  }
  return "unknown";
}

std::optional<SampleKind> kind_from_string(std::string_view s) {
  if (s == "multi_doc") return SampleKind::multi_doc;
  if (s == "single_doc") return SampleKind::single_doc;
  if (s == "short_form") return SampleKind::short_form;
  return std::nullopt;
}

std::string_view to_string(SkipReason r) {
  switch (r) {
    case SkipReason::none: return "none";
    case SkipReason::generation_format: return "generation_format";
    case SkipReason::generation_transport: return "generation_transport";
    case SkipReason::gold_too_long: return "gold_too_long";
    case SkipReason::no_paragraphs: return "no_paragraphs";
  }
  return "unknown";
}

json mix_to_json(const DatasetMix& m) {
  return json{{"n_long", m.n_long},
              {"n_short", m.n_short},
              {"multi_doc_frac", m.multi_doc_frac},
              {"lang_split", m.lang_split},
              {"min_tokens", m.min_tokens},
              {"max_tokens", m.max_tokens}};
}

DatasetMix mix_from_json(const json& j) {
  DatasetMix m;
  m.n_long = j.value("n_long", m.n_long);
  m.n_short = j.value("n_short", m.n_short);
  m.multi_doc_frac = j.value("multi_doc_frac", m.multi_doc_frac);
  m.lang_split = j.value("lang_split", m.lang_split);
  m.min_tokens = j.value("min_tokens", m.min_tokens);
  m.max_tokens = j.value("max_tokens", m.max_tokens);
  if (m.multi_doc_frac < 0 || m.multi_doc_frac > 1)
    throw ConfigError("multi_doc_frac must be in [0,1]");
  if (m.lang_split < 0 || m.lang_split > 1)
    throw ConfigError("lang_split must be in [0,1]");
  if (m.min_tokens >= m.max_tokens)
    throw ConfigError("budget range needs min_tokens < max_tokens");
  return m;
}

std::string render_doc(std::string_view doc_template, int index, std::string_view text) {
  std::string out(doc_template);
  if (auto pos = out.find("{i}"); pos != std::string::npos)
    out.replace(pos, 3, std::to_string(index));
  if (auto pos = out.find("{text}"); pos != std::string::npos)
    out.replace(pos, 6, text);
  return out;
}

AssembledContext assemble_context(const std::vector<Document>& docs, std::uint64_t seed,
                                  std::string_view doc_template) {
  if (docs.empty()) throw ConfigError("assemble_context: no documents");
  std::set<std::string_view> ids;
  for (const auto& d : docs)
    if (!ids.insert(d.id).second)
      throw ConfigError("assemble_context: duplicate document id: " + d.id);

  std::vector<const Document*> order;
  order.reserve(docs.size());
  for (const auto& d : docs) order.push_back(&d);
  SeededRng rng(seed);
  rng.shuffle(order);

  AssembledContext out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    int serial = static_cast<int>(i) + 1;
    out.text += render_doc(doc_template, serial, order[i]->text);
    out.position_of[order[i]->id] = serial;
  }
  return out;
}

namespace {

std::string first_sentence(std::string_view text) {
  auto sentences = split_sentences(text);
  if (sentences.empty()) return std::string(trim(text));
  return std::string(sentences.front());
}

}  // namespace

std::string render_answer_style(const QAPair& qa, int gold_index,
                                std::string_view question, AnswerStyle style) {
  switch (style) {
    case AnswerStyle::paraphrase: {
      std::string out = kAnswerPrefix;
      if (gold_index > 0) out += " of document [" + std::to_string(gold_index) + "]";
      out += " '" + qa.paraphrase_span + "', " + qa.answer_body;
      return out;
    }
    case AnswerStyle::short_form_answer:
      return first_sentence(qa.answer_body);
    case AnswerStyle::detailed:
      return qa.answer_body;
    case AnswerStyle::ziya: {
      std::string out(question);
      out += " ";
      if (gold_index > 0)
        out += "The answer is in document [" + std::to_string(gold_index) + "]. ";
      out += qa.answer_body;
      return out;
    }
  }
  throw ConfigError("unknown answer style");
}

BuildOutcome build_multidoc_from_qa(const QAPair& qa, const DocGroup& group,
                                    const BuilderConfig& cfg, std::size_t budget,
                                    AnswerStyle style, std::uint64_t seed) {
  BuildOutcome out;
  std::uint64_t fit_seed = mix_seed(seed, 1);
  std::uint64_t shuffle_seed = mix_seed(seed, 2);

  // Reserve room for the question and one serial-number header per document
  // so the assembled context plus question stays inside the budget.
  std::size_t overhead = count_tokens(qa.question, cfg.counter);
  std::size_t n_total = group.distractors.size() + 1;
  for (std::size_t i = 1; i <= n_total; ++i)
    overhead += count_tokens(render_doc(cfg.doc_template, static_cast<int>(i), ""),
                             cfg.counter);

  FitResult fit;
  try {
    fit = fit_context(group.gold, group.distractors, budget, overhead, cfg.counter,
                      fit_seed);
  } catch (const GoldTooLong& e) {
    out.skip = SkipReason::gold_too_long;
    out.detail = e.what();
    return out;
  }

  AssembledContext assembled = assemble_context(fit.kept, shuffle_seed, cfg.doc_template);
  int gold_position = assembled.position_of.at(group.gold.id);

  TrainingSample sample;
  sample.context = std::move(assembled.text);
  sample.question = qa.question;
  sample.answer = render_answer_style(qa, gold_position, qa.question, style);
  sample.style = style;
  sample.gold_position = gold_position;
  sample.n_docs = static_cast<int>(fit.kept.size());
  sample.lang = group.gold.lang;
  sample.token_len =
      count_tokens(sample.context, cfg.counter) + count_tokens(sample.question, cfg.counter);
  sample.kind = SampleKind::multi_doc;
  sample.seed_trace = {budget, fit_seed, shuffle_seed};
  out.sample = std::move(sample);
  return out;
}

BuildOutcome build_multidoc_sample(const DocGroup& group, ChatTransport& transport,
                                   const BuilderConfig& cfg, std::size_t budget,
                                   AnswerStyle style, std::uint64_t seed) {
  QaOutcome gen = generate_qa_pair(transport, group.gold, cfg.policy, cfg.fuzz);
  if (!gen.ok()) {
    BuildOutcome out;
    out.skip = gen.failure == GenFailure::transport ? SkipReason::generation_transport
                                                    : SkipReason::generation_format;
    out.detail = gen.last_reason;
    return out;
  }
  return build_multidoc_from_qa(*gen.pair, group, cfg, budget, style, seed);
}

BuildOutcome build_singledoc_from_qa(const QAPair& qa, const Document& doc,
                                     const BuilderConfig& cfg, std::size_t budget,
                                     AnswerStyle style, std::uint64_t seed) {
  BuildOutcome out;
  std::size_t token_len = count_tokens(doc.text, cfg.counter) +
                          count_tokens(qa.question, cfg.counter);
  if (token_len > budget) {
    out.skip = SkipReason::gold_too_long;
    out.detail = "document " + doc.id + " counts " + std::to_string(token_len) +
                 " tokens, budget " + std::to_string(budget);
    return out;
  }
  TrainingSample sample;
  sample.context = doc.text;
  sample.question = qa.question;
  sample.answer = render_answer_style(qa, 0, qa.question, style);
  sample.style = style;
  sample.gold_position = 1;
  sample.n_docs = 1;
  sample.lang = doc.lang;
  sample.token_len = token_len;
  sample.kind = SampleKind::single_doc;
  sample.seed_trace = {budget, seed};
  out.sample = std::move(sample);
  return out;
}

BuildOutcome build_singledoc_sample(const Document& doc, ChatTransport& transport,
                                    const BuilderConfig& cfg, std::size_t budget,
                                    AnswerStyle style, std::uint64_t seed) {
  auto paragraphs = split_paragraphs(doc.text);
  if (paragraphs.empty()) {
    BuildOutcome out;
    out.skip = SkipReason::no_paragraphs;
    out.detail = "document " + doc.id + " has no paragraphs";
    return out;
  }
  std::uint64_t para_seed = mix_seed(seed, 3);
  SeededRng rng(para_seed);
  std::string_view target = paragraphs[rng.bounded(paragraphs.size())];

  // The QA pair is designed on the chosen paragraph, so span validation runs
  // against that paragraph.
  Document paragraph_doc = make_document(doc.id, std::string(target), doc.lang, doc.source);
  QaOutcome gen = generate_qa_pair(transport, paragraph_doc, cfg.policy, cfg.fuzz);
  if (!gen.ok()) {
    BuildOutcome out;
    out.skip = gen.failure == GenFailure::transport ? SkipReason::generation_transport
                                                    : SkipReason::generation_format;
    out.detail = gen.last_reason;
    return out;
  }
  BuildOutcome out = build_singledoc_from_qa(*gen.pair, doc, cfg, budget, style, seed);
  if (out.ok()) out.sample->seed_trace = {budget, para_seed};
  return out;
}

namespace {

struct Cell {
  SampleKind kind;
  Lang lang;
  int need = 0;
  std::uint64_t tag = 0;
};

long long half_up(double x) { return std::llround(x); }

}  // namespace

Dataset compose_dataset(const std::vector<TrainingSample>& long_pool,
                        const std::vector<ShortFormSample>& short_pool,
                        const DatasetMix& mix, std::uint64_t seed) {
  int n_multi = static_cast<int>(half_up(mix.n_long * mix.multi_doc_frac));
  int n_single = mix.n_long - n_multi;
  auto lang_counts = [&](int total) -> std::pair<int, int> {
    int en = static_cast<int>(half_up(total * mix.lang_split));
    return {en, total - en};
  };
  auto [multi_en, multi_zh] = lang_counts(n_multi);
  auto [single_en, single_zh] = lang_counts(n_single);
  auto [short_en, short_zh] = lang_counts(mix.n_short);

  std::vector<TrainingSample> short_samples;
  short_samples.reserve(short_pool.size());
  for (const auto& s : short_pool) {
    TrainingSample t;
    t.question = s.question;
    t.answer = s.answer;
    t.lang = s.lang;
    t.kind = SampleKind::short_form;
    t.style = AnswerStyle::detailed;  // answer kept verbatim
    short_samples.push_back(std::move(t));
  }

  const Cell cells[] = {
      {SampleKind::multi_doc, Lang::en, multi_en, 11},
      {SampleKind::multi_doc, Lang::zh, multi_zh, 12},
      {SampleKind::single_doc, Lang::en, single_en, 21},
      {SampleKind::single_doc, Lang::zh, single_zh, 22},
      {SampleKind::short_form, Lang::en, short_en, 31},
      {SampleKind::short_form, Lang::zh, short_zh, 32},
  };

  Dataset out;
  out.samples.reserve(static_cast<std::size_t>(mix.n_long + mix.n_short));
  for (const Cell& cell : cells) {
    std::vector<const TrainingSample*> pool;
    const auto& source =
        cell.kind == SampleKind::short_form ? short_samples : long_pool;
    for (const auto& s : source)
      if (s.kind == cell.kind && s.lang == cell.lang) pool.push_back(&s);
    if (static_cast<int>(pool.size()) < cell.need)
      throw ConfigError("insufficient pool for cell (" +
                        std::string(to_string(cell.kind)) + ", " +
                        std::string(to_string(cell.lang)) + "): need " +
                        std::to_string(cell.need) + ", have " +
                        std::to_string(pool.size()));
    SeededRng rng(mix_seed(seed, cell.tag));
    rng.shuffle(pool);
    for (int i = 0; i < cell.need; ++i) out.samples.push_back(*pool[static_cast<std::size_t>(i)]);
  }

  SeededRng final_rng(mix_seed(seed, 99));
  final_rng.shuffle(out.samples);

  out.meta = json{{"mix", mix_to_json(mix)},
                  {"seeds", json{{"compose", seed}}},
                  {"tool_version", kToolVersion}};
  return out;
}

namespace {

json sample_to_json(const TrainingSample& s) {
  return json{{"kind", std::string(to_string(s.kind))},
              {"lang", std::string(to_string(s.lang))},
              {"style", std::string(to_string(s.style))},
              {"context", s.context},
              {"question", s.question},
              {"answer", s.answer},
              {"gold_position", s.gold_position},
              {"n_docs", s.n_docs},
              {"token_len", s.token_len},
              {"seed_trace", s.seed_trace}};
}

TrainingSample sample_from_json(const json& j) {
  TrainingSample s;
  auto kind = kind_from_string(j.at("kind").get<std::string>());
  auto lang = lang_from_string(j.at("lang").get<std::string>());
  auto style = style_from_string(j.at("style").get<std::string>());
  if (!kind || !lang || !style)
    throw ConfigError("dataset line has unknown kind/lang/style");
  s.kind = *kind;
  s.lang = *lang;
  s.style = *style;
  s.context = j.at("context").get<std::string>();
  s.question = j.at("question").get<std::string>();
  s.answer = j.at("answer").get<std::string>();
  s.gold_position = j.at("gold_position").get<int>();
  s.n_docs = j.at("n_docs").get<int>();
  s.token_len = j.at("token_len").get<std::size_t>();
  s.seed_trace = j.at("seed_trace").get<std::vector<std::uint64_t>>();
  return s;
}

}  // namespace

void emit_jsonl(const Dataset& dataset, const std::filesystem::path& path) {
  std::ostringstream out;
  out << json{{"meta", dataset.meta}}.dump() << "\n";
  for (const auto& s : dataset.samples) out << sample_to_json(s).dump() << "\n";
  write_text_file(path.string(), out.str());
}

Dataset load_dataset_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read dataset: " + path.string());
  Dataset out;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw ConfigError("malformed dataset line in " + path.string());
    if (!header_seen) {
      if (!j.contains("meta"))
        throw ConfigError("dataset missing meta header: " + path.string());
      out.meta = j["meta"];
      header_seen = true;
      continue;
    }
    out.samples.push_back(sample_from_json(j));
  }
  if (!header_seen) throw ConfigError("empty dataset file: " + path.string());
  return out;
}

std::vector<ShortFormSample> load_short_form_jsonl(const std::filesystem::path& path,
                                                   Lang default_lang) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read short-form pool: " + path.string());
  std::vector<ShortFormSample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;
    ShortFormSample s;
    if (j.contains("question")) {
      s.question = j["question"].get<std::string>();
    } else if (j.contains("instruction")) {
      s.question = j["instruction"].get<std::string>();
      if (j.contains("input") && j["input"].is_string() &&
          !j["input"].get<std::string>().empty())
        s.question += "\n" + j["input"].get<std::string>();
    } else {
      continue;
    }
    if (j.contains("answer")) {
      s.answer = j["answer"].get<std::string>();
    } else if (j.contains("output")) {
      s.answer = j["output"].get<std::string>();
    } else {
      continue;
    }
    s.lang = default_lang;
    if (j.contains("lang") && j["lang"].is_string()) {
      if (auto parsed = lang_from_string(j["lang"].get<std::string>())) s.lang = *parsed;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace longctx
