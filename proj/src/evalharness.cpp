#include "longctx/evalharness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "longctx/metrics.hpp"
#include "longctx/sample_builder.hpp"

namespace longctx {

using nlohmann::json;

std::string_view to_string(EvalTask t) {
  switch (t) {
    case EvalTask::needle: return "needle";
    case EvalTask::litm_qa: return "litm_qa";
    case EvalTask::passage_retrieval: return "passage_retrieval";
    case EvalTask::multi_doc_qa: return "multi_doc_qa";
    case EvalTask::single_doc_qa: return "single_doc_qa";
    case EvalTask::summarization: return "summarization";
    case EvalTask::few_shot: return "few_shot";
  }
  return "unknown";
}

std::optional<EvalTask> task_from_string(std::string_view s) {
  if (s == "needle") return EvalTask::needle;
  if (s == "litm_qa" || s == "litm") return EvalTask::litm_qa;
  if (s == "passage_retrieval") return EvalTask::passage_retrieval;
  if (s == "multi_doc_qa") return EvalTask::multi_doc_qa;
  if (s == "single_doc_qa") return EvalTask::single_doc_qa;
  if (s == "summarization") return EvalTask::summarization;
  if (s == "few_shot") return EvalTask::few_shot;
  return std::nullopt;
}

std::string_view to_string(PromptStyle s) {
  switch (s) {
    case PromptStyle::default_style: return "default";
    case PromptStyle::cot: return "cot";
    case PromptStyle::no_cot: return "no_cot";
    case PromptStyle::pr_default: return "pr_default";
    case PromptStyle::pr_cot: return "pr_cot";
  }
  return "unknown";
}

std::optional<PromptStyle> prompt_style_from_string(std::string_view s) {
  if (s == "default") return PromptStyle::default_style;
  if (s == "cot") return PromptStyle::cot;
  if (s == "no_cot") return PromptStyle::no_cot;
  if (s == "pr_default") return PromptStyle::pr_default;
  if (s == "pr_cot") return PromptStyle::pr_cot;
  return std::nullopt;
}

std::string_view to_string(TruncationMode m) {
  return m == TruncationMode::middle ? "middle" : "tail";
}

// ---------------------------------------------------------------------------
// prompt templates

const std::string kQaDefaultTemplate =
    "Write a high-quality answer for the given question using only the provided "
    "search results (some of which might be irrelevant).\n"
    "{documents}\n"
    "Question: {question}\n"
    "Answer:";

const std::string kQaCotTemplate =
    "Write a high-quality answer for the given question using only the provided "
    "search results (some of which might be irrelevant).\n"
    "When answering, you must first paraphrase the original text of the relevant "
    "paragraphs or sentences of the provided search results.\n"
    "{documents}\n"
    "Question: {question}\n"
    "Answer:";

const std::string kQaNoCotTemplate =
    "Write a high-quality answer for the given question using only the provided "
    "search results (some of which might be irrelevant).\n"
    "When answering, you mustn't repeat paragraphs or sentences in the provided "
    "results, but give the answer directly and concisely.\n"
    "{documents}\n"
    "Question: {question}\n"
    "Answer:";

const std::string kPrDefaultTemplate =
    "Here are 30 paragraphs from Wikipedia, along with an abstract. Please "
    "determine which paragraph the abstract is from.\n"
    "{context}\n"
    "The following is an abstract.\n"
    "{input}\n"
    "Please enter the number of the paragraph that the abstract is from. The "
    "answer format must be like \"Paragraph 1\", \"Paragraph 2\", etc. The "
    "answer is:";

const std::string kPrCotTemplate =
    "Here are 30 paragraphs from Wikipedia, along with an abstract. Please "
    "determine which paragraph the abstract is from.\n"
    "{context}\n"
    "The following is an abstract.\n"
    "{input}\n"
    "Let's think step by step. You must first analyse the abstract and the "
    "relevant paragraph, and then give the number of the paragraph that the "
    "abstract is from.";

namespace {

std::string fill_slots(std::string prompt, std::string_view slot_a,
                       std::string_view value_a, std::string_view slot_b,
                       std::string_view value_b) {
  if (auto pos = prompt.find(slot_a); pos != std::string::npos)
    prompt.replace(pos, slot_a.size(), value_a);
  if (auto pos = prompt.find(slot_b); pos != std::string::npos)
    prompt.replace(pos, slot_b.size(), value_b);
  return prompt;
}

}  // namespace

std::string render_eval_prompt(const EvalCase& c) {
  bool pr_task = c.task == EvalTask::passage_retrieval;
  bool pr_style =
      c.prompt_style == PromptStyle::pr_default || c.prompt_style == PromptStyle::pr_cot;
  if (pr_task != pr_style)
    throw ConfigError(std::string("prompt style ") +
                      std::string(to_string(c.prompt_style)) +
                      " is incompatible with task " + std::string(to_string(c.task)));

  switch (c.prompt_style) {
    case PromptStyle::default_style:
      return fill_slots(kQaDefaultTemplate, "{documents}", c.context, "{question}",
                        c.question);
    case PromptStyle::cot:
      return fill_slots(kQaCotTemplate, "{documents}", c.context, "{question}",
                        c.question);
    case PromptStyle::no_cot:
      return fill_slots(kQaNoCotTemplate, "{documents}", c.context, "{question}",
                        c.question);
    case PromptStyle::pr_default:
      return fill_slots(kPrDefaultTemplate, "{context}", c.context, "{input}",
                        c.question);
    case PromptStyle::pr_cot:
      return fill_slots(kPrCotTemplate, "{context}", c.context, "{input}", c.question);
  }
  throw ConfigError("unknown prompt style");
}

// ---------------------------------------------------------------------------
// suite builders

namespace {

std::string pad_int(std::uint64_t v, int width) {
  std::ostringstream ss;
  ss << std::setw(width) << std::setfill('0') << v;
  return ss.str();
}

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string_view::npos) {
    ++n;
    ++pos;
  }
  return n;
}

}  // namespace

std::vector<EvalCase> build_needle_suite(const std::vector<std::size_t>& lengths,
                                         const std::vector<double>& depths,
                                         const std::string& needle,
                                         const std::string& needle_question,
                                         const std::string& needle_answer,
                                         const DocumentStore& filler,
                                         const TokenCounter& counter,
                                         std::uint64_t seed) {
  if (needle.find(needle_answer) == std::string::npos)
    throw ConfigError("needle_answer must be a substring of the needle");

  std::vector<std::string> sentences;
  for (const auto& doc : filler.docs())
    for (auto s : split_sentences(doc.text)) sentences.emplace_back(s);
  if (sentences.empty()) throw ConfigError("needle filler store has no sentences");
  SeededRng rng(seed);
  rng.shuffle(sentences);

  std::vector<std::size_t> sentence_tokens(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i)
    sentence_tokens[i] = count_tokens(sentences[i], counter);

  std::vector<EvalCase> cases;
  cases.reserve(lengths.size() * depths.size());
  for (std::size_t length : lengths) {
    // Each case reuses the filler from the start, so the store only has to
    // cover the longest grid length.
    std::vector<std::size_t> chosen;
    std::size_t total = 0;
    for (std::size_t i = 0; total < length; ++i) {
      if (i >= sentences.size())
        throw ConfigError("needle filler exhausted at length " + std::to_string(length));
      chosen.push_back(i);
      total += sentence_tokens[i];
    }
    // prefix[b] = tokens before sentence boundary b
    std::vector<std::size_t> prefix(chosen.size() + 1, 0);
    for (std::size_t i = 0; i < chosen.size(); ++i)
      prefix[i + 1] = prefix[i] + sentence_tokens[chosen[i]];

    for (double depth : depths) {
      std::size_t boundary;
      if (depth <= 0.0) {
        boundary = 0;
      } else if (depth >= 1.0) {
        boundary = chosen.size();
      } else {
        double target = depth * static_cast<double>(length);
        boundary = 0;
        double best = std::abs(static_cast<double>(prefix[0]) - target);
        for (std::size_t b = 1; b < prefix.size(); ++b) {
          double d = std::abs(static_cast<double>(prefix[b]) - target);
          if (d < best) {
            best = d;
            boundary = b;
          }
        }
      }

      std::string context;
      for (std::size_t i = 0; i <= chosen.size(); ++i) {
        if (i == boundary) {
          if (!context.empty()) context += " ";
          context += needle;
        }
        if (i == chosen.size()) break;
        if (!context.empty()) context += " ";
        context += sentences[chosen[i]];
      }
      if (count_occurrences(context, needle) != 1)
        throw ConfigError("filler text already contains the needle");

      int depth_pct = static_cast<int>(std::lround(depth * 100.0));
      EvalCase c;
      c.case_id = "needle:L" + pad_int(length, 6) + ":D" + pad_int(depth_pct, 3);
      c.task = EvalTask::needle;
      c.prompt_style = PromptStyle::default_style;
      c.context = std::move(context);
      c.question = needle_question;
      c.gold_answers = {needle_answer};
      c.gold_position = depth_pct;
      c.meta["length"] = std::to_string(length);
      c.meta["depth_pct"] = std::to_string(depth_pct);
      cases.push_back(std::move(c));
    }
  }
  return cases;
}

std::vector<EvalCase> build_litm_suite(const std::vector<LitmRecord>& records,
                                       const std::vector<int>& positions, int n_docs,
                                       std::uint64_t seed) {
  if (n_docs < 1) throw ConfigError("build_litm_suite: n_docs must be >= 1");
  for (int p : positions)
    if (p < 1 || p > n_docs)
      throw ConfigError("build_litm_suite: position " + std::to_string(p) +
                        " outside [1, " + std::to_string(n_docs) + "]");

  std::vector<EvalCase> cases;
  cases.reserve(records.size() * positions.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    const LitmRecord& rec = records[r];
    std::size_t needed = static_cast<std::size_t>(n_docs - 1);
    if (rec.distractors.size() < needed)
      throw ConfigError("litm record " + std::to_string(r) +
                        ": insufficient distractors: need " + std::to_string(needed) +
                        ", have " + std::to_string(rec.distractors.size()));
    for (int pos : positions) {
      std::vector<const Document*> distractors;
      distractors.reserve(rec.distractors.size());
      for (const auto& d : rec.distractors) distractors.push_back(&d);
      SeededRng rng(mix_seed(seed, mix_seed(r, static_cast<std::uint64_t>(pos))));
      rng.shuffle(distractors);

      std::string context;
      std::size_t next_distractor = 0;
      for (int serial = 1; serial <= n_docs; ++serial) {
        const Document* doc =
            serial == pos ? &rec.gold : distractors[next_distractor++];
        context += render_doc(kDefaultDocTemplate, serial, doc->text);
      }

      EvalCase c;
      c.case_id = "litm:r" + pad_int(r, 5) + ":p" + pad_int(static_cast<std::uint64_t>(pos), 2);
      c.task = EvalTask::litm_qa;
      c.prompt_style = PromptStyle::default_style;
      c.context = std::move(context);
      c.question = rec.question;
      c.gold_answers = rec.answers;
      c.gold_position = pos;
      c.meta["position"] = ordinal(pos);
      c.meta["lang"] = std::string(to_string(rec.gold.lang));
      cases.push_back(std::move(c));
    }
  }
  return cases;
}

std::vector<LitmRecord> load_litm_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read litm records: " + path.string());
  std::vector<LitmRecord> out;
  std::string line;
  std::size_t idx = 0;
  auto parse_doc = [](const json& j, std::string fallback_id) {
    std::string id = j.value("id", fallback_id);
    Lang lang = Lang::en;
    if (j.contains("lang"))
      if (auto l = lang_from_string(j["lang"].get<std::string>())) lang = *l;
    return make_document(id, j.at("text").get<std::string>(), lang,
                         j.value("source", std::string{}));
  };
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw ConfigError("malformed litm record in " + path.string());
    LitmRecord rec;
    rec.question = j.at("question").get<std::string>();
    rec.answers = j.at("answers").get<std::vector<std::string>>();
    std::string base = "r" + std::to_string(idx);
    rec.gold = parse_doc(j.at("gold_doc"), base + ":gold");
    std::size_t d = 0;
    for (const auto& dj : j.at("distractors"))
      rec.distractors.push_back(parse_doc(dj, base + ":d" + std::to_string(d++)));
    out.push_back(std::move(rec));
    ++idx;
  }
  return out;
}

namespace {

EvalTask task_for_longbench_dataset(const std::string& name) {
  if (name.rfind("hotpotqa", 0) == 0 || name.rfind("dureader", 0) == 0 ||
      name.rfind("2wikimqa", 0) == 0 || name.rfind("musique", 0) == 0)
    return EvalTask::multi_doc_qa;
  if (name.rfind("multifieldqa", 0) == 0 || name.rfind("narrativeqa", 0) == 0 ||
      name.rfind("qasper", 0) == 0)
    return EvalTask::single_doc_qa;
  if (name.rfind("passage_retrieval", 0) == 0) return EvalTask::passage_retrieval;
  if (name.rfind("qmsum", 0) == 0 || name.rfind("vcsum", 0) == 0 ||
      name.rfind("gov_report", 0) == 0 || name.rfind("multi_news", 0) == 0)
    return EvalTask::summarization;
  if (name.rfind("trec", 0) == 0 || name.rfind("lsht", 0) == 0 ||
      name.rfind("triviaqa", 0) == 0 || name.rfind("samsum", 0) == 0)
    return EvalTask::few_shot;
  throw ConfigError("unknown LongBench dataset (pass an explicit task): " + name);
}

bool longbench_dataset_is_zh(const std::string& name) {
  return name.find("_zh") != std::string::npos || name.rfind("dureader", 0) == 0 ||
         name.rfind("vcsum", 0) == 0 || name.rfind("lsht", 0) == 0;
}

}  // namespace

std::vector<EvalCase> load_longbench_jsonl(const std::filesystem::path& path,
                                           std::optional<EvalTask> task_override,
                                           PromptStyle style) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read LongBench records: " + path.string());
  std::vector<EvalCase> out;
  std::string line;
  std::size_t idx = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw ConfigError("malformed LongBench record in " + path.string());
    std::string dataset = j.value("dataset", std::string{});
    EvalTask task = task_override ? *task_override : task_for_longbench_dataset(dataset);

    EvalCase c;
    c.case_id = "lb:" + (dataset.empty() ? "data" : dataset) + ":" + pad_int(idx, 5);
    c.task = task;
    if (task == EvalTask::passage_retrieval) {
      c.prompt_style = style == PromptStyle::cot ? PromptStyle::pr_cot
                                                 : PromptStyle::pr_default;
    } else {
      c.prompt_style = style;
    }
    c.context = j.value("context", std::string{});
    c.question = j.value("input", std::string{});
    c.gold_answers = j.at("answers").get<std::vector<std::string>>();
    c.meta["dataset"] = dataset;
    c.meta["lang"] = longbench_dataset_is_zh(dataset) ? "zh" : "en";
    out.push_back(std::move(c));
    ++idx;
  }
  return out;
}

// ---------------------------------------------------------------------------
// running

Scorer default_scorer() {
  return [](const EvalCase& c, const std::string& prediction) -> double {
    switch (c.task) {
      case EvalTask::needle:
      case EvalTask::litm_qa:
      case EvalTask::multi_doc_qa:
      case EvalTask::single_doc_qa:
        return best_subspan_accuracy(prediction, c.gold_answers);
      case EvalTask::passage_retrieval:
      case EvalTask::few_shot: {
        int best = 0;
        for (const auto& g : c.gold_answers) best = std::max(best, exact_match(prediction, g));
        return best;
      }
      case EvalTask::summarization: {
        if (c.gold_answers.empty()) return 0.0;
        auto it = c.meta.find("lang");
        TokenUnit unit = it != c.meta.end() && it->second == "zh"
                             ? TokenUnit::characters
                             : TokenUnit::words;
        return rouge_l(prediction, c.gold_answers.front(), unit);
      }
    }
    return 0.0;
  };
}

ModelFn mock_model(const std::string& behavior, std::uint64_t seed) {
  std::string name = behavior;
  std::string rest;
  if (auto colon = behavior.find(':'); colon != std::string::npos) {
    name = behavior.substr(0, colon);
    rest = behavior.substr(colon + 1);
  }

  if (name == "echo")
    return [](const EvalCase&, const std::string& prompt) { return prompt; };
  if (name == "perfect_retriever")
    return [](const EvalCase& c, const std::string&) {
      std::string gold = c.gold_answers.empty() ? std::string{} : c.gold_answers.front();
      return "The answer is " + gold + ".";
    };
  if (name == "fixed")
    return [rest](const EvalCase&, const std::string&) { return rest; };
  if (name == "random_choice") {
    std::uint64_t k = 0, extra_seed = 0;
    try {
      auto colon = rest.find(':');
      k = std::stoull(rest.substr(0, colon));
      if (colon != std::string::npos) extra_seed = std::stoull(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("mock random_choice expects <k>[:seed], got: " + rest);
    }
    if (k == 0) throw ConfigError("mock random_choice needs k >= 1");
    std::uint64_t base = mix_seed(seed, extra_seed);
    return [k, base](const EvalCase& c, const std::string&) {
      SeededRng rng(mix_seed(base, fnv1a64(c.case_id)));
      return "Paragraph " + std::to_string(rng.bounded(k) + 1);
    };
  }
  if (name == "flaky") {
    double p = 0.0;
    std::uint64_t extra_seed = 0;
    try {
      auto colon = rest.find(':');
      p = std::stod(rest.substr(0, colon));
      if (colon != std::string::npos) extra_seed = std::stoull(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("mock flaky expects <p>[:seed], got: " + rest);
    }
    std::uint64_t base = mix_seed(seed, extra_seed);
    return [p, base](const EvalCase& c, const std::string&) -> std::string {
      SeededRng rng(mix_seed(base, fnv1a64(c.case_id)));
      if (rng.unit() < p) throw TransportError(0, "injected mock fault");
      return "ok";
    };
  }
  throw ConfigError("unknown mock behavior: " + behavior);
}

std::pair<std::string, bool> truncate_prompt(const std::string& prompt,
                                             std::size_t max_tokens,
                                             const TokenCounter& counter,
                                             TruncationMode mode) {
  if (count_tokens(prompt, counter) <= max_tokens) return {prompt, false};

  auto offs = codepoint_offsets(prompt);
  std::size_t n_cps = offs.size() - 1;

  if (mode == TruncationMode::tail) {
    // Keep the longest prefix that fits.
    std::size_t lo = 0, hi = n_cps;
    while (lo < hi) {
      std::size_t mid = (lo + hi + 1) / 2;
      std::string head = prompt.substr(0, offs[mid]);
      if (count_tokens(head, counter) <= max_tokens) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    while (lo > 0 &&
           count_tokens(prompt.substr(0, offs[lo]), counter) > max_tokens)
      --lo;
    return {prompt.substr(0, offs[lo]), true};
  }

  // middle: keep equal head and tail halves, drop the middle.
  auto assemble = [&](std::size_t k) {
    std::string s = prompt.substr(0, offs[k]);
    s += prompt.substr(offs[n_cps - k]);
    return s;
  };
  std::size_t lo = 0, hi = n_cps / 2;
  while (lo < hi) {
    std::size_t mid = (lo + hi + 1) / 2;
    if (count_tokens(assemble(mid), counter) <= max_tokens) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  while (lo > 0 && count_tokens(assemble(lo), counter) > max_tokens) --lo;
  return {assemble(lo), true};
}

namespace {

std::vector<EvalRecord> run_impl(const std::vector<EvalCase>& cases,
                                 const ModelFn& model, bool measure_latency,
                                 const GenerationPolicy& policy,
                                 std::size_t max_input_tokens,
                                 const TokenCounter& counter, const Scorer& scorer,
                                 const RunOptions& opts) {
  GenerationPolicy eval_policy = policy;
  eval_policy.temperature = 0.0;  // greedy decoding for every eval run

  std::vector<EvalRecord> records(cases.size());
  auto run_one = [&](std::size_t i) {
    const EvalCase& c = cases[i];
    EvalRecord rec;
    rec.case_id = c.case_id;
    rec.keys = c.meta;
    rec.keys["task"] = std::string(to_string(c.task));
    rec.keys["prompt_style"] = std::string(to_string(c.prompt_style));
    if (c.gold_position) rec.keys["gold_position"] = std::to_string(*c.gold_position);

    auto [prompt, truncated] =
        truncate_prompt(render_eval_prompt(c), max_input_tokens, counter, opts.truncation);
    rec.truncated = truncated;

    auto t0 = std::chrono::steady_clock::now();
    bool got_prediction = false;
    int max_attempts = std::max(1, eval_policy.max_retries);
    for (int attempt = 1; attempt <= max_attempts && !got_prediction; ++attempt) {
      try {
        rec.prediction = model(c, prompt);
        got_prediction = true;
      } catch (const TransportError& e) {
        rec.error = e.what();
      }
    }
    if (measure_latency) {
      std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
      rec.latency_s = dt.count();
    }
    if (got_prediction) {
      rec.error.clear();
      rec.score = scorer(c, rec.prediction);
    } else {
      rec.score = 0.0;
    }
    records[i] = std::move(rec);
  };

  parallel_for_indexed(cases.size(), opts.max_in_flight, run_one);
  std::sort(records.begin(), records.end(),
            [](const EvalRecord& a, const EvalRecord& b) { return a.case_id < b.case_id; });
  return records;
}

}  // namespace

std::vector<EvalRecord> run_suite_with_model(const std::vector<EvalCase>& cases,
                                             const ModelFn& model,
                                             const GenerationPolicy& policy,
                                             std::size_t max_input_tokens,
                                             const TokenCounter& counter,
                                             const Scorer& scorer,
                                             const RunOptions& opts) {
  return run_impl(cases, model, /*measure_latency=*/false, policy, max_input_tokens,
                  counter, scorer, opts);
}

std::vector<EvalRecord> run_suite(const std::vector<EvalCase>& cases,
                                  const GenerationPolicy& policy,
                                  std::size_t max_input_tokens,
                                  const TokenCounter& counter, const Scorer& scorer,
                                  const RunOptions& opts) {
  const std::string& url = policy.endpoint_url;
  if (url.rfind("mock:", 0) == 0) {
    // Mock runs report zero latency so record files are byte-reproducible.
    ModelFn model = mock_model(url.substr(5), opts.seed);
    return run_impl(cases, model, /*measure_latency=*/false, policy, max_input_tokens,
                    counter, scorer, opts);
  }
  GenerationPolicy eval_policy = policy;
  eval_policy.temperature = 0.0;
  // Retries happen in run_impl, so each model call is a single request.
  ModelFn model = [eval_policy](const EvalCase&, const std::string& prompt) {
    return chat_complete(eval_policy, {{"user", prompt}});
  };
  return run_impl(cases, model, /*measure_latency=*/true, eval_policy, max_input_tokens,
                  counter, scorer, opts);
}

void write_records_jsonl(const std::vector<EvalRecord>& records,
                         const std::filesystem::path& path,
                         const json& extra_meta) {
  std::ostringstream out;
  double total = 0.0;
  std::size_t n_trunc = 0, n_err = 0;
  for (const auto& r : records) {
    out << json{{"case_id", r.case_id},
                {"prediction", r.prediction},
                {"score", r.score},
                {"latency_s", r.latency_s},
                {"truncated", r.truncated},
                {"error", r.error},
                {"keys", r.keys}}
               .dump()
        << "\n";
    total += r.score;
    if (r.truncated) ++n_trunc;
    if (!r.error.empty()) ++n_err;
  }
  json summary = extra_meta;
  summary["n_cases"] = records.size();
  summary["mean_score"] = records.empty() ? 0.0 : total / static_cast<double>(records.size());
  summary["n_truncated"] = n_trunc;
  summary["n_errors"] = n_err;
  summary["tool_version"] = kToolVersion;
  out << json{{"summary", summary}}.dump() << "\n";
  write_text_file(path.string(), out.str());
}

std::vector<EvalRecord> load_records_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read records: " + path.string());
  std::vector<EvalRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw ConfigError("malformed record line in " + path.string());
    if (j.contains("summary")) continue;
    EvalRecord r;
    r.case_id = j.at("case_id").get<std::string>();
    r.prediction = j.value("prediction", std::string{});
    r.score = j.at("score").get<double>();
    r.latency_s = j.value("latency_s", 0.0);
    r.truncated = j.value("truncated", false);
    r.error = j.value("error", std::string{});
    if (j.contains("keys"))
      r.keys = j["keys"].get<std::map<std::string, std::string>>();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace longctx
