#include "longctx/cli.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <ostream>
#include <set>

#include <CLI11.hpp>

#include "longctx/metrics.hpp"

namespace longctx {

using nlohmann::json;

namespace {

std::uint64_t lang_tag(Lang lang) { return lang == Lang::en ? 1 : 2; }

std::filesystem::path ensure_output_dir(const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec)
    throw ConfigError("cannot create output dir: " + cfg.output_dir.string());
  return cfg.output_dir;
}

}  // namespace

int cmd_ingest(const RunConfig& cfg, std::ostream& out) {
  validate_paths_for_synth(cfg);
  auto dir = ensure_output_dir(cfg);
  IngestOptions opts;
  opts.min_chars = cfg.corpus.min_doc_chars;

  json stats = json::object();
  auto ingest_cell = [&](const char* kind,
                         const std::map<Lang, std::vector<std::filesystem::path>>& cells) {
    for (const auto& [lang, paths] : cells) {
      if (paths.empty()) continue;
      DocumentStore store = ingest_documents(paths, lang, opts);
      std::string name = std::string(kind) + "_" + std::string(to_string(lang));
      write_store_jsonl(store, dir / ("store_" + name + ".jsonl"),
                        json{{"config", cfg.resolved}});
      stats[name] = json{{"n_docs", store.size()},
                         {"n_skipped", store.skipped()},
                         {"n_malformed", store.malformed()}};
    }
  };
  ingest_cell("multi_doc", cfg.corpus.multi_doc);
  ingest_cell("single_doc", cfg.corpus.single_doc);
  if (stats.empty()) throw ConfigError("no corpus paths configured");

  json report{{"stores", stats},
              {"tool_version", kToolVersion},
              {"config", cfg.resolved}};
  write_text_file((dir / "ingest_stats.json").string(), report.dump(2) + "\n");
  out << report.dump(2) << "\n";
  return kExitOk;
}

namespace {

struct SynthState {
  std::map<AnswerStyle, std::vector<TrainingSample>> long_pool;
  std::vector<ShortFormSample> short_pool;
  std::map<std::string, std::size_t> skipped;
};

// One QA generation per group; every requested style reuses the pair.
void build_multidoc_lang(const RunConfig& cfg, Lang lang,
                         const std::vector<std::filesystem::path>& paths,
                         ChatTransport& transport, SynthState& state) {
  IngestOptions iopts;
  iopts.min_chars = cfg.corpus.min_doc_chars;
  DocumentStore store = ingest_documents(paths, lang, iopts);
  std::vector<DocGroup> groups = partition_groups(
      store, cfg.corpus.group_size, mix_seed(cfg.seed, mix_seed(lang_tag(lang), 10)));

  BuilderConfig bc;
  bc.policy = cfg.policy;
  bc.counter = cfg.counter.for_lang(lang);
  bc.fuzz = cfg.fuzz;

  struct GroupResult {
    std::map<AnswerStyle, TrainingSample> samples;
    SkipReason skip = SkipReason::none;
  };
  std::vector<GroupResult> results(groups.size());

  parallel_for_indexed(groups.size(), cfg.policy.max_in_flight, [&](std::size_t i) {
    const DocGroup& group = groups[i];
    std::uint64_t group_seed =
        mix_seed(cfg.seed, mix_seed(lang_tag(lang), 100 + static_cast<std::uint64_t>(group.group_id)));
    std::size_t span = cfg.mix.max_tokens - cfg.mix.min_tokens + 1;
    std::size_t budget =
        cfg.mix.min_tokens + SeededRng(mix_seed(group_seed, 7)).bounded(span);

    QaOutcome gen = generate_qa_pair(transport, group.gold, cfg.policy, cfg.fuzz);
    if (!gen.ok()) {
      results[i].skip = gen.failure == GenFailure::transport
                            ? SkipReason::generation_transport
                            : SkipReason::generation_format;
      return;
    }
    for (AnswerStyle style : cfg.styles) {
      BuildOutcome built =
          build_multidoc_from_qa(*gen.pair, group, bc, budget, style, group_seed);
      if (!built.ok()) {
        results[i].skip = built.skip;  // budget skips are style-independent
        results[i].samples.clear();
        return;
      }
      results[i].samples.emplace(style, std::move(*built.sample));
    }
  });

  for (auto& r : results) {
    if (r.skip != SkipReason::none) {
      ++state.skipped[std::string(to_string(r.skip))];
      continue;
    }
    for (auto& [style, sample] : r.samples)
      state.long_pool[style].push_back(std::move(sample));
  }
}

void build_singledoc_lang(const RunConfig& cfg, Lang lang,
                          const std::vector<std::filesystem::path>& paths,
                          ChatTransport& transport, SynthState& state) {
  IngestOptions iopts;
  iopts.min_chars = cfg.corpus.min_doc_chars;
  DocumentStore store = ingest_documents(paths, lang, iopts);

  BuilderConfig bc;
  bc.policy = cfg.policy;
  bc.counter = cfg.counter.for_lang(lang);
  bc.fuzz = cfg.fuzz;

  struct DocResult {
    std::map<AnswerStyle, TrainingSample> samples;
    SkipReason skip = SkipReason::none;
  };
  std::vector<DocResult> results(store.size());

  parallel_for_indexed(store.size(), cfg.policy.max_in_flight, [&](std::size_t i) {
    const Document& doc = store.docs()[i];
    std::uint64_t doc_seed =
        mix_seed(cfg.seed, mix_seed(lang_tag(lang), 5000 + static_cast<std::uint64_t>(i)));
    std::size_t span = cfg.mix.max_tokens - cfg.mix.min_tokens + 1;
    std::size_t budget = cfg.mix.min_tokens + SeededRng(mix_seed(doc_seed, 7)).bounded(span);

    auto paragraphs = split_paragraphs(doc.text);
    if (paragraphs.empty()) {
      results[i].skip = SkipReason::no_paragraphs;
      return;
    }
    std::uint64_t para_seed = mix_seed(doc_seed, 3);
    std::string_view target = paragraphs[SeededRng(para_seed).bounded(paragraphs.size())];
    Document paragraph_doc = make_document(doc.id, std::string(target), doc.lang, doc.source);

    QaOutcome gen = generate_qa_pair(transport, paragraph_doc, cfg.policy, cfg.fuzz);
    if (!gen.ok()) {
      results[i].skip = gen.failure == GenFailure::transport
                            ? SkipReason::generation_transport
                            : SkipReason::generation_format;
      return;
    }
    for (AnswerStyle style : cfg.styles) {
      BuildOutcome built = build_singledoc_from_qa(*gen.pair, doc, bc, budget, style, doc_seed);
      if (!built.ok()) {
        results[i].skip = built.skip;
        results[i].samples.clear();
        return;
      }
      built.sample->seed_trace = {budget, para_seed};
      results[i].samples.emplace(style, std::move(*built.sample));
    }
  });

  for (auto& r : results) {
    if (r.skip != SkipReason::none) {
      ++state.skipped[std::string(to_string(r.skip))];
      continue;
    }
    for (auto& [style, sample] : r.samples)
      state.long_pool[style].push_back(std::move(sample));
  }
}

}  // namespace

int cmd_synth(const RunConfig& cfg, std::ostream& out) {
  validate_paths_for_synth(cfg);
  auto dir = ensure_output_dir(cfg);
  auto transport = make_transport(cfg.policy);

  SynthState state;
  for (const auto& [lang, paths] : cfg.corpus.multi_doc)
    if (!paths.empty()) build_multidoc_lang(cfg, lang, paths, *transport, state);
  for (const auto& [lang, paths] : cfg.corpus.single_doc)
    if (!paths.empty()) build_singledoc_lang(cfg, lang, paths, *transport, state);
  for (const auto& [lang, paths] : cfg.corpus.short_form)
    for (const auto& p : paths) {
      auto loaded = load_short_form_jsonl(p, lang);
      std::move(loaded.begin(), loaded.end(), std::back_inserter(state.short_pool));
    }

  json style_counts = json::object();
  std::size_t built_total = 0;
  for (std::size_t s = 0; s < cfg.styles.size(); ++s) {
    AnswerStyle style = cfg.styles[s];
    Dataset dataset = compose_dataset(state.long_pool[style], state.short_pool, cfg.mix,
                                      mix_seed(cfg.seed, 500 + s));
    dataset.meta["counter"] = cfg.counter.to_json();
    dataset.meta["seeds"]["root"] = cfg.seed;
    dataset.meta["style"] = std::string(to_string(style));
    dataset.meta["config"] = cfg.resolved;
    emit_jsonl(dataset, dir / ("dataset_" + std::string(to_string(style)) + ".jsonl"));
    style_counts[std::string(to_string(style))] = dataset.samples.size();
    built_total += dataset.samples.size();
  }

  json skipped = json::object();
  std::size_t skipped_total = 0;
  for (const auto& [reason, n] : state.skipped) {
    skipped[reason] = n;
    skipped_total += n;
  }
  json report{{"built", built_total},
              {"skipped", skipped},
              {"styles", style_counts},
              {"short_form_pool", state.short_pool.size()},
              {"tool_version", kToolVersion},
              {"config", cfg.resolved}};
  write_text_file((dir / "synth_report.json").string(), report.dump(2) + "\n");
  out << report.dump(2) << "\n";
  return skipped_total == 0 ? kExitOk : kExitPartial;
}

namespace {

PromptStyle map_style_for_task(EvalTask task, PromptStyle requested) {
  if (task == EvalTask::passage_retrieval) {
    if (requested == PromptStyle::default_style || requested == PromptStyle::pr_default)
      return PromptStyle::pr_default;
    if (requested == PromptStyle::cot || requested == PromptStyle::pr_cot)
      return PromptStyle::pr_cot;
    throw ConfigError("passage_retrieval supports default/cot prompt styles only");
  }
  if (requested == PromptStyle::pr_default || requested == PromptStyle::pr_cot)
    throw ConfigError("pr prompt styles only apply to passage_retrieval");
  return requested;
}

std::vector<std::string> group_keys_for(const std::vector<EvalRecord>& records) {
  auto has_key = [&](const char* k) {
    return !records.empty() &&
           records.front().keys.find(k) != records.front().keys.end();
  };
  if (has_key("position")) return {"position"};
  if (has_key("depth_pct")) return {"length", "depth_pct"};
  if (has_key("dataset")) return {"dataset"};
  return {"task"};
}

MetricReport report_from_records(const std::vector<EvalRecord>& records,
                                 const std::vector<std::string>& group_by,
                                 const std::string& task) {
  std::vector<RecordEntry> entries;
  entries.reserve(records.size());
  for (const auto& r : records) entries.push_back({r.keys, r.score});
  return aggregate_report(entries, group_by, task);
}

}  // namespace

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
  validate_paths_for_eval(cfg);
  auto dir = ensure_output_dir(cfg);

  TokenCounter counter = cfg.counter.for_lang(
      cfg.eval.suite == "needle" && cfg.eval.needle ? cfg.eval.needle->filler_lang
                                                    : Lang::en);

  std::vector<EvalCase> base_cases;
  if (cfg.eval.suite == "needle") {
    const NeedleConfig& nc = *cfg.eval.needle;
    IngestOptions iopts;
    iopts.min_chars = cfg.corpus.min_doc_chars;
    DocumentStore filler = ingest_documents(nc.filler, nc.filler_lang, iopts);
    base_cases = build_needle_suite(nc.lengths, nc.depths, nc.needle, nc.question,
                                    nc.answer, filler, counter, mix_seed(cfg.seed, 41));
  } else if (cfg.eval.suite == "litm") {
    const LitmConfig& lc = *cfg.eval.litm;
    auto records = load_litm_jsonl(lc.records);
    base_cases = build_litm_suite(records, lc.positions, lc.n_docs, mix_seed(cfg.seed, 42));
  } else {
    const LongbenchConfig& lb = *cfg.eval.longbench;
    base_cases = load_longbench_jsonl(lb.records, lb.task, PromptStyle::default_style);
  }

  RunOptions opts;
  opts.truncation = cfg.eval.truncation;
  opts.seed = mix_seed(cfg.seed, 43);
  opts.max_in_flight = cfg.policy.max_in_flight;

  bool any_error = false;
  for (PromptStyle requested : cfg.eval.prompt_styles) {
    std::vector<EvalCase> cases = base_cases;
    for (auto& c : cases) c.prompt_style = map_style_for_task(c.task, requested);

    std::vector<EvalRecord> records = run_suite(cases, cfg.policy,
                                                cfg.eval.max_input_tokens, counter,
                                                default_scorer(), opts);
    for (const auto& r : records) any_error |= !r.error.empty();

    std::string tag = cfg.eval.suite + "_" + std::string(to_string(requested));
    write_records_jsonl(records, dir / ("records_" + tag + ".jsonl"),
                        json{{"config", cfg.resolved}});

    MetricReport report =
        report_from_records(records, group_keys_for(records), cfg.eval.suite);
    json report_doc = report_to_json(report);
    report_doc["meta"] = json{{"tool_version", kToolVersion}, {"config", cfg.resolved}};
    write_text_file((dir / ("report_" + tag + ".json")).string(),
                    report_doc.dump(2) + "\n");
    out << "prompt_style: " << to_string(requested) << "\n"
        << render_table_text(report) << "\n";
  }
  return any_error ? kExitPartial : kExitOk;
}

int cmd_report(const std::vector<std::filesystem::path>& inputs,
               const std::vector<std::string>& group_by, std::ostream& out) {
  if (inputs.empty()) throw ConfigError("report: no input record files given");

  std::set<std::string> stems;
  bool stem_collision = false;
  for (const auto& path : inputs)
    stem_collision |= !stems.insert(path.stem().string()).second;

  std::vector<std::pair<std::string, MetricReport>> reports;
  for (const auto& path : inputs) {
    auto records = load_records_jsonl(path);
    if (records.empty()) throw ConfigError("no records in " + path.string());
    auto keys = group_by.empty() ? group_keys_for(records) : group_by;
    std::string task = records.front().keys.count("task")
                           ? records.front().keys.at("task")
                           : std::string("records");
    std::string label = path.stem().string();
    if (stem_collision && path.has_parent_path())
      label = path.parent_path().filename().string() + "/" + label;
    reports.emplace_back(std::move(label), report_from_records(records, keys, task));
  }

  bool same_layout = true;
  for (const auto& [name, r] : reports) {
    if (r.cells.size() != reports.front().second.cells.size()) same_layout = false;
    for (std::size_t i = 0; same_layout && i < r.cells.size(); ++i)
      if (r.cells[i].first != reports.front().second.cells[i].first) same_layout = false;
  }

  if (reports.size() > 1 && same_layout) {
    out << render_comparison_text(reports);
  } else {
    for (const auto& [name, r] : reports) {
      out << name << "\n" << render_table_text(r) << "\n";
    }
  }
  return kExitOk;
}

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  std::string endpoint;
  std::string model;
  std::string task;
  std::vector<std::string> prompt_styles;
  std::int64_t max_input_tokens = -1;

  void add_to(CLI::App* app, bool needs_config) {
    auto* opt = app->add_option("--config", config_path, "JSON config file");
    if (needs_config) opt->required();
    app->add_option("--out", out_dir, "output directory override");
    app->add_option("--seed", seed, "seed override");
    app->add_option("--endpoint", endpoint, "generation endpoint override");
    app->add_option("--model", model, "model name override");
  }

  RunConfig load() const {
    json j = json::parse(read_text_file(config_path), nullptr, false);
    if (j.is_discarded())
      throw ConfigError("config is not valid JSON: " + config_path);
    json patch = json::object();
    if (!out_dir.empty()) patch["output_dir"] = out_dir;
    if (seed >= 0) patch["seed"] = seed;
    if (!endpoint.empty()) patch["generation"]["endpoint_url"] = endpoint;
    if (!model.empty()) patch["generation"]["model_name"] = model;
    if (!task.empty()) patch["eval"]["task"] = task;
    if (!prompt_styles.empty()) patch["eval"]["prompt_styles"] = prompt_styles;
    if (max_input_tokens > 0) patch["eval"]["max_input_tokens"] = max_input_tokens;
    j.merge_patch(patch);
    return config_from_json(j);
  }
};

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"long-context SFT dataset synthesis and evaluation toolkit"};
  app.require_subcommand(1);

  CommonFlags ingest_flags, synth_flags, eval_flags, needle_flags;

  auto* ingest = app.add_subcommand("ingest", "ingest corpora into store files");
  ingest_flags.add_to(ingest, true);

  auto* synth = app.add_subcommand("synth", "synthesize a training dataset");
  synth_flags.add_to(synth, true);

  auto* eval = app.add_subcommand("eval", "run an evaluation suite");
  eval_flags.add_to(eval, true);
  eval->add_option("--task", eval_flags.task, "suite: needle | litm | longbench");
  eval->add_option("--prompt-style", eval_flags.prompt_styles,
                   "prompt styles (repeatable): default cot no_cot");
  eval->add_option("--max-input-tokens", eval_flags.max_input_tokens,
                   "input length cap");

  auto* needle = app.add_subcommand("needle", "alias for eval --task needle");
  needle_flags.add_to(needle, true);
  needle->add_option("--prompt-style", needle_flags.prompt_styles,
                     "prompt styles (repeatable)");
  needle->add_option("--max-input-tokens", needle_flags.max_input_tokens,
                     "input length cap");

  std::vector<std::string> report_inputs;
  std::string report_group_by;
  auto* report = app.add_subcommand("report", "render tables from record files");
  report->add_option("inputs", report_inputs, "record JSONL files");
  report->add_option("--group-by", report_group_by, "comma-separated group keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(ingest_flags.load(), std::cout);
    if (synth->parsed()) return cmd_synth(synth_flags.load(), std::cout);
    if (eval->parsed()) return cmd_eval(eval_flags.load(), std::cout);
    if (needle->parsed()) {
      needle_flags.task = "needle";
      return cmd_eval(needle_flags.load(), std::cout);
    }
    if (report->parsed()) {
      std::vector<std::filesystem::path> inputs(report_inputs.begin(),
                                                report_inputs.end());
      std::vector<std::string> keys;
      if (!report_group_by.empty()) {
        std::size_t pos = 0;
        while (pos <= report_group_by.size()) {
          auto comma = report_group_by.find(',', pos);
          if (comma == std::string::npos) comma = report_group_by.size();
          if (comma > pos) keys.push_back(report_group_by.substr(pos, comma - pos));
          pos = comma + 1;
        }
      }
      return cmd_report(inputs, keys, std::cout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace longctx
