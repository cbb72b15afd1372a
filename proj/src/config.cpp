#include "longctx/config.hpp"

namespace longctx {

using nlohmann::json;

TokenCounter CounterSpec::for_lang(Lang lang) const {
  TokenCounter c = default_counter(lang, mode);
  if (chars_per_token > 0) c.chars_per_token = chars_per_token;
  return c;
}

// chars_per_token 0 means "per-language default" (4.0 en, 1.5 zh).
json CounterSpec::to_json() const {
  return json{{"mode", std::string(to_string(mode))},
              {"chars_per_token", chars_per_token}};
}

namespace {

std::vector<std::filesystem::path> paths_from_json(const json& j) {
  std::vector<std::filesystem::path> out;
  for (const auto& p : j) out.emplace_back(p.get<std::string>());
  return out;
}

std::map<Lang, std::vector<std::filesystem::path>> lang_paths_from_json(const json& j) {
  std::map<Lang, std::vector<std::filesystem::path>> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto lang = lang_from_string(it.key());
    if (!lang) throw ConfigError("unknown language tag in corpus config: " + it.key());
    out[*lang] = paths_from_json(it.value());
  }
  return out;
}

CorpusConfig corpus_from_json(const json& j) {
  CorpusConfig c;
  if (j.contains("multi_doc")) c.multi_doc = lang_paths_from_json(j["multi_doc"]);
  if (j.contains("single_doc")) c.single_doc = lang_paths_from_json(j["single_doc"]);
  if (j.contains("short_form")) c.short_form = lang_paths_from_json(j["short_form"]);
  c.min_doc_chars = j.value("min_doc_chars", c.min_doc_chars);
  c.group_size = j.value("group_size", c.group_size);
  if (c.group_size < 2) throw ConfigError("group_size must be >= 2");
  return c;
}

GenerationPolicy policy_from_json(const json& j) {
  GenerationPolicy p;
  p.endpoint_url = j.value("endpoint_url", p.endpoint_url);
  p.model_name = j.value("model_name", p.model_name);
  p.temperature = j.value("temperature", p.temperature);
  p.max_retries = j.value("max_retries", p.max_retries);
  p.request_timeout_s = j.value("request_timeout_s", p.request_timeout_s);
  p.max_in_flight = j.value("max_in_flight", p.max_in_flight);
  if (p.max_retries < 1) throw ConfigError("max_retries must be >= 1");
  if (p.temperature < 0) throw ConfigError("temperature must be >= 0");
  return p;
}

EvalConfig eval_from_json(const json& j) {
  EvalConfig e;
  e.suite = j.value("task", e.suite);
  if (e.suite != "needle" && e.suite != "litm" && e.suite != "longbench")
    throw ConfigError("eval.task must be needle, litm or longbench, got: " + e.suite);
  if (j.contains("prompt_styles")) {
    e.prompt_styles.clear();
    for (const auto& s : j["prompt_styles"]) {
      auto style = prompt_style_from_string(s.get<std::string>());
      if (!style) throw ConfigError("unknown prompt style: " + s.get<std::string>());
      e.prompt_styles.push_back(*style);
    }
    if (e.prompt_styles.empty()) throw ConfigError("prompt_styles must be non-empty");
  }
  e.max_input_tokens = j.value("max_input_tokens", e.max_input_tokens);
  if (auto mode = j.value("truncation", std::string("middle")); mode == "middle") {
    e.truncation = TruncationMode::middle;
  } else if (mode == "tail") {
    e.truncation = TruncationMode::tail;
  } else {
    throw ConfigError("truncation must be middle or tail");
  }
  if (j.contains("needle")) {
    const json& n = j["needle"];
    NeedleConfig nc;
    for (const auto& v : n.at("lengths")) nc.lengths.push_back(v.get<std::size_t>());
    for (const auto& v : n.at("depths")) nc.depths.push_back(v.get<double>());
    nc.needle = n.at("needle").get<std::string>();
    nc.question = n.at("question").get<std::string>();
    nc.answer = n.at("answer").get<std::string>();
    nc.filler = paths_from_json(n.at("filler"));
    if (n.contains("filler_lang")) {
      auto lang = lang_from_string(n["filler_lang"].get<std::string>());
      if (!lang) throw ConfigError("unknown filler_lang");
      nc.filler_lang = *lang;
    }
    e.needle = std::move(nc);
  }
  if (j.contains("litm")) {
    const json& l = j["litm"];
    LitmConfig lc;
    lc.records = l.at("records").get<std::string>();
    if (l.contains("positions")) {
      lc.positions.clear();
      for (const auto& v : l["positions"]) lc.positions.push_back(v.get<int>());
    }
    lc.n_docs = l.value("n_docs", lc.n_docs);
    e.litm = std::move(lc);
  }
  if (j.contains("longbench")) {
    const json& l = j["longbench"];
    LongbenchConfig lb;
    lb.records = l.at("records").get<std::string>();
    if (l.contains("task") && l["task"].is_string()) {
      auto t = task_from_string(l["task"].get<std::string>());
      if (!t) throw ConfigError("unknown longbench task: " + l["task"].get<std::string>());
      lb.task = t;
    }
    e.longbench = std::move(lb);
  }
  return e;
}

}  // namespace

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  if (!j.contains("seed") || !j["seed"].is_number())
    throw ConfigError("config requires an explicit integer seed");
  cfg.seed = j["seed"].get<std::uint64_t>();
  cfg.output_dir = j.value("output_dir", std::string("out"));
  if (j.contains("corpus")) cfg.corpus = corpus_from_json(j["corpus"]);
  if (j.contains("counter")) {
    const json& c = j["counter"];
    if (c.contains("mode")) {
      auto m = c["mode"].get<std::string>();
      if (m == "word_based") {
        cfg.counter.mode = CountMode::word_based;
      } else if (m == "char_based") {
        cfg.counter.mode = CountMode::char_based;
      } else {
        throw ConfigError("unknown counter mode: " + m);
      }
    }
    cfg.counter.chars_per_token = c.value("chars_per_token", 0.0);
  }
  if (j.contains("generation")) cfg.policy = policy_from_json(j["generation"]);
  cfg.fuzz = j.contains("generation") ? j["generation"].value("fuzz", 0.9) : 0.9;
  if (cfg.fuzz < 0 || cfg.fuzz > 1) throw ConfigError("fuzz must be in [0,1]");
  if (j.contains("styles")) {
    cfg.styles.clear();
    for (const auto& s : j["styles"]) {
      auto style = style_from_string(s.get<std::string>());
      if (!style) throw ConfigError("unknown answer style: " + s.get<std::string>());
      cfg.styles.push_back(*style);
    }
    if (cfg.styles.empty()) throw ConfigError("styles must be non-empty");
  } else if (j.contains("style")) {
    auto style = style_from_string(j["style"].get<std::string>());
    if (!style) throw ConfigError("unknown answer style: " + j["style"].get<std::string>());
    cfg.styles = {*style};
  }
  if (j.contains("mix")) cfg.mix = mix_from_json(j["mix"]);
  if (j.contains("eval")) cfg.eval = eval_from_json(j["eval"]);
  cfg.resolved = j;
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  json j = json::parse(read_text_file(path.string()), nullptr, false);
  if (j.is_discarded())
    throw ConfigError("config is not valid JSON: " + path.string());
  return config_from_json(j);
}

namespace {

void require_paths(const std::vector<std::filesystem::path>& paths) {
  for (const auto& p : paths) {
    std::error_code ec;
    if (!std::filesystem::exists(p, ec) || ec)
      throw ConfigError("configured path does not exist: " + p.string());
  }
}

}  // namespace

void validate_paths_for_synth(const RunConfig& cfg) {
  for (const auto& [lang, paths] : cfg.corpus.multi_doc) require_paths(paths);
  for (const auto& [lang, paths] : cfg.corpus.single_doc) require_paths(paths);
  for (const auto& [lang, paths] : cfg.corpus.short_form) require_paths(paths);
}

void validate_paths_for_eval(const RunConfig& cfg) {
  if (cfg.eval.suite == "needle") {
    if (!cfg.eval.needle) throw ConfigError("eval.task=needle requires an eval.needle block");
    require_paths(cfg.eval.needle->filler);
  } else if (cfg.eval.suite == "litm") {
    if (!cfg.eval.litm) throw ConfigError("eval.task=litm requires an eval.litm block");
    require_paths({cfg.eval.litm->records});
  } else if (cfg.eval.suite == "longbench") {
    if (!cfg.eval.longbench)
      throw ConfigError("eval.task=longbench requires an eval.longbench block");
    require_paths({cfg.eval.longbench->records});
  }
}

}  // namespace longctx
