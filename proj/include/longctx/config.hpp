#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "longctx/budget.hpp"
#include "longctx/corpus.hpp"
#include "longctx/evalharness.hpp"
#include "longctx/genclient.hpp"
#include "longctx/sample_builder.hpp"

namespace longctx {

/// Counter settings; chars_per_token <= 0 means "per-language default".
struct CounterSpec {
  CountMode mode = CountMode::word_based;
  double chars_per_token = 0.0;

  TokenCounter for_lang(Lang lang) const;
  nlohmann::json to_json() const;
};

struct CorpusConfig {
  std::map<Lang, std::vector<std::filesystem::path>> multi_doc;
  std::map<Lang, std::vector<std::filesystem::path>> single_doc;
  std::map<Lang, std::vector<std::filesystem::path>> short_form;
  std::size_t min_doc_chars = kDefaultMinDocChars;
  std::size_t group_size = 100;
};

struct NeedleConfig {
  std::vector<std::size_t> lengths;
  std::vector<double> depths;
  std::string needle;
  std::string question;
  std::string answer;
  std::vector<std::filesystem::path> filler;
  Lang filler_lang = Lang::en;
};

struct LitmConfig {
  std::filesystem::path records;
  std::vector<int> positions{1, 5, 10, 15, 20};
  int n_docs = 20;
};

struct LongbenchConfig {
  std::filesystem::path records;
  std::optional<EvalTask> task;
};

struct EvalConfig {
  std::string suite = "litm";  // needle | litm | longbench
  std::vector<PromptStyle> prompt_styles{PromptStyle::default_style};
  std::size_t max_input_tokens = 16000;
  TruncationMode truncation = TruncationMode::middle;
  std::optional<NeedleConfig> needle;
  std::optional<LitmConfig> litm;
  std::optional<LongbenchConfig> longbench;
};

/// Fully resolved run configuration. Seeds are always explicit; there is no
/// wall-clock fallback anywhere.
struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  CorpusConfig corpus;
  CounterSpec counter;
  GenerationPolicy policy;
  double fuzz = 0.9;
  std::vector<AnswerStyle> styles{AnswerStyle::paraphrase};
  DatasetMix mix;
  EvalConfig eval;
  /// The merged config document, embedded in artifacts for provenance.
  nlohmann::json resolved;
};

RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// Checks that the paths a command will read actually exist.
void validate_paths_for_synth(const RunConfig& cfg);
void validate_paths_for_eval(const RunConfig& cfg);

}  // namespace longctx
