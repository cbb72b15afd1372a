#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "longctx/budget.hpp"
#include "longctx/corpus.hpp"
#include "longctx/genclient.hpp"

namespace longctx {

enum class EvalTask {
  needle,
  litm_qa,
  passage_retrieval,
  multi_doc_qa,
  single_doc_qa,
  summarization,
  few_shot,
};
std::string_view to_string(EvalTask t);
std::optional<EvalTask> task_from_string(std::string_view s);

enum class PromptStyle { default_style, cot, no_cot, pr_default, pr_cot };
std::string_view to_string(PromptStyle s);
std::optional<PromptStyle> prompt_style_from_string(std::string_view s);

struct EvalCase {
  std::string case_id;
  EvalTask task = EvalTask::multi_doc_qa;
  PromptStyle prompt_style = PromptStyle::default_style;
  std::string context;
  std::string question;
  std::vector<std::string> gold_answers;
  std::optional<int> gold_position;  // needle: depth percent; litm: serial
  std::map<std::string, std::string> meta;
};

struct EvalRecord {
  std::string case_id;
  std::string prediction;
  double score = 0.0;
  double latency_s = 0.0;
  bool truncated = false;
  std::string error;
  /// Group keys copied from the case for offline aggregation.
  std::map<std::string, std::string> keys;
};

// ---------------------------------------------------------------------------
// prompt templates (slots: {documents} {question} / {context} {input})

extern const std::string kQaDefaultTemplate;
extern const std::string kQaCotTemplate;
extern const std::string kQaNoCotTemplate;
extern const std::string kPrDefaultTemplate;
extern const std::string kPrCotTemplate;

/// Byte-exact template instantiation. passage_retrieval takes the pr styles,
/// every other task the QA styles; anything else is an error.
std::string render_eval_prompt(const EvalCase& c);

// ---------------------------------------------------------------------------
// suite builders

/// One case per (length, depth): filler sentences are concatenated up to the
/// token length and the needle lands on the sentence boundary nearest to
/// depth x length, exactly once. gold_position stores the depth percent.
std::vector<EvalCase> build_needle_suite(const std::vector<std::size_t>& lengths,
                                         const std::vector<double>& depths,
                                         const std::string& needle,
                                         const std::string& needle_question,
                                         const std::string& needle_answer,
                                         const DocumentStore& filler,
                                         const TokenCounter& counter,
                                         std::uint64_t seed);

struct LitmRecord {
  std::string question;
  std::vector<std::string> answers;
  Document gold;
  std::vector<Document> distractors;
};

/// One case per (record, position): gold pinned at the requested serial
/// number among n_docs documents, distractors seeded-shuffled around it.
std::vector<EvalCase> build_litm_suite(const std::vector<LitmRecord>& records,
                                       const std::vector<int>& positions, int n_docs,
                                       std::uint64_t seed);

std::vector<LitmRecord> load_litm_jsonl(const std::filesystem::path& path);

/// LongBench-native records {"input","context","answers","dataset"}; the
/// dataset name picks the task unless task_override is given.
std::vector<EvalCase> load_longbench_jsonl(const std::filesystem::path& path,
                                           std::optional<EvalTask> task_override,
                                           PromptStyle style);

// ---------------------------------------------------------------------------
// running

enum class TruncationMode { middle, tail };
std::string_view to_string(TruncationMode m);

struct RunOptions {
  TruncationMode truncation = TruncationMode::middle;
  std::uint64_t seed = 0;
  int max_in_flight = 4;
};

using Scorer = std::function<double(const EvalCase&, const std::string& prediction)>;

/// Task-default scoring: best-subspan for QA-style tasks, exact match for
/// passage retrieval and few-shot, ROUGE-L for summarization (character
/// tokens when the case meta says lang=zh).
Scorer default_scorer();

/// A case-aware model: returns the prediction for a rendered prompt, or
/// throws TransportError.
using ModelFn = std::function<std::string(const EvalCase&, const std::string& prompt)>;

/// Behaviors: echo | perfect_retriever | fixed:<text> | random_choice:<k> |
/// flaky:<p>. Randomized behaviors derive their stream from (seed, case_id),
/// so concurrency cannot change outcomes.
ModelFn mock_model(const std::string& behavior, std::uint64_t seed);

/// Middle truncation keeps equal head/tail codepoint halves; tail truncation
/// keeps the head. Prefix and suffix are preserved verbatim and multi-byte
/// characters are never split.
std::pair<std::string, bool> truncate_prompt(const std::string& prompt,
                                             std::size_t max_tokens,
                                             const TokenCounter& counter,
                                             TruncationMode mode);

/// Runs every case (temperature forced to 0), scores predictions, and
/// returns records ordered by case_id. Transport failures keep retrying up
/// to policy.max_retries, then score 0 with an error note.
std::vector<EvalRecord> run_suite(const std::vector<EvalCase>& cases,
                                  const GenerationPolicy& policy,
                                  std::size_t max_input_tokens,
                                  const TokenCounter& counter, const Scorer& scorer,
                                  const RunOptions& opts = {});

/// Same, with an in-process model (treated as instantaneous: latency 0).
std::vector<EvalRecord> run_suite_with_model(const std::vector<EvalCase>& cases,
                                             const ModelFn& model,
                                             const GenerationPolicy& policy,
                                             std::size_t max_input_tokens,
                                             const TokenCounter& counter,
                                             const Scorer& scorer,
                                             const RunOptions& opts = {});

/// Record lines plus a {"summary": ...} trailer.
void write_records_jsonl(const std::vector<EvalRecord>& records,
                         const std::filesystem::path& path,
                         const nlohmann::json& extra_meta);
std::vector<EvalRecord> load_records_jsonl(const std::filesystem::path& path);

}  // namespace longctx
