#pragma once

#include <cstdint>
#include <filesystem>
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

enum class AnswerStyle { paraphrase, short_form_answer, detailed, ziya };
std::string_view to_string(AnswerStyle s);
std::optional<AnswerStyle> style_from_string(std::string_view s);

enum class SampleKind { multi_doc, single_doc, short_form };
std::string_view to_string(SampleKind k);
std::optional<SampleKind> kind_from_string(std::string_view s);

struct TrainingSample {
  std::string context;
  std::string question;
  std::string answer;
  AnswerStyle style = AnswerStyle::paraphrase;
  int gold_position = 0;  // 1-based; 0 for short_form
  int n_docs = 0;         // 0 for short_form
  Lang lang = Lang::en;
  std::size_t token_len = 0;  // context + question; 0 for short_form
  SampleKind kind = SampleKind::multi_doc;
  std::vector<std::uint64_t> seed_trace;

  bool operator==(const TrainingSample&) const = default;
};

/// Dataset composition targets: 3000 long-context samples (80% multi-doc)
/// plus 2000 short-form, split evenly between languages, with per-sample
/// budgets drawn from [min_tokens, max_tokens].
struct DatasetMix {
  int n_long = 3000;
  int n_short = 2000;
  double multi_doc_frac = 0.8;
  double lang_split = 0.5;  // fraction of en
  std::size_t min_tokens = 8000;
  std::size_t max_tokens = 32000;
};

nlohmann::json mix_to_json(const DatasetMix& m);
DatasetMix mix_from_json(const nlohmann::json& j);

/// Per-document rendering used for multi-doc contexts; {i} and {text} slots.
inline constexpr std::string_view kDefaultDocTemplate = "Document [{i}]:\n{text}\n\n";

std::string render_doc(std::string_view doc_template, int index, std::string_view text);

struct AssembledContext {
  std::string text;
  std::map<std::string, int> position_of;  // doc id -> 1-based serial number
};

/// Seeded shuffle, then serial-numbered concatenation. Throws on duplicate ids.
AssembledContext assemble_context(const std::vector<Document>& docs, std::uint64_t seed,
                                  std::string_view doc_template = kDefaultDocTemplate);

/// gold_index is the 1-based serial number of the gold document; pass 0 for
/// single-doc samples, which drop the "of document [k]" clause.
std::string render_answer_style(const QAPair& qa, int gold_index,
                                std::string_view question, AnswerStyle style);

enum class SkipReason {
  none,
  generation_format,
  generation_transport,
  gold_too_long,
  no_paragraphs,
};
std::string_view to_string(SkipReason r);

struct BuildOutcome {
  std::optional<TrainingSample> sample;
  SkipReason skip = SkipReason::none;
  std::string detail;
  bool ok() const { return sample.has_value(); }
};

struct BuilderConfig {
  GenerationPolicy policy;
  TokenCounter counter;
  double fuzz = 0.9;
  std::string doc_template{kDefaultDocTemplate};
};

/// Full multi-doc pipeline for one group: QA generation on the gold document,
/// budget-driven distractor discarding, shuffled serial-numbered assembly,
/// then answer styling. seed_trace records [budget, fit seed, shuffle seed].
BuildOutcome build_multidoc_sample(const DocGroup& group, ChatTransport& transport,
                                   const BuilderConfig& cfg, std::size_t budget,
                                   AnswerStyle style, std::uint64_t seed);

/// Single-doc pipeline: a seeded-random blank-line paragraph is the QA
/// target; the whole document is the context, with no serial numbers.
BuildOutcome build_singledoc_sample(const Document& doc, ChatTransport& transport,
                                    const BuilderConfig& cfg, std::size_t budget,
                                    AnswerStyle style, std::uint64_t seed);

/// Same pipelines, split so one generated QA pair can be styled several ways.
BuildOutcome build_multidoc_from_qa(const QAPair& qa, const DocGroup& group,
                                    const BuilderConfig& cfg, std::size_t budget,
                                    AnswerStyle style, std::uint64_t seed);
BuildOutcome build_singledoc_from_qa(const QAPair& qa, const Document& doc,
                                     const BuilderConfig& cfg, std::size_t budget,
                                     AnswerStyle style, std::uint64_t seed);

struct ShortFormSample {
  std::string question;
  std::string answer;
  Lang lang = Lang::en;
};

struct Dataset {
  std::vector<TrainingSample> samples;
  nlohmann::json meta;

  bool operator==(const Dataset&) const = default;
};

/// Samples without replacement to hit the mix's (kind x lang) cell counts,
/// then shuffles the final order. Throws naming the first insufficient cell.
Dataset compose_dataset(const std::vector<TrainingSample>& long_pool,
                        const std::vector<ShortFormSample>& short_pool,
                        const DatasetMix& mix, std::uint64_t seed);

/// One {"meta":...} header line, then one sample per line. Byte-deterministic.
void emit_jsonl(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset_jsonl(const std::filesystem::path& path);

/// Short-form pool records: {"question"|"instruction", "answer"|"output",
/// "lang"?}. Records without a lang field get default_lang.
std::vector<ShortFormSample> load_short_form_jsonl(const std::filesystem::path& path,
                                                   Lang default_lang);

}  // namespace longctx
