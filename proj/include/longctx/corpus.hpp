#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "longctx/util.hpp"

namespace longctx {

enum class Lang { en, zh };

std::string_view to_string(Lang lang);
std::optional<Lang> lang_from_string(std::string_view s);

/// One reference text. char_len is the unicode scalar count of text.
struct Document {
  std::string id;
  std::string text;
  Lang lang = Lang::en;
  std::string source;
  std::size_t char_len = 0;

  bool operator==(const Document&) const = default;
};

Document make_document(std::string id, std::string text, Lang lang,
                       std::string source = {});

/// A generation group: one gold document plus its distractor pool.
struct DocGroup {
  int group_id = 0;
  Document gold;
  std::vector<Document> distractors;
};

enum class RejectReason { empty, too_short };
std::string_view to_string(RejectReason r);

struct CleanResult {
  std::optional<std::string> text;
  RejectReason reject = RejectReason::empty;
  bool ok() const { return text.has_value(); }
};

inline constexpr std::size_t kDefaultMinDocChars = 200;

/// Collapses whitespace runs and trims; rejects empty results and texts
/// shorter than min_chars codepoints. Idempotent.
CleanResult clean_document(std::string_view raw,
                           std::size_t min_chars = kDefaultMinDocChars);

/// Immutable, id-indexed document collection. Safe to share across threads
/// once built.
class DocumentStore {
 public:
  DocumentStore() = default;
  /// Throws ConfigError on duplicate ids.
  explicit DocumentStore(std::vector<Document> docs, std::size_t skipped = 0,
                         std::size_t malformed = 0);

  const std::vector<Document>& docs() const { return docs_; }
  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }
  const Document* find(std::string_view id) const;

  /// Records rejected by cleaning.
  std::size_t skipped() const { return skipped_; }
  /// JSONL lines that failed to parse.
  std::size_t malformed() const { return malformed_; }

 private:
  std::vector<Document> docs_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::size_t skipped_ = 0;
  std::size_t malformed_ = 0;
};

struct IngestOptions {
  std::size_t min_chars = kDefaultMinDocChars;
  bool parallel = true;
};

/// Reads JSONL (.json/.jsonl: {"id"?, "text", "lang"?, "source"?}) or plain
/// text (one document per file). Ids default to "f<file>:<record>" where
/// <file> is the index of the first occurrence of the path, so ingesting the
/// same file twice collides and raises the duplicate-id error. Files may be
/// read in parallel; the store is merged in (path, record) order either way.
DocumentStore ingest_documents(const std::vector<std::filesystem::path>& paths,
                               Lang lang, const IngestOptions& opts = {});

/// Seeded shuffle, then chunks of group_size; first document of each chunk is
/// gold, the rest distractors. Leftovers are dropped.
std::vector<DocGroup> partition_groups(const DocumentStore& store,
                                       std::size_t group_size,
                                       std::uint64_t seed);

/// Store file: one {"meta":...} header line, then one document per line.
void write_store_jsonl(const DocumentStore& store,
                       const std::filesystem::path& path,
                       const nlohmann::json& extra_meta);

}  // namespace longctx
