#include "longctx/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

namespace longctx {

using nlohmann::json;

std::string_view to_string(Lang lang) {
  return lang == Lang::en ? "en" : "zh";
}

std::optional<Lang> lang_from_string(std::string_view s) {
  if (s == "en") return Lang::en;
  if (s == "zh") return Lang::zh;
  return std::nullopt;
}

std::string_view to_string(RejectReason r) {
  return r == RejectReason::empty ? "empty" : "too_short";
}

Document make_document(std::string id, std::string text, Lang lang,
                       std::string source) {
  Document d;
  d.id = std::move(id);
  d.text = std::move(text);
  d.lang = lang;
  d.source = std::move(source);
  d.char_len = utf8_length(d.text);
  return d;
}

CleanResult clean_document(std::string_view raw, std::size_t min_chars) {
  CleanResult r;
  std::string cleaned = collapse_whitespace(raw);
  if (cleaned.empty()) {
    r.reject = RejectReason::empty;
    return r;
  }
  if (utf8_length(cleaned) < min_chars) {
    r.reject = RejectReason::too_short;
    return r;
  }
  r.text = std::move(cleaned);
  return r;
}

DocumentStore::DocumentStore(std::vector<Document> docs, std::size_t skipped,
                             std::size_t malformed)
    : docs_(std::move(docs)), skipped_(skipped), malformed_(malformed) {
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    auto [it, inserted] = index_.emplace(docs_[i].id, i);
    if (!inserted)
      throw ConfigError("duplicate ids in document store: " + docs_[i].id);
  }
}

const Document* DocumentStore::find(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &docs_[it->second];
}

namespace {

struct FileResult {
  std::vector<Document> docs;
  std::size_t skipped = 0;
  std::size_t malformed = 0;
};

bool looks_like_jsonl(const std::filesystem::path& p) {
  auto ext = ascii_lower(p.extension().string());
  return ext == ".jsonl" || ext == ".json";
}

FileResult ingest_one_file(const std::filesystem::path& path, std::size_t file_idx,
                           Lang lang, const IngestOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read corpus file: " + path.string());

  FileResult out;
  std::string prefix = "f" + std::to_string(file_idx) + ":";

  if (looks_like_jsonl(path)) {
    std::string line;
    std::size_t rec = 0;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      json j = json::parse(line, nullptr, false);
      // store files are valid corpus input; pass over their meta header
      if (j.is_object() && j.contains("meta") && !j.contains("text")) continue;
      std::size_t rec_idx = rec++;
      if (j.is_discarded() || !j.is_object() || !j.contains("text") ||
          !j["text"].is_string()) {
        ++out.malformed;
        continue;
      }
      Lang rec_lang = lang;
      if (j.contains("lang") && j["lang"].is_string()) {
        auto parsed = lang_from_string(j["lang"].get<std::string>());
        if (!parsed) {
          ++out.malformed;
          continue;
        }
        rec_lang = *parsed;
      }
      auto cleaned = clean_document(j["text"].get<std::string>(), opts.min_chars);
      if (!cleaned.ok()) {
        ++out.skipped;
        continue;
      }
      std::string id = prefix + std::to_string(rec_idx);
      if (j.contains("id") && j["id"].is_string()) id = j["id"].get<std::string>();
      std::string source;
      if (j.contains("source") && j["source"].is_string())
        source = j["source"].get<std::string>();
      out.docs.push_back(
          make_document(std::move(id), std::move(*cleaned.text), rec_lang, std::move(source)));
    }
  } else {
    std::ostringstream ss;
    ss << in.rdbuf();
    auto cleaned = clean_document(ss.str(), opts.min_chars);
    if (!cleaned.ok()) {
      ++out.skipped;
    } else {
      out.docs.push_back(make_document(prefix + "0", std::move(*cleaned.text), lang,
                                       path.filename().string()));
    }
  }
  return out;
}

}  // namespace

DocumentStore ingest_documents(const std::vector<std::filesystem::path>& paths,
                               Lang lang, const IngestOptions& opts) {
  // The same path always maps to the same file index, so reading a file twice
  // produces colliding ids and trips the duplicate-id check.
  std::vector<std::size_t> file_indices(paths.size());
  std::map<std::string, std::size_t> first_seen;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    std::string key = paths[i].lexically_normal().string();
    auto [it, inserted] = first_seen.emplace(key, i);
    file_indices[i] = it->second;
  }

  for (const auto& p : paths) {
    std::error_code ec;
    if (!std::filesystem::exists(p, ec) || ec)
      throw ConfigError("corpus file does not exist: " + p.string());
  }

  std::vector<FileResult> results(paths.size());
  auto work = [&](std::size_t i) {
    results[i] = ingest_one_file(paths[i], file_indices[i], lang, opts);
  };
  if (opts.parallel && paths.size() > 1) {
    unsigned hw = std::thread::hardware_concurrency();
    parallel_for_indexed(paths.size(), static_cast<int>(hw ? hw : 2), work);
  } else {
    for (std::size_t i = 0; i < paths.size(); ++i) work(i);
  }

  std::vector<Document> merged;
  std::size_t skipped = 0, malformed = 0;
  for (auto& r : results) {
    skipped += r.skipped;
    malformed += r.malformed;
    std::move(r.docs.begin(), r.docs.end(), std::back_inserter(merged));
  }
  return DocumentStore(std::move(merged), skipped, malformed);
}

std::vector<DocGroup> partition_groups(const DocumentStore& store,
                                       std::size_t group_size,
                                       std::uint64_t seed) {
  if (group_size < 2)
    throw ConfigError("partition_groups: group_size must be >= 2");
  if (store.size() < group_size)
    throw ConfigError("partition_groups: store has " + std::to_string(store.size()) +
                      " documents, need at least " + std::to_string(group_size));

  std::vector<Document> shuffled = store.docs();
  SeededRng rng(seed);
  rng.shuffle(shuffled);

  std::size_t n_groups = shuffled.size() / group_size;
  std::vector<DocGroup> groups;
  groups.reserve(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g) {
    DocGroup grp;
    grp.group_id = static_cast<int>(g);
    grp.gold = shuffled[g * group_size];
    grp.distractors.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(g * group_size + 1),
                           shuffled.begin() + static_cast<std::ptrdiff_t>((g + 1) * group_size));
    groups.push_back(std::move(grp));
  }
  return groups;
}

void write_store_jsonl(const DocumentStore& store,
                       const std::filesystem::path& path,
                       const json& extra_meta) {
  std::ostringstream out;
  json meta = extra_meta;
  meta["n_docs"] = store.size();
  meta["n_skipped"] = store.skipped();
  meta["n_malformed"] = store.malformed();
  meta["tool_version"] = kToolVersion;
  out << json{{"meta", meta}}.dump() << "\n";
  for (const auto& d : store.docs()) {
    out << json{{"id", d.id},
                {"text", d.text},
                {"lang", std::string(to_string(d.lang))},
                {"source", d.source},
                {"char_len", d.char_len}}
               .dump()
        << "\n";
  }
  write_text_file(path.string(), out.str());
}

}  // namespace longctx
