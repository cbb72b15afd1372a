#pragma once

// Shared helpers for the test suites: synthetic corpora, scripted transports,
// and a scratch directory per test binary.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "longctx/corpus.hpp"
#include "longctx/genclient.hpp"
#include "longctx/util.hpp"

namespace testsupport {

using namespace longctx;

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("longctx_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& p, std::string_view content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

// Apostrophe-free vocabulary so quoted spans always parse back out.
inline std::string synth_sentence_en(SeededRng& rng, std::size_t words) {
  static const char* kVocab[] = {"signal",  "corpus",  "window", "vector",
                                 "context", "passage", "filter", "sample",
                                 "record",  "index",   "margin", "branch"};
  std::string s;
  for (std::size_t w = 0; w < words; ++w) {
    if (w) s += " ";
    s += kVocab[rng.bounded(12)];
    s += std::to_string(rng.bounded(100));
  }
  s += ".";
  return s;
}

inline std::string synth_doc_en(std::uint64_t seed, std::size_t n_sentences,
                                std::size_t words_per_sentence = 8,
                                std::size_t sentences_per_paragraph = 0) {
  SeededRng rng(seed);
  std::string doc;
  for (std::size_t i = 0; i < n_sentences; ++i) {
    if (i) {
      bool break_para = sentences_per_paragraph > 0 && i % sentences_per_paragraph == 0;
      doc += break_para ? "\n\n" : " ";
    }
    doc += synth_sentence_en(rng, words_per_sentence);
  }
  return doc;
}

inline std::string synth_sentence_zh(SeededRng& rng, std::size_t chars) {
  static const char* kChars[] = {"\xE6\x96\x87", "\xE6\x9C\xAC", "\xE6\x95\xB0",
                                 "\xE6\x8D\xAE", "\xE6\xA8\xA1", "\xE5\x9E\x8B",
                                 "\xE8\xAF\xAD", "\xE8\xA8\x80", "\xE5\xAD\xA6",
                                 "\xE4\xB9\xA0", "\xE6\xA3\x80", "\xE7\xB4\xA2"};
  std::string s;
  for (std::size_t i = 0; i < chars; ++i) s += kChars[rng.bounded(12)];
  s += "\xE3\x80\x82";  // 。
  return s;
}

inline std::string synth_doc_zh(std::uint64_t seed, std::size_t n_sentences,
                                std::size_t chars_per_sentence = 24) {
  SeededRng rng(seed);
  std::string doc;
  for (std::size_t i = 0; i < n_sentences; ++i)
    doc += synth_sentence_zh(rng, chars_per_sentence);
  return doc;
}

/// Writes a JSONL corpus of synthetic documents and returns the path.
inline std::filesystem::path write_corpus_jsonl(const std::filesystem::path& dir,
                                                const std::string& name, Lang lang,
                                                std::size_t n_docs,
                                                std::size_t n_sentences,
                                                std::uint64_t seed,
                                                std::size_t sentences_per_paragraph = 0) {
  std::string out;
  for (std::size_t i = 0; i < n_docs; ++i) {
    std::string text = lang == Lang::en
                           ? synth_doc_en(seed + i, n_sentences, 8, sentences_per_paragraph)
                           : synth_doc_zh(seed + i, n_sentences);
    nlohmann::json j{{"text", text}, {"lang", std::string(to_string(lang))}};
    out += j.dump() + "\n";
  }
  auto path = dir / name;
  write_file(path, out);
  return path;
}

/// Extracts the document body from a generation prompt.
inline std::string doc_from_prompt(const std::string& prompt) {
  auto start = prompt.find("Document:\n");
  auto end = prompt.find("\nPlease degisn");
  if (start == std::string::npos || end == std::string::npos) return {};
  start += 10;
  return prompt.substr(start, end - start);
}

/// A deterministic well-formed QA response for any generation prompt: the
/// span is the document's first sentence.
inline std::string well_formed_qa_response(const std::string& prompt) {
  std::string doc = doc_from_prompt(prompt);
  auto sentences = split_sentences(doc);
  std::string span = sentences.empty() ? doc : std::string(sentences.front());
  return "Question: What does the document describe?\nAnswer: According to the "
         "original text '" +
         span + "', the document describes " + span;
}

/// Transport that counts calls and replays a scripted list of responses
/// (the last entry repeats). Entries equal to "<fail>" throw TransportError.
class ScriptedTransport : public ChatTransport {
 public:
  explicit ScriptedTransport(std::vector<std::string> script)
      : script_(std::move(script)) {}

  std::string complete(const GenerationPolicy&,
                       const std::vector<ChatMessage>& messages) override {
    std::size_t i = calls_.fetch_add(1);
    const std::string& entry =
        script_[std::min(i, script_.size() - 1)];
    if (entry == "<fail>") throw TransportError(0, "scripted transport failure");
    if (entry == "<echo-qa>") return well_formed_qa_response(messages.back().content);
    return entry;
  }

  int calls() const { return static_cast<int>(calls_.load()); }

 private:
  std::vector<std::string> script_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace testsupport
