#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "styloshift/common.hpp"

namespace styloshift {

inline constexpr const char* kManifestFormat = "styloshift-manifest/1";

struct SplitPolicy {
  std::size_t prompt_words = 500;
};

class TooShort : public Error {
public:
  using Error::Error;
};

class MissingFile : public Error {
public:
  using Error::Error;
};

class DuplicateContinuation : public Error {
public:
  using Error::Error;
};

struct SplitResult {
  std::string part1;      // exactly policy.prompt_words words
  std::string separator;  // whitespace between the parts, preserved verbatim
  std::string part2;      // remaining suffix
};

// Splits a document after the N-th whitespace-delimited word.
// part1 + separator + part2 reproduces the input byte for byte.
inline SplitResult split_document(std::string_view full_text,
                                  const SplitPolicy& policy) {
  std::size_t words = 0;
  std::size_t part1_end = 0;  // one past the last char of word N
  bool in_word = false;
  std::size_t i = 0;
  for (; i < full_text.size(); ++i) {
    if (is_space(full_text[i])) {
      if (in_word) {
        in_word = false;
        if (words == policy.prompt_words) {
          part1_end = i;
          break;
        }
      }
    } else if (!in_word) {
      in_word = true;
      ++words;
    }
  }
  if (i == full_text.size()) {
    // Ran off the end: either the N-th word ends the text (no part2) or
    // there were fewer than N words.
    throw TooShort("document has " + std::to_string(words) +
                   " words, need more than " +
                   std::to_string(policy.prompt_words));
  }
  std::size_t part2_start = part1_end;
  while (part2_start < full_text.size() && is_space(full_text[part2_start]))
    ++part2_start;
  if (part2_start == full_text.size())
    throw TooShort("document has no content after the prompt words");
  SplitResult r;
  r.part1 = std::string(full_text.substr(0, part1_end));
  r.separator = std::string(full_text.substr(part1_end, part2_start - part1_end));
  r.part2 = std::string(full_text.substr(part2_start));
  return r;
}

struct DocumentPair {
  std::string doc_id;
  std::string genre;
  std::string language;  // IETF tag, e.g. "en", "cs"
  std::string part1_path;
  std::string part2_path;
  std::size_t word_count_part1 = 0;
};

enum class EndpointKind { chat, completion };

enum class SystemPromptId { none, minimal, minimal_czech, long_assistant };

inline std::string to_string(EndpointKind k) {
  return k == EndpointKind::chat ? "chat" : "completion";
}

inline EndpointKind endpoint_kind_from_string(const std::string& s) {
  if (s == "chat") return EndpointKind::chat;
  if (s == "completion") return EndpointKind::completion;
  throw ParseError("unknown endpoint_kind: " + s);
}

inline std::string to_string(SystemPromptId p) {
  switch (p) {
    case SystemPromptId::none: return "none";
    case SystemPromptId::minimal: return "minimal";
    case SystemPromptId::minimal_czech: return "minimal_czech";
    case SystemPromptId::long_assistant: return "long_assistant";
  }
  return "none";
}

inline SystemPromptId system_prompt_from_string(const std::string& s) {
  if (s == "none") return SystemPromptId::none;
  if (s == "minimal") return SystemPromptId::minimal;
  if (s == "minimal_czech") return SystemPromptId::minimal_czech;
  if (s == "long_assistant") return SystemPromptId::long_assistant;
  throw ParseError("unknown system_prompt_id: " + s);
}

struct ModelConfig {
  std::string config_id;
  EndpointKind endpoint_kind = EndpointKind::chat;
  std::string model_name;
  double temperature = 1.0;
  SystemPromptId system_prompt_id = SystemPromptId::minimal;
  std::optional<std::string> appended_instruction;
  // long_assistant system prompt text is user-supplied, loaded from here.
  std::optional<std::string> system_prompt_file;

  void validate() const {
    if (config_id.empty()) throw ParseError("model config without config_id");
    if (temperature < 0.0 || temperature > 2.0)
      throw ParseError(config_id + ": temperature out of [0,2]");
    if (endpoint_kind == EndpointKind::completion &&
        system_prompt_id != SystemPromptId::none)
      throw ParseError(config_id +
                       ": completion endpoints take no system prompt");
  }
};

struct Continuation {
  std::string doc_id;
  std::string config_id;
  std::string text;
  bool degenerate = false;
  std::string degenerate_reason;
  std::string prompt_hash;  // hex64 of the exact prompt text
  std::string model_name;
  double temperature = 0.0;
  std::string timestamp;  // ISO-8601, informational only
  int retries = 0;
};

struct CorpusManifest {
  std::string corpus_id;
  std::string language;
  std::vector<std::string> genre_taxonomy;
  std::vector<DocumentPair> entries;

  const DocumentPair* find(const std::string& doc_id) const {
    for (const auto& e : entries)
      if (e.doc_id == doc_id) return &e;
    return nullptr;
  }
};

inline nlohmann::json manifest_to_json(const CorpusManifest& m) {
  nlohmann::json j;
  j["format"] = kManifestFormat;
  j["corpus_id"] = m.corpus_id;
  j["language"] = m.language;
  j["genre_taxonomy"] = m.genre_taxonomy;
  auto& entries = j["entries"] = nlohmann::json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"doc_id", e.doc_id},
                       {"genre", e.genre},
                       {"language", e.language},
                       {"part1_path", e.part1_path},
                       {"part2_path", e.part2_path},
                       {"word_count_part1", e.word_count_part1}});
  }
  return j;
}

inline void save_manifest(const CorpusManifest& m, const std::string& path) {
  write_file(path, manifest_to_json(m).dump(2) + "\n");
}

// Parses and fully validates a manifest: format tag, unique doc ids,
// referenced chunk files present on disk (relative to the manifest).
inline CorpusManifest load_manifest(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.contains("format") || j["format"] != kManifestFormat)
    throw ParseError(path + ": missing or unsupported format tag");
  CorpusManifest m;
  m.corpus_id = j.value("corpus_id", "");
  m.language = j.value("language", "");
  if (j.contains("genre_taxonomy"))
    m.genre_taxonomy = j["genre_taxonomy"].get<std::vector<std::string>>();
  std::set<std::string> seen;
  std::filesystem::path base = std::filesystem::path(path).parent_path();
  std::vector<std::string> missing;
  for (const auto& e : j.value("entries", nlohmann::json::array())) {
    DocumentPair p;
    p.doc_id = e.value("doc_id", "");
    if (p.doc_id.empty()) throw ParseError(path + ": entry without doc_id");
    if (!seen.insert(p.doc_id).second)
      throw ParseError(path + ": duplicate doc_id '" + p.doc_id + "'");
    p.genre = e.value("genre", "");
    p.language = e.value("language", m.language);
    p.part1_path = e.value("part1_path", "");
    p.part2_path = e.value("part2_path", "");
    p.word_count_part1 = e.value("word_count_part1", std::size_t{0});
    for (const std::string* rel : {&p.part1_path, &p.part2_path}) {
      if (rel->empty() || !std::filesystem::exists(base / *rel))
        missing.push_back(p.doc_id + ": " + *rel);
    }
    m.entries.push_back(std::move(p));
  }
  if (!missing.empty()) {
    std::string msg = path + ": missing chunk files:";
    for (const auto& s : missing) msg += "\n  " + s;
    throw MissingFile(msg);
  }
  return m;
}

// Corpus on disk: manifest + one text file per chunk; continuations live
// under continuations/<config_id>/<doc_id>.txt with a JSON sidecar.
class CorpusStore {
public:
  explicit CorpusStore(std::string manifest_path)
      : manifest_path_(std::move(manifest_path)),
        base_(std::filesystem::path(manifest_path_).parent_path()),
        manifest_(load_manifest(manifest_path_)) {}

  const CorpusManifest& manifest() const { return manifest_; }
  const std::filesystem::path& base() const { return base_; }

  std::string read_part1(const DocumentPair& p) const {
    return read_file((base_ / p.part1_path).string());
  }
  std::string read_part2(const DocumentPair& p) const {
    return read_file((base_ / p.part2_path).string());
  }

  std::filesystem::path continuation_path(const std::string& config_id,
                                          const std::string& doc_id) const {
    return base_ / "continuations" / config_id / (doc_id + ".txt");
  }
  std::filesystem::path continuation_meta_path(
      const std::string& config_id, const std::string& doc_id) const {
    return base_ / "continuations" / config_id / (doc_id + ".meta.json");
  }

  bool has_continuation(const std::string& config_id,
                        const std::string& doc_id) const {
    return std::filesystem::exists(continuation_meta_path(config_id, doc_id));
  }

  // Single-writer contract: callers serialize attachment. Writes go to a
  // temp file first so a continuation is either fully stored or absent.
  void attach_continuation(const DocumentPair& pair, const Continuation& cont,
                           bool force = false) {
    if (cont.doc_id != pair.doc_id)
      throw Error("continuation doc_id '" + cont.doc_id +
                  "' does not match pair '" + pair.doc_id + "'");
    if (!force && has_continuation(cont.config_id, cont.doc_id))
      throw DuplicateContinuation("continuation already stored for (" +
                                  cont.doc_id + ", " + cont.config_id + ")");
    auto dir = base_ / "continuations" / cont.config_id;
    std::filesystem::create_directories(dir);
    nlohmann::json meta = {{"doc_id", cont.doc_id},
                           {"config_id", cont.config_id},
                           {"degenerate", cont.degenerate},
                           {"degenerate_reason", cont.degenerate_reason},
                           {"prompt_hash", cont.prompt_hash},
                           {"model_name", cont.model_name},
                           {"temperature", cont.temperature},
                           {"timestamp", cont.timestamp},
                           {"retries", cont.retries}};
    auto txt = continuation_path(cont.config_id, cont.doc_id);
    auto metap = continuation_meta_path(cont.config_id, cont.doc_id);
    auto tmp_txt = txt.string() + ".tmp";
    auto tmp_meta = metap.string() + ".tmp";
    write_file(tmp_txt, cont.text);
    write_file(tmp_meta, meta.dump(2) + "\n");
    std::filesystem::rename(tmp_txt, txt);
    std::filesystem::rename(tmp_meta, metap);  // meta last: presence marker
  }

  Continuation load_continuation(const std::string& config_id,
                                 const std::string& doc_id) const {
    auto metap = continuation_meta_path(config_id, doc_id);
    if (!std::filesystem::exists(metap))
      throw MissingFile("no continuation for (" + doc_id + ", " + config_id +
                        ")");
    nlohmann::json meta = nlohmann::json::parse(read_file(metap.string()));
    Continuation c;
    c.doc_id = meta.value("doc_id", doc_id);
    c.config_id = meta.value("config_id", config_id);
    c.degenerate = meta.value("degenerate", false);
    c.degenerate_reason = meta.value("degenerate_reason", "");
    c.prompt_hash = meta.value("prompt_hash", "");
    c.model_name = meta.value("model_name", "");
    c.temperature = meta.value("temperature", 0.0);
    c.timestamp = meta.value("timestamp", "");
    c.retries = meta.value("retries", 0);
    c.text = read_file(continuation_path(config_id, doc_id).string());
    return c;
  }

  // Config ids that have at least one stored continuation.
  std::vector<std::string> continuation_configs() const {
    std::vector<std::string> out;
    auto dir = base_ / "continuations";
    if (!std::filesystem::exists(dir)) return out;
    for (const auto& e : std::filesystem::directory_iterator(dir))
      if (e.is_directory()) out.push_back(e.path().filename().string());
    std::sort(out.begin(), out.end());
    return out;
  }

private:
  std::string manifest_path_;
  std::filesystem::path base_;
  CorpusManifest manifest_;
};

}  // namespace styloshift
