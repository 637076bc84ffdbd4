#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "styloshift/common.hpp"
#include "styloshift/tagger.hpp"

namespace styloshift {

inline constexpr const char* kFeatureRegistryFormat = "styloshift-features/1";

class EmptyStream : public Error {
public:
  using Error::Error;
};

class DuplicateFeatureId : public Error {
public:
  using Error::Error;
};

class ColumnMismatch : public Error {
public:
  using Error::Error;
};

enum class FeatureUnit { per_1000_tokens, raw_ratio, mean_value };

inline FeatureUnit unit_from_string(const std::string& s) {
  if (s == "per_1000_tokens") return FeatureUnit::per_1000_tokens;
  if (s == "raw_ratio") return FeatureUnit::raw_ratio;
  if (s == "mean_value") return FeatureUnit::mean_value;
  throw ParseError("unknown feature unit: " + s);
}

inline std::string to_string(FeatureUnit u) {
  switch (u) {
    case FeatureUnit::per_1000_tokens: return "per_1000_tokens";
    case FeatureUnit::raw_ratio: return "raw_ratio";
    case FeatureUnit::mean_value: return "mean_value";
  }
  return "per_1000_tokens";
}

// One element of a token-window pattern. Empty constraint lists match
// anything; tag entries may end in '*' for prefix matching.
struct PatternElement {
  std::vector<std::string> tags;
  std::vector<std::string> surfaces;  // compared against folded form
  std::vector<std::string> not_tags;
  std::vector<std::string> not_surfaces;
  std::vector<std::string> suffixes;      // folded form must end in one
  std::vector<std::string> not_suffixes;  // ... and in none of these
  bool optional = false;
  bool negative = false;        // lookahead: fail if this matches here
  bool sentence_start = false;  // token must open a sentence

  bool matches(const TaggedToken& tok) const {
    auto tag_match = [&](const std::string& pat) {
      if (!pat.empty() && pat.back() == '*')
        return tok.tag.compare(0, pat.size() - 1, pat, 0, pat.size() - 1) ==
               0;
      return tok.tag == pat;
    };
    if (!tags.empty()) {
      bool any = false;
      for (const auto& t : tags)
        if (tag_match(t)) { any = true; break; }
      if (!any) return false;
    }
    if (!surfaces.empty()) {
      bool any = false;
      for (const auto& s : surfaces)
        if (tok.lower == s) { any = true; break; }
      if (!any) return false;
    }
    if (!suffixes.empty()) {
      bool any = false;
      for (const auto& s : suffixes)
        if (ends_with(tok.lower, s)) { any = true; break; }
      if (!any) return false;
    }
    for (const auto& t : not_tags)
      if (tag_match(t)) return false;
    for (const auto& s : not_surfaces)
      if (tok.lower == s) return false;
    for (const auto& s : not_suffixes)
      if (ends_with(tok.lower, s)) return false;
    return true;
  }

private:
  static bool ends_with(const std::string& word, const std::string& suf) {
    return word.size() >= suf.size() &&
           word.compare(word.size() - suf.size(), suf.size(), suf) == 0;
  }
};

enum class RuleKind { pattern, mean_word_length, mattr, ttr_first_n };

struct FeatureRule {
  RuleKind kind = RuleKind::pattern;
  // kind == pattern: alternatives, summed (each match site counted once)
  std::vector<std::vector<PatternElement>> patterns;
  bool within_sentence = true;
  std::size_t window = 100;  // mattr window / ttr_first_n n
};

struct FeatureDef {
  std::string feature_id;
  std::string name;
  FeatureUnit unit = FeatureUnit::per_1000_tokens;
  FeatureRule rule;
};

struct FeatureVector {
  std::map<std::string, double> values;
  std::size_t token_count = 0;
};

using FeatureRegistry = std::vector<FeatureDef>;

namespace detail {

inline bool is_word_token(const TaggedToken& t) {
  return !t.tag.empty() &&
         std::isalpha(static_cast<unsigned char>(t.tag[0]));
}

// Sentence index of each token, for the within_sentence constraint.
inline std::vector<std::size_t> sentence_of(const TokenStream& ts) {
  std::vector<std::size_t> out(ts.tokens.size(), 0);
  std::size_t sent = 0, b = 0;
  for (std::size_t i = 0; i < ts.tokens.size(); ++i) {
    while (b < ts.sentence_boundaries.size() &&
           i >= ts.sentence_boundaries[b]) {
      ++sent;
      ++b;
    }
    out[i] = sent;
  }
  return out;
}

// Tries to match the pattern anchored at `start`. Optional elements are
// tried greedily (present first). Negative elements consume nothing and
// fail the match only when a token in range satisfies them.
inline bool match_at(const TokenStream& ts,
                     const std::vector<std::size_t>& sent,
                     const std::vector<PatternElement>& pat,
                     std::size_t pi, std::size_t pos, bool within_sentence,
                     std::size_t start) {
  if (pi == pat.size()) return true;
  const PatternElement& el = pat[pi];
  bool in_range = pos < ts.tokens.size() &&
                  (!within_sentence || sent[pos] == sent[start]);
  if (el.negative) {
    if (in_range && el.matches(ts.tokens[pos])) return false;
    return match_at(ts, sent, pat, pi + 1, pos, within_sentence, start);
  }
  bool can_here = in_range && el.matches(ts.tokens[pos]) &&
                  (!el.sentence_start || pos == 0 ||
                   sent[pos] != sent[pos - 1]);
  if (can_here &&
      match_at(ts, sent, pat, pi + 1, pos + 1, within_sentence, start))
    return true;
  if (el.optional)
    return match_at(ts, sent, pat, pi + 1, pos, within_sentence, start);
  return false;
}

inline std::size_t count_pattern(const TokenStream& ts,
                                 const FeatureRule& rule) {
  auto sent = sentence_of(ts);
  std::size_t count = 0;
  for (std::size_t i = 0; i < ts.tokens.size(); ++i)
    for (const auto& pat : rule.patterns)
      if (match_at(ts, sent, pat, 0, i, rule.within_sentence, i)) {
        ++count;
        break;  // one count per anchor position
      }
  return count;
}

inline double mean_word_length(const TokenStream& ts) {
  std::size_t chars = 0, words = 0;
  for (const auto& t : ts.tokens) {
    if (!is_word_token(t)) continue;
    // count code points, not bytes
    std::size_t cp = 0;
    for (unsigned char c : t.surface)
      if ((c & 0xC0) != 0x80) ++cp;
    chars += cp;
    ++words;
  }
  return words == 0 ? 0.0 : static_cast<double>(chars) / words;
}

// Moving-average type/token ratio over word tokens.
inline double mattr(const TokenStream& ts, std::size_t window) {
  std::vector<const std::string*> words;
  for (const auto& t : ts.tokens)
    if (is_word_token(t)) words.push_back(&t.lower);
  if (words.empty()) return 0.0;
  if (words.size() <= window) {
    std::set<std::string> types;
    for (auto* w : words) types.insert(*w);
    return static_cast<double>(types.size()) / words.size();
  }
  double sum = 0.0;
  std::size_t n_windows = words.size() - window + 1;
  std::map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i < window; ++i) ++counts[*words[i]];
  sum += static_cast<double>(counts.size()) / window;
  for (std::size_t i = window; i < words.size(); ++i) {
    ++counts[*words[i]];
    auto it = counts.find(*words[i - window]);
    if (--it->second == 0) counts.erase(it);
    sum += static_cast<double>(counts.size()) / window;
  }
  return sum / static_cast<double>(n_windows);
}

inline double ttr_first_n(const TokenStream& ts, std::size_t n) {
  std::set<std::string> types;
  std::size_t words = 0;
  for (const auto& t : ts.tokens) {
    if (!is_word_token(t)) continue;
    types.insert(t.lower);
    if (++words == n) break;
  }
  return words == 0 ? 0.0 : static_cast<double>(types.size()) / words;
}

}  // namespace detail

inline constexpr std::size_t kLowConfidenceTokens = 100;

// Applies every registry rule to the stream. Counter features are
// normalized to occurrences per 1000 tokens; ratio and mean features are
// reported as computed.
inline FeatureVector extract_features(const TokenStream& ts,
                                      const FeatureRegistry& registry) {
  if (ts.tokens.empty()) throw EmptyStream("cannot extract from empty stream");
  FeatureVector fv;
  fv.token_count = ts.tokens.size();
  for (const auto& def : registry) {
    double value = 0.0;
    switch (def.rule.kind) {
      case RuleKind::pattern: {
        std::size_t c = detail::count_pattern(ts, def.rule);
        value = def.unit == FeatureUnit::per_1000_tokens
                    ? static_cast<double>(c) * 1000.0 / fv.token_count
                    : static_cast<double>(c);
        break;
      }
      case RuleKind::mean_word_length:
        value = detail::mean_word_length(ts);
        break;
      case RuleKind::mattr:
        value = detail::mattr(ts, def.rule.window);
        break;
      case RuleKind::ttr_first_n:
        value = detail::ttr_first_n(ts, def.rule.window);
        break;
    }
    fv.values[def.feature_id] = value;
  }
  return fv;
}

inline PatternElement parse_pattern_element(const nlohmann::json& j) {
  PatternElement el;
  if (j.contains("tag")) el.tags = j["tag"].get<std::vector<std::string>>();
  if (j.contains("surface"))
    el.surfaces = j["surface"].get<std::vector<std::string>>();
  if (j.contains("not_tag"))
    el.not_tags = j["not_tag"].get<std::vector<std::string>>();
  if (j.contains("not_surface"))
    el.not_surfaces = j["not_surface"].get<std::vector<std::string>>();
  if (j.contains("suffix"))
    el.suffixes = j["suffix"].get<std::vector<std::string>>();
  if (j.contains("not_suffix"))
    el.not_suffixes = j["not_suffix"].get<std::vector<std::string>>();
  el.optional = j.value("optional", false);
  el.negative = j.value("negative", false);
  el.sentence_start = j.value("sentence_start", false);
  return el;
}

inline FeatureRegistry load_registry(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.contains("format") || j["format"] != kFeatureRegistryFormat)
    throw ParseError(path + ": missing or unsupported format tag");
  FeatureRegistry reg;
  std::set<std::string> ids;
  for (const auto& f : j.value("features", nlohmann::json::array())) {
    FeatureDef def;
    def.feature_id = f.value("id", "");
    if (def.feature_id.empty())
      throw ParseError(path + ": feature without id");
    if (!ids.insert(def.feature_id).second)
      throw DuplicateFeatureId(path + ": duplicate feature id '" +
                               def.feature_id + "'");
    def.name = f.value("name", def.feature_id);
    def.unit = unit_from_string(f.value("unit", "per_1000_tokens"));
    const auto& r = f.at("rule");
    std::string kind = r.value("kind", "pattern");
    if (kind == "pattern") {
      def.rule.kind = RuleKind::pattern;
      nlohmann::json pats;
      if (r.contains("patterns")) pats = r["patterns"];
      else pats = nlohmann::json::array({r.at("pattern")});
      for (const auto& p : pats) {
        std::vector<PatternElement> pat;
        for (const auto& el : p) pat.push_back(parse_pattern_element(el));
        if (pat.empty())
          throw ParseError(path + ": feature '" + def.feature_id +
                           "' has empty pattern");
        if (pat.size() > 4)
          throw ParseError(path + ": feature '" + def.feature_id +
                           "' pattern longer than 4 tokens");
        def.rule.patterns.push_back(std::move(pat));
      }
      if (def.rule.patterns.empty())
        throw ParseError(path + ": feature '" + def.feature_id +
                         "' has no patterns");
      def.rule.within_sentence = r.value("within_sentence", true);
    } else if (kind == "mean_word_length") {
      def.rule.kind = RuleKind::mean_word_length;
    } else if (kind == "mattr") {
      def.rule.kind = RuleKind::mattr;
      def.rule.window = r.value("window", std::size_t{100});
    } else if (kind == "ttr_first_n") {
      def.rule.kind = RuleKind::ttr_first_n;
      def.rule.window = r.value("n", std::size_t{400});
    } else {
      throw ParseError(path + ": unknown rule kind '" + kind + "'");
    }
    reg.push_back(std::move(def));
  }
  return reg;
}

// Reads an externally computed feature matrix (tab- or comma-separated,
// header row, first column = chunk id). `required` lists the feature ids
// the downstream model needs; extra columns are ignored with a warning.
inline std::map<std::string, FeatureVector> ingest_feature_matrix(
    const std::string& path, const std::vector<std::string>& required,
    std::vector<std::string>* warnings = nullptr) {
  auto lines = split_lines(read_file(path));
  if (lines.empty()) throw ParseError(path + ": empty feature matrix");
  char delim = lines[0].find('\t') != std::string::npos ? '\t' : ',';
  auto split_row = [&](const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      std::size_t p = line.find(delim, start);
      if (p == std::string::npos) {
        cells.push_back(line.substr(start));
        break;
      }
      cells.push_back(line.substr(start, p - start));
      start = p + 1;
    }
    return cells;
  };
  auto header = split_row(lines[0]);
  if (header.size() < 2)
    throw ParseError(path + ": header must name an id column and features");
  std::map<std::string, std::size_t> col_of;
  for (std::size_t c = 1; c < header.size(); ++c) col_of[header[c]] = c;
  std::vector<std::string> missing;
  for (const auto& f : required)
    if (!col_of.count(f)) missing.push_back(f);
  if (!missing.empty()) {
    std::string msg = path + ": feature matrix missing required columns:";
    for (const auto& m : missing) msg += " " + m;
    throw ColumnMismatch(msg);
  }
  if (warnings) {
    std::set<std::string> req(required.begin(), required.end());
    for (std::size_t c = 1; c < header.size(); ++c)
      if (!req.count(header[c]) && header[c] != "token_count")
        warnings->push_back("ignoring unknown column '" + header[c] + "'");
  }
  std::map<std::string, FeatureVector> out;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (lines[r].empty()) continue;
    auto cells = split_row(lines[r]);
    if (cells.size() != header.size())
      throw ParseError(path + ":" + std::to_string(r + 1) +
                       ": expected " + std::to_string(header.size()) +
                       " columns, got " + std::to_string(cells.size()));
    FeatureVector fv;
    for (const auto& f : required) {
      try {
        fv.values[f] = std::stod(cells[col_of[f]]);
      } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(r + 1) +
                         ": bad numeric value in column '" + f + "'");
      }
    }
    auto tc = col_of.find("token_count");
    fv.token_count =
        tc != col_of.end()
            ? static_cast<std::size_t>(std::stoull(cells[tc->second]))
            : 1;
    out[cells[0]] = std::move(fv);
  }
  return out;
}

}  // namespace styloshift
