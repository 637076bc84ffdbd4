#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "styloshift/common.hpp"

namespace styloshift {

struct TaggedToken {
  std::string surface;
  std::string lower;  // case-folded surface
  std::string tag;    // Penn-style
  std::size_t index = 0;
};

struct TokenStream {
  std::vector<TaggedToken> tokens;
  // Strictly increasing; each entry is one past the last token of a
  // sentence; the final entry equals tokens.size().
  std::vector<std::size_t> sentence_boundaries;

  bool empty() const { return tokens.empty(); }
  std::size_t size() const { return tokens.size(); }
};

// Case folding: ASCII plus the Latin-1 / Latin Extended-A range (covers
// Czech diacritics). Operates on UTF-8.
inline std::string fold_case(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
      out.push_back(static_cast<char>(std::tolower(c)));
      ++i;
    } else if (c == 0xC3 && i + 1 < s.size()) {
      unsigned char d = static_cast<unsigned char>(s[i + 1]);
      // U+00C0..U+00DE -> +0x20, except U+00D7 (multiplication sign)
      if (d >= 0x80 && d <= 0x9E && d != 0x97) d += 0x20;
      out.push_back(static_cast<char>(c));
      out.push_back(static_cast<char>(d));
      i += 2;
    } else if (c == 0xC4 && i + 1 < s.size()) {
      unsigned char d = static_cast<unsigned char>(s[i + 1]);
      // U+0100..U+0137: uppercase even; U+0139..U+013D: uppercase odd.
      if (d >= 0x80 && d <= 0xB7 && (d % 2 == 0)) d += 1;
      else if (d >= 0xB9 && d <= 0xBD && (d % 2 == 1)) d += 1;
      out.push_back(static_cast<char>(c));
      out.push_back(static_cast<char>(d));
      i += 2;
    } else if (c == 0xC5 && i + 1 < s.size()) {
      unsigned char d = static_cast<unsigned char>(s[i + 1]);
      // U+0141..U+0147 uppercase odd; U+014A..U+0177 uppercase even;
      // U+0179..U+017D uppercase odd again.
      if (d >= 0x81 && d <= 0x87 && (d % 2 == 1)) d += 1;
      else if (d >= 0x8A && d <= 0xB7 && (d % 2 == 0)) d += 1;
      else if (d >= 0xB9 && d <= 0xBD && (d % 2 == 1)) d += 1;
      out.push_back(static_cast<char>(c));
      out.push_back(static_cast<char>(d));
      i += 2;
    } else {
      out.push_back(static_cast<char>(c));
      ++i;
    }
  }
  return out;
}

namespace detail {

inline const std::unordered_set<std::string>& abbreviations() {
  static const std::unordered_set<std::string> abbr = {
      "mr.",   "mrs.",  "ms.",   "dr.",  "prof.", "st.",  "jr.",  "sr.",
      "rev.",  "gen.",  "col.",  "sgt.", "capt.", "lt.",  "gov.", "sen.",
      "rep.",  "vs.",   "etc.",  "e.g.", "i.e.",  "cf.",  "no.",  "vol.",
      "fig.",  "approx.", "dept.", "inc.", "ltd.", "co.", "jan.", "feb.",
      "mar.",  "apr.",  "jun.",  "jul.", "aug.",  "sep.", "sept.", "oct.",
      "nov.",  "dec.",  "a.m.",  "p.m."};
  return abbr;
}

inline bool is_terminal_punct(const std::string& tok) {
  return tok == "." || tok == "!" || tok == "?" || tok == "..." ||
         tok == "?!" || tok == "!?";
}

inline bool starts_upper(const std::string& tok) {
  if (tok.empty()) return false;
  unsigned char c = static_cast<unsigned char>(tok[0]);
  return c >= 'A' && c <= 'Z';
}

inline bool is_quote_or_bracket(const std::string& tok) {
  return tok == "\"" || tok == "'" || tok == "``" || tok == "''" ||
         tok == "(" || tok == ")" || tok == "[" || tok == "]";
}

}  // namespace detail

struct RawTokens {
  std::vector<std::string> tokens;
  std::vector<std::size_t> sentence_boundaries;
};

// Whitespace + punctuation tokenizer with Penn-style contraction
// splitting ("can't" -> ca / n't, "I'm" -> I / 'm) and sentence
// segmentation at . ! ? followed by a capitalized token, with an
// abbreviation exception list.
inline RawTokens tokenize(std::string_view text) {
  RawTokens out;
  std::vector<std::string>& toks = out.tokens;

  auto emit_word = [&](std::string w) {
    if (w.empty()) return;
    std::string low = fold_case(w);
    // n't contractions
    if (w.size() > 3 && low.size() == w.size() &&
        low.compare(low.size() - 3, 3, "n't") == 0) {
      toks.push_back(w.substr(0, w.size() - 3));
      toks.push_back(w.substr(w.size() - 3));
      return;
    }
    // 'm 're 've 'll 'd 's clitics
    static const std::array<std::string, 6> clitics = {"'m", "'re", "'ve",
                                                       "'ll", "'d", "'s"};
    for (const auto& cl : clitics) {
      if (low.size() > cl.size() &&
          low.compare(low.size() - cl.size(), cl.size(), cl) == 0) {
        toks.push_back(w.substr(0, w.size() - cl.size()));
        toks.push_back(w.substr(w.size() - cl.size()));
        return;
      }
    }
    // trailing bare apostrophe (plural possessive)
    if (w.size() > 1 && w.back() == '\'') {
      toks.push_back(w.substr(0, w.size() - 1));
      toks.push_back("'");
      return;
    }
    toks.push_back(std::move(w));
  };

  auto is_word_char = [](unsigned char c) {
    return !is_space(static_cast<char>(c)) &&
           std::string_view(".,!?;:\"()[]{}").find(static_cast<char>(c)) ==
               std::string_view::npos;
  };

  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (is_space(static_cast<char>(c))) {
      ++i;
      continue;
    }
    if (c == '.') {
      // ellipsis
      if (i + 2 < n && text[i + 1] == '.' && text[i + 2] == '.') {
        toks.push_back("...");
        i += 3;
      } else {
        // keep abbreviation periods attached: handled below via merge
        toks.push_back(".");
        ++i;
      }
      continue;
    }
    if (std::string_view(",!?;:\"()[]{}").find(static_cast<char>(c)) !=
        std::string_view::npos) {
      toks.push_back(std::string(1, static_cast<char>(c)));
      ++i;
      continue;
    }
    // word run; allow internal apostrophes, hyphens and periods
    std::size_t start = i;
    while (i < n && is_word_char(static_cast<unsigned char>(text[i]))) ++i;
    std::string word(text.substr(start, i - start));
    // Re-attach trailing period for known abbreviations ("Dr." etc.) and
    // dotted acronyms so they do not trigger sentence breaks.
    if (i < n && text[i] == '.') {
      std::string cand = fold_case(word) + ".";
      bool dotted_acronym =
          word.find('.') != std::string::npos && word.size() <= 7;
      if (detail::abbreviations().count(cand) || dotted_acronym) {
        word.push_back('.');
        ++i;
      }
    }
    emit_word(std::move(word));
  }

  // Sentence boundaries: after terminal punctuation when the following
  // token (skipping quotes/brackets) starts with a capital, or at end.
  for (std::size_t t = 0; t < toks.size(); ++t) {
    if (!detail::is_terminal_punct(toks[t])) continue;
    std::size_t next = t + 1;
    while (next < toks.size() && detail::is_quote_or_bracket(toks[next]))
      ++next;
    if (next >= toks.size() || detail::starts_upper(toks[next])) {
      std::size_t brk = t + 1;
      // closing quote belongs to the sentence it ends
      while (brk < toks.size() &&
             (toks[brk] == "''" || toks[brk] == "\"" || toks[brk] == ")"))
        ++brk;
      if (out.sentence_boundaries.empty() ||
          out.sentence_boundaries.back() < brk)
        out.sentence_boundaries.push_back(brk);
    }
  }
  if (!toks.empty() && (out.sentence_boundaries.empty() ||
                        out.sentence_boundaries.back() != toks.size()))
    out.sentence_boundaries.push_back(toks.size());
  return out;
}

namespace detail {

struct Lexicon {
  std::unordered_map<std::string, std::string> tags;

  Lexicon() {
    auto add = [&](std::initializer_list<const char*> words,
                   const char* tag) {
      for (const char* w : words) tags.emplace(w, tag);
    };
    add({"the", "a", "an", "this", "these", "those", "each", "every", "no",
         "some", "any", "all", "both", "another", "either", "neither"},
        "DT");
    add({"that"}, "IN");  // contextual fixup may retag
    add({"i", "you", "he", "she", "it", "we", "they", "me", "him", "her",
         "us", "them", "myself", "yourself", "himself", "herself", "itself",
         "ourselves", "themselves", "one"},
        "PRP");
    add({"my", "your", "his", "its", "our", "their", "hers", "theirs",
         "mine", "yours", "ours"},
        "PRP$");
    add({"who", "whom", "whoever", "what"}, "WP");
    add({"whose"}, "WP$");
    add({"which"}, "WDT");
    add({"when", "where", "why", "how", "whenever", "wherever"}, "WRB");
    add({"in", "on", "at", "by", "with", "from", "of", "for", "about",
         "into", "through", "over", "under", "between", "against", "during",
         "without", "before", "after", "above", "below", "off", "near",
         "across", "behind", "beyond", "among", "within", "upon", "toward",
         "towards", "because", "although", "though", "if", "unless",
         "while", "whereas", "since", "until", "whether"},
        "IN");
    add({"and", "or", "but", "nor", "yet"}, "CC");
    add({"can", "could", "may", "might", "must", "shall", "should", "will",
         "would", "ought", "ca", "wo", "'ll", "'d"},
        "MD");
    add({"be"}, "VB");
    add({"am", "'m"}, "VBP");
    add({"is", "'s"}, "VBZ");
    add({"are", "'re"}, "VBP");
    add({"was"}, "VBD");
    add({"were"}, "VBD");
    add({"been"}, "VBN");
    add({"being"}, "VBG");
    add({"have", "'ve"}, "VBP");
    add({"has"}, "VBZ");
    add({"had"}, "VBD");
    add({"having"}, "VBG");
    add({"do"}, "VBP");
    add({"does"}, "VBZ");
    add({"did"}, "VBD");
    add({"done"}, "VBN");
    add({"doing"}, "VBG");
    add({"to"}, "TO");
    add({"there"}, "EX");
    add({"not", "n't", "never"}, "RB");
    add({"very", "really", "quite", "rather", "too", "so", "just", "also",
         "now", "then", "here", "again", "always", "often", "sometimes",
         "usually", "perhaps", "maybe", "still", "already", "soon", "even",
         "only", "almost", "nearly", "well", "away", "back", "today",
         "yesterday", "tomorrow", "anyway", "anyhow"},
        "RB");
    add({"more"}, "RBR");
    add({"most"}, "RBS");
    add({"good", "bad", "new", "old", "big", "small", "little", "long",
         "short", "high", "low", "young", "great", "own", "other", "same",
         "such", "last", "next", "few", "many", "much", "several", "sure",
         "able", "likely", "different", "important", "possible", "certain",
         "difficult", "easy", "happy", "sad", "strange", "dark", "quiet",
         "early", "late", "free", "full", "clear", "recent", "main"},
        "JJ");
    add({"better", "worse", "larger", "smaller", "older", "younger"}, "JJR");
    add({"best", "worst", "largest", "smallest", "oldest"}, "JJS");
    // common irregular pasts
    add({"went", "said", "saw", "came", "took", "got", "made", "knew",
         "thought", "found", "gave", "told", "left", "felt", "put", "kept",
         "began", "brought", "ran", "wrote", "stood", "heard", "let", "meant",
         "met", "paid", "read", "sat", "spoke", "lost", "held", "fell",
         "sent", "built", "drew", "broke", "spent", "grew", "became", "ate",
         "drank", "flew", "chose", "drove", "wore", "won", "rose", "sang",
         "threw", "caught", "taught", "bought", "fought", "sought", "slept",
         "woke", "lay", "led", "understood", "seemed", "looked", "walked",
         "turned", "asked"},
        "VBD");
    add({"go", "come", "take", "get", "make", "know", "think", "find",
         "give", "tell", "feel", "keep", "begin", "bring", "run", "write",
         "stand", "hear", "mean", "meet", "pay", "sit", "speak", "lose",
         "hold", "fall", "send", "build", "draw", "break", "spend", "grow",
         "become", "eat", "drink", "fly", "choose", "drive", "wear", "win",
         "rise", "sing", "throw", "catch", "teach", "buy", "fight", "seek",
         "sleep", "wake", "lie", "lead", "understand", "seem", "look",
         "walk", "turn", "ask", "want", "need", "like", "love", "hope",
         "believe", "say", "see", "use", "try", "call", "work", "live",
         "play", "move", "help", "talk", "start", "stop", "wait", "stay",
         "appear", "happen"},
        "VB_BASE");  // resolved to VB/VBP by context
    add({"gone", "taken", "given", "known", "seen", "written", "spoken",
         "broken", "chosen", "driven", "eaten", "fallen", "grown", "thrown",
         "worn", "risen", "sung", "begun", "drunk", "flown", "woken"},
        "VBN");
    add({"oh", "ah", "ugh", "wow", "hey", "yes", "yeah", "okay", "ok",
         "hmm", "huh", "alas"},
        "UH");
  }
};

inline const Lexicon& lexicon() {
  static const Lexicon lex;
  return lex;
}

inline bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c)) && c != '.' &&
        c != ',' && c != '-')
      return false;
  return true;
}

inline std::string punct_tag(const std::string& tok) {
  if (tok == "." || tok == "!" || tok == "?" || tok == "..." ||
      tok == "?!" || tok == "!?")
    return ".";
  if (tok == ",") return ",";
  if (tok == ";" || tok == ":") return ":";
  if (tok == "(" || tok == "[" || tok == "{") return "(";
  if (tok == ")" || tok == "]" || tok == "}") return ")";
  if (tok == "\"" || tok == "``" || tok == "''" || tok == "'") return "''";
  return "";
}

inline bool ends_with(const std::string& s, std::string_view suf) {
  return s.size() >= suf.size() &&
         s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

}  // namespace detail

// Deterministic rule/lexicon tagger. Pass 1 assigns lexicon or suffix
// tags, pass 2 resolves a few ambiguity classes by local context.
inline TokenStream builtin_tag(const RawTokens& raw) {
  using namespace detail;
  TokenStream ts;
  ts.sentence_boundaries = raw.sentence_boundaries;
  ts.tokens.reserve(raw.tokens.size());

  std::set<std::size_t> sent_starts;
  sent_starts.insert(0);
  for (std::size_t b : raw.sentence_boundaries) sent_starts.insert(b);

  for (std::size_t i = 0; i < raw.tokens.size(); ++i) {
    const std::string& surf = raw.tokens[i];
    std::string low = fold_case(surf);
    std::string tag = punct_tag(surf);
    if (tag.empty()) {
      auto it = lexicon().tags.find(low);
      if (it != lexicon().tags.end()) {
        tag = it->second;
      } else if (all_digits(low)) {
        tag = "CD";
      } else if (ends_with(low, "ing")) {
        tag = "VBG";
      } else if (ends_with(low, "ed")) {
        tag = "VBD";
      } else if (ends_with(low, "ly")) {
        tag = "RB";
      } else if (ends_with(low, "tion") || ends_with(low, "tions") ||
                 ends_with(low, "ment") || ends_with(low, "ments") ||
                 ends_with(low, "ness") || ends_with(low, "ity") ||
                 ends_with(low, "ism") || ends_with(low, "sion") ||
                 ends_with(low, "sions")) {
        tag = ends_with(low, "s") ? "NNS" : "NN";
      } else if (ends_with(low, "ous") || ends_with(low, "ful") ||
                 ends_with(low, "ive") || ends_with(low, "able") ||
                 ends_with(low, "ible") || ends_with(low, "al") ||
                 ends_with(low, "ic")) {
        tag = "JJ";
      } else if (detail::starts_upper(surf) && !sent_starts.count(i)) {
        tag = ends_with(low, "s") ? "NNPS" : "NNP";
      } else if (ends_with(low, "s") && !ends_with(low, "ss") &&
                 !ends_with(low, "us")) {
        tag = "NNS";
      } else {
        tag = "NN";
      }
    }
    ts.tokens.push_back({surf, std::move(low), std::move(tag), i});
  }

  // Contextual fixups.
  auto noun_like = [](const std::string& t) {
    return t == "NN" || t == "NNS" || t == "NNP" || t == "NNPS" ||
           t == "PRP";
  };
  for (std::size_t i = 0; i < ts.tokens.size(); ++i) {
    auto& tok = ts.tokens[i];
    // "'s" after a noun is possessive
    if (tok.lower == "'s" && i > 0 && noun_like(ts.tokens[i - 1].tag) &&
        ts.tokens[i - 1].tag != "PRP")
      tok.tag = "POS";
    // base verbs: VB after TO or a modal (adverbs may intervene),
    // VBP otherwise
    if (tok.tag == "VB_BASE") {
      std::size_t p = i;
      while (p > 0 && ts.tokens[p - 1].tag == "RB") --p;
      bool inf = p > 0 && (ts.tokens[p - 1].tag == "TO" ||
                           ts.tokens[p - 1].tag == "MD");
      tok.tag = inf ? "VB" : "VBP";
    }
    // "that" before a determiner-less noun phrase head acts as DT
    if (tok.lower == "that" && i + 1 < ts.tokens.size()) {
      const std::string& nt = ts.tokens[i + 1].tag;
      if (nt == "NN" || nt == "NNS") tok.tag = "DT";
    }
    // -ed token after have/has/had or be-form is a participle
    if (tok.tag == "VBD" && i > 0) {
      const std::string& pl = ts.tokens[i - 1].lower;
      if (pl == "have" || pl == "has" || pl == "had" || pl == "'ve" ||
          pl == "is" || pl == "are" || pl == "was" || pl == "were" ||
          pl == "be" || pl == "been" || pl == "being")
        tok.tag = "VBN";
    }
    // "there" only existential before be-forms
    if (tok.tag == "EX" && i + 1 < ts.tokens.size()) {
      const std::string& nl = ts.tokens[i + 1].lower;
      if (!(nl == "is" || nl == "are" || nl == "was" || nl == "were" ||
            nl == "'s" || nl == "be" || nl == "been" || nl == "seems" ||
            nl == "seem" || nl == "exist" || nl == "exists"))
        tok.tag = "RB";
    }
  }
  return ts;
}

inline TokenStream builtin_tag(std::string_view text) {
  return builtin_tag(tokenize(text));
}

// CoNLL-style reader: column 1 surface, column 2 tag, optional column 3
// lemma (ignored); blank line = sentence boundary.
inline TokenStream ingest_tagged(const std::string& path) {
  TokenStream ts;
  auto lines = split_lines(read_file(path));
  std::size_t lineno = 0;
  bool pending_tokens = false;
  for (const auto& line : lines) {
    ++lineno;
    if (line.empty()) {
      if (pending_tokens) {
        ts.sentence_boundaries.push_back(ts.tokens.size());
        pending_tokens = false;
      }
      continue;
    }
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab + 1 >= line.size())
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected at least two tab-separated columns");
    std::string surface = line.substr(0, tab);
    std::size_t tab2 = line.find('\t', tab + 1);
    std::string tag = tab2 == std::string::npos
                          ? line.substr(tab + 1)
                          : line.substr(tab + 1, tab2 - tab - 1);
    if (tag.empty())
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": empty tag column");
    TaggedToken t;
    t.surface = surface;
    t.lower = fold_case(surface);
    t.tag = std::move(tag);
    t.index = ts.tokens.size();
    ts.tokens.push_back(std::move(t));
    pending_tokens = true;
  }
  if (pending_tokens) ts.sentence_boundaries.push_back(ts.tokens.size());
  return ts;
}

inline std::string export_tagged(const TokenStream& ts) {
  std::string out;
  std::size_t next_boundary = 0;
  for (std::size_t i = 0; i < ts.tokens.size(); ++i) {
    out += ts.tokens[i].surface;
    out += '\t';
    out += ts.tokens[i].tag;
    out += '\n';
    if (next_boundary < ts.sentence_boundaries.size() &&
        ts.sentence_boundaries[next_boundary] == i + 1) {
      out += '\n';
      ++next_boundary;
    }
  }
  return out;
}

}  // namespace styloshift
