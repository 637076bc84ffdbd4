#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <map>

#include "styloshift/features.hpp"

using namespace styloshift;

namespace {

TokenStream stream_from(
    const std::vector<std::vector<std::pair<std::string, std::string>>>&
        sentences) {
  TokenStream ts;
  for (const auto& sent : sentences) {
    for (const auto& [surface, tag] : sent) {
      TaggedToken t;
      t.surface = surface;
      t.lower = fold_case(surface);
      t.tag = tag;
      t.index = ts.tokens.size();
      ts.tokens.push_back(std::move(t));
    }
    ts.sentence_boundaries.push_back(ts.tokens.size());
  }
  return ts;
}

FeatureRegistry gold_registry() {
  return load_registry(std::string(DATA_DIR) +
                       "/english_biber.features.json");
}

struct GoldRow {
  std::string kind;
  std::string expected;
};

std::map<std::string, GoldRow> load_gold_expected() {
  std::map<std::string, GoldRow> out;
  auto lines =
      split_lines(read_file(std::string(FIXTURES_DIR) + "/gold_expected.tsv"));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto t1 = lines[i].find('\t');
    auto t2 = lines[i].find('\t', t1 + 1);
    out[lines[i].substr(0, t1)] = {lines[i].substr(t1 + 1, t2 - t1 - 1),
                                   lines[i].substr(t2 + 1)};
  }
  return out;
}

}  // namespace

TEST_CASE("registry loads with exactly 67 features") {
  FeatureRegistry reg = gold_registry();
  REQUIRE(reg.size() == 67);
  std::set<std::string> ids;
  for (const auto& def : reg) ids.insert(def.feature_id);
  REQUIRE(ids.size() == 67);
}

TEST_CASE("gold fixture counts match the frozen oracle") {
  FeatureRegistry reg = gold_registry();
  TokenStream ts =
      ingest_tagged(std::string(FIXTURES_DIR) + "/gold.conll");
  auto expected = load_gold_expected();
  REQUIRE(std::to_string(ts.tokens.size()) ==
          expected.at("token_count").expected);
  for (const auto& def : reg) {
    INFO("feature " << def.feature_id);
    const GoldRow& row = expected.at(def.feature_id);
    if (row.kind == "count") {
      REQUIRE(def.rule.kind == RuleKind::pattern);
      std::size_t c = detail::count_pattern(ts, def.rule);
      CHECK(std::to_string(c) == row.expected);
    } else {
      double want = std::stod(row.expected);
      double got = def.rule.kind == RuleKind::mattr
                       ? detail::mattr(ts, def.rule.window)
                       : detail::mean_word_length(ts);
      CHECK(got == Catch::Approx(want).epsilon(1e-9));
    }
  }
}

TEST_CASE("per-1000 normalization uses the full token count") {
  FeatureRegistry reg = gold_registry();
  TokenStream ts = ingest_tagged(std::string(FIXTURES_DIR) + "/gold.conll");
  FeatureVector fv = extract_features(ts, reg);
  REQUIRE(fv.token_count == ts.tokens.size());
  // F20 existential there occurs once in the gold fixture
  double want = 1000.0 / static_cast<double>(ts.tokens.size());
  CHECK(fv.values.at("F20_existential_there") ==
        Catch::Approx(want).epsilon(1e-12));
}

TEST_CASE("pattern element: tag wildcard and surface constraint") {
  auto ts = stream_from({{{"She", "PRP"}, {"runs", "VBZ"}, {".", "."}}});
  PatternElement verb;
  verb.tags = {"VB*"};
  CHECK(verb.matches(ts.tokens[1]));
  CHECK_FALSE(verb.matches(ts.tokens[0]));
  PatternElement she;
  she.surfaces = {"she"};
  CHECK(she.matches(ts.tokens[0]));  // folded comparison
}

TEST_CASE("optional elements are matched greedily") {
  auto ts = stream_from(
      {{{"was", "VBD"}, {"quickly", "RB"}, {"taken", "VBN"}, {".", "."}},
       {{"was", "VBD"}, {"taken", "VBN"}, {".", "."}}});
  FeatureRule rule;
  PatternElement be, adv, vbn;
  be.surfaces = {"was"};
  adv.tags = {"RB"};
  adv.optional = true;
  vbn.tags = {"VBN"};
  rule.patterns = {{be, adv, vbn}};
  CHECK(detail::count_pattern(ts, rule) == 2);
}

TEST_CASE("negative lookahead rejects only matching continuations") {
  auto ts = stream_from(
      {{{"was", "VBD"}, {"seen", "VBN"}, {"by", "IN"}, {"her", "PRP"},
        {".", "."}},
       {{"was", "VBD"}, {"seen", "VBN"}, {"there", "RB"}, {".", "."}},
       {{"was", "VBD"}, {"seen", "VBN"}}});
  FeatureRule rule;
  PatternElement be, vbn, not_by;
  be.surfaces = {"was"};
  vbn.tags = {"VBN"};
  not_by.surfaces = {"by"};
  not_by.negative = true;
  rule.patterns = {{be, vbn, not_by}};
  // sentence 1 blocked by "by"; 2 passes; 3 passes (nothing follows)
  CHECK(detail::count_pattern(ts, rule) == 2);
}

TEST_CASE("sentence_start anchors to sentence openings only") {
  auto ts = stream_from(
      {{{"Well", "RB"}, {",", ","}, {"fine", "JJ"}, {".", "."}},
       {{"It", "PRP"}, {"went", "VBD"}, {"well", "RB"}, {".", "."}}});
  FeatureRule rule;
  PatternElement well;
  well.surfaces = {"well"};
  well.sentence_start = true;
  rule.patterns = {{well}};
  CHECK(detail::count_pattern(ts, rule) == 1);
}

TEST_CASE("patterns do not cross sentence boundaries by default") {
  auto ts = stream_from(
      {{{"the", "DT"}, {"dog", "NN"}, {".", "."}},
       {{"Barked", "VBD"}, {".", "."}}});
  FeatureRule rule;
  PatternElement noun, verb;
  noun.tags = {"NN"};
  verb.tags = {"VBD"};
  rule.patterns = {{noun, verb}};
  CHECK(detail::count_pattern(ts, rule) == 0);
  rule.within_sentence = false;
  // "dog . Barked" still does not match adjacently; add the period
  PatternElement dot;
  dot.tags = {"."};
  rule.patterns = {{noun, dot, verb}};
  CHECK(detail::count_pattern(ts, rule) == 1);
}

TEST_CASE("alternative patterns count each anchor at most once") {
  auto ts = stream_from({{{"just", "RB"}, {"so", "RB"}, {"good", "JJ"},
                          {".", "."}}});
  FeatureRule rule;
  PatternElement just_or_so, so, adj;
  just_or_so.surfaces = {"just", "so"};
  so.surfaces = {"so"};
  adj.tags = {"JJ"};
  rule.patterns = {{just_or_so}, {so, adj}};
  // anchors: "just" matches pattern 1, "so" matches both but counts once
  CHECK(detail::count_pattern(ts, rule) == 2);
}

TEST_CASE("suffix and not_suffix match on the folded surface") {
  auto ts = stream_from({{{"Movement", "NN"}, {"dog", "NN"},
                          {"Nation", "NN"}, {".", "."}}});
  FeatureRule nom, other;
  PatternElement el;
  el.tags = {"NN"};
  el.suffixes = {"ment", "tion"};
  nom.patterns = {{el}};
  CHECK(detail::count_pattern(ts, nom) == 2);
  PatternElement el2;
  el2.tags = {"NN"};
  el2.not_suffixes = {"ment", "tion"};
  other.patterns = {{el2}};
  CHECK(detail::count_pattern(ts, other) == 1);
}

TEST_CASE("mattr equals plain TTR for streams within one window") {
  auto ts = stream_from({{{"a", "DT"}, {"b", "NN"}, {"a", "DT"},
                          {"c", "NN"}, {".", "."}}});
  // 4 word tokens, 3 types
  CHECK(detail::mattr(ts, 100) == Catch::Approx(0.75));
  CHECK(detail::ttr_first_n(ts, 400) == Catch::Approx(0.75));
}

TEST_CASE("mattr sliding window on a known sequence") {
  // words: a b a b a  -> windows of 3: {a,b,a}=2/3 {b,a,b}=2/3 {a,b,a}=2/3
  auto ts = stream_from({{{"a", "NN"}, {"b", "NN"}, {"a", "NN"},
                          {"b", "NN"}, {"a", "NN"}}});
  CHECK(detail::mattr(ts, 3) == Catch::Approx(2.0 / 3.0));
}

TEST_CASE("mean word length counts code points over word tokens") {
  auto ts = stream_from({{{"ab", "NN"}, {"cdef", "VBZ"}, {",", ","},
                          {"\xc5\xbe" "ena", "NN"}, {".", "."}}});
  // word tokens: ab(2) cdef(4) žena(4 code points) -> mean 10/3
  CHECK(detail::mean_word_length(ts) == Catch::Approx(10.0 / 3.0));
}

TEST_CASE("extract_features refuses an empty stream") {
  TokenStream ts;
  CHECK_THROWS_AS(extract_features(ts, gold_registry()), EmptyStream);
}

TEST_CASE("registry with duplicate feature ids is rejected") {
  std::string path = "/tmp/styloshift_dup_registry.json";
  write_file(path, R"({"format":"styloshift-features/1","features":[
    {"id":"x","rule":{"kind":"pattern","patterns":[[{"tag":["NN"]}]]}},
    {"id":"x","rule":{"kind":"pattern","patterns":[[{"tag":["VB"]}]]}}]})");
  CHECK_THROWS_AS(load_registry(path), DuplicateFeatureId);
}

TEST_CASE("registry with a bad format tag is rejected") {
  std::string path = "/tmp/styloshift_bad_format.json";
  write_file(path, R"({"format":"something/9","features":[]})");
  CHECK_THROWS_AS(load_registry(path), ParseError);
}

TEST_CASE("registry rejects patterns longer than 4 elements") {
  std::string path = "/tmp/styloshift_long_pattern.json";
  write_file(path, R"({"format":"styloshift-features/1","features":[
    {"id":"x","rule":{"kind":"pattern","patterns":[[
      {"tag":["NN"]},{"tag":["NN"]},{"tag":["NN"]},{"tag":["NN"]},
      {"tag":["NN"]}]]}}]})");
  CHECK_THROWS_AS(load_registry(path), ParseError);
}

TEST_CASE("feature matrix ingest: required columns, extras warned") {
  std::string path = "/tmp/styloshift_matrix.tsv";
  write_file(path,
             "chunk_id\tf1\tf2\textra\ttoken_count\n"
             "c1\t1.5\t2\t9\t100\n"
             "c2\t0\t-3.25\t9\t50\n");
  std::vector<std::string> warnings;
  auto rows = ingest_feature_matrix(path, {"f1", "f2"}, &warnings);
  REQUIRE(rows.size() == 2);
  CHECK(rows.at("c1").values.at("f1") == Catch::Approx(1.5));
  CHECK(rows.at("c2").values.at("f2") == Catch::Approx(-3.25));
  CHECK(rows.at("c1").token_count == 100);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("extra") != std::string::npos);
}

TEST_CASE("feature matrix ingest: missing required column throws") {
  std::string path = "/tmp/styloshift_matrix_missing.tsv";
  write_file(path, "chunk_id\tf1\nc1\t1\n");
  CHECK_THROWS_AS(ingest_feature_matrix(path, {"f1", "f2"}), ColumnMismatch);
}

TEST_CASE("feature matrix ingest: comma-separated input also accepted") {
  std::string path = "/tmp/styloshift_matrix_csv.csv";
  write_file(path, "chunk_id,f1\nc1,2.5\n");
  auto rows = ingest_feature_matrix(path, {"f1"});
  CHECK(rows.at("c1").values.at("f1") == Catch::Approx(2.5));
}
