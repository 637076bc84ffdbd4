#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "styloshift/corpus.hpp"

namespace fs = std::filesystem;
using namespace styloshift;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::path("/tmp") / ("styloshift_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

CorpusManifest tiny_manifest(const fs::path& dir) {
  write_file((dir / "d1.part1.txt").string(), "one two three");
  write_file((dir / "d1.part2.txt").string(), "four five six");
  CorpusManifest m;
  m.corpus_id = "tiny";
  m.language = "en";
  m.genre_taxonomy = {"fiction"};
  m.entries.push_back(
      {"d1", "fiction", "en", "d1.part1.txt", "d1.part2.txt", 3});
  return m;
}

}  // namespace

TEST_CASE("split_document is lossless and lands on the word boundary") {
  std::string text = "alpha beta  gamma\n\ndelta epsilon zeta ";
  SplitResult r = split_document(text, {3});
  CHECK(r.part1 == "alpha beta  gamma");
  CHECK(r.separator == "\n\n");
  CHECK(r.part2 == "delta epsilon zeta ");
  CHECK(r.part1 + r.separator + r.part2 == text);
  CHECK(count_words(r.part1) == 3);
}

TEST_CASE("split_document is deterministic") {
  std::string text = "a b c d e f g h i j";
  SplitResult a = split_document(text, {4});
  SplitResult b = split_document(text, {4});
  CHECK(a.part1 == b.part1);
  CHECK(a.part2 == b.part2);
}

TEST_CASE("split_document rejects documents that are too short") {
  CHECK_THROWS_AS(split_document("one two", {5}), TooShort);
  // exactly N words: nothing left for part2
  CHECK_THROWS_AS(split_document("one two three", {3}), TooShort);
  // N words then only whitespace
  CHECK_THROWS_AS(split_document("one two three   ", {3}), TooShort);
}

TEST_CASE("split handles multi-byte words without breaking them") {
  std::string text = "\xc5\xbeena \xc4\x8d" "eka dlouho tady";
  SplitResult r = split_document(text, {2});
  CHECK(r.part1 == "\xc5\xbeena \xc4\x8d" "eka");
  CHECK(r.part2 == "dlouho tady");
}

TEST_CASE("manifest round trip preserves all fields") {
  fs::path dir = fresh_dir("manifest_rt");
  CorpusManifest m = tiny_manifest(dir);
  save_manifest(m, (dir / "manifest.json").string());
  CorpusManifest back = load_manifest((dir / "manifest.json").string());
  CHECK(back.corpus_id == "tiny");
  CHECK(back.language == "en");
  REQUIRE(back.entries.size() == 1);
  CHECK(back.entries[0].doc_id == "d1");
  CHECK(back.entries[0].genre == "fiction");
  CHECK(back.entries[0].word_count_part1 == 3);
}

TEST_CASE("load_manifest rejects duplicate doc ids") {
  fs::path dir = fresh_dir("manifest_dup");
  CorpusManifest m = tiny_manifest(dir);
  auto j = manifest_to_json(m);
  j["entries"].push_back(j["entries"][0]);
  write_file((dir / "manifest.json").string(), j.dump());
  CHECK_THROWS_AS(load_manifest((dir / "manifest.json").string()),
                  ParseError);
}

TEST_CASE("load_manifest lists every missing chunk file") {
  fs::path dir = fresh_dir("manifest_missing");
  CorpusManifest m = tiny_manifest(dir);
  fs::remove(dir / "d1.part2.txt");
  save_manifest(m, (dir / "manifest.json").string());
  try {
    load_manifest((dir / "manifest.json").string());
    FAIL("expected MissingFile");
  } catch (const MissingFile& e) {
    CHECK(std::string(e.what()).find("d1.part2.txt") != std::string::npos);
  }
}

TEST_CASE("load_manifest rejects a wrong format tag") {
  fs::path dir = fresh_dir("manifest_fmt");
  write_file((dir / "manifest.json").string(),
             R"({"format":"other/1","entries":[]})");
  CHECK_THROWS_AS(load_manifest((dir / "manifest.json").string()),
                  ParseError);
}

TEST_CASE("model config validation") {
  ModelConfig ok;
  ok.config_id = "c1";
  ok.model_name = "m";
  CHECK_NOTHROW(ok.validate());

  ModelConfig bad_temp = ok;
  bad_temp.temperature = 2.5;
  CHECK_THROWS_AS(bad_temp.validate(), ParseError);
  bad_temp.temperature = -0.1;
  CHECK_THROWS_AS(bad_temp.validate(), ParseError);

  ModelConfig comp = ok;
  comp.endpoint_kind = EndpointKind::completion;
  comp.system_prompt_id = SystemPromptId::minimal;
  CHECK_THROWS_AS(comp.validate(), ParseError);
  comp.system_prompt_id = SystemPromptId::none;
  CHECK_NOTHROW(comp.validate());

  ModelConfig anon = ok;
  anon.config_id = "";
  CHECK_THROWS_AS(anon.validate(), ParseError);
}

TEST_CASE("attach_continuation stores text plus metadata sidecar") {
  fs::path dir = fresh_dir("store_attach");
  CorpusManifest m = tiny_manifest(dir);
  save_manifest(m, (dir / "manifest.json").string());
  CorpusStore store((dir / "manifest.json").string());

  Continuation c;
  c.doc_id = "d1";
  c.config_id = "cfgA";
  c.text = "generated continuation text";
  c.prompt_hash = "deadbeefdeadbeef";
  c.model_name = "mock";
  c.temperature = 1.0;
  c.retries = 2;
  store.attach_continuation(m.entries[0], c);

  REQUIRE(store.has_continuation("cfgA", "d1"));
  Continuation back = store.load_continuation("cfgA", "d1");
  CHECK(back.text == c.text);
  CHECK(back.prompt_hash == c.prompt_hash);
  CHECK(back.retries == 2);
  CHECK(store.continuation_configs() == std::vector<std::string>{"cfgA"});
  // no stray temp files
  for (const auto& e :
       fs::recursive_directory_iterator(dir / "continuations"))
    CHECK(e.path().extension() != ".tmp");
}

TEST_CASE("attach_continuation refuses duplicates unless forced") {
  fs::path dir = fresh_dir("store_dup");
  CorpusManifest m = tiny_manifest(dir);
  save_manifest(m, (dir / "manifest.json").string());
  CorpusStore store((dir / "manifest.json").string());
  Continuation c;
  c.doc_id = "d1";
  c.config_id = "cfgA";
  c.text = "first";
  store.attach_continuation(m.entries[0], c);
  c.text = "second";
  CHECK_THROWS_AS(store.attach_continuation(m.entries[0], c),
                  DuplicateContinuation);
  store.attach_continuation(m.entries[0], c, /*force=*/true);
  CHECK(store.load_continuation("cfgA", "d1").text == "second");
}

TEST_CASE("attach_continuation rejects mismatched doc ids") {
  fs::path dir = fresh_dir("store_mismatch");
  CorpusManifest m = tiny_manifest(dir);
  save_manifest(m, (dir / "manifest.json").string());
  CorpusStore store((dir / "manifest.json").string());
  Continuation c;
  c.doc_id = "other";
  c.config_id = "cfgA";
  CHECK_THROWS_AS(store.attach_continuation(m.entries[0], c), Error);
}

TEST_CASE("load_continuation on a missing pair throws MissingFile") {
  fs::path dir = fresh_dir("store_missing");
  CorpusManifest m = tiny_manifest(dir);
  save_manifest(m, (dir / "manifest.json").string());
  CorpusStore store((dir / "manifest.json").string());
  CHECK_THROWS_AS(store.load_continuation("nope", "d1"), MissingFile);
}
