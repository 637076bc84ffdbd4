// styloshift: split-and-continue stylistic benchmark pipeline.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "styloshift/pipeline.hpp"

namespace fs = std::filesystem;
using namespace styloshift;

namespace {

int run_split(const std::vector<std::string>& inputs, std::size_t words,
              const std::string& out_dir, const std::string& language,
              const std::string& corpus_id, const std::string& genre_flag) {
  fs::create_directories(fs::path(out_dir) / "chunks");
  CorpusManifest manifest;
  manifest.corpus_id = corpus_id;
  manifest.language = language;
  std::set<std::string> genres;

  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      for (const auto& e : fs::recursive_directory_iterator(in))
        if (e.is_regular_file() && e.path().extension() == ".txt")
          files.push_back(e.path());
    } else {
      files.push_back(in);
    }
  }
  std::sort(files.begin(), files.end());

  SplitPolicy policy{words};
  std::size_t skipped = 0;
  for (const auto& f : files) {
    std::string doc_id = f.stem().string();
    std::string genre = genre_flag;
    // filename convention: <genre>__<docid>.txt
    auto sep = doc_id.find("__");
    if (sep != std::string::npos) {
      if (genre.empty()) genre = doc_id.substr(0, sep);
      doc_id = doc_id.substr(sep + 2);
    }
    if (genre.empty()) genre = "unknown";
    std::string text = read_file(f.string());
    SplitResult split;
    try {
      split = split_document(text, policy);
    } catch (const TooShort& e) {
      std::cerr << "skip " << f << ": " << e.what() << "\n";
      ++skipped;
      continue;
    }
    DocumentPair pair;
    pair.doc_id = doc_id;
    pair.genre = genre;
    pair.language = language;
    pair.part1_path = "chunks/" + doc_id + ".part1.txt";
    pair.part2_path = "chunks/" + doc_id + ".part2.txt";
    pair.word_count_part1 = count_words(split.part1);
    write_file((fs::path(out_dir) / pair.part1_path).string(), split.part1);
    write_file((fs::path(out_dir) / pair.part2_path).string(), split.part2);
    manifest.entries.push_back(std::move(pair));
    genres.insert(genre);
  }
  manifest.genre_taxonomy.assign(genres.begin(), genres.end());
  save_manifest(manifest, (fs::path(out_dir) / "manifest.json").string());
  std::cout << "wrote " << manifest.entries.size() << " document pairs ("
            << skipped << " skipped) to " << out_dir << "\n";
  return manifest.entries.empty() ? 1 : 0;
}

void print_stage_reports(const Pipeline& p) {
  for (const auto& r : p.reports())
    std::cout << "[" << r.stage << "] " << (r.cached ? "cached" : "done")
              << ": " << r.detail << "\n";
}

int run_stages(const std::string& config_path, bool force, bool serial,
               const std::vector<std::string>& stages) {
  RunConfig rc = load_run_config(config_path);
  rc.force = force;
  if (serial) rc.concurrency = 1;
  auto diags = validate(rc);
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << "validation: " << d << "\n";
    return 1;
  }
  JobLogger logger{[](const std::string& m) { std::cerr << m << "\n"; }};
  Pipeline p(std::move(rc), logger);
  try {
    for (const auto& s : stages) {
      if (s == "generate") p.stage_generate();
      else if (s == "tag") p.stage_tag();
      else if (s == "features") p.stage_features();
      else if (s == "score") p.stage_score();
      else if (s == "bench") p.stage_bench();
      else if (s == "cluster") p.stage_cluster();
      else if (s == "report") p.stage_report();
    }
  } catch (const Error& e) {
    print_stage_reports(p);
    std::cerr << "stage failure: " << e.what() << "\n";
    return 2;
  }
  print_stage_reports(p);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stylistic-shift benchmark pipeline"};
  app.require_subcommand(1);

  // split
  auto* split = app.add_subcommand("split", "split source texts into "
                                            "prompt/reference pairs");
  std::vector<std::string> split_inputs;
  std::size_t split_words = 500;
  std::string split_out = "corpus", split_lang = "en",
              split_corpus = "corpus", split_genre;
  split->add_option("input", split_inputs, "input .txt files or directories")
      ->required();
  split->add_option("--words", split_words, "prompt length in words");
  split->add_option("--out", split_out, "output corpus directory");
  split->add_option("--language", split_lang, "corpus language tag");
  split->add_option("--corpus-id", split_corpus, "corpus identifier");
  split->add_option("--genre", split_genre,
                    "genre label override (default: filename prefix)");

  // config-driven stages
  std::string config_path;
  bool force = false, serial = false;
  auto add_stage_cmd = [&](const char* name, const char* desc) {
    auto* cmd = app.add_subcommand(name, desc);
    cmd->add_option("--config", config_path, "run configuration file")
        ->required();
    cmd->add_flag("--force", force, "redo cached work");
    cmd->add_flag("--serial", serial, "disable intra-stage concurrency");
    return cmd;
  };
  auto* gen = add_stage_cmd("generate", "run LLM continuation jobs");
  std::string gen_endpoint, gen_model, gen_system_prompt;
  double gen_temperature = -1.0;
  std::size_t gen_concurrency = 0;
  gen->add_option("--endpoint", gen_endpoint, "override endpoint base URL");
  gen->add_option("--model", gen_model, "restrict to one model name");
  gen->add_option("--temperature", gen_temperature,
                  "restrict to one temperature");
  gen->add_option("--system-prompt", gen_system_prompt,
                  "restrict to one system prompt id");
  gen->add_option("--concurrency", gen_concurrency,
                  "parallel requests per endpoint");
  auto* tag = add_stage_cmd("tag", "tokenize and tag all corpus chunks");
  auto* feat = add_stage_cmd("features", "extract feature vectors");
  auto* score = add_stage_cmd("score", "compute dimension scores");
  auto* bench = add_stage_cmd("bench", "compute benchmark statistics");
  auto* clus = add_stage_cmd("cluster", "cluster model shift vectors");
  auto* rep = add_stage_cmd("report", "render SVG reports");
  auto* runall = add_stage_cmd("run-all", "run the whole pipeline");
  auto* val = app.add_subcommand("validate", "check a run configuration");
  val->add_option("--config", config_path, "run configuration file")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (split->parsed())
      return run_split(split_inputs, split_words, split_out, split_lang,
                       split_corpus, split_genre);
    if (val->parsed()) {
      RunConfig rc = load_run_config(config_path);
      auto diags = validate(rc);
      for (const auto& d : diags) std::cout << d << "\n";
      if (diags.empty()) {
        std::cout << "ok: " << rc.model_configs.size()
                  << " model configs, m_tests=" << rc.stats.m_tests << "\n";
        return 0;
      }
      return 1;
    }
    if (gen->parsed()) {
      RunConfig rc = load_run_config(config_path);
      rc.force = force;
      if (!gen_endpoint.empty()) rc.endpoint.base_url = gen_endpoint;
      if (gen_concurrency > 0) rc.concurrency = gen_concurrency;
      if (serial) rc.concurrency = 1;
      if (!gen_model.empty() || gen_temperature >= 0.0 ||
          !gen_system_prompt.empty()) {
        std::vector<ModelConfig> kept;
        for (const auto& mc : rc.model_configs) {
          if (!gen_model.empty() && mc.model_name != gen_model) continue;
          if (gen_temperature >= 0.0 && mc.temperature != gen_temperature)
            continue;
          if (!gen_system_prompt.empty() &&
              to_string(mc.system_prompt_id) != gen_system_prompt)
            continue;
          kept.push_back(mc);
        }
        rc.model_configs = std::move(kept);
      }
      auto diags = validate(rc);
      if (!diags.empty()) {
        for (const auto& d : diags) std::cerr << "validation: " << d << "\n";
        return 1;
      }
      JobLogger logger{[](const std::string& m) { std::cerr << m << "\n"; }};
      Pipeline p(std::move(rc), logger);
      try {
        p.stage_generate();
      } catch (const Error& e) {
        std::cerr << "stage failure: " << e.what() << "\n";
        return 2;
      }
      print_stage_reports(p);
      return 0;
    }
    std::vector<std::string> stages;
    if (tag->parsed()) stages = {"tag"};
    else if (feat->parsed()) stages = {"tag", "features"};
    else if (score->parsed()) stages = {"tag", "features", "score"};
    else if (bench->parsed())
      stages = {"tag", "features", "score", "bench"};
    else if (clus->parsed())
      stages = {"tag", "features", "score", "bench", "cluster"};
    else if (rep->parsed())
      stages = {"tag", "features", "score", "bench", "cluster", "report"};
    else if (runall->parsed())
      stages = {"generate", "tag", "features", "score",
                "bench",    "cluster", "report"};
    return run_stages(config_path, force, serial, stages);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
