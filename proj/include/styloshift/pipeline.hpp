#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "styloshift/cluster.hpp"
#include "styloshift/corpus.hpp"
#include "styloshift/dimensions.hpp"
#include "styloshift/features.hpp"
#include "styloshift/generate.hpp"
#include "styloshift/report.hpp"
#include "styloshift/stats.hpp"
#include "styloshift/tagger.hpp"

namespace styloshift {

inline constexpr const char* kRunConfigFormat = "styloshift-run/1";

struct RunConfig {
  std::string config_path;  // where this config was loaded from
  std::string manifest_path;
  std::string dimension_model_path;
  std::string feature_registry_path;
  std::string workspace;
  std::vector<ModelConfig> model_configs;
  EndpointProfile endpoint;
  BenchmarkParams stats;
  bool seed_given = false;
  bool m_tests_given = false;
  ReportSpec report;
  std::size_t concurrency = 1;
  std::size_t max_retries = 3;
  bool force = false;
};

inline RunConfig load_run_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.contains("format") || j["format"] != kRunConfigFormat)
    throw ParseError(path + ": missing or unsupported format tag");
  RunConfig rc;
  rc.config_path = path;
  std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    if (p.empty()) return p;
    std::filesystem::path fp(p);
    return fp.is_absolute() ? p : (base / fp).string();
  };
  rc.manifest_path = resolve(j.value("manifest", ""));
  rc.dimension_model_path = resolve(j.value("dimension_model", ""));
  rc.feature_registry_path = resolve(j.value("feature_registry", ""));
  rc.workspace = resolve(j.value("workspace", "workspace"));
  for (const auto& mc : j.value("model_configs", nlohmann::json::array())) {
    ModelConfig c;
    c.config_id = mc.value("config_id", "");
    c.endpoint_kind =
        endpoint_kind_from_string(mc.value("endpoint_kind", "chat"));
    c.model_name = mc.value("model_name", "");
    c.temperature = mc.value("temperature", 1.0);
    c.system_prompt_id = system_prompt_from_string(
        mc.value("system_prompt_id",
                 c.endpoint_kind == EndpointKind::completion ? "none"
                                                             : "minimal"));
    if (mc.contains("appended_instruction"))
      c.appended_instruction = mc["appended_instruction"].get<std::string>();
    if (mc.contains("system_prompt_file"))
      c.system_prompt_file = resolve(mc["system_prompt_file"]);
    rc.model_configs.push_back(std::move(c));
  }
  if (j.contains("endpoint")) {
    const auto& ep = j["endpoint"];
    rc.endpoint.base_url = ep.value("base_url", rc.endpoint.base_url);
    rc.endpoint.auth_env = ep.value("auth_env", "");
    rc.endpoint.rate_limit_rpm = ep.value("rate_limit_rpm", 0);
    rc.endpoint.timeout_seconds = ep.value("timeout_seconds", 120);
    rc.endpoint.backoff_base_ms = ep.value("backoff_base_ms", 500);
  }
  if (j.contains("stats")) {
    const auto& st = j["stats"];
    rc.stats.iters = st.value("iters", std::size_t{10000});
    rc.stats.inner_iters = st.value("inner_iters", std::size_t{200});
    if (st.contains("seed")) {
      rc.stats.seed.seed = st["seed"].get<std::uint64_t>();
      rc.seed_given = true;
    }
    if (st.contains("m_tests")) {
      rc.stats.m_tests = st["m_tests"].get<std::size_t>();
      rc.m_tests_given = true;
    }
  }
  if (j.contains("report")) {
    const auto& rp = j["report"];
    rc.report.color_cap = rp.value("color_cap", 50.0);
    rc.report.colorblind_safe = rp.value("colorblind_safe", false);
  }
  rc.report.seed = rc.stats.seed;
  if (j.contains("generation")) {
    const auto& g = j["generation"];
    rc.concurrency = g.value("concurrency", std::size_t{1});
    rc.max_retries = g.value("max_retries", std::size_t{3});
  }
  return rc;
}

// Reference and schema checks; returns human-readable diagnostics
// instead of throwing, so the CLI can print them all at once.
inline std::vector<std::string> validate(RunConfig& rc) {
  std::vector<std::string> diags;
  auto check_file = [&](const std::string& p, const char* what) {
    if (p.empty()) {
      diags.push_back(std::string(what) + " not set");
      return false;
    }
    if (!std::filesystem::exists(p)) {
      diags.push_back(std::string(what) + " not found: " + p);
      return false;
    }
    return true;
  };
  std::size_t dims = 0;
  if (check_file(rc.manifest_path, "manifest")) {
    try {
      load_manifest(rc.manifest_path);
    } catch (const Error& e) {
      diags.push_back(e.what());
    }
  }
  if (check_file(rc.dimension_model_path, "dimension model")) {
    try {
      dims = load_dimension_model(rc.dimension_model_path).dimensions.size();
    } catch (const Error& e) {
      diags.push_back(e.what());
    }
  }
  if (check_file(rc.feature_registry_path, "feature registry")) {
    try {
      load_registry(rc.feature_registry_path);
    } catch (const Error& e) {
      diags.push_back(e.what());
    }
  }
  std::map<std::string, std::size_t> first_seen;
  for (std::size_t i = 0; i < rc.model_configs.size(); ++i) {
    const auto& mc = rc.model_configs[i];
    try {
      mc.validate();
    } catch (const Error& e) {
      diags.push_back(e.what());
    }
    auto [it, inserted] = first_seen.emplace(mc.config_id, i);
    if (!inserted)
      diags.push_back("duplicate config_id '" + mc.config_id +
                      "' (model_configs[" + std::to_string(it->second) +
                      "] and model_configs[" + std::to_string(i) + "])");
    if (mc.system_prompt_id == SystemPromptId::long_assistant) {
      if (!mc.system_prompt_file)
        diags.push_back(mc.config_id +
                        ": long_assistant requires system_prompt_file");
      else if (!std::filesystem::exists(*mc.system_prompt_file))
        diags.push_back(mc.config_id + ": system prompt file not found: " +
                        *mc.system_prompt_file);
      if (!mc.appended_instruction)
        diags.push_back(mc.config_id +
                        ": long_assistant requires appended_instruction");
    }
  }
  if (rc.model_configs.empty())
    diags.push_back("nothing to benchmark: no model configs");
  if (!rc.seed_given)
    diags.push_back("stats.seed is required (no wall-clock seeding)");
  if (!rc.m_tests_given && dims > 0)
    rc.stats.m_tests = rc.model_configs.size() * dims;
  return diags;
}

namespace detail {

inline std::string hash_file(const std::string& path) {
  return hex64(fnv1a64(read_file(path)));
}

inline std::string combine_hashes(const std::vector<std::string>& parts) {
  std::string all;
  for (const auto& p : parts) {
    all += p;
    all += '\x1e';
  }
  return hex64(fnv1a64(all));
}

class StageCache {
public:
  explicit StageCache(std::filesystem::path workspace)
      : path_(workspace / "cache.json") {
    if (std::filesystem::exists(path_)) {
      try {
        state_ = nlohmann::json::parse(read_file(path_.string()));
      } catch (...) {
        state_ = nlohmann::json::object();
      }
    } else {
      state_ = nlohmann::json::object();
    }
  }

  bool fresh(const std::string& stage, const std::string& input_hash,
             const std::vector<std::string>& outputs) const {
    if (!state_.contains(stage) || state_[stage] != input_hash) return false;
    for (const auto& o : outputs)
      if (!std::filesystem::exists(o)) return false;
    return true;
  }

  void record(const std::string& stage, const std::string& input_hash) {
    state_[stage] = input_hash;
    write_file(path_.string(), state_.dump(2) + "\n");
  }

private:
  std::filesystem::path path_;
  nlohmann::json state_;
};

}  // namespace detail

// Chunk naming inside a workspace: the human halves and one chunk per
// (doc, config) continuation.
inline std::string chunk_id_part1(const std::string& doc) {
  return doc + "#part1";
}
inline std::string chunk_id_part2(const std::string& doc) {
  return doc + "#part2";
}
inline std::string chunk_id_cont(const std::string& doc,
                                 const std::string& config) {
  return doc + "#" + config;
}

struct StageReport {
  std::string stage;
  bool cached = false;
  std::string detail;
};

class Pipeline {
public:
  Pipeline(RunConfig rc, JobLogger logger = {})
      : rc_(std::move(rc)), logger_(std::move(logger)) {
    std::filesystem::create_directories(rc_.workspace);
  }

  const std::vector<StageReport>& reports() const { return reports_; }

  std::filesystem::path ws() const { return rc_.workspace; }
  std::filesystem::path tagged_dir() const { return ws() / "tagged"; }
  std::string features_path() const {
    return (ws() / "features.tsv").string();
  }
  std::string scores_path() const { return (ws() / "scores.tsv").string(); }
  std::string results_json_path() const {
    return (ws() / "results.json").string();
  }
  std::string results_tsv_path() const {
    return (ws() / "results.tsv").string();
  }
  std::string dendrogram_path() const {
    return (ws() / "dendrogram.json").string();
  }
  std::filesystem::path report_dir() const { return ws() / "report"; }

  void run_all() {
    stage_generate();
    stage_tag();
    stage_features();
    stage_score();
    stage_bench();
    stage_cluster();
    stage_report();
  }

  void stage_generate() {
    CorpusStore store(rc_.manifest_path);
    std::size_t completed = 0, cached = 0, failed = 0;
    for (const auto& mc : rc_.model_configs) {
      std::string long_text;
      if (mc.system_prompt_file) long_text = read_file(*mc.system_prompt_file);
      RunSummary s = run_jobs(store, mc, rc_.endpoint, rc_.concurrency,
                              rc_.force, long_text, logger_, rc_.max_retries);
      completed += s.completed;
      cached += s.cached;
      failed += s.failed;
    }
    if (failed > 0)
      throw Error("generate: " + std::to_string(failed) + " jobs failed");
    reports_.push_back({"generate", completed == 0,
                        std::to_string(completed) + " generated, " +
                            std::to_string(cached) + " cached"});
  }

  void stage_tag() {
    CorpusStore store(rc_.manifest_path);
    std::vector<std::string> input_hashes = {
        detail::hash_file(rc_.manifest_path)};
    struct Chunk {
      std::string id;
      std::string text;
    };
    std::vector<Chunk> chunks;
    for (const auto& pair : store.manifest().entries) {
      chunks.push_back({chunk_id_part1(pair.doc_id), store.read_part1(pair)});
      chunks.push_back({chunk_id_part2(pair.doc_id), store.read_part2(pair)});
      for (const auto& cfg : store.continuation_configs()) {
        if (!store.has_continuation(cfg, pair.doc_id)) continue;
        Continuation c = store.load_continuation(cfg, pair.doc_id);
        if (c.degenerate) continue;  // excluded from all statistics
        chunks.push_back({chunk_id_cont(pair.doc_id, cfg), c.text});
      }
    }
    for (const auto& c : chunks)
      input_hashes.push_back(hex64(fnv1a64(c.id + "\x1f" + c.text)));
    std::string h = detail::combine_hashes(input_hashes);
    detail::StageCache cache(ws());
    std::vector<std::string> outputs;
    for (const auto& c : chunks)
      outputs.push_back((tagged_dir() / (sanitize(c.id) + ".conll")).string());
    if (cache.fresh("tag", h, outputs)) {
      reports_.push_back({"tag", true, std::to_string(chunks.size()) +
                                           " chunks (cached)"});
      return;
    }
    std::filesystem::create_directories(tagged_dir());
    for (const auto& c : chunks) {
      TokenStream ts = builtin_tag(c.text);
      write_file((tagged_dir() / (sanitize(c.id) + ".conll")).string(),
                 export_tagged(ts));
    }
    // chunk index so downstream stages know the id <-> file mapping
    nlohmann::json index = nlohmann::json::array();
    for (const auto& c : chunks)
      index.push_back({{"chunk_id", c.id}, {"file", sanitize(c.id) + ".conll"}});
    write_file((tagged_dir() / "index.json").string(), index.dump(2) + "\n");
    cache.record("tag", h);
    reports_.push_back(
        {"tag", false, std::to_string(chunks.size()) + " chunks tagged"});
  }

  void stage_features() {
    auto index = nlohmann::json::parse(
        read_file((tagged_dir() / "index.json").string()));
    std::vector<std::string> hashes = {
        detail::hash_file(rc_.feature_registry_path)};
    for (const auto& e : index)
      hashes.push_back(detail::hash_file(
          (tagged_dir() / e["file"].get<std::string>()).string()));
    std::string h = detail::combine_hashes(hashes);
    detail::StageCache cache(ws());
    if (cache.fresh("features", h, {features_path()})) {
      reports_.push_back({"features", true, "cached"});
      return;
    }
    FeatureRegistry reg = load_registry(rc_.feature_registry_path);
    std::map<std::string, FeatureVector> rows;
    for (const auto& e : index) {
      TokenStream ts = ingest_tagged(
          (tagged_dir() / e["file"].get<std::string>()).string());
      if (ts.empty()) continue;
      rows[e["chunk_id"].get<std::string>()] = extract_features(ts, reg);
    }
    std::string out = "chunk_id";
    for (const auto& def : reg) out += "\t" + def.feature_id;
    out += "\ttoken_count\n";
    for (const auto& [id, fv] : rows) {
      out += id;
      for (const auto& def : reg)
        out += "\t" + format_real(fv.values.at(def.feature_id), 12);
      out += "\t" + std::to_string(fv.token_count) + "\n";
    }
    write_file(features_path(), out);
    cache.record("features", h);
    reports_.push_back({"features", false,
                        std::to_string(rows.size()) + " chunks scored for " +
                            std::to_string(reg.size()) + " features"});
  }

  void stage_score() {
    std::string h = detail::combine_hashes(
        {detail::hash_file(features_path()),
         detail::hash_file(rc_.dimension_model_path)});
    detail::StageCache cache(ws());
    if (cache.fresh("score", h, {scores_path()})) {
      reports_.push_back({"score", true, "cached"});
      return;
    }
    DimensionModel model = load_dimension_model(rc_.dimension_model_path);
    auto fvs = ingest_feature_matrix(features_path(), model.feature_ids());
    std::string out = "chunk_id";
    for (const auto& d : model.dimensions) out += "\t" + d.dim_id;
    out += "\n";
    for (const auto& [id, fv] : fvs) {
      DimensionScores s = score_dimensions(fv, model, id);
      out += id;
      for (double v : s.v) out += "\t" + format_real(v, 12);
      out += "\n";
    }
    write_file(scores_path(), out);
    cache.record("score", h);
    reports_.push_back(
        {"score", false, std::to_string(fvs.size()) + " chunks scored"});
  }

  // scores.tsv -> map chunk_id -> vector
  std::map<std::string, std::vector<double>> load_scores() const {
    std::map<std::string, std::vector<double>> out;
    auto lines = split_lines(read_file(scores_path()));
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      std::vector<double> v;
      std::string id;
      std::size_t start = 0, col = 0;
      const std::string& line = lines[i];
      while (start <= line.size()) {
        std::size_t tab = line.find('\t', start);
        std::string cell = tab == std::string::npos
                               ? line.substr(start)
                               : line.substr(start, tab - start);
        if (col == 0)
          id = cell;
        else
          v.push_back(std::stod(cell));
        if (tab == std::string::npos) break;
        start = tab + 1;
        ++col;
      }
      out[id] = std::move(v);
    }
    return out;
  }

  void stage_bench() {
    std::string params = std::to_string(rc_.stats.iters) + "/" +
                         std::to_string(rc_.stats.inner_iters) + "/" +
                         std::to_string(rc_.stats.seed.seed) + "/" +
                         std::to_string(rc_.stats.m_tests);
    std::string h = detail::combine_hashes(
        {detail::hash_file(scores_path()), hex64(fnv1a64(params)),
         detail::hash_file(rc_.manifest_path)});
    detail::StageCache cache(ws());
    if (cache.fresh("bench", h, {results_json_path(), results_tsv_path()})) {
      reports_.push_back({"bench", true, "cached"});
      return;
    }
    CorpusStore store(rc_.manifest_path);
    DimensionModel model = load_dimension_model(rc_.dimension_model_path);
    auto scores = load_scores();
    std::vector<std::string> dim_ids;
    for (const auto& d : model.dimensions) dim_ids.push_back(d.dim_id);

    // Human instability samples over the whole corpus (shared baseline).
    std::vector<ShiftSample> human;
    for (const auto& pair : store.manifest().entries) {
      auto p1 = scores.find(chunk_id_part1(pair.doc_id));
      auto p2 = scores.find(chunk_id_part2(pair.doc_id));
      if (p1 == scores.end() || p2 == scores.end()) continue;
      ShiftSample s;
      s.doc_id = pair.doc_id;
      s.genre = pair.genre;
      s.i.resize(dim_ids.size());
      for (std::size_t d = 0; d < dim_ids.size(); ++d)
        s.i[d] = p2->second[d] - p1->second[d];
      s.delta_v = s.i;  // placeholder; per-config below
      human.push_back(std::move(s));
    }
    std::vector<double> shared_se =
        baseline_se(human, rc_.stats.iters, rc_.stats.seed);
    HumanBaseline hb = human_baseline(human, rc_.stats);

    std::vector<BenchmarkResult> results;
    std::set<std::string> zero_baseline_dims;
    for (const auto& mc : rc_.model_configs) {
      std::vector<ShiftSample> shifts;
      for (const auto& pair : store.manifest().entries) {
        if (!store.has_continuation(mc.config_id, pair.doc_id)) continue;
        Continuation c = store.load_continuation(mc.config_id, pair.doc_id);
        if (c.degenerate) continue;
        auto p1 = scores.find(chunk_id_part1(pair.doc_id));
        auto p2 = scores.find(chunk_id_part2(pair.doc_id));
        auto pm = scores.find(chunk_id_cont(pair.doc_id, mc.config_id));
        if (p1 == scores.end() || p2 == scores.end() || pm == scores.end())
          continue;
        ShiftSample s;
        s.doc_id = pair.doc_id;
        s.genre = pair.genre;
        s.delta_v.resize(dim_ids.size());
        s.i.resize(dim_ids.size());
        for (std::size_t d = 0; d < dim_ids.size(); ++d) {
          s.delta_v[d] = p2->second[d] - pm->second[d];
          s.i[d] = p2->second[d] - p1->second[d];
        }
        shifts.push_back(std::move(s));
      }
      if (shifts.size() < 2) {
        logger_.log("bench: skipping " + mc.config_id +
                    " (fewer than 2 usable documents)");
        continue;
      }
      BenchmarkResult r =
          benchmark(mc.config_id, shifts, rc_.stats, &shared_se);
      for (std::size_t d = 0; d < dim_ids.size(); ++d)
        if (!r.normalizable[d]) zero_baseline_dims.insert(dim_ids[d]);
      results.push_back(std::move(r));
    }

    nlohmann::json j;
    j["format"] = "styloshift-results/1";
    j["seed"] = rc_.stats.seed.seed;
    j["iters"] = rc_.stats.iters;
    j["m_tests"] = rc_.stats.m_tests;
    j["dim_ids"] = dim_ids;
    j["zero_baseline_dims"] = std::vector<std::string>(
        zero_baseline_dims.begin(), zero_baseline_dims.end());
    auto& arr = j["results"] = nlohmann::json::array();
    for (const auto& r : results) arr.push_back(result_to_json(r, dim_ids));
    nlohmann::json& hbj = j["human_baseline"];
    hbj["n_docs"] = hb.n_docs;
    hbj["mean_i"] = hb.mean_i;
    hbj["se_i"] = hb.se_i;
    hbj["ci_low"] = hb.ci_low;
    hbj["ci_high"] = hb.ci_high;
    hbj["p_value"] = hb.p_value;
    hbj["significant"] = hb.significant;
    write_file(results_json_path(), j.dump(2) + "\n");
    write_file(results_tsv_path(), results_to_tsv(results, dim_ids));
    cache.record("bench", h);
    reports_.push_back({"bench", false,
                        std::to_string(results.size()) + " configs, " +
                            std::to_string(human.size()) + " documents"});
  }

  void stage_cluster() {
    std::string h = detail::hash_file(results_json_path());
    detail::StageCache cache(ws());
    if (cache.fresh("cluster", h, {dendrogram_path()})) {
      reports_.push_back({"cluster", true, "cached"});
      return;
    }
    auto j = nlohmann::json::parse(read_file(results_json_path()));
    std::map<std::string, std::vector<double>> vectors;
    for (const auto& rj : j["results"]) {
      BenchmarkResult r = result_from_json(rj);
      vectors[r.config_id] = r.b;
    }
    Dendrogram dg;
    if (vectors.size() >= 2) {
      dg = cluster_models(vectors, Linkage::average);
    } else {
      for (const auto& [id, _] : vectors) dg.leaves.push_back(id);
      if (!dg.leaves.empty()) dg.leaf_order.push_back(0);
    }
    write_file(dendrogram_path(), dendrogram_to_json(dg).dump(2) + "\n");
    if (dg.merges.size() > 0)
      write_file((ws() / "dendrogram.newick").string(), to_newick(dg) + "\n");
    cache.record("cluster", h);
    reports_.push_back({"cluster", false,
                        std::to_string(dg.leaves.size()) + " configs"});
  }

  void stage_report() {
    std::string h = detail::combine_hashes(
        {detail::hash_file(results_json_path()),
         detail::hash_file(dendrogram_path()),
         detail::hash_file(scores_path()),
         hex64(fnv1a64(format_real(rc_.report.color_cap) +
                       (rc_.report.colorblind_safe ? "cb" : "")))});
    detail::StageCache cache(ws());
    std::string manifest_out = (report_dir() / "report_manifest.json").string();
    if (cache.fresh("report", h, {manifest_out})) {
      reports_.push_back({"report", true, "cached"});
      return;
    }
    std::filesystem::create_directories(report_dir());
    auto j = nlohmann::json::parse(read_file(results_json_path()));
    std::vector<std::string> dim_ids =
        j["dim_ids"].get<std::vector<std::string>>();
    std::vector<BenchmarkResult> results;
    for (const auto& rj : j["results"])
      results.push_back(result_from_json(rj));
    Dendrogram dg = dendrogram_from_json(
        nlohmann::json::parse(read_file(dendrogram_path())));

    std::vector<std::string> artifacts;
    auto emit = [&](const std::string& stem, const RenderOutput& out) {
      write_file((report_dir() / (stem + ".svg")).string(), out.svg);
      write_file((report_dir() / (stem + ".tsv")).string(), out.table);
      artifacts.push_back(stem + ".svg");
      artifacts.push_back(stem + ".tsv");
    };

    if (!results.empty() && !dg.leaf_order.empty())
      emit("heatmap", render_heatmap(results, dg, dim_ids, rc_.report));
    if (!results.empty())
      emit("ranking", render_ranking(results, rc_.report));

    // scatter reports: human part1 vs part2, and part2 vs each config
    CorpusStore store(rc_.manifest_path);
    auto scores = load_scores();
    std::map<std::string, std::string> genre_of;
    std::map<std::string, DimensionScores> ref, cmp;
    for (const auto& pair : store.manifest().entries) {
      auto p1 = scores.find(chunk_id_part1(pair.doc_id));
      auto p2 = scores.find(chunk_id_part2(pair.doc_id));
      if (p1 == scores.end() || p2 == scores.end()) continue;
      genre_of[pair.doc_id] = pair.genre;
      ref[pair.doc_id] = {"", pair.doc_id, p1->second};
      cmp[pair.doc_id] = {"", pair.doc_id, p2->second};
    }
    if (ref.size() >= 2)
      emit("scatter_human",
           render_scatter(pair_scores(ref, cmp, genre_of, dim_ids.size()),
                          dim_ids, rc_.report));
    for (const auto& mc : rc_.model_configs) {
      std::map<std::string, DimensionScores> mref, mcmp;
      for (const auto& pair : store.manifest().entries) {
        auto p2 = scores.find(chunk_id_part2(pair.doc_id));
        auto pm = scores.find(chunk_id_cont(pair.doc_id, mc.config_id));
        if (p2 == scores.end() || pm == scores.end()) continue;
        mref[pair.doc_id] = {"", pair.doc_id, p2->second};
        mcmp[pair.doc_id] = {"", pair.doc_id, pm->second};
      }
      if (mref.size() >= 2)
        emit("scatter_" + sanitize(mc.config_id),
             render_scatter(
                 pair_scores(mref, mcmp, genre_of, dim_ids.size()), dim_ids,
                 rc_.report));
    }

    nlohmann::json manifest;
    manifest["artifacts"] = artifacts;
    manifest["color_cap"] = rc_.report.color_cap;
    const ColorRamp ramp = rc_.report.colorblind_safe
                               ? colorblind_safe_ramp()
                               : default_ramp();
    manifest["ramp"] = {{"neutral", ramp.neutral.hex()},
                        {"positive", ramp.positive.hex()},
                        {"negative", ramp.negative.hex()}};
    write_file(manifest_out, manifest.dump(2) + "\n");
    cache.record("report", h);
    reports_.push_back({"report", false,
                        std::to_string(artifacts.size()) + " artifacts"});
  }

  static std::string sanitize(const std::string& id) {
    std::string out;
    for (char c : id)
      out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
              c == '_' || c == '.')
                 ? c
                 : '_';
    return out;
  }

private:
  RunConfig rc_;
  JobLogger logger_;
  std::vector<StageReport> reports_;
};

}  // namespace styloshift
