#pragma once

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "styloshift/common.hpp"
#include "styloshift/corpus.hpp"
#include "styloshift/tagger.hpp"

namespace styloshift {

class MissingPromptFile : public Error {
public:
  using Error::Error;
};

class TransportError : public Error {
public:
  using Error::Error;
};

class AuthError : public Error {
public:
  using Error::Error;
};

inline constexpr const char* kMinimalSystemPrompt =
    "Please continue the text in the same manner and style, ensuring it "
    "contains at least five thousand words. The text does not need to be "
    "factually correct, but please make sure it fits stylistically.";

inline constexpr const char* kMinimalCzechSystemPrompt =
    "Please continue the Czech text in the same language, manner and "
    "style, ensuring it contains at least five thousand words. The text "
    "does not need to be factually correct, but please make sure it fits "
    "stylistically.";

struct EndpointProfile {
  std::string base_url = "http://localhost:8080";
  std::string auth_env;       // env var holding the API key; never logged
  int rate_limit_rpm = 0;     // 0 = unpaced
  int timeout_seconds = 120;
  int backoff_base_ms = 500;  // doubled per retry
};

struct GenerationJob {
  std::string doc_id;
  ModelConfig config;
  std::size_t max_output_words = 1500;
  int retry_budget = 3;
};

struct PromptPayload {
  nlohmann::json body;       // request body, ready to POST
  std::string path;          // endpoint path
  std::string prompt_hash;   // hex64 over the prompt content
};

// Builds the request body for one job. Completion endpoints get the raw
// part1 text, byte for byte. Chat endpoints get a system message chosen
// by system_prompt_id plus part1 as the user message; the long_assistant
// variant appends the continuation instruction after the text chunk.
inline PromptPayload build_prompt(const std::string& part1,
                                  const ModelConfig& config,
                                  const std::string& long_prompt_text = "") {
  config.validate();
  PromptPayload p;
  if (config.endpoint_kind == EndpointKind::completion) {
    p.path = "/v1/completions";
    p.body = {{"model", config.model_name},
              {"prompt", part1},
              {"temperature", config.temperature}};
    p.prompt_hash = hex64(fnv1a64(part1));
    return p;
  }
  std::string system_text;
  std::string user_text = part1;
  switch (config.system_prompt_id) {
    case SystemPromptId::minimal:
      system_text = kMinimalSystemPrompt;
      break;
    case SystemPromptId::minimal_czech:
      system_text = kMinimalCzechSystemPrompt;
      break;
    case SystemPromptId::long_assistant: {
      if (long_prompt_text.empty())
        throw MissingPromptFile(config.config_id +
                                ": long_assistant needs a system prompt "
                                "file (system_prompt_file)");
      if (!config.appended_instruction || config.appended_instruction->empty())
        throw MissingPromptFile(config.config_id +
                                ": long_assistant needs an "
                                "appended_instruction");
      system_text = long_prompt_text;
      user_text += "\n\n" + *config.appended_instruction;
      break;
    }
    case SystemPromptId::none:
      throw ParseError(config.config_id +
                       ": chat endpoint needs a system prompt");
  }
  p.path = "/v1/chat/completions";
  p.body = {{"model", config.model_name},
            {"temperature", config.temperature},
            {"messages",
             {{{"role", "system"}, {"content", system_text}},
              {{"role", "user"}, {"content", user_text}}}}};
  p.prompt_hash = hex64(fnv1a64(system_text + "\x1f" + user_text));
  return p;
}

struct DegenerateCheck {
  bool degenerate = false;
  std::string reason;
};

namespace detail {

inline const std::vector<std::string>& english_stopwords() {
  static const std::vector<std::string> sw = {
      "the", "and", "of",  "to",  "in",   "is",  "that", "it",  "was",
      "for", "on",  "are", "as",  "with", "his", "they", "at",  "be",
      "this", "have", "from", "or", "had", "by", "not", "but", "what"};
  return sw;
}

inline const std::vector<std::string>& czech_stopwords() {
  static const std::vector<std::string> sw = {
      "a",  "se",  "na", "je", "že", "v",  "o",  "to", "si", "ale",
      "do", "pro", "za", "by", "po", "co", "tak", "jako", "jsem", "s",
      "když", "už", "který", "která", "které", "byl", "byla", "bylo"};
  return sw;
}

inline double stopword_density(const std::vector<std::string>& words,
                               const std::vector<std::string>& stopwords) {
  if (words.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& w : words)
    for (const auto& s : stopwords)
      if (w == s) {
        ++hits;
        break;
      }
  return static_cast<double>(hits) / static_cast<double>(words.size());
}

}  // namespace detail

inline constexpr std::size_t kMinContinuationWords = 50;
inline constexpr std::size_t kRepeatedSentenceThreshold = 3;
inline constexpr std::size_t kRepeatedSentenceMinWords = 5;
inline constexpr double kTrailingDuplicationRatio = 0.5;

// Flags unusable model output: repetition loops, too-short output, or
// text not in the corpus language.
inline DegenerateCheck detect_degenerate(const std::string& text,
                                         const std::string& corpus_language) {
  DegenerateCheck out;
  RawTokens raw = tokenize(text);
  std::vector<std::string> words;
  for (const auto& t : raw.tokens) {
    if (t.size() == 1 &&
        std::string_view(".,!?;:\"()[]{}'").find(t[0]) !=
            std::string_view::npos)
      continue;
    words.push_back(fold_case(t));
  }

  if (words.size() < kMinContinuationWords) {
    out.degenerate = true;
    out.reason = "short";
    return out;
  }

  // repeated identical sentences
  std::unordered_map<std::string, std::size_t> sentence_counts;
  std::size_t start = 0;
  for (std::size_t b : raw.sentence_boundaries) {
    std::string key;
    std::size_t sent_words = 0;
    for (std::size_t i = start; i < b; ++i) {
      key += fold_case(raw.tokens[i]);
      key += ' ';
      ++sent_words;
    }
    if (sent_words >= kRepeatedSentenceMinWords) {
      if (++sentence_counts[key] >= kRepeatedSentenceThreshold) {
        out.degenerate = true;
        out.reason = "repetition";
        return out;
      }
    }
    start = b;
  }

  // trailing-window duplication: 10-gram repeat ratio over the last 40%
  std::size_t tail_start = words.size() - words.size() * 2 / 5;
  std::size_t tail_len = words.size() - tail_start;
  if (tail_len >= 20) {
    std::unordered_map<std::uint64_t, std::size_t> grams;
    std::size_t total = 0;
    for (std::size_t i = tail_start; i + 10 <= words.size(); ++i) {
      std::string g;
      for (std::size_t j = 0; j < 10; ++j) {
        g += words[i + j];
        g += ' ';
      }
      ++grams[fnv1a64(g)];
      ++total;
    }
    if (total > 0) {
      double dup =
          1.0 - static_cast<double>(grams.size()) / static_cast<double>(total);
      if (dup > kTrailingDuplicationRatio) {
        out.degenerate = true;
        out.reason = "repetition";
        return out;
      }
    }
  }

  // wrong-language heuristic: stopword densities of the expected vs the
  // other language
  bool czech_corpus = corpus_language.rfind("cs", 0) == 0;
  double en = detail::stopword_density(words, detail::english_stopwords());
  double cs = detail::stopword_density(words, detail::czech_stopwords());
  double expected = czech_corpus ? cs : en;
  double other = czech_corpus ? en : cs;
  if (other > 0.05 && other > 2.0 * expected) {
    out.degenerate = true;
    out.reason = "wrong-language";
    return out;
  }
  return out;
}

struct JobLogger {
  std::function<void(const std::string&)> log = [](const std::string&) {};
};

// Executes one generation request with retry/backoff on transport
// failures, 429 and 5xx. The auth secret is read from the environment at
// call time and never passed to the logger.
inline Continuation run_job(const GenerationJob& job, const std::string& part1,
                            const EndpointProfile& endpoint,
                            const std::string& corpus_language,
                            const std::string& long_prompt_text = "",
                            const JobLogger& logger = {}) {
  PromptPayload payload =
      build_prompt(part1, job.config, long_prompt_text);

  std::string host = endpoint.base_url;
  httplib::Client client(host);
  client.set_connection_timeout(endpoint.timeout_seconds, 0);
  client.set_read_timeout(endpoint.timeout_seconds, 0);
  httplib::Headers headers;
  if (!endpoint.auth_env.empty()) {
    const char* secret = std::getenv(endpoint.auth_env.c_str());
    if (secret && *secret)
      headers.emplace("Authorization", std::string("Bearer ") + secret);
  }

  std::string body = payload.body.dump();
  int attempts = 0;
  std::string last_error;
  while (attempts <= job.retry_budget) {
    if (attempts > 0) {
      int delay = endpoint.backoff_base_ms << (attempts - 1);
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
    auto res = client.Post(payload.path, headers, body, "application/json");
    ++attempts;
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      logger.log(job.doc_id + "/" + job.config.config_id + ": " + last_error +
                 " (attempt " + std::to_string(attempts) + ")");
      continue;
    }
    if (res->status == 401 || res->status == 403)
      throw AuthError(job.doc_id + ": endpoint rejected credentials (HTTP " +
                      std::to_string(res->status) + ")");
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      logger.log(job.doc_id + "/" + job.config.config_id + ": " + last_error +
                 ", retrying (attempt " + std::to_string(attempts) + ")");
      continue;
    }
    if (res->status != 200)
      throw TransportError(job.doc_id + ": unexpected HTTP " +
                           std::to_string(res->status));
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(job.doc_id + ": bad response body: " + e.what());
    }
    std::string text;
    try {
      if (job.config.endpoint_kind == EndpointKind::chat)
        text = j.at("choices").at(0).at("message").at("content")
                   .get<std::string>();
      else
        text = j.at("choices").at(0).at("text").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw TransportError(job.doc_id + ": response lacks expected fields");
    }
    Continuation c;
    c.doc_id = job.doc_id;
    c.config_id = job.config.config_id;
    c.text = std::move(text);
    c.prompt_hash = payload.prompt_hash;
    c.model_name = job.config.model_name;
    c.temperature = job.config.temperature;
    c.retries = attempts - 1;
    {
      std::time_t now = std::time(nullptr);
      char buf[32];
      std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ",
                    std::gmtime(&now));
      c.timestamp = buf;
    }
    DegenerateCheck dc = detect_degenerate(c.text, corpus_language);
    c.degenerate = dc.degenerate;
    c.degenerate_reason = dc.reason;
    logger.log(job.doc_id + "/" + job.config.config_id + ": ok, " +
               std::to_string(count_words(c.text)) + " words" +
               (c.degenerate ? " [degenerate: " + c.degenerate_reason + "]"
                             : ""));
    return c;
  }
  throw TransportError(job.doc_id + ": retry budget exhausted (" +
                       last_error + ")");
}

struct RunSummary {
  std::size_t completed = 0;
  std::size_t cached = 0;
  std::size_t degenerate = 0;
  std::size_t failed = 0;
};

// Runs all jobs for one config against the corpus. Completed jobs are
// skipped unless `force`; store writes are serialized.
inline RunSummary run_jobs(CorpusStore& store, const ModelConfig& config,
                           const EndpointProfile& endpoint,
                           std::size_t concurrency, bool force,
                           const std::string& long_prompt_text = "",
                           const JobLogger& logger = {},
                           std::size_t max_retries = 3) {
  RunSummary summary;
  std::vector<const DocumentPair*> todo;
  for (const auto& pair : store.manifest().entries) {
    if (!force && store.has_continuation(config.config_id, pair.doc_id)) {
      ++summary.cached;
      continue;
    }
    todo.push_back(&pair);
  }
  std::mutex mtx;
  std::size_t next = 0;
  auto worker = [&]() {
    while (true) {
      const DocumentPair* pair = nullptr;
      {
        std::lock_guard lock(mtx);
        if (next >= todo.size()) return;
        pair = todo[next++];
      }
      GenerationJob job;
      job.doc_id = pair->doc_id;
      job.config = config;
      job.retry_budget = static_cast<int>(max_retries);
      try {
        std::string part1 = store.read_part1(*pair);
        Continuation c = run_job(job, part1, endpoint,
                                 store.manifest().language,
                                 long_prompt_text, logger);
        std::lock_guard lock(mtx);
        store.attach_continuation(*pair, c, force);
        ++summary.completed;
        if (c.degenerate) ++summary.degenerate;
      } catch (const Error& e) {
        std::lock_guard lock(mtx);
        ++summary.failed;
        logger.log(pair->doc_id + "/" + config.config_id +
                   ": failed: " + e.what());
      }
    }
  };
  if (concurrency <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < concurrency; ++t)
      threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }
  return summary;
}

}  // namespace styloshift
