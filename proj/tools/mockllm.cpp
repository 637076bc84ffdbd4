// Deterministic mock LLM endpoint for tests and pipeline dry runs.
// Serves the chat and completion JSON shapes; the continuation text is a
// deterministic function of the prompt hash, so reruns are reproducible.

#include <atomic>
#include <csignal>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "styloshift/common.hpp"

namespace {

const std::vector<std::string>& paragraph_pool() {
  static const std::vector<std::string> pool = {
      "The morning light fell across the harbour in long grey bands, and "
      "the fishermen worked without speaking, coiling their lines with the "
      "patience of men who had done the same thing every day for thirty "
      "years. A gull settled on the rail and watched them, head tilted, as "
      "if it expected some change in the routine that never came.",
      "She considered the letter for a long while before answering it. The "
      "questions it raised were not the kind that could be settled by a "
      "quick reply, and she knew from experience that a hasty word, once "
      "written, had a way of outliving every careful correction that "
      "followed it. So she set the pen down and walked to the window.",
      "The committee reviewed the proposal in detail and found that the "
      "projected costs had been understated by a considerable margin. "
      "Several members argued that the estimates should be revised before "
      "any public statement was made, while others maintained that delay "
      "would only compound the difficulty and erode whatever confidence "
      "remained.",
      "He remembered the house as larger than it was, the garden wilder, "
      "the summers longer. Returning after twenty years he found the gate "
      "rusted but standing, the path narrower than memory allowed, and an "
      "old dog asleep on the step who lifted its head, decided he was no "
      "threat, and went back to its dream.",
      "Recent measurements suggest that the effect, though small, is "
      "consistent across every sample examined so far. The team repeated "
      "the procedure under three different conditions and obtained the "
      "same pattern each time, which argues against an artefact of the "
      "instrument and in favour of a genuine property of the material "
      "itself.",
      "It rained all that week, a thin persistent rain that turned the "
      "lanes to mud and kept the children indoors, where they invented "
      "elaborate games involving the stairs, two blankets, and an atlas of "
      "the world. By Friday the invented countries had treaties, flags, "
      "and a small war nobody could quite explain."};
  return pool;
}

std::string make_continuation(const std::string& prompt) {
  std::uint64_t h = styloshift::fnv1a64(prompt);
  const auto& pool = paragraph_pool();
  std::string out;
  for (int k = 0; k < 5; ++k) {
    if (k > 0) out += "\n\n";
    out += pool[(h >> (8 * k)) % pool.size()];
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mock LLM endpoint"};
  int port = 8080;
  int fail_first = 0;  // respond 429 to the first N requests
  app.add_option("--port", port, "listen port");
  app.add_option("--fail-first", fail_first,
                 "return HTTP 429 for the first N requests");
  CLI11_PARSE(app, argc, argv);

  std::atomic<int> request_no{0};
  httplib::Server server;

  auto handle = [&](const httplib::Request& req, httplib::Response& res,
                    bool chat) {
    int n = ++request_no;
    if (n <= fail_first) {
      res.status = 429;
      res.set_content("{\"error\":\"rate limited\"}", "application/json");
      return;
    }
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      res.status = 400;
      return;
    }
    std::string prompt;
    if (chat) {
      for (const auto& m : body.value("messages", nlohmann::json::array()))
        prompt += m.value("content", "");
    } else {
      prompt = body.value("prompt", "");
    }
    std::string text = make_continuation(prompt);
    nlohmann::json out;
    out["model"] = body.value("model", "mock");
    if (chat)
      out["choices"] = {{{"message", {{"role", "assistant"},
                                      {"content", text}}}}};
    else
      out["choices"] = {{{"text", text}}};
    res.set_content(out.dump(), "application/json");
  };

  server.Post("/v1/chat/completions",
              [&](const httplib::Request& req, httplib::Response& res) {
                handle(req, res, true);
              });
  server.Post("/v1/completions",
              [&](const httplib::Request& req, httplib::Response& res) {
                handle(req, res, false);
              });
  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });

  std::cout << "mockllm listening on port " << port << "\n";
  if (!server.listen("127.0.0.1", port)) {
    std::cerr << "failed to bind port " << port << "\n";
    return 1;
  }
  return 0;
}
