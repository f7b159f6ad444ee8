#include <chrono>
#include <cstdlib>
#include <regex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "got/error.hpp"
#include "got/llm_backend.hpp"

namespace got {

namespace {

struct url_parts {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

url_parts split_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw ConfigError("invalid backend url '" + url + "'");
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

bool transient(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)) {
  split_url(config_.url);
  if (config_.retry_budget < 0) throw ConfigError("retry budget must be non-negative");
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
  }
}

CompletionResponse HttpBackend::do_query(const CompletionRequest& request) {
  auto url = split_url(config_.url);
  nlohmann::json body;
  body["model"] = config_.model;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : request.messages) body["messages"].push_back({{"role", m.role}, {"content", m.text}});
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  body["n"] = request.n;
  if (!request.stop.empty()) body["stop"] = request.stop;
  std::string payload = body.dump();

  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  if (!config_.organization.empty()) headers.emplace("OpenAI-Organization", config_.organization);

  std::string last_error;
  for (int attempt = 0; attempt <= config_.retry_budget; ++attempt) {
    if (attempt > 0) {
      auto delay = std::chrono::milliseconds(static_cast<std::int64_t>(config_.backoff_base_ms) << (attempt - 1));
      std::this_thread::sleep_for(delay);
    }
    httplib::Client client(url.origin);
    client.set_connection_timeout(config_.timeout_s, 0);
    client.set_read_timeout(config_.timeout_s, 0);
    client.set_write_timeout(config_.timeout_s, 0);
    auto res = client.Post(url.path, headers, payload, "application/json");
    if (!res) {
      last_error = "connection error: " + httplib::to_string(res.error());
      continue;
    }
    if (transient(res->status)) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw BackendFailure("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array()) {
      throw BackendFailure("malformed completion response");
    }
    CompletionResponse out;
    for (const auto& c : j["choices"]) {
      if (c.contains("message") && c["message"].contains("content") && c["message"]["content"].is_string()) {
        out.texts.push_back(c["message"]["content"].get<std::string>());
      }
    }
    if (out.texts.size() < static_cast<std::size_t>(request.n)) {
      throw ContractViolation("provider returned " + std::to_string(out.texts.size()) + " texts, expected " +
                              std::to_string(request.n));
    }
    const auto& usage = j.value("usage", nlohmann::json::object());
    if (usage.contains("prompt_tokens") && usage.contains("completion_tokens")) {
      out.prompt_tokens = usage["prompt_tokens"].get<std::int64_t>();
      out.response_tokens = usage["completion_tokens"].get<std::int64_t>();
    } else {
      out.prompt_tokens = count_tokens(request.prompt());
      for (const auto& t : out.texts) out.response_tokens += count_tokens(t);
    }
    return out;
  }
  throw BackendFailure("retry budget exhausted (" + last_error + ")");
}

}  // namespace got
