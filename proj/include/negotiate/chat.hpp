#pragma once

// Chat-completion wire protocol and the HTTP backend.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "negotiate/error.hpp"
#include "negotiate/prompts.hpp"

namespace negotiate {

inline constexpr const char* kApiKeyEnv = "NEGOTIATE_API_KEY";

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.6;
};

struct ChatCompletion {
  std::string content;
  std::string reasoning;  // separate reasoning field, when the server provides one
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  /// Throws Error(backend_unavailable) when no completion can be obtained.
  virtual ChatCompletion complete(const ChatRequest& request) = 0;
};

inline nlohmann::json request_body(const ChatRequest& r) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : r.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  return {{"model", r.model}, {"messages", messages}, {"temperature", r.temperature}};
}

/// choices[0].message.content plus reasoning_content or reasoning.
inline ChatCompletion parse_completion(const std::string& body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw Error(ErrorKind::backend_unavailable, "malformed completion body");
  }
  const auto& msg = j["choices"][0].value("message", nlohmann::json::object());
  ChatCompletion c;
  if (msg.contains("content") && msg["content"].is_string()) c.content = msg["content"].get<std::string>();
  for (const char* key : {"reasoning_content", "reasoning"}) {
    if (msg.contains(key) && msg[key].is_string()) {
      c.reasoning = msg[key].get<std::string>();
      break;
    }
  }
  return c;
}

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds base_delay{500};
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
};

class HttpChatBackend : public ChatBackend {
 public:
  /// `endpoint_url` like http://host:port/v1/chat/completions.
  explicit HttpChatBackend(std::string endpoint_url, RetryPolicy retry = {},
                           std::chrono::seconds timeout = std::chrono::seconds(300))
      : retry_(std::move(retry)), timeout_(timeout) {
    const auto scheme = endpoint_url.find("://");
    if (scheme == std::string::npos) throw Error(ErrorKind::invalid_config, "endpoint_url needs a scheme");
    const auto path = endpoint_url.find('/', scheme + 3);
    origin_ = endpoint_url.substr(0, path);
    path_ = path == std::string::npos ? "/" : endpoint_url.substr(path);
  }

  ChatCompletion complete(const ChatRequest& request) override {
    const std::string body = request_body(request).dump();
    httplib::Headers headers;
    if (const char* key = std::getenv(kApiKeyEnv); key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);
    std::string last = "no attempt made";
    auto delay = retry_.base_delay;
    for (int attempt = 1; attempt <= retry_.attempts; ++attempt) {
      httplib::Client client(origin_);
      client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout_).count());
      client.set_read_timeout(timeout_.count());
      const auto res = client.Post(path_, headers, body, "application/json");
      if (!res) {
        last = "transport error: " + httplib::to_string(res.error());
      } else if (res->status == 200) {
        return parse_completion(res->body);
      } else if (res->status >= 400 && res->status < 500 && res->status != 408 && res->status != 429) {
        throw Error(ErrorKind::backend_unavailable, "HTTP " + std::to_string(res->status));
      } else {
        last = "HTTP " + std::to_string(res->status);
      }
      if (attempt < retry_.attempts) {
        retry_.sleep(delay);
        delay *= 2;
      }
    }
    throw Error(ErrorKind::backend_unavailable,
                "chat backend unavailable after " + std::to_string(retry_.attempts) + " attempts (" + last + ")");
  }

 private:
  std::string origin_;
  std::string path_;
  RetryPolicy retry_;
  std::chrono::seconds timeout_;
};

}  // namespace negotiate
