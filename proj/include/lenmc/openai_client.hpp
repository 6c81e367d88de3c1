#pragma once

/**
 * OpenAI-compatible chat-completions client over HTTP.
 *
 * Transient failures (connect errors, timeouts, HTTP 429/5xx) are retried with
 * jittered exponential backoff under a bounded budget. The API key is read
 * from an environment variable only.
 */

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "lenmc/llm.hpp"

namespace lenmc {

struct OpenAiClientConfig {
  std::string base_url = "http://localhost:8000";  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model = "gpt-3.5-turbo";
  std::string api_key_env = "LENMC_API_KEY";
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{1000};
  std::chrono::seconds request_timeout{120};
  int in_flight_limit = 4;
};

class OpenAiClient : public ChatProvider {
 public:
  explicit OpenAiClient(OpenAiClientConfig config)
      : config_(std::move(config)), backoff_rng_(std::random_device{}()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) {
      api_key_ = key;
    }
  }

  CompletionResult complete(const Conversation& conversation,
                            const GenerationParams& params) override {
    validate_conversation(conversation);
    const std::string body = request_body(conversation, params);

    std::chrono::milliseconds backoff = config_.initial_backoff;
    int attempt = 0;
    for (;;) {
      auto outcome = post_once(body);
      if (outcome.result) return std::move(*outcome.result);
      if (!outcome.retryable) throw ProviderError(outcome.error);
      if (attempt >= config_.max_retries)
        throw BudgetExhausted("retries spent: last error: " + outcome.error);
      std::this_thread::sleep_for(jitter(backoff));
      backoff *= 2;
      ++attempt;
    }
  }

  std::vector<BatchSlot> complete_batch(
      const std::vector<Conversation>& conversations,
      const std::vector<GenerationParams>& params) override {
    if (conversations.empty())
      throw std::invalid_argument("complete_batch: empty conversation list");
    if (params.size() != conversations.size())
      throw std::invalid_argument("complete_batch: params size mismatch");
    std::vector<BatchSlot> out(conversations.size());
    std::atomic<std::size_t> next{0};
    const std::size_t workers = static_cast<std::size_t>(
        std::max(1, std::min<int>(config_.in_flight_limit,
                                  static_cast<int>(conversations.size()))));
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= conversations.size()) return;
          try {
            out[i].result = complete(conversations[i], params[i]);
          } catch (const std::exception& e) {
            out[i].error = e.what();
          }
        }
      });
    }
    for (auto& t : threads) t.join();
    return out;
  }

 private:
  struct Outcome {
    std::optional<CompletionResult> result;
    bool retryable = false;
    std::string error;
  };

  std::string request_body(const Conversation& conversation,
                           const GenerationParams& params) const {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : conversation) {
      const char* role = m.role == Role::System   ? "system"
                         : m.role == Role::User   ? "user"
                                                  : "assistant";
      messages.push_back({{"role", role}, {"content", m.content}});
    }
    nlohmann::json body = {
        {"model", config_.model},
        {"messages", std::move(messages)},
        {"temperature", params.temperature},
        {"top_p", params.top_p},
        {"max_tokens", params.max_new_tokens},
        {"n", 1},
    };
    // Common extensions accepted by OpenAI-compatible inference servers.
    if (params.top_k) body["top_k"] = *params.top_k;
    if (params.repetition_penalty != 1.0)
      body["repetition_penalty"] = params.repetition_penalty;
    if (params.seed) body["seed"] = *params.seed;
    return body.dump();
  }

  Outcome post_once(const std::string& body) {
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.request_timeout);
    client.set_read_timeout(config_.request_timeout);
    httplib::Headers headers;
    if (!api_key_.empty())
      headers.emplace("Authorization", "Bearer " + api_key_);

    auto res = client.Post(config_.path, headers, body, "application/json");
    Outcome out;
    if (!res) {
      out.retryable = true;
      out.error = "transport error: " + httplib::to_string(res.error());
      return out;
    }
    if (res->status == 429 || res->status >= 500) {
      out.retryable = true;
      out.error = "HTTP " + std::to_string(res->status);
      return out;
    }
    if (res->status != 200) {
      out.error = "HTTP " + std::to_string(res->status) + ": " + res->body;
      return out;
    }
    try {
      out.result = parse_response(res->body);
    } catch (const MalformedResponse&) {
      throw;
    }
    return out;
  }

  static CompletionResult parse_response(const std::string& body) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception&) {
      throw MalformedResponse("response is not valid JSON");
    }
    if (!j.contains("choices") || !j["choices"].is_array() ||
        j["choices"].empty())
      throw MalformedResponse("response has no choices");
    const auto& choice = j["choices"][0];
    if (!choice.contains("message") || !choice["message"].contains("content") ||
        !choice["message"]["content"].is_string())
      throw MalformedResponse("choice has no assistant content");
    CompletionResult r;
    r.text = choice["message"]["content"].get<std::string>();
    std::string reason = choice.value("finish_reason", "stop");
    r.finish_reason = reason == "stop"     ? FinishReason::Stop
                      : reason == "length" ? FinishReason::Length
                                           : FinishReason::Other;
    r.raw_provider_payload = body;
    return r;
  }

  std::chrono::milliseconds jitter(std::chrono::milliseconds base) {
    std::lock_guard<std::mutex> lock(rng_mutex_);
    std::uniform_real_distribution<double> d(0.5, 1.5);
    return std::chrono::milliseconds(
        static_cast<long long>(static_cast<double>(base.count()) *
                               d(backoff_rng_)));
  }

  OpenAiClientConfig config_;
  std::string api_key_;
  std::mutex rng_mutex_;
  std::mt19937_64 backoff_rng_;
};

}  // namespace lenmc
