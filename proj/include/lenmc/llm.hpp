#pragma once

/**
 * Chat-completion provider abstraction.
 *
 * One interface serves both the generator and the judge role. Implementations
 * must be safe to call from multiple concurrent chains, or cheaply cloneable
 * per chain.
 */

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lenmc/errors.hpp"

namespace lenmc {

enum class Role { System, User, Assistant };

struct ChatMessage {
  Role role = Role::User;
  std::string content;
};

inline ChatMessage system_msg(std::string content) {
  return {Role::System, std::move(content)};
}
inline ChatMessage user_msg(std::string content) {
  return {Role::User, std::move(content)};
}
inline ChatMessage assistant_msg(std::string content) {
  return {Role::Assistant, std::move(content)};
}

using Conversation = std::vector<ChatMessage>;

struct GenerationParams {
  double temperature = 0.6;
  double top_p = 0.9;
  std::optional<int> top_k = 50;
  double repetition_penalty = 1.0;
  int max_new_tokens = 1024;
  std::optional<std::uint64_t> seed;
};

enum class FinishReason { Stop, Length, Other };

struct CompletionResult {
  std::string text;
  FinishReason finish_reason = FinishReason::Stop;
  std::string raw_provider_payload;
};

// Per-position slot for batch completion: either a result or an error message.
struct BatchSlot {
  std::optional<CompletionResult> result;
  std::string error;

  bool ok() const { return result.has_value(); }
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;

  // Returns exactly one assistant completion for the conversation, which must
  // end with a user turn.
  virtual CompletionResult complete(const Conversation& conversation,
                                    const GenerationParams& params) = 0;

  // Positionally aligned results; independent failures reported per slot.
  // Default implementation is sequential; HTTP providers may parallelize up
  // to an in-flight limit.
  virtual std::vector<BatchSlot> complete_batch(
      const std::vector<Conversation>& conversations,
      const std::vector<GenerationParams>& params) {
    if (conversations.empty())
      throw std::invalid_argument("complete_batch: empty conversation list");
    if (params.size() != conversations.size())
      throw std::invalid_argument("complete_batch: params size mismatch");
    std::vector<BatchSlot> out(conversations.size());
    for (std::size_t i = 0; i < conversations.size(); ++i) {
      try {
        out[i].result = complete(conversations[i], params[i]);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
    return out;
  }
};

inline void validate_conversation(const Conversation& conversation) {
  if (conversation.empty() || conversation.back().role != Role::User)
    throw std::invalid_argument("conversation must end with a user turn");
  for (const auto& m : conversation) {
    if (m.role != Role::System && m.content.empty())
      throw std::invalid_argument("user/assistant turns must be non-empty");
  }
}

}  // namespace lenmc
