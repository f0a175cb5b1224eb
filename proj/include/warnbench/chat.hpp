#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "warnbench/http.hpp"

namespace warnbench {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatConfig {
  HttpEndpoint endpoint;
  std::string model = "gpt-4o-mini";
  double temperature = 0.0;
  int max_tokens = 1500;
};

ChatConfig chat_config_from_json(const nlohmann::json& j);
nlohmann::json chat_config_to_json(const ChatConfig& c);

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  // Returns the assistant message content. Throws BackendError.
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

// OpenAI-compatible /chat/completions client.
class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(ChatConfig config);

  std::string complete(const std::vector<ChatMessage>& messages) override;

  nlohmann::json build_payload(const std::vector<ChatMessage>& messages) const;

  const ChatConfig& config() const { return config_; }

 private:
  ChatConfig config_;
  JsonPoster poster_;
};

}  // namespace warnbench
