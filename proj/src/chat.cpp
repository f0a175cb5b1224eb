#include "warnbench/chat.hpp"

#include "warnbench/error.hpp"

namespace warnbench {

ChatConfig chat_config_from_json(const nlohmann::json& j) {
  ChatConfig c;
  c.endpoint.url = j.at("endpoint").get<std::string>();
  c.endpoint.api_key_env = j.value("api_key_env", std::string{});
  c.endpoint.timeout =
      std::chrono::milliseconds(static_cast<long long>(j.value("timeout_s", 30.0) * 1000));
  c.endpoint.max_in_flight = j.value("max_in_flight", 4);
  c.model = j.value("model", c.model);
  c.temperature = j.value("temperature", c.temperature);
  c.max_tokens = j.value("max_tokens", c.max_tokens);
  return c;
}

nlohmann::json chat_config_to_json(const ChatConfig& c) {
  return {{"endpoint", c.endpoint.url},
          {"api_key_env", c.endpoint.api_key_env},
          {"timeout_s", static_cast<double>(c.endpoint.timeout.count()) / 1000.0},
          {"max_in_flight", c.endpoint.max_in_flight},
          {"model", c.model},
          {"temperature", c.temperature},
          {"max_tokens", c.max_tokens}};
}

HttpChatClient::HttpChatClient(ChatConfig config)
    : config_(std::move(config)), poster_(config_.endpoint) {}

nlohmann::json HttpChatClient::build_payload(
    const std::vector<ChatMessage>& messages) const {
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : messages) {
    msgs.push_back({{"role", m.role}, {"content", m.content}});
  }
  return {{"model", config_.model},
          {"messages", std::move(msgs)},
          {"temperature", config_.temperature},
          {"max_tokens", config_.max_tokens}};
}

std::string HttpChatClient::complete(const std::vector<ChatMessage>& messages) {
  auto response = poster_.post(build_payload(messages));
  const auto choices = response.find("choices");
  if (choices == response.end() || !choices->is_array() || choices->empty()) {
    throw BackendError("chat completion response has no choices", false);
  }
  const auto& msg = (*choices)[0].value("message", nlohmann::json::object());
  auto content = msg.find("content");
  if (content == msg.end() || !content->is_string()) {
    throw BackendError("chat completion response has no message content", false);
  }
  return content->get<std::string>();
}

}  // namespace warnbench
