#pragma once

#include <chrono>
#include <future>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "roadmind/request_manager.hpp"

namespace roadmind {

struct ChatSettings {
  std::string base_url = "http://127.0.0.1:8000/v1";
  std::string model = "qwen3-14b";
  double timeout_seconds = 30.0;
  double temperature = 0.0;
};

enum class ChatStatus { Ok, Unreachable, HttpError, BadBody };

struct ChatResult {
  ChatStatus status = ChatStatus::Ok;
  std::string text;  // assistant content on success, diagnostics otherwise
  double seconds = 0.0;

  bool ok() const noexcept { return status == ChatStatus::Ok; }
};

inline constexpr const char* kSystemPrompt =
    "You are the route planner of a vehicle in a road network. Reason about the map and the live "
    "congestion, then give the route as a JSON array of node ids.";

/// Minimal client for OpenAI-compatible `POST {base}/chat/completions`.
class ChatClient {
 public:
  explicit ChatClient(ChatSettings settings) : settings_(std::move(settings)) { split_url(); }

  const ChatSettings& settings() const noexcept { return settings_; }
  const std::string& endpoint_path() const noexcept { return path_; }

  ChatResult complete(const std::string& prompt) const {
    auto started = std::chrono::steady_clock::now();
    auto elapsed = [&] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    };

    httplib::Client client(host_);
    auto timeout = std::chrono::duration<double>(settings_.timeout_seconds);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

    nlohmann::json body = {
        {"model", settings_.model},
        {"temperature", settings_.temperature},
        {"messages",
         {{{"role", "system"}, {"content", kSystemPrompt}}, {{"role", "user"}, {"content", prompt}}}},
    };
    auto res = client.Post(path_, body.dump(), "application/json");
    if (!res) {
      return {ChatStatus::Unreachable,
              fmt::format("cannot reach {}{}: {}", host_, path_, httplib::to_string(res.error())), elapsed()};
    }
    if (res->status != 200) {
      return {ChatStatus::HttpError, fmt::format("HTTP {}: {}", res->status, res->body.substr(0, 200)), elapsed()};
    }
    auto reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty()) {
      return {ChatStatus::BadBody, "response has no choices: " + res->body.substr(0, 200), elapsed()};
    }
    const auto& message = reply["choices"][0].value("message", nlohmann::json::object());
    if (!message.contains("content") || !message["content"].is_string()) {
      return {ChatStatus::BadBody, "response has no message content", elapsed()};
    }
    return {ChatStatus::Ok, message["content"].get<std::string>(), elapsed()};
  }

 private:
  void split_url() {
    const std::string& url = settings_.base_url;
    auto scheme = url.find("://");
    auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    host_ = url.substr(0, slash);
    std::string prefix = slash == std::string::npos ? "" : url.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    const std::string suffix = "/chat/completions";
    if (prefix.size() >= suffix.size() && prefix.compare(prefix.size() - suffix.size(), suffix.size(), suffix) == 0) {
      path_ = prefix;
    } else {
      path_ = prefix + suffix;
    }
  }

  ChatSettings settings_;
  std::string host_;
  std::string path_;
};

/// Live model backend. Each request runs on a worker thread; the answer is
/// parsed (structure only) and posted for immediate delivery.
class LlmBackend : public PlannerBackend {
 public:
  LlmBackend(std::shared_ptr<const RoadGraph> graph, ChatSettings settings)
      : graph_(std::move(graph)), client_(std::move(settings)) {}

  ~LlmBackend() override {
    for (auto& w : workers_) w.wait();
  }

  void dispatch(const PlanRequest& request, double,
                const std::shared_ptr<CompletionMailbox>& mailbox) override {
    std::erase_if(workers_, [](const std::future<void>& f) {
      return f.wait_for(std::chrono::seconds(0)) == std::future_status::ready;
    });
    std::string prompt = build_prompt(*graph_, request.snapshot, request.origin, request.destination);
    workers_.push_back(std::async(std::launch::async, [client = client_, prompt = std::move(prompt),
                                                       id = request.request_id, mailbox] {
      ChatResult reply = client.complete(prompt);
      PlanOutcome outcome;
      if (!reply.ok()) {
        outcome = PlanFailure{FailureReason::BackendError, reply.text};
      } else if (auto parsed = parse_path_from_text(reply.text); std::holds_alternative<Path>(parsed)) {
        outcome = std::get<Path>(std::move(parsed));
      } else {
        outcome = PlanFailure{FailureReason::Malformed, std::get<ParseError>(parsed).describe()};
      }
      mailbox->post({id, std::move(outcome), -std::numeric_limits<double>::infinity()});
    }));
  }

 private:
  std::shared_ptr<const RoadGraph> graph_;
  ChatClient client_;
  std::vector<std::future<void>> workers_;
};

}  // namespace roadmind
