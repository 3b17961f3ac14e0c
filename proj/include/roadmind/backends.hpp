#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>

#include "roadmind/request_manager.hpp"

namespace roadmind {

enum class RoutePolicy { Static, CongestionAware };

/// Deterministic planner on simulation time: computes the route immediately
/// and stages it for delivery after a sampled latency.
class OracleBackend : public PlannerBackend {
 public:
  OracleBackend(std::shared_ptr<const RoadGraph> graph, LatencyModel latency,
                RoutePolicy policy = RoutePolicy::CongestionAware)
      : graph_(std::move(graph)), latency_(latency), policy_(policy) {}

  void dispatch(const PlanRequest& request, double now,
                const std::shared_ptr<CompletionMailbox>& mailbox) override {
    double delay = sample_latency(latency_, draws_++);
    PlanOutcome outcome;
    try {
      outcome = policy_ == RoutePolicy::Static
                    ? plan_static(*graph_, request.origin, request.destination)
                    : plan_congestion_aware(*graph_, request.snapshot, request.origin, request.destination);
    } catch (const GraphError& e) {
      outcome = PlanFailure{FailureReason::Unreachable, e.what()};
    }
    mailbox->post({request.request_id, std::move(outcome), now + delay});
  }

 private:
  std::shared_ptr<const RoadGraph> graph_;
  LatencyModel latency_;
  RoutePolicy policy_;
  std::uint64_t draws_ = 0;
};

/// Accepts every request and never answers.
class SilentBackend : public PlannerBackend {
 public:
  void dispatch(const PlanRequest&, double, const std::shared_ptr<CompletionMailbox>&) override { ++dispatched_; }

  std::size_t dispatched() const noexcept { return dispatched_; }

 private:
  std::size_t dispatched_ = 0;
};

/// Answers with model-style free text produced by a callback, run through
/// parse_path_from_text exactly as a live reply would be.
class ScriptedTextBackend : public PlannerBackend {
 public:
  using Script = std::function<std::string(const PlanRequest&, std::uint64_t draw)>;

  ScriptedTextBackend(Script script, LatencyModel latency) : script_(std::move(script)), latency_(latency) {}

  void dispatch(const PlanRequest& request, double now,
                const std::shared_ptr<CompletionMailbox>& mailbox) override {
    std::uint64_t draw = draws_++;
    std::string text = script_(request, draw);
    PlanOutcome outcome;
    auto parsed = parse_path_from_text(text);
    if (auto* path = std::get_if<Path>(&parsed)) {
      outcome = std::move(*path);
    } else {
      outcome = PlanFailure{FailureReason::Malformed, std::get<ParseError>(parsed).describe()};
    }
    mailbox->post({request.request_id, std::move(outcome), now + sample_latency(latency_, draw)});
  }

 private:
  Script script_;
  LatencyModel latency_;
  std::uint64_t draws_ = 0;
};

}  // namespace roadmind
