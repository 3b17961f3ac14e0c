#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "roadmind/planner.hpp"

namespace roadmind {

struct RequestHandle {
  RequestId request_id = 0;
  AgentId agent_id = 0;
  double submitted_at = 0.0;
  double deadline = 0.0;

  friend bool operator==(const RequestHandle&, const RequestHandle&) = default;
};

/// A backend result. `ready_at` is the simulation time at which it may be
/// delivered; wall-clock backends post negative infinity ("now").
struct Completion {
  RequestId request_id = 0;
  PlanOutcome outcome;
  double ready_at = 0.0;
};

/// Thread-safe staging area for backend results.
class CompletionMailbox {
 public:
  void post(Completion completion) {
    std::lock_guard lock(mutex_);
    items_.push_back(std::move(completion));
  }

  std::vector<Completion> take_all() {
    std::lock_guard lock(mutex_);
    std::vector<Completion> out;
    out.swap(items_);
    return out;
  }

 private:
  std::mutex mutex_;
  std::vector<Completion> items_;
};

class PlannerBackend {
 public:
  virtual ~PlannerBackend() = default;

  /// Starts work on `request` at simulation time `now`. Must not block on
  /// the planner; the result (if any) goes to `mailbox`, which outlives any
  /// worker holding a copy of the pointer.
  virtual void dispatch(const PlanRequest& request, double now,
                        const std::shared_ptr<CompletionMailbox>& mailbox) = 0;
};

struct ManagerConfig {
  std::size_t max_in_flight = 4;
  std::size_t max_queue = 256;  // bound on queued + in-flight
  double timeout = 10.0;
};

struct ManagerStats {
  std::size_t submitted = 0;
  std::size_t queued = 0;
  std::size_t in_flight = 0;
  std::size_t completed = 0;
  std::size_t timed_out = 0;
  std::size_t cancelled = 0;
  std::size_t rejected = 0;
  std::size_t stale_dropped = 0;
  std::size_t cancel_noops = 0;
};

/// Non-blocking bridge between the simulation loop and a planner backend.
///
/// submit() and cancel() are called only from the loop. Backends may post
/// completions from any thread; they are picked up and delivered only in
/// drain_completions(). Every handle resolves exactly once: completed,
/// timed out, cancelled or rejected.
class RequestManager {
 public:
  RequestManager(std::shared_ptr<PlannerBackend> backend, ManagerConfig config = {})
      : backend_(std::move(backend)), config_(config) {}

  RequestManager(const RequestManager&) = delete;
  RequestManager& operator=(const RequestManager&) = delete;

  const ManagerConfig& config() const noexcept { return config_; }

  RequestId next_request_id() noexcept { return next_id_++; }

  /// Enqueues the request (assigning an id if it has none) and dispatches it
  /// right away when a slot is free. A full queue resolves the handle as a
  /// QueueFull failure, delivered on the next drain.
  RequestHandle submit(PlanRequest request, double now) {
    if (request.request_id == 0) request.request_id = next_request_id();
    request.issued_at = now;
    RequestHandle handle{request.request_id, request.agent_id, now, now + config_.timeout};
    ++stats_.submitted;

    if (live_.size() >= config_.max_queue) {
      ++stats_.rejected;
      outbox_.push_back({request.request_id, request.agent_id, request.origin,
                         PlanFailure{FailureReason::QueueFull, "request queue is full"}, 0.0});
      return handle;
    }

    live_.emplace(request.request_id, Entry{handle, std::move(request), Status::Queued, now});
    queue_.push_back(handle.request_id);
    ++stats_.queued;
    pump(now);
    return handle;
  }

  /// Everything that became deliverable by `now`: backend results, timeouts
  /// and rejections. Frees in-flight slots and dispatches queued work.
  std::vector<PlanResponse> drain_completions(double now) {
    for (auto& c : mailbox_->take_all()) {
      double key = c.ready_at;
      ready_.emplace(std::make_pair(key, c.request_id), std::move(c));
    }

    std::vector<PlanResponse> out;
    out.swap(outbox_);

    while (!ready_.empty() && ready_.begin()->first.first <= now + kEps) {
      Completion c = std::move(ready_.begin()->second);
      ready_.erase(ready_.begin());
      auto it = live_.find(c.request_id);
      if (it == live_.end() || it->second.status != Status::InFlight) {
        ++stats_.stale_dropped;
        continue;
      }
      const Entry& entry = it->second;
      out.push_back({c.request_id, entry.handle.agent_id, entry.request.origin, std::move(c.outcome),
                     std::max(0.0, now - entry.handle.submitted_at)});
      --stats_.in_flight;
      ++stats_.completed;
      live_.erase(it);
    }

    for (auto it = live_.begin(); it != live_.end();) {
      const Entry& entry = it->second;
      if (now + kEps >= entry.handle.deadline) {
        out.push_back({it->first, entry.handle.agent_id, entry.request.origin,
                       PlanFailure{FailureReason::Timeout, "planner did not answer before the deadline"},
                       now - entry.handle.submitted_at});
        release(it->first, entry.status);
        ++stats_.timed_out;
        it = live_.erase(it);
      } else {
        ++it;
      }
    }

    pump(now);
    return out;
  }

  /// Resolves an unresolved handle as cancelled. Returns false (and counts a
  /// no-op) when the handle was already resolved.
  bool cancel(const RequestHandle& handle) {
    auto it = live_.find(handle.request_id);
    if (it == live_.end()) {
      ++stats_.cancel_noops;
      return false;
    }
    release(it->first, it->second.status);
    live_.erase(it);
    ++stats_.cancelled;
    return true;
  }

  bool is_unresolved(RequestId id) const { return live_.count(id) > 0; }

  std::size_t unresolved() const noexcept { return live_.size() + outbox_.size(); }

  ManagerStats stats() const noexcept { return stats_; }

 private:
  static constexpr double kEps = 1e-9;

  enum class Status { Queued, InFlight };

  struct Entry {
    RequestHandle handle;
    PlanRequest request;
    Status status;
    double dispatched_at;
  };

  void release(RequestId id, Status status) {
    if (status == Status::InFlight) {
      --stats_.in_flight;
    } else {
      queue_.erase(std::remove(queue_.begin(), queue_.end(), id), queue_.end());
      --stats_.queued;
    }
  }

  void pump(double now) {
    while (stats_.in_flight < config_.max_in_flight && !queue_.empty()) {
      RequestId id = queue_.front();
      queue_.pop_front();
      Entry& entry = live_.at(id);
      entry.status = Status::InFlight;
      entry.dispatched_at = now;
      --stats_.queued;
      ++stats_.in_flight;
      backend_->dispatch(entry.request, now, mailbox_);
    }
  }

  std::shared_ptr<PlannerBackend> backend_;
  ManagerConfig config_;
  ManagerStats stats_;
  RequestId next_id_ = 1;
  std::map<RequestId, Entry> live_;
  std::deque<RequestId> queue_;
  std::multimap<std::pair<double, RequestId>, Completion> ready_;
  std::vector<PlanResponse> outbox_;
  std::shared_ptr<CompletionMailbox> mailbox_ = std::make_shared<CompletionMailbox>();
};

}  // namespace roadmind
