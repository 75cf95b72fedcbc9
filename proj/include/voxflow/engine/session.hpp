#pragma once

#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "voxflow/engine/executor.hpp"

namespace voxflow::engine {

// One editable workflow plus its node states and execution. Mutations and
// execution are mutually exclusive (Busy while a run is in flight). Every
// structural mutation bumps the revision; callers that pass an expected
// revision get RevisionConflict when it is out of date.
class Session {
public:
  Session(Workflow w, std::shared_ptr<ArtifactStore> store, ExecOptions opt = {});
  ~Session();
  Session(const Session &) = delete;
  Session &operator=(const Session &) = delete;

  std::uint64_t revision() const;
  Workflow workflow() const;
  std::map<std::string, NodeState> states() const;
  NodeState state(const std::string &id) const;
  ArtifactStore &store() const { return *store_; }

  using Rev = std::optional<std::uint64_t>;
  std::string add_node(const std::string &type_name, const Json &params = Json::object(),
                       std::array<double, 2> position = {0, 0}, Rev expected = {});
  Edge connect(const PortRef &from, const PortRef &to, Rev expected = {});
  void disconnect(const PortRef &to, Rev expected = {});
  void remove_node(const std::string &id, Rev expected = {});
  void set_params(const std::string &id, const Json &params, Rev expected = {});
  void set_position(const std::string &id, std::array<double, 2> position, Rev expected = {});
  void replace(Workflow w, Rev expected = {}); // unchanged content hashes keep their state
  void paste_params(const std::string &from, const std::string &to, Rev expected = {}); // same type only

  // Starts a background run; Busy when one is already in flight.
  void start(const Scope &scope);
  ExecutionReport run(const Scope &scope); // start + wait
  void wait();
  void cancel(); // NotRunning when idle
  bool running() const;
  std::optional<ExecutionReport> last_report() const;
  std::optional<std::string> last_error() const; // run-level failure such as ValidationFailed

  // Events with seq > after; blocks up to `timeout` when none are pending.
  // The log keeps the newest kEventLogSize events; oldest_event_seq() tells
  // a slow reader that it missed some and must resync from states().
  std::vector<Event> events_since(std::uint64_t after, std::chrono::milliseconds timeout = {}) const;
  std::uint64_t oldest_event_seq() const;
  static constexpr std::size_t kEventLogSize = 4096;

private:
  void check_revision(Rev expected) const;
  void check_idle() const;
  void publish(Event e);
  void mark_stale(const std::vector<std::string> &ids);
  void after_mutation(std::vector<std::string> stale_roots);

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  Workflow w_;
  std::uint64_t revision_ = 1;
  std::shared_ptr<ArtifactStore> store_;
  ExecOptions opt_;
  std::map<std::string, NodeState> states_;
  std::deque<Event> events_;
  std::uint64_t seq_ = 0;
  bool running_ = false;
  std::shared_ptr<CancelFlag> cancel_;
  std::thread worker_;
  std::optional<ExecutionReport> report_;
  std::optional<std::string> error_;
  std::exception_ptr exception_;
};

} // namespace voxflow::engine
