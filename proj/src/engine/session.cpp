#include "voxflow/engine/session.hpp"

#include "voxflow/core/error.hpp"

namespace voxflow::engine {

Session::Session(Workflow w, std::shared_ptr<ArtifactStore> store, ExecOptions opt)
    : w_(std::move(w)), store_(std::move(store)), opt_(std::move(opt)) {
  for (const auto &n : w_.nodes) states_[n.id];
}

Session::~Session() {
  {
    std::lock_guard lk(mu_);
    if (cancel_) cancel_->request();
  }
  if (worker_.joinable()) worker_.join();
}

std::uint64_t Session::revision() const {
  std::lock_guard lk(mu_);
  return revision_;
}

Workflow Session::workflow() const {
  std::lock_guard lk(mu_);
  return w_;
}

std::map<std::string, NodeState> Session::states() const {
  std::lock_guard lk(mu_);
  return states_;
}

NodeState Session::state(const std::string &id) const {
  std::lock_guard lk(mu_);
  w_.node(id);
  auto it = states_.find(id);
  return it == states_.end() ? NodeState{} : it->second;
}

void Session::check_revision(Rev expected) const {
  if (expected && *expected != revision_)
    fail("RevisionConflict",
         "expected revision " + std::to_string(*expected) + ", current is " + std::to_string(revision_));
}

void Session::check_idle() const {
  if (running_) fail("Busy", "workflow is executing");
}

void Session::publish(Event e) {
  e.seq = ++seq_;
  events_.push_back(std::move(e));
  if (events_.size() > kEventLogSize) events_.pop_front();
  cv_.notify_all();
}

void Session::mark_stale(const std::vector<std::string> &ids) {
  for (const auto &id : ids) {
    auto &s = states_[id];
    if (s.status == NodeStatus::Idle || s.status == NodeStatus::Stale) continue;
    s.status = NodeStatus::Stale;
    publish({0, id, NodeStatus::Stale, "upstream changed", false});
  }
}

// Each root and everything downstream of it becomes Stale.
void Session::after_mutation(std::vector<std::string> roots) {
  ++revision_;
  std::vector<std::string> ids;
  for (const auto &r : roots) {
    if (!w_.find(r)) continue;
    ids.push_back(r);
    for (auto &d : descendants(w_, r)) ids.push_back(std::move(d));
  }
  mark_stale(ids);
}

std::string Session::add_node(const std::string &type_name, const Json &params, std::array<double, 2> position,
                              Rev expected) {
  std::lock_guard lk(mu_);
  check_idle();
  check_revision(expected);
  const auto id = engine::add_node(w_, type_name, params, position);
  states_[id];
  after_mutation({});
  return id;
}

Edge Session::connect(const PortRef &from, const PortRef &to, Rev expected) {
  std::lock_guard lk(mu_);
  check_idle();
  check_revision(expected);
  const auto e = engine::connect(w_, from, to);
  after_mutation({to.node});
  return e;
}

void Session::disconnect(const PortRef &to, Rev expected) {
  std::lock_guard lk(mu_);
  check_idle();
  check_revision(expected);
  engine::disconnect(w_, to);
  after_mutation({to.node});
}

void Session::remove_node(const std::string &id, Rev expected) {
  std::lock_guard lk(mu_);
  check_idle();
  check_revision(expected);
  auto down = descendants(w_, id);
  engine::remove_node(w_, id);
  states_.erase(id);
  after_mutation(down);
}

void Session::set_params(const std::string &id, const Json &params, Rev expected) {
  std::lock_guard lk(mu_);
  check_idle();
  check_revision(expected);
  engine::set_params(w_, id, params);
  after_mutation({id});
}

void Session::set_position(const std::string &id, std::array<double, 2> position, Rev expected) {
  std::lock_guard lk(mu_);
  check_idle();
  check_revision(expected);
  engine::set_position(w_, id, position);
  ++revision_; // layout only, results stay valid
}

void Session::replace(Workflow w, Rev expected) {
  std::lock_guard lk(mu_);
  check_idle();
  check_revision(expected);
  // Nodes whose content hash survives the replacement keep their results.
  std::map<std::string, Digest> before, after;
  try {
    before = content_hashes(w_, {opt_.base_dir});
    after = content_hashes(w, {opt_.base_dir});
  } catch (const Error &) {
    before.clear();
  }
  w_ = std::move(w);
  std::map<std::string, NodeState> fresh;
  std::vector<std::string> stale;
  for (const auto &n : w_.nodes) {
    auto &st = fresh[n.id];
    const auto old = states_.find(n.id);
    if (old == states_.end() || old->second.status == NodeStatus::Idle) continue;
    const auto b = before.find(n.id), a = after.find(n.id);
    st = old->second;
    if (b == before.end() || a == after.end() || b->second != a->second) stale.push_back(n.id);
  }
  states_ = std::move(fresh);
  ++revision_;
  mark_stale(stale);
}

void Session::paste_params(const std::string &from, const std::string &to, Rev expected) {
  std::lock_guard lk(mu_);
  check_idle();
  check_revision(expected);
  const auto *src = w_.find(from);
  const auto *dst = w_.find(to);
  if (!src) fail("UnknownNode", "no node '" + from + "'");
  if (!dst) fail("UnknownNode", "no node '" + to + "'");
  if (src->type_name != dst->type_name)
    fail("TypeMismatch", "cannot paste " + src->type_name + " parameters into " + dst->type_name);
  engine::set_params(w_, to, src->params);
  after_mutation({to});
}

void Session::start(const Scope &scope) {
  std::unique_lock lk(mu_);
  check_idle();
  require_runnable(w_, scope);
  if (worker_.joinable()) worker_.join();
  running_ = true;
  error_.reset();
  exception_ = nullptr;
  cancel_ = std::make_shared<CancelFlag>();
  Workflow snapshot = w_;
  ExecOptions opt = opt_;
  opt.cancel = cancel_;
  opt.on_event = [this](const Event &e) {
    std::lock_guard g(mu_);
    publish(e);
  };
  worker_ = std::thread([this, snapshot = std::move(snapshot), opt = std::move(opt), scope]() {
    std::map<std::string, NodeState> states;
    {
      std::lock_guard g(mu_);
      states = states_;
    }
    std::optional<ExecutionReport> rep;
    std::optional<std::string> err;
    std::exception_ptr ex;
    try {
      rep = execute(snapshot, scope, *store_, opt, &states);
    } catch (const std::exception &e) {
      err = e.what();
      ex = std::current_exception();
    }
    std::lock_guard g(mu_);
    if (rep) {
      for (auto &[id, s] : states)
        if (states_.count(id)) states_[id] = std::move(s);
    }
    report_ = std::move(rep);
    error_ = std::move(err);
    exception_ = ex;
    running_ = false;
    publish({0, "", report_ ? NodeStatus::Done : NodeStatus::Error, error_ ? *error_ : "run finished", false});
    cv_.notify_all();
  });
}

ExecutionReport Session::run(const Scope &scope) {
  start(scope);
  wait();
  std::lock_guard lk(mu_);
  if (exception_) std::rethrow_exception(exception_);
  return *report_;
}

void Session::wait() {
  std::unique_lock lk(mu_);
  cv_.wait(lk, [&] { return !running_; });
  lk.unlock();
  if (worker_.joinable() && worker_.get_id() != std::this_thread::get_id()) worker_.join();
}

void Session::cancel() {
  std::lock_guard lk(mu_);
  if (!running_) fail("NotRunning", "no execution in progress");
  cancel_->request();
}

bool Session::running() const {
  std::lock_guard lk(mu_);
  return running_;
}

std::optional<ExecutionReport> Session::last_report() const {
  std::lock_guard lk(mu_);
  return report_;
}

std::optional<std::string> Session::last_error() const {
  std::lock_guard lk(mu_);
  return error_;
}

std::uint64_t Session::oldest_event_seq() const {
  std::lock_guard lk(mu_);
  return events_.empty() ? seq_ + 1 : events_.front().seq;
}

std::vector<Event> Session::events_since(std::uint64_t after, std::chrono::milliseconds timeout) const {
  std::unique_lock lk(mu_);
  if (seq_ <= after && timeout.count() > 0) cv_.wait_for(lk, timeout, [&] { return seq_ > after; });
  std::vector<Event> out;
  for (const auto &e : events_)
    if (e.seq > after) out.push_back(e);
  return out;
}

} // namespace voxflow::engine
