#include "morph/txn.hpp"

#include <stdexcept>

namespace morph {

std::string to_string(TxnStatus s) {
  switch (s) {
    case TxnStatus::Active: return "active";
    case TxnStatus::PreCommitted: return "precommitted";
    case TxnStatus::Committed: return "committed";
    case TxnStatus::Aborted: return "aborted";
  }
  return "?";
}

std::string to_string(OpStatus s) {
  switch (s) {
    case OpStatus::Ok: return "ok";
    case OpStatus::NotFound: return "not_found";
    case OpStatus::Conflict: return "conflict";
    case OpStatus::SchemaChanged: return "schema_changed";
    case OpStatus::NoSchema: return "no_schema";
    case OpStatus::Incompatible: return "incompatible";
    case OpStatus::Unpublished: return "unpublished";
    case OpStatus::Violation: return "violation";
  }
  return "?";
}

std::string to_string(AbortReason r) {
  switch (r) {
    case AbortReason::None: return "none";
    case AbortReason::User: return "user";
    case AbortReason::WriteConflict: return "write_conflict";
    case AbortReason::SchemaChanged: return "schema_changed";
    case AbortReason::Overlap: return "overlap";
    case AbortReason::Unique: return "unique";
    case AbortReason::Precommit: return "precommit";
    case AbortReason::DdlAborted: return "ddl_aborted";
    case AbortReason::Constraint: return "constraint";
  }
  return "?";
}

ActiveRegistry::ActiveRegistry() : slots_(new Slot[kSlots]) {}

std::pair<std::size_t, Timestamp> ActiveRegistry::enter(const GlobalClock& clock) {
  for (std::size_t i = 0; i < kSlots; ++i) {
    auto& s = slots_[i];
    bool expected = false;
    if (s.taken.load(std::memory_order_relaxed) ||
        !s.taken.compare_exchange_strong(expected, true, std::memory_order_acq_rel)) {
      continue;
    }
    auto high = high_.load(std::memory_order_relaxed);
    while (high < i + 1 && !high_.compare_exchange_weak(high, i + 1, std::memory_order_acq_rel)) {
    }
    s.begin.store(0, std::memory_order_seq_cst);
    const Timestamp snap = clock.snapshot();
    s.begin.store(snap.value, std::memory_order_seq_cst);
    return {i, snap};
  }
  throw ResourceError("too many concurrent transactions");
}

void ActiveRegistry::leave(std::size_t slot) {
  slots_[slot].begin.store(kFree, std::memory_order_release);
  slots_[slot].taken.store(false, std::memory_order_release);
}

Timestamp ActiveRegistry::watermark(const GlobalClock& clock) const {
  std::uint64_t wm = clock.snapshot().value;
  const auto high = high_.load(std::memory_order_acquire);
  for (std::size_t i = 0; i < high; ++i) {
    const auto b = slots_[i].begin.load(std::memory_order_seq_cst);
    if (b == 0) return Timestamp{0};
    if (b != kFree && b < wm) wm = b;
  }
  return Timestamp{wm};
}

std::size_t ActiveRegistry::active() const {
  std::size_t n = 0;
  const auto high = high_.load(std::memory_order_acquire);
  for (std::size_t i = 0; i < high; ++i) {
    if (slots_[i].begin.load(std::memory_order_acquire) != kFree) ++n;
  }
  return n;
}

void CommitTicket::resolve(TxnStatus s) {
  {
    std::lock_guard lk(mu_);
    status_.store(s, std::memory_order_release);
  }
  cv_.notify_all();
}

TxnStatus CommitTicket::wait() const {
  std::unique_lock lk(mu_);
  cv_.wait(lk, [&] {
    const auto s = status_.load(std::memory_order_acquire);
    return s == TxnStatus::Committed || s == TxnStatus::Aborted;
  });
  return status_.load(std::memory_order_acquire);
}

std::uint64_t JobBoard::open() {
  std::lock_guard lk(mu_);
  const auto id = next_++;
  jobs_.emplace(id, JobState::Running);
  return id;
}

void JobBoard::close(std::uint64_t job, bool finalized) {
  std::lock_guard lk(mu_);
  auto it = jobs_.find(job);
  if (it == jobs_.end()) throw std::logic_error("unknown ddl job " + std::to_string(job));
  if (it->second != JobState::Running) throw std::logic_error("ddl job resolved twice");
  it->second = finalized ? JobState::Finalized : JobState::Aborted;
}

JobState JobBoard::state(std::uint64_t job) const {
  std::lock_guard lk(mu_);
  auto it = jobs_.find(job);
  if (it == jobs_.end()) throw std::logic_error("unknown ddl job " + std::to_string(job));
  return it->second;
}

bool CommitQueue::enqueue(std::shared_ptr<CommitTicket> ticket) {
  std::lock_guard lk(mu_);
  if (entries_.empty() && ticket->barriers.empty()) return false;
  ticket->set(TxnStatus::PreCommitted);
  entries_.push_back(std::move(ticket));
  return true;
}

void CommitQueue::drain(const JobBoard& jobs) {
  requests_.fetch_add(1, std::memory_order_seq_cst);
  for (;;) {
    if (!drain_mu_.try_lock()) return;  // the holder re-checks after unlocking
    const auto seen = requests_.load(std::memory_order_seq_cst);
    drain_once(jobs);
    drain_mu_.unlock();
    if (requests_.load(std::memory_order_seq_cst) == seen) return;
  }
}

void CommitQueue::drain_once(const JobBoard& jobs) {
  for (;;) {
    std::shared_ptr<CommitTicket> front;
    {
      std::lock_guard lk(mu_);
      if (entries_.empty()) return;
      front = entries_.front();
      for (auto job : front->barriers) {
        if (jobs.state(job) == JobState::Running) return;
      }
      entries_.pop_front();
    }
    TxnStatus outcome = TxnStatus::Committed;
    for (auto job : front->admitted) {
      if (jobs.state(job) == JobState::Aborted) {
        outcome = TxnStatus::Aborted;
        front->reason = AbortReason::DdlAborted;
      }
    }
    front->resolve(outcome);
    if (observer_) observer_(*front);
  }
}

std::size_t CommitQueue::depth() const {
  std::lock_guard lk(mu_);
  return entries_.size();
}

}  // namespace morph
