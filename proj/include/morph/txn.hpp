#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "morph/clock.hpp"
#include "morph/types.hpp"

namespace morph {

enum class TxnStatus : std::uint8_t { Active, PreCommitted, Committed, Aborted };

enum class OpStatus : std::uint8_t {
  Ok,
  NotFound,       // no live version visible
  Conflict,       // write-write conflict or failed overlap check
  SchemaChanged,  // visible schema is not the latest
  NoSchema,       // table has no schema visible to this transaction
  Incompatible,   // record could not be brought to the schema's format
  Unpublished,    // index exists but is still being built
  Violation,      // payload breaks a constraint of the committed schema
};

enum class AbortReason : std::uint8_t {
  None,
  User,
  WriteConflict,
  SchemaChanged,
  Overlap,
  Unique,
  Precommit,
  DdlAborted,
  Constraint,
};

enum class Access : std::uint8_t { Read, BlindWrite, ReadModifyWrite };

std::string to_string(TxnStatus s);
std::string to_string(OpStatus s);
std::string to_string(AbortReason r);

// Begin timestamps of running transactions; the pruning watermark is the
// oldest of them.
class ActiveRegistry {
 public:
  static constexpr std::size_t kSlots = 4096;

  ActiveRegistry();

  // Takes a slot and a snapshot. The slot is published before the clock is
  // read so a concurrent watermark computation never overshoots it.
  std::pair<std::size_t, Timestamp> enter(const GlobalClock& clock);
  void leave(std::size_t slot);

  // Oldest begin_ts among running transactions, or the clock if none.
  // Returns 0 while a transaction is between publishing its slot and
  // reading the clock.
  Timestamp watermark(const GlobalClock& clock) const;
  std::size_t active() const;

 private:
  static constexpr std::uint64_t kFree = ~std::uint64_t{0};
  struct alignas(64) Slot {
    std::atomic<std::uint64_t> begin{kFree};
    std::atomic<bool> taken{false};
  };
  std::unique_ptr<Slot[]> slots_;
  std::atomic<std::size_t> high_{0};
};

// Shared completion state of one transaction; outlives the Transaction so a
// queued commit can be observed after the caller moved on.
class CommitTicket {
 public:
  explicit CommitTicket(TxnId id) : txn(id) {}

  TxnStatus status() const { return status_.load(std::memory_order_acquire); }
  void resolve(TxnStatus s);
  TxnStatus wait() const;
  void set(TxnStatus s) { status_.store(s, std::memory_order_release); }

  const TxnId txn;
  Timestamp commit_ts;
  std::vector<std::uint64_t> barriers;  // DDL jobs that must resolve first
  std::vector<std::uint64_t> admitted;  // jobs whose abort voids this commit
  AbortReason reason = AbortReason::None;

 private:
  std::atomic<TxnStatus> status_{TxnStatus::Active};
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
};

enum class JobState : std::uint8_t { Running, Finalized, Aborted };

class JobBoard {
 public:
  std::uint64_t open();
  void close(std::uint64_t job, bool finalized);
  JobState state(std::uint64_t job) const;

 private:
  mutable std::mutex mu_;
  std::uint64_t next_ = 1;
  std::unordered_map<std::uint64_t, JobState> jobs_;
};

// Pre-committed transactions waiting for their final status. Entries are
// appended in commit_ts order and resolved strictly in that order.
class CommitQueue {
 public:
  // Called under the engine's commit lock. Returns false when the ticket can
  // be finalized immediately (no barrier, nothing queued ahead).
  bool enqueue(std::shared_ptr<CommitTicket> ticket);

  // Resolves every entry at the front whose barriers are settled. Safe to
  // call from any thread; concurrent callers coalesce.
  void drain(const JobBoard& jobs);

  std::size_t depth() const;

  // Optional observer invoked for every resolved entry.
  void set_observer(std::function<void(const CommitTicket&)> fn) { observer_ = std::move(fn); }

 private:
  void drain_once(const JobBoard& jobs);

  mutable std::mutex mu_;
  std::deque<std::shared_ptr<CommitTicket>> entries_;
  std::mutex drain_mu_;
  std::atomic<std::uint64_t> requests_{0};
  std::function<void(const CommitTicket&)> observer_;
};

}  // namespace morph
