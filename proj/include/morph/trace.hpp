#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "morph/types.hpp"

namespace morph {

enum class EventKind : std::uint8_t {
  Begin,         // ts = begin_ts
  Read,          // ts = observed version's commit_ts (0 when nothing visible)
  Write,         // ts = commit_ts of the head replaced (0 when none)
  SchemaRead,    // ts = schema version's commit_ts
  SchemaWrite,   // ts = schema commit_ts (or pre-commit ts while pending)
  SchemaRevoke,  // ts = pre-commit ts of the revoked pending schema
  Commit,        // ts = commit_ts
  Abort,
  Outcome,       // final resolution of a queued commit; flag `committed`
};

std::string to_string(EventKind k);

struct HistoryEvent {
  std::uint64_t seq = 0;  // global wall order
  TxnId txn;
  EventKind kind = EventKind::Begin;
  TableId table;
  Rid rid;
  Timestamp ts;
  std::uint32_t arity = 0;      // payload or schema column count
  std::uint64_t array = 0;      // generation of the data array touched
  bool found = false;           // Read: a live version was returned
  bool own = false;             // Read: caller's own uncommitted write
  bool tombstone = false;       // Read/Write: delete marker
  bool pending = false;         // schema event concerns a pending version
  bool admitted = false;        // access admitted under a pending schema
  bool committed = false;       // Outcome
  bool dropped = false;         // SchemaWrite: table dropped
  TableId source;               // SchemaWrite: table the data was copied from
  bool has_source = false;
};

// Thread-safe event collector. The engine emits into it when one is attached.
class TraceRecorder {
 public:
  void emit(HistoryEvent e) {
    std::lock_guard lk(mu_);
    e.seq = next_seq_++;
    events_.push_back(std::move(e));
  }

  std::vector<HistoryEvent> events() const {
    std::lock_guard lk(mu_);
    return events_;
  }

  std::size_t size() const {
    std::lock_guard lk(mu_);
    return events_.size();
  }

  void clear() {
    std::lock_guard lk(mu_);
    events_.clear();
  }

 private:
  mutable std::mutex mu_;
  std::uint64_t next_seq_ = 0;
  std::vector<HistoryEvent> events_;
};

}  // namespace morph
