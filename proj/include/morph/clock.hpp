#pragma once

#include <atomic>
#include <cstdint>

#include "morph/types.hpp"

namespace morph {

// Global timestamp source.
//
// Commit timestamps come from an atomic fetch-and-increment and are even.
// Snapshots read `published_`, which the committer advances to commit_ts + 1
// only after every version of that commit has been stamped. A snapshot taken
// before publication therefore never sees a half-stamped commit, and every
// commit_ts is strictly greater than the begin_ts of its own transaction.
class GlobalClock {
 public:
  Timestamp snapshot() const { return Timestamp{published_.load(std::memory_order_acquire)}; }

  // Must be followed by publish() once the commit's effects are in place.
  Timestamp fetch_increment() {
    return Timestamp{counter_.fetch_add(2, std::memory_order_acq_rel) + 2};
  }

  void publish(Timestamp ts) {
    auto cur = published_.load(std::memory_order_relaxed);
    while (cur < ts.value + 1 &&
           !published_.compare_exchange_weak(cur, ts.value + 1, std::memory_order_release)) {
    }
  }

  // Last issued commit timestamp.
  Timestamp last_issued() const { return Timestamp{counter_.load(std::memory_order_acquire)}; }

 private:
  std::atomic<std::uint64_t> counter_{0};
  std::atomic<std::uint64_t> published_{1};
};

}  // namespace morph
