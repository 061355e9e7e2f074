#pragma once

#include <cassert>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

#include "morph/epoch.hpp"
#include "morph/indirection_array.hpp"

namespace morph {

// What a chain operation needs to know about the calling transaction.
struct Snapshot {
  Timestamp begin;
  TxnId self;
};

template <class P>
struct VisibleVersion {
  Version<P>* version;
  bool is_latest;  // head among committed versions (or the caller's own write)
};

namespace detail {
template <class P>
void check_rid(const IndirectionArray<P>& array, Rid rid) {
  if (rid.value >= array.size()) {
    throw std::out_of_range("rid " + std::to_string(rid.value) + " not allocated (size " +
                            std::to_string(array.size()) + ")");
  }
}
}  // namespace detail

// Newest committed version with commit_ts < begin, or the caller's own
// uncommitted head. Caller must hold an EpochGuard while using the result.
template <class P>
std::optional<VisibleVersion<P>> read_visible(const IndirectionArray<P>& array, Rid rid,
                                              Snapshot snap) {
  detail::check_rid(array, rid);
  bool first_committed = true;
  for (Version<P>* v = array.head(rid); v; v = v->older()) {
    const Stamp s = v->stamp();
    if (!s.is_committed()) {
      if (s.owner() == snap.self) return VisibleVersion<P>{v, true};
      continue;
    }
    if (s.ts() < snap.begin) return VisibleVersion<P>{v, first_committed};
    first_committed = false;
  }
  return std::nullopt;
}

template <class P>
Version<P>* latest_committed(const IndirectionArray<P>& array, Rid rid) {
  detail::check_rid(array, rid);
  for (Version<P>* v = array.head(rid); v; v = v->older()) {
    if (v->stamp().is_committed()) return v;
  }
  return nullptr;
}

template <class P>
struct InstallResult {
  bool installed = false;
  // Set when the caller overwrote its own uncommitted head; that node is now
  // unlinked and owned by the caller.
  Version<P>* replaced_own = nullptr;
};

// First-updater-wins install of an uncommitted version owned by snap.self.
template <class P>
InstallResult<P> install_version(IndirectionArray<P>& array, Rid rid, Version<P>* new_v,
                                 Snapshot snap) {
  detail::check_rid(array, rid);
  auto& entry = array.slot(rid);
  Version<P>* head = entry.load(std::memory_order_acquire);
  if (head) {
    const Stamp s = head->stamp();
    if (!s.is_committed()) {
      if (s.owner() != snap.self) return {};
      new_v->next.store(head->older(), std::memory_order_relaxed);
      if (entry.compare_exchange_strong(head, new_v, std::memory_order_acq_rel)) {
        return {true, head};
      }
      return {};
    }
    if (s.ts() >= snap.begin) return {};
  }
  new_v->next.store(head, std::memory_order_relaxed);
  if (entry.compare_exchange_strong(head, new_v, std::memory_order_acq_rel)) return {true, nullptr};
  return {};
}

enum class MigrateInstall { Installed, Present };

// Links an already-committed version into the chain at the position given by
// its commit_ts. A version with the same commit_ts already on the chain wins
// (replay is idempotent). Waits out an uncommitted head, which belongs to a
// short DML transaction. Used by migration (scan, change replay) so a late
// replay still lands below newer writes.
template <class P>
MigrateInstall install_ordered(IndirectionArray<P>& array, Rid rid, Version<P>* v) {
  auto& entry = array.slot(rid);
  const Timestamp ts = v->stamp().ts();
  for (;;) {
    Version<P>* head = entry.load(std::memory_order_acquire);
    if (head && !head->stamp().is_committed()) {
      std::this_thread::yield();
      continue;
    }
    if (!head || head->stamp().ts() < ts) {
      v->next.store(head, std::memory_order_relaxed);
      if (entry.compare_exchange_weak(head, v, std::memory_order_acq_rel)) {
        return MigrateInstall::Installed;
      }
      continue;
    }
    if (head->stamp().ts() == ts) return MigrateInstall::Present;
    Version<P>* prev = head;
    Version<P>* cur = prev->older();
    while (cur && ts < cur->stamp().ts()) {
      prev = cur;
      cur = cur->older();
    }
    if (cur && cur->stamp().ts() == ts) return MigrateInstall::Present;
    v->next.store(cur, std::memory_order_relaxed);
    if (prev->next.compare_exchange_strong(cur, v, std::memory_order_acq_rel)) {
      return MigrateInstall::Installed;
    }
  }
}

// Installs `v` only into an empty slot. Used by on-access lazy migration.
template <class P>
bool install_if_absent(IndirectionArray<P>& array, Rid rid, Version<P>* v) {
  auto& entry = array.slot(rid);
  Version<P>* expected = nullptr;
  v->next.store(nullptr, std::memory_order_relaxed);
  return entry.compare_exchange_strong(expected, v, std::memory_order_acq_rel);
}

// Undo of install_version by the owner. Always succeeds: nobody else can
// replace an uncommitted head.
template <class P>
void unlink_own(IndirectionArray<P>& array, Rid rid, Version<P>* v) {
  auto& entry = array.slot(rid);
  Version<P>* expected = v;
  [[maybe_unused]] bool ok =
      entry.compare_exchange_strong(expected, v->older(), std::memory_order_acq_rel);
  assert(ok && "uncommitted head replaced by another transaction");
}

// Drops versions no snapshot at or after `watermark` can reach. Keeps the
// newest version with commit_ts < watermark. Callers serialize pruning.
template <class P>
std::size_t prune_below(Version<P>* from, Timestamp watermark) {
  for (Version<P>* v = from; v; v = v->older()) {
    const Stamp s = v->stamp();
    if (s.is_committed() && s.ts() < watermark) {
      Version<P>* tail = v->next.exchange(nullptr, std::memory_order_acq_rel);
      std::size_t n = 0;
      while (tail) {
        Version<P>* nxt = tail->older();
        EpochManager::instance().retire(tail);
        tail = nxt;
        ++n;
      }
      return n;
    }
  }
  return 0;
}

struct ChainCheck {
  bool ok = true;
  std::string problem;
};

// Committed stamps strictly decrease head to tail; at most one uncommitted
// version and only at the head.
template <class P>
ChainCheck check_chain(const IndirectionArray<P>& array, Rid rid) {
  std::optional<Timestamp> prev;
  bool first = true;
  for (Version<P>* v = array.head(rid); v; v = v->older()) {
    const Stamp s = v->stamp();
    if (!s.is_committed()) {
      if (!first) return {false, "uncommitted version below head at rid " + std::to_string(rid.value)};
    } else {
      if (prev && !(s.ts() < *prev)) {
        return {false, "commit order violated at rid " + std::to_string(rid.value)};
      }
      prev = s.ts();
    }
    first = false;
  }
  return {};
}

}  // namespace morph
