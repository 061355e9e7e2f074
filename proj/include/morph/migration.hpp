#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "morph/chain.hpp"
#include "morph/transform.hpp"
#include "morph/txn.hpp"

namespace morph {

// Record migration driven by access and by background sweeps after a schema
// change committed without copying data.
class LazyMigration {
 public:
  LazyMigration(std::shared_ptr<DataArray> source, std::shared_ptr<DataArray> target,
                Transform transform, const SchemaVersion* target_schema, const Catalog* catalog);

  // Brings `rid` into the target array unless something is already there.
  // Returns false if the record cannot be converted; it stays flagged.
  bool migrate(Rid rid);

  // Migrates every rid in [from, to).
  void sweep(std::uint64_t from, std::uint64_t to);

  bool complete() const { return complete_.load(std::memory_order_acquire); }
  void mark_complete() { complete_.store(true, std::memory_order_release); }
  bool flagged(Rid rid) const;

  std::uint64_t migrated() const { return migrated_.load(std::memory_order_relaxed); }
  std::vector<std::string> diagnostics() const;

  const std::shared_ptr<DataArray>& source() const { return source_; }

 private:
  std::shared_ptr<DataArray> source_;
  std::shared_ptr<DataArray> target_;
  Transform transform_;
  const SchemaVersion* target_schema_;
  LookupContext ctx_;
  std::atomic<bool> complete_{false};
  std::atomic<std::uint64_t> migrated_{0};
  mutable std::mutex diag_mu_;
  std::set<std::uint64_t> flagged_;
  std::vector<std::string> diagnostics_;
};

enum class OverlapVerdict : std::uint8_t { Proceed, Abort, UseOld };

std::string to_string(OverlapVerdict v);

// Admission of an access made under a pending schema. Reads may proceed only
// once the version the reader would see in the old array is reflected in the
// new one; blind writes always proceed. Caller holds an EpochGuard.
OverlapVerdict overlap_check(const PendingMigration& pending, const DataArray& target, Rid rid,
                             Snapshot snap, Access access);

}  // namespace morph
