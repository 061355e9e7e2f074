#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "morph/chain.hpp"
#include "morph/transform.hpp"

namespace morph {

// One destination of a migration pass.
struct MigrationTarget {
  std::shared_ptr<DataArray> array;  // null: nothing is copied
  const Transform* transform = nullptr;
  const SchemaVersion* schema = nullptr;  // format of migrated records
  std::vector<ConstraintDef> verify;      // checked on the migrated record
  std::vector<const IndexDef*> build;     // indexes filled during migration
  const DataArray* index_array = nullptr;  // array the built indexes point into
};

enum class RowStatus : std::uint8_t { Ok, Incompatible, Violation, Duplicate };

std::string to_string(RowStatus s);

struct RowError {
  RowStatus status = RowStatus::Ok;
  Rid rid;
  std::string detail;
};

// Applies one committed source version (payload or delete marker with its
// commit_ts) to every target: transform, verify, install with the inherited
// timestamp, index. Caller holds an EpochGuard.
RowStatus migrate_row(std::span<const MigrationTarget> targets, Rid rid, const RecordPayload& payload,
                      bool tombstone, Timestamp ts, const LookupContext* ctx, std::string* detail);

struct PassStats {
  std::uint64_t visits = 0;     // rids examined
  std::uint64_t migrated = 0;   // rids with a committed version applied
  RowError error;               // first failure, if any
};

// Migration of rids [0, bound) from the newest committed version of each.
// Stops early (between rows) once `cancel` is set or a row fails.
PassStats scan_pass_serial(const DataArray& source, std::uint64_t bound,
                           std::span<const MigrationTarget> targets, const LookupContext* ctx,
                           const std::atomic<bool>* cancel = nullptr);

// Same contract as the serial pass. Rids are split into contiguous chunks
// handed to `threads` OpenMP workers.
PassStats scan_pass_parallel(const DataArray& source, std::uint64_t bound,
                             std::span<const MigrationTarget> targets, const LookupContext* ctx,
                             int threads, const std::atomic<bool>* cancel = nullptr);

struct VerifyStats {
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
  std::uint64_t first_violation = ~std::uint64_t{0};
};

// Counts newest committed live records in [0, bound) violating `constraints`.
VerifyStats verify_pass_serial(const DataArray& source, std::uint64_t bound,
                               const std::vector<ConstraintDef>& constraints, const LookupContext* ctx);
VerifyStats verify_pass_parallel(const DataArray& source, std::uint64_t bound,
                                 const std::vector<ConstraintDef>& constraints, const LookupContext* ctx,
                                 int threads);

}  // namespace morph
