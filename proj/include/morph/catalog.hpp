#pragma once

#include <pthread.h>

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "morph/chain.hpp"
#include "morph/schema.hpp"

namespace morph {

// Table-level reader/writer lock for the Blocking baseline. Writer preferring
// so a DDL is not starved by a steady stream of DML readers.
class TableLock {
 public:
  TableLock();
  ~TableLock();
  TableLock(const TableLock&) = delete;
  TableLock& operator=(const TableLock&) = delete;

  void lock_shared();
  void unlock_shared();
  void lock();
  void unlock();

 private:
  pthread_rwlock_t lock_;
};

struct TableHandle {
  TableId id;
  std::string name;
  TableLock lock;
  std::mutex ddl_mu;                         // one DDL job per table at a time
  std::atomic<std::uint64_t> active_job{0};  // nonzero: commits take this job as barrier

  std::shared_ptr<DataArray> live_array() const {
    std::lock_guard lk(array_mu_);
    return live_;
  }
  void swap_array(std::shared_ptr<DataArray> next) {
    std::lock_guard lk(array_mu_);
    live_ = std::move(next);
  }

 private:
  mutable std::mutex array_mu_;
  std::shared_ptr<DataArray> live_;
};

struct VisibleSchema {
  CatalogVersion* version = nullptr;
  SchemaRef schema;  // null when the visible version is a drop tombstone
  Timestamp ts;
  bool is_latest = false;
};

// The system catalog: a multi-versioned table whose RID is the table id and
// whose versions are schema versions.
class Catalog {
 public:
  explicit Catalog(std::uint64_t max_tables = 1 << 16);
  Catalog(const Catalog&) = delete;
  Catalog& operator=(const Catalog&) = delete;

  // Reserves a table id (catalog RID) and a handle. No schema is visible
  // until a version is installed and committed.
  TableId allocate_table(const std::string& name);
  void release_name(TableId id);

  TableHandle& table(TableId id) const;
  bool has_table(TableId id) const;
  std::optional<TableId> find(std::string_view name) const;
  std::vector<TableId> table_ids() const;

  CatalogArray& array() { return array_; }
  const CatalogArray& array() const { return array_; }

  // Caller holds an EpochGuard. With include_pending=false a pending head is
  // skipped in favour of the prior committed version.
  std::optional<VisibleSchema> get_visible_schema(Snapshot snap, TableId id,
                                                  bool include_pending = true) const;

  InstallResult<SchemaRef> install_schema_version(Snapshot snap, TableId id, CatalogVersion* v);

  // Newest committed, non-pending schema (null if none or dropped).
  SchemaRef committed_schema(TableId id) const;
  CatalogVersion* latest_committed(TableId id) const;

  // Pending-state machine driven by the single DDL job owning `v`.
  void set_pending(TableId id, CatalogVersion* v, Timestamp t_pre);
  void finalize_schema(TableId id, CatalogVersion* v, Timestamp commit_ts);
  void revoke_pending(TableId id, CatalogVersion* v);

  std::size_t pending_count(TableId id) const;

 private:
  void check_id(TableId id) const;

  CatalogArray array_;
  std::vector<std::unique_ptr<TableHandle>> handles_;
  std::vector<std::atomic<TableHandle*>> handle_index_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, TableId> names_;
};

}  // namespace morph
