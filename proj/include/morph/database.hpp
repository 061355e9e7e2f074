#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "morph/catalog.hpp"
#include "morph/clock.hpp"
#include "morph/redo_log.hpp"
#include "morph/trace.hpp"
#include "morph/txn.hpp"

namespace morph {

template <class T>
struct Result {
  OpStatus status = OpStatus::Ok;
  T value{};

  bool ok() const { return status == OpStatus::Ok; }
};

struct DatabaseOptions {
  // DML takes the table lock in shared mode; required by the Blocking policy.
  bool table_locking = false;
  // Trim version chains at commit below the oldest running snapshot.
  bool prune_versions = true;
  std::uint64_t table_capacity = DataArray::kMaxCapacity;
  // Drop log segments no migration can still need.
  bool trim_log = true;
  std::optional<std::filesystem::path> log_mirror;
  TraceRecorder* trace = nullptr;
};

struct IndexSpec {
  std::string name;
  std::vector<std::string> columns;
};

class Database;

// A snapshot-isolation transaction. Single owner; movable. Destroying an
// active transaction aborts it.
class Transaction {
 public:
  Transaction(Transaction&&) noexcept;
  Transaction& operator=(Transaction&&) noexcept;
  ~Transaction();

  TxnId id() const;
  Timestamp begin_ts() const;
  Snapshot snapshot() const;
  TxnStatus status() const;
  AbortReason abort_reason() const;
  const std::shared_ptr<CommitTicket>& ticket() const;

  // Schema this transaction resolves for `table`.
  Result<SchemaRef> schema(TableId table);

  Result<RecordPayload> read(TableId table, Rid rid, Access access = Access::Read);
  OpStatus write(TableId table, Rid rid, RecordPayload payload, Access access = Access::BlindWrite);
  Result<Rid> insert(TableId table, RecordPayload payload);
  OpStatus remove(TableId table, Rid rid);

  // Point lookup through a named index; Unpublished while it is being built.
  Result<Rid> lookup(TableId table, std::string_view index, std::span<const Value> key);
  Result<std::vector<Rid>> scan_prefix(TableId table, std::string_view index,
                                       std::span<const Value> prefix);
  // Number of RIDs in the table's array; full scans iterate [0, n).
  Result<std::uint64_t> rid_count(TableId table);

  // Committed, PreCommitted (queued behind a DDL) or Aborted.
  TxnStatus commit();
  // Without a reason, the failure of the last operation (or User) is recorded.
  void abort(AbortReason reason = AbortReason::None);
  // Blocks until a queued commit is resolved.
  TxnStatus wait();

  // ---- hooks used by the DDL engine ----

  // Installs a new schema version for `table` as this transaction's
  // uncommitted write. Returns null on conflict.
  CatalogVersion* install_schema(TableId table, SchemaRef schema, bool tombstone = false);
  // Snapshot read of an explicit array, bypassing schema resolution.
  std::optional<VisibleVersion<RecordPayload>> read_raw(const DataArray& array, Rid rid) const;
  // Write into an explicit array, tracked in the write set; indexes of
  // `schema` are maintained at commit.
  OpStatus write_raw(TableId table, const std::shared_ptr<DataArray>& array, const SchemaRef& schema,
                     Rid rid, RecordPayload payload, bool tombstone = false);
  // Runs under the commit lock after validation; returning false aborts.
  void add_precommit(std::function<bool(Timestamp)> hook);
  // This transaction already holds the table lock exclusively.
  void hold_table_exclusive(TableId table);
  void add_barrier(std::uint64_t job);
  // Completes a transaction whose catalog write the caller already stamped.
  void finish_external(Timestamp commit_ts);

  std::size_t write_set_size() const;
  std::size_t catalog_write_count() const;

  struct State;  // engine internal

 private:
  friend class Database;
  Transaction(Database* db, std::unique_ptr<State> st);

  Database* db_ = nullptr;
  std::unique_ptr<State> st_;
};

class Database {
 public:
  explicit Database(DatabaseOptions options = {});
  ~Database();
  Database(const Database&) = delete;
  Database& operator=(const Database&) = delete;

  Transaction begin();

  // Creates a table with the given columns and indexes in its own transaction.
  TableId create_table(const std::string& name, std::vector<ColumnDef> columns,
                       std::vector<IndexSpec> indexes = {});
  // Builds (without installing) a fresh schema version for a new table.
  SchemaRef make_table_schema(TableId id, const std::string& name, std::vector<ColumnDef> columns,
                              const std::vector<IndexSpec>& indexes,
                              std::shared_ptr<RidSpace> rids = nullptr);

  Catalog& catalog() { return catalog_; }
  const Catalog& catalog() const { return catalog_; }
  RedoLog& log() { return *log_; }
  GlobalClock& clock() { return clock_; }
  JobBoard& jobs() { return jobs_; }
  ActiveRegistry& registry() { return registry_; }
  CommitQueue& queue() { return queue_; }
  const DatabaseOptions& options() const { return options_; }
  TraceRecorder* trace() const { return options_.trace; }

  // Serializes commit timestamp assignment, stamping and log appends.
  std::mutex& commit_mutex() { return commit_mu_; }

  void drain_queue() { queue_.drain(jobs_); }
  std::size_t queue_depth() const { return queue_.depth(); }
  void close_job(std::uint64_t job, bool finalized);

  // Keeps log records from `from` on readable until unpinned. Call under
  // the commit mutex so no trim races the capture of `from`.
  void pin_log(Lsn from);
  void unpin_log(Lsn from);

  Timestamp watermark() const { return registry_.watermark(clock_); }

  void emit(HistoryEvent e) const {
    if (options_.trace) options_.trace->emit(std::move(e));
  }

  // Table name to id, throwing on unknown names.
  TableId table_id(std::string_view name) const;

 private:
  friend class Transaction;

  TxnStatus commit(Transaction::State& st);
  void abort(Transaction::State& st, AbortReason reason);
  void release(Transaction::State& st);
  void maybe_trim_log();

  DatabaseOptions options_;
  Catalog catalog_;
  GlobalClock clock_;
  std::unique_ptr<RedoLog> log_;
  ActiveRegistry registry_;
  JobBoard jobs_;
  CommitQueue queue_;
  std::mutex commit_mu_;
  std::atomic<std::uint64_t> next_txn_{1};
  std::mutex pin_mu_;
  std::multiset<std::uint64_t> log_pins_;
  std::uint64_t trimmed_at_ = 0;
};

}  // namespace morph
