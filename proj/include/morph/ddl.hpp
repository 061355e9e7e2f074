#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "morph/database.hpp"
#include "morph/kernels.hpp"
#include "morph/migration.hpp"

namespace morph {

enum class DdlKind : std::uint8_t {
  AddColumn,
  DropColumn,
  ModifyColumn,
  AddConstraint,
  AddColumnWithConstraint,
  CreateIndex,
  CreateTableAs,
  SplitTable,
  Preaggregate,
  JoinTable,
  CreateTable,
  DropTable,
};

enum class Policy : std::uint8_t { Blocking, Lazy, BasicDdam, RelaxedDdam };

std::string to_string(DdlKind k);
DdlKind parse_ddl_kind(const std::string& text);
std::string to_string(Policy p);
Policy parse_policy(const std::string& text);

// A new table produced by CreateTableAs / SplitTable / JoinTable / CreateTable.
struct TargetSpec {
  std::string name;
  std::vector<std::string> columns;  // projection of the source; empty = all
  std::vector<IndexSpec> indexes;
};

// A schema change request. Serializes to a single text line, e.g.
//   ddl add_column table=ycsb col=c4:int64 default=0 policy=relaxed
struct DdlSpec {
  DdlKind kind = DdlKind::AddColumn;
  std::string table;
  Policy policy = Policy::RelaxedDdam;
  unsigned threads = 2;       // total DDL workers
  unsigned scan_threads = 0;  // 0: derived from `threads`
  unsigned cdc_threads = 0;

  std::vector<ColumnDef> columns;  // AddColumn*, CreateTable
  std::string column;              // DropColumn, ModifyColumn
  DataType new_type = DataType::Int64;
  std::vector<std::string> checks;  // constraint expressions, see parse_constraint
  IndexSpec index;                  // CreateIndex
  std::vector<TargetSpec> targets;
  bool drop_source = false;  // SplitTable removes the source table
  // Preaggregate / JoinTable: new column filled from another table,
  // written as `table.column@index(local_col,...)`.
  std::string derived_column;
  DataType derived_type = DataType::Int64;
  std::string foreign;

  // Convenience builders.
  static DdlSpec add_column(std::string table, ColumnDef col, Policy p);
  static DdlSpec add_constraint(std::string table, std::string check, Policy p);
  static DdlSpec create_index(std::string table, IndexSpec index, Policy p);

  unsigned effective_scan_threads() const;
  unsigned effective_cdc_threads() const;

  std::string to_text() const;
};

// Parses the text form. The leading word `ddl` is optional.
DdlSpec parse_ddl(const std::string& line);

// `lhs op rhs` where rhs is a number, a quoted string, a column, or
// `table.column@index(col,...)` for a cross-table operand. `not_null(col)`
// is also accepted.
ConstraintDef parse_constraint(const std::string& text, const SchemaVersion& schema,
                               const Catalog& catalog);

enum class DdlPhase : std::uint8_t { Installing, Scanning, Cdc, Finalizing, Done, Aborted };

std::string to_string(DdlPhase p);

struct DdlStats {
  std::uint64_t scan_bound = 0;   // S
  std::uint64_t scan_visits = 0;
  std::uint64_t scan_migrated = 0;
  std::uint64_t cdc_records = 0;  // log records of the source consumed
  std::uint64_t cdc_applied = 0;
  std::uint64_t final_verified = 0;
  std::size_t write_set_size = 0;  // of the DDL transaction at commit time
  Lsn start_lsn;
  Lsn pre_lsn;
  Timestamp begin_ts;
  Timestamp pre_commit_ts;  // t_pre
  Timestamp commit_ts;
  std::uint64_t job_id = 0;
  double total_ms = 0;
  double scan_ms = 0;
  double cdc_ms = 0;
};

enum class DdlStatus : std::uint8_t { Committed, Aborted };

struct DdlResult {
  DdlStatus status = DdlStatus::Aborted;
  std::string reason;  // incompatible_data, conflict, unsupported
  std::string detail;
  DdlStats stats;

  bool committed() const { return status == DdlStatus::Committed; }
};

struct DdlHooks {
  std::function<void(DdlPhase)> on_phase;
};

// Resolved form of a DdlSpec against the catalog.
struct DdlPlan {
  struct Target {
    TableId table;
    bool new_table = false;
    bool tombstone = false;
    bool copies = false;  // rows are rewritten into a new format / new table
    SchemaRef schema;
    Transform transform;
    std::vector<ConstraintDef> verify;
    std::vector<std::size_t> build_indexes;  // positions in schema->indexes
  };

  DdlKind kind = DdlKind::AddColumn;
  std::optional<TableId> source;
  SchemaRef source_schema;
  std::vector<Target> targets;
  DdlCategory category = DdlCategory::MetadataOnly;
};

// Resolves `spec` as seen by `txn`. New tables are allocated in the catalog
// (names reserved); callers release them on abort. Throws
// std::invalid_argument on malformed specs.
DdlPlan compile_ddl(const DdlSpec& spec, Database& db, Transaction& txn);

class DdlEngine {
 public:
  explicit DdlEngine(Database& db);
  ~DdlEngine();
  DdlEngine(const DdlEngine&) = delete;
  DdlEngine& operator=(const DdlEngine&) = delete;

  DdlResult execute(const DdlSpec& spec, const DdlHooks& hooks = {});

  // Waits for background lazy migration to finish.
  void wait_background();
  // Lazy migration state of the latest lazily changed schema of `table`.
  std::shared_ptr<LazyMigration> lazy_state(TableId table) const;

 private:
  DdlResult run_metadata(const DdlSpec& spec, const DdlHooks& hooks);
  DdlResult run_blocking(const DdlSpec& spec, const DdlHooks& hooks);
  DdlResult run_basic(const DdlSpec& spec, const DdlHooks& hooks);
  DdlResult run_lazy(const DdlSpec& spec, const DdlHooks& hooks);
  DdlResult run_relaxed(const DdlSpec& spec, const DdlHooks& hooks);

  void join_background(TableId table);

  Database& db_;
  mutable std::mutex bg_mu_;
  std::map<std::uint64_t, std::vector<std::thread>> background_;
  std::map<std::uint64_t, std::shared_ptr<LazyMigration>> lazy_;
};

}  // namespace morph
