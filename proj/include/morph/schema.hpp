#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morph/indirection_array.hpp"
#include "morph/key_index.hpp"
#include "morph/types.hpp"

namespace morph {

using DataArray = IndirectionArray<RecordPayload>;
using DataVersion = Version<RecordPayload>;

struct ColumnDef {
  std::string name;
  DataType type = DataType::Int64;
  Value default_value;  // filled in by AddColumn, lazily or eagerly
  bool nullable = true;
};

enum class CompareOp { Lt, Le, Eq, Ne, Ge, Gt };

std::string to_string(CompareOp op);
bool compare_values(const Value& lhs, CompareOp op, const Value& rhs);

enum class ConstraintKind { ColumnVsConst, ColumnVsColumn, NotNull, CrossTableLookup };

// Foreign row located through `index` on `table` with a key built from the
// local `key_columns`; its `target_column` is the right-hand operand.
struct ForeignLookupRef {
  TableId table;
  std::string table_name;
  std::string index;
  std::vector<std::size_t> key_columns;
  std::size_t target_column = 0;
  std::string target_name;
};

struct ConstraintDef {
  ConstraintKind kind = ConstraintKind::NotNull;
  std::size_t column = 0;
  CompareOp op = CompareOp::Eq;
  Value constant;
  std::size_t other_column = 0;
  ForeignLookupRef foreign;

  static ConstraintDef column_vs_const(std::size_t column, CompareOp op, Value constant);
  static ConstraintDef column_vs_column(std::size_t column, CompareOp op, std::size_t other);
  static ConstraintDef not_null(std::size_t column);
  static ConstraintDef cross_table(std::size_t column, CompareOp op, ForeignLookupRef foreign);
};

struct IndexDef {
  std::string name;
  std::vector<std::size_t> key_columns;
  std::shared_ptr<KeyIndex> index;
};

enum class SchemaState : std::uint8_t { Committed, Pending };

// Copy / verify classification of the DDL that produced a schema version.
enum class DdlCategory : std::uint8_t { CopyOnly, VerifyOnly, CopyAndVerify, MetadataOnly };

std::string to_string(DdlCategory c);

// Link from a pending schema version back to the migration producing it;
// DML uses it for the overlap check and the commit barrier.
struct PendingMigration {
  std::uint64_t job_id = 0;
  std::shared_ptr<DataArray> source_array;
  bool copies = false;  // data lives in a new array
};

class LazyMigration;

struct SchemaVersion {
  TableId table_id;
  std::string table_name;
  std::vector<ColumnDef> columns;
  std::vector<ConstraintDef> constraints;
  std::vector<IndexDef> indexes;
  std::shared_ptr<DataArray> data_array;
  std::optional<DdlCategory> ddl_category;
  std::atomic<SchemaState> state{SchemaState::Committed};
  std::shared_ptr<const PendingMigration> pending;
  std::shared_ptr<LazyMigration> lazy;
  std::optional<TableId> copied_from;  // table whose rows seeded this one

  SchemaVersion() = default;
  SchemaVersion(const SchemaVersion&) = delete;
  SchemaVersion& operator=(const SchemaVersion&) = delete;

  // Content copy (columns, constraints, indexes, array); committed, no links.
  std::shared_ptr<SchemaVersion> derive() const;

  std::optional<std::size_t> column_index(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;
  const IndexDef* find_index(std::string_view name) const;
  bool is_pending() const { return state.load(std::memory_order_acquire) == SchemaState::Pending; }
};

using SchemaRef = std::shared_ptr<SchemaVersion>;
using CatalogArray = IndirectionArray<SchemaRef>;
using CatalogVersion = Version<SchemaRef>;

// True when `payload` has the right arity and per-column types.
bool conforms(const RecordPayload& payload, const SchemaVersion& schema);

std::string describe(const ConstraintDef& c, const SchemaVersion& schema);

// Line-based debug form used by golden tests.
std::string to_debug_text(const SchemaVersion& schema, Timestamp ts);

}  // namespace morph
