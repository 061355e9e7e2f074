#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "morph/catalog.hpp"
#include "morph/schema.hpp"

namespace morph {

// How one output column is produced from an input record.
enum class ExprKind : std::uint8_t {
  Source,         // input column `column`
  Constant,       // `constant`
  Cast,           // input column `column` converted to `type`
  ForeignLookup,  // `foreign.target_column` of the row found through `foreign`
  ForeignSum,     // sum of `foreign.target_column` over rows matching a key prefix
};

struct ColumnExpr {
  ExprKind kind = ExprKind::Source;
  std::size_t column = 0;
  Value constant;
  DataType type = DataType::Int64;
  ForeignLookupRef foreign;

  static ColumnExpr source(std::size_t column);
  static ColumnExpr constant_value(Value v);
  static ColumnExpr cast(std::size_t column, DataType type);
  static ColumnExpr lookup(ForeignLookupRef ref);
  static ColumnExpr sum(ForeignLookupRef ref);
};

// Record-to-record mapping from one schema version to another.
struct Transform {
  std::vector<ColumnExpr> columns;

  static Transform identity(std::size_t arity);
  bool is_identity(std::size_t input_arity) const;
  bool reads_foreign() const;
};

// Read access to other tables' newest committed rows, used by foreign
// expressions and cross-table constraints. Caller holds an EpochGuard.
class LookupContext {
 public:
  // Rows written but not yet committed by the caller, matched by table and
  // encoded index key. Consulted before committed rows.
  using Overlay = std::function<std::optional<RecordPayload>(TableId, const IndexDef&, const std::string&)>;

  explicit LookupContext(const Catalog& catalog, Overlay overlay = {})
      : catalog_(&catalog), overlay_(std::move(overlay)) {}

  std::optional<RecordPayload> find(const ForeignLookupRef& ref, const RecordPayload& local) const;
  // Sum of the target column over live rows whose key starts with the local
  // key columns. Null when a value is not numeric.
  Value sum(const ForeignLookupRef& ref, const RecordPayload& local) const;

 private:
  const Catalog* catalog_;
  Overlay overlay_;
};

struct TransformResult {
  bool ok = false;
  RecordPayload payload;
  std::string error;
};

// Converts `payload` and checks the result against `target`.
TransformResult transform_record(const RecordPayload& payload, const Transform& transform,
                                 const SchemaVersion& target, const LookupContext* ctx);

// Value conversion used by Cast; nullopt when the value has no representation
// in the target type.
std::optional<Value> cast_value(const Value& v, DataType to);

struct VerifyResult {
  bool ok = true;
  std::size_t failed = 0;  // index into the constraint list
};

VerifyResult verify_record(const RecordPayload& payload, const std::vector<ConstraintDef>& constraints,
                           const LookupContext* ctx);

}  // namespace morph
