#include "morph/schema.hpp"

#include <sstream>

namespace morph {

std::string to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Lt:
      return "<";
    case CompareOp::Le:
      return "<=";
    case CompareOp::Eq:
      return "=";
    case CompareOp::Ne:
      return "!=";
    case CompareOp::Ge:
      return ">=";
    case CompareOp::Gt:
      return ">";
  }
  return "?";
}

namespace {

// -1, 0, 1; numeric types compare across int/float. nullopt if incomparable.
std::optional<int> three_way(const Value& a, const Value& b) {
  auto as_double = [](const Value& v) -> std::optional<double> {
    if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (auto* d = std::get_if<double>(&v)) return *d;
    return std::nullopt;
  };
  if (auto* ia = std::get_if<std::int64_t>(&a)) {
    if (auto* ib = std::get_if<std::int64_t>(&b)) return (*ia > *ib) - (*ia < *ib);
  }
  auto da = as_double(a), db = as_double(b);
  if (da && db) return (*da > *db) - (*da < *db);
  auto* sa = std::get_if<std::string>(&a);
  auto* sb = std::get_if<std::string>(&b);
  if (sa && sb) {
    int c = sa->compare(*sb);
    return (c > 0) - (c < 0);
  }
  return std::nullopt;
}

}  // namespace

bool compare_values(const Value& lhs, CompareOp op, const Value& rhs) {
  auto c = three_way(lhs, rhs);
  if (!c) return false;  // NULL or mismatched types never satisfy a comparison
  switch (op) {
    case CompareOp::Lt:
      return *c < 0;
    case CompareOp::Le:
      return *c <= 0;
    case CompareOp::Eq:
      return *c == 0;
    case CompareOp::Ne:
      return *c != 0;
    case CompareOp::Ge:
      return *c >= 0;
    case CompareOp::Gt:
      return *c > 0;
  }
  return false;
}

ConstraintDef ConstraintDef::column_vs_const(std::size_t column, CompareOp op, Value constant) {
  ConstraintDef c;
  c.kind = ConstraintKind::ColumnVsConst;
  c.column = column;
  c.op = op;
  c.constant = std::move(constant);
  return c;
}

ConstraintDef ConstraintDef::column_vs_column(std::size_t column, CompareOp op, std::size_t other) {
  ConstraintDef c;
  c.kind = ConstraintKind::ColumnVsColumn;
  c.column = column;
  c.op = op;
  c.other_column = other;
  return c;
}

ConstraintDef ConstraintDef::not_null(std::size_t column) {
  ConstraintDef c;
  c.kind = ConstraintKind::NotNull;
  c.column = column;
  return c;
}

ConstraintDef ConstraintDef::cross_table(std::size_t column, CompareOp op, ForeignLookupRef foreign) {
  ConstraintDef c;
  c.kind = ConstraintKind::CrossTableLookup;
  c.column = column;
  c.op = op;
  c.foreign = std::move(foreign);
  return c;
}

std::string to_string(DdlCategory c) {
  switch (c) {
    case DdlCategory::CopyOnly:
      return "copy";
    case DdlCategory::VerifyOnly:
      return "verify";
    case DdlCategory::CopyAndVerify:
      return "copy+verify";
    case DdlCategory::MetadataOnly:
      return "metadata";
  }
  return "?";
}

std::shared_ptr<SchemaVersion> SchemaVersion::derive() const {
  auto s = std::make_shared<SchemaVersion>();
  s->table_id = table_id;
  s->table_name = table_name;
  s->columns = columns;
  s->constraints = constraints;
  s->indexes = indexes;
  s->data_array = data_array;
  return s;
}

std::optional<std::size_t> SchemaVersion::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t SchemaVersion::require_column(std::string_view name) const {
  if (auto i = column_index(name)) return *i;
  throw std::invalid_argument("table " + table_name + " has no column '" + std::string(name) + "'");
}

const IndexDef* SchemaVersion::find_index(std::string_view name) const {
  for (const auto& idx : indexes) {
    if (idx.name == name) return &idx;
  }
  return nullptr;
}

bool conforms(const RecordPayload& payload, const SchemaVersion& schema) {
  if (payload.size() != schema.columns.size()) return false;
  for (std::size_t i = 0; i < payload.size(); ++i) {
    if (!value_matches(payload[i], schema.columns[i].type)) return false;
    if (!schema.columns[i].nullable && is_null(payload[i])) return false;
  }
  return true;
}

std::string describe(const ConstraintDef& c, const SchemaVersion& schema) {
  auto col = [&](std::size_t i) {
    return i < schema.columns.size() ? schema.columns[i].name : "#" + std::to_string(i);
  };
  std::ostringstream os;
  switch (c.kind) {
    case ConstraintKind::ColumnVsConst:
      os << col(c.column) << ' ' << to_string(c.op) << ' ' << to_string(c.constant);
      break;
    case ConstraintKind::ColumnVsColumn:
      os << col(c.column) << ' ' << to_string(c.op) << ' ' << col(c.other_column);
      break;
    case ConstraintKind::NotNull:
      os << col(c.column) << " not null";
      break;
    case ConstraintKind::CrossTableLookup: {
      os << col(c.column) << ' ' << to_string(c.op) << ' ' << c.foreign.table_name << '.'
         << c.foreign.target_name << " via " << c.foreign.index << '(';
      for (std::size_t i = 0; i < c.foreign.key_columns.size(); ++i) {
        if (i) os << ',';
        os << col(c.foreign.key_columns[i]);
      }
      os << ')';
      break;
    }
  }
  return os.str();
}

std::string to_debug_text(const SchemaVersion& schema, Timestamp ts) {
  std::ostringstream os;
  os << "table " << schema.table_id.value << ' ' << schema.table_name << '\n';
  os << "state " << (schema.is_pending() ? "pending" : "committed") << " ts " << ts.value << '\n';
  if (schema.ddl_category) os << "ddl " << to_string(*schema.ddl_category) << '\n';
  for (const auto& c : schema.columns) {
    os << "column " << c.name << ' ' << to_string(c.type);
    if (!c.nullable) os << " not_null";
    if (!is_null(c.default_value)) os << " default " << to_string(c.default_value);
    os << '\n';
  }
  for (const auto& c : schema.constraints) os << "constraint " << describe(c, schema) << '\n';
  for (const auto& idx : schema.indexes) {
    os << "index " << idx.name << " (";
    for (std::size_t i = 0; i < idx.key_columns.size(); ++i) {
      if (i) os << ',';
      os << schema.columns.at(idx.key_columns[i]).name;
    }
    os << ")\n";
  }
  return os.str();
}

}  // namespace morph
