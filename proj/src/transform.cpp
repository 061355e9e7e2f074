#include "morph/transform.hpp"

#include <charconv>
#include <cmath>

#include "morph/chain.hpp"

namespace morph {

ColumnExpr ColumnExpr::source(std::size_t column) {
  ColumnExpr e;
  e.kind = ExprKind::Source;
  e.column = column;
  return e;
}

ColumnExpr ColumnExpr::constant_value(Value v) {
  ColumnExpr e;
  e.kind = ExprKind::Constant;
  e.constant = std::move(v);
  return e;
}

ColumnExpr ColumnExpr::cast(std::size_t column, DataType type) {
  ColumnExpr e;
  e.kind = ExprKind::Cast;
  e.column = column;
  e.type = type;
  return e;
}

ColumnExpr ColumnExpr::lookup(ForeignLookupRef ref) {
  ColumnExpr e;
  e.kind = ExprKind::ForeignLookup;
  e.foreign = std::move(ref);
  return e;
}

ColumnExpr ColumnExpr::sum(ForeignLookupRef ref) {
  ColumnExpr e;
  e.kind = ExprKind::ForeignSum;
  e.foreign = std::move(ref);
  return e;
}

Transform Transform::identity(std::size_t arity) {
  Transform t;
  for (std::size_t i = 0; i < arity; ++i) t.columns.push_back(ColumnExpr::source(i));
  return t;
}

bool Transform::is_identity(std::size_t input_arity) const {
  if (columns.size() != input_arity) return false;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].kind != ExprKind::Source || columns[i].column != i) return false;
  }
  return true;
}

bool Transform::reads_foreign() const {
  for (const auto& c : columns) {
    if (c.kind == ExprKind::ForeignLookup || c.kind == ExprKind::ForeignSum) return true;
  }
  return false;
}

namespace {

std::vector<Value> key_values(const RecordPayload& local, const std::vector<std::size_t>& cols) {
  std::vector<Value> key;
  key.reserve(cols.size());
  for (auto c : cols) key.push_back(c < local.size() ? local[c] : Value{});
  return key;
}

struct ForeignSide {
  SchemaRef schema;
  const IndexDef* index = nullptr;
};

std::optional<ForeignSide> resolve(const Catalog& catalog, const ForeignLookupRef& ref) {
  if (!catalog.has_table(ref.table)) return std::nullopt;
  ForeignSide side;
  side.schema = catalog.committed_schema(ref.table);
  if (!side.schema) return std::nullopt;
  side.index = side.schema->find_index(ref.index);
  if (!side.index || !side.index->index) return std::nullopt;
  return side;
}

}  // namespace

std::optional<RecordPayload> LookupContext::find(const ForeignLookupRef& ref,
                                                 const RecordPayload& local) const {
  auto side = resolve(*catalog_, ref);
  if (!side) return std::nullopt;
  const auto key = encode_key(key_values(local, ref.key_columns));
  if (overlay_) {
    if (auto own = overlay_(ref.table, *side->index, key)) return own;
  }
  auto rid = side->index->index->lookup(key);
  if (!rid || rid->value >= side->schema->data_array->size()) return std::nullopt;
  auto* v = latest_committed(*side->schema->data_array, *rid);
  if (!v || v->tombstone) return std::nullopt;
  return v->payload;
}

Value LookupContext::sum(const ForeignLookupRef& ref, const RecordPayload& local) const {
  auto side = resolve(*catalog_, ref);
  if (!side) return Value{};
  const auto prefix = key_values(local, ref.key_columns);
  bool any_float = false;
  std::int64_t isum = 0;
  double fsum = 0;
  for (const auto& [key, rid] : side->index->index->prefix(encode_key(prefix))) {
    if (rid.value >= side->schema->data_array->size()) continue;
    auto* v = latest_committed(*side->schema->data_array, rid);
    if (!v || v->tombstone || ref.target_column >= v->payload.size()) continue;
    const Value& x = v->payload[ref.target_column];
    if (auto* i = std::get_if<std::int64_t>(&x)) {
      isum += *i;
      fsum += static_cast<double>(*i);
    } else if (auto* d = std::get_if<double>(&x)) {
      any_float = true;
      fsum += *d;
    } else if (!is_null(x)) {
      return Value{};
    }
  }
  if (any_float) return fsum;
  return isum;
}

std::optional<Value> cast_value(const Value& v, DataType to) {
  if (is_null(v)) return v;
  switch (to) {
    case DataType::Int64:
      if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
      if (auto* d = std::get_if<double>(&v)) {
        if (std::trunc(*d) != *d || std::abs(*d) > 9.2e18) return std::nullopt;
        return static_cast<std::int64_t>(*d);
      }
      if (auto* s = std::get_if<std::string>(&v)) {
        std::int64_t out = 0;
        auto [p, ec] = std::from_chars(s->data(), s->data() + s->size(), out);
        if (ec != std::errc() || p != s->data() + s->size() || s->empty()) return std::nullopt;
        return out;
      }
      break;
    case DataType::Float64:
      if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
      if (auto* d = std::get_if<double>(&v)) return *d;
      if (auto* s = std::get_if<std::string>(&v)) {
        double out = 0;
        auto [p, ec] = std::from_chars(s->data(), s->data() + s->size(), out);
        if (ec != std::errc() || p != s->data() + s->size() || s->empty()) return std::nullopt;
        return out;
      }
      break;
    case DataType::Varchar:
      if (auto* s = std::get_if<std::string>(&v)) return *s;
      if (auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
      if (auto* d = std::get_if<double>(&v)) {
        char buf[64];
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, *d);
        if (ec != std::errc()) return std::nullopt;
        return std::string(buf, p);
      }
      break;
  }
  return std::nullopt;
}

TransformResult transform_record(const RecordPayload& payload, const Transform& transform,
                                 const SchemaVersion& target, const LookupContext* ctx) {
  TransformResult r;
  r.payload.reserve(transform.columns.size());
  for (std::size_t i = 0; i < transform.columns.size(); ++i) {
    const auto& e = transform.columns[i];
    switch (e.kind) {
      case ExprKind::Source:
        if (e.column >= payload.size()) {
          r.error = "source column " + std::to_string(e.column) + " out of range";
          return r;
        }
        r.payload.push_back(payload[e.column]);
        break;
      case ExprKind::Constant:
        r.payload.push_back(e.constant);
        break;
      case ExprKind::Cast: {
        if (e.column >= payload.size()) {
          r.error = "source column " + std::to_string(e.column) + " out of range";
          return r;
        }
        auto c = cast_value(payload[e.column], e.type);
        if (!c) {
          r.error = "cannot convert " + to_string(payload[e.column]) + " to " + to_string(e.type);
          return r;
        }
        r.payload.push_back(std::move(*c));
        break;
      }
      case ExprKind::ForeignLookup: {
        if (!ctx) throw std::logic_error("foreign expression without lookup context");
        auto row = ctx->find(e.foreign, payload);
        r.payload.push_back(row && e.foreign.target_column < row->size() ? (*row)[e.foreign.target_column]
                                                                         : Value{});
        break;
      }
      case ExprKind::ForeignSum:
        if (!ctx) throw std::logic_error("foreign expression without lookup context");
        r.payload.push_back(ctx->sum(e.foreign, payload));
        break;
    }
    if ((e.kind == ExprKind::ForeignLookup || e.kind == ExprKind::ForeignSum) && i < target.columns.size()) {
      auto c = cast_value(r.payload.back(), target.columns[i].type);
      r.payload.back() = c ? std::move(*c) : Value{};
    }
  }
  if (!conforms(r.payload, target)) {
    r.error = "result does not conform to table " + target.table_name;
    return r;
  }
  r.ok = true;
  return r;
}

VerifyResult verify_record(const RecordPayload& payload, const std::vector<ConstraintDef>& constraints,
                           const LookupContext* ctx) {
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& c = constraints[i];
    if (c.column >= payload.size()) return {false, i};
    const Value& lhs = payload[c.column];
    bool ok = false;
    switch (c.kind) {
      case ConstraintKind::NotNull:
        ok = !is_null(lhs);
        break;
      case ConstraintKind::ColumnVsConst:
        ok = compare_values(lhs, c.op, c.constant);
        break;
      case ConstraintKind::ColumnVsColumn:
        ok = c.other_column < payload.size() && compare_values(lhs, c.op, payload[c.other_column]);
        break;
      case ConstraintKind::CrossTableLookup: {
        if (!ctx) throw std::logic_error("cross-table constraint without lookup context");
        auto row = ctx->find(c.foreign, payload);
        ok = row && c.foreign.target_column < row->size() &&
             compare_values(lhs, c.op, (*row)[c.foreign.target_column]);
        break;
      }
    }
    if (!ok) return {false, i};
  }
  return {};
}

}  // namespace morph
