#include <algorithm>
#include <stdexcept>

#include "morph/ddl.hpp"

namespace morph {

ForeignLookupRef parse_foreign_ref(const std::string& text, const SchemaVersion& local, const Catalog& catalog);

namespace {

bool is_indexed(const SchemaVersion& s, std::size_t col) {
  for (const auto& ix : s.indexes) {
    if (std::find(ix.key_columns.begin(), ix.key_columns.end(), col) != ix.key_columns.end()) return true;
  }
  return false;
}

bool constraint_uses(const ConstraintDef& c, std::size_t col) {
  if (c.column == col) return true;
  if (c.kind == ConstraintKind::ColumnVsColumn && c.other_column == col) return true;
  if (c.kind == ConstraintKind::CrossTableLookup) {
    const auto& k = c.foreign.key_columns;
    return std::find(k.begin(), k.end(), col) != k.end();
  }
  return false;
}

std::size_t shift(std::size_t idx, std::size_t dropped) { return idx > dropped ? idx - 1 : idx; }

// Reserves new table names and hands them back if compilation fails.
class NewTables {
 public:
  explicit NewTables(Catalog& catalog) : catalog_(catalog) {}
  ~NewTables() {
    if (keep_) return;
    for (auto id : ids_) catalog_.release_name(id);
  }
  TableId allocate(const std::string& name) {
    if (name.empty()) throw std::invalid_argument("new table needs a name");
    ids_.push_back(catalog_.allocate_table(name));
    return ids_.back();
  }
  void keep() { keep_ = true; }

 private:
  Catalog& catalog_;
  std::vector<TableId> ids_;
  bool keep_ = false;
};

void make_indexes_fresh(SchemaVersion& s, std::vector<std::size_t>& build) {
  for (std::size_t i = 0; i < s.indexes.size(); ++i) {
    s.indexes[i].index = std::make_shared<KeyIndex>(false);
    build.push_back(i);
  }
}

// New table holding a projection of the source, seeded row by row.
DdlPlan::Target projection_target(Database& db, NewTables& fresh, const SchemaVersion& src,
                                  const TargetSpec& spec) {
  DdlPlan::Target t;
  t.table = fresh.allocate(spec.name);
  t.new_table = true;
  t.copies = true;
  std::vector<ColumnDef> cols;
  if (spec.columns.empty()) {
    cols = src.columns;
    t.transform = Transform::identity(src.columns.size());
  } else {
    for (const auto& name : spec.columns) {
      const auto idx = src.require_column(name);
      cols.push_back(src.columns[idx]);
      t.transform.columns.push_back(ColumnExpr::source(idx));
    }
  }
  t.schema = db.make_table_schema(t.table, spec.name, std::move(cols), spec.indexes,
                                  src.data_array->rid_space());
  t.schema->copied_from = src.table_id;
  make_indexes_fresh(*t.schema, t.build_indexes);
  return t;
}

std::vector<ConstraintDef> parse_checks(const DdlSpec& spec, const SchemaVersion& s, const Catalog& catalog) {
  std::vector<ConstraintDef> out;
  for (const auto& c : spec.checks) out.push_back(parse_constraint(c, s, catalog));
  return out;
}

}  // namespace

DdlPlan compile_ddl(const DdlSpec& spec, Database& db, Transaction& txn) {
  DdlPlan plan;
  plan.kind = spec.kind;
  auto& catalog = db.catalog();
  NewTables fresh(catalog);

  if (spec.kind == DdlKind::CreateTable) {
    if (spec.columns.empty()) throw std::invalid_argument("create_table needs columns");
    DdlPlan::Target t;
    t.table = fresh.allocate(spec.table);
    t.new_table = true;
    std::vector<IndexSpec> indexes;
    if (!spec.index.name.empty()) indexes.push_back(spec.index);
    t.schema = db.make_table_schema(t.table, spec.table, spec.columns, indexes);
    plan.targets.push_back(std::move(t));
    plan.category = DdlCategory::MetadataOnly;
    fresh.keep();
    return plan;
  }

  const TableId src_id = db.table_id(spec.table);
  auto res = txn.schema(src_id);
  if (!res.ok()) throw std::invalid_argument("table '" + spec.table + "' has no visible schema");
  plan.source = src_id;
  plan.source_schema = res.value;
  const SchemaVersion& src = *plan.source_schema;

  auto in_place = [&](SchemaRef s) {
    DdlPlan::Target t;
    t.table = src_id;
    t.schema = std::move(s);
    return t;
  };

  switch (spec.kind) {
    case DdlKind::AddColumn:
    case DdlKind::AddColumnWithConstraint: {
      if (spec.columns.empty()) throw std::invalid_argument("add_column needs at least one column");
      auto s = src.derive();
      auto t = in_place(s);
      t.copies = true;
      t.transform = Transform::identity(src.columns.size());
      for (const auto& c : spec.columns) {
        if (s->column_index(c.name)) throw std::invalid_argument("column '" + c.name + "' already exists");
        if (!value_matches(c.default_value, c.type)) {
          throw std::invalid_argument("default of column '" + c.name + "' does not match its type");
        }
        if (!c.nullable && is_null(c.default_value)) {
          throw std::invalid_argument("not-null column '" + c.name + "' needs a default");
        }
        s->columns.push_back(c);
        t.transform.columns.push_back(ColumnExpr::constant_value(c.default_value));
      }
      t.verify = parse_checks(spec, *s, catalog);
      if (spec.kind == DdlKind::AddColumnWithConstraint && t.verify.empty()) {
        throw std::invalid_argument("add_column_with_constraint needs a check");
      }
      for (const auto& c : t.verify) s->constraints.push_back(c);
      plan.category = t.verify.empty() ? DdlCategory::CopyOnly : DdlCategory::CopyAndVerify;
      plan.targets.push_back(std::move(t));
      break;
    }
    case DdlKind::DropColumn: {
      const auto idx = src.require_column(spec.column);
      if (is_indexed(src, idx)) throw std::invalid_argument("column '" + spec.column + "' is indexed");
      for (const auto& c : src.constraints) {
        if (constraint_uses(c, idx)) {
          throw std::invalid_argument("column '" + spec.column + "' is used by constraint " + describe(c, src));
        }
      }
      auto s = src.derive();
      s->columns.erase(s->columns.begin() + static_cast<std::ptrdiff_t>(idx));
      for (auto& c : s->constraints) {
        c.column = shift(c.column, idx);
        c.other_column = shift(c.other_column, idx);
        for (auto& k : c.foreign.key_columns) k = shift(k, idx);
      }
      for (auto& ix : s->indexes) {
        for (auto& k : ix.key_columns) k = shift(k, idx);
      }
      auto t = in_place(s);
      t.copies = true;
      for (std::size_t i = 0; i < src.columns.size(); ++i) {
        if (i != idx) t.transform.columns.push_back(ColumnExpr::source(i));
      }
      plan.category = DdlCategory::CopyOnly;
      plan.targets.push_back(std::move(t));
      break;
    }
    case DdlKind::ModifyColumn: {
      const auto idx = src.require_column(spec.column);
      if (is_indexed(src, idx)) throw std::invalid_argument("column '" + spec.column + "' is indexed");
      auto s = src.derive();
      auto& col = s->columns[idx];
      col.type = spec.new_type;
      if (!is_null(col.default_value)) {
        auto d = cast_value(col.default_value, spec.new_type);
        col.default_value = d ? *d : Value{};
      }
      auto t = in_place(s);
      t.copies = true;
      t.transform = Transform::identity(src.columns.size());
      t.transform.columns[idx] = ColumnExpr::cast(idx, spec.new_type);
      plan.category = DdlCategory::CopyOnly;
      plan.targets.push_back(std::move(t));
      break;
    }
    case DdlKind::AddConstraint: {
      auto s = src.derive();
      auto t = in_place(s);
      t.verify = parse_checks(spec, *s, catalog);
      if (t.verify.empty()) throw std::invalid_argument("add_constraint needs a check");
      for (const auto& c : t.verify) {
        s->constraints.push_back(c);
        if (c.kind == ConstraintKind::NotNull) s->columns[c.column].nullable = false;
      }
      plan.category = DdlCategory::VerifyOnly;
      plan.targets.push_back(std::move(t));
      break;
    }
    case DdlKind::CreateIndex: {
      if (spec.index.name.empty() || spec.index.columns.empty()) {
        throw std::invalid_argument("create_index needs name and columns");
      }
      if (src.find_index(spec.index.name)) throw std::invalid_argument("index '" + spec.index.name + "' exists");
      auto s = src.derive();
      IndexDef def;
      def.name = spec.index.name;
      for (const auto& c : spec.index.columns) def.key_columns.push_back(s->require_column(c));
      def.index = std::make_shared<KeyIndex>(false);
      s->indexes.push_back(std::move(def));
      auto t = in_place(s);
      t.build_indexes.push_back(s->indexes.size() - 1);
      plan.category = DdlCategory::CopyOnly;
      plan.targets.push_back(std::move(t));
      break;
    }
    case DdlKind::CreateTableAs: {
      if (spec.targets.size() != 1) throw std::invalid_argument("create_table_as needs exactly one target");
      plan.targets.push_back(projection_target(db, fresh, src, spec.targets[0]));
      plan.category = DdlCategory::CopyOnly;
      break;
    }
    case DdlKind::SplitTable: {
      if (spec.targets.size() < 2) throw std::invalid_argument("split_table needs at least two targets");
      for (const auto& ts : spec.targets) plan.targets.push_back(projection_target(db, fresh, src, ts));
      if (spec.drop_source) {
        auto t = in_place(src.derive());
        t.tombstone = true;
        plan.targets.push_back(std::move(t));
      }
      plan.category = DdlCategory::CopyOnly;
      break;
    }
    case DdlKind::Preaggregate: {
      if (spec.derived_column.empty() || spec.foreign.empty()) {
        throw std::invalid_argument("preaggregate needs derive= and foreign=");
      }
      if (src.column_index(spec.derived_column)) {
        throw std::invalid_argument("column '" + spec.derived_column + "' already exists");
      }
      auto ref = parse_foreign_ref(spec.foreign, src, catalog);
      auto s = src.derive();
      s->columns.push_back({spec.derived_column, spec.derived_type, {}, true});
      auto t = in_place(s);
      t.copies = true;
      t.transform = Transform::identity(src.columns.size());
      t.transform.columns.push_back(ColumnExpr::sum(std::move(ref)));
      plan.category = DdlCategory::CopyOnly;
      plan.targets.push_back(std::move(t));
      break;
    }
    case DdlKind::JoinTable: {
      if (spec.targets.size() != 1) throw std::invalid_argument("join_table needs exactly one target");
      if (spec.derived_column.empty() || spec.foreign.empty()) {
        throw std::invalid_argument("join_table needs derive= and foreign=");
      }
      TargetSpec all = spec.targets[0];
      all.columns.clear();
      auto t = projection_target(db, fresh, src, all);
      if (t.schema->column_index(spec.derived_column)) {
        throw std::invalid_argument("column '" + spec.derived_column + "' already exists");
      }
      t.schema->columns.push_back({spec.derived_column, spec.derived_type, {}, true});
      t.transform.columns.push_back(ColumnExpr::lookup(parse_foreign_ref(spec.foreign, src, catalog)));
      plan.category = DdlCategory::CopyOnly;
      plan.targets.push_back(std::move(t));
      break;
    }
    case DdlKind::DropTable: {
      auto t = in_place(src.derive());
      t.tombstone = true;
      plan.category = DdlCategory::MetadataOnly;
      plan.targets.push_back(std::move(t));
      break;
    }
    case DdlKind::CreateTable:
      break;
  }
  for (auto& t : plan.targets) {
    if (t.schema) t.schema->ddl_category = plan.category;
  }
  fresh.keep();
  return plan;
}

}  // namespace morph
