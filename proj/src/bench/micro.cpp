#include <random>

#include "morph/bench/workload.hpp"
#include "runner.hpp"

namespace morph::bench {

namespace {

constexpr const char* kTable = "ycsb";

class MicroWorker final : public Worker {
 public:
  MicroWorker(Database& db, TableId table, const WorkloadConfig& c, unsigned index)
      : db_(db), table_(table), rng_(c.seed * 7919 + index), pick_(0, c.rows - 1), reads_(c.read_ops),
        writes_(c.write_ops) {}

  Outcome step() override {
    if (!planned_) {
      for (auto& r : reads_) r = Rid{pick_(rng_)};
      for (auto& r : writes_) r = Rid{pick_(rng_)};
      planned_ = true;
    }
    auto txn = db_.begin();
    for (const Rid rid : reads_) {
      auto r = txn.read(table_, rid);
      if (!r.ok()) return fail(txn, r.status);
    }
    for (const Rid rid : writes_) {
      auto cur = txn.read(table_, rid, Access::ReadModifyWrite);
      if (!cur.ok()) return fail(txn, cur.status);
      RecordPayload next = std::move(cur.value);
      next[1] = std::get<std::int64_t>(next[1]) + 1;
      next[2] = (std::get<std::int64_t>(next[2]) + 1) % 100;
      const auto st = txn.write(table_, rid, std::move(next), Access::ReadModifyWrite);
      if (st != OpStatus::Ok) return fail(txn, st);
    }
    Outcome o = finish(txn);
    if (o.committed) planned_ = false;
    return o;
  }

 private:
  Database& db_;
  TableId table_;
  std::mt19937_64 rng_;
  std::uniform_int_distribution<std::uint64_t> pick_;
  std::vector<Rid> reads_;
  std::vector<Rid> writes_;
  bool planned_ = false;
};

TableId load(Database& db, std::uint64_t rows) {
  std::vector<ColumnDef> cols;
  for (const char* name : {"c0", "c1", "c2"}) cols.push_back({name, DataType::Int64, {}, false});
  const TableId id = db.create_table(kTable, std::move(cols));
  constexpr std::uint64_t kBatch = 10'000;
  for (std::uint64_t base = 0; base < rows; base += kBatch) {
    auto txn = db.begin();
    for (std::uint64_t r = base; r < std::min(rows, base + kBatch); ++r) {
      const auto v = static_cast<std::int64_t>(r);
      if (!txn.insert(id, {v, 2 * v, v % 100}).ok()) throw std::runtime_error("micro load failed");
    }
    if (txn.commit() != TxnStatus::Committed) throw std::runtime_error("micro load commit failed");
  }
  return id;
}

std::string check_load(Database& db, TableId table, std::uint64_t rows) {
  auto txn = db.begin();
  auto n = txn.rid_count(table);
  if (!n.ok() || n.value != rows) return "expected " + std::to_string(rows) + " rids";
  for (std::uint64_t r = 0; r < rows; r += std::max<std::uint64_t>(1, rows / 1000)) {
    auto row = txn.read(table, Rid{r});
    if (!row.ok() || row.value.size() != 3) return "row " + std::to_string(r) + " missing or malformed";
  }
  txn.commit();
  return {};
}

}  // namespace

DdlSpec micro_ddl(const WorkloadConfig& c) {
  if (c.ddl_spec) return *c.ddl_spec;
  const ColumnDef col{"c3", DataType::Int64, std::int64_t{0}, true};
  const std::string check = "c2 < " + std::to_string(c.effective_threshold());
  DdlSpec s;
  if (c.ddl_op == "add_column") {
    s = DdlSpec::add_column(kTable, col, c.policy);
  } else if (c.ddl_op == "add_constraint") {
    s = DdlSpec::add_constraint(kTable, check, c.policy);
  } else if (c.ddl_op == "both" || c.ddl_op == "add_column_with_constraint") {
    s.kind = DdlKind::AddColumnWithConstraint;
    s.table = kTable;
    s.policy = c.policy;
    s.columns = {col};
    s.checks = {check};
  } else {
    throw std::invalid_argument("unknown micro ddl '" + c.ddl_op + "'");
  }
  apply_threads(c, s);
  return s;
}

ThroughputSeries run_micro(const WorkloadConfig& config, const RunHooks& hooks) {
  if (config.rows == 0) throw std::invalid_argument("rows must be positive");
  std::optional<DdlSpec> ddl;
  if (!config.ddl_op.empty() || config.ddl_spec) ddl = micro_ddl(config);
  Database db(options_for(config, ddl, hooks.trace));
  const TableId table = load(db, config.rows);
  const std::string load_check = check_load(db, table, config.rows);
  DdlEngine engine(db);
  std::vector<std::unique_ptr<Worker>> workers;
  for (unsigned i = 0; i < config.dml_threads; ++i) {
    workers.push_back(std::make_unique<MicroWorker>(db, table, config, i));
  }
  auto series = drive(config, db, engine, ddl, hooks.ddl, std::move(workers));
  engine.wait_background();
  series.checks["load"] = load_check;
  if (config.txns_per_worker > 0) series.state_digest = table_digest(db, table);
  if (hooks.after_run) hooks.after_run(db, engine);
  return series;
}

}  // namespace morph::bench
