#include "morph/ddl.hpp"

#include <stdexcept>

namespace morph {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

void phase(const DdlHooks& hooks, DdlPhase p) {
  if (hooks.on_phase) hooks.on_phase(p);
}

DdlResult failed(std::string reason, std::string detail, DdlStats stats = {}) {
  DdlResult r;
  r.status = DdlStatus::Aborted;
  r.reason = std::move(reason);
  r.detail = std::move(detail);
  r.stats = stats;
  return r;
}

void release_new_tables(Catalog& catalog, const DdlPlan& plan) {
  for (const auto& t : plan.targets) {
    if (t.new_table) catalog.release_name(t.table);
  }
}

void publish_built(const DdlPlan& plan) {
  for (const auto& t : plan.targets) {
    for (auto i : t.build_indexes) t.schema->indexes[i].index->publish();
  }
}

std::vector<CatalogVersion*> install_all(Transaction& txn, const DdlPlan& plan) {
  std::vector<CatalogVersion*> out;
  for (const auto& t : plan.targets) {
    auto* v = txn.install_schema(t.table, t.schema, t.tombstone);
    if (!v) return {};
    out.push_back(v);
  }
  return out;
}

bool has_copies(const DdlPlan& plan) {
  for (const auto& t : plan.targets) {
    if (t.copies) return true;
  }
  return false;
}

// Verification and index builds of targets whose rows stay where they are.
std::vector<MigrationTarget> side_targets(const DdlPlan& plan) {
  std::vector<MigrationTarget> out;
  for (const auto& t : plan.targets) {
    if (t.copies || t.tombstone || (t.verify.empty() && t.build_indexes.empty())) continue;
    MigrationTarget mt;
    mt.schema = t.schema.get();
    mt.verify = t.verify;
    for (auto i : t.build_indexes) mt.build.push_back(&t.schema->indexes[i]);
    mt.index_array = plan.source_schema->data_array.get();
    out.push_back(std::move(mt));
  }
  return out;
}

struct Failure {
  std::string reason;
  std::string detail;
};

std::string rid_detail(Rid rid, const std::string& what) { return "rid " + std::to_string(rid.value) + ": " + what; }

// Rewrites the snapshot's live rows of [0, bound) into every copying target
// as writes of `txn`.
std::optional<Failure> copy_through(Transaction& txn, const DdlPlan& plan, std::uint64_t bound,
                                    const LookupContext& ctx, DdlStats& stats) {
  const auto& src = *plan.source_schema->data_array;
  for (std::uint64_t r = 0; r < bound; ++r) {
    EpochGuard guard;
    ++stats.scan_visits;
    auto vv = txn.read_raw(src, Rid{r});
    if (!vv || vv->version->tombstone) continue;
    for (const auto& t : plan.targets) {
      if (!t.copies) continue;
      auto tr = transform_record(vv->version->payload, t.transform, *t.schema, &ctx);
      if (!tr.ok) return Failure{"incompatible_data", rid_detail(Rid{r}, tr.error)};
      if (!t.verify.empty()) {
        auto vr = verify_record(tr.payload, t.verify, &ctx);
        if (!vr.ok) {
          return Failure{"incompatible_data", rid_detail(Rid{r}, "violates " + describe(t.verify[vr.failed], *t.schema))};
        }
      }
      if (txn.write_raw(t.table, t.schema->data_array, t.schema, Rid{r}, std::move(tr.payload)) != OpStatus::Ok) {
        return Failure{"conflict", rid_detail(Rid{r}, "write conflict")};
      }
    }
    ++stats.scan_migrated;
  }
  return std::nullopt;
}

std::optional<Failure> side_pass(const DdlPlan& plan, std::uint64_t bound, const LookupContext& ctx,
                                 int threads, DdlStats& stats) {
  auto side = side_targets(plan);
  if (side.empty()) return std::nullopt;
  auto ps = scan_pass_parallel(*plan.source_schema->data_array, bound, side, &ctx, threads);
  stats.scan_visits += ps.visits;
  if (ps.error.status != RowStatus::Ok) return Failure{"incompatible_data", rid_detail(ps.error.rid, ps.error.detail)};
  return std::nullopt;
}

struct CdcState {
  std::atomic<std::uint64_t> stop{~std::uint64_t{0}};
  std::atomic<bool> cancel{false};
  std::atomic<bool> failed{false};
  std::atomic<std::uint64_t> records{0};
  std::atomic<std::uint64_t> applied{0};
  std::mutex mu;
  RowError error;
};

void cdc_worker(const RedoLog& log, Lsn from, TableId table, unsigned part, unsigned parts,
                const std::vector<MigrationTarget>& targets, const LookupContext& ctx, CdcState& cdc) {
  auto scanner = log.scan(from, table, kMaxTimestamp);
  while (!cdc.cancel.load(std::memory_order_acquire)) {
    const LogRecord* rec = scanner.next();
    if (!rec) {
      if (scanner.position().value >= cdc.stop.load(std::memory_order_acquire)) break;
      std::this_thread::sleep_for(std::chrono::microseconds(200));
      continue;
    }
    if (rec->lsn.value >= cdc.stop.load(std::memory_order_acquire)) break;
    if (rec->rid.value % parts != part) continue;
    cdc.records.fetch_add(1, std::memory_order_relaxed);
    EpochGuard guard;
    std::string detail;
    auto st = migrate_row(targets, rec->rid, rec->payload, rec->tombstone, rec->commit_ts, &ctx, &detail);
    if (st != RowStatus::Ok) {
      std::lock_guard lk(cdc.mu);
      if (!cdc.failed.exchange(true)) cdc.error = {st, rec->rid, std::move(detail)};
      cdc.cancel.store(true, std::memory_order_release);
      break;
    }
    cdc.applied.fetch_add(1, std::memory_order_relaxed);
  }
}

bool is_metadata_kind(DdlKind k) { return k == DdlKind::CreateTable || k == DdlKind::DropTable; }

}  // namespace

DdlEngine::DdlEngine(Database& db) : db_(db) {}

DdlEngine::~DdlEngine() { wait_background(); }

DdlResult DdlEngine::execute(const DdlSpec& spec, const DdlHooks& hooks) {
  const auto t0 = Clock::now();
  std::unique_lock<std::mutex> table_guard;
  if (spec.kind != DdlKind::CreateTable) {
    auto id = db_.catalog().find(spec.table);
    if (!id) return failed("invalid", "unknown table '" + spec.table + "'");
    join_background(*id);
    table_guard = std::unique_lock(db_.catalog().table(*id).ddl_mu);
  }
  DdlResult r;
  try {
    if (is_metadata_kind(spec.kind)) {
      r = run_metadata(spec, hooks);
    } else {
      switch (spec.policy) {
        case Policy::Blocking: r = run_blocking(spec, hooks); break;
        case Policy::Lazy: r = run_lazy(spec, hooks); break;
        case Policy::BasicDdam: r = run_basic(spec, hooks); break;
        case Policy::RelaxedDdam: r = run_relaxed(spec, hooks); break;
      }
    }
  } catch (const std::invalid_argument& e) {
    r = failed("invalid", e.what());
  }
  r.stats.total_ms = ms_since(t0);
  return r;
}

DdlResult DdlEngine::run_metadata(const DdlSpec& spec, const DdlHooks& hooks) {
  auto txn = db_.begin();
  DdlStats stats;
  stats.begin_ts = txn.begin_ts();
  auto plan = compile_ddl(spec, db_, txn);
  phase(hooks, DdlPhase::Installing);
  if (install_all(txn, plan).empty()) {
    txn.abort();
    release_new_tables(db_.catalog(), plan);
    phase(hooks, DdlPhase::Aborted);
    return failed("conflict", "schema install failed", stats);
  }
  stats.write_set_size = txn.write_set_size();
  if (txn.commit() != TxnStatus::Committed) {
    release_new_tables(db_.catalog(), plan);
    phase(hooks, DdlPhase::Aborted);
    return failed("conflict", "commit failed: " + to_string(txn.abort_reason()), stats);
  }
  stats.commit_ts = txn.ticket()->commit_ts;
  for (const auto& t : plan.targets) {
    if (t.tombstone) db_.catalog().release_name(t.table);
  }
  phase(hooks, DdlPhase::Done);
  return {DdlStatus::Committed, {}, {}, stats};
}

DdlResult DdlEngine::run_blocking(const DdlSpec& spec, const DdlHooks& hooks) {
  auto& catalog = db_.catalog();
  auto& handle = catalog.table(db_.table_id(spec.table));
  handle.lock.lock();
  struct Unlock {
    TableLock& lock;
    ~Unlock() { lock.unlock(); }
  } unlock{handle.lock};

  auto txn = db_.begin();
  txn.hold_table_exclusive(handle.id);
  DdlStats stats;
  stats.begin_ts = txn.begin_ts();
  auto plan = compile_ddl(spec, db_, txn);
  auto abort_with = [&](Failure f) {
    if (txn.status() == TxnStatus::Active) txn.abort();
    release_new_tables(catalog, plan);
    phase(hooks, DdlPhase::Aborted);
    return failed(std::move(f.reason), std::move(f.detail), stats);
  };

  phase(hooks, DdlPhase::Installing);
  if (install_all(txn, plan).empty()) return abort_with({"conflict", "schema install failed"});
  LookupContext ctx(catalog);
  const std::uint64_t bound = plan.source_schema->data_array->size();
  stats.scan_bound = bound;
  phase(hooks, DdlPhase::Scanning);
  const auto ts = Clock::now();
  if (has_copies(plan)) {
    if (auto f = copy_through(txn, plan, bound, ctx, stats)) return abort_with(std::move(*f));
  }
  if (auto f = side_pass(plan, bound, ctx, static_cast<int>(std::max(1u, spec.threads)), stats)) {
    return abort_with(std::move(*f));
  }
  stats.scan_ms = ms_since(ts);
  phase(hooks, DdlPhase::Finalizing);
  stats.write_set_size = txn.write_set_size();
  if (txn.commit() != TxnStatus::Committed) {
    return abort_with({"conflict", "commit failed: " + to_string(txn.abort_reason())});
  }
  stats.commit_ts = txn.ticket()->commit_ts;
  publish_built(plan);
  phase(hooks, DdlPhase::Done);
  return {DdlStatus::Committed, {}, {}, stats};
}

DdlResult DdlEngine::run_basic(const DdlSpec& spec, const DdlHooks& hooks) {
  auto& catalog = db_.catalog();
  auto txn = db_.begin();
  DdlStats stats;
  stats.begin_ts = txn.begin_ts();
  auto plan = compile_ddl(spec, db_, txn);
  auto abort_with = [&](Failure f) {
    if (txn.status() == TxnStatus::Active) txn.abort();
    release_new_tables(catalog, plan);
    phase(hooks, DdlPhase::Aborted);
    return failed(std::move(f.reason), std::move(f.detail), stats);
  };

  phase(hooks, DdlPhase::Installing);
  if (install_all(txn, plan).empty()) return abort_with({"conflict", "schema install failed"});
  LookupContext ctx(catalog);
  auto src_array = plan.source_schema->data_array;
  const std::uint64_t bound = src_array->size();
  stats.scan_bound = bound;
  phase(hooks, DdlPhase::Scanning);
  const auto ts = Clock::now();
  if (has_copies(plan)) {
    if (auto f = copy_through(txn, plan, bound, ctx, stats)) return abort_with(std::move(*f));
  }
  if (auto f = side_pass(plan, bound, ctx, static_cast<int>(std::max(1u, spec.threads)), stats)) {
    return abort_with(std::move(*f));
  }
  stats.scan_ms = ms_since(ts);
  // Any row committed after our snapshot (including new rows) was missed.
  txn.add_precommit([src_array, begin = txn.begin_ts()](Timestamp) {
    const auto n = src_array->size();
    for (std::uint64_t r = 0; r < n; ++r) {
      DataVersion* v = latest_committed(*src_array, Rid{r});
      if (v && v->stamp().ts() > begin) return false;
    }
    return true;
  });
  phase(hooks, DdlPhase::Finalizing);
  stats.write_set_size = txn.write_set_size();
  if (txn.commit() != TxnStatus::Committed) {
    return abort_with({"conflict", "commit failed: " + to_string(txn.abort_reason())});
  }
  stats.commit_ts = txn.ticket()->commit_ts;
  publish_built(plan);
  phase(hooks, DdlPhase::Done);
  return {DdlStatus::Committed, {}, {}, stats};
}

DdlResult DdlEngine::run_lazy(const DdlSpec& spec, const DdlHooks& hooks) {
  if (spec.kind == DdlKind::CreateIndex || spec.kind == DdlKind::AddConstraint ||
      spec.kind == DdlKind::AddColumnWithConstraint) {
    return failed("unsupported", "lazy migration cannot verify or build indexes");
  }
  if (spec.kind == DdlKind::CreateTableAs || spec.kind == DdlKind::SplitTable || spec.kind == DdlKind::JoinTable) {
    return failed("unsupported", "lazy migration only rewrites tables in place");
  }
  auto& catalog = db_.catalog();
  auto txn = db_.begin();
  DdlStats stats;
  stats.begin_ts = txn.begin_ts();
  auto plan = compile_ddl(spec, db_, txn);
  auto src_array = plan.source_schema->data_array;

  std::vector<std::pair<TableId, std::shared_ptr<LazyMigration>>> lazies;
  for (auto& t : plan.targets) {
    if (!t.copies) continue;
    if (!t.new_table) t.schema->data_array = std::make_shared<DataArray>(src_array->rid_space());
    t.schema->lazy = std::make_shared<LazyMigration>(src_array, t.schema->data_array, t.transform,
                                                     t.schema.get(), &catalog);
    lazies.emplace_back(t.table, t.schema->lazy);
  }
  phase(hooks, DdlPhase::Installing);
  if (install_all(txn, plan).empty()) {
    txn.abort();
    release_new_tables(catalog, plan);
    phase(hooks, DdlPhase::Aborted);
    return failed("conflict", "schema install failed", stats);
  }
  stats.write_set_size = txn.write_set_size();
  if (txn.commit() != TxnStatus::Committed) {
    release_new_tables(catalog, plan);
    phase(hooks, DdlPhase::Aborted);
    return failed("conflict", "commit failed: " + to_string(txn.abort_reason()), stats);
  }
  stats.commit_ts = txn.ticket()->commit_ts;
  const std::uint64_t bound = src_array->size();
  stats.scan_bound = bound;

  std::lock_guard lk(bg_mu_);
  for (auto& [table, lazy] : lazies) lazy_[table.value] = lazy;
  if (!lazies.empty()) {
    const unsigned n = std::max(1u, spec.threads);
    auto remaining = std::make_shared<std::atomic<unsigned>>(n);
    auto shared_plan = std::make_shared<DdlPlan>(std::move(plan));
    auto& threads = background_[shared_plan->source->value];
    for (unsigned i = 0; i < n; ++i) {
      const std::uint64_t from = bound * i / n;
      const std::uint64_t to = bound * (i + 1) / n;
      threads.emplace_back([lazies, remaining, shared_plan, from, to] {
        for (auto& [table, lazy] : lazies) lazy->sweep(from, to);
        if (remaining->fetch_sub(1) == 1) {
          for (auto& [table, lazy] : lazies) lazy->mark_complete();
          publish_built(*shared_plan);
        }
      });
    }
  }
  phase(hooks, DdlPhase::Done);
  return {DdlStatus::Committed, {}, {}, stats};
}

DdlResult DdlEngine::run_relaxed(const DdlSpec& spec, const DdlHooks& hooks) {
  auto& catalog = db_.catalog();
  auto& log = db_.log();
  auto txn = db_.begin();
  DdlStats stats;
  stats.begin_ts = txn.begin_ts();
  auto plan = compile_ddl(spec, db_, txn);
  auto src_array = plan.source_schema->data_array;
  auto& handle = catalog.table(*plan.source);
  const std::uint64_t job = db_.jobs().open();
  stats.job_id = job;

  for (auto& t : plan.targets) {
    if (t.copies && !t.new_table) t.schema->data_array = std::make_shared<DataArray>(src_array->rid_space());
    t.schema->pending = std::make_shared<PendingMigration>(PendingMigration{job, src_array, t.copies});
  }

  std::vector<MigrationTarget> targets;
  for (const auto& t : plan.targets) {
    if (t.tombstone) continue;
    MigrationTarget mt;
    if (t.copies) {
      mt.array = t.schema->data_array;
      mt.transform = &t.transform;
    }
    mt.schema = t.schema.get();
    mt.verify = t.verify;
    for (auto i : t.build_indexes) mt.build.push_back(&t.schema->indexes[i]);
    mt.index_array = t.copies ? t.schema->data_array.get() : src_array.get();
    targets.push_back(std::move(mt));
  }

  LookupContext ctx(catalog);
  CdcState cdc;
  std::vector<std::thread> workers;
  bool pinned = false;
  bool pending_set = false;
  std::vector<CatalogVersion*> versions;

  auto stop_workers = [&] {
    cdc.cancel.store(true, std::memory_order_release);
    for (auto& w : workers) w.join();
    workers.clear();
  };
  // Caller holds the commit mutex.
  auto revoke_locked = [&] {
    if (pending_set) {
      for (const auto& t : plan.targets) {
        HistoryEvent e;
        e.txn = txn.id();
        e.kind = EventKind::SchemaRevoke;
        e.table = t.table;
        e.ts = stats.pre_commit_ts;
        e.pending = true;
        db_.emit(e);
      }
    }
    txn.abort(AbortReason::DdlAborted);
    handle.active_job.store(0, std::memory_order_release);
  };
  auto finish_abort = [&](Failure f) {
    release_new_tables(catalog, plan);
    db_.close_job(job, false);
    if (pinned) db_.unpin_log(stats.start_lsn);
    phase(hooks, DdlPhase::Aborted);
    return failed(std::move(f.reason), std::move(f.detail), stats);
  };
  auto abort_with = [&](Failure f) {
    stop_workers();
    {
      std::lock_guard lk(db_.commit_mutex());
      revoke_locked();
    }
    return finish_abort(std::move(f));
  };

  phase(hooks, DdlPhase::Installing);
  versions = install_all(txn, plan);
  if (versions.empty()) return abort_with({"conflict", "schema install failed"});
  handle.active_job.store(job, std::memory_order_release);

  std::uint64_t bound = 0;
  {
    std::lock_guard lk(db_.commit_mutex());
    bound = src_array->size();
    stats.start_lsn = log.current_lsn();
    db_.pin_log(stats.start_lsn);
    pinned = true;
  }
  stats.scan_bound = bound;
  phase(hooks, DdlPhase::Scanning);

  const unsigned n_cdc = spec.effective_cdc_threads();
  for (unsigned i = 0; i < n_cdc; ++i) {
    workers.emplace_back(cdc_worker, std::cref(log), stats.start_lsn, *plan.source, i, n_cdc, std::cref(targets),
                         std::cref(ctx), std::ref(cdc));
  }
  const auto ts = Clock::now();
  auto pass = scan_pass_parallel(*src_array, bound, targets, &ctx, static_cast<int>(spec.effective_scan_threads()),
                                 &cdc.cancel);
  stats.scan_ms = ms_since(ts);
  stats.scan_visits = pass.visits;
  stats.scan_migrated = pass.migrated;
  if (pass.error.status != RowStatus::Ok) {
    return abort_with({"incompatible_data", rid_detail(pass.error.rid, pass.error.detail)});
  }
  if (cdc.failed.load()) {
    stop_workers();
    return abort_with({"incompatible_data", rid_detail(cdc.error.rid, cdc.error.detail)});
  }

  phase(hooks, DdlPhase::Cdc);
  const auto tc = Clock::now();
  {
    std::lock_guard lk(db_.commit_mutex());
    const Timestamp t_pre = db_.clock().fetch_increment();
    stats.pre_commit_ts = t_pre;
    for (std::size_t i = 0; i < plan.targets.size(); ++i) {
      const auto& t = plan.targets[i];
      catalog.set_pending(t.table, versions[i], t_pre);
      HistoryEvent e;
      e.txn = txn.id();
      e.kind = EventKind::SchemaWrite;
      e.table = t.table;
      e.ts = t_pre;
      e.arity = static_cast<std::uint32_t>(t.schema->columns.size());
      e.pending = true;
      e.dropped = t.tombstone;
      if (t.schema->copied_from) {
        e.source = *t.schema->copied_from;
        e.has_source = true;
      }
      db_.emit(e);
    }
    pending_set = true;
    stats.pre_lsn = log.current_lsn();
    cdc.stop.store(stats.pre_lsn.value, std::memory_order_release);
    db_.clock().publish(t_pre);
  }
  for (auto& w : workers) w.join();
  workers.clear();
  stats.cdc_ms = ms_since(tc);
  stats.cdc_records = cdc.records.load();
  stats.cdc_applied = cdc.applied.load();
  if (cdc.failed.load()) return abort_with({"incompatible_data", rid_detail(cdc.error.rid, cdc.error.detail)});

  phase(hooks, DdlPhase::Finalizing);
  {
    std::unique_lock lk(db_.commit_mutex());
    EpochGuard guard;
    // Rows written under the pending schema since it became visible.
    for (const auto& t : plan.targets) {
      if (t.verify.empty()) continue;
      auto scanner = log.scan(stats.pre_lsn, t.table, kMaxTimestamp);
      while (const LogRecord* rec = scanner.next()) {
        if (rec->tombstone) continue;
        ++stats.final_verified;
        auto vr = verify_record(rec->payload, t.verify, &ctx);
        if (!vr.ok) {
          revoke_locked();
          lk.unlock();
          return finish_abort(
              {"incompatible_data", rid_detail(rec->rid, "violates " + describe(t.verify[vr.failed], *t.schema))});
        }
      }
    }
    stats.write_set_size = txn.write_set_size();
    for (std::size_t i = 0; i < plan.targets.size(); ++i) {
      const auto& t = plan.targets[i];
      catalog.finalize_schema(t.table, versions[i], stats.pre_commit_ts);
      if (t.tombstone) catalog.release_name(t.table);
    }
    publish_built(plan);
    handle.active_job.store(0, std::memory_order_release);
  }
  stats.commit_ts = stats.pre_commit_ts;
  txn.finish_external(stats.pre_commit_ts);
  db_.close_job(job, true);
  db_.unpin_log(stats.start_lsn);
  phase(hooks, DdlPhase::Done);
  return {DdlStatus::Committed, {}, {}, stats};
}

void DdlEngine::join_background(TableId table) {
  std::vector<std::thread> threads;
  {
    std::lock_guard lk(bg_mu_);
    auto it = background_.find(table.value);
    if (it == background_.end()) return;
    threads = std::move(it->second);
    background_.erase(it);
  }
  for (auto& t : threads) t.join();
}

void DdlEngine::wait_background() {
  std::map<std::uint64_t, std::vector<std::thread>> all;
  {
    std::lock_guard lk(bg_mu_);
    all.swap(background_);
  }
  for (auto& [table, threads] : all) {
    for (auto& t : threads) t.join();
  }
}

std::shared_ptr<LazyMigration> DdlEngine::lazy_state(TableId table) const {
  std::lock_guard lk(bg_mu_);
  auto it = lazy_.find(table.value);
  return it == lazy_.end() ? nullptr : it->second;
}

}  // namespace morph
