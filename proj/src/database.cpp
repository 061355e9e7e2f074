#include "morph/database.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "morph/migration.hpp"

namespace morph {

struct Transaction::State {
  struct WriteEntry {
    TableId table;
    Rid rid;
    DataVersion* version;
    std::shared_ptr<DataArray> array;
    SchemaRef schema;
    bool prune;
  };
  struct CatalogWrite {
    TableId table;
    CatalogVersion* version;
  };
  struct SchemaUse {
    SchemaRef schema;
    Timestamp ts;
    bool validated = false;
  };

  TxnId id;
  Timestamp begin;
  std::size_t slot = 0;
  bool registered = false;
  std::shared_ptr<CommitTicket> ticket;
  AbortReason last_failure = AbortReason::None;

  std::vector<WriteEntry> writes;
  std::unordered_map<const DataVersion*, std::size_t> write_index;
  std::vector<CatalogWrite> catalog_writes;
  std::unordered_map<TableId, SchemaUse> schemas;
  std::vector<TableId> shared_locks;
  std::vector<TableId> exclusive;
  std::vector<std::function<bool(Timestamp)>> precommit;
  std::set<std::uint64_t> barriers;
  std::set<std::uint64_t> admitted;

  Snapshot snap() const { return {begin, id}; }
  bool active() const { return ticket->status() == TxnStatus::Active; }
};

namespace {

void require_active(const Transaction::State* st) {
  if (!st) throw std::logic_error("transaction was moved from");
}

}  // namespace

// ---------------------------------------------------------------- Database

Database::Database(DatabaseOptions options)
    : options_(std::move(options)),
      log_(options_.log_mirror ? std::make_unique<RedoLog>(*options_.log_mirror)
                               : std::make_unique<RedoLog>()) {
  if (options_.trace) {
    queue_.set_observer([this](const CommitTicket& t) {
      HistoryEvent e;
      e.txn = t.txn;
      e.kind = EventKind::Outcome;
      e.ts = t.commit_ts;
      e.committed = t.status() == TxnStatus::Committed;
      emit(e);
    });
  }
}

Database::~Database() {
  // Nothing may still be reading; free what was retired so far.
  EpochManager::instance().collect();
}

Transaction Database::begin() {
  auto st = std::make_unique<Transaction::State>();
  st->id = TxnId{next_txn_.fetch_add(1, std::memory_order_relaxed)};
  auto [slot, snap] = registry_.enter(clock_);
  st->slot = slot;
  st->begin = snap;
  st->registered = true;
  st->ticket = std::make_shared<CommitTicket>(st->id);
  HistoryEvent e;
  e.txn = st->id;
  e.kind = EventKind::Begin;
  e.ts = snap;
  emit(e);
  return Transaction(this, std::move(st));
}

SchemaRef Database::make_table_schema(TableId id, const std::string& name, std::vector<ColumnDef> columns,
                                      const std::vector<IndexSpec>& indexes,
                                      std::shared_ptr<RidSpace> rids) {
  std::set<std::string> seen;
  for (const auto& c : columns) {
    if (c.name.empty()) throw std::invalid_argument("empty column name");
    if (!seen.insert(c.name).second) throw std::invalid_argument("duplicate column '" + c.name + "'");
    if (!value_matches(c.default_value, c.type)) {
      throw std::invalid_argument("default of column '" + c.name + "' does not match its type");
    }
  }
  auto s = std::make_shared<SchemaVersion>();
  s->table_id = id;
  s->table_name = name;
  s->columns = std::move(columns);
  s->data_array = rids ? std::make_shared<DataArray>(std::move(rids))
                       : std::make_shared<DataArray>(options_.table_capacity);
  for (const auto& spec : indexes) {
    IndexDef def;
    def.name = spec.name;
    for (const auto& col : spec.columns) def.key_columns.push_back(s->require_column(col));
    def.index = std::make_shared<KeyIndex>();
    s->indexes.push_back(std::move(def));
  }
  return s;
}

TableId Database::create_table(const std::string& name, std::vector<ColumnDef> columns,
                               std::vector<IndexSpec> indexes) {
  const TableId id = catalog_.allocate_table(name);
  SchemaRef schema;
  try {
    schema = make_table_schema(id, name, std::move(columns), indexes);
  } catch (...) {
    catalog_.release_name(id);
    throw;
  }
  auto txn = begin();
  if (!txn.install_schema(id, schema) || txn.commit() != TxnStatus::Committed) {
    throw std::logic_error("create_table: catalog install failed for '" + name + "'");
  }
  return id;
}

TableId Database::table_id(std::string_view name) const {
  auto id = catalog_.find(name);
  if (!id) throw std::out_of_range("unknown table '" + std::string(name) + "'");
  return *id;
}

void Database::close_job(std::uint64_t job, bool finalized) {
  jobs_.close(job, finalized);
  drain_queue();
}

void Database::pin_log(Lsn from) {
  std::lock_guard lk(pin_mu_);
  log_pins_.insert(from.value);
}

void Database::unpin_log(Lsn from) {
  std::lock_guard lk(pin_mu_);
  if (auto it = log_pins_.find(from.value); it != log_pins_.end()) log_pins_.erase(it);
}

// Called under the commit mutex.
void Database::maybe_trim_log() {
  if (!options_.trim_log) return;
  const std::uint64_t tail = log_->current_lsn().value;
  if (tail < trimmed_at_ + 2 * RedoLog::kSegmentRecords) return;
  std::uint64_t floor = tail;
  {
    std::lock_guard lk(pin_mu_);
    if (!log_pins_.empty()) floor = std::min(floor, *log_pins_.begin());
  }
  log_->release_before(Lsn{floor});
  trimmed_at_ = tail;
}

void Database::release(Transaction::State& st) {
  for (auto t : st.shared_locks) catalog_.table(t).lock.unlock_shared();
  st.shared_locks.clear();
  if (st.registered) {
    registry_.leave(st.slot);
    st.registered = false;
  }
}

void Database::abort(Transaction::State& st, AbortReason reason) {
  if (!st.active()) return;
  if (reason == AbortReason::None) {
    reason = st.last_failure == AbortReason::None ? AbortReason::User : st.last_failure;
  }
  HistoryEvent e;
  e.txn = st.id;
  e.kind = EventKind::Abort;
  emit(e);
  {
    EpochGuard guard;
    for (auto it = st.writes.rbegin(); it != st.writes.rend(); ++it) {
      unlink_own(*it->array, it->rid, it->version);
      EpochManager::instance().retire(it->version);
    }
    for (auto it = st.catalog_writes.rbegin(); it != st.catalog_writes.rend(); ++it) {
      CatalogVersion* v = it->version;
      if (v->stamp().is_committed()) {
        catalog_.revoke_pending(it->table, v);  // pending schema: revoke releases the name too
        continue;
      }
      const bool brand_new = v->older() == nullptr;
      unlink_own(catalog_.array(), Rid{it->table.value}, v);
      EpochManager::instance().retire(v);
      if (brand_new) catalog_.release_name(it->table);
    }
  }
  st.writes.clear();
  st.write_index.clear();
  st.catalog_writes.clear();
  st.ticket->reason = reason;
  st.ticket->resolve(TxnStatus::Aborted);
  release(st);
}

namespace {

// The schema a writer validated is still the newest committed one, or the
// writer's own uncommitted install.
bool schema_current(const Catalog& catalog, TableId t, const SchemaVersion* used, TxnId self) {
  CatalogVersion* head = catalog.array().head(Rid{t.value});
  if (head && !head->stamp().is_committed() && head->stamp().owner() == self) {
    return head->payload.get() == used && !head->tombstone;
  }
  CatalogVersion* latest = catalog.latest_committed(t);
  return latest && !latest->tombstone && latest->payload.get() == used;
}

struct IndexOp {
  KeyIndex* index;
  std::string key;
  Rid rid;
  std::optional<std::string> erase_key;
};

}  // namespace

TxnStatus Database::commit(Transaction::State& st) {
  if (!st.active()) return st.ticket->status();
  auto& ticket = *st.ticket;
  ticket.admitted.assign(st.admitted.begin(), st.admitted.end());

  if (st.writes.empty() && st.catalog_writes.empty()) {
    HistoryEvent e;
    e.txn = st.id;
    e.kind = EventKind::Commit;
    emit(e);
    if (st.barriers.empty()) {
      ticket.resolve(TxnStatus::Committed);
      release(st);
      return TxnStatus::Committed;
    }
    ticket.barriers.assign(st.barriers.begin(), st.barriers.end());
    {
      std::lock_guard lk(commit_mu_);
      ticket.commit_ts = clock_.last_issued();
      queue_.enqueue(st.ticket);
    }
    release(st);
    drain_queue();
    return ticket.status();
  }

  EpochGuard guard;
  std::unique_lock lk(commit_mu_);
  const Timestamp ts = clock_.fetch_increment();
  auto fail = [&](AbortReason r) {
    clock_.publish(ts);
    lk.unlock();
    abort(st, r);
    return TxnStatus::Aborted;
  };

  for (const auto& [t, use] : st.schemas) {
    if (use.validated && !schema_current(catalog_, t, use.schema.get(), st.id)) {
      return fail(AbortReason::SchemaChanged);
    }
  }
  for (auto& hook : st.precommit) {
    if (!hook(ts)) return fail(AbortReason::Precommit);
  }

  // Index maintenance is planned (and uniqueness checked) before anything
  // becomes visible.
  std::vector<IndexOp> index_ops;
  {
    std::map<std::pair<const KeyIndex*, std::string>, Rid> planned;
    std::set<std::pair<const DataArray*, std::uint64_t>> deleting;
    for (const auto& w : st.writes) {
      if (w.version->tombstone) deleting.insert({w.array.get(), w.rid.value});
    }
    for (const auto& w : st.writes) {
      if (w.version->tombstone) continue;
      const DataVersion* prev = w.version->older();
      for (const auto& def : w.schema->indexes) {
        IndexOp op{def.index.get(), encode_key(w.version->payload, def.key_columns), w.rid, {}};
        if (prev && prev->stamp().is_committed() && !prev->tombstone &&
            prev->payload.size() == w.version->payload.size()) {
          auto old_key = encode_key(prev->payload, def.key_columns);
          if (old_key == op.key) continue;
          op.erase_key = std::move(old_key);
        }
        auto [it, fresh] = planned.emplace(std::make_pair(def.index.get(), op.key), w.rid);
        if (!fresh && it->second != w.rid) return fail(AbortReason::Unique);
        if (auto existing = def.index->lookup(op.key); existing && *existing != w.rid) {
          const bool live_elsewhere = [&] {
            if (deleting.contains({w.array.get(), existing->value})) return false;
            if (existing->value >= w.array->size()) return false;
            DataVersion* other = latest_committed(*w.array, *existing);
            return other && !other->tombstone;
          }();
          if (live_elsewhere) return fail(AbortReason::Unique);
        }
        index_ops.push_back(std::move(op));
      }
    }
  }

  HistoryEvent ce;
  ce.txn = st.id;
  ce.kind = EventKind::Commit;
  ce.ts = ts;
  emit(ce);
  for (const auto& cw : st.catalog_writes) {
    const auto& s = cw.version->payload;
    HistoryEvent e;
    e.txn = st.id;
    e.kind = EventKind::SchemaWrite;
    e.table = cw.table;
    e.ts = ts;
    e.arity = s ? static_cast<std::uint32_t>(s->columns.size()) : 0;
    e.dropped = cw.version->tombstone;
    if (s && s->copied_from) {
      e.source = *s->copied_from;
      e.has_source = true;
    }
    emit(e);
  }

  for (const auto& cw : st.catalog_writes) cw.version->set_stamp(Stamp::committed(ts));
  for (const auto& w : st.writes) w.version->set_stamp(Stamp::committed(ts));

  for (auto& op : index_ops) {
    if (op.erase_key) {
      if (auto cur = op.index->lookup(*op.erase_key); cur && *cur == op.rid) op.index->erase(*op.erase_key);
    }
    if (!op.index->insert(op.key, op.rid)) {
      op.index->erase(op.key);
      op.index->insert(op.key, op.rid);
    }
  }
  for (const auto& cw : st.catalog_writes) {
    if (cw.version->tombstone) {
      catalog_.release_name(cw.table);
    } else if (cw.version->payload) {
      auto& handle = catalog_.table(cw.table);
      if (handle.live_array() != cw.version->payload->data_array) {
        handle.swap_array(cw.version->payload->data_array);
      }
    }
  }

  if (!st.writes.empty()) {
    std::vector<LogEntry> entries;
    entries.reserve(st.writes.size());
    for (const auto& w : st.writes) {
      entries.push_back({w.table, w.rid, w.version->tombstone ? nullptr : &w.version->payload,
                         w.version->tombstone});
    }
    log_->append_commit(st.id, ts, entries);
    maybe_trim_log();
  }

  std::set<std::uint64_t> barriers = st.barriers;
  for (const auto& w : st.writes) {
    if (auto job = catalog_.table(w.table).active_job.load(std::memory_order_acquire)) barriers.insert(job);
  }
  ticket.barriers.assign(barriers.begin(), barriers.end());
  ticket.commit_ts = ts;
  const bool queued = queue_.enqueue(st.ticket);

  if (options_.prune_versions) {
    const Timestamp wm = registry_.watermark(clock_);
    if (wm.value > 0) {
      for (const auto& w : st.writes) {
        if (w.prune) prune_below(w.version, wm);
      }
    }
  }
  clock_.publish(ts);
  lk.unlock();

  if (!queued) ticket.resolve(TxnStatus::Committed);
  st.writes.clear();
  st.write_index.clear();
  st.catalog_writes.clear();
  release(st);
  if (queued) drain_queue();
  return ticket.status();
}

// ------------------------------------------------------------- Transaction

Transaction::Transaction(Database* db, std::unique_ptr<State> st) : db_(db), st_(std::move(st)) {}
Transaction::Transaction(Transaction&&) noexcept = default;

Transaction& Transaction::operator=(Transaction&& other) noexcept {
  if (this != &other) {
    if (st_ && st_->active()) db_->abort(*st_, AbortReason::User);
    db_ = other.db_;
    st_ = std::move(other.st_);
  }
  return *this;
}

Transaction::~Transaction() {
  if (st_ && st_->active()) db_->abort(*st_, AbortReason::User);
}

TxnId Transaction::id() const { return st_->id; }
Timestamp Transaction::begin_ts() const { return st_->begin; }
Snapshot Transaction::snapshot() const { return st_->snap(); }
TxnStatus Transaction::status() const { return st_->ticket->status(); }
AbortReason Transaction::abort_reason() const { return st_->ticket->reason; }
const std::shared_ptr<CommitTicket>& Transaction::ticket() const { return st_->ticket; }

namespace {

using SchemaUse = Transaction::State::SchemaUse;

}  // namespace

// Resolves (and caches) the schema `t` has for this transaction. Writers
// additionally require it to be the newest committed version.
static Result<SchemaUse*> resolve(Database& db, Transaction::State& st, TableId t, bool for_write) {
  if (!st.active()) throw std::logic_error("transaction is not active");
  if (db.options().table_locking &&
      std::find(st.exclusive.begin(), st.exclusive.end(), t) == st.exclusive.end() &&
      std::find(st.shared_locks.begin(), st.shared_locks.end(), t) == st.shared_locks.end()) {
    db.catalog().table(t).lock.lock_shared();
    st.shared_locks.push_back(t);
  }
  auto it = st.schemas.find(t);
  if (it == st.schemas.end()) {
    EpochGuard guard;
    auto vs = db.catalog().get_visible_schema(st.snap(), t, true);
    if (!vs || !vs->schema) return {OpStatus::NoSchema, nullptr};
    it = st.schemas.emplace(t, SchemaUse{vs->schema, vs->ts, false}).first;
    HistoryEvent e;
    e.txn = st.id;
    e.kind = EventKind::SchemaRead;
    e.table = t;
    e.own = vs->version && !vs->version->stamp().is_committed();
    e.ts = e.own ? Timestamp{0} : vs->ts;
    e.arity = static_cast<std::uint32_t>(vs->schema->columns.size());
    e.pending = vs->schema->is_pending();
    e.admitted = e.pending;
    db.emit(e);
  }
  SchemaUse& use = it->second;
  if (for_write && !use.validated) {
    EpochGuard guard;
    auto fresh = db.catalog().get_visible_schema(st.snap(), t, true);
    if (!fresh || fresh->schema.get() != use.schema.get() || !fresh->is_latest) {
      st.last_failure = AbortReason::SchemaChanged;
      return {OpStatus::SchemaChanged, nullptr};
    }
    use.validated = true;
  }
  return {OpStatus::Ok, &use};
}

// Pending-schema admission and lazy migration ahead of an access to `rid`.
static OpStatus prepare_access(Transaction::State& st, const SchemaVersion& s, Rid rid, Access access) {
  if (s.pending && s.is_pending()) {
    const auto verdict = overlap_check(*s.pending, *s.data_array, rid, st.snap(), access);
    if (verdict == OverlapVerdict::Abort) {
      st.last_failure = AbortReason::Overlap;
      return OpStatus::Conflict;
    }
    st.barriers.insert(s.pending->job_id);
    if (s.pending->copies) st.admitted.insert(s.pending->job_id);
  }
  if (s.lazy && !s.lazy->complete() && !s.lazy->migrate(rid)) return OpStatus::Incompatible;
  return OpStatus::Ok;
}

Result<SchemaRef> Transaction::schema(TableId table) {
  require_active(st_.get());
  auto r = resolve(*db_, *st_, table, false);
  if (!r.ok()) return {r.status, nullptr};
  return {OpStatus::Ok, r.value->schema};
}

Result<RecordPayload> Transaction::read(TableId table, Rid rid, Access access) {
  require_active(st_.get());
  auto r = resolve(*db_, *st_, table, false);
  if (!r.ok()) return {r.status, {}};
  const SchemaVersion& s = *r.value->schema;
  EpochGuard guard;
  if (auto p = prepare_access(*st_, s, rid, access); p != OpStatus::Ok) return {p, {}};
  auto vv = read_visible(*s.data_array, rid, st_->snap());
  HistoryEvent e;
  e.txn = st_->id;
  e.kind = EventKind::Read;
  e.table = table;
  e.rid = rid;
  e.array = s.data_array->generation();
  if (vv) {
    const Stamp stamp = vv->version->stamp();
    e.own = !stamp.is_committed();
    e.ts = e.own ? Timestamp{0} : stamp.ts();
    e.tombstone = vv->version->tombstone;
    e.found = !e.tombstone;
    e.arity = static_cast<std::uint32_t>(vv->version->payload.size());
  }
  db_->emit(e);
  if (!vv || vv->version->tombstone) return {OpStatus::NotFound, {}};
  return {OpStatus::Ok, vv->version->payload};
}

static OpStatus do_write(Database& db, Transaction::State& st, TableId table,
                         const std::shared_ptr<DataArray>& array, const SchemaRef& schema, Rid rid,
                         RecordPayload payload, bool tombstone, Access access) {
  EpochGuard guard;
  if (auto p = prepare_access(st, *schema, rid, access); p != OpStatus::Ok) return p;
  DataVersion* prior = latest_committed(*array, rid);
  auto* v = new DataVersion(Stamp::uncommitted(st.id), std::move(payload), tombstone);
  auto res = install_version(*array, rid, v, st.snap());
  if (!res.installed) {
    delete v;
    st.last_failure = AbortReason::WriteConflict;
    return OpStatus::Conflict;
  }
  if (res.replaced_own) {
    auto it = st.write_index.find(res.replaced_own);
    const auto idx = it->second;
    st.write_index.erase(it);
    st.writes[idx].version = v;
    st.writes[idx].schema = schema;
    st.write_index.emplace(v, idx);
    EpochManager::instance().retire(res.replaced_own);
  } else {
    const bool migration_target = schema->pending && schema->is_pending() && schema->pending->copies;
    st.write_index.emplace(v, st.writes.size());
    st.writes.push_back({table, rid, v, array, schema, !migration_target});
  }
  HistoryEvent e;
  e.txn = st.id;
  e.kind = EventKind::Write;
  e.table = table;
  e.rid = rid;
  e.ts = prior ? prior->stamp().ts() : Timestamp{0};
  e.arity = static_cast<std::uint32_t>(v->payload.size());
  e.array = array->generation();
  e.tombstone = tombstone;
  e.admitted = schema->pending && schema->is_pending();
  db.emit(e);
  return OpStatus::Ok;
}

// Constraints of a pending schema are checked by its migration instead.
static bool satisfies_constraints(Database& db, Transaction::State& st, const SchemaVersion& s,
                                  const RecordPayload& payload) {
  if (s.constraints.empty() || s.is_pending()) return true;
  EpochGuard guard;
  LookupContext ctx(db.catalog(), [&st](TableId table, const IndexDef& index, const std::string& key) {
    std::optional<RecordPayload> found;
    for (const auto& w : st.writes) {
      if (w.table != table || w.version->tombstone) continue;
      const auto width = w.version->payload.size();
      if (std::any_of(index.key_columns.begin(), index.key_columns.end(), [&](auto c) { return c >= width; })) continue;
      if (encode_key(w.version->payload, index.key_columns) == key) found = w.version->payload;
    }
    return found;
  });
  if (verify_record(payload, s.constraints, &ctx).ok) return true;
  st.last_failure = AbortReason::Constraint;
  return false;
}

OpStatus Transaction::write(TableId table, Rid rid, RecordPayload payload, Access access) {
  require_active(st_.get());
  auto r = resolve(*db_, *st_, table, true);
  if (!r.ok()) return r.status;
  const SchemaRef& s = r.value->schema;
  if (!conforms(payload, *s)) {
    throw std::invalid_argument("payload does not conform to table " + s->table_name);
  }
  if (!satisfies_constraints(*db_, *st_, *s, payload)) return OpStatus::Violation;
  return do_write(*db_, *st_, table, s->data_array, s, rid, std::move(payload), false, access);
}

Result<Rid> Transaction::insert(TableId table, RecordPayload payload) {
  require_active(st_.get());
  auto r = resolve(*db_, *st_, table, true);
  if (!r.ok()) return {r.status, {}};
  const SchemaRef& s = r.value->schema;
  if (!conforms(payload, *s)) {
    throw std::invalid_argument("payload does not conform to table " + s->table_name);
  }
  if (!satisfies_constraints(*db_, *st_, *s, payload)) return {OpStatus::Violation, {}};
  const Rid rid = s->data_array->allocate();
  auto st = do_write(*db_, *st_, table, s->data_array, s, rid, std::move(payload), false, Access::BlindWrite);
  return {st, rid};
}

OpStatus Transaction::remove(TableId table, Rid rid) {
  require_active(st_.get());
  auto r = resolve(*db_, *st_, table, true);
  if (!r.ok()) return r.status;
  const SchemaRef& s = r.value->schema;
  return do_write(*db_, *st_, table, s->data_array, s, rid, {}, true, Access::BlindWrite);
}

Result<Rid> Transaction::lookup(TableId table, std::string_view index, std::span<const Value> key) {
  require_active(st_.get());
  auto r = resolve(*db_, *st_, table, false);
  if (!r.ok()) return {r.status, {}};
  const IndexDef* def = r.value->schema->find_index(index);
  if (!def) throw std::invalid_argument("no index '" + std::string(index) + "' on " + r.value->schema->table_name);
  if (!def->index->published()) return {OpStatus::Unpublished, {}};
  auto rid = def->index->lookup(encode_key(key));
  if (!rid) return {OpStatus::NotFound, {}};
  return {OpStatus::Ok, *rid};
}

Result<std::vector<Rid>> Transaction::scan_prefix(TableId table, std::string_view index,
                                                  std::span<const Value> prefix) {
  require_active(st_.get());
  auto r = resolve(*db_, *st_, table, false);
  if (!r.ok()) return {r.status, {}};
  const IndexDef* def = r.value->schema->find_index(index);
  if (!def) throw std::invalid_argument("no index '" + std::string(index) + "' on " + r.value->schema->table_name);
  if (!def->index->published()) return {OpStatus::Unpublished, {}};
  std::vector<Rid> out;
  for (const auto& [k, rid] : def->index->prefix(encode_key(prefix))) out.push_back(rid);
  return {OpStatus::Ok, std::move(out)};
}

Result<std::uint64_t> Transaction::rid_count(TableId table) {
  require_active(st_.get());
  auto r = resolve(*db_, *st_, table, false);
  if (!r.ok()) return {r.status, 0};
  return {OpStatus::Ok, r.value->schema->data_array->size()};
}

TxnStatus Transaction::commit() {
  require_active(st_.get());
  return db_->commit(*st_);
}

void Transaction::abort(AbortReason reason) {
  require_active(st_.get());
  db_->abort(*st_, reason);
}

TxnStatus Transaction::wait() {
  require_active(st_.get());
  const auto s = st_->ticket->status();
  if (s == TxnStatus::PreCommitted) return st_->ticket->wait();
  return s;
}

CatalogVersion* Transaction::install_schema(TableId table, SchemaRef schema, bool tombstone) {
  require_active(st_.get());
  auto& st = *st_;
  EpochGuard guard;
  auto* v = new CatalogVersion(Stamp::uncommitted(st.id), std::move(schema), tombstone);
  auto res = db_->catalog().install_schema_version(st.snap(), table, v);
  if (!res.installed) {
    delete v;
    st.last_failure = AbortReason::WriteConflict;
    return nullptr;
  }
  if (res.replaced_own) {
    for (auto& cw : st.catalog_writes) {
      if (cw.version == res.replaced_own) cw.version = v;
    }
    EpochManager::instance().retire(res.replaced_own);
  } else {
    st.catalog_writes.push_back({table, v});
  }
  st.schemas.erase(table);
  return v;
}

std::optional<VisibleVersion<RecordPayload>> Transaction::read_raw(const DataArray& array, Rid rid) const {
  require_active(st_.get());
  return read_visible(array, rid, st_->snap());
}

OpStatus Transaction::write_raw(TableId table, const std::shared_ptr<DataArray>& array, const SchemaRef& schema,
                                Rid rid, RecordPayload payload, bool tombstone) {
  require_active(st_.get());
  return do_write(*db_, *st_, table, array, schema, rid, std::move(payload), tombstone, Access::BlindWrite);
}

void Transaction::add_precommit(std::function<bool(Timestamp)> hook) {
  require_active(st_.get());
  st_->precommit.push_back(std::move(hook));
}

void Transaction::hold_table_exclusive(TableId table) {
  require_active(st_.get());
  st_->exclusive.push_back(table);
}

void Transaction::add_barrier(std::uint64_t job) {
  require_active(st_.get());
  st_->barriers.insert(job);
}

void Transaction::finish_external(Timestamp commit_ts) {
  require_active(st_.get());
  auto& st = *st_;
  if (!st.writes.empty()) throw std::logic_error("finish_external with data writes");
  HistoryEvent e;
  e.txn = st.id;
  e.kind = EventKind::Commit;
  e.ts = commit_ts;
  db_->emit(e);
  st.catalog_writes.clear();
  st.ticket->commit_ts = commit_ts;
  st.ticket->resolve(TxnStatus::Committed);
  db_->release(st);
}

std::size_t Transaction::write_set_size() const {
  require_active(st_.get());
  return st_->writes.size() + st_->catalog_writes.size();
}

std::size_t Transaction::catalog_write_count() const {
  require_active(st_.get());
  return st_->catalog_writes.size();
}

}  // namespace morph
