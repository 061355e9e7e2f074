#include "morph/catalog.hpp"

#include <stdexcept>

namespace morph {

TableLock::TableLock() {
  pthread_rwlockattr_t attr;
  pthread_rwlockattr_init(&attr);
  pthread_rwlockattr_setkind_np(&attr, PTHREAD_RWLOCK_PREFER_WRITER_NONRECURSIVE_NP);
  pthread_rwlock_init(&lock_, &attr);
  pthread_rwlockattr_destroy(&attr);
}

TableLock::~TableLock() { pthread_rwlock_destroy(&lock_); }
void TableLock::lock_shared() { pthread_rwlock_rdlock(&lock_); }
void TableLock::unlock_shared() { pthread_rwlock_unlock(&lock_); }
void TableLock::lock() { pthread_rwlock_wrlock(&lock_); }
void TableLock::unlock() { pthread_rwlock_unlock(&lock_); }

Catalog::Catalog(std::uint64_t max_tables) : array_(max_tables), handle_index_(max_tables) {
  for (auto& h : handle_index_) h.store(nullptr, std::memory_order_relaxed);

  // Built-in schema of the catalog itself, committed at ts 0.
  const TableId self = allocate_table("__catalog");
  auto schema = std::make_shared<SchemaVersion>();
  schema->table_id = self;
  schema->table_name = "__catalog";
  schema->columns = {{"table_name", DataType::Varchar, {}, false},
                     {"definition", DataType::Varchar, {}, false}};
  array_.slot(Rid{self.value}).store(new CatalogVersion(Stamp::committed(Timestamp{0}), schema));
}

TableId Catalog::allocate_table(const std::string& name) {
  std::lock_guard lk(mu_);
  if (names_.contains(name)) throw std::invalid_argument("table '" + name + "' already exists");
  const Rid rid = array_.allocate();
  auto handle = std::make_unique<TableHandle>();
  handle->id = TableId{rid.value};
  handle->name = name;
  handle_index_[rid.value].store(handle.get(), std::memory_order_release);
  handles_.push_back(std::move(handle));
  names_.emplace(name, TableId{rid.value});
  return TableId{rid.value};
}

void Catalog::release_name(TableId id) {
  std::lock_guard lk(mu_);
  auto& h = table(id);
  auto it = names_.find(h.name);
  if (it != names_.end() && it->second == id) names_.erase(it);
}

void Catalog::check_id(TableId id) const {
  if (id.value >= handle_index_.size() || !handle_index_[id.value].load(std::memory_order_acquire)) {
    throw std::out_of_range("unknown table id " + std::to_string(id.value));
  }
}

TableHandle& Catalog::table(TableId id) const {
  check_id(id);
  return *handle_index_[id.value].load(std::memory_order_acquire);
}

bool Catalog::has_table(TableId id) const {
  return id.value < handle_index_.size() && handle_index_[id.value].load(std::memory_order_acquire);
}

std::optional<TableId> Catalog::find(std::string_view name) const {
  std::lock_guard lk(mu_);
  auto it = names_.find(std::string(name));
  if (it == names_.end()) return std::nullopt;
  return it->second;
}

std::vector<TableId> Catalog::table_ids() const {
  std::lock_guard lk(mu_);
  std::vector<TableId> ids;
  for (const auto& h : handles_) ids.push_back(h->id);
  return ids;
}

std::optional<VisibleSchema> Catalog::get_visible_schema(Snapshot snap, TableId id,
                                                         bool include_pending) const {
  check_id(id);
  const Rid rid{id.value};
  bool first_committed = true;
  for (CatalogVersion* v = array_.head(rid); v; v = v->older()) {
    const Stamp s = v->stamp();
    if (!s.is_committed()) {
      if (s.owner() == snap.self) return VisibleSchema{v, v->tombstone ? nullptr : v->payload, s.ts(), true};
      continue;
    }
    if (!include_pending && v->payload && v->payload->is_pending()) {
      first_committed = false;
      continue;
    }
    if (s.ts() < snap.begin) {
      return VisibleSchema{v, v->tombstone ? nullptr : v->payload, s.ts(), first_committed};
    }
    first_committed = false;
  }
  return std::nullopt;
}

InstallResult<SchemaRef> Catalog::install_schema_version(Snapshot snap, TableId id,
                                                         CatalogVersion* v) {
  check_id(id);
  return install_version(array_, Rid{id.value}, v, snap);
}

CatalogVersion* Catalog::latest_committed(TableId id) const {
  check_id(id);
  return morph::latest_committed(array_, Rid{id.value});
}

SchemaRef Catalog::committed_schema(TableId id) const {
  check_id(id);
  for (CatalogVersion* v = array_.head(Rid{id.value}); v; v = v->older()) {
    if (!v->stamp().is_committed()) continue;
    if (v->payload && v->payload->is_pending()) continue;
    if (v->tombstone) return nullptr;
    return v->payload;
  }
  return nullptr;
}

void Catalog::set_pending(TableId id, CatalogVersion* v, Timestamp t_pre) {
  check_id(id);
  if (array_.head(Rid{id.value}) != v || v->stamp().is_committed()) {
    throw std::logic_error("set_pending: version is not the caller's uncommitted head");
  }
  if (v->payload) v->payload->state.store(SchemaState::Pending, std::memory_order_release);
  v->set_stamp(Stamp::committed(t_pre));
}

void Catalog::finalize_schema(TableId id, CatalogVersion* v, Timestamp commit_ts) {
  check_id(id);
  if (array_.head(Rid{id.value}) != v) {
    throw std::logic_error("finalize_schema: version is not the head");
  }
  if (!v->payload || !v->payload->is_pending()) {
    throw std::logic_error("finalize_schema: version is not pending");
  }
  v->set_stamp(Stamp::committed(commit_ts));
  v->payload->state.store(SchemaState::Committed, std::memory_order_release);
  if (!v->tombstone) table(id).swap_array(v->payload->data_array);
}

void Catalog::revoke_pending(TableId id, CatalogVersion* v) {
  check_id(id);
  if (array_.head(Rid{id.value}) != v) {
    throw std::logic_error("revoke_pending: version is not the head");
  }
  const bool brand_new = v->older() == nullptr;
  auto& entry = array_.slot(Rid{id.value});
  CatalogVersion* expected = v;
  if (!entry.compare_exchange_strong(expected, v->older(), std::memory_order_acq_rel)) {
    throw std::logic_error("revoke_pending: head changed concurrently");
  }
  EpochManager::instance().retire(v);
  if (brand_new) release_name(id);
}

std::size_t Catalog::pending_count(TableId id) const {
  check_id(id);
  std::size_t n = 0;
  for (CatalogVersion* v = array_.head(Rid{id.value}); v; v = v->older()) {
    if (v->payload && v->payload->is_pending()) ++n;
  }
  return n;
}

}  // namespace morph
