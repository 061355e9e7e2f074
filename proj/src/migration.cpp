#include "morph/migration.hpp"

namespace morph {

LazyMigration::LazyMigration(std::shared_ptr<DataArray> source, std::shared_ptr<DataArray> target,
                             Transform transform, const SchemaVersion* target_schema,
                             const Catalog* catalog)
    : source_(std::move(source)),
      target_(std::move(target)),
      transform_(std::move(transform)),
      target_schema_(target_schema),
      ctx_(*catalog) {}

bool LazyMigration::migrate(Rid rid) {
  if (target_->head(rid) || rid.value >= source_->size()) return !flagged(rid);
  EpochGuard guard;
  DataVersion* src = latest_committed(*source_, rid);
  if (!src) return true;
  DataVersion* v = nullptr;
  if (src->tombstone) {
    v = new DataVersion(Stamp::committed(src->stamp().ts()), RecordPayload{}, true);
  } else {
    auto r = transform_record(src->payload, transform_, *target_schema_, &ctx_);
    if (!r.ok) {
      std::lock_guard lk(diag_mu_);
      if (flagged_.insert(rid.value).second) {
        diagnostics_.push_back("rid " + std::to_string(rid.value) + ": " + r.error);
      }
      return false;
    }
    v = new DataVersion(Stamp::committed(src->stamp().ts()), std::move(r.payload));
  }
  if (install_if_absent(*target_, rid, v)) {
    if (!v->tombstone) {
      for (const auto& def : target_schema_->indexes) def.index->insert(encode_key(v->payload, def.key_columns), rid);
    }
    migrated_.fetch_add(1, std::memory_order_relaxed);
  } else {
    delete v;
  }
  return true;
}

void LazyMigration::sweep(std::uint64_t from, std::uint64_t to) {
  for (std::uint64_t r = from; r < to; ++r) migrate(Rid{r});
}

bool LazyMigration::flagged(Rid rid) const {
  std::lock_guard lk(diag_mu_);
  return flagged_.contains(rid.value);
}

std::vector<std::string> LazyMigration::diagnostics() const {
  std::lock_guard lk(diag_mu_);
  return diagnostics_;
}

std::string to_string(OverlapVerdict v) {
  switch (v) {
    case OverlapVerdict::Proceed: return "proceed";
    case OverlapVerdict::Abort: return "abort";
    case OverlapVerdict::UseOld: return "use_old";
  }
  return "?";
}

OverlapVerdict overlap_check(const PendingMigration& pending, const DataArray& target, Rid rid,
                             Snapshot snap, Access access) {
  if (!pending.copies) return OverlapVerdict::UseOld;
  if (access == Access::BlindWrite) return OverlapVerdict::Proceed;
  const DataArray& source = *pending.source_array;
  DataVersion* old_latest = rid.value < source.size() ? latest_committed(source, rid) : nullptr;
  if (!old_latest) return OverlapVerdict::Proceed;
  if (rid.value >= target.size()) return OverlapVerdict::Abort;
  auto seen = read_visible(target, rid, snap);
  if (!seen) return OverlapVerdict::Abort;
  const Stamp s = seen->version->stamp();
  if (!s.is_committed()) return OverlapVerdict::Proceed;  // own write
  return old_latest->stamp().ts() <= s.ts() ? OverlapVerdict::Proceed : OverlapVerdict::Abort;
}

}  // namespace morph
