#include "morph/kernels.hpp"

#include <omp.h>

namespace morph {

namespace {

constexpr std::int64_t kChunk = 1024;

bool cancelled(const std::atomic<bool>* cancel) {
  return cancel && cancel->load(std::memory_order_relaxed);
}

// Another live record of the index's array currently carries `key`.
bool key_taken_elsewhere(const IndexDef& def, const DataArray& array, Rid other, const std::string& key) {
  if (other.value >= array.size()) return false;
  DataVersion* v = latest_committed(array, other);
  if (!v || v->tombstone) return false;
  return encode_key(v->payload, def.key_columns) == key;
}

}  // namespace

std::string to_string(RowStatus s) {
  switch (s) {
    case RowStatus::Ok: return "ok";
    case RowStatus::Incompatible: return "incompatible";
    case RowStatus::Violation: return "violation";
    case RowStatus::Duplicate: return "duplicate";
  }
  return "?";
}

RowStatus migrate_row(std::span<const MigrationTarget> targets, Rid rid, const RecordPayload& payload,
                      bool tombstone, Timestamp ts, const LookupContext* ctx, std::string* detail) {
  for (const auto& t : targets) {
    RecordPayload converted;
    const RecordPayload* rec = &payload;
    if (!tombstone && t.transform) {
      auto r = transform_record(payload, *t.transform, *t.schema, ctx);
      if (!r.ok) {
        if (detail) *detail = r.error;
        return RowStatus::Incompatible;
      }
      converted = std::move(r.payload);
      rec = &converted;
    }
    if (!tombstone && !t.verify.empty()) {
      auto v = verify_record(*rec, t.verify, ctx);
      if (!v.ok) {
        if (detail) *detail = "violates " + describe(t.verify[v.failed], *t.schema);
        return RowStatus::Violation;
      }
    }
    if (t.array) {
      auto* v = new DataVersion(Stamp::committed(ts), tombstone ? RecordPayload{} : *rec, tombstone);
      if (install_ordered(*t.array, rid, v) == MigrateInstall::Present) delete v;
    }
    if (!tombstone) {
      for (const IndexDef* def : t.build) {
        const auto key = encode_key(*rec, def->key_columns);
        if (def->index->insert(key, rid)) continue;
        auto existing = def->index->lookup(key);
        if (!existing || *existing == rid) continue;
        if (key_taken_elsewhere(*def, *t.index_array, *existing, key)) {
          if (detail) *detail = "duplicate key in index " + def->name;
          return RowStatus::Duplicate;
        }
        def->index->erase(key);
        def->index->insert(key, rid);
      }
    }
  }
  return RowStatus::Ok;
}

PassStats scan_pass_serial(const DataArray& source, std::uint64_t bound,
                           std::span<const MigrationTarget> targets, const LookupContext* ctx,
                           const std::atomic<bool>* cancel) {
  PassStats stats;
  for (std::uint64_t r = 0; r < bound; ++r) {
    if (cancelled(cancel)) break;
    EpochGuard guard;
    ++stats.visits;
    DataVersion* v = latest_committed(source, Rid{r});
    if (!v) continue;
    std::string detail;
    auto st = migrate_row(targets, Rid{r}, v->payload, v->tombstone, v->stamp().ts(), ctx, &detail);
    if (st != RowStatus::Ok) {
      stats.error = {st, Rid{r}, std::move(detail)};
      break;
    }
    ++stats.migrated;
  }
  return stats;
}

PassStats scan_pass_parallel(const DataArray& source, std::uint64_t bound,
                             std::span<const MigrationTarget> targets, const LookupContext* ctx,
                             int threads, const std::atomic<bool>* cancel) {
  PassStats stats;
  std::atomic<bool> failed{false};
  std::mutex err_mu;
  std::uint64_t visits = 0;
  std::uint64_t migrated = 0;
  const auto n = static_cast<std::int64_t>(bound);
#pragma omp parallel for num_threads(threads) schedule(static, kChunk) reduction(+ : visits, migrated)
  for (std::int64_t i = 0; i < n; ++i) {
    if (failed.load(std::memory_order_relaxed) || cancelled(cancel)) continue;
    const Rid rid{static_cast<std::uint64_t>(i)};
    EpochGuard guard;
    ++visits;
    DataVersion* v = latest_committed(source, rid);
    if (!v) continue;
    std::string detail;
    auto st = migrate_row(targets, rid, v->payload, v->tombstone, v->stamp().ts(), ctx, &detail);
    if (st != RowStatus::Ok) {
      std::lock_guard lk(err_mu);
      if (!failed.exchange(true)) stats.error = {st, rid, std::move(detail)};
      continue;
    }
    ++migrated;
  }
  stats.visits = visits;
  stats.migrated = migrated;
  return stats;
}

VerifyStats verify_pass_serial(const DataArray& source, std::uint64_t bound,
                               const std::vector<ConstraintDef>& constraints, const LookupContext* ctx) {
  VerifyStats stats;
  for (std::uint64_t r = 0; r < bound; ++r) {
    EpochGuard guard;
    DataVersion* v = latest_committed(source, Rid{r});
    if (!v || v->tombstone) continue;
    ++stats.checked;
    if (!verify_record(v->payload, constraints, ctx).ok) {
      if (stats.violations++ == 0) stats.first_violation = r;
    }
  }
  return stats;
}

VerifyStats verify_pass_parallel(const DataArray& source, std::uint64_t bound,
                                 const std::vector<ConstraintDef>& constraints, const LookupContext* ctx,
                                 int threads) {
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
  std::uint64_t first = ~std::uint64_t{0};
  const auto n = static_cast<std::int64_t>(bound);
#pragma omp parallel for num_threads(threads) schedule(static, kChunk) reduction(+ : checked, violations) reduction(min : first)
  for (std::int64_t i = 0; i < n; ++i) {
    EpochGuard guard;
    DataVersion* v = latest_committed(source, Rid{static_cast<std::uint64_t>(i)});
    if (!v || v->tombstone) continue;
    ++checked;
    if (!verify_record(v->payload, constraints, ctx).ok) {
      ++violations;
      first = std::min(first, static_cast<std::uint64_t>(i));
    }
  }
  return {checked, violations, first};
}

}  // namespace morph
