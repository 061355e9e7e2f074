#pragma once

#include <atomic>
#include <map>
#include <sstream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "morph/database.hpp"
#include "morph/ddl.hpp"

namespace morph::testing {

inline RecordPayload ints(std::initializer_list<std::int64_t> xs) {
  RecordPayload p;
  for (auto x : xs) p.emplace_back(x);
  return p;
}

inline std::vector<ColumnDef> int_columns(std::initializer_list<const char*> names) {
  std::vector<ColumnDef> cols;
  for (auto n : names) cols.push_back({n, DataType::Int64, {}, true});
  return cols;
}

// Three Int64 columns; row r holds (r, 2r, r % 100).
inline TableId load_table(Database& db, const std::string& name, std::uint64_t rows,
                          std::vector<IndexSpec> indexes = {}) {
  const TableId id = db.create_table(name, int_columns({"c0", "c1", "c2"}), std::move(indexes));
  constexpr std::uint64_t kBatch = 2000;
  for (std::uint64_t base = 0; base < rows; base += kBatch) {
    auto txn = db.begin();
    for (std::uint64_t r = base; r < std::min(rows, base + kBatch); ++r) {
      const auto v = static_cast<std::int64_t>(r);
      if (!txn.insert(id, ints({v, 2 * v, v % 100})).ok()) throw std::runtime_error("load failed");
    }
    if (txn.commit() != TxnStatus::Committed) throw std::runtime_error("load commit failed");
  }
  return id;
}

// Live rows visible to a fresh transaction.
inline std::map<std::uint64_t, RecordPayload> visible_rows(Database& db, TableId table) {
  std::map<std::uint64_t, RecordPayload> out;
  auto txn = db.begin();
  auto n = txn.rid_count(table);
  if (!n.ok()) return out;
  for (std::uint64_t r = 0; r < n.value; ++r) {
    auto res = txn.read(table, Rid{r});
    if (res.ok()) out.emplace(r, std::move(res.value));
  }
  txn.commit();
  return out;
}

// Commit timestamp of the version a fresh transaction sees per rid.
inline std::map<std::uint64_t, std::uint64_t> visible_stamps(Database& db, TableId table) {
  std::map<std::uint64_t, std::uint64_t> out;
  auto txn = db.begin();
  auto s = txn.schema(table);
  if (!s.ok()) return out;
  EpochGuard guard;
  const auto& array = *s.value->data_array;
  for (std::uint64_t r = 0; r < array.size(); ++r) {
    auto vv = read_visible(array, Rid{r}, txn.snapshot());
    if (vv && !vv->version->tombstone) out.emplace(r, vv->version->stamp().ts().value);
  }
  txn.commit();
  return out;
}

// Text dump of every catalog chain and the data chains of each table's
// committed schema. Two equal dumps mean equal logical and physical state.
inline std::string state_walk(Database& db) {
  std::ostringstream out;
  EpochGuard guard;
  auto stamp = [](Stamp s) {
    return s.is_committed() ? std::to_string(s.ts().value) : "u" + std::to_string(s.owner().value);
  };
  for (TableId id : db.catalog().table_ids()) {
    out << "table " << id.value << "\n";
    for (auto* v = db.catalog().array().head(Rid{id.value}); v; v = v->older()) {
      out << " schema " << stamp(v->stamp()) << (v->tombstone ? " dropped" : "") << "\n";
      if (v->payload) {
        out << to_debug_text(*v->payload, v->stamp().ts());
        for (const auto& ix : v->payload->indexes) {
          out << " index " << ix.name << " " << (ix.index ? ix.index->size() : 0) << "\n";
        }
      }
    }
    auto s = db.catalog().committed_schema(id);
    if (!s || !s->data_array) continue;
    out << " array " << s->data_array.get() << " size " << s->data_array->size() << "\n";
    for (std::uint64_t r = 0; r < s->data_array->size(); ++r) {
      out << " rid " << r;
      for (auto* v = s->data_array->head(Rid{r}); v; v = v->older()) {
        out << " [" << stamp(v->stamp()) << (v->tombstone ? " x" : "");
        for (const auto& x : v->payload) out << " " << to_string(x);
        out << "]";
      }
      out << "\n";
    }
  }
  return out.str();
}

// Background writers incrementing c2 of random rows until stopped.
class Writers {
 public:
  Writers(Database& db, TableId table, unsigned threads, std::uint64_t rows, std::uint64_t seed = 7,
          unsigned ops_per_txn = 4)
      : db_(db) {
    for (unsigned i = 0; i < threads; ++i) {
      threads_.emplace_back([this, table, rows, i, seed, ops_per_txn] {
        std::mt19937_64 rng(seed * 1000 + i);
        std::uniform_int_distribution<std::uint64_t> pick(0, rows - 1);
        while (!stop_.load(std::memory_order_acquire)) {
          auto txn = db_.begin();
          bool ok = true;
          for (unsigned k = 0; k < ops_per_txn && ok; ++k) {
            const Rid rid{pick(rng)};
            auto cur = txn.read(table, rid, Access::ReadModifyWrite);
            if (!cur.ok()) {
              ok = false;
              break;
            }
            auto next = cur.value;
            next[2] = std::get<std::int64_t>(next[2]) + 1;
            ok = txn.write(table, rid, std::move(next), Access::ReadModifyWrite) == OpStatus::Ok;
          }
          if (!ok) {
            txn.abort();
            aborts_.fetch_add(1, std::memory_order_relaxed);
            continue;
          }
          auto st = txn.commit();
          if (st == TxnStatus::PreCommitted) st = txn.wait();
          (st == TxnStatus::Committed ? commits_ : aborts_).fetch_add(1, std::memory_order_relaxed);
        }
      });
    }
  }
  ~Writers() { stop(); }

  void stop() {
    stop_.store(true, std::memory_order_release);
    for (auto& t : threads_) {
      if (t.joinable()) t.join();
    }
  }
  std::uint64_t commits() const { return commits_.load(); }
  std::uint64_t aborts() const { return aborts_.load(); }

 private:
  Database& db_;
  std::atomic<bool> stop_{false};
  std::atomic<std::uint64_t> commits_{0};
  std::atomic<std::uint64_t> aborts_{0};
  std::vector<std::thread> threads_;
};

}  // namespace morph::testing
