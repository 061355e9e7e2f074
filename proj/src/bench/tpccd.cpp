#include <atomic>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "morph/bench/workload.hpp"
#include "runner.hpp"

namespace morph::bench {

namespace {

constexpr int kDistricts = 10;
constexpr std::int64_t kLinesPerStockLevel = 20;

std::int64_t i64(const Value& v) { return std::get<std::int64_t>(v); }
double f64(const Value& v) { return std::get<double>(v); }
Value I(std::int64_t v) { return v; }

// Column positions. Customer columns 8.. move to the private table on a
// split, which keeps the three key columns in front.
namespace col {
constexpr std::size_t w_ytd = 3;
constexpr std::size_t d_ytd = 4, d_next_o_id = 5;
constexpr std::size_t c_credit = 8;
constexpr std::size_t c_private_shift = 5;
constexpr std::size_t o_c_id = 3, o_carrier_id = 4, o_ol_cnt = 5;
constexpr std::size_t no_o_id = 2;
constexpr std::size_t ol_o_id = 2, ol_number = 3, ol_i_id = 4, ol_amount = 7, ol_delivery_d = 8;
constexpr std::size_t i_price = 2;
constexpr std::size_t s_quantity = 2, s_ytd = 3, s_order_cnt = 4;
}  // namespace col

const std::vector<std::string> kCustomerPublic = {"c_w_id", "c_d_id", "c_id", "c_first",
                                                  "c_last", "c_street", "c_city", "c_state"};
const std::vector<std::string> kCustomerPrivate = {"c_w_id",      "c_d_id",        "c_id",          "c_credit",
                                                   "c_balance",   "c_ytd_payment", "c_payment_cnt", "c_delivery_cnt"};

ColumnDef int_col(const char* name) { return {name, DataType::Int64, {}, false}; }
ColumnDef float_col(const char* name) { return {name, DataType::Float64, {}, false}; }
ColumnDef text_col(const char* name) { return {name, DataType::Varchar, {}, true}; }

struct Tables {
  TableId warehouse, district, customer, history, oorder, new_order, order_line, item, stock;
};

// Per district, an order id at or below the oldest undelivered order.
// Raised after a delivery commits so lookups skip delivered orders.
class DeliveryHints {
 public:
  DeliveryHints(int warehouses, std::int64_t first) : hints_(static_cast<std::size_t>(warehouses) * kDistricts) {
    for (auto& h : hints_) h.store(first);
  }
  std::int64_t get(std::int64_t w, std::int64_t d) const { return slot(w, d).load(std::memory_order_relaxed); }
  void raise(std::int64_t w, std::int64_t d, std::int64_t to) {
    auto& h = slot(w, d);
    std::int64_t cur = h.load(std::memory_order_relaxed);
    while (cur < to && !h.compare_exchange_weak(cur, to)) {
    }
  }

 private:
  std::atomic<std::int64_t>& slot(std::int64_t w, std::int64_t d) const {
    return hints_[static_cast<std::size_t>((w - 1) * kDistricts + (d - 1))];
  }
  mutable std::vector<std::atomic<std::int64_t>> hints_;
};

// Fills columns added after the row format was fixed: `extra` names a
// value, otherwise the column default.
void fit(const SchemaVersion& s, RecordPayload& p, const std::map<std::string, Value>& extra = {}) {
  for (std::size_t i = p.size(); i < s.columns.size(); ++i) {
    const auto& c = s.columns[i];
    auto it = extra.find(c.name);
    p.push_back(it != extra.end() ? it->second : c.default_value);
  }
}

struct Row {
  Rid rid;
  RecordPayload values;
};

Result<Row> get(Transaction& txn, TableId t, const char* index, std::vector<Value> key,
                Access access = Access::Read) {
  auto r = txn.lookup(t, index, key);
  if (!r.ok()) return {r.status, {}};
  auto row = txn.read(t, r.value, access);
  if (!row.ok()) return {row.status, {}};
  return {OpStatus::Ok, {r.value, std::move(row.value)}};
}

// Order lines of orders [lo, hi) in one district, through the primary index
// when it is usable and by a full scan otherwise.
Result<std::vector<Row>> order_lines(Transaction& txn, TableId ol, std::int64_t w, std::int64_t d, std::int64_t lo,
                                     std::int64_t hi) {
  std::vector<Row> out;
  auto match = [&](const RecordPayload& p) {
    if (i64(p[0]) != w || i64(p[1]) != d) return false;
    const auto o = i64(p[col::ol_o_id]);
    return o >= lo && o < hi;
  };
  auto schema = txn.schema(ol);
  if (!schema.ok()) return {schema.status, {}};
  if (schema.value->find_index("ol_pk")) {
    bool usable = true;
    for (std::int64_t o = lo; o < hi && usable; ++o) {
      const Value prefix[] = {w, d, o};
      auto rids = txn.scan_prefix(ol, "ol_pk", prefix);
      if (rids.status == OpStatus::Unpublished) {
        usable = false;
        out.clear();
        break;
      }
      if (!rids.ok()) return {rids.status, {}};
      for (const Rid rid : rids.value) {
        auto row = txn.read(ol, rid);
        if (row.status == OpStatus::NotFound) continue;
        if (!row.ok()) return {row.status, {}};
        if (match(row.value)) out.push_back({rid, std::move(row.value)});
      }
    }
    if (usable) return {OpStatus::Ok, std::move(out)};
  }
  auto n = txn.rid_count(ol);
  if (!n.ok()) return {n.status, {}};
  for (std::uint64_t r = 0; r < n.value; ++r) {
    auto row = txn.read(ol, Rid{r});
    if (row.status == OpStatus::NotFound) continue;
    if (!row.ok()) return {row.status, {}};
    if (match(row.value)) out.push_back({Rid{r}, std::move(row.value)});
  }
  return {OpStatus::Ok, std::move(out)};
}

struct Scale {
  int warehouses;
  int items;
  int customers;
};

class TpccWorker final : public Worker {
 public:
  TpccWorker(Database& db, const Tables& t, DeliveryHints& hints, const Scale& scale, std::uint64_t seed,
             unsigned index)
      : db_(db), t_(t), hints_(hints), scale_(scale), rng_(seed * 104729 + index),
        w_(static_cast<std::int64_t>(index % static_cast<unsigned>(scale.warehouses)) + 1) {}

  Outcome step() override {
    if (!planned_) plan();
    ++attempt_;
    auto txn = db_.begin();
    Outcome o;
    switch (kind_) {
      case Kind::NewOrder: o = new_order(txn); break;
      case Kind::Payment: o = payment(txn); break;
      case Kind::OrderStatus: o = order_status(txn); break;
      case Kind::Delivery: o = delivery(txn); break;
      case Kind::StockLevel: o = stock_level(txn); break;
    }
    if (o.committed) planned_ = false;
    return o;
  }

 private:
  enum class Kind { NewOrder, Payment, OrderStatus, Delivery, StockLevel };

  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
  }

  void plan() {
    const auto roll = uniform(1, 100);
    kind_ = roll <= 45 ? Kind::NewOrder
            : roll <= 88 ? Kind::Payment
            : roll <= 92 ? Kind::OrderStatus
            : roll <= 96 ? Kind::Delivery
                         : Kind::StockLevel;
    d_ = uniform(1, kDistricts);
    c_ = uniform(1, scale_.customers);
    ol_cnt_ = uniform(5, 15);
    for (std::int64_t i = 0; i < ol_cnt_; ++i) {
      items_[i] = uniform(1, scale_.items);
      supply_[i] = scale_.warehouses > 1 && uniform(1, 100) == 1 ? uniform(1, scale_.warehouses) : w_;
      qty_[i] = uniform(1, 10);
    }
    amount_ = static_cast<double>(uniform(100, 500000)) / 100.0;
    carrier_ = uniform(1, 10);
    threshold_ = uniform(10, 20);
    planned_ = true;
  }

  // Customer row in whichever table holds the payment columns.
  struct Customer {
    TableId table;
    Row row;
    std::size_t base;  // position of c_credit
  };

  Result<Customer> customer(Transaction& txn, std::int64_t d, std::int64_t c, Access access) {
    if (!split_) {
      auto r = get(txn, t_.customer, "c_pk", {w_, d, c}, access);
      if (r.status != OpStatus::NoSchema) return {r.status, {t_.customer, std::move(r.value), col::c_credit}};
      // The table was split away; later attempts use the private half.
      if (auto priv = db_.catalog().find("customer_private")) {
        split_ = true;
        private_ = *priv;
      }
      return {OpStatus::NoSchema, {}};
    }
    auto r = get(txn, private_, "c_pk", {w_, d, c}, access);
    return {r.status, {private_, std::move(r.value), col::c_credit - col::c_private_shift}};
  }

  Outcome new_order(Transaction& txn) {
    auto wh = get(txn, t_.warehouse, "w_pk", {w_});
    if (!wh.ok()) return fail(txn, wh.status);
    auto dist = get(txn, t_.district, "d_pk", {w_, d_}, Access::ReadModifyWrite);
    if (!dist.ok()) return fail(txn, dist.status);
    const std::int64_t o_id = i64(dist.value.values[col::d_next_o_id]);
    dist.value.values[col::d_next_o_id] = o_id + 1;
    if (auto st = txn.write(t_.district, dist.value.rid, dist.value.values, Access::ReadModifyWrite); st != OpStatus::Ok) {
      return fail(txn, st);
    }
    auto cust = customer(txn, d_, c_, Access::Read);
    if (!cust.ok()) return fail(txn, cust.status);

    double amounts[15];
    double total = 0;
    for (std::int64_t i = 0; i < ol_cnt_; ++i) {
      auto item = get(txn, t_.item, "i_pk", {items_[i]});
      if (!item.ok()) return fail(txn, item.status);
      amounts[i] = static_cast<double>(qty_[i]) * f64(item.value.values[col::i_price]);
      total += amounts[i];
    }

    auto os = txn.schema(t_.oorder);
    if (!os.ok()) return fail(txn, os.status);
    RecordPayload order{w_, d_, o_id, c_, I(0), ol_cnt_, I(attempt_)};
    fit(*os.value, order, {{"o_ol_total", total}});
    if (auto r = txn.insert(t_.oorder, std::move(order)); !r.ok()) return fail(txn, r.status);
    auto ns = txn.schema(t_.new_order);
    if (!ns.ok()) return fail(txn, ns.status);
    RecordPayload pending{w_, d_, o_id};
    fit(*ns.value, pending);
    if (auto r = txn.insert(t_.new_order, std::move(pending)); !r.ok()) return fail(txn, r.status);

    auto ls = txn.schema(t_.order_line);
    if (!ls.ok()) return fail(txn, ls.status);
    for (std::int64_t i = 0; i < ol_cnt_; ++i) {
      auto stock = get(txn, t_.stock, "s_pk", {supply_[i], items_[i]}, Access::ReadModifyWrite);
      if (!stock.ok()) return fail(txn, stock.status);
      auto& s = stock.value.values;
      const auto q = i64(s[col::s_quantity]);
      s[col::s_quantity] = q >= qty_[i] + 10 ? q - qty_[i] : q - qty_[i] + 91;
      s[col::s_ytd] = i64(s[col::s_ytd]) + qty_[i];
      s[col::s_order_cnt] = i64(s[col::s_order_cnt]) + 1;
      if (auto st = txn.write(t_.stock, stock.value.rid, std::move(s), Access::ReadModifyWrite); st != OpStatus::Ok) {
        return fail(txn, st);
      }
      RecordPayload line{w_, d_, o_id, I(i + 1), items_[i], supply_[i], qty_[i], amounts[i], I(0)};
      fit(*ls.value, line);
      if (auto r = txn.insert(t_.order_line, std::move(line)); !r.ok()) return fail(txn, r.status);
    }
    return finish(txn);
  }

  Outcome payment(Transaction& txn) {
    auto wh = get(txn, t_.warehouse, "w_pk", {w_}, Access::ReadModifyWrite);
    if (!wh.ok()) return fail(txn, wh.status);
    wh.value.values[col::w_ytd] = f64(wh.value.values[col::w_ytd]) + amount_;
    if (auto st = txn.write(t_.warehouse, wh.value.rid, std::move(wh.value.values), Access::ReadModifyWrite);
        st != OpStatus::Ok) {
      return fail(txn, st);
    }
    auto dist = get(txn, t_.district, "d_pk", {w_, d_}, Access::ReadModifyWrite);
    if (!dist.ok()) return fail(txn, dist.status);
    dist.value.values[col::d_ytd] = f64(dist.value.values[col::d_ytd]) + amount_;
    if (auto st = txn.write(t_.district, dist.value.rid, std::move(dist.value.values), Access::ReadModifyWrite);
        st != OpStatus::Ok) {
      return fail(txn, st);
    }
    auto cust = customer(txn, d_, c_, Access::ReadModifyWrite);
    if (!cust.ok()) return fail(txn, cust.status);
    auto& p = cust.value.row.values;
    const auto b = cust.value.base;
    p[b + 1] = f64(p[b + 1]) - amount_;
    p[b + 2] = f64(p[b + 2]) + amount_;
    p[b + 3] = i64(p[b + 3]) + 1;
    if (auto st = txn.write(cust.value.table, cust.value.row.rid, std::move(p), Access::ReadModifyWrite);
        st != OpStatus::Ok) {
      return fail(txn, st);
    }
    auto hs = txn.schema(t_.history);
    if (!hs.ok()) return fail(txn, hs.status);
    RecordPayload h{c_, d_, w_, d_, w_, amount_};
    fit(*hs.value, h);
    if (auto r = txn.insert(t_.history, std::move(h)); !r.ok()) return fail(txn, r.status);
    return finish(txn);
  }

  // Reads the district's most recent order and its lines.
  Outcome order_status(Transaction& txn) {
    auto cust = customer(txn, d_, c_, Access::Read);
    if (!cust.ok()) return fail(txn, cust.status);
    auto dist = get(txn, t_.district, "d_pk", {w_, d_});
    if (!dist.ok()) return fail(txn, dist.status);
    const std::int64_t o_id = i64(dist.value.values[col::d_next_o_id]) - 1;
    auto order = get(txn, t_.oorder, "o_pk", {w_, d_, o_id});
    if (!order.ok()) return fail(txn, order.status);
    auto lines = order_lines(txn, t_.order_line, w_, d_, o_id, o_id + 1);
    if (!lines.ok()) return fail(txn, lines.status);
    return finish(txn);
  }

  Outcome delivery(Transaction& txn) {
    delivered_.clear();
    for (std::int64_t d = 1; d <= kDistricts; ++d) {
      auto dist = get(txn, t_.district, "d_pk", {w_, d});
      if (!dist.ok()) return fail(txn, dist.status);
      const std::int64_t next = i64(dist.value.values[col::d_next_o_id]);
      std::optional<Row> oldest;
      for (std::int64_t o = hints_.get(w_, d); o < next && !oldest; ++o) {
        auto row = get(txn, t_.new_order, "no_pk", {w_, d, o});
        if (row.status == OpStatus::NotFound) continue;
        if (!row.ok()) return fail(txn, row.status);
        oldest = std::move(row.value);
      }
      if (!oldest) continue;
      if (auto st = txn.remove(t_.new_order, oldest->rid); st != OpStatus::Ok) return fail(txn, st);
      const std::int64_t o_id = i64(oldest->values[col::no_o_id]);

      auto order = get(txn, t_.oorder, "o_pk", {w_, d, o_id}, Access::ReadModifyWrite);
      if (!order.ok()) return fail(txn, order.status);
      const std::int64_t c = i64(order.value.values[col::o_c_id]);
      order.value.values[col::o_carrier_id] = carrier_;
      if (auto st = txn.write(t_.oorder, order.value.rid, std::move(order.value.values), Access::ReadModifyWrite);
          st != OpStatus::Ok) {
        return fail(txn, st);
      }
      auto lines = order_lines(txn, t_.order_line, w_, d, o_id, o_id + 1);
      if (!lines.ok()) return fail(txn, lines.status);
      double total = 0;
      for (auto& line : lines.value) {
        auto cur = txn.read(t_.order_line, line.rid, Access::ReadModifyWrite);
        if (!cur.ok()) return fail(txn, cur.status);
        total += f64(cur.value[col::ol_amount]);
        cur.value[col::ol_delivery_d] = I(attempt_);
        if (auto st = txn.write(t_.order_line, line.rid, std::move(cur.value), Access::ReadModifyWrite);
            st != OpStatus::Ok) {
          return fail(txn, st);
        }
      }
      auto cust = customer(txn, d, c, Access::ReadModifyWrite);
      if (!cust.ok()) return fail(txn, cust.status);
      auto& p = cust.value.row.values;
      const auto b = cust.value.base;
      p[b + 1] = f64(p[b + 1]) + total;
      p[b + 4] = i64(p[b + 4]) + 1;
      if (auto st = txn.write(cust.value.table, cust.value.row.rid, std::move(p), Access::ReadModifyWrite);
          st != OpStatus::Ok) {
        return fail(txn, st);
      }
      delivered_.emplace_back(d, o_id);
    }
    Outcome out = finish(txn);
    if (out.committed) {
      for (const auto& [d, o] : delivered_) hints_.raise(w_, d, o + 1);
    }
    return out;
  }

  Outcome stock_level(Transaction& txn) {
    auto dist = get(txn, t_.district, "d_pk", {w_, d_});
    if (!dist.ok()) return fail(txn, dist.status);
    const std::int64_t next = i64(dist.value.values[col::d_next_o_id]);
    auto lines = order_lines(txn, t_.order_line, w_, d_, next - kLinesPerStockLevel, next);
    if (!lines.ok()) return fail(txn, lines.status);
    std::set<std::int64_t> items;
    for (const auto& l : lines.value) items.insert(i64(l.values[col::ol_i_id]));
    std::int64_t low = 0;
    for (const auto i : items) {
      auto s = get(txn, t_.stock, "s_pk", {w_, i});
      if (!s.ok()) return fail(txn, s.status);
      if (i64(s.value.values[col::s_quantity]) < threshold_) ++low;
    }
    (void)low;
    return finish(txn);
  }

  Database& db_;
  const Tables& t_;
  DeliveryHints& hints_;
  Scale scale_;
  std::vector<std::pair<std::int64_t, std::int64_t>> delivered_;  // (district, order)
  std::mt19937_64 rng_;
  std::int64_t w_;
  bool split_ = false;
  TableId private_;
  std::int64_t attempt_ = 0;

  bool planned_ = false;
  Kind kind_ = Kind::NewOrder;
  std::int64_t d_ = 1, c_ = 1, ol_cnt_ = 5, carrier_ = 1, threshold_ = 10;
  std::int64_t items_[15] = {}, supply_[15] = {}, qty_[15] = {};
  double amount_ = 0;
};

class Loader {
 public:
  Loader(Database& db, TableId table) : db_(db), table_(table), txn_(db.begin()) {}

  void add(RecordPayload p) {
    if (!txn_.insert(table_, std::move(p)).ok()) throw std::runtime_error("tpccd load insert failed");
    if (++pending_ == 5000) flush();
  }
  void flush() {
    if (txn_.commit() != TxnStatus::Committed) throw std::runtime_error("tpccd load commit failed");
    txn_ = db_.begin();
    pending_ = 0;
  }
  ~Loader() {
    if (txn_.status() == TxnStatus::Active) txn_.commit();
  }

 private:
  Database& db_;
  TableId table_;
  Transaction txn_;
  int pending_ = 0;
};

struct Loaded {
  Tables tables;
  std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, RecordPayload> customers;  // public columns
  std::uint64_t order_lines = 0;
};

Loaded load(Database& db, const Scale& scale, bool order_line_index, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  Loaded out;
  Tables& t = out.tables;
  t.warehouse = db.create_table("warehouse", {int_col("w_id"), text_col("w_name"), float_col("w_tax"), float_col("w_ytd")},
                                {{"w_pk", {"w_id"}}});
  t.district = db.create_table("district",
                               {int_col("d_w_id"), int_col("d_id"), text_col("d_name"), float_col("d_tax"),
                                float_col("d_ytd"), int_col("d_next_o_id")},
                               {{"d_pk", {"d_w_id", "d_id"}}});
  std::vector<ColumnDef> cust = {int_col("c_w_id"),    int_col("c_d_id"),  int_col("c_id"),
                                 text_col("c_first"),  text_col("c_last"), text_col("c_street"),
                                 text_col("c_city"),   text_col("c_state"), text_col("c_credit")};
  cust.push_back(float_col("c_balance"));
  cust.push_back(float_col("c_ytd_payment"));
  cust.push_back(int_col("c_payment_cnt"));
  cust.push_back(int_col("c_delivery_cnt"));
  t.customer = db.create_table("customer", std::move(cust), {{"c_pk", {"c_w_id", "c_d_id", "c_id"}}});
  t.history = db.create_table("history", {int_col("h_c_id"), int_col("h_c_d_id"), int_col("h_c_w_id"), int_col("h_d_id"),
                                          int_col("h_w_id"), float_col("h_amount")});
  t.oorder = db.create_table("oorder",
                             {int_col("o_w_id"), int_col("o_d_id"), int_col("o_id"), int_col("o_c_id"),
                              int_col("o_carrier_id"), int_col("o_ol_cnt"), int_col("o_entry_d")},
                             {{"o_pk", {"o_w_id", "o_d_id", "o_id"}}});
  t.new_order = db.create_table("new_order", {int_col("no_w_id"), int_col("no_d_id"), int_col("no_o_id")},
                                {{"no_pk", {"no_w_id", "no_d_id", "no_o_id"}}});
  std::vector<IndexSpec> ol_indexes;
  if (order_line_index) ol_indexes.push_back({"ol_pk", {"ol_w_id", "ol_d_id", "ol_o_id", "ol_number"}});
  t.order_line = db.create_table("order_line",
                                 {int_col("ol_w_id"), int_col("ol_d_id"), int_col("ol_o_id"), int_col("ol_number"),
                                  int_col("ol_i_id"), int_col("ol_supply_w_id"), int_col("ol_quantity"),
                                  float_col("ol_amount"), int_col("ol_delivery_d")},
                                 std::move(ol_indexes));
  t.item = db.create_table("item", {int_col("i_id"), text_col("i_name"), float_col("i_price")}, {{"i_pk", {"i_id"}}});
  t.stock = db.create_table("stock",
                            {int_col("s_w_id"), int_col("s_i_id"), int_col("s_quantity"), int_col("s_ytd"),
                             int_col("s_order_cnt")},
                            {{"s_pk", {"s_w_id", "s_i_id"}}});

  {
    Loader items(db, t.item);
    for (std::int64_t i = 1; i <= scale.items; ++i) {
      items.add({i, "item" + std::to_string(i), static_cast<double>(uniform(100, 10000)) / 100.0});
    }
  }
  const std::int64_t delivered = scale.customers * 7 / 10;  // matches DeliveryHints' start
  for (std::int64_t w = 1; w <= scale.warehouses; ++w) {
    {
      Loader wh(db, t.warehouse);
      wh.add({w, "wh" + std::to_string(w), static_cast<double>(uniform(0, 2000)) / 10000.0, 300000.0});
    }
    {
      Loader stock(db, t.stock);
      for (std::int64_t i = 1; i <= scale.items; ++i) stock.add({w, i, uniform(10, 100), I(0), I(0)});
    }
    Loader dist(db, t.district), custs(db, t.customer), orders(db, t.oorder), news(db, t.new_order),
        lines(db, t.order_line);
    for (std::int64_t d = 1; d <= kDistricts; ++d) {
      dist.add({w, d, "d" + std::to_string(d), static_cast<double>(uniform(0, 2000)) / 10000.0, 30000.0,
                I(scale.customers + 1)});
      for (std::int64_t c = 1; c <= scale.customers; ++c) {
        RecordPayload pub{w, d, c, "first" + std::to_string(c), "last" + std::to_string(c % 1000), "street",
                          "city", "st"};
        RecordPayload row = pub;
        row.insert(row.end(), {uniform(1, 10) == 1 ? "BC" : "GC", -10.0, 10.0, I(1), I(0)});
        custs.add(std::move(row));
        out.customers.emplace(std::make_tuple(w, d, c), std::move(pub));
      }
      std::vector<std::int64_t> owners(static_cast<std::size_t>(scale.customers));
      for (std::size_t i = 0; i < owners.size(); ++i) owners[i] = static_cast<std::int64_t>(i) + 1;
      std::shuffle(owners.begin(), owners.end(), rng);
      for (std::int64_t o = 1; o <= scale.customers; ++o) {
        const bool done = o <= delivered;
        const std::int64_t cnt = uniform(5, 15);
        orders.add({w, d, o, owners[static_cast<std::size_t>(o - 1)], I(done ? uniform(1, 10) : 0), cnt, I(0)});
        if (!done) news.add({w, d, o});
        for (std::int64_t n = 1; n <= cnt; ++n) {
          const double amount = done ? 0.0 : static_cast<double>(uniform(1, 999999)) / 100.0;
          lines.add({w, d, o, n, uniform(1, scale.items), w, I(5), amount, I(done ? 1 : 0)});
          ++out.order_lines;
        }
      }
    }
  }
  return out;
}

// ---- post-run checks, on a quiesced database ----

std::vector<Row> all_rows(Transaction& txn, TableId t) {
  std::vector<Row> out;
  auto n = txn.rid_count(t);
  if (!n.ok()) return out;
  for (std::uint64_t r = 0; r < n.value; ++r) {
    auto row = txn.read(t, Rid{r});
    if (row.ok()) out.push_back({Rid{r}, std::move(row.value)});
  }
  return out;
}

using Key3 = std::tuple<std::int64_t, std::int64_t, std::int64_t>;
Key3 key3(const RecordPayload& p) { return {i64(p[0]), i64(p[1]), i64(p[2])}; }

std::string check_orders(Database& db, const Tables& t) {
  auto txn = db.begin();
  std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> max_o;
  for (const auto& r : all_rows(txn, t.oorder)) {
    auto& m = max_o[{i64(r.values[0]), i64(r.values[1])}];
    m = std::max(m, i64(r.values[2]));
  }
  for (const auto& r : all_rows(txn, t.district)) {
    const auto next = i64(r.values[col::d_next_o_id]);
    if (max_o[{i64(r.values[0]), i64(r.values[1])}] != next - 1) {
      return "district " + std::to_string(i64(r.values[1])) + " next_o_id " + std::to_string(next) +
             " disagrees with its orders";
    }
  }
  return {};
}

std::string check_index(Database& db, const Tables& t, std::uint64_t seed) {
  auto txn = db.begin();
  auto rows = all_rows(txn, t.order_line);
  if (rows.empty()) return "order_line is empty";
  std::mt19937_64 rng(seed);
  for (int k = 0; k < 100; ++k) {
    const auto& r = rows[rng() % rows.size()];
    const Value key[] = {r.values[0], r.values[1], r.values[2], r.values[3]};
    auto hit = txn.lookup(t.order_line, "ol_pk", key);
    if (!hit.ok() || hit.value != r.rid) return "index disagrees with scan at rid " + std::to_string(r.rid.value);
  }
  return {};
}

std::string check_new_column(Database& db, const Tables& t) {
  auto txn = db.begin();
  auto s = txn.schema(t.order_line);
  if (!s.ok() || s.value->columns.back().name != "ol_tax") return "ol_tax missing";
  for (const auto& r : all_rows(txn, t.order_line)) {
    if (r.values.back() != Value{0.1}) return "ol_tax not filled at rid " + std::to_string(r.rid.value);
  }
  return {};
}

std::string check_line_numbers(Database& db, const Tables& t) {
  auto txn = db.begin();
  std::map<Key3, std::int64_t> counts;
  for (const auto& r : all_rows(txn, t.oorder)) counts[key3(r.values)] = i64(r.values[col::o_ol_cnt]);
  for (const auto& r : all_rows(txn, t.order_line)) {
    const Key3 k{i64(r.values[0]), i64(r.values[1]), i64(r.values[col::ol_o_id])};
    const auto n = i64(r.values[col::ol_number]);
    auto it = counts.find(k);
    if (n < 1 || it == counts.end() || n > it->second) return "line number out of range at rid " + std::to_string(r.rid.value);
  }
  return {};
}

std::string check_split(Database& db, const Loaded& loaded) {
  auto pub = db.catalog().find("customer_public");
  auto priv = db.catalog().find("customer_private");
  if (!pub || !priv) return "split tables missing";
  if (db.catalog().find("customer")) return "source table still present";
  auto txn = db.begin();
  std::map<Key3, RecordPayload> a, b;
  for (auto& r : all_rows(txn, *pub)) {
    if (!a.emplace(key3(r.values), std::move(r.values)).second) return "duplicate public row";
  }
  for (auto& r : all_rows(txn, *priv)) {
    if (!b.emplace(key3(r.values), std::move(r.values)).second) return "duplicate private row";
  }
  if (a.size() != loaded.customers.size() || b.size() != loaded.customers.size()) return "row count changed";
  for (const auto& [key, original] : loaded.customers) {
    auto ia = a.find(key);
    if (ia == a.end() || !b.contains(key)) return "customer lost in the split";
    if (ia->second != original) return "public columns changed";
  }
  return {};
}

std::string check_preaggregate(Database& db, const Tables& t) {
  auto txn = db.begin();
  std::map<Key3, double> sums;
  for (const auto& r : all_rows(txn, t.order_line)) {
    sums[{i64(r.values[0]), i64(r.values[1]), i64(r.values[col::ol_o_id])}] += f64(r.values[col::ol_amount]);
  }
  for (const auto& r : all_rows(txn, t.oorder)) {
    if (r.values.size() < 8) return "o_ol_total missing";
    const double expect = sums[key3(r.values)];
    const double got = f64(r.values[7]);
    if (std::abs(got - expect) > 1e-6 * std::max(1.0, std::abs(expect))) {
      return "order total " + std::to_string(got) + " != " + std::to_string(expect);
    }
  }
  return {};
}

std::string check_join(Database& db, const Tables& t) {
  auto joined = db.catalog().find("order_line_stock");
  if (!joined) return "joined table missing";
  auto txn = db.begin();
  std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t>, RecordPayload> lines;
  for (auto& r : all_rows(txn, t.order_line)) {
    lines.emplace(std::make_tuple(i64(r.values[0]), i64(r.values[1]), i64(r.values[2]), i64(r.values[3])),
                  std::move(r.values));
  }
  std::uint64_t n = 0;
  for (const auto& r : all_rows(txn, *joined)) {
    auto it = lines.find({i64(r.values[0]), i64(r.values[1]), i64(r.values[2]), i64(r.values[3])});
    if (it == lines.end()) return "joined row without source";
    if (it->second[col::ol_i_id] != r.values[col::ol_i_id] || it->second[col::ol_amount] != r.values[col::ol_amount]) {
      return "joined row differs from source";
    }
    if (!std::holds_alternative<std::int64_t>(r.values.back())) return "stock quantity not copied";
    ++n;
  }
  if (n == 0) return "joined table empty";
  return {};
}

}  // namespace

DdlSpec tpccd_ddl(const WorkloadConfig& c) {
  if (c.ddl_spec) return *c.ddl_spec;
  const ColumnDef tax{"ol_tax", DataType::Float64, 0.1, true};
  const std::vector<std::string> checks = {"ol_number >= 1", "ol_number <= oorder.o_ol_cnt@o_pk(ol_w_id,ol_d_id,ol_o_id)"};
  DdlSpec s;
  s.policy = c.policy;
  const std::string& op = c.ddl_op;
  if (op == "add_column") {
    s = DdlSpec::add_column("order_line", tax, c.policy);
  } else if (op == "add_constraint") {
    s.kind = DdlKind::AddConstraint;
    s.table = "order_line";
    s.checks = checks;
  } else if (op == "add_column_with_constraint" || op == "both") {
    s.kind = DdlKind::AddColumnWithConstraint;
    s.table = "order_line";
    s.columns = {tax};
    s.checks = checks;
  } else if (op == "create_index") {
    s = DdlSpec::create_index("order_line", {"ol_pk", {"ol_w_id", "ol_d_id", "ol_o_id", "ol_number"}}, c.policy);
  } else if (op == "split_table") {
    s.kind = DdlKind::SplitTable;
    s.table = "customer";
    const std::vector<IndexSpec> pk = {{"c_pk", {"c_w_id", "c_d_id", "c_id"}}};
    s.targets = {{"customer_public", kCustomerPublic, pk}, {"customer_private", kCustomerPrivate, pk}};
    s.drop_source = true;
  } else if (op == "preaggregate") {
    s.kind = DdlKind::Preaggregate;
    s.table = "oorder";
    s.derived_column = "o_ol_total";
    s.derived_type = DataType::Float64;
    s.foreign = "order_line.ol_amount@ol_pk(o_w_id,o_d_id,o_id)";
  } else if (op == "join_table") {
    s.kind = DdlKind::JoinTable;
    s.table = "order_line";
    s.targets = {{"order_line_stock", {}, {}}};
    s.derived_column = "s_quantity";
    s.derived_type = DataType::Int64;
    s.foreign = "stock.s_quantity@s_pk(ol_supply_w_id,ol_i_id)";
  } else {
    throw std::invalid_argument("unknown tpccd ddl '" + op + "'");
  }
  s.policy = c.policy;
  apply_threads(c, s);
  return s;
}

ThroughputSeries run_tpccd(const WorkloadConfig& config, const RunHooks& hooks) {
  if (config.warehouses == 0 || config.items == 0 || config.customers_per_district == 0) {
    throw std::invalid_argument("warehouses, items and customers must be positive");
  }
  std::optional<DdlSpec> ddl;
  if (!config.ddl_op.empty() || config.ddl_spec) ddl = tpccd_ddl(config);
  const bool builds_index = ddl && ddl->kind == DdlKind::CreateIndex;
  const Scale scale{static_cast<int>(config.warehouses), static_cast<int>(config.items),
                    static_cast<int>(config.customers_per_district)};
  Database db(options_for(config, ddl, hooks.trace));
  const Loaded loaded = load(db, scale, !builds_index, config.seed);
  DdlEngine engine(db);
  DeliveryHints hints(scale.warehouses, scale.customers * 7 / 10 + 1);
  std::vector<std::unique_ptr<Worker>> workers;
  for (unsigned i = 0; i < config.dml_threads; ++i) {
    workers.push_back(std::make_unique<TpccWorker>(db, loaded.tables, hints, scale, config.seed, i));
  }
  auto series = drive(config, db, engine, ddl, hooks.ddl, std::move(workers));
  engine.wait_background();

  const Tables& t = loaded.tables;
  series.checks["orders"] = check_orders(db, t);
  if (series.ddl && series.ddl->result.committed()) {
    switch (ddl->kind) {
      case DdlKind::CreateIndex: series.checks["index_matches_scan"] = check_index(db, t, config.seed); break;
      case DdlKind::AddColumn: series.checks["new_column_filled"] = check_new_column(db, t); break;
      case DdlKind::AddConstraint: series.checks["constraint_holds"] = check_line_numbers(db, t); break;
      case DdlKind::AddColumnWithConstraint:
        series.checks["new_column_filled"] = check_new_column(db, t);
        series.checks["constraint_holds"] = check_line_numbers(db, t);
        break;
      case DdlKind::SplitTable: series.checks["split_join_back"] = check_split(db, loaded); break;
      case DdlKind::Preaggregate: series.checks["preaggregate_sums"] = check_preaggregate(db, t); break;
      case DdlKind::JoinTable: series.checks["join_rows"] = check_join(db, t); break;
      default: break;
    }
  }
  if (config.txns_per_worker > 0) series.state_digest = table_digest(db, t.order_line) ^ table_digest(db, t.oorder);
  if (hooks.after_run) hooks.after_run(db, engine);
  return series;
}

}  // namespace morph::bench
