#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "support.hpp"
#include "verifier.hpp"

namespace morph {
namespace {

using namespace verify;
using testing::ints;

class History {
 public:
  void begin(std::uint64_t txn, std::uint64_t ts) { add(txn, EventKind::Begin, 0, 0, ts); }
  void schema_read(std::uint64_t txn, std::uint64_t table, std::uint64_t ts, std::uint32_t arity) {
    add(txn, EventKind::SchemaRead, table, 0, ts).arity = arity;
  }
  void schema_write(std::uint64_t txn, std::uint64_t table, std::uint64_t ts, std::uint32_t arity) {
    add(txn, EventKind::SchemaWrite, table, 0, ts).arity = arity;
  }
  HistoryEvent& read(std::uint64_t txn, std::uint64_t table, std::uint64_t rid, std::uint64_t ts) {
    auto& e = add(txn, EventKind::Read, table, rid, ts);
    e.found = ts != 0;
    e.arity = 3;
    return e;
  }
  void write(std::uint64_t txn, std::uint64_t table, std::uint64_t rid, std::uint64_t prior) {
    auto& e = add(txn, EventKind::Write, table, rid, prior);
    e.arity = 3;
    e.array = 1;
  }
  void commit(std::uint64_t txn, std::uint64_t ts) { add(txn, EventKind::Commit, 0, 0, ts); }

  std::vector<HistoryEvent> events;

 private:
  HistoryEvent& add(std::uint64_t txn, EventKind k, std::uint64_t table, std::uint64_t rid, std::uint64_t ts) {
    HistoryEvent e;
    e.seq = events.size();
    e.txn = TxnId{txn};
    e.kind = k;
    e.table = TableId{table};
    e.rid = Rid{rid};
    e.ts = Timestamp{ts};
    events.push_back(e);
    return events.back();
  }
};

// Ten serial transactions, each reading and bumping one of four rows.
History serial_history() {
  History h;
  h.begin(1, 1);
  h.schema_write(1, 1, 2, 3);
  h.commit(1, 2);
  std::map<std::uint64_t, std::uint64_t> last;  // rid -> ts
  std::uint64_t clock = 2;
  for (std::uint64_t t = 2; t <= 11; ++t) {
    const std::uint64_t rid = t % 4;
    h.begin(t, clock + 1);
    h.schema_read(t, 1, 2, 3);
    h.read(t, 1, rid, last[rid]);
    h.write(t, 1, rid, last[rid]);
    clock += 2;
    h.commit(t, clock);
    last[rid] = clock;
  }
  return h;
}

TEST(CheckHistory, SerialHistoryIsClean) {
  auto h = serial_history();
  auto r = check_si_history(h.events);
  EXPECT_TRUE(r.ok()) << r.message;
  EXPECT_EQ(r.transactions, 11u);
  EXPECT_EQ(r.committed, 11u);
  EXPECT_EQ(r.reads_checked, 10u);
  EXPECT_EQ(r.writes_checked, 10u);
}

TEST(CheckHistory, TooNewReadIsReportedAtThatRead) {
  auto h = serial_history();
  h.begin(50, 5);
  h.schema_read(50, 1, 2, 3);
  const auto& bad = h.read(50, 1, 3, 22);  // rid 3 last committed at 22
  const std::uint64_t bad_seq = bad.seq;
  h.commit(50, 0);
  auto r = check_si_history(h.events);
  EXPECT_EQ(r.violation, Violation::FutureRead);
  EXPECT_EQ(r.seq, bad_seq);
  EXPECT_NE(r.message.find("22"), std::string::npos);
}

TEST(CheckHistory, EmptyTraceIsClean) { EXPECT_TRUE(check_si_history({}).ok()); }

TEST(CheckHistory, EarliestViolationWins) {
  auto h = serial_history();
  h.begin(60, 23);
  h.schema_read(60, 1, 2, 3);
  h.read(60, 1, 1, 10);  // stale: rid 1 last written at 18
  const std::uint64_t first = h.events.back().seq;
  h.read(60, 1, 2, 99);  // phantom
  h.commit(60, 0);
  auto r = check_si_history(h.events);
  EXPECT_EQ(r.violation, Violation::StaleRead);
  EXPECT_EQ(r.seq, first);
}

// Every committed history of a random serial execution is accepted, and
// swapping any read's observed version for another committed one is not.
TEST(CheckHistory, RandomSerialHistoriesAndMutations) {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 50; ++round) {
    History h;
    h.begin(1, 1);
    h.schema_write(1, 1, 2, 3);
    h.commit(1, 2);
    std::map<std::uint64_t, std::vector<std::uint64_t>> versions;
    std::uint64_t clock = 2;
    std::vector<std::size_t> read_events;
    for (std::uint64_t t = 2; t < 40; ++t) {
      h.begin(t, clock + 1);
      h.schema_read(t, 1, 2, 3);
      const std::uint64_t rid = rng() % 5;
      const std::uint64_t seen = versions[rid].empty() ? 0 : versions[rid].back();
      read_events.push_back(h.events.size());
      h.read(t, 1, rid, seen);
      if (rng() % 2) {
        h.write(t, 1, rid, seen);
        clock += 2;
        h.commit(t, clock);
        versions[rid].push_back(clock);
      } else {
        h.commit(t, 0);
      }
    }
    ASSERT_TRUE(check_si_history(h.events).ok()) << round;
    // Mutate one read to observe an older committed version.
    for (auto idx : read_events) {
      auto& e = h.events[idx];
      const auto& vs = versions[e.rid.value];
      auto it = std::find(vs.begin(), vs.end(), e.ts.value);
      if (it == vs.end() || it == vs.begin()) continue;
      const auto saved = e.ts;
      e.ts = Timestamp{*(it - 1)};
      EXPECT_FALSE(check_si_history(h.events).ok()) << round;
      e.ts = saved;
      break;
    }
  }
}

// ---- fault corpus ----

struct CorpusCase {
  std::string name;
  Violation expect = Violation::None;
  std::vector<HistoryEvent> events;
};

std::vector<CorpusCase> load_corpus() {
  std::vector<CorpusCase> out;
  for (const auto& entry : std::filesystem::directory_iterator(MORPH_CORPUS_DIR)) {
    if (entry.path().extension() != ".trace") continue;
    CorpusCase c;
    c.name = entry.path().stem().string();
    std::ifstream in(entry.path());
    std::string text((std::istreambuf_iterator<char>(in)), {});
    const auto pos = text.find("# expect: ");
    if (pos == std::string::npos) throw std::runtime_error(c.name + " has no expect line");
    const auto eol = text.find('\n', pos);
    c.expect = parse_violation(text.substr(pos + 10, eol - pos - 10));
    std::istringstream events(text);
    c.events = read_trace(events);
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

TEST(FaultCorpus, EachFileYieldsItsDeclaredVerdict) {
  const auto corpus = load_corpus();
  std::set<Violation> classes;
  std::size_t clean = 0;
  for (const auto& c : corpus) {
    auto r = check_si_history(c.events);
    EXPECT_EQ(to_string(r.violation), to_string(c.expect)) << c.name << ": " << r.message;
    if (c.expect == Violation::None) {
      ++clean;
    } else {
      classes.insert(c.expect);
    }
  }
  EXPECT_GE(classes.size(), 10u);
  EXPECT_GE(clean, 1u);
}

TEST(FaultCorpus, FilesRoundTripThroughText) {
  for (const auto& c : load_corpus()) {
    std::ostringstream out;
    write_trace(out, c.events);
    std::istringstream in(out.str());
    auto back = read_trace(in);
    ASSERT_EQ(back.size(), c.events.size()) << c.name;
    for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(to_text(back[i]), to_text(c.events[i])) << c.name;
  }
}

// ---- text form ----

TEST(TraceText, RoundTripsEveryField) {
  HistoryEvent e;
  e.seq = 42;
  e.txn = TxnId{7};
  e.kind = EventKind::SchemaWrite;
  e.table = TableId{3};
  e.ts = Timestamp{19};
  e.arity = 4;
  e.pending = true;
  e.dropped = true;
  e.source = TableId{2};
  e.has_source = true;
  const std::string text = to_text(e);
  EXPECT_EQ(text, "42 schema_write txn=7 table=3 ts=19 arity=4 flags=pending,dropped source=2");
  auto back = parse_event(text);
  ASSERT_TRUE(back);
  EXPECT_EQ(to_text(*back), text);
  EXPECT_EQ(back->source, TableId{2});
}

TEST(TraceText, RandomEventsRoundTrip) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 500; ++i) {
    HistoryEvent e;
    e.seq = rng() % 1000;
    e.txn = TxnId{rng() % 100};
    e.kind = static_cast<EventKind>(rng() % 9);
    e.table = TableId{rng() % 5};
    e.rid = Rid{rng() % 50};
    e.ts = Timestamp{rng() % 500};
    e.arity = static_cast<std::uint32_t>(rng() % 6);
    e.array = rng() % 3;
    e.found = rng() % 2;
    e.own = rng() % 2;
    e.admitted = rng() % 2;
    auto back = parse_event(to_text(e));
    ASSERT_TRUE(back);
    EXPECT_EQ(to_text(*back), to_text(e));
  }
}

TEST(TraceText, MalformedLinesThrow) {
  EXPECT_THROW(parse_event("1 jump txn=1 ts=1"), std::invalid_argument);
  EXPECT_THROW(parse_event("1 read txn=1 ts"), std::invalid_argument);
  EXPECT_THROW(parse_event("1 read txn=1 ts=1 flags=shiny"), std::invalid_argument);
  EXPECT_THROW(parse_event("1 read txn=1 color=red"), std::invalid_argument);
  EXPECT_FALSE(parse_event(""));
  std::istringstream in("# comment\n\n0 begin txn=1 ts=1\n");
  EXPECT_EQ(read_trace(in).size(), 1u);
}

// ---- serial replay ----

ReplayTxn writes_at(std::uint64_t ts, std::uint64_t rid, RecordPayload p) {
  return {Timestamp{ts}, {}, {{TableId{1}, Rid{rid}, std::move(p), false}}};
}

TEST(SerialReplay, LaterWriteWins) {
  auto r = serial_replay({writes_at(9, 0, ints({9})), writes_at(5, 0, ints({5}))});
  ASSERT_TRUE(r.ok) << r.error;
  EXPECT_EQ(r.state.final_rows(TableId{1}).at(0), ints({9}));
  EXPECT_EQ(r.state.rows.at(1).at(0).size(), 2u);
}

TEST(SerialReplay, SchemaChangeBetweenWrites) {
  ReplayTxn create{Timestamp{2}, {{TableId{1}, testing::int_columns({"a", "b"}), std::nullopt, false}}, {}};
  Transform add = Transform::identity(2);
  add.columns.push_back(ColumnExpr::constant_value(std::int64_t{0}));
  ReplayTxn ddl{Timestamp{7}, {{TableId{1}, testing::int_columns({"a", "b", "c"}), add, false}}, {}};
  auto r = serial_replay({create, writes_at(5, 0, ints({1, 2})), ddl, writes_at(9, 1, ints({3, 4, 5}))});
  ASSERT_TRUE(r.ok) << r.error;
  auto rows = r.state.final_rows(TableId{1});
  EXPECT_EQ(rows.at(0), ints({1, 2, 0}));
  EXPECT_EQ(rows.at(1), ints({3, 4, 5}));
  EXPECT_EQ(r.state.schemas.at(1).size(), 2u);

  auto bad = serial_replay({create, ddl, writes_at(9, 1, ints({3, 4}))});
  EXPECT_FALSE(bad.ok);
}

TEST(SerialReplay, EmptyInputGivesEmptyState) {
  auto r = serial_replay({});
  EXPECT_TRUE(r.ok);
  EXPECT_TRUE(r.state.rows.empty());
  EXPECT_TRUE(r.state.schemas.empty());
}

TEST(SerialReplay, DuplicateTimestampIsAnError) {
  auto r = serial_replay({writes_at(5, 0, ints({1})), writes_at(5, 1, ints({2}))});
  EXPECT_FALSE(r.ok);
  EXPECT_NE(r.error.find("duplicate"), std::string::npos);
}

TEST(SerialReplay, DeletesRemoveRows) {
  ReplayTxn del{Timestamp{8}, {}, {{TableId{1}, Rid{0}, {}, true}}};
  auto r = serial_replay({writes_at(5, 0, ints({1})), del});
  ASSERT_TRUE(r.ok);
  EXPECT_TRUE(r.state.final_rows(TableId{1}).empty());
}

// The log replays to the same table a fresh reader sees.
TEST(SerialReplay, LogReplayMatchesEngineState) {
  Database db;
  const TableId t = testing::load_table(db, "t", 200);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    auto txn = db.begin();
    const Rid rid{rng() % 200};
    if (i % 17 == 0) {
      txn.remove(t, rid);
    } else {
      txn.write(t, rid, ints({i, i, i}));
    }
    txn.commit();
  }
  auto r = serial_replay(txns_from_log(db.log()));
  ASSERT_TRUE(r.ok) << r.error;
  EXPECT_EQ(r.state.final_rows(t), testing::visible_rows(db, t));
}

// ---- engine traces ----

TEST(EngineTrace, ConcurrentRunIsClean) {
  TraceRecorder rec;
  DatabaseOptions o;
  o.trace = &rec;
  Database db(o);
  const TableId t = testing::load_table(db, "t", 64);
  {
    testing::Writers w(db, t, 4, 64, 11);
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  const auto events = rec.events();
  auto r = check_si_history(events);
  EXPECT_TRUE(r.ok()) << to_string(r.violation) << ": " << r.message;
  EXPECT_GT(r.committed, 10u);
  EXPECT_GT(r.writes_checked, 10u);
}

}  // namespace
}  // namespace morph
