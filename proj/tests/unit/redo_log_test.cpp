#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include "morph/redo_log.hpp"

namespace morph {
namespace {

std::vector<LogEntry> entries(TableId t, std::initializer_list<std::uint64_t> rids, const RecordPayload& p) {
  std::vector<LogEntry> out;
  for (auto r : rids) out.push_back({t, Rid{r}, &p, false});
  return out;
}

std::vector<const LogRecord*> drain(RedoLog::Scanner s) {
  std::vector<const LogRecord*> out;
  while (const LogRecord* r = s.next()) out.push_back(r);
  return out;
}

const RecordPayload kRow{std::int64_t{1}};

TEST(RedoLog, BatchGetsConsecutiveLsns) {
  RedoLog log;
  auto e = entries(TableId{1}, {4, 5, 6}, kRow);
  EXPECT_EQ(log.append_commit(TxnId{1}, Timestamp{2}, e), Lsn{0});
  EXPECT_EQ(log.current_lsn(), Lsn{3});
  auto recs = drain(log.scan(Lsn{0}, std::nullopt, kMaxTimestamp));
  ASSERT_EQ(recs.size(), 3u);
  for (std::uint64_t i = 0; i < 3; ++i) {
    EXPECT_EQ(recs[i]->lsn, Lsn{i});
    EXPECT_EQ(recs[i]->rid, Rid{4 + i});
  }
}

TEST(RedoLog, EmptyBatchReturnsTail) {
  RedoLog log;
  auto e = entries(TableId{1}, {1, 2}, kRow);
  log.append_commit(TxnId{1}, Timestamp{2}, e);
  EXPECT_EQ(log.append_commit(TxnId{2}, Timestamp{4}, {}), Lsn{2});
  EXPECT_EQ(log.current_lsn(), Lsn{2});
}

TEST(RedoLog, ConcurrentAppendsAreContiguous) {
  RedoLog log;
  constexpr int kThreads = 4, kBatches = 500, kBatch = 5;
  std::vector<std::vector<std::uint64_t>> firsts(kThreads);
  std::vector<std::thread> ts;
  for (int t = 0; t < kThreads; ++t) {
    ts.emplace_back([&, t] {
      for (int b = 0; b < kBatches; ++b) {
        auto e = entries(TableId{std::uint64_t(t)}, {0, 1, 2, 3, 4}, kRow);
        firsts[t].push_back(log.append_commit(TxnId{std::uint64_t(t * kBatches + b + 1)}, Timestamp{2}, e).value);
      }
    });
  }
  for (auto& t : ts) t.join();
  EXPECT_EQ(log.current_lsn(), Lsn{kThreads * kBatches * kBatch});
  // Each batch is one txn in LSN order with rids 0..4.
  auto recs = drain(log.scan(Lsn{0}, std::nullopt, kMaxTimestamp));
  ASSERT_EQ(recs.size(), std::size_t{kThreads * kBatches * kBatch});
  for (std::size_t i = 0; i < recs.size(); i += kBatch) {
    for (std::size_t k = 0; k < kBatch; ++k) {
      EXPECT_EQ(recs[i + k]->txn, recs[i]->txn);
      EXPECT_EQ(recs[i + k]->rid, Rid{k});
    }
  }
}

TEST(RedoLog, CurrentLsnBasics) {
  RedoLog log;
  EXPECT_EQ(log.current_lsn(), Lsn{0});
  for (int i = 0; i < 10; ++i) {
    auto e = entries(TableId{1}, {std::uint64_t(i)}, kRow);
    const auto before = log.current_lsn();
    log.append_commit(TxnId{1}, Timestamp{std::uint64_t(2 * i + 2)}, e);
    EXPECT_GT(log.current_lsn(), before);
  }
  EXPECT_EQ(log.current_lsn(), Lsn{10});
}

TEST(RedoLog, ScanAllInOrder) {
  RedoLog log;
  for (std::uint64_t i = 0; i < 5; ++i) {
    auto e = entries(TableId{1}, {i}, kRow);
    log.append_commit(TxnId{i + 1}, Timestamp{2 * i + 2}, e);
  }
  auto recs = drain(log.scan(Lsn{0}, TableId{1}, kMaxTimestamp));
  ASSERT_EQ(recs.size(), 5u);
  for (std::uint64_t i = 0; i < 5; ++i) EXPECT_EQ(recs[i]->commit_ts, Timestamp{2 * i + 2});
}

TEST(RedoLog, TableFilter) {
  RedoLog log;
  for (std::uint64_t i = 0; i < 6; ++i) {
    auto e = entries(TableId{i % 2}, {i}, kRow);
    log.append_commit(TxnId{i + 1}, Timestamp{2 * i + 2}, e);
  }
  auto recs = drain(log.scan(Lsn{0}, TableId{1}, kMaxTimestamp));
  ASSERT_EQ(recs.size(), 3u);
  for (auto* r : recs) EXPECT_EQ(r->table, TableId{1});
}

TEST(RedoLog, UpperBoundIsInclusive) {
  RedoLog log;
  for (std::uint64_t ts : {40, 50, 51, 60}) {
    auto e = entries(TableId{1}, {ts}, kRow);
    log.append_commit(TxnId{ts}, Timestamp{ts}, e);
  }
  auto s = log.scan(Lsn{0}, TableId{1}, Timestamp{50});
  auto recs = drain(std::move(s));
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs.back()->commit_ts, Timestamp{50});
}

TEST(RedoLog, ScannerFollowsTheTail) {
  RedoLog log;
  auto s = log.scan(Lsn{0}, TableId{1}, kMaxTimestamp);
  EXPECT_EQ(s.next(), nullptr);
  auto e = entries(TableId{1}, {9}, kRow);
  log.append_commit(TxnId{1}, Timestamp{2}, e);
  const LogRecord* r = s.next();
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(r->rid, Rid{9});
}

TEST(RedoLog, ScanAcrossSegments) {
  RedoLog log;
  const std::uint64_t n = RedoLog::kSegmentRecords * 2 + 17;
  for (std::uint64_t i = 0; i < n; ++i) {
    auto e = entries(TableId{1}, {i}, kRow);
    log.append_commit(TxnId{1}, Timestamp{2 * i + 2}, e);
  }
  auto recs = drain(log.scan(Lsn{5}, TableId{1}, kMaxTimestamp));
  ASSERT_EQ(recs.size(), n - 5);
  for (std::size_t i = 0; i < recs.size(); ++i) EXPECT_EQ(recs[i]->lsn, Lsn{i + 5});
}

// Property: each committed write with ts <= T is yielded exactly once.
TEST(RedoLog, ReplayCompletenessWhileAppending) {
  RedoLog log;
  constexpr std::uint64_t kN = 20000;
  std::thread writer([&] {
    for (std::uint64_t i = 0; i < kN; ++i) {
      auto e = entries(TableId{i % 3}, {i}, kRow);
      log.append_commit(TxnId{i + 1}, Timestamp{2 * i + 2}, e);
    }
  });
  const Timestamp upto{2 * (kN / 2)};
  auto s = log.scan(Lsn{0}, TableId{0}, upto);
  std::map<std::uint64_t, int> seen;
  while (!s.finished()) {
    if (const LogRecord* r = s.next()) {
      ++seen[r->rid.value];
    } else if (log.current_lsn().value == kN) {
      break;
    }
  }
  writer.join();
  std::size_t expected = 0;
  for (std::uint64_t i = 0; i < kN; ++i) {
    if (i % 3 == 0 && 2 * i + 2 <= upto.value) {
      ++expected;
      EXPECT_EQ(seen[i], 1) << i;
    }
  }
  EXPECT_EQ(seen.size(), expected);
}

TEST(RedoLog, ReleaseBeforeDropsSegments) {
  RedoLog log;
  for (std::uint64_t i = 0; i < RedoLog::kSegmentRecords + 10; ++i) {
    auto e = entries(TableId{1}, {i}, kRow);
    log.append_commit(TxnId{1}, Timestamp{2}, e);
  }
  log.release_before(Lsn{RedoLog::kSegmentRecords + 5});
  EXPECT_EQ(log.first_retained(), Lsn{RedoLog::kSegmentRecords});
  auto recs = drain(log.scan(log.first_retained(), TableId{1}, kMaxTimestamp));
  EXPECT_EQ(recs.size(), 10u);
}

TEST(RedoLog, EncodeDecodeRoundTrip) {
  LogRecord rec{Lsn{7}, TableId{3}, Rid{11}, {std::int64_t{-4}, 2.5, std::string("hi"), Value{}}, false, Timestamp{42},
                TxnId{9}};
  std::string buf;
  encode_record(rec, buf);
  std::string_view in(buf);
  auto back = decode_record(in);
  ASSERT_TRUE(back);
  EXPECT_TRUE(in.empty());
  EXPECT_EQ(back->lsn, rec.lsn);
  EXPECT_EQ(back->table, rec.table);
  EXPECT_EQ(back->rid, rec.rid);
  EXPECT_EQ(back->payload, rec.payload);
  EXPECT_EQ(back->commit_ts, rec.commit_ts);
  EXPECT_EQ(back->txn, rec.txn);
}

TEST(RedoLog, MirrorFileHoldsEveryRecord) {
  const auto path = std::filesystem::temp_directory_path() / "morph_log_mirror_test.bin";
  {
    RedoLog log(path);
    for (std::uint64_t i = 0; i < 4; ++i) {
      auto e = entries(TableId{1}, {i}, kRow);
      log.append_commit(TxnId{1}, Timestamp{2 * i + 2}, e);
    }
  }
  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  std::string_view view(bytes);
  int n = 0;
  while (auto r = decode_record(view)) {
    EXPECT_EQ(r->lsn, Lsn{std::uint64_t(n)});
    ++n;
  }
  EXPECT_EQ(n, 4);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace morph
