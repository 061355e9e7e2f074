#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "morph/types.hpp"

namespace morph {

struct LogRecord {
  Lsn lsn;
  TableId table;
  Rid rid;
  RecordPayload payload;
  bool tombstone = false;
  Timestamp commit_ts;
  TxnId txn;
};

// One write of a committing transaction, as handed to the log.
struct LogEntry {
  TableId table;
  Rid rid;
  const RecordPayload* payload;
  bool tombstone;
};

// Little-endian fixed header followed by length-prefixed values. Debug only.
void encode_record(const LogRecord& rec, std::string& out);
std::optional<LogRecord> decode_record(std::string_view& in);

// Append-only redo log. Records are dense by LSN; appends for one commit are
// contiguous. Readers never block appenders and may hold scanners while the
// log grows.
class RedoLog {
 public:
  static constexpr std::uint64_t kSegmentRecords = 1 << 14;

  RedoLog() = default;
  explicit RedoLog(const std::filesystem::path& mirror);
  RedoLog(const RedoLog&) = delete;
  RedoLog& operator=(const RedoLog&) = delete;

  // Appends one record per entry and returns the first LSN (the tail if empty).
  Lsn append_commit(TxnId txn, Timestamp commit_ts, std::span<const LogEntry> entries);

  Lsn current_lsn() const { return Lsn{tail_.load(std::memory_order_acquire)}; }

  // Drops whole segments strictly below `lsn`. Reading them afterwards throws.
  void release_before(Lsn lsn);
  Lsn first_retained() const;

  class Scanner {
   public:
    // Next record of the table with commit_ts <= upto, or null when the
    // current tail is reached. Records appended later are picked up by
    // subsequent calls.
    const LogRecord* next();
    // True once a record beyond `upto` was seen; nothing more can match.
    bool finished() const { return finished_; }
    Lsn position() const { return Lsn{pos_}; }

   private:
    friend class RedoLog;
    Scanner(const RedoLog& log, Lsn from, std::optional<TableId> table, Timestamp upto)
        : log_(&log), pos_(from.value), table_(table), upto_(upto) {}

    const RedoLog* log_;
    std::uint64_t pos_;
    std::optional<TableId> table_;
    Timestamp upto_;
    bool finished_ = false;
    std::shared_ptr<const void> seg_keepalive_;
    const LogRecord* seg_base_ = nullptr;
    std::uint64_t seg_index_ = ~std::uint64_t{0};
  };

  Scanner scan(Lsn from, std::optional<TableId> table, Timestamp upto) const;

  void dump(std::ostream& out) const;

 private:
  struct Segment {
    Segment() { records.reserve(kSegmentRecords); }
    std::vector<LogRecord> records;
  };

  std::shared_ptr<Segment> segment(std::uint64_t index) const;

  std::mutex append_mu_;
  mutable std::shared_mutex dir_mu_;
  std::vector<std::shared_ptr<Segment>> segments_;
  std::uint64_t first_segment_ = 0;  // segments below were released
  std::atomic<std::uint64_t> tail_{0};
  std::unique_ptr<std::ofstream> mirror_;
};

}  // namespace morph
