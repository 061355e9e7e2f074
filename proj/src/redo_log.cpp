#include "morph/redo_log.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

namespace morph {

namespace {

template <class T>
void put_le(std::string& out, T v) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
  }
}

template <class T>
bool get_le(std::string_view& in, T& v) {
  if (in.size() < sizeof(T)) return false;
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    acc |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[i])) << (8 * i);
  }
  v = static_cast<T>(acc);
  in.remove_prefix(sizeof(T));
  return true;
}

}  // namespace

void encode_record(const LogRecord& rec, std::string& out) {
  put_le<std::uint64_t>(out, rec.lsn.value);
  put_le<std::uint64_t>(out, rec.table.value);
  put_le<std::uint64_t>(out, rec.rid.value);
  put_le<std::uint64_t>(out, rec.commit_ts.value);
  put_le<std::uint64_t>(out, rec.txn.value);
  put_le<std::uint8_t>(out, rec.tombstone ? 1 : 0);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(rec.payload.size()));
  for (const auto& v : rec.payload) {
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(v.index()));
    switch (v.index()) {
      case 0:
        put_le<std::uint32_t>(out, 0);
        break;
      case 1:
        put_le<std::uint32_t>(out, 8);
        put_le<std::uint64_t>(out, static_cast<std::uint64_t>(std::get<std::int64_t>(v)));
        break;
      case 2:
        put_le<std::uint32_t>(out, 8);
        put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(std::get<double>(v)));
        break;
      default: {
        const auto& s = std::get<std::string>(v);
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
        out.append(s);
      }
    }
  }
}

std::optional<LogRecord> decode_record(std::string_view& in) {
  LogRecord rec;
  std::uint8_t tomb = 0;
  std::uint32_t n = 0;
  if (!get_le(in, rec.lsn.value) || !get_le(in, rec.table.value) || !get_le(in, rec.rid.value) ||
      !get_le(in, rec.commit_ts.value) || !get_le(in, rec.txn.value) || !get_le(in, tomb) ||
      !get_le(in, n)) {
    return std::nullopt;
  }
  rec.tombstone = tomb != 0;
  rec.payload.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint8_t tag = 0;
    std::uint32_t len = 0;
    if (!get_le(in, tag) || !get_le(in, len) || in.size() < len) return std::nullopt;
    switch (tag) {
      case 0:
        rec.payload.emplace_back(std::monostate{});
        break;
      case 1: {
        std::uint64_t raw = 0;
        if (len != 8 || !get_le(in, raw)) return std::nullopt;
        rec.payload.emplace_back(static_cast<std::int64_t>(raw));
        break;
      }
      case 2: {
        std::uint64_t raw = 0;
        if (len != 8 || !get_le(in, raw)) return std::nullopt;
        rec.payload.emplace_back(std::bit_cast<double>(raw));
        break;
      }
      case 3:
        rec.payload.emplace_back(std::string(in.substr(0, len)));
        in.remove_prefix(len);
        break;
      default:
        return std::nullopt;
    }
  }
  return rec;
}

RedoLog::RedoLog(const std::filesystem::path& mirror)
    : mirror_(std::make_unique<std::ofstream>(mirror, std::ios::binary | std::ios::trunc)) {
  if (!*mirror_) throw std::runtime_error("cannot open log mirror " + mirror.string());
}

Lsn RedoLog::append_commit(TxnId txn, Timestamp commit_ts, std::span<const LogEntry> entries) {
  std::lock_guard lk(append_mu_);
  const std::uint64_t first = tail_.load(std::memory_order_relaxed);
  std::uint64_t lsn = first;
  std::string mirror_buf;
  for (const auto& e : entries) {
    const auto seg_idx = lsn / kSegmentRecords;
    std::shared_ptr<Segment> seg;
    {
      std::unique_lock dl(dir_mu_);
      while (first_segment_ + segments_.size() <= seg_idx) {
        segments_.push_back(std::make_shared<Segment>());
      }
      seg = segments_[seg_idx - first_segment_];
    }
    seg->records.push_back(LogRecord{Lsn{lsn}, e.table, e.rid, e.payload ? *e.payload : RecordPayload{},
                                     e.tombstone, commit_ts, txn});
    if (mirror_) encode_record(seg->records.back(), mirror_buf);
    ++lsn;
    // Publish record by record so a concurrent scanner can follow the tail.
    tail_.store(lsn, std::memory_order_release);
  }
  if (mirror_ && !mirror_buf.empty()) mirror_->write(mirror_buf.data(), static_cast<std::streamsize>(mirror_buf.size()));
  return Lsn{first};
}

void RedoLog::release_before(Lsn lsn) {
  std::unique_lock dl(dir_mu_);
  const auto target = std::min(lsn.value, tail_.load(std::memory_order_acquire)) / kSegmentRecords;
  while (first_segment_ < target && !segments_.empty()) {
    segments_.erase(segments_.begin());
    ++first_segment_;
  }
}

Lsn RedoLog::first_retained() const {
  std::shared_lock dl(dir_mu_);
  return Lsn{first_segment_ * kSegmentRecords};
}

std::shared_ptr<RedoLog::Segment> RedoLog::segment(std::uint64_t index) const {
  std::shared_lock dl(dir_mu_);
  if (index < first_segment_) {
    throw std::out_of_range("log segment " + std::to_string(index) + " was released");
  }
  const auto rel = index - first_segment_;
  if (rel >= segments_.size()) return nullptr;
  return segments_[rel];
}

RedoLog::Scanner RedoLog::scan(Lsn from, std::optional<TableId> table, Timestamp upto) const {
  if (from.value > tail_.load(std::memory_order_acquire)) {
    throw std::out_of_range("scan start beyond log tail");
  }
  return Scanner(*this, from, table, upto);
}

const LogRecord* RedoLog::Scanner::next() {
  while (!finished_) {
    const auto tail = log_->tail_.load(std::memory_order_acquire);
    if (pos_ >= tail) return nullptr;
    const auto seg_idx = pos_ / kSegmentRecords;
    if (seg_idx != seg_index_) {
      auto seg = log_->segment(seg_idx);
      if (!seg) return nullptr;
      seg_base_ = seg->records.data();
      seg_keepalive_ = std::move(seg);
      seg_index_ = seg_idx;
    }
    const LogRecord* rec = seg_base_ + (pos_ % kSegmentRecords);
    if (upto_ < rec->commit_ts) {
      finished_ = true;
      return nullptr;
    }
    ++pos_;
    if (!table_ || rec->table == *table_) return rec;
  }
  return nullptr;
}

void RedoLog::dump(std::ostream& out) const {
  auto sc = scan(first_retained(), std::nullopt, kMaxTimestamp);
  std::string buf;
  while (const LogRecord* rec = sc.next()) {
    buf.clear();
    encode_record(*rec, buf);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

}  // namespace morph
