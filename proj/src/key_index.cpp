#include "morph/key_index.hpp"

#include <bit>
#include <cstring>
#include <mutex>

namespace morph {

namespace {

void put_u64_be(std::string& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

void append_value(std::string& out, const Value& v) {
  switch (v.index()) {
    case 0:
      out.push_back('\x00');
      break;
    case 1:
      out.push_back('\x01');
      put_u64_be(out, static_cast<std::uint64_t>(std::get<std::int64_t>(v)) ^ (std::uint64_t{1} << 63));
      break;
    case 2: {
      out.push_back('\x02');
      auto bits = std::bit_cast<std::uint64_t>(std::get<double>(v));
      bits = (bits & (std::uint64_t{1} << 63)) ? ~bits : bits | (std::uint64_t{1} << 63);
      put_u64_be(out, bits);
      break;
    }
    default: {
      out.push_back('\x03');
      // 0x00 is escaped as 0x00 0xff; the terminator 0x00 0x00 sorts first.
      for (char c : std::get<std::string>(v)) {
        out.push_back(c);
        if (c == '\x00') out.push_back('\xff');
      }
      out.push_back('\x00');
      out.push_back('\x00');
    }
  }
}

}  // namespace

std::string encode_key(std::span<const Value> values) {
  std::string out;
  out.reserve(values.size() * 9);
  for (const auto& v : values) append_value(out, v);
  return out;
}

std::string encode_key(const RecordPayload& payload, std::span<const std::size_t> columns) {
  std::string out;
  out.reserve(columns.size() * 9);
  for (auto c : columns) append_value(out, payload.at(c));
  return out;
}

bool KeyIndex::insert(const std::string& key, Rid rid) {
  std::unique_lock lk(mu_);
  return map_.emplace(key, rid).second;
}

std::optional<Rid> KeyIndex::lookup(const std::string& key) const {
  std::shared_lock lk(mu_);
  auto it = map_.find(key);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

bool KeyIndex::erase(const std::string& key) {
  std::unique_lock lk(mu_);
  return map_.erase(key) > 0;
}

std::vector<std::pair<std::string, Rid>> KeyIndex::range(const std::string& lo,
                                                         const std::string& hi) const {
  std::shared_lock lk(mu_);
  std::vector<std::pair<std::string, Rid>> out;
  for (auto it = map_.lower_bound(lo); it != map_.end() && it->first < hi; ++it) out.emplace_back(*it);
  return out;
}

std::vector<std::pair<std::string, Rid>> KeyIndex::prefix(const std::string& prefix) const {
  std::shared_lock lk(mu_);
  std::vector<std::pair<std::string, Rid>> out;
  for (auto it = map_.lower_bound(prefix);
       it != map_.end() && it->first.compare(0, prefix.size(), prefix) == 0; ++it) {
    out.emplace_back(*it);
  }
  return out;
}

std::size_t KeyIndex::size() const {
  std::shared_lock lk(mu_);
  return map_.size();
}

}  // namespace morph
