#pragma once

#include <atomic>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "morph/types.hpp"

namespace morph {

// Order-preserving byte encoding of a tuple of values.
std::string encode_key(std::span<const Value> values);

// Encoded key of `columns` taken from `payload`.
std::string encode_key(const RecordPayload& payload, std::span<const std::size_t> columns);

// Ordered key -> RID map. Entries are not versioned; readers confirm the
// record through its version chain.
class KeyIndex {
 public:
  explicit KeyIndex(bool published = true) : published_(published) {}

  bool insert(const std::string& key, Rid rid);
  std::optional<Rid> lookup(const std::string& key) const;
  bool erase(const std::string& key);

  // All entries with lo <= key < hi.
  std::vector<std::pair<std::string, Rid>> range(const std::string& lo, const std::string& hi) const;
  std::vector<std::pair<std::string, Rid>> prefix(const std::string& prefix) const;

  std::size_t size() const;

  // Set once the index may serve queries (after its build finished).
  bool published() const { return published_.load(std::memory_order_acquire); }
  void publish() { published_.store(true, std::memory_order_release); }

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, Rid, std::less<>> map_;
  std::atomic<bool> published_;
};

}  // namespace morph
