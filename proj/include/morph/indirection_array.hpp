#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

#include "morph/version.hpp"

namespace morph {

// Dense RID allocator. Shared between the arrays that hold different schema
// generations of the same table so RIDs line up across a migration.
class RidSpace {
 public:
  explicit RidSpace(std::uint64_t capacity) : capacity_(capacity) {}

  Rid allocate() {
    auto v = next_.fetch_add(1, std::memory_order_acq_rel);
    if (v >= capacity_) {
      next_.fetch_sub(1, std::memory_order_acq_rel);
      throw ResourceError("rid space exhausted (capacity " + std::to_string(capacity_) + ")");
    }
    return Rid{v};
  }
  std::uint64_t size() const { return next_.load(std::memory_order_acquire); }
  std::uint64_t capacity() const { return capacity_; }

 private:
  std::atomic<std::uint64_t> next_{0};
  std::uint64_t capacity_;
};

// RID-indexed array of chain heads. Grows in fixed segments so entry
// addresses stay valid while other threads allocate.
template <class P>
class IndirectionArray {
 public:
  using VersionT = Version<P>;
  using Entry = std::atomic<VersionT*>;

  static constexpr std::uint64_t kSegmentBits = 14;
  static constexpr std::uint64_t kSegmentSize = std::uint64_t{1} << kSegmentBits;
  static constexpr std::uint64_t kMaxSegments = 1 << 14;
  static constexpr std::uint64_t kMaxCapacity = kSegmentSize * kMaxSegments;

  explicit IndirectionArray(std::uint64_t capacity = kMaxCapacity)
      : IndirectionArray(std::make_shared<RidSpace>(std::min(capacity, kMaxCapacity))) {}

  explicit IndirectionArray(std::shared_ptr<RidSpace> rids)
      : rids_(std::move(rids)), generation_(next_generation()) {
    for (auto& s : segments_) s.store(nullptr, std::memory_order_relaxed);
  }

  IndirectionArray(const IndirectionArray&) = delete;
  IndirectionArray& operator=(const IndirectionArray&) = delete;

  ~IndirectionArray() {
    for (auto& s : segments_) {
      Segment* seg = s.load(std::memory_order_acquire);
      if (!seg) continue;
      for (auto& e : seg->entries) {
        VersionT* v = e.load(std::memory_order_relaxed);
        while (v) {
          VersionT* next = v->older();
          delete v;
          v = next;
        }
      }
      delete seg;
    }
  }

  Rid allocate() {
    Rid r = rids_->allocate();
    (void)slot(r);
    return r;
  }

  // Number of RIDs handed out so far (logical size).
  std::uint64_t size() const { return rids_->size(); }
  const std::shared_ptr<RidSpace>& rid_space() const { return rids_; }

  // Process-unique id of this array.
  std::uint64_t generation() const { return generation_; }

  // Entry for `rid`, creating its segment on first touch.
  Entry& slot(Rid rid) {
    const auto seg_idx = rid.value >> kSegmentBits;
    if (seg_idx >= kMaxSegments) throw ResourceError("rid beyond indirection array capacity");
    Segment* seg = segments_[seg_idx].load(std::memory_order_acquire);
    if (!seg) {
      auto* fresh = new Segment();
      if (segments_[seg_idx].compare_exchange_strong(seg, fresh, std::memory_order_acq_rel)) {
        seg = fresh;
      } else {
        delete fresh;
      }
    }
    return seg->entries[rid.value & (kSegmentSize - 1)];
  }

  VersionT* head(Rid rid) const {
    const auto seg_idx = rid.value >> kSegmentBits;
    if (seg_idx >= kMaxSegments) return nullptr;
    Segment* seg = segments_[seg_idx].load(std::memory_order_acquire);
    if (!seg) return nullptr;
    return seg->entries[rid.value & (kSegmentSize - 1)].load(std::memory_order_acquire);
  }

 private:
  struct Segment {
    Segment() {
      for (auto& e : entries) e.store(nullptr, std::memory_order_relaxed);
    }
    std::array<Entry, kSegmentSize> entries;
  };

  static std::uint64_t next_generation() {
    static std::atomic<std::uint64_t> counter{0};
    return counter.fetch_add(1, std::memory_order_relaxed) + 1;
  }

  std::shared_ptr<RidSpace> rids_;
  std::uint64_t generation_;
  std::array<std::atomic<Segment*>, kMaxSegments> segments_;
};

}  // namespace morph
