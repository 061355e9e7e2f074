#pragma once

#include <atomic>
#include <cstdint>
#include <utility>

#include "morph/types.hpp"

namespace morph {

// Either Committed(ts) or Uncommitted(owner). Packed into one word so the
// whole stamp can be replaced atomically at commit.
class Stamp {
 public:
  static constexpr Stamp committed(Timestamp ts) { return Stamp(ts.value); }
  static constexpr Stamp uncommitted(TxnId owner) { return Stamp(owner.value | kUncommittedBit); }
  static constexpr Stamp from_bits(std::uint64_t bits) { return Stamp(bits); }

  constexpr bool is_committed() const { return (bits_ & kUncommittedBit) == 0; }
  constexpr Timestamp ts() const { return Timestamp{bits_}; }
  constexpr TxnId owner() const { return TxnId{bits_ & ~kUncommittedBit}; }
  constexpr std::uint64_t bits() const { return bits_; }

  constexpr bool operator==(const Stamp&) const = default;

 private:
  static constexpr std::uint64_t kUncommittedBit = std::uint64_t{1} << 63;
  constexpr explicit Stamp(std::uint64_t bits) : bits_(bits) {}
  std::uint64_t bits_;
};

// One immutable record version. Only the stamp (at commit) and the next link
// (when the tail is pruned) change after the node is published.
template <class P>
struct Version {
  Version(Stamp s, P p, bool tomb = false)
      : stamp_bits(s.bits()), payload(std::move(p)), tombstone(tomb) {}

  Stamp stamp() const { return Stamp::from_bits(stamp_bits.load(std::memory_order_acquire)); }
  void set_stamp(Stamp s) { stamp_bits.store(s.bits(), std::memory_order_release); }
  Version* older() const { return next.load(std::memory_order_acquire); }

  std::atomic<std::uint64_t> stamp_bits;
  std::atomic<Version*> next{nullptr};
  P payload;
  bool tombstone;
};

}  // namespace morph
