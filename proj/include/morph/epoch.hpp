#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <vector>

namespace morph {

// Minimal epoch-based reclamation. Threads touching version chains hold an
// EpochGuard; unlinked nodes are retired and freed once every thread that
// might still see them has left its critical section.
class EpochManager {
 public:
  static constexpr std::size_t kMaxThreads = 512;

  static EpochManager& instance();

  void retire(void* ptr, void (*deleter)(void*));

  template <class T>
  void retire(T* ptr) {
    retire(static_cast<void*>(ptr), [](void* p) { delete static_cast<T*>(p); });
  }

  // Advances the epoch if possible and frees what is safe to free.
  void collect();

  // Frees everything. Only valid when no thread is inside a guard.
  void quiesce_and_sweep();

  std::size_t pending() const;

  // Called at thread exit.
  void release_slot(std::size_t idx);
  std::uint64_t epoch() const { return global_.load(std::memory_order_acquire); }

 private:
  friend class EpochGuard;

  struct alignas(64) Slot {
    std::atomic<std::uint64_t> epoch{kIdle};
    std::atomic<bool> taken{false};
  };
  struct Retired {
    void* ptr;
    void (*deleter)(void*);
    std::uint64_t epoch;
  };

  static constexpr std::uint64_t kIdle = ~std::uint64_t{0};

  EpochManager() = default;
  std::size_t acquire_slot();
  bool try_advance();

  Slot slots_[kMaxThreads];
  std::atomic<std::uint64_t> global_{1};
  mutable std::mutex limbo_mu_;
  std::vector<Retired> limbo_;
  std::size_t since_collect_ = 0;
};

// RAII critical section; nests freely on one thread.
class EpochGuard {
 public:
  EpochGuard();
  ~EpochGuard();
  EpochGuard(const EpochGuard&) = delete;
  EpochGuard& operator=(const EpochGuard&) = delete;
};

}  // namespace morph
