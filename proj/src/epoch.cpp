#include "morph/epoch.hpp"

#include <algorithm>
#include <stdexcept>

namespace morph {

namespace {

struct ThreadState {
  std::size_t slot = EpochManager::kMaxThreads;
  std::uint32_t depth = 0;
  ~ThreadState();
};

thread_local ThreadState tls_state;

}  // namespace

EpochManager& EpochManager::instance() {
  static EpochManager* mgr = new EpochManager();  // never destroyed; threads may outlive statics
  return *mgr;
}

std::size_t EpochManager::acquire_slot() {
  for (std::size_t i = 0; i < kMaxThreads; ++i) {
    bool expected = false;
    if (!slots_[i].taken.load(std::memory_order_relaxed) &&
        slots_[i].taken.compare_exchange_strong(expected, true)) {
      return i;
    }
  }
  throw std::runtime_error("epoch manager: too many threads");
}

void EpochManager::release_slot(std::size_t idx) {
  slots_[idx].epoch.store(kIdle, std::memory_order_release);
  slots_[idx].taken.store(false, std::memory_order_release);
}

ThreadState::~ThreadState() {
  if (slot < EpochManager::kMaxThreads) {
    EpochManager::instance().release_slot(slot);
  }
}

EpochGuard::EpochGuard() {
  auto& st = tls_state;
  if (st.depth++ > 0) return;
  auto& mgr = EpochManager::instance();
  if (st.slot == EpochManager::kMaxThreads) st.slot = mgr.acquire_slot();
  auto& slot = mgr.slots_[st.slot];
  auto g = mgr.global_.load(std::memory_order_seq_cst);
  for (;;) {
    slot.epoch.store(g, std::memory_order_seq_cst);
    const auto now = mgr.global_.load(std::memory_order_seq_cst);
    if (now == g) break;
    g = now;
  }
}

EpochGuard::~EpochGuard() {
  auto& st = tls_state;
  if (--st.depth > 0) return;
  EpochManager::instance().slots_[st.slot].epoch.store(EpochManager::kIdle,
                                                       std::memory_order_release);
}

bool EpochManager::try_advance() {
  const auto g = global_.load(std::memory_order_seq_cst);
  for (auto& s : slots_) {
    const auto e = s.epoch.load(std::memory_order_seq_cst);
    if (e != kIdle && e != g) return false;
  }
  auto expected = g;
  global_.compare_exchange_strong(expected, g + 1);
  return true;
}

void EpochManager::retire(void* ptr, void (*deleter)(void*)) {
  bool run_collect = false;
  {
    std::lock_guard lk(limbo_mu_);
    limbo_.push_back({ptr, deleter, global_.load(std::memory_order_acquire)});
    run_collect = ++since_collect_ >= 4096;
  }
  if (run_collect) collect();
}

void EpochManager::collect() {
  try_advance();
  std::vector<Retired> ready;
  {
    std::lock_guard lk(limbo_mu_);
    since_collect_ = 0;
    const auto g = global_.load(std::memory_order_acquire);
    // An object retired in epoch e is unreachable for every guard entered at e+1 or later.
    auto it = std::partition(limbo_.begin(), limbo_.end(),
                             [g](const Retired& r) { return r.epoch + 2 > g; });
    ready.assign(it, limbo_.end());
    limbo_.erase(it, limbo_.end());
  }
  for (auto& r : ready) r.deleter(r.ptr);
}

void EpochManager::quiesce_and_sweep() {
  std::vector<Retired> all;
  {
    std::lock_guard lk(limbo_mu_);
    all.swap(limbo_);
    since_collect_ = 0;
  }
  for (auto& r : all) r.deleter(r.ptr);
}

std::size_t EpochManager::pending() const {
  std::lock_guard lk(limbo_mu_);
  return limbo_.size();
}

}  // namespace morph
