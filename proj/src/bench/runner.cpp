#include "runner.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <thread>

namespace morph::bench {

namespace {

using Clock = std::chrono::steady_clock;

struct alignas(64) Counters {
  std::atomic<std::uint64_t> commits{0};
  std::atomic<std::uint64_t> aborts{0};
  std::map<std::string, std::uint64_t> reasons;  // owner thread only
};

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

DatabaseOptions options_for(const WorkloadConfig& config, const std::optional<DdlSpec>& ddl, TraceRecorder* trace) {
  DatabaseOptions o;
  o.table_locking = ddl ? ddl->policy == Policy::Blocking : config.policy == Policy::Blocking;
  o.trace = trace;
  return o;
}

Outcome fail(Transaction& txn, OpStatus status) {
  if (txn.status() == TxnStatus::Active) txn.abort();
  return {false, to_string(status)};
}

// A queued commit counts as progress; waiting here would stall the worker
// for the whole migration.
Outcome finish(Transaction& txn) {
  const auto s = txn.commit();
  if (s == TxnStatus::Aborted) return {false, to_string(txn.abort_reason())};
  return {true, {}};
}

std::uint64_t table_digest(Database& db, TableId table) {
  auto txn = db.begin();
  auto n = txn.rid_count(table);
  if (!n.ok()) return 0;
  std::uint64_t digest = 0;
  for (std::uint64_t r = 0; r < n.value; ++r) {
    auto row = txn.read(table, Rid{r});
    if (!row.ok()) continue;
    std::uint64_t h = std::hash<std::uint64_t>{}(r) * 0x9e3779b97f4a7c15ull;
    for (const auto& v : row.value) h = (h ^ std::hash<std::string>{}(morph::to_string(v))) * 0x100000001b3ull;
    digest += h;
  }
  txn.commit();
  return digest;
}

void apply_threads(const WorkloadConfig& config, DdlSpec& spec) {
  spec.threads = config.ddl_threads;
  spec.scan_threads = config.scan_threads;
  spec.cdc_threads = config.cdc_threads;
}

ThroughputSeries drive(const WorkloadConfig& config, Database&, DdlEngine& engine,
                       const std::optional<DdlSpec>& ddl, const DdlHooks& hooks,
                       std::vector<std::unique_ptr<Worker>> workers) {
  ThroughputSeries series;
  series.interval_ms = config.interval_ms;
  const std::size_t n = workers.size();
  std::vector<Counters> counters(n);
  std::atomic<bool> stop{false};
  std::atomic<bool> measuring{config.warmup_sec <= 0};
  std::atomic<std::uint64_t> committed_total{0};
  std::atomic<std::size_t> finished{0};
  const bool timed = config.txns_per_worker == 0;
  const auto warmup = timed ? std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(config.warmup_sec))
                            : Clock::duration::zero();
  const auto start = Clock::now() + warmup;

  std::vector<std::thread> threads;
  threads.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    threads.emplace_back([&, i] {
      auto& c = counters[i];
      std::uint64_t done = 0;
      while (!stop.load(std::memory_order_relaxed) && (timed || done < config.txns_per_worker)) {
        const Outcome o = workers[i]->step();
        if (o.committed) {
          c.commits.fetch_add(1, std::memory_order_relaxed);
          committed_total.fetch_add(1, std::memory_order_relaxed);
          ++done;
        } else {
          c.aborts.fetch_add(1, std::memory_order_relaxed);
          if (measuring.load(std::memory_order_relaxed)) ++c.reasons[o.reason];
          // The conflicting writer may be descheduled; let it finish.
          std::this_thread::yield();
        }
      }
      finished.fetch_add(1, std::memory_order_release);
    });
  }

  std::thread ddl_thread;
  std::optional<DdlMarkers> markers;
  if (ddl) {
    ddl_thread = std::thread([&] {
      if (timed) {
        const auto at = start + std::chrono::duration_cast<Clock::duration>(
                                    std::chrono::duration<double>(config.ddl_start_sec));
        while (Clock::now() < at && !stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
      } else {
        while (committed_total.load() < config.ddl_after_txns && finished.load() < n) {
          std::this_thread::sleep_for(std::chrono::microseconds(200));
        }
      }
      if (stop.load() && timed) return;
      DdlMarkers m;
      m.start_ms = ms_since(start);
      DdlHooks wrapped;
      wrapped.on_phase = [&](DdlPhase p) {
        if ((p == DdlPhase::Cdc || p == DdlPhase::Finalizing) && !m.pre_ms) m.pre_ms = ms_since(start);
        if (hooks.on_phase) hooks.on_phase(p);
      };
      m.result = engine.execute(*ddl, wrapped);
      m.commit_ms = ms_since(start);
      markers = std::move(m);
    });
  }

  // Reporter: one sample per interval boundary.
  const auto interval = std::chrono::milliseconds(config.interval_ms);
  const std::uint64_t planned =
      timed ? static_cast<std::uint64_t>(config.duration_sec * 1000.0 / config.interval_ms + 0.5) : 0;
  std::uint64_t prev_commits = 0, prev_aborts = 0;
  std::vector<std::uint64_t> base_commits(n, 0), base_aborts(n, 0);
  std::this_thread::sleep_until(start);
  for (std::size_t i = 0; i < n && warmup > Clock::duration::zero(); ++i) {
    base_commits[i] = counters[i].commits.load(std::memory_order_relaxed);
    base_aborts[i] = counters[i].aborts.load(std::memory_order_relaxed);
    prev_commits += base_commits[i];
    prev_aborts += base_aborts[i];
  }
  measuring.store(true);
  auto sample = [&](std::uint64_t k) {
    std::uint64_t commits = 0, aborts = 0;
    for (const auto& c : counters) {
      commits += c.commits.load(std::memory_order_relaxed);
      aborts += c.aborts.load(std::memory_order_relaxed);
    }
    series.intervals.push_back({k * config.interval_ms, commits - prev_commits, aborts - prev_aborts, {}});
    prev_commits = commits;
    prev_aborts = aborts;
  };
  for (std::uint64_t k = 0;; ++k) {
    if (timed && k >= planned) break;
    std::this_thread::sleep_until(start + interval * (k + 1));
    const bool all_done = finished.load(std::memory_order_acquire) == n;
    sample(k);
    if (!timed && all_done) break;
  }
  stop.store(true);
  for (auto& t : threads) t.join();
  if (ddl_thread.joinable()) ddl_thread.join();

  std::uint64_t raw_commits = 0, raw_aborts = 0;
  for (std::size_t i = 0; i < n; ++i) {
    raw_commits += counters[i].commits.load();
    raw_aborts += counters[i].aborts.load();
    const auto c = counters[i].commits.load() - base_commits[i];
    const auto a = counters[i].aborts.load() - base_aborts[i];
    series.worker_commits.push_back(c);
    series.worker_aborts.push_back(a);
    series.worker_attempts.push_back(c + a);
    series.commits += c;
    series.aborts += a;
    for (const auto& [reason, count] : counters[i].reasons) series.abort_reasons[reason] += count;
  }
  // Work finished between the last sample and the stop signal.
  if (!series.intervals.empty()) {
    series.intervals.back().commits += raw_commits - prev_commits;
    series.intervals.back().aborts += raw_aborts - prev_aborts;
  } else if (series.commits + series.aborts > 0) {
    series.intervals.push_back({0, series.commits, series.aborts, {}});
  }
  series.ddl = std::move(markers);
  label_phases(series);
  return series;
}

ThroughputSeries run(const WorkloadConfig& config, const RunHooks& hooks) {
  return config.benchmark == Benchmark::Micro ? run_micro(config, hooks) : run_tpccd(config, hooks);
}

}  // namespace morph::bench
