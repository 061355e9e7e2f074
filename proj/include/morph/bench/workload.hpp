#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "morph/ddl.hpp"

namespace morph::bench {

enum class Benchmark : std::uint8_t { Micro, Tpccd };

std::string to_string(Benchmark b);
Benchmark parse_benchmark(const std::string& text);

struct WorkloadConfig {
  Benchmark benchmark = Benchmark::Micro;
  std::uint64_t rows = 1'000'000;  // micro table size
  unsigned warehouses = 2;
  unsigned items = 10'000;               // tpccd item count
  unsigned customers_per_district = 300;  // tpccd, also initial orders per district
  unsigned dml_threads = 4;
  unsigned ddl_threads = 2;
  unsigned scan_threads = 0;  // 0: default split of ddl_threads
  unsigned cdc_threads = 0;
  std::string ddl_op;  // empty: no DDL
  std::optional<DdlSpec> ddl_spec;  // explicit `ddl ...` line, overrides ddl_op
  Policy policy = Policy::RelaxedDdam;
  double ddl_start_sec = 3;
  double duration_sec = 10;
  // Unmeasured run time before the first interval; the DDL start counts
  // from the end of it.
  double warmup_sec = 0;
  unsigned read_ops = 2;
  unsigned write_ops = 8;
  unsigned interval_ms = 100;
  std::uint64_t seed = 42;
  // Micro AddConstraint bound on c2; 0 picks a value from the seed.
  std::int64_t threshold = 0;
  // Fixed transactions per worker instead of a timed run (0: timed).
  std::uint64_t txns_per_worker = 0;
  // With txns_per_worker: launch the DDL once this many txns committed.
  std::uint64_t ddl_after_txns = 0;

  // Threshold actually used by the micro constraint.
  std::int64_t effective_threshold() const;
};

// Applies one `key=value` setting. Throws std::invalid_argument on unknown
// keys or malformed values.
void apply_setting(WorkloadConfig& config, const std::string& key, const std::string& value);

// Whitespace separated `key=value` tokens over any number of lines. Lines
// starting with `#` are comments; a line starting with `ddl` is a DdlSpec.
WorkloadConfig parse_config(std::istream& in);
WorkloadConfig parse_config_text(const std::string& text);

// Non-fatal problems, such as more threads than cores.
std::vector<std::string> config_warnings(const WorkloadConfig& config, unsigned cores);

struct IntervalSample {
  std::uint64_t start_ms = 0;
  std::uint64_t commits = 0;
  std::uint64_t aborts = 0;
  std::string phase;  // none, pre, edge, ddl, post
};

struct DdlMarkers {
  double start_ms = 0;
  std::optional<double> pre_ms;  // t_pre reached (relaxed) or data swap (others)
  std::optional<double> commit_ms;
  DdlResult result;
};

struct ThroughputSeries {
  std::uint64_t interval_ms = 100;
  std::vector<IntervalSample> intervals;
  std::uint64_t commits = 0;
  std::uint64_t aborts = 0;
  std::vector<std::uint64_t> worker_commits;
  std::vector<std::uint64_t> worker_aborts;
  std::vector<std::uint64_t> worker_attempts;
  std::map<std::string, std::uint64_t> abort_reasons;
  std::optional<DdlMarkers> ddl;
  // Post-run consistency checks: name -> empty on success, else a message.
  std::map<std::string, std::string> checks;
  // Hash of final table contents, used for determinism checks.
  std::uint64_t state_digest = 0;

  // Mean commits of the intervals ending before the DDL started; of all
  // intervals without a DDL.
  double pre_ddl_mean() const;
  // Smallest commit count among intervals lying wholly inside the DDL.
  std::optional<std::uint64_t> min_in_ddl() const;
  double ddl_duration_ms() const;
  // Milliseconds from DDL commit to the end of the first later interval
  // reaching `fraction` of the pre-DDL mean.
  std::optional<double> recovery_ms(double fraction) const;
  double mean_where(const std::string& phase) const;
  bool checks_passed() const;
};

// Assigns each interval's phase from the DDL markers.
void label_phases(ThroughputSeries& series);

// CSV: header `interval_start_ms,commits,aborts,phase`, one row per
// interval, then one summary row.
void emit(const ThroughputSeries& series, std::ostream& out);
void emit(const ThroughputSeries& series, const std::filesystem::path& path);

struct RunHooks {
  TraceRecorder* trace = nullptr;
  DdlHooks ddl;
  // Called after workers and the DDL have stopped, before the database is
  // destroyed.
  std::function<void(Database&, DdlEngine&)> after_run;
};

// Micro workload on one three-column Int64 table.
ThroughputSeries run_micro(const WorkloadConfig& config, const RunHooks& hooks = {});
// Simplified TPC-C with a schema change fired mid-run.
ThroughputSeries run_tpccd(const WorkloadConfig& config, const RunHooks& hooks = {});
ThroughputSeries run(const WorkloadConfig& config, const RunHooks& hooks = {});

// DDL the micro workload issues for `ddl_op` (add_column, add_constraint,
// both).
DdlSpec micro_ddl(const WorkloadConfig& config);
// DDL the TPC-CD workload issues for `ddl_op`.
DdlSpec tpccd_ddl(const WorkloadConfig& config);

}  // namespace morph::bench
