#pragma once

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "morph/bench/workload.hpp"

namespace morph::bench {

struct Outcome {
  bool committed = false;
  std::string reason;  // set when aborted
};

// One DML worker. step() runs a single attempt; a worker retries the same
// transaction after an abort so single-threaded runs stay deterministic.
class Worker {
 public:
  virtual ~Worker() = default;
  virtual Outcome step() = 0;
};

// Runs the workers, the reporter and the DDL launcher until the configured
// duration or transaction count is reached. The DDL is awaited before return.
ThroughputSeries drive(const WorkloadConfig& config, Database& db, DdlEngine& engine,
                       const std::optional<DdlSpec>& ddl, const DdlHooks& hooks,
                       std::vector<std::unique_ptr<Worker>> workers);

DatabaseOptions options_for(const WorkloadConfig& config, const std::optional<DdlSpec>& ddl, TraceRecorder* trace);

// Aborts `txn` and reports why.
Outcome fail(Transaction& txn, OpStatus status);
Outcome finish(Transaction& txn);

// Order-insensitive hash of every visible row of `table`.
std::uint64_t table_digest(Database& db, TableId table);

// Applies thread settings from the config to a DDL spec built for it.
void apply_threads(const WorkloadConfig& config, DdlSpec& spec);

}  // namespace morph::bench
