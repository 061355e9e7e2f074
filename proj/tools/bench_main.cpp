#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include <CLI11.hpp>

#include "morph/bench/workload.hpp"

using namespace morph;
using namespace morph::bench;

namespace {

void report(const ThroughputSeries& s, std::ostream& out) {
  out << "commits " << s.commits << ", aborts " << s.aborts << "\n";
  for (const auto& [reason, n] : s.abort_reasons) out << "  abort " << reason << ": " << n << "\n";
  if (s.ddl) {
    const auto& r = s.ddl->result;
    out << "ddl " << (r.committed() ? "committed" : "aborted (" + r.reason + ")") << " after "
        << s.ddl_duration_ms() << " ms";
    if (!r.detail.empty()) out << ": " << r.detail;
    out << "\n  scanned " << r.stats.scan_visits << " of bound " << r.stats.scan_bound << ", cdc applied "
        << r.stats.cdc_applied << ", write set " << r.stats.write_set_size << "\n";
  }
  out << "pre-ddl mean " << s.pre_ddl_mean() << " commits/interval";
  if (auto m = s.min_in_ddl()) out << ", min in-ddl " << *m;
  if (auto rec = s.recovery_ms(0.9)) out << ", back to 90% after " << *rec << " ms";
  out << "\n";
  for (const auto& [name, msg] : s.checks) out << "check " << name << ": " << (msg.empty() ? "ok" : msg) << "\n";
}

struct Flag {
  const char* name;
  const char* key;  // setting key in the config grammar
  const char* help;
};

const Flag kCommon[] = {
    {"--dml-threads", "dml_threads", ""},
    {"--ddl-threads", "ddl_threads", "split between scan and change replay"},
    {"--scan-threads", "scan_threads", ""},
    {"--cdc-threads", "cdc_threads", ""},
    {"--ddl", "ddl_op", "schema change fired mid-run; none for a baseline"},
    {"--policy", "policy", "blocking, lazy, basic or relaxed"},
    {"--start", "start", "seconds before the schema change starts"},
    {"--duration", "duration", "run length in seconds"},
    {"--warmup", "warmup", "unmeasured seconds before the first interval"},
    {"--interval-ms", "interval_ms", "reporting granularity"},
    {"--seed", "seed", ""},
    {"--txns", "txns", "fixed transactions per worker instead of a timed run"},
};
const Flag kMicro[] = {
    {"--rows", "rows", ""},
    {"--read-ops", "read_ops", ""},
    {"--write-ops", "write_ops", ""},
    {"--threshold", "threshold", "bound of the c2 constraint"},
};
const Flag kTpccd[] = {
    {"--warehouses", "warehouses", ""},
    {"--items", "items", ""},
    {"--customers", "customers", "customers and initial orders per district"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Throughput under online schema change"};
  app.require_subcommand(1, 1);
  std::string config_path, out_path;
  std::map<std::string, std::string> flags;

  auto add = [&](CLI::App* sub, const auto& list) {
    for (const auto& f : list) sub->add_option(f.name, flags[f.key], f.help);
  };
  auto setup = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value settings; flags override them");
    sub->add_option("--out", out_path, "CSV path; stdout when omitted");
    add(sub, kCommon);
  };
  auto* micro = app.add_subcommand("micro", "one three-column table, 2 reads and 8 updates per transaction");
  setup(micro);
  add(micro, kMicro);
  auto* tpccd = app.add_subcommand("tpccd", "simplified TPC-C mix");
  setup(tpccd);
  add(tpccd, kTpccd);
  CLI11_PARSE(app, argc, argv);

  try {
    WorkloadConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot open " + config_path);
      cfg = parse_config(in);
    }
    cfg.benchmark = micro->parsed() ? Benchmark::Micro : Benchmark::Tpccd;
    for (const auto& [key, value] : flags) {
      if (!value.empty()) apply_setting(cfg, key, value);
    }
    for (const auto& w : config_warnings(cfg, std::thread::hardware_concurrency())) {
      std::cerr << "warning: " << w << "\n";
    }
    const auto series = run(cfg);
    if (out_path.empty()) {
      emit(series, std::cout);
    } else {
      emit(series, std::filesystem::path(out_path));
    }
    report(series, std::cerr);
    return series.checks_passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
