#include <charconv>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "morph/bench/workload.hpp"

namespace morph::bench {

std::string to_string(Benchmark b) { return b == Benchmark::Micro ? "micro" : "tpccd"; }

Benchmark parse_benchmark(const std::string& text) {
  if (text == "micro") return Benchmark::Micro;
  if (text == "tpccd") return Benchmark::Tpccd;
  throw std::invalid_argument("unknown benchmark '" + text + "'");
}

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || end != value.data() + value.size()) {
    throw std::invalid_argument("bad value for " + key + ": '" + value + "'");
  }
  return out;
}

double parse_seconds(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || out < 0) throw std::invalid_argument("bad value for " + key + ": '" + value + "'");
  return out;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

// Loaded and updated c2 values stay below 100, so any default passes.
std::int64_t WorkloadConfig::effective_threshold() const {
  if (threshold != 0) return threshold;
  return 100 + static_cast<std::int64_t>(splitmix(seed) % 900);
}

void apply_setting(WorkloadConfig& c, const std::string& key, const std::string& value) {
  if (key == "benchmark") {
    c.benchmark = parse_benchmark(value);
  } else if (key == "rows") {
    c.rows = parse_number<std::uint64_t>(key, value);
  } else if (key == "warehouses") {
    c.warehouses = parse_number<unsigned>(key, value);
  } else if (key == "items") {
    c.items = parse_number<unsigned>(key, value);
  } else if (key == "customers") {
    c.customers_per_district = parse_number<unsigned>(key, value);
  } else if (key == "dml_threads") {
    c.dml_threads = parse_number<unsigned>(key, value);
  } else if (key == "ddl_threads") {
    c.ddl_threads = parse_number<unsigned>(key, value);
  } else if (key == "scan_threads") {
    c.scan_threads = parse_number<unsigned>(key, value);
  } else if (key == "cdc_threads") {
    c.cdc_threads = parse_number<unsigned>(key, value);
  } else if (key == "ddl_op" || key == "op") {
    c.ddl_op = value == "none" ? "" : value;
  } else if (key == "policy") {
    c.policy = parse_policy(value);
  } else if (key == "start" || key == "ddl_start_sec") {
    c.ddl_start_sec = parse_seconds(key, value);
  } else if (key == "duration" || key == "duration_sec") {
    c.duration_sec = parse_seconds(key, value);
  } else if (key == "warmup" || key == "warmup_sec") {
    c.warmup_sec = parse_seconds(key, value);
  } else if (key == "read_ops") {
    c.read_ops = parse_number<unsigned>(key, value);
  } else if (key == "write_ops") {
    c.write_ops = parse_number<unsigned>(key, value);
  } else if (key == "interval_ms") {
    c.interval_ms = parse_number<unsigned>(key, value);
    if (c.interval_ms == 0) throw std::invalid_argument("interval_ms must be positive");
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "threshold") {
    c.threshold = parse_number<std::int64_t>(key, value);
  } else if (key == "txns") {
    c.txns_per_worker = parse_number<std::uint64_t>(key, value);
  } else if (key == "ddl_after_txns") {
    c.ddl_after_txns = parse_number<std::uint64_t>(key, value);
  } else {
    throw std::invalid_argument("unknown setting '" + key + "'");
  }
}

WorkloadConfig parse_config(std::istream& in) {
  WorkloadConfig c;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::string first;
    if (!(words >> first) || first[0] == '#') continue;
    if (first == "ddl") {
      c.ddl_spec = parse_ddl(line);
      continue;
    }
    for (std::string tok = first; !tok.empty(); tok.clear(), words >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos || eq == 0) throw std::invalid_argument("expected key=value, got '" + tok + "'");
      apply_setting(c, tok.substr(0, eq), tok.substr(eq + 1));
    }
  }
  return c;
}

WorkloadConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::vector<std::string> config_warnings(const WorkloadConfig& c, unsigned cores) {
  std::vector<std::string> out;
  const unsigned ddl = c.ddl_op.empty() && !c.ddl_spec ? 0 : c.ddl_threads;
  if (cores > 0 && c.dml_threads + ddl > cores) {
    out.push_back(std::to_string(c.dml_threads) + " DML + " + std::to_string(ddl) + " DDL threads exceed " +
                  std::to_string(cores) + " cores");
  }
  if (c.txns_per_worker == 0 && c.ddl_start_sec >= c.duration_sec && ddl > 0) {
    out.push_back("DDL starts after the run ends");
  }
  return out;
}

}  // namespace morph::bench
