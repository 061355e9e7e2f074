#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "morph/bench/workload.hpp"

namespace morph::bench {

void label_phases(ThroughputSeries& s) {
  const double inf = std::numeric_limits<double>::infinity();
  for (auto& iv : s.intervals) {
    if (!s.ddl) {
      iv.phase = "none";
      continue;
    }
    const double begin = static_cast<double>(iv.start_ms);
    const double end = begin + static_cast<double>(s.interval_ms);
    const double ddl_begin = s.ddl->start_ms;
    const double ddl_end = s.ddl->commit_ms.value_or(inf);
    if (end <= ddl_begin) {
      iv.phase = "pre";
    } else if (begin >= ddl_end) {
      iv.phase = "post";
    } else if (begin >= ddl_begin && end <= ddl_end) {
      iv.phase = "ddl";
    } else {
      iv.phase = "edge";
    }
  }
}

double ThroughputSeries::mean_where(const std::string& phase) const {
  std::uint64_t sum = 0, n = 0;
  for (const auto& iv : intervals) {
    if (iv.phase != phase) continue;
    sum += iv.commits;
    ++n;
  }
  return n ? static_cast<double>(sum) / static_cast<double>(n) : 0.0;
}

double ThroughputSeries::pre_ddl_mean() const { return mean_where(ddl ? "pre" : "none"); }

std::optional<std::uint64_t> ThroughputSeries::min_in_ddl() const {
  std::optional<std::uint64_t> out;
  for (const auto& iv : intervals) {
    if (iv.phase == "ddl" && (!out || iv.commits < *out)) out = iv.commits;
  }
  return out;
}

double ThroughputSeries::ddl_duration_ms() const {
  if (!ddl || !ddl->commit_ms) return 0;
  return *ddl->commit_ms - ddl->start_ms;
}

std::optional<double> ThroughputSeries::recovery_ms(double fraction) const {
  if (!ddl || !ddl->commit_ms) return std::nullopt;
  const double target = fraction * pre_ddl_mean();
  for (const auto& iv : intervals) {
    if (iv.phase != "post") continue;
    if (static_cast<double>(iv.commits) >= target) {
      return static_cast<double>(iv.start_ms + interval_ms) - *ddl->commit_ms;
    }
  }
  return std::nullopt;
}

bool ThroughputSeries::checks_passed() const {
  for (const auto& [name, msg] : checks) {
    if (!msg.empty()) return false;
  }
  return true;
}

void emit(const ThroughputSeries& s, std::ostream& out) {
  out << "interval_start_ms,commits,aborts,phase\n";
  for (const auto& iv : s.intervals) {
    out << iv.start_ms << ',' << iv.commits << ',' << iv.aborts << ',' << iv.phase << '\n';
  }
  const auto min_ddl = s.min_in_ddl();
  out << std::fixed << std::setprecision(1) << "summary,pre_ddl_mean=" << s.pre_ddl_mean()
      << ",min_in_ddl=" << (min_ddl ? std::to_string(*min_ddl) : "na") << ",ddl_ms=" << s.ddl_duration_ms() << '\n';
}

void emit(const ThroughputSeries& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  emit(s, out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace morph::bench
