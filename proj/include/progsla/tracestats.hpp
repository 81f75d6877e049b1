// Copyright 2026 The progsla Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Migration-trace aggregation and percentile bootstrap confidence intervals.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "progsla/cloudsim.hpp"
#include "progsla/error.hpp"
#include "progsla/io.hpp"
#include "progsla/rng.hpp"

namespace progsla::stats {

struct AggregatedSeries {
  std::size_t interval = 24;  // hours
  std::vector<int> values;    // max over VMs of per-VM migrations in each interval
};

/// Per-interval maximum over VMs of that VM's migrate events. A trailing
/// partial interval is dropped.
inline AggregatedSeries aggregate_worst_case(const std::vector<cloud::Event>& events, std::size_t horizon,
                                             long long interval) {
  require_config(interval > 0, "aggregate_worst_case: interval must be > 0");
  AggregatedSeries out;
  out.interval = static_cast<std::size_t>(interval);
  const std::size_t n = horizon / out.interval;
  out.values.assign(n, 0);

  std::map<int, std::vector<int>> per_vm;
  for (const auto& e : events) {
    if (e.kind != cloud::EventKind::kMigrate) continue;
    const std::size_t i = e.hour / out.interval;
    if (i >= n) continue;
    auto& counts = per_vm[e.vm_id];
    if (counts.empty()) counts.assign(n, 0);
    ++counts[i];
  }
  for (const auto& [_, counts] : per_vm)
    for (std::size_t i = 0; i < n; ++i) out.values[i] = std::max(out.values[i], counts[i]);
  return out;
}

inline AggregatedSeries aggregate_worst_case(const cloud::ManagementTrace& trace, long long interval = 24) {
  return aggregate_worst_case(trace.events, trace.horizon, interval);
}

/// Hourly total migration count -> number of hours with that count.
inline std::map<int, std::size_t> rate_histogram(const std::vector<cloud::Event>& events, std::size_t horizon) {
  std::vector<int> per_hour(horizon, 0);
  for (const auto& e : events)
    if (e.kind == cloud::EventKind::kMigrate && e.hour < horizon) ++per_hour[e.hour];
  std::map<int, std::size_t> out;
  for (int c : per_hour) ++out[c];
  return out;
}

inline std::map<int, std::size_t> rate_histogram(const cloud::ManagementTrace& trace) {
  return rate_histogram(trace.events, trace.horizon);
}

struct Statistic {
  enum class Kind { kMax, kQuantile } kind = Kind::kMax;
  double q = 0.5;

  static Statistic max() { return {Kind::kMax, 1.0}; }
  static Statistic quantile(double q) { return {Kind::kQuantile, q}; }

  [[nodiscard]] std::string name() const {
    if (kind == Kind::kMax) return "max";
    return "quantile(" + fmt_double(q) + ")";
  }
};

/// Linear-interpolation sample quantile of sorted data.
inline double sorted_quantile(const std::vector<double>& sorted, double q) {
  ensure(!sorted.empty(), "quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double evaluate(const Statistic& stat, std::vector<double>& sample) {
  if (stat.kind == Statistic::Kind::kMax) return *std::max_element(sample.begin(), sample.end());
  std::sort(sample.begin(), sample.end());
  return sorted_quantile(sample, stat.q);
}

/// Statistic over `resamples` with-replacement resamples of `values`.
/// Resample i draws from its own derived seed.
inline std::vector<double> bootstrap_distribution(const std::vector<double>& values, const Statistic& stat,
                                                  std::size_t resamples, std::uint64_t seed) {
  require_data(!values.empty(), "bootstrap: empty input");
  std::vector<double> out(resamples);
  std::vector<double> sample(values.size());
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  for (std::size_t i = 0; i < resamples; ++i) {
    Rng rng(derive_seed(seed, i));
    for (auto& s : sample) s = values[pick(rng)];
    out[i] = evaluate(stat, sample);
  }
  return out;
}

struct BootstrapCI {
  double level = 0.95;
  double low = 0.0;
  double high = 0.0;
  std::size_t resamples = 0;
  std::string statistic;
};

/// Nearest-rank percentile of sorted data, so interval ends are attained
/// resample values.
inline double nearest_rank(const std::vector<double>& sorted, double p) {
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<long long>(std::ceil(p * n - 1e-9));
  rank = std::clamp<long long>(rank, 1, static_cast<long long>(sorted.size()));
  return sorted[static_cast<std::size_t>(rank - 1)];
}

inline BootstrapCI percentile_ci(std::vector<double> distribution, double level, const Statistic& stat) {
  require_config(level > 0.0 && level < 1.0, "bootstrap: level must lie in (0, 1)");
  std::sort(distribution.begin(), distribution.end());
  const double alpha = (1.0 - level) / 2.0;
  BootstrapCI ci;
  ci.level = level;
  ci.low = nearest_rank(distribution, alpha);
  ci.high = nearest_rank(distribution, 1.0 - alpha);
  ci.resamples = distribution.size();
  ci.statistic = stat.name();
  return ci;
}

inline BootstrapCI bootstrap_ci(const std::vector<double>& values, const Statistic& stat, double level,
                                std::size_t resamples, std::uint64_t seed) {
  require_config(resamples >= 1000, "bootstrap: resamples must be >= 1000");
  require_config(level > 0.0 && level < 1.0, "bootstrap: level must lie in (0, 1)");
  return percentile_ci(bootstrap_distribution(values, stat, resamples, seed), level, stat);
}

// ---------------------------------------------------------------- CSV formats

inline std::string histogram_to_csv(const std::map<int, std::size_t>& hist) {
  std::ostringstream out;
  out << "migrations_per_hour,hours\n";
  for (const auto& [rate, freq] : hist) out << rate << ',' << freq << '\n';
  return out.str();
}

inline std::string aggregated_to_csv(const AggregatedSeries& s) {
  std::ostringstream out;
  out << "interval_index,start_hour,max_migrations_per_vm\n";
  for (std::size_t i = 0; i < s.values.size(); ++i) out << i << ',' << i * s.interval << ',' << s.values[i] << '\n';
  return out.str();
}

inline std::string ci_to_csv(const BootstrapCI& ci) {
  std::ostringstream out;
  out << "statistic,level,resamples,low,high\n";
  out << ci.statistic << ',' << fmt_double(ci.level) << ',' << ci.resamples << ',' << fmt_double(ci.low) << ','
      << fmt_double(ci.high) << '\n';
  return out.str();
}

inline BootstrapCI load_ci(const std::filesystem::path& path) {
  LineReader reader(path);
  std::string line;
  if (!reader.next(line) || trim(line) != "statistic,level,resamples,low,high") reader.fail("expected CI header");
  if (!reader.next(line)) reader.fail("missing CI row");
  const auto c = split_csv(line);
  if (c.size() != 5) reader.fail("malformed CI row");
  BootstrapCI ci;
  ci.statistic = std::string(trim(c[0]));
  const auto level = parse_double(c[1]);
  const auto n = parse_int(c[2]);
  const auto lo = parse_double(c[3]);
  const auto hi = parse_double(c[4]);
  if (!level || !n || !lo || !hi) reader.fail("malformed CI row");
  ci.level = *level;
  ci.resamples = static_cast<std::size_t>(*n);
  ci.low = *lo;
  ci.high = *hi;
  return ci;
}

}  // namespace progsla::stats
