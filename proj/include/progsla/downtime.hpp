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

// Pre-copy live-migration downtime.
//
// Pre-copy sends the whole memory image at rate R while the guest dirties
// memory at rate D, then resends the dirtied part, round after round, until
// the remainder falls below a threshold V_thd. The remainder after n rounds is
// V_mem * (D/R)^n, so the stop-and-copy phase takes V_mem * D^n / R^(n+1)
// seconds, plus the fixed resume time.
//
// Memory sizes are in bits and rates in bit/s throughout.

#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "progsla/error.hpp"
#include "progsla/io.hpp"

namespace progsla::downtime {

struct DowntimeParams {
  double v_mem = 32e9;     // bits (4 GB)
  double v_thd = 8e9;      // bits (1 GB)
  double t_resume = 5.0;   // s
  std::vector<double> r_grid;
  std::vector<double> d_grid;

  void validate() const {
    require_config(v_thd > 0.0 && v_thd <= v_mem, "downtime: need 0 < v_thd <= v_mem");
    require_config(t_resume >= 0.0, "downtime: t_resume must be >= 0");
    for (double r : r_grid) require_config(r > 0.0, "downtime: rates must be > 0");
    for (double d : d_grid) require_config(d > 0.0, "downtime: rates must be > 0");
  }
};

/// `count` log-spaced points from lo to hi inclusive.
inline std::vector<double> log_space(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

/// R from 10 Mbit/s to 1 Gbit/s, D from 1 kbit/s to 1 Gbit/s.
inline DowntimeParams reference_params(std::size_t r_points = 41, std::size_t d_points = 121) {
  DowntimeParams p;
  p.r_grid = log_space(1e7, 1e9, r_points);
  p.d_grid = log_space(1e3, 1e9, d_points);
  return p;
}

/// Smallest n >= 0 with v_mem * (d/r)^n <= v_thd.
inline int rounds(double v_mem, double v_thd, double r, double d) {
  require_config(v_thd > 0.0 && v_thd <= v_mem, "rounds: need 0 < v_thd <= v_mem");
  require_config(r > 0.0 && d >= 0.0, "rounds: rates must be positive");
  require_config(d < r, "non-convergent pre-copy: dirty rate >= transfer rate");
  if (v_mem <= v_thd) return 0;
  if (d == 0.0) return 1;
  const double ratio = d / r;
  auto remainder = [&](int n) { return v_mem * std::pow(ratio, n); };
  int n = static_cast<int>(std::ceil(std::log(v_thd / v_mem) / std::log(ratio)));
  if (n < 0) n = 0;
  // The log quotient can land a hair off an integer; snap so the inequality holds exactly.
  while (remainder(n) > v_thd) ++n;
  while (n > 0 && remainder(n - 1) <= v_thd) --n;
  return n;
}

inline double downtime(const DowntimeParams& p, double r, double d) {
  require_config(r > 0.0 && d >= 0.0, "downtime: need r > 0 and d >= 0");
  if (d == 0.0) return p.t_resume;
  if (d >= r) return p.v_mem / r + p.t_resume;  // pre-copy never converges: full stop-and-copy
  const int n = rounds(p.v_mem, p.v_thd, r, d);
  return p.v_mem * std::pow(d / r, n) / r + p.t_resume;
}

struct WorstCase {
  double seconds = 0.0;
  double r = 0.0;
  double d = 0.0;
};

/// Maximum over grid pairs with d < r; the first maximal pair wins ties.
inline WorstCase worst_case_downtime(const DowntimeParams& p) {
  p.validate();
  require_config(!p.r_grid.empty() && !p.d_grid.empty(), "worst_case_downtime: empty grid");
  std::optional<WorstCase> best;
  for (double r : p.r_grid)
    for (double d : p.d_grid) {
      if (d >= r) continue;
      const double t = downtime(p, r, d);
      if (!best || t > best->seconds) best = WorstCase{t, r, d};
    }
  require_data(best.has_value(), "worst_case_downtime: no convergent (r, d) pair in the grid");
  return *best;
}

/// `r_bps,d_bps,downtime_s` over the full grid, non-convergent pairs included.
inline std::string surface_to_csv(const DowntimeParams& p) {
  std::ostringstream out;
  out << "r_bps,d_bps,downtime_s\n";
  for (double r : p.r_grid)
    for (double d : p.d_grid) out << fmt_double(r) << ',' << fmt_double(d) << ',' << fmt_double(downtime(p, r, d)) << '\n';
  return out.str();
}

}  // namespace progsla::downtime
