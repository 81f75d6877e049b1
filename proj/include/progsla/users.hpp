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

// Web and HPC user populations: availability requirements derived from
// workload traces, willingness to pay and lease weights.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "progsla/error.hpp"
#include "progsla/io.hpp"
#include "progsla/rng.hpp"
#include "progsla/tracestats.hpp"

namespace progsla::users {

struct WebWorkload {
  std::string site;
  std::vector<double> hourly_request_rates;  // requests/hour
};

struct Job {
  double submit_h = 0.0;    // hours since trace start
  double duration_h = 1.0;
};

struct HpcWorkload {
  std::string user;
  std::vector<Job> jobs;
};

enum class Kind { kWeb, kHpc };

inline std::string_view to_string(Kind k) { return k == Kind::kWeb ? "web" : "hpc"; }

struct UserProfile {
  Kind kind = Kind::kWeb;
  double av_offset = 1.0;     // required availability
  double wtp = 0.0;           // USD/h
  double lease_weight = 1.0;  // fraction of the year leased

  void validate() const {
    ensure(av_offset >= 0.0 && av_offset <= 1.0, "user: av_offset out of [0, 1]");
    ensure(wtp >= 0.0, "user: negative wtp");
    ensure(lease_weight > 0.0 && lease_weight <= 1.0, "user: lease_weight out of (0, 1]");
  }
};

using Population = std::vector<UserProfile>;

/// Availability that keeps missed requests under `threshold` per hour at the
/// site's mean rate: 1 - threshold / mean.
inline double web_requirement(const WebWorkload& w, double threshold = 100.0) {
  require_config(threshold > 0.0, "web_requirement: threshold must be > 0");
  require_data(!w.hourly_request_rates.empty(), "web_requirement: empty workload for " + w.site);
  for (double r : w.hourly_request_rates) require_data(r >= 0.0, "web_requirement: negative request rate");
  const double mean = std::accumulate(w.hourly_request_rates.begin(), w.hourly_request_rates.end(), 0.0) /
                      static_cast<double>(w.hourly_request_rates.size());
  if (mean <= 0.0) return 0.0;
  return std::max(0.0, 1.0 - threshold / mean);
}

/// mean job duration (h) * mean submission rate (jobs/h) over `span_hours`.
inline double hpc_load(const HpcWorkload& w, double span_hours) {
  require_config(span_hours > 0.0, "hpc_load: span must be > 0");
  if (w.jobs.empty()) return 0.0;
  double dur = 0.0;
  for (const auto& j : w.jobs) {
    require_data(j.duration_h > 0.0, "hpc_load: job duration must be > 0 for user " + w.user);
    dur += j.duration_h;
  }
  const double n = static_cast<double>(w.jobs.size());
  return (dur / n) * (n / span_hours);
}

/// Maps load linearly from `floor` (no load) to 1 (load >= load_ref).
inline double hpc_requirement(double load, double load_ref, double floor = 0.5) {
  require_config(floor >= 0.0 && floor <= 1.0, "hpc_requirement: floor must lie in [0, 1]");
  if (load_ref <= 0.0) return load > 0.0 ? 1.0 : floor;
  return floor + (1.0 - floor) * std::min(1.0, std::max(0.0, load) / load_ref);
}

inline double hpc_lease_weight(double load) { return std::clamp(load, 1e-6, 1.0); }

struct HpcRequirementSet {
  std::vector<std::string> users;
  std::vector<double> loads;
  std::vector<double> av_offsets;
  double load_ref = 0.0;  // 95th percentile of the loads
};

/// Requirements for every user with at least one job; the trace span runs
/// from the first submission to the last job end over all users.
inline HpcRequirementSet hpc_requirements(const std::vector<HpcWorkload>& workloads, double floor = 0.5) {
  double first = 0.0, last = 0.0;
  bool any = false;
  for (const auto& w : workloads)
    for (const auto& j : w.jobs) {
      first = any ? std::min(first, j.submit_h) : j.submit_h;
      last = any ? std::max(last, j.submit_h + j.duration_h) : j.submit_h + j.duration_h;
      any = true;
    }
  require_data(any, "hpc_requirements: population has no jobs");
  const double span = std::max(last - first, 1.0);

  HpcRequirementSet out;
  for (const auto& w : workloads) {
    if (w.jobs.empty()) continue;
    out.users.push_back(w.user);
    out.loads.push_back(hpc_load(w, span));
  }
  auto sorted = out.loads;
  std::sort(sorted.begin(), sorted.end());
  out.load_ref = stats::sorted_quantile(sorted, 0.95);
  for (double l : out.loads) out.av_offsets.push_back(hpc_requirement(l, out.load_ref, floor));
  return out;
}

/// Exponential model of the distance of requirements from an anchor:
/// web requirements are 1 - X, HPC requirements floor + X, X ~ Exp(mean scale),
/// clamped to [0, 1].
struct ExpFit {
  double anchor = 1.0;
  double direction = -1.0;
  double scale = 0.03;

  [[nodiscard]] double sample(Rng& rng) const {
    std::exponential_distribution<double> exp(1.0 / scale);
    return std::clamp(anchor + direction * exp(rng), 0.0, 1.0);
  }
};

/// Maximum-likelihood fit: the scale is the mean distance from the anchor.
inline ExpFit fit_exponential(const std::vector<double>& requirements, double anchor, double direction) {
  require_data(!requirements.empty(), "fit_exponential: empty requirement set");
  double sum = 0.0;
  for (double r : requirements) sum += std::max(0.0, direction * (r - anchor));
  ExpFit f;
  f.anchor = anchor;
  f.direction = direction;
  f.scale = std::max(sum / static_cast<double>(requirements.size()), 1e-6);
  return f;
}

struct RequirementModel {
  ExpFit web{1.0, -1.0, 0.03};
  ExpFit hpc{0.5, 1.0, 0.03};
  double hpc_floor = 0.5;
  double hpc_load_ref = 0.2;
};

struct PopulationParams {
  std::size_t n = 1000;
  double web_ratio = 1.0;
  double hpc_ratio = 1.5;
  double base_price = 0.28;
  double noise_sigma = 0.05;
};

/// Web users first, then HPC users. User i draws from its own derived seed.
inline Population sample_population(const PopulationParams& p, const RequirementModel& model, std::uint64_t seed) {
  require_config(p.n >= 1, "population: n must be >= 1");
  require_config(p.web_ratio >= 0.0 && p.hpc_ratio >= 0.0 && p.web_ratio + p.hpc_ratio > 0.0,
                 "population: ratios must be non-negative and not both zero");
  require_config(p.noise_sigma >= 0.0, "population: noise_sigma must be >= 0");
  const auto n_web = static_cast<std::size_t>(
      std::lround(static_cast<double>(p.n) * p.web_ratio / (p.web_ratio + p.hpc_ratio)));

  Population pop(p.n);
  for (std::size_t i = 0; i < p.n; ++i) {
    Rng rng(derive_seed(seed, i));
    auto& u = pop[i];
    u.kind = i < n_web ? Kind::kWeb : Kind::kHpc;
    u.av_offset = (u.kind == Kind::kWeb ? model.web : model.hpc).sample(rng);
    const double mean_wtp = u.av_offset * p.base_price;
    if (p.noise_sigma == 0.0) {
      u.wtp = mean_wtp;
    } else {
      std::normal_distribution<double> noise(0.0, p.noise_sigma);
      do {
        u.wtp = mean_wtp + noise(rng);
      } while (u.wtp <= 0.0);
    }
    if (u.kind == Kind::kWeb) {
      u.lease_weight = 1.0;
    } else {
      // Invert the requirement map to recover a load; clamped users sit at load_ref.
      const double span = 1.0 - model.hpc_floor;
      const double rel = span > 0.0 ? (u.av_offset - model.hpc_floor) / span : 1.0;
      u.lease_weight = hpc_lease_weight(std::clamp(rel, 0.0, 1.0) * model.hpc_load_ref);
    }
  }
  return pop;
}

// ---------------------------------------------------- synthetic workloads

struct WebSynthParams {
  std::size_t sites = 38;
  std::size_t hours = 720;
  double threshold = 100.0;
  double requirement_scale = 0.03;  // mean of 1 - requirement across sites
  double diurnal_amplitude = 0.4;
};

/// Sites whose mean rate is threshold / X, X ~ Exp(requirement_scale), with a
/// diurnal swing and Poisson counts per hour.
inline std::vector<WebWorkload> synth_web_workloads(const WebSynthParams& p, std::uint64_t seed) {
  require_config(p.sites >= 1 && p.hours >= 1, "web synth: need sites >= 1 and hours >= 1");
  require_config(p.requirement_scale > 0.0, "web synth: requirement_scale must be > 0");
  std::vector<WebWorkload> out;
  for (std::size_t s = 0; s < p.sites; ++s) {
    Rng rng(derive_seed(seed, s));
    std::exponential_distribution<double> gap(1.0 / p.requirement_scale);
    const double x = std::min(gap(rng), 0.999);
    const double mean = p.threshold / x;
    std::uniform_real_distribution<double> phase(0.0, 24.0);
    const double ph = phase(rng);
    WebWorkload w;
    w.site = "site" + std::to_string(s);
    w.hourly_request_rates.resize(p.hours);
    for (std::size_t h = 0; h < p.hours; ++h) {
      const double lambda =
          mean * (1.0 + p.diurnal_amplitude * std::sin(2.0 * std::numbers::pi * (static_cast<double>(h) + ph) / 24.0));
      std::poisson_distribution<long long> count(std::max(lambda, 1e-9));
      w.hourly_request_rates[h] = static_cast<double>(count(rng));
    }
    out.push_back(std::move(w));
  }
  return out;
}

struct HpcSynthParams {
  std::size_t users = 481;
  double span_hours = 2160.0;
  double load_log_mean = -4.0;   // log of the median load
  double load_log_sigma = 2.0;
  double duration_log_mean = 0.5;
  double duration_log_sigma = 1.0;
};

/// Users with log-normal loads; jobs arrive as a Poisson process whose rate
/// makes mean_duration * rate equal to the drawn load.
inline std::vector<HpcWorkload> synth_hpc_workloads(const HpcSynthParams& p, std::uint64_t seed) {
  require_config(p.users >= 1 && p.span_hours > 0.0, "hpc synth: need users >= 1 and span > 0");
  std::vector<HpcWorkload> out;
  for (std::size_t u = 0; u < p.users; ++u) {
    Rng rng(derive_seed(seed, u));
    std::lognormal_distribution<double> load_d(p.load_log_mean, p.load_log_sigma);
    std::lognormal_distribution<double> dur_d(p.duration_log_mean, p.duration_log_sigma);
    const double load = std::min(load_d(rng), 2.0);
    const double mean_duration = std::max(dur_d(rng), 0.05);
    const double rate = load / mean_duration;
    HpcWorkload w;
    w.user = "user" + std::to_string(u);
    std::exponential_distribution<double> gap(rate);
    std::exponential_distribution<double> dur(1.0 / mean_duration);
    double t = gap(rng);
    while (t < p.span_hours && w.jobs.size() < 200000) {
      w.jobs.push_back({t, std::max(dur(rng), 1.0 / 60.0)});
      t += gap(rng);
    }
    out.push_back(std::move(w));
  }
  return out;
}

// ------------------------------------------------------- CSV / JSON formats

inline std::string web_workloads_to_csv(const std::vector<WebWorkload>& ws, TimePoint start) {
  std::ostringstream out;
  out << "site,timestamp,requests\n";
  for (const auto& w : ws)
    for (std::size_t h = 0; h < w.hourly_request_rates.size(); ++h)
      out << w.site << ',' << format_iso_utc(start + std::chrono::hours{static_cast<long long>(h)}) << ','
          << fmt_double(w.hourly_request_rates[h]) << '\n';
  return out.str();
}

/// Rows of one site must be hourly and contiguous; sites may interleave.
inline std::vector<WebWorkload> load_web_workloads(const std::filesystem::path& path) {
  LineReader reader(path);
  std::string line;
  if (!reader.next(line) || trim(line) != "site,timestamp,requests") reader.fail("expected header 'site,timestamp,requests'");
  std::map<std::string, std::pair<TimePoint, WebWorkload>> sites;
  std::vector<std::string> order;
  while (reader.next(line)) {
    const auto c = split_csv(line);
    if (c.size() != 3) reader.fail("malformed row: expected 3 columns");
    const std::string site{trim(c[0])};
    const auto ts = parse_iso_utc(c[1]);
    const auto req = parse_double(c[2]);
    if (site.empty() || !ts || !req) reader.fail("malformed row");
    if (*req < 0.0) reader.fail("negative request count");
    auto [it, inserted] = sites.try_emplace(site);
    auto& [start, w] = it->second;
    if (inserted) {
      start = *ts;
      w.site = site;
      order.push_back(site);
    } else if (*ts != start + std::chrono::hours{static_cast<long long>(w.hourly_request_rates.size())}) {
      reader.fail("non-contiguous timestamps for site " + site);
    }
    w.hourly_request_rates.push_back(*req);
  }
  std::vector<WebWorkload> out;
  for (const auto& s : order) out.push_back(std::move(sites[s].second));
  return out;
}

inline std::string hpc_workloads_to_csv(const std::vector<HpcWorkload>& ws) {
  std::ostringstream out;
  out << "user,submit_ts,duration_h\n";
  for (const auto& w : ws)
    for (const auto& j : w.jobs) out << w.user << ',' << fmt_double(j.submit_h) << ',' << fmt_double(j.duration_h) << '\n';
  return out.str();
}

/// `submit_ts` is hours since the trace start.
inline std::vector<HpcWorkload> load_hpc_workloads(const std::filesystem::path& path) {
  LineReader reader(path);
  std::string line;
  if (!reader.next(line) || trim(line) != "user,submit_ts,duration_h") reader.fail("expected header 'user,submit_ts,duration_h'");
  std::map<std::string, std::size_t> index;
  std::vector<HpcWorkload> out;
  while (reader.next(line)) {
    const auto c = split_csv(line);
    if (c.size() != 3) reader.fail("malformed row: expected 3 columns");
    const std::string user{trim(c[0])};
    const auto submit = parse_double(c[1]);
    const auto dur = parse_double(c[2]);
    if (user.empty() || !submit || !dur) reader.fail("malformed row");
    if (*dur <= 0.0) reader.fail("job duration must be > 0");
    auto [it, inserted] = index.try_emplace(user, out.size());
    if (inserted) out.push_back({user, {}});
    out[it->second].jobs.push_back({*submit, *dur});
  }
  return out;
}

inline nlohmann::json to_json(const Population& pop) {
  auto arr = nlohmann::json::array();
  for (const auto& u : pop)
    arr.push_back({{"kind", std::string(to_string(u.kind))},
                   {"av_offset", u.av_offset},
                   {"wtp", u.wtp},
                   {"lease_weight", u.lease_weight}});
  return arr;
}

inline Population population_from_json(const nlohmann::json& j) {
  require_data(j.is_array(), "population JSON must be an array");
  Population pop;
  try {
    for (const auto& e : j) {
      UserProfile u;
      const auto kind = e.at("kind").get<std::string>();
      require_data(kind == "web" || kind == "hpc", "population JSON: unknown kind '" + kind + "'");
      u.kind = kind == "web" ? Kind::kWeb : Kind::kHpc;
      u.av_offset = e.at("av_offset").get<double>();
      u.wtp = e.at("wtp").get<double>();
      u.lease_weight = e.at("lease_weight").get<double>();
      require_data(u.av_offset >= 0.0 && u.av_offset <= 1.0 && u.wtp >= 0.0 && u.lease_weight > 0.0 &&
                       u.lease_weight <= 1.0,
                   "population JSON: profile violates its invariants");
      pop.push_back(u);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("population JSON: ") + ex.what());
  }
  return pop;
}

inline Population load_population(const std::filesystem::path& path) {
  try {
    return population_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& ex) {
    throw DataError(path.string() + ": " + ex.what());
  }
}

}  // namespace progsla::users
