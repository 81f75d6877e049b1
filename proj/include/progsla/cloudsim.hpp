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

// Geo-distributed cloud simulation: DC/PM/VM topology, the migration and
// peak-pauser schedulers, and per-treatment-category energy accounting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "progsla/error.hpp"
#include "progsla/geotemporal.hpp"
#include "progsla/io.hpp"
#include "progsla/rng.hpp"

namespace progsla::cloud {

struct DataCenter {
  std::string location;
  int pm_count = 0;
};

struct VmSpec {
  int id = 0;
  int tc = 1;
  double memory_bytes = 4e9;
};

struct CloudSpec {
  std::vector<DataCenter> data_centers;
  int pm_capacity = 8;  // VM slots per PM
  std::vector<VmSpec> vms;
  std::vector<int> categories{1};
  std::size_t horizon = 2160;  // hours

  [[nodiscard]] int pm_count() const {
    int n = 0;
    for (const auto& dc : data_centers) n += dc.pm_count;
    return n;
  }

  /// PMs are numbered data-center-major: DC 0 owns ids [0, pm_count(0)).
  [[nodiscard]] std::vector<int> pm_to_dc() const {
    std::vector<int> out;
    for (std::size_t d = 0; d < data_centers.size(); ++d)
      out.insert(out.end(), static_cast<std::size_t>(data_centers[d].pm_count), static_cast<int>(d));
    return out;
  }

  void validate() const {
    require_config(!data_centers.empty(), "cloud spec: no data centers");
    for (const auto& dc : data_centers) require_config(dc.pm_count >= 0, "cloud spec: negative PM count");
    require_config(pm_capacity >= 1, "cloud spec: pm_capacity must be >= 1");
    require_config(horizon >= 24, "cloud spec: horizon must be >= 24 hours");
    require_config(static_cast<long long>(pm_count()) * pm_capacity >= static_cast<long long>(vms.size()),
                   "cloud spec: infeasible capacity (PM slots < VM count)");
    std::set<int> ids;
    for (const auto& vm : vms) {
      require_config(ids.insert(vm.id).second, "cloud spec: duplicate vm id " + std::to_string(vm.id));
      require_config(std::find(categories.begin(), categories.end(), vm.tc) != categories.end(),
                     "cloud spec: vm " + std::to_string(vm.id) + " references undefined TC " + std::to_string(vm.tc));
      require_config(vm.memory_bytes > 0.0, "cloud spec: vm memory must be > 0");
    }
  }
};

/// 20 PMs over the given locations (4,4,3,3,3,3 for six sites), 80 VMs of one TC.
inline CloudSpec default_spec(const std::vector<geo::Location>& locations, int tc = 1, std::size_t horizon = 2160,
                              int pm_total = 20, int vm_count = 80, int pm_capacity = 8) {
  CloudSpec spec;
  const int n = static_cast<int>(locations.size());
  for (int i = 0; i < n; ++i)
    spec.data_centers.push_back({locations[static_cast<std::size_t>(i)].id, pm_total / n + (i < pm_total % n ? 1 : 0)});
  spec.pm_capacity = pm_capacity;
  for (int v = 0; v < vm_count; ++v) spec.vms.push_back({v, tc, 4e9});
  spec.categories = {tc};
  spec.horizon = horizon;
  return spec;
}

/// Temperature-dependent cooling overhead (partial PUE).
inline double ppue(double temp_c) { return 7.1705e-5 * temp_c * temp_c + 4.1e-3 * temp_c + 1.0743; }

struct PowerModel {
  double p_idle = 100.0;  // W
  double p_peak = 200.0;  // W

  [[nodiscard]] static double utilization(int vm_count, int capacity) {
    return static_cast<double>(vm_count) / static_cast<double>(capacity);
  }

  /// Draw of a PM hosting `vm_count` VMs; an empty PM is suspended.
  [[nodiscard]] double watts(int vm_count, int capacity) const {
    if (vm_count <= 0) return 0.0;
    return p_idle + utilization(vm_count, capacity) * (p_peak - p_idle);
  }

  void validate() const { require_config(p_idle > 0.0 && p_idle <= p_peak, "power model: need 0 < p_idle <= p_peak"); }
};

/// USD for one PM-hour.
inline double pm_hour_cost(const PowerModel& power, int vm_count, int capacity, double price_usd_per_kwh,
                           double cooling) {
  return power.watts(vm_count, capacity) / 1000.0 * cooling * price_usd_per_kwh;
}

enum class EventKind { kMigrate, kPause, kResume };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::kMigrate: return "migrate";
    case EventKind::kPause: return "pause";
    case EventKind::kResume: return "resume";
  }
  return "?";
}

struct Event {
  std::size_t hour = 0;
  int vm_id = 0;
  EventKind kind = EventKind::kMigrate;
  int src_pm = -1;
  int dst_pm = -1;

  friend bool operator==(const Event&, const Event&) = default;
};

inline constexpr int kPaused = -1;

struct ManagementTrace {
  std::size_t horizon = 0;
  std::vector<int> vm_ids;
  std::vector<Event> events;                           // sorted by hour
  std::vector<std::vector<int>> placements;            // [hour][vm index] -> pm id or kPaused
  std::map<int, std::vector<double>> hourly_tc_cost;   // tc -> USD per hour

  void validate() const {
    ensure(placements.empty() || placements.size() == horizon, "trace: placements do not cover the horizon");
    for (std::size_t i = 0; i < events.size(); ++i) {
      ensure(events[i].hour < horizon, "trace: event past the horizon");
      if (i > 0) ensure(events[i - 1].hour <= events[i].hour, "trace: events not sorted by hour");
      if (events[i].kind == EventKind::kMigrate) ensure(events[i].src_pm != events[i].dst_pm, "trace: migrate with src == dst");
    }
  }
};

struct GaParams {
  int population = 20;
  int generations = 50;
  int tournament = 3;
  double mutation_rate = 0.0;  // per gene; 0 selects 1/|VMs|
  int elitism = 1;
  double w_mig = 4.5e-4;       // USD per migration

  void validate() const {
    require_config(population >= 2, "ga: population must be >= 2");
    require_config(generations >= 0, "ga: generations must be >= 0");
    require_config(tournament >= 1, "ga: tournament must be >= 1");
    require_config(mutation_rate >= 0.0 && mutation_rate <= 1.0, "ga: mutation_rate must lie in [0, 1]");
    require_config(elitism >= 0 && elitism < population, "ga: elitism must lie in [0, population)");
    require_config(w_mig >= 0.0, "ga: w_mig must be >= 0");
  }
};

/// One hour's placement problem: per-PM price * cooling factors plus the
/// previous assignment for the migration penalty.
struct PlacementProblem {
  int capacity = 1;
  std::vector<double> pm_factor;  // USD/kWh including cooling, per PM
  PowerModel power;
  const std::vector<int>* previous = nullptr;
  double w_mig = 0.0;

  [[nodiscard]] int pm_count() const { return static_cast<int>(pm_factor.size()); }

  [[nodiscard]] double energy_cost(const std::vector<int>& assign) const {
    std::vector<int> load(pm_factor.size(), 0);
    for (int pm : assign) ++load[static_cast<std::size_t>(pm)];
    double cost = 0.0;
    for (std::size_t p = 0; p < load.size(); ++p) cost += pm_hour_cost(power, load[p], capacity, pm_factor[p], 1.0);
    return cost;
  }

  [[nodiscard]] int migrations(const std::vector<int>& assign) const {
    if (previous == nullptr) return 0;
    int n = 0;
    for (std::size_t v = 0; v < assign.size(); ++v) n += (*previous)[v] != assign[v] ? 1 : 0;
    return n;
  }

  [[nodiscard]] double cost(const std::vector<int>& assign) const {
    return energy_cost(assign) + w_mig * migrations(assign);
  }

  [[nodiscard]] bool feasible(const std::vector<int>& assign) const {
    std::vector<int> load(pm_factor.size(), 0);
    for (int pm : assign) {
      if (pm < 0 || pm >= pm_count()) return false;
      if (++load[static_cast<std::size_t>(pm)] > capacity) return false;
    }
    return true;
  }
};

/// Cheapest-DC greedy: fill PMs to capacity in ascending order of factor.
inline std::vector<int> greedy_place(const PlacementProblem& prob, std::size_t vm_count) {
  std::vector<int> order(prob.pm_factor.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return prob.pm_factor[static_cast<std::size_t>(a)] < prob.pm_factor[static_cast<std::size_t>(b)];
  });
  std::vector<int> assign(vm_count);
  std::size_t v = 0;
  for (int pm : order)
    for (int slot = 0; slot < prob.capacity && v < vm_count; ++slot) assign[v++] = pm;
  ensure(v == vm_count, "greedy_place: not enough capacity");
  return assign;
}

namespace detail {

/// Moves VMs off over-full PMs onto random PMs with room.
inline void repair(std::vector<int>& assign, const PlacementProblem& prob, Rng& rng) {
  std::vector<int> load(prob.pm_factor.size(), 0);
  for (int pm : assign) ++load[static_cast<std::size_t>(pm)];
  std::vector<int> open;
  for (std::size_t v = 0; v < assign.size(); ++v) {
    auto& pm = assign[v];
    if (load[static_cast<std::size_t>(pm)] <= prob.capacity) continue;
    open.clear();
    for (int p = 0; p < prob.pm_count(); ++p)
      if (load[static_cast<std::size_t>(p)] < prob.capacity) open.push_back(p);
    ensure(!open.empty(), "ga repair: no free slot");
    std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
    --load[static_cast<std::size_t>(pm)];
    pm = open[pick(rng)];
    ++load[static_cast<std::size_t>(pm)];
  }
}

}  // namespace detail

/// Generational GA over VM->PM vectors. The population is seeded from the
/// incumbent (plus mutants of it) and any extra seeds; the incumbent is only
/// replaced by a strictly cheaper assignment.
inline std::vector<int> ga_place(const PlacementProblem& prob, const std::vector<int>& incumbent,
                                 const std::vector<std::vector<int>>& extra_seeds, const GaParams& params,
                                 Rng& rng) {
  const std::size_t n_vm = incumbent.size();
  if (n_vm == 0 || prob.pm_count() <= 1) return incumbent;
  const double mut = params.mutation_rate > 0.0 ? params.mutation_rate : 1.0 / static_cast<double>(n_vm);
  std::uniform_int_distribution<int> any_pm(0, prob.pm_count() - 1);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution mutate(mut);

  auto mutated = [&](std::vector<int> a) {
    for (auto& g : a)
      if (mutate(rng)) g = any_pm(rng);
    detail::repair(a, prob, rng);
    return a;
  };

  const auto pop_size = static_cast<std::size_t>(params.population);
  std::vector<std::vector<int>> pop;
  pop.reserve(pop_size);
  pop.push_back(incumbent);
  for (const auto& s : extra_seeds)
    if (pop.size() < pop_size) pop.push_back(s);
  while (pop.size() < pop_size) pop.push_back(mutated(incumbent));

  std::vector<double> cost(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) cost[i] = prob.cost(pop[i]);

  std::vector<int> best = incumbent;
  double best_cost = cost[0];
  auto track = [&]() {
    for (std::size_t i = 0; i < pop.size(); ++i)
      if (cost[i] < best_cost) {
        best_cost = cost[i];
        best = pop[i];
      }
  };
  track();

  std::uniform_int_distribution<std::size_t> any_ind(0, pop.size() - 1);
  auto tournament = [&]() -> const std::vector<int>& {
    std::size_t winner = any_ind(rng);
    for (int t = 1; t < params.tournament; ++t) {
      const std::size_t c = any_ind(rng);
      if (cost[c] < cost[winner]) winner = c;
    }
    return pop[winner];
  };

  std::vector<std::vector<int>> next;
  std::vector<std::size_t> rank(pop.size());
  for (int gen = 0; gen < params.generations; ++gen) {
    next.clear();
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return cost[a] < cost[b]; });
    for (int e = 0; e < params.elitism; ++e) next.push_back(pop[rank[static_cast<std::size_t>(e)]]);
    while (next.size() < pop_size) {
      const auto& a = tournament();
      const auto& b = tournament();
      std::vector<int> child(n_vm);
      for (std::size_t g = 0; g < n_vm; ++g) child[g] = coin(rng) ? a[g] : b[g];
      next.push_back(mutated(std::move(child)));
    }
    pop.swap(next);
    for (std::size_t i = 0; i < pop.size(); ++i) cost[i] = prob.cost(pop[i]);
    track();
  }
  return best;
}

namespace detail {

inline void check_coverage(const CloudSpec& spec, const geo::SeriesSet& series) {
  for (const auto& dc : spec.data_centers) {
    auto it = series.find(dc.location);
    require_data(it != series.end(), "missing series coverage: no series for " + dc.location);
    require_data(it->second.hours() >= spec.horizon, "missing series coverage: " + dc.location + " has " +
                                                         std::to_string(it->second.hours()) + " hours, need " +
                                                         std::to_string(spec.horizon));
  }
}

/// Per-PM effective price (USD/kWh incl. cooling) at `hour`.
inline std::vector<double> pm_factors(const CloudSpec& spec, const geo::SeriesSet& series, std::size_t hour) {
  std::vector<double> out;
  for (const auto& dc : spec.data_centers) {
    const auto& s = series.at(dc.location);
    const double f = s.prices[hour] * ppue(s.temperatures[hour]);
    out.insert(out.end(), static_cast<std::size_t>(dc.pm_count), f);
  }
  return out;
}

inline ManagementTrace empty_trace(const CloudSpec& spec) {
  ManagementTrace t;
  t.horizon = spec.horizon;
  for (const auto& vm : spec.vms) t.vm_ids.push_back(vm.id);
  return t;
}

}  // namespace detail

/// VMs spread round-robin over all PMs; no consolidation.
inline std::vector<int> spread_placement(const CloudSpec& spec) {
  const int pms = spec.pm_count();
  std::vector<int> a(spec.vms.size());
  for (std::size_t v = 0; v < a.size(); ++v) a[v] = static_cast<int>(v % static_cast<std::size_t>(pms));
  return a;
}

/// Consolidated placement that fills PMs to capacity, taking PMs round-robin
/// across DCs so no DC is favored.
inline std::vector<int> packed_placement(const CloudSpec& spec) {
  const auto pm_dc = spec.pm_to_dc();
  std::vector<std::vector<int>> by_dc(spec.data_centers.size());
  for (std::size_t pm = 0; pm < pm_dc.size(); ++pm) by_dc[static_cast<std::size_t>(pm_dc[pm])].push_back(static_cast<int>(pm));
  std::vector<int> order;
  for (std::size_t round = 0; order.size() < pm_dc.size(); ++round)
    for (const auto& pms : by_dc)
      if (round < pms.size()) order.push_back(pms[round]);
  std::vector<int> a(spec.vms.size());
  for (std::size_t v = 0; v < a.size(); ++v) a[v] = order[v / static_cast<std::size_t>(spec.pm_capacity)];
  return a;
}

enum class HomePlacement { kSpread, kPacked };

/// Treatment with no management actions: the spread placement for every hour.
inline ManagementTrace run_static(const CloudSpec& spec) {
  spec.validate();
  auto trace = detail::empty_trace(spec);
  trace.placements.assign(spec.horizon, spread_placement(spec));
  return trace;
}

inline ManagementTrace run_migration_scheduler(const CloudSpec& spec, const geo::SeriesSet& series,
                                               const GaParams& ga, std::uint64_t seed,
                                               const PowerModel& power = {}) {
  spec.validate();
  ga.validate();
  power.validate();
  detail::check_coverage(spec, series);

  auto trace = detail::empty_trace(spec);
  trace.placements.reserve(spec.horizon);
  std::vector<int> prev = spread_placement(spec);

  for (std::size_t h = 0; h < spec.horizon; ++h) {
    PlacementProblem prob;
    prob.capacity = spec.pm_capacity;
    prob.pm_factor = detail::pm_factors(spec, series, h);
    prob.power = power;
    // Hour 0 is the initial placement: no penalty and no events.
    prob.previous = h == 0 ? nullptr : &prev;
    prob.w_mig = ga.w_mig;

    Rng rng(derive_seed(seed, h));
    auto best = ga_place(prob, prev, {greedy_place(prob, prev.size())}, ga, rng);
    ensure(prob.feasible(best), "migration scheduler produced an infeasible placement");
    if (h > 0) {
      for (std::size_t v = 0; v < best.size(); ++v)
        if (best[v] != prev[v]) trace.events.push_back({h, spec.vms[v].id, EventKind::kMigrate, prev[v], best[v]});
    }
    trace.placements.push_back(best);
    prev = std::move(best);
  }
  return trace;
}

/// The k hour slots with the highest mean; ties go to the earlier hour.
inline std::vector<int> select_peak_hours(const std::vector<double>& hourly_means, std::size_t k) {
  std::vector<int> order(hourly_means.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return hourly_means[static_cast<std::size_t>(a)] > hourly_means[static_cast<std::size_t>(b)];
  });
  order.resize(std::min(k, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

inline std::size_t pause_hours_per_day(double downtime_fraction) {
  return static_cast<std::size_t>(std::lround(24.0 * downtime_fraction));
}

enum class PauseSlots { kGlobal, kPerDc };

/// Hour-of-day ranking of `effective` (one value per hour): day d pauses the k
/// slots with the highest mean over the trailing `window_days` days; day 0 has
/// no history and ranks its own hours.
inline std::vector<bool> peak_pause_mask(const std::vector<double>& effective, std::size_t k, int window_days) {
  const std::size_t horizon = effective.size();
  const std::size_t days = (horizon + 23) / 24;
  const auto window = static_cast<std::size_t>(window_days);
  std::vector<bool> paused(horizon, false);
  for (std::size_t day = 0; day < days; ++day) {
    const std::size_t first = day == 0 ? 0 : (day >= window ? day - window : 0);
    const std::size_t last = day == 0 ? 1 : day;  // exclusive
    std::vector<double> means(24, 0.0);
    std::vector<int> counts(24, 0);
    for (std::size_t dd = first; dd < last; ++dd)
      for (std::size_t slot = 0; slot < 24; ++slot) {
        const std::size_t h = dd * 24 + slot;
        if (h >= horizon) continue;
        means[slot] += effective[h];
        ++counts[slot];
      }
    for (std::size_t slot = 0; slot < 24; ++slot)
      if (counts[slot] > 0) means[slot] /= counts[slot];
    for (int slot : select_peak_hours(means, k)) {
      const std::size_t h = day * 24 + static_cast<std::size_t>(slot);
      if (h < horizon) paused[h] = true;
    }
  }
  return paused;
}

/// Pauses VMs during the daily hour slots with the highest trailing-window
/// mean effective price (price * cooling). With kGlobal the slots are shared
/// by all VMs and ranked on the VM-weighted sum over DCs; with kPerDc every DC
/// ranks its own series.
inline ManagementTrace run_peak_pauser(const CloudSpec& spec, const geo::SeriesSet& series, double downtime_fraction,
                                       int window_days, HomePlacement placement = HomePlacement::kPacked,
                                       PauseSlots slots = PauseSlots::kPerDc) {
  spec.validate();
  require_config(downtime_fraction >= 0.0 && downtime_fraction < 1.0, "peak pauser: downtime_fraction must lie in [0, 1)");
  require_config(window_days >= 1, "peak pauser: window must be >= 1 day");
  detail::check_coverage(spec, series);

  const auto home = placement == HomePlacement::kPacked ? packed_placement(spec) : spread_placement(spec);
  const auto pm_dc = spec.pm_to_dc();
  const std::size_t dcs = spec.data_centers.size();
  std::vector<double> dc_weight(dcs, 0.0);
  for (int pm : home) dc_weight[static_cast<std::size_t>(pm_dc[static_cast<std::size_t>(pm)])] += 1.0;

  std::vector<std::vector<double>> effective(dcs, std::vector<double>(spec.horizon, 0.0));
  for (std::size_t d = 0; d < dcs; ++d) {
    const auto& s = series.at(spec.data_centers[d].location);
    for (std::size_t h = 0; h < spec.horizon; ++h) effective[d][h] = s.prices[h] * ppue(s.temperatures[h]);
  }

  const std::size_t k = pause_hours_per_day(downtime_fraction);
  std::vector<std::vector<bool>> paused(dcs);
  if (slots == PauseSlots::kGlobal) {
    std::vector<double> total(spec.horizon, 0.0);
    for (std::size_t d = 0; d < dcs; ++d)
      for (std::size_t h = 0; h < spec.horizon; ++h) total[h] += dc_weight[d] * effective[d][h];
    paused.assign(dcs, peak_pause_mask(total, k, window_days));
  } else {
    for (std::size_t d = 0; d < dcs; ++d) paused[d] = peak_pause_mask(effective[d], k, window_days);
  }

  auto trace = detail::empty_trace(spec);
  trace.placements.reserve(spec.horizon);
  for (std::size_t h = 0; h < spec.horizon; ++h) {
    std::vector<int> row = home;
    for (std::size_t v = 0; v < home.size(); ++v) {
      const auto& mask = paused[static_cast<std::size_t>(pm_dc[static_cast<std::size_t>(home[v])])];
      if (mask[h]) row[v] = kPaused;
      const bool was = h > 0 && mask[h - 1];
      if (mask[h] != was)
        trace.events.push_back({h, spec.vms[v].id, mask[h] ? EventKind::kPause : EventKind::kResume, -1, -1});
    }
    trace.placements.push_back(std::move(row));
  }
  return trace;
}

/// Fills `trace.hourly_tc_cost`: each PM's hourly cost is split equally among
/// the VMs it hosts and summed per TC.
inline void energy_cost_accounting(ManagementTrace& trace, const CloudSpec& spec, const geo::SeriesSet& series,
                                   const PowerModel& power) {
  spec.validate();
  power.validate();
  detail::check_coverage(spec, series);
  ensure(trace.placements.size() == spec.horizon, "energy accounting: placements incomplete for the horizon");
  ensure(trace.vm_ids.size() == spec.vms.size(), "energy accounting: trace and spec disagree on VMs");

  trace.hourly_tc_cost.clear();
  for (int tc : spec.categories) trace.hourly_tc_cost[tc].assign(spec.horizon, 0.0);

  const auto pms = static_cast<std::size_t>(spec.pm_count());
  std::vector<int> load(pms);
  for (std::size_t h = 0; h < spec.horizon; ++h) {
    const auto& row = trace.placements[h];
    std::fill(load.begin(), load.end(), 0);
    for (int pm : row)
      if (pm != kPaused) ++load[static_cast<std::size_t>(pm)];
    const auto factor = detail::pm_factors(spec, series, h);
    for (std::size_t v = 0; v < row.size(); ++v) {
      const int pm = row[v];
      if (pm == kPaused) continue;
      const auto p = static_cast<std::size_t>(pm);
      const double pm_cost = pm_hour_cost(power, load[p], spec.pm_capacity, factor[p], 1.0);
      trace.hourly_tc_cost[spec.vms[v].tc][h] += pm_cost / load[p];
    }
  }
}

/// Average energy cost per VM-hour of a TC (leased hours, paused or not).
inline double en_cost_per_vm_hour(const ManagementTrace& trace, const CloudSpec& spec, int tc) {
  const auto it = trace.hourly_tc_cost.find(tc);
  ensure(it != trace.hourly_tc_cost.end(), "no cost recorded for TC " + std::to_string(tc));
  const auto vms = std::count_if(spec.vms.begin(), spec.vms.end(), [&](const VmSpec& v) { return v.tc == tc; });
  ensure(vms > 0, "TC " + std::to_string(tc) + " has no VMs");
  const double total = std::accumulate(it->second.begin(), it->second.end(), 0.0);
  return total / (static_cast<double>(vms) * static_cast<double>(it->second.size()));
}

// ---------------------------------------------------------------- CSV formats

inline std::string events_to_csv(const ManagementTrace& t) {
  std::ostringstream out;
  out << "hour,vm_id,event,src_pm,dst_pm\n";
  for (const auto& e : t.events) {
    out << e.hour << ',' << e.vm_id << ',' << to_string(e.kind) << ',';
    if (e.kind == EventKind::kMigrate) out << e.src_pm << ',' << e.dst_pm;
    else out << ',';
    out << '\n';
  }
  return out.str();
}

inline std::vector<Event> load_events(const std::filesystem::path& path) {
  LineReader reader(path);
  std::string line;
  if (!reader.next(line) || trim(line) != "hour,vm_id,event,src_pm,dst_pm") reader.fail("expected trace header");
  std::vector<Event> out;
  while (reader.next(line)) {
    const auto c = split_csv(line);
    if (c.size() != 5) reader.fail("malformed row: expected 5 columns");
    const auto hour = parse_int(c[0]);
    const auto vm = parse_int(c[1]);
    if (!hour || *hour < 0 || !vm) reader.fail("malformed row: bad hour or vm_id");
    Event e;
    e.hour = static_cast<std::size_t>(*hour);
    e.vm_id = static_cast<int>(*vm);
    const auto kind = trim(c[2]);
    if (kind == "migrate") {
      const auto s = parse_int(c[3]);
      const auto d = parse_int(c[4]);
      if (!s || !d) reader.fail("malformed row: migrate needs src_pm and dst_pm");
      if (*s == *d) reader.fail("migrate with src_pm == dst_pm");
      e.kind = EventKind::kMigrate;
      e.src_pm = static_cast<int>(*s);
      e.dst_pm = static_cast<int>(*d);
    } else if (kind == "pause") {
      e.kind = EventKind::kPause;
    } else if (kind == "resume") {
      e.kind = EventKind::kResume;
    } else {
      reader.fail("malformed row: unknown event '" + std::string(kind) + "'");
    }
    if (!out.empty() && out.back().hour > e.hour) reader.fail("events not sorted by hour");
    out.push_back(e);
  }
  return out;
}

inline std::string placements_to_csv(const ManagementTrace& t) {
  std::ostringstream out;
  out << "hour,vm_id,pm_id\n";
  for (std::size_t h = 0; h < t.placements.size(); ++h)
    for (std::size_t v = 0; v < t.vm_ids.size(); ++v) {
      out << h << ',' << t.vm_ids[v] << ',';
      if (t.placements[h][v] == kPaused) out << "PAUSED";
      else out << t.placements[h][v];
      out << '\n';
    }
  return out.str();
}

inline std::string costs_to_csv(const ManagementTrace& t) {
  std::ostringstream out;
  out << "hour,tc_id,cost_usd\n";
  for (std::size_t h = 0; h < t.horizon; ++h)
    for (const auto& [tc, costs] : t.hourly_tc_cost) out << h << ',' << tc << ',' << fmt_double(costs[h]) << '\n';
  return out.str();
}

/// tc -> hourly costs, read back from a cost CSV.
inline std::map<int, std::vector<double>> load_costs(const std::filesystem::path& path) {
  LineReader reader(path);
  std::string line;
  if (!reader.next(line) || trim(line) != "hour,tc_id,cost_usd") reader.fail("expected cost header");
  std::map<int, std::vector<double>> out;
  while (reader.next(line)) {
    const auto c = split_csv(line);
    if (c.size() != 3) reader.fail("malformed row: expected 3 columns");
    const auto hour = parse_int(c[0]);
    const auto tc = parse_int(c[1]);
    const auto cost = parse_double(c[2]);
    if (!hour || *hour < 0 || !tc || !cost) reader.fail("malformed row");
    auto& v = out[static_cast<int>(*tc)];
    if (static_cast<std::size_t>(*hour) != v.size()) reader.fail("non-contiguous hours for tc " + std::to_string(*tc));
    v.push_back(*cost);
  }
  return out;
}

}  // namespace progsla::cloud
