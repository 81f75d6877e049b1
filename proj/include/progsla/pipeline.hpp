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

// Pipeline stages. Each stage reads its inputs from files and writes its
// outputs under a directory, so running the stages one by one through the
// command line produces the same bundle as `pipeline`.

#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "progsla/cloudsim.hpp"
#include "progsla/config.hpp"
#include "progsla/downtime.hpp"
#include "progsla/error.hpp"
#include "progsla/geotemporal.hpp"
#include "progsla/io.hpp"
#include "progsla/rng.hpp"
#include "progsla/selection.hpp"
#include "progsla/slamodel.hpp"
#include "progsla/tracestats.hpp"
#include "progsla/users.hpp"

namespace progsla::pipeline {

namespace fs = std::filesystem;

namespace files {
inline constexpr const char* kGeo = "geo.csv";
inline constexpr const char* kTraceMigration = "trace_migration.csv";
inline constexpr const char* kPlacementMigration = "placement_migration.csv";
inline constexpr const char* kCostStatic = "cost_static.csv";
inline constexpr const char* kCostMigration = "cost_migration.csv";
inline constexpr const char* kEnergySummary = "energy_summary.csv";
inline constexpr const char* kRateHistogram = "migration_rate_histogram.csv";
inline constexpr const char* kAggregated = "aggregated_worst_case.csv";
inline constexpr const char* kMigrationCi = "migration_ci.csv";
inline constexpr const char* kDowntimeSurface = "downtime_surface.csv";
inline constexpr const char* kDowntimeWorst = "downtime_worst_case.csv";
inline constexpr const char* kCatalogJson = "catalog.json";
inline constexpr const char* kCatalogCsv = "catalog.csv";
inline constexpr const char* kWebWorkloads = "web_workloads.csv";
inline constexpr const char* kHpcWorkloads = "hpc_workloads.csv";
inline constexpr const char* kWebRequirements = "web_requirements.csv";
inline constexpr const char* kHpcRequirements = "hpc_requirements.csv";
inline constexpr const char* kRequirementModel = "requirement_model.csv";
inline constexpr const char* kPopulationJson = "population.json";
inline constexpr const char* kWtpHistogram = "wtp_histogram.csv";
inline constexpr const char* kOutcomeJson = "outcome.json";
inline constexpr const char* kSelection = "selection_by_offer.csv";
inline constexpr const char* kUsersScatter = "user_outcomes.csv";
inline constexpr const char* kCombinations = "prefix_catalogs.csv";
inline constexpr const char* kSweep = "sweep.csv";
inline constexpr const char* kSweepCi = "sweep_ci.csv";
inline constexpr const char* kSweepSummary = "sweep_summary.csv";
inline constexpr const char* kSummary = "summary.txt";
inline constexpr const char* kConfig = "config.txt";
}  // namespace files

// ------------------------------------------------------ config -> params

inline geo::SynthParams synth_params(const Config& c) {
  geo::SynthParams p;
  p.price_amplitude = c.num("geo.price_amplitude");
  p.price_noise = c.num("geo.price_noise");
  p.temp_daily_amplitude = c.num("geo.temp_daily_amplitude");
  p.temp_annual_amplitude = c.num("geo.temp_annual_amplitude");
  p.temp_noise = c.num("geo.temp_noise");
  const auto start = parse_iso_utc(c.str("geo.start"));
  require_config(start.has_value(), "geo.start: expected YYYY-MM-DDTHH:MM:SSZ");
  require_config(start->time_since_epoch().count() % 3600 == 0, "geo.start: must be aligned to the hour");
  p.start = *start;
  require_config(p.price_noise >= 0.0 && p.temp_noise >= 0.0, "geo noise must be >= 0");
  return p;
}

inline cloud::CloudSpec cloud_spec(const Config& c, const std::vector<geo::Location>& locations, int tc) {
  auto spec = cloud::default_spec(locations, tc, c.count("horizon_hours"), static_cast<int>(c.count("cloud.pms")),
                                  static_cast<int>(c.count("cloud.vm_count")),
                                  static_cast<int>(c.count("cloud.pm_capacity")));
  for (auto& vm : spec.vms) vm.memory_bytes = c.num("cloud.vm_memory_bytes");
  spec.validate();
  return spec;
}

inline cloud::PowerModel power_model(const Config& c) {
  cloud::PowerModel p{c.num("power.p_idle"), c.num("power.p_peak")};
  p.validate();
  return p;
}

inline cloud::GaParams ga_params(const Config& c) {
  cloud::GaParams g;
  g.population = static_cast<int>(c.integer("ga.population"));
  g.generations = static_cast<int>(c.integer("ga.generations"));
  g.tournament = static_cast<int>(c.integer("ga.tournament"));
  g.mutation_rate = c.num("ga.mutation_rate");
  g.elitism = static_cast<int>(c.integer("ga.elitism"));
  g.w_mig = c.num("ga.w_mig");
  g.validate();
  return g;
}

inline downtime::DowntimeParams downtime_params(const Config& c) {
  auto p = downtime::reference_params(c.count("downtime.r_points"), c.count("downtime.d_points"));
  p.v_mem = c.num("downtime.v_mem_bits");
  p.v_thd = c.num("downtime.v_thd_bits");
  p.t_resume = c.num("downtime.t_resume_s");
  p.validate();
  return p;
}

inline sla::BaseVm base_vm(const Config& c) {
  sla::BaseVm b;
  b.price = c.num("sla.base_price");
  b.availability = c.num("sla.base_availability");
  b.service_cost = c.num("sla.service_cost");
  b.validate();
  return b;
}

inline selection::SelectionParams selection_params(const Config& c) {
  selection::SelectionParams p;
  p.satisfaction = {c.num("selection.alpha"), c.num("selection.beta"), c.num("selection.gamma")};
  p.check_cost = c.num("selection.check_cost");
  p.service_cost = c.num("sla.service_cost");
  p.validate();
  return p;
}

// ------------------------------------------------------------- stages

inline geo::SeriesSet load_or_synth_series(const Config& c) {
  const auto& input = c.str("geo.input");
  if (!input.empty()) {
    auto set = geo::load_all_series(input);
    for (const auto& [_, s] : set) s.validate();
    return set;
  }
  return geo::synth_all(c.locations(), c.count("horizon_hours"), stage_seed(c.seed(), Stage::kGeotemporal),
                        synth_params(c));
}

inline void stage_geo(const Config& c, const fs::path& out) {
  write_file(out / files::kGeo, geo::series_to_csv(load_or_synth_series(c)));
}

/// Location list for the cloud: the configured sites, restricted to those
/// present in the series file when one is given.
inline std::vector<geo::Location> cloud_locations(const Config& c, const geo::SeriesSet& series) {
  auto locs = c.locations();
  if (c.str("geo.input").empty() && c.str("geo.locations").empty()) return locs;
  std::vector<geo::Location> out;
  for (const auto& l : locs)
    if (series.count(l.id)) out.push_back(l);
  require_data(!out.empty(), "no configured location has a series");
  return out;
}

struct EnergySummary {
  double static_cost = 0.0;
  double migration_cost = 0.0;
  std::vector<double> pauser_cost;  // by paused hours per day, 0..24

  [[nodiscard]] double migration_savings() const { return sla::energy_savings(migration_cost, static_cost); }

  [[nodiscard]] std::vector<double> pauser_savings() const {
    std::vector<double> out;
    for (double cost : pauser_cost) out.push_back(sla::energy_savings(cost, static_cost));
    return out;
  }
};

inline std::string energy_summary_to_csv(const EnergySummary& e) {
  std::ostringstream out;
  out << "scheduler,pause_hours,en_cost_per_vm_h,en_savings\n";
  out << "static,0," << fmt_double(e.static_cost) << ",0\n";
  out << "migration,0," << fmt_double(e.migration_cost) << ',' << fmt_double(e.migration_savings()) << '\n';
  const auto s = e.pauser_savings();
  for (std::size_t k = 0; k < e.pauser_cost.size(); ++k)
    out << "pauser," << k << ',' << fmt_double(e.pauser_cost[k]) << ',' << fmt_double(s[k]) << '\n';
  return out.str();
}

inline EnergySummary load_energy_summary(const fs::path& path) {
  LineReader reader(path);
  std::string line;
  if (!reader.next(line) || trim(line) != "scheduler,pause_hours,en_cost_per_vm_h,en_savings")
    reader.fail("expected energy summary header");
  EnergySummary e;
  bool have_static = false, have_mig = false;
  while (reader.next(line)) {
    const auto c = split_csv(line);
    if (c.size() != 4) reader.fail("malformed row");
    const auto k = parse_int(c[1]);
    const auto cost = parse_double(c[2]);
    if (!k || !cost) reader.fail("malformed row");
    const auto name = trim(c[0]);
    if (name == "static") {
      e.static_cost = *cost;
      have_static = true;
    } else if (name == "migration") {
      e.migration_cost = *cost;
      have_mig = true;
    } else if (name == "pauser") {
      if (*k != static_cast<long long>(e.pauser_cost.size())) reader.fail("pauser rows must run 0..24 in order");
      e.pauser_cost.push_back(*cost);
    } else {
      reader.fail("unknown scheduler '" + std::string(name) + "'");
    }
  }
  require_data(have_static && have_mig, path.string() + ": missing static or migration row");
  require_data(e.pauser_cost.size() == 25, path.string() + ": expected pauser rows for 0..24 paused hours");
  require_data(e.static_cost > 0.0, path.string() + ": static energy cost must be > 0");
  return e;
}

inline void stage_simulate(const Config& c, const fs::path& geo_csv, const fs::path& out) {
  const auto series = geo::load_all_series(geo_csv);
  for (const auto& [_, s] : series) s.validate();
  const auto locs = cloud_locations(c, series);
  const auto power = power_model(c);

  EnergySummary e;
  {
    const auto spec = cloud_spec(c, locs, 1);
    auto trace = cloud::run_static(spec);
    cloud::energy_cost_accounting(trace, spec, series, power);
    e.static_cost = cloud::en_cost_per_vm_hour(trace, spec, 1);
    write_file(out / files::kCostStatic, cloud::costs_to_csv(trace));
  }
  {
    const auto spec = cloud_spec(c, locs, 2);
    auto trace = cloud::run_migration_scheduler(spec, series, ga_params(c), stage_seed(c.seed(), Stage::kMigration), power);
    cloud::energy_cost_accounting(trace, spec, series, power);
    trace.validate();
    e.migration_cost = cloud::en_cost_per_vm_hour(trace, spec, 2);
    write_file(out / files::kTraceMigration, cloud::events_to_csv(trace));
    write_file(out / files::kPlacementMigration, cloud::placements_to_csv(trace));
    write_file(out / files::kCostMigration, cloud::costs_to_csv(trace));
  }
  {
    const auto spec = cloud_spec(c, locs, 3);
    const int window = static_cast<int>(c.integer("pauser.window_days"));
    const auto& mode = c.str("pauser.placement");
    require_config(mode == "spread" || mode == "packed", "pauser.placement: expected 'spread' or 'packed'");
    const auto home = mode == "packed" ? cloud::HomePlacement::kPacked : cloud::HomePlacement::kSpread;
    const auto& slot_mode = c.str("pauser.slots");
    require_config(slot_mode == "global" || slot_mode == "per_dc", "pauser.slots: expected 'global' or 'per_dc'");
    const auto slots = slot_mode == "per_dc" ? cloud::PauseSlots::kPerDc : cloud::PauseSlots::kGlobal;
    for (int k = 0; k < 24; ++k) {
      auto trace = cloud::run_peak_pauser(spec, series, k / 24.0, window, home, slots);
      cloud::energy_cost_accounting(trace, spec, series, power);
      e.pauser_cost.push_back(cloud::en_cost_per_vm_hour(trace, spec, 3));
    }
    e.pauser_cost.push_back(0.0);  // paused around the clock
  }
  require_data(e.static_cost > 0.0, "static treatment has zero energy cost");
  write_file(out / files::kEnergySummary, energy_summary_to_csv(e));
}

inline void stage_analyze(const Config& c, const fs::path& trace_csv, const fs::path& out) {
  const auto events = cloud::load_events(trace_csv);
  const std::size_t horizon = c.count("horizon_hours");
  for (const auto& ev : events) require_data(ev.hour < horizon, "trace event beyond horizon_hours");
  write_file(out / files::kRateHistogram, stats::histogram_to_csv(stats::rate_histogram(events, horizon)));
  const auto agg = stats::aggregate_worst_case(events, horizon, c.integer("stats.interval_hours"));
  write_file(out / files::kAggregated, stats::aggregated_to_csv(agg));
  require_data(!agg.values.empty(), "horizon shorter than one aggregation interval");
  const std::vector<double> values(agg.values.begin(), agg.values.end());
  const auto ci = stats::bootstrap_ci(values, stats::Statistic::max(), c.num("stats.ci_level"), c.count("stats.resamples"),
                                      stage_seed(c.seed(), Stage::kBootstrap));
  write_file(out / files::kMigrationCi, stats::ci_to_csv(ci));
}

inline void stage_downtime(const Config& c, const fs::path& out) {
  const auto p = downtime_params(c);
  write_file(out / files::kDowntimeSurface, downtime::surface_to_csv(p));
  const auto w = downtime::worst_case_downtime(p);
  std::ostringstream s;
  s << "downtime_s,r_bps,d_bps,d_mig_s\n"
    << fmt_double(w.seconds) << ',' << fmt_double(w.r) << ',' << fmt_double(w.d) << ',' << fmt_double(c.num("downtime.d_mig_s"))
    << '\n';
  write_file(out / files::kDowntimeWorst, s.str());
}

/// Guaranteed migration rate per day: the bootstrap CI high end or a fixed value.
inline double migration_rate(const Config& c, const fs::path& ci_csv) {
  const auto& mode = c.str("sla.migration_rate");
  if (mode == "ci") return stats::load_ci(ci_csv).high;
  const auto v = parse_double(mode);
  require_config(v.has_value() && *v >= 0.0, "sla.migration_rate: expected 'ci' or a non-negative number");
  return *v;
}

struct SlaInputs {
  sla::BaseVm base;
  sla::MigrationStats migration;
  sla::PauserSavings pauser;
};

inline SlaInputs sla_inputs(const Config& c, const fs::path& energy_csv, const fs::path& ci_csv) {
  SlaInputs in;
  in.base = base_vm(c);
  const auto energy = load_energy_summary(energy_csv);
  in.migration.availability = sla::migration_availability(migration_rate(c, ci_csv), c.num("downtime.d_mig_s"));
  in.migration.en_savings = energy.migration_savings();
  const auto& mode = c.str("sla.pauser_savings");
  if (mode == "simulated") in.pauser = sla::PauserSavings::simulated(energy.pauser_savings());
  else if (mode == "heuristic") in.pauser = sla::PauserSavings::heuristic(c.num("sla.idle_share"));
  else throw ConfigError("sla.pauser_savings: expected 'simulated' or 'heuristic'");
  return in;
}

inline sla::Catalog build_catalog(const Config& c, const SlaInputs& in) {
  const auto& mode = c.str("sla.catalog");
  if (mode == "8") return sla::build_catalog_8(in.base, in.migration, in.pauser);
  require_config(mode == "n", "sla.catalog: expected '8' or 'n'");
  return sla::build_catalog_n(in.base, in.migration, static_cast<int>(c.integer("sla.catalog_n")), in.pauser);
}

inline void stage_catalog(const Config& c, const fs::path& energy_csv, const fs::path& ci_csv, const fs::path& out) {
  const auto catalog = build_catalog(c, sla_inputs(c, energy_csv, ci_csv));
  write_file(out / files::kCatalogJson, sla::to_json(catalog).dump(2) + "\n");
  write_file(out / files::kCatalogCsv, sla::catalog_to_csv(catalog));
}

inline void stage_users(const Config& c, const fs::path& out) {
  const std::uint64_t wseed = stage_seed(c.seed(), Stage::kWorkloads);
  std::vector<users::WebWorkload> web;
  if (const auto& p = c.str("users.web_csv"); !p.empty()) {
    web = users::load_web_workloads(p);
  } else {
    users::WebSynthParams wp;
    wp.sites = c.count("users.web_sites");
    wp.hours = c.count("users.web_hours");
    wp.threshold = c.num("users.web_threshold");
    wp.requirement_scale = c.num("users.web_requirement_scale");
    web = users::synth_web_workloads(wp, derive_seed(wseed, 0));
    write_file(out / files::kWebWorkloads, users::web_workloads_to_csv(web, synth_params(c).start));
  }
  std::vector<users::HpcWorkload> hpc;
  if (const auto& p = c.str("users.hpc_csv"); !p.empty()) {
    hpc = users::load_hpc_workloads(p);
  } else {
    users::HpcSynthParams hp;
    hp.users = c.count("users.hpc_users");
    hp.span_hours = c.num("users.hpc_span_hours");
    hp.load_log_mean = c.num("users.hpc_load_log_mean");
    hp.load_log_sigma = c.num("users.hpc_load_log_sigma");
    hpc = users::synth_hpc_workloads(hp, derive_seed(wseed, 1));
    write_file(out / files::kHpcWorkloads, users::hpc_workloads_to_csv(hpc));
  }
  require_data(!web.empty(), "no web workloads");

  const double threshold = c.num("users.web_threshold");
  std::vector<double> web_req;
  std::ostringstream wr;
  wr << "site,mean_rate,av_offset\n";
  for (const auto& w : web) {
    const double r = users::web_requirement(w, threshold);
    web_req.push_back(r);
    const double mean = threshold / std::max(1e-300, 1.0 - r);
    wr << w.site << ',' << fmt_double(r > 0.0 ? mean : 0.0) << ',' << fmt_double(r) << '\n';
  }
  write_file(out / files::kWebRequirements, wr.str());

  const double floor = c.num("users.hpc_floor");
  const auto hreq = users::hpc_requirements(hpc, floor);
  std::ostringstream hr;
  hr << "user,load,av_offset\n";
  for (std::size_t i = 0; i < hreq.users.size(); ++i)
    hr << hreq.users[i] << ',' << fmt_double(hreq.loads[i]) << ',' << fmt_double(hreq.av_offsets[i]) << '\n';
  write_file(out / files::kHpcRequirements, hr.str());

  users::RequirementModel model;
  model.web = users::fit_exponential(web_req, 1.0, -1.0);
  model.hpc = users::fit_exponential(hreq.av_offsets, floor, 1.0);
  model.hpc_floor = floor;
  model.hpc_load_ref = hreq.load_ref;
  std::ostringstream rm;
  rm << "kind,anchor,direction,scale,load_ref\n"
     << "web," << fmt_double(model.web.anchor) << ',' << fmt_double(model.web.direction) << ','
     << fmt_double(model.web.scale) << ",\n"
     << "hpc," << fmt_double(model.hpc.anchor) << ',' << fmt_double(model.hpc.direction) << ','
     << fmt_double(model.hpc.scale) << ',' << fmt_double(model.hpc_load_ref) << '\n';
  write_file(out / files::kRequirementModel, rm.str());

  users::PopulationParams pp;
  pp.n = c.count("users.n");
  pp.web_ratio = c.num("users.web_ratio");
  pp.hpc_ratio = c.num("users.hpc_ratio");
  pp.base_price = c.num("sla.base_price");
  pp.noise_sigma = c.num("users.noise_sigma");
  const auto pop = users::sample_population(pp, model, stage_seed(c.seed(), Stage::kPopulation));
  for (const auto& u : pop) u.validate();
  write_file(out / files::kPopulationJson, users::to_json(pop).dump(2) + "\n");

  // WTP histogram in 0.01 USD/h bins.
  std::map<long long, std::pair<int, int>> bins;
  for (const auto& u : pop) {
    auto& b = bins[static_cast<long long>(std::floor(u.wtp / 0.01))];
    (u.kind == users::Kind::kWeb ? b.first : b.second)++;
  }
  std::ostringstream wh;
  wh << "wtp_bin_low,web,hpc\n";
  for (const auto& [bin, counts] : bins) wh << fmt_double(bin * 0.01) << ',' << counts.first << ',' << counts.second << '\n';
  write_file(out / files::kWtpHistogram, wh.str());
}

inline void stage_select(const Config& c, const fs::path& catalog_json, const fs::path& population_json,
                         const fs::path& out) {
  const auto catalog = sla::load_catalog(catalog_json);
  const auto pop = users::load_population(population_json);
  const auto params = selection_params(c);
  const std::uint64_t seed = stage_seed(c.seed(), Stage::kSelection);
  const auto outcome = selection::simulate_selection(pop, catalog, params, seed);
  write_file(out / files::kOutcomeJson, selection::to_json(outcome, pop).dump(2) + "\n");

  std::ostringstream f10;
  f10 << "offer_id,availability,price_usd_per_h,web,hpc\n";
  for (const auto& o : catalog) {
    int web = 0, hpc = 0;
    for (std::size_t i = 0; i < pop.size(); ++i)
      if (outcome.per_user[i].offer == o.id) (pop[i].kind == users::Kind::kWeb ? web : hpc)++;
    f10 << o.id << ',' << fmt_double(o.availability) << ',' << fmt_double(o.price) << ',' << web << ',' << hpc << '\n';
  }
  write_file(out / files::kSelection, f10.str());

  std::ostringstream f11;
  f11 << "user,kind,av_offset,wtp,status,offer\n";
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const auto& o = outcome.per_user[i];
    f11 << i << ',' << users::to_string(pop[i].kind) << ',' << fmt_double(pop[i].av_offset) << ','
        << fmt_double(pop[i].wtp) << ',' << selection::to_string(o.status) << ',' << o.offer << '\n';
  }
  write_file(out / files::kUsersScatter, f11.str());

  // Offerings made of the first k offers.
  std::ostringstream f12;
  f12 << "offered,conversion";
  for (const auto& o : catalog) f12 << ",sla" << o.id;
  f12 << '\n';
  for (std::size_t k = 1; k <= catalog.size(); ++k) {
    const sla::Catalog prefix(catalog.begin(), catalog.begin() + static_cast<std::ptrdiff_t>(k));
    const auto r = selection::simulate_selection(pop, prefix, params, seed);
    f12 << k << ',' << r.aggregates.conversion;
    for (std::size_t i = 0; i < catalog.size(); ++i) f12 << ',' << (i < k ? r.aggregates.histogram[i] : 0);
    f12 << '\n';
  }
  write_file(out / files::kCombinations, f12.str());
}

inline selection::SweepResult run_sweep(const Config& c, const SlaInputs& in, const users::Population& pop) {
  selection::SweepParams sp;
  const auto lo = c.integer("sweep.min"), hi = c.integer("sweep.max");
  require_config(lo >= 1 && hi >= lo, "sweep: need 1 <= sweep.min <= sweep.max");
  for (auto n = lo; n <= hi; ++n) sp.sizes.push_back(static_cast<int>(n));
  sp.runs = c.count("sweep.runs");
  sp.ci_level = c.num("stats.ci_level");
  sp.ci_resamples = c.count("stats.resamples");
  return selection::sweep_catalog_sizes(pop, in.base, in.migration, in.pauser, selection_params(c), sp,
                                        stage_seed(c.seed(), Stage::kSweep));
}

inline void stage_sweep(const Config& c, const fs::path& energy_csv, const fs::path& ci_csv,
                        const fs::path& population_json, const fs::path& out) {
  const auto r = run_sweep(c, sla_inputs(c, energy_csv, ci_csv), users::load_population(population_json));
  write_file(out / files::kSweep, selection::sweep_to_csv(r));
  write_file(out / files::kSweepCi, selection::sweep_ci_to_csv(r));
  write_file(out / files::kSweepSummary, selection::sweep_summary_to_csv(r));
}

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

/// Headline metrics of a finished bundle.
inline void stage_summary(const Config& c, const fs::path& dir) {
  const auto ci = stats::load_ci(dir / files::kMigrationCi);
  const auto catalog = sla::load_catalog(dir / files::kCatalogJson);
  const auto outcome = nlohmann::json::parse(read_file(dir / files::kOutcomeJson));
  const auto& agg = outcome.at("aggregates");
  const auto pop = users::load_population(dir / files::kPopulationJson);
  const auto in = sla_inputs(c, dir / files::kEnergySummary, dir / files::kMigrationCi);

  LineReader worst(dir / files::kDowntimeWorst);
  std::string line;
  worst.next(line);
  worst.next(line);
  const auto wc = split_csv(line);

  std::ostringstream s;
  s << "progressive SLA pipeline summary\n";
  s << "seed: " << c.seed() << "\n\n";
  s << "migration rate: " << fixed(ci.level * 100, 0) << "% bootstrap CI of the daily worst case = [" << fmt_double(ci.low)
    << ", " << fmt_double(ci.high) << "] migrations/day\n";
  s << "guaranteed rate used: " << fmt_double(migration_rate(c, dir / files::kMigrationCi)) << " migrations/day\n";
  s << "downtime per migration: " << fmt_double(c.num("downtime.d_mig_s")) << " s (grid worst case "
    << (wc.size() >= 3 ? std::string(wc[0]) + " s at R=" + std::string(wc[1]) + " bit/s, D=" + std::string(wc[2]) + " bit/s" : "n/a")
    << ")\n";
  s << "SLA2 availability guarantee: " << fixed(in.migration.availability, 6) << "\n";
  s << "pauser savings source: " << in.pauser.source_name() << "\n\n";

  s << "catalog:\n";
  for (const auto& o : catalog)
    s << "  SLA" << o.id << "  tc=" << o.tc << "  availability=" << fixed(o.availability, 5)
      << "  en_savings=" << fixed(o.en_savings, 4) << "  price=" << fixed(o.price, 4) << " USD/h\n";

  const auto n = static_cast<double>(pop.size());
  const int conv = agg.at("conversion").get<int>();
  const int unmatched = agg.at("unmatched").get<int>();
  const int quit = agg.at("quit").get<int>();
  s << "\nselection over " << pop.size() << " users:\n";
  s << "  conversion: " << conv << " (" << fixed(100.0 * conv / n, 1) << "%)\n";
  s << "  unmatched: " << unmatched << " (" << fixed(100.0 * unmatched / n, 1) << "%)\n";
  s << "  quit: " << quit << " (" << fixed(100.0 * quit / n, 1) << "%)\n";
  s << "  mean P_quit: " << fixed(agg.at("mean_p_quit").get<double>(), 4) << "\n";
  s << "  lease-weighted en_savings: " << fixed(agg.at("weighted_en_savings").get<double>(), 4)
    << " (reference 0.39)\n";
  s << "  service revenue: " << fixed(agg.at("revenue_usd_year").get<double>(), 2) << " USD/year\n";

  if (fs::exists(dir / files::kSweepCi)) {
    LineReader r(dir / files::kSweepCi);
    r.next(line);
    r.next(line);
    const auto cc = split_csv(line);
    s << "\noptimal catalog size: " << fixed(c.num("stats.ci_level") * 100, 0) << "% CI = [" << cc.at(0) << ", "
      << cc.at(1) << "] (reference [8, 10])\n";
  }
  write_file(dir / files::kSummary, s.str());
}

/// Wraps a stage so failures carry its name and keep their exit-code class.
template <typename Fn>
void run_stage(const char* name, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("stage ") + name + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string("stage ") + name + ": " + e.what());
  } catch (const InvariantError& e) {
    throw InvariantError(std::string("stage ") + name + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("stage ") + name + ": " + e.what());
  } catch (const std::exception& e) {
    throw InvariantError(std::string("stage ") + name + ": " + e.what());
  }
}

/// Runs every stage into `<out>.partial` and renames it to `out` on success;
/// on failure the partial directory is removed and the error rethrown.
inline void run_pipeline(const Config& c, const fs::path& out) {
  const fs::path tmp = out.string() + ".partial";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  try {
    run_stage("config", [&] { write_file(tmp / files::kConfig, c.dump()); });
    run_stage("geotemporal", [&] { stage_geo(c, tmp); });
    run_stage("cloudsim", [&] { stage_simulate(c, tmp / files::kGeo, tmp); });
    run_stage("tracestats", [&] { stage_analyze(c, tmp / files::kTraceMigration, tmp); });
    run_stage("downtime", [&] { stage_downtime(c, tmp); });
    run_stage("slamodel", [&] { stage_catalog(c, tmp / files::kEnergySummary, tmp / files::kMigrationCi, tmp); });
    run_stage("users", [&] { stage_users(c, tmp); });
    run_stage("selection", [&] { stage_select(c, tmp / files::kCatalogJson, tmp / files::kPopulationJson, tmp); });
    run_stage("sweep", [&] {
      stage_sweep(c, tmp / files::kEnergySummary, tmp / files::kMigrationCi, tmp / files::kPopulationJson, tmp);
    });
    run_stage("summary", [&] { stage_summary(c, tmp); });
  } catch (...) {
    std::error_code ec;
    fs::remove_all(tmp, ec);
    throw;
  }
  fs::remove_all(out);
  fs::rename(tmp, out);
}

}  // namespace progsla::pipeline
