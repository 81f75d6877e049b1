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

// Utility-based SLA selection with a search-quit probability, and the
// catalog-size sweep built on it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "progsla/error.hpp"
#include "progsla/io.hpp"
#include "progsla/rng.hpp"
#include "progsla/slamodel.hpp"
#include "progsla/tracestats.hpp"
#include "progsla/users.hpp"

namespace progsla::selection {

inline constexpr double kHoursPerYear = 8760.0;

struct SatisfactionParams {
  double alpha = 60.0;
  double beta = 0.01;
  double gamma = 0.99;

  void validate() const {
    require_config(alpha > 0.0 && beta > 0.0 && gamma > 0.0 && gamma <= 1.0,
                   "satisfaction: need alpha, beta, gamma > 0 and gamma <= 1");
  }
};

/// Logistic satisfaction with the offered availability `av_t`; its slope
/// widens for users with lower requirements.
inline double satisfaction(double av_offset, double av_t, const SatisfactionParams& p = {}) {
  const double e = std::exp(av_offset * av_offset * p.alpha * (av_offset - av_t));
  return p.gamma / (p.gamma + p.beta * e);
}

inline double utility(const users::UserProfile& u, const sla::SlaOffer& offer, const SatisfactionParams& p = {}) {
  return u.wtp * satisfaction(u.av_offset, offer.availability, p) - offer.price;
}

/// Probability of abandoning the scan before examination `min_checks`, when
/// the user stops after examination j with probability min(1, j * check_cost).
inline double quit_probability(int min_checks, double check_cost = 0.015) {
  double total = 0.0;
  double survive = 1.0;
  for (int j = 1; j <= min_checks - 1; ++j) {
    const double stop = std::min(1.0, j * check_cost);
    total += stop * survive;
    survive *= 1.0 - stop;
    if (survive <= 0.0) break;
  }
  return total;
}

struct SelectionParams {
  SatisfactionParams satisfaction;
  double check_cost = 0.015;
  double service_cost = 0.1;  // USD/h, service component for revenue

  void validate() const {
    satisfaction.validate();
    require_config(check_cost >= 0.0, "selection: check_cost must be >= 0");
    require_config(service_cost >= 0.0, "selection: service_cost must be >= 0");
  }
};

enum class Status { kChosen, kUnmatched, kQuit };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::kChosen: return "chosen";
    case Status::kUnmatched: return "unmatched";
    case Status::kQuit: return "quit";
  }
  return "?";
}

struct UserOutcome {
  Status status = Status::kUnmatched;
  int offer = 0;           // chosen offer id, 0 if none
  double utility = 0.0;    // utility of the chosen (or best) offer
  int checks = 0;          // examinations performed
  int min_checks = 0;      // position of the first positive offer, 0 if none
  double p_quit = 0.0;
};

struct Aggregates {
  int conversion = 0;
  int unmatched = 0;
  int quit = 0;
  std::vector<int> histogram;  // index id-1
  double weighted_en_savings = 0.0;
  double revenue_usd_year = 0.0;
  double mean_p_quit = 0.0;
};

struct SelectionOutcome {
  std::vector<UserOutcome> per_user;
  Aggregates aggregates;
};

/// Deterministic part of one user's scan: utilities do not depend on the
/// quit draws, so they can be computed once per catalog.
struct UserScan {
  int first_positive = -1;  // 0-based index, -1 if none
  int best = -1;            // argmax utility, lowest index on ties
  double best_utility = -std::numeric_limits<double>::infinity();
};

inline UserScan scan_user(const users::UserProfile& u, const sla::Catalog& catalog, const SatisfactionParams& p) {
  UserScan s;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const double ut = utility(u, catalog[i], p);
    if (ut > 0.0 && s.first_positive < 0) s.first_positive = static_cast<int>(i);
    if (ut > s.best_utility) {
      s.best_utility = ut;
      s.best = static_cast<int>(i);
    }
  }
  return s;
}

/// Resolves one user given the precomputed scan. The stop draw after
/// examination j of user `user` is a pure function of (seed, user, j), so
/// runs sharing a seed share their draws across catalogs.
inline UserOutcome resolve_user(const UserScan& scan, std::size_t catalog_size, std::size_t user, double check_cost,
                                std::uint64_t seed) {
  UserOutcome o;
  o.utility = scan.best_utility;
  if (scan.first_positive < 0) {
    o.status = Status::kUnmatched;
    o.checks = static_cast<int>(catalog_size);
    o.p_quit = quit_probability(static_cast<int>(catalog_size) + 1, check_cost);
    return o;
  }
  o.min_checks = scan.first_positive + 1;
  o.p_quit = quit_probability(o.min_checks, check_cost);
  for (int j = 1; j < o.min_checks; ++j) {
    if (unit_draw(seed, user, static_cast<std::uint64_t>(j)) < std::min(1.0, j * check_cost)) {
      o.status = Status::kQuit;
      o.checks = j;
      return o;
    }
  }
  o.status = Status::kChosen;
  o.offer = scan.best + 1;
  o.checks = static_cast<int>(catalog_size);
  return o;
}

inline Aggregates aggregate(const std::vector<UserOutcome>& per_user, const users::Population& pop,
                            const sla::Catalog& catalog, double service_cost) {
  Aggregates a;
  a.histogram.assign(catalog.size(), 0);
  double lease_sum = 0.0, savings_sum = 0.0, pq = 0.0;
  for (std::size_t i = 0; i < per_user.size(); ++i) {
    const auto& o = per_user[i];
    pq += o.p_quit;
    if (o.status == Status::kUnmatched) ++a.unmatched;
    if (o.status == Status::kQuit) ++a.quit;
    if (o.status != Status::kChosen) continue;
    const auto& offer = catalog[static_cast<std::size_t>(o.offer - 1)];
    const double lw = pop[i].lease_weight;
    ++a.conversion;
    ++a.histogram[static_cast<std::size_t>(o.offer - 1)];
    lease_sum += lw;
    savings_sum += lw * offer.en_savings;
    a.revenue_usd_year += offer.availability * service_cost * kHoursPerYear * lw;
  }
  a.weighted_en_savings = lease_sum > 0.0 ? savings_sum / lease_sum : 0.0;
  a.mean_p_quit = per_user.empty() ? 0.0 : pq / static_cast<double>(per_user.size());
  return a;
}

/// Each user scans the catalog in id order; before reaching the first
/// positive-utility offer they may give up after every examination. A user
/// who reaches it finishes the scan and takes the best offer (lowest id on
/// ties); users with no positive offer stay unmatched.
inline SelectionOutcome simulate_selection(const users::Population& pop, const sla::Catalog& catalog,
                                           const SelectionParams& params, std::uint64_t seed) {
  params.validate();
  require_config(!catalog.empty(), "selection: catalog must not be empty");
  SelectionOutcome out;
  out.per_user.reserve(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const auto scan = scan_user(pop[i], catalog, params.satisfaction);
    out.per_user.push_back(resolve_user(scan, catalog.size(), i, params.check_cost, seed));
  }
  out.aggregates = aggregate(out.per_user, pop, catalog, params.service_cost);
  ensure(out.aggregates.conversion <= static_cast<int>(pop.size()), "selection: conversion exceeds population");
  return out;
}

// ------------------------------------------------------------------ sweep

struct SweepResult {
  std::vector<int> sizes;
  std::size_t runs = 0;
  std::vector<std::vector<int>> conversion;  // [size index][run]
  std::vector<double> mean_p_quit;           // per size (identical across runs)
  std::vector<int> argmax_size;              // per run, smallest size on ties
  stats::BootstrapCI optimal_ci;
};

struct SweepParams {
  std::vector<int> sizes;
  std::size_t runs = 100;
  double ci_level = 0.95;
  std::size_t ci_resamples = 10000;
};

/// Conversion over catalog sizes. Run r uses the same seed for every size,
/// so sizes are compared under common quit draws; the optimal-size CI is the
/// percentile bootstrap of the median per-run argmax size.
inline SweepResult sweep_catalog_sizes(const users::Population& pop, const sla::BaseVm& base,
                                       const sla::MigrationStats& mig, const sla::PauserSavings& pauser,
                                       const SelectionParams& params, const SweepParams& sweep, std::uint64_t seed) {
  params.validate();
  require_config(!sweep.sizes.empty(), "sweep: sizes must not be empty");
  require_config(sweep.runs >= 1, "sweep: runs must be >= 1");
  SweepResult r;
  r.sizes = sweep.sizes;
  r.runs = sweep.runs;
  r.conversion.assign(sweep.sizes.size(), std::vector<int>(sweep.runs, 0));

  for (std::size_t s = 0; s < sweep.sizes.size(); ++s) {
    const auto catalog = sla::build_catalog_n(base, mig, sweep.sizes[s], pauser);
    std::vector<UserScan> scans;
    scans.reserve(pop.size());
    double pq = 0.0;
    for (const auto& u : pop) scans.push_back(scan_user(u, catalog, params.satisfaction));
    for (std::size_t run = 0; run < sweep.runs; ++run) {
      const std::uint64_t run_seed = derive_seed(seed, run);
      int conv = 0;
      for (std::size_t i = 0; i < pop.size(); ++i) {
        const auto o = resolve_user(scans[i], catalog.size(), i, params.check_cost, run_seed);
        conv += o.status == Status::kChosen ? 1 : 0;
        if (run == 0) pq += o.p_quit;
      }
      r.conversion[s][run] = conv;
    }
    r.mean_p_quit.push_back(pop.empty() ? 0.0 : pq / static_cast<double>(pop.size()));
  }

  std::vector<double> argmax_values;
  for (std::size_t run = 0; run < sweep.runs; ++run) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < sweep.sizes.size(); ++s) {
      const int c = r.conversion[s][run], b = r.conversion[best][run];
      if (c > b || (c == b && sweep.sizes[s] < sweep.sizes[best])) best = s;
    }
    r.argmax_size.push_back(sweep.sizes[best]);
    argmax_values.push_back(sweep.sizes[best]);
  }
  r.optimal_ci = stats::bootstrap_ci(argmax_values, stats::Statistic::quantile(0.5), sweep.ci_level,
                                     sweep.ci_resamples, derive_seed(seed, 0xC1ULL, 0));
  return r;
}

inline std::vector<double> mean_conversion(const SweepResult& r) {
  std::vector<double> out;
  for (const auto& row : r.conversion)
    out.push_back(std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(row.size()));
  return out;
}

// ------------------------------------------------------- JSON / CSV formats

inline nlohmann::json to_json(const SelectionOutcome& o, const users::Population& pop) {
  auto per_user = nlohmann::json::array();
  for (std::size_t i = 0; i < o.per_user.size(); ++i) {
    const auto& u = o.per_user[i];
    nlohmann::json j{{"user", i},
                     {"kind", std::string(users::to_string(pop[i].kind))},
                     {"status", std::string(to_string(u.status))},
                     {"utility", u.utility},
                     {"checks", u.checks},
                     {"min_checks", u.min_checks},
                     {"p_quit", u.p_quit}};
    j["offer"] = u.status == Status::kChosen ? nlohmann::json(u.offer) : nlohmann::json(nullptr);
    per_user.push_back(std::move(j));
  }
  const auto& a = o.aggregates;
  return {{"per_user", per_user},
          {"aggregates",
           {{"conversion", a.conversion},
            {"unmatched", a.unmatched},
            {"quit", a.quit},
            {"histogram", a.histogram},
            {"weighted_en_savings", a.weighted_en_savings},
            {"revenue_usd_year", a.revenue_usd_year},
            {"mean_p_quit", a.mean_p_quit}}}};
}

inline std::string sweep_to_csv(const SweepResult& r) {
  std::ostringstream out;
  out << "n_slas,run,conversion\n";
  for (std::size_t s = 0; s < r.sizes.size(); ++s)
    for (std::size_t run = 0; run < r.runs; ++run) out << r.sizes[s] << ',' << run << ',' << r.conversion[s][run] << '\n';
  return out.str();
}

inline std::string sweep_ci_to_csv(const SweepResult& r) {
  std::ostringstream out;
  out << "optimal_ci_low,optimal_ci_high\n" << fmt_double(r.optimal_ci.low) << ',' << fmt_double(r.optimal_ci.high) << '\n';
  return out.str();
}

inline std::string sweep_summary_to_csv(const SweepResult& r) {
  std::ostringstream out;
  out << "n_slas,mean_conversion,mean_p_quit\n";
  const auto mean = mean_conversion(r);
  for (std::size_t s = 0; s < r.sizes.size(); ++s)
    out << r.sizes[s] << ',' << fmt_double(mean[s]) << ',' << fmt_double(r.mean_p_quit[s]) << '\n';
  return out.str();
}

}  // namespace progsla::selection
