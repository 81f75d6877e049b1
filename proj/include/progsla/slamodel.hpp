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

// Availability, energy savings and price per treatment category, and the SLA
// catalogs built from them.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "progsla/error.hpp"
#include "progsla/io.hpp"

namespace progsla::sla {

inline constexpr double kSecondsPerDay = 86400.0;

/// Reference instance with no energy-aware management (m3.xlarge-like).
struct BaseVm {
  std::string name = "m3.xlarge";
  double price = 0.28;          // USD/h
  double availability = 0.9995;
  double service_cost = 0.1;    // USD/h

  /// Energy component implied by price = en_cost + Av * service_cost.
  [[nodiscard]] double en_cost() const { return price - availability * service_cost; }

  void validate() const {
    require_config(availability > 0.0 && availability <= 1.0, "base vm: availability must lie in (0, 1]");
    require_config(service_cost >= 0.0, "base vm: service_cost must be >= 0");
    require_config(price >= service_cost * availability, "base vm: price below its service component");
  }
};

struct SlaOffer {
  int id = 1;
  int tc = 1;
  double availability = 1.0;
  double en_savings = 0.0;
  double price = 0.0;  // USD/h

  friend bool operator==(const SlaOffer&, const SlaOffer&) = default;
};

using Catalog = std::vector<SlaOffer>;

inline double availability_from_downtime(double daily_downtime_s) {
  require_config(daily_downtime_s >= 0.0 && daily_downtime_s <= kSecondsPerDay,
                 "availability_from_downtime: daily downtime must lie in [0, 86400] s");
  return 1.0 - daily_downtime_s / kSecondsPerDay;
}

inline double energy_savings(double tc_cost, double tc1_cost) {
  require_config(tc1_cost > 0.0, "energy_savings: reference cost must be > 0");
  return 1.0 - tc_cost / tc1_cost;
}

inline double vm_price(double en_cost, double availability, double service_cost) {
  return en_cost + availability * service_cost;
}

/// Guaranteed availability under live migration: worst-case daily migration
/// rate times worst-case downtime per migration.
inline double migration_availability(double migrations_per_day, double downtime_per_migration_s) {
  return availability_from_downtime(migrations_per_day * downtime_per_migration_s);
}

struct MigrationStats {
  double availability = migration_availability(4.0, 400.0);
  double en_savings = 0.0;
};

/// Energy savings of the peak pauser as a function of its daily downtime.
///
/// `by_hours[k]` holds the savings with k paused hours per day (k = 0..24),
/// normally measured by simulation; fractional hours interpolate linearly.
/// Without a simulation the heuristic assumes savings = fraction * idle_share.
struct PauserSavings {
  enum class Source { kSimulated, kHeuristic };
  Source source = Source::kHeuristic;
  std::vector<double> by_hours;
  double idle_share = 1.0;

  static PauserSavings heuristic(double idle_share = 1.0) {
    PauserSavings p;
    p.source = Source::kHeuristic;
    p.idle_share = idle_share;
    return p;
  }

  static PauserSavings simulated(std::vector<double> by_hours) {
    require_data(by_hours.size() == 25, "pauser savings: need one value per paused hour count 0..24");
    for (std::size_t k = 1; k < by_hours.size(); ++k)
      require_data(by_hours[k] + 1e-12 >= by_hours[k - 1], "pauser savings: not monotone in paused hours");
    PauserSavings p;
    p.source = Source::kSimulated;
    p.by_hours = std::move(by_hours);
    return p;
  }

  [[nodiscard]] double at(double downtime_fraction) const {
    require_config(downtime_fraction >= 0.0 && downtime_fraction <= 1.0, "pauser savings: fraction must lie in [0, 1]");
    if (source == Source::kHeuristic) return downtime_fraction * idle_share;
    const double x = 24.0 * downtime_fraction;
    const auto k = static_cast<std::size_t>(std::floor(x));
    if (k >= 24) return by_hours[24];
    return by_hours[k] + (x - static_cast<double>(k)) * (by_hours[k + 1] - by_hours[k]);
  }

  [[nodiscard]] std::string_view source_name() const {
    return source == Source::kSimulated ? "simulated" : "heuristic";
  }
};

inline SlaOffer make_offer(const BaseVm& base, int id, int tc, double availability, double en_savings) {
  SlaOffer o;
  o.id = id;
  o.tc = tc;
  o.availability = availability;
  o.en_savings = en_savings;
  o.price = vm_price(base.en_cost() * (1.0 - en_savings), availability, base.service_cost);
  return o;
}

/// Within the pauser family (ids >= 3) lower availability must mean a
/// strictly lower price.
inline void check_catalog(const Catalog& c) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& o = c[i];
    ensure(o.availability >= 0.0 && o.availability <= 1.0, "catalog: availability out of [0, 1]");
    ensure(o.price >= 0.0, "catalog: negative price");
    ensure(o.en_savings <= 1.0, "catalog: en_savings > 1");
    ensure(o.id == static_cast<int>(i) + 1, "catalog: ids must be 1..n in order");
    if (i >= 3) {
      ensure(o.availability < c[i - 1].availability, "catalog: pauser availabilities not decreasing");
      ensure(o.price < c[i - 1].price, "catalog: pauser price not strictly decreasing with availability");
    }
  }
}

inline SlaOffer base_offer(const BaseVm& base) { return make_offer(base, 1, 1, base.availability, 0.0); }

/// SLA1 base, SLA2 migration, SLA3..8 peak pauser with downtime fractions
/// evenly spaced from 1/8 to 2/3 of the day.
inline Catalog build_catalog_8(const BaseVm& base, const MigrationStats& mig, const PauserSavings& pauser) {
  base.validate();
  require_config(mig.availability > 0.0 && mig.availability <= 1.0, "catalog: migration availability must lie in (0, 1]");
  Catalog c;
  c.push_back(base_offer(base));
  c.push_back(make_offer(base, 2, 2, mig.availability, mig.en_savings));
  constexpr double lo = 0.125, hi = 2.0 / 3.0;
  for (int i = 0; i < 6; ++i) {
    const double f = i == 5 ? hi : lo + (hi - lo) * i / 5.0;
    c.push_back(make_offer(base, 3 + i, 3 + i, 1.0 - f, pauser.at(f)));
  }
  check_catalog(c);
  return c;
}

/// SLA1 base, SLA2 migration, then n-2 pauser offers at availabilities
/// 1 - k/(n-1), k = 1..n-2.
inline Catalog build_catalog_n(const BaseVm& base, const MigrationStats& mig, int n, const PauserSavings& pauser) {
  base.validate();
  require_config(n >= 1, "catalog: n must be >= 1");
  Catalog c;
  c.push_back(base_offer(base));
  if (n >= 2) c.push_back(make_offer(base, 2, 2, mig.availability, mig.en_savings));
  const int m = n - 2;
  for (int k = 1; k <= m; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(m + 1);
    c.push_back(make_offer(base, 2 + k, 2 + k, 1.0 - f, pauser.at(f)));
  }
  check_catalog(c);
  return c;
}

// ------------------------------------------------------- JSON / CSV formats

inline nlohmann::json to_json(const Catalog& c) {
  auto arr = nlohmann::json::array();
  for (const auto& o : c)
    arr.push_back({{"id", o.id}, {"tc", o.tc}, {"availability", o.availability}, {"en_savings", o.en_savings},
                   {"price_usd_per_h", o.price}});
  return arr;
}

inline Catalog catalog_from_json(const nlohmann::json& j) {
  require_data(j.is_array(), "catalog JSON must be an array");
  Catalog c;
  try {
    for (const auto& e : j)
      c.push_back({e.at("id").get<int>(), e.at("tc").get<int>(), e.at("availability").get<double>(),
                   e.at("en_savings").get<double>(), e.at("price_usd_per_h").get<double>()});
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("catalog JSON: ") + ex.what());
  }
  require_data(!c.empty(), "catalog must not be empty");
  for (const auto& o : c)
    require_data(o.availability >= 0.0 && o.availability <= 1.0 && o.price >= 0.0 && o.en_savings <= 1.0,
                 "catalog JSON: offer " + std::to_string(o.id) + " violates its invariants");
  return c;
}

inline Catalog load_catalog(const std::filesystem::path& path) {
  try {
    return catalog_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& ex) {
    throw DataError(path.string() + ": " + ex.what());
  }
}

inline std::string catalog_to_csv(const Catalog& c) {
  std::ostringstream out;
  out << "id,tc,availability,en_savings,price_usd_per_h\n";
  for (const auto& o : c)
    out << o.id << ',' << o.tc << ',' << fmt_double(o.availability) << ',' << fmt_double(o.en_savings) << ','
        << fmt_double(o.price) << '\n';
  return out.str();
}

}  // namespace progsla::sla
